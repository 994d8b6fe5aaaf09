//! Time-dependent propagation under the linear sweep `u(t) = u_dot t`.
//!
//! The Hamiltonian `H(t) = H_wire + u(t) P_0` is linear in time, so the
//! fourth-order Magnus expansion over a step `h` is just
//!
//! ```text
//! Omega = -i h H(t + h/2) + (h^3 / 12) [H(t + h/2), u_dot P_0]
//! ```
//!
//! and `exp(Omega)` is unitary. The step size is controlled by comparing one
//! step of `h` with two steps of `h/2`, and the two half steps are kept. The state is never renormalised; its
//! norm is monitored instead.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix3c, State3, C64, I, ZERO};
use crate::model::{build_current_operator, build_hamiltonian_3site, Bond, HermitianMatrix3, RingParams, TestFlux};
use crate::spectral::{self, Eigensystem};
use crate::twolevel::TwoLevelParams;

/// How the run starts.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum InitialState {
    /// Instantaneous ground state at `u_start`.
    GroundState,
    /// The bare dot state `|0>`.
    Dot,
    /// Explicit amplitudes in the site basis; must be normalised.
    Custom([C64; 3]),
}

/// Linear sweep from `u_start` to `u_end` at rate `u_dot`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepProtocol {
    pub u_dot: f64,
    pub u_start: f64,
    pub u_end: f64,
    pub initial: InitialState,
}

impl SweepProtocol {
    pub fn new(u_dot: f64, u_start: f64, u_end: f64) -> Self {
        Self {
            u_dot,
            u_start,
            u_end,
            initial: InitialState::GroundState,
        }
    }

    pub fn with_initial(mut self, initial: InitialState) -> Self {
        self.initial = initial;
        self
    }

    /// Sweep window with the dot detuned by `margin` times the largest
    /// coupling on both sides.
    pub fn symmetric_window(params: &RingParams, u_dot: f64, margin: f64) -> Self {
        let reach = margin * params.max_coupling();
        Self::new(u_dot, -reach, reach)
    }

    pub fn duration(&self) -> f64 {
        (self.u_end - self.u_start) / self.u_dot
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.u_dot.is_finite() && self.u_dot > 0.0) {
            return Err(Error::InvalidProtocol(format!("u_dot must be positive, got {}", self.u_dot)));
        }
        if !(self.u_start.is_finite() && self.u_end.is_finite() && self.u_start < self.u_end) {
            return Err(Error::InvalidProtocol(format!(
                "need u_start < u_end, got [{}, {}]",
                self.u_start, self.u_end
            )));
        }
        if let InitialState::Custom(v) = self.initial {
            let drift = (linalg::norm_sqr(&v) - 1.0).abs();
            if !(drift <= 1e-12) {
                return Err(Error::InvalidProtocol(format!("initial state norm^2 off by {drift:e}")));
            }
        }
        Ok(())
    }
}

/// Step-size control.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepControl {
    /// Allowed local error per unit time.
    pub tol: f64,
    pub dt_initial: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    /// Minimum time between recorded samples; 0 records every step.
    pub sample_interval: f64,
    /// Largest tolerated `| |psi|^2 - 1 |`.
    pub norm_limit: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            dt_initial: 1e-3,
            dt_min: 1e-12,
            dt_max: f64::INFINITY,
            sample_interval: 0.0,
            norm_limit: 1e-9,
        }
    }
}

impl StepControl {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_sample_interval(mut self, interval: f64) -> Self {
        self.sample_interval = interval;
        self
    }

    pub fn with_dt_max(mut self, dt_max: f64) -> Self {
        self.dt_max = dt_max;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Sample {
    pub t: f64,
    pub u: f64,
    pub amplitudes: State3,
    /// `<psi| I |psi>` through bond 0-1.
    pub current: f64,
    /// Current through bond 1-2.
    pub current_12: f64,
    pub occupations: [f64; 3],
    /// `int I dt` since the start of the run.
    pub q_dyn: f64,
}

impl Sample {
    pub fn current_over_udot(&self, u_dot: f64) -> f64 {
        self.current / u_dot
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TimeTrace {
    pub protocol: SweepProtocol,
    pub samples: Vec<Sample>,
    pub steps: usize,
    pub rejected: usize,
    /// Largest `| |psi|^2 - 1 |` seen.
    pub max_norm_drift: f64,
}

impl TimeTrace {
    pub fn last(&self) -> &Sample {
        self.samples.last().expect("a trace always holds the initial sample")
    }

    pub fn q_dyn(&self) -> f64 {
        self.last().q_dyn
    }
}

struct Propagator {
    h_wire: Matrix3c,
    current: HermitianMatrix3,
    current_12: HermitianMatrix3,
    u_dot: f64,
}

impl Propagator {
    fn new(params: &RingParams, u_dot: f64) -> Self {
        Self {
            h_wire: *build_hamiltonian_3site(params, 0.0, TestFlux::none()).as_array(),
            current: build_current_operator(params, TestFlux::new(0.0, Bond::Bond01)),
            current_12: build_current_operator(params, TestFlux::new(0.0, Bond::Bond12)),
            u_dot,
        }
    }

    /// Eigensystem of `K = i Omega` for the step `[t, t + h]`; the step
    /// propagator is `exp(-i K)`.
    fn step_generator(&self, t: f64, h: f64) -> Eigensystem {
        let u_mid = self.u_dot * (t + 0.5 * h);
        let mut k = self.h_wire;
        for row in k.iter_mut() {
            for z in row.iter_mut() {
                *z *= h;
            }
        }
        k[0][0] += C64::from(h * u_mid);
        // [H, P0] has entries H_i0 delta_j0 - delta_i0 H_0j, and H_i0 does
        // not depend on u for i != 0.
        let c = I * (h * h * h / 12.0 * self.u_dot);
        for j in 1..3 {
            k[j][0] += c * self.h_wire[j][0];
            k[0][j] -= c * self.h_wire[0][j];
        }
        let mut gen = spectral::jacobi_hermitian(k);
        // Rounding in the Jacobi rotations leaves the eigenvectors orthonormal
        // only to a few ulps, with a bias that would accumulate over millions
        // of steps. Two Gram-Schmidt passes bring them to rounding level.
        for _ in 0..2 {
            for k in 0..3 {
                for j in 0..k {
                    let overlap = linalg::inner(&gen.vectors[j], &gen.vectors[k]);
                    gen.vectors[k] = linalg::sub(&gen.vectors[k], &linalg::scale(&gen.vectors[j], overlap));
                }
                let n = linalg::norm(&gen.vectors[k]);
                gen.vectors[k] = linalg::scale(&gen.vectors[k], C64::from(1.0 / n));
            }
        }
        gen
    }

    /// `exp(-i K) psi`, and the bond 0-1 charge passed during the step
    /// assuming the fixed generator `psi(s) = exp(-i K s / h) psi`.
    ///
    /// In the eigenbasis of `K` the current is a sum of exponentials, so the
    /// charge integral is exact for that path. The path itself carries a
    /// dot-phase error of order `u_dot s (h - s)`, which biases the charge by
    /// `O(u_dot h^3)` per step; callers cancel it by extrapolation.
    fn advance(&self, gen: &Eigensystem, psi: &State3) -> (State3, f64) {
        let b: [C64; 3] = std::array::from_fn(|k| linalg::inner(&gen.vectors[k], psi));
        let mut out = [ZERO; 3];
        for k in 0..3 {
            let w = b[k] * C64::from_polar(1.0, -gen.energies[k]);
            for i in 0..3 {
                out[i] += w * gen.vectors[k][i];
            }
        }
        let iv: [State3; 3] = std::array::from_fn(|k| self.current.apply(&gen.vectors[k]));
        let mut charge = 0.0;
        for j in 0..3 {
            for k in 0..3 {
                let element = linalg::inner(&gen.vectors[j], &iv[k]);
                let x = gen.energies[j] - gen.energies[k];
                charge += (b[j].conj() * b[k] * element * phase_average(x)).re;
            }
        }
        (out, charge)
    }

    fn sample(&self, t: f64, psi: &State3, q_dyn: f64) -> Sample {
        Sample {
            t,
            u: self.u_dot * t,
            amplitudes: *psi,
            current: self.current.expectation(psi),
            current_12: self.current_12.expectation(psi),
            occupations: [psi[0].norm_sqr(), psi[1].norm_sqr(), psi[2].norm_sqr()],
            q_dyn,
        }
    }
}

fn initial_state(params: &RingParams, protocol: &SweepProtocol) -> Result<State3> {
    Ok(match protocol.initial {
        InitialState::GroundState => spectral::ground_state(params, protocol.u_start, TestFlux::none())?.amplitudes,
        InitialState::Dot => [C64::from(1.0), ZERO, ZERO],
        InitialState::Custom(v) => v,
    })
}

/// `(e^{ix} - 1) / (ix)`, the mean of `e^{i x s}` over `s` in `[0, 1]`.
fn phase_average(x: f64) -> C64 {
    if x.abs() < 1e-4 {
        C64::new(1.0 - x * x / 6.0, 0.5 * x)
    } else {
        (C64::from_polar(1.0, x) - 1.0) / (I * x)
    }
}

/// Step errors below this are indistinguishable from rounding.
const ROUNDOFF: f64 = 64.0 * f64::EPSILON;

/// Integrate `i dpsi/dt = H(u(t)) psi` over the protocol window.
///
/// Bond currents are sampled at step boundaries. `Q_dyn` is integrated in
/// closed form within each step, so the rapidly oscillating part of the
/// current at large `|u|` does not limit the step size.
pub fn propagate(params: &RingParams, protocol: &SweepProtocol, control: &StepControl) -> Result<TimeTrace> {
    params.validate()?;
    protocol.validate()?;
    if !(control.tol > 0.0 && control.dt_min > 0.0 && control.dt_initial > 0.0 && control.dt_max > 0.0) {
        return Err(Error::InvalidProtocol("step control values must be positive".into()));
    }
    let prop = Propagator::new(params, protocol.u_dot);
    let t_start = protocol.u_start / protocol.u_dot;
    let t_end = protocol.u_end / protocol.u_dot;
    let mut psi = initial_state(params, protocol)?;
    let mut t = t_start;
    let mut q_dyn = 0.0;
    let mut h = control.dt_initial.min(control.dt_max);
    let mut trace = TimeTrace {
        protocol: *protocol,
        samples: vec![prop.sample(t, &psi, q_dyn)],
        steps: 0,
        rejected: 0,
        max_norm_drift: (linalg::norm_sqr(&psi) - 1.0).abs(),
    };
    let mut next_sample = t + control.sample_interval;

    while t < t_end {
        let remaining = t_end - t;
        // Fold a sliver of remaining time into this step.
        let last = h >= remaining * (1.0 - 1e-6);
        let step = if last { remaining } else { h };
        let (full, q_full) = prop.advance(&prop.step_generator(t, step), &psi);
        let (half, q_first) = prop.advance(&prop.step_generator(t, 0.5 * step), &psi);
        let (two, q_second) = prop.advance(&prop.step_generator(t + 0.5 * step, 0.5 * step), &half);
        let err = linalg::norm(&linalg::sub(&full, &two));
        let allowed = (control.tol * step).max(ROUNDOFF);
        // Local error of the fourth-order step scales as h^5, so err/h as h^4.
        let factor = if err > 0.0 { (0.9 * (allowed / err).powf(0.25)).clamp(0.2, 4.0) } else { 4.0 };
        if err > allowed && step > control.dt_min {
            trace.rejected += 1;
            h = factor.min(0.5) * step;
            if h < control.dt_min {
                return Err(Error::StepUnderflow {
                    t,
                    floor: control.dt_min,
                });
            }
            continue;
        }
        // The path bias scales as h^3: one full step carries four times
        // the bias of the two half steps.
        let q_halves = 0.5 * step * (q_first + q_second);
        q_dyn += (4.0 * q_halves - step * q_full) / 3.0;
        psi = two;
        t = if last { t_end } else { t + step };
        trace.steps += 1;

        let drift = (linalg::norm_sqr(&psi) - 1.0).abs();
        trace.max_norm_drift = trace.max_norm_drift.max(drift);
        if drift > control.norm_limit {
            return Err(Error::NormDrift {
                t,
                drift,
                limit: control.norm_limit,
            });
        }
        if t >= next_sample || t >= t_end {
            trace.samples.push(prop.sample(t, &psi, q_dyn));
            next_sample = t + control.sample_interval;
        }
        if !last {
            h = (factor * step).min(control.dt_max);
        }
    }
    Ok(trace)
}

/// Largest `|dp1/dt - I_01|` over a trace, with `dp1/dt` from central
/// differences of neighbouring samples. Small for a single path; for a ring
/// probability also leaves site 1 through bond 1-2.
pub fn continuity_defect(trace: &TimeTrace) -> f64 {
    trace
        .samples
        .windows(3)
        .map(|w| {
            let dp = (w[2].occupations[1] - w[0].occupations[1]) / (w[2].t - w[0].t);
            (dp - w[1].current).abs()
        })
        .fold(0.0, f64::max)
}

/// Safety margin in the adiabaticity inequalities.
pub const DEFAULT_KAPPA: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Adiabaticity {
    /// Slow compared with both the dot crossing and the metamorphosis.
    Adiabatic,
    /// Adiabatic at the dot crossing but too fast for the intra-wire
    /// readjustment, so transport follows the `c0 = 0` splitting.
    DiabaticWindow,
    /// Non-adiabatic already at the dot crossing.
    Sudden,
}

/// Classify a sweep rate against `kappa C^2` (dot crossing, with
/// `C = |c1 - c2| / sqrt 2`) and `kappa c0^2` (metamorphosis).
pub fn adiabaticity_classify(params: &RingParams, u_dot: f64, kappa: f64) -> Adiabaticity {
    let c = params.c_minus();
    if u_dot > kappa * c * c {
        Adiabaticity::Sudden
    } else if u_dot <= kappa * params.c0 * params.c0 {
        Adiabaticity::Adiabatic
    } else {
        Adiabaticity::DiabaticWindow
    }
}

/// Order-of-magnitude peak current at the fastest still-adiabatic rate,
/// `G(u_c) kappa C^2 = kappa lambda |C| / 4`.
pub fn max_current_estimate(p: &TwoLevelParams, kappa: f64) -> f64 {
    kappa * p.lambda * p.c_eff.abs() / 4.0
}
