//! Effective two-level reductions of the ring.
//!
//! Far from the wire levels the dot crosses a single wire state and the
//! conductance takes the single-path lineshape
//! `G(u) = lambda 2C^2 / (4C^2 + (u - u_c)^2)^{3/2}` (see
//! [`crate::transport::two_site_g`]). Three reductions supply `(lambda, C, u_c)`:
//!
//! * [`simple_params`]: the dot couples weakly to the even wire state
//!   (`|c+| << c0`) and crosses the odd state `|->` at `u = -c0`.
//! * [`shifted_params`]: the dot hybridises strongly with `|+>` and the lower
//!   dressed state crosses `|->` at a shifted point (`|c-| << c0`).
//! * [`dark_state_params`]: at `c0 = 0` the dot couples only to `|C>`, and the
//!   reduction is exact.
//!
//! Between these regimes the ground state undergoes a metamorphosis at
//! `u_m = c1 c2 / c0`, described by the reduced wire Hamiltonian.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix3c, State3, C64, ONE, ZERO};
use crate::model::{build_hamiltonian_3site, RingParams, TestFlux, TwoSiteParams};

/// Which reduction produced a [`TwoLevelParams`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    Simple,
    Shifted,
    DarkState,
}

/// Effective single-path crossing parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoLevelParams {
    pub lambda: f64,
    /// Effective coupling. Its sign is kept for reference; the lineshape only
    /// depends on `c_eff^2`.
    pub c_eff: f64,
    pub u_c: f64,
    pub scheme: Scheme,
    /// Slope of the crossing level, `sin^2(theta_c / 2)` for the shifted
    /// scheme and 1 otherwise. Already folded into `c_eff`.
    pub alpha: f64,
}

impl TwoLevelParams {
    pub fn two_site(&self) -> TwoSiteParams {
        TwoSiteParams::new(self.c_eff, self.u_c, self.lambda)
    }

    /// Lineshape value at `u`.
    pub fn conductance(&self, u: f64) -> Result<f64> {
        crate::transport::two_site_g(&self.two_site(), u)
    }

    /// Integrated lineshape up to `u`.
    pub fn charge(&self, u: f64) -> Result<f64> {
        crate::transport::two_site_q(&self.two_site(), u)
    }

    /// Peak height `lambda / (4 |C|)`.
    pub fn peak(&self) -> f64 {
        self.lambda / (4.0 * self.c_eff.abs())
    }

    /// Full width at half maximum of the lineshape, `2 sqrt(2^{2/3} - 1) 2|C|`.
    pub fn width(&self) -> f64 {
        4.0 * self.c_eff.abs() * (2f64.powf(2.0 / 3.0) - 1.0).sqrt()
    }
}

fn splitting_ratio(params: &RingParams) -> Result<f64> {
    let RingParams { c1, c2, .. } = params.with_nonnegative_c0();
    if c1 == c2 {
        return Err(Error::DegenerateSplitting);
    }
    Ok(c1 / (c1 - c2))
}

/// Weak coupling to `|+>`: `lambda = c1/(c1 - c2)`, `C = (c1 - c2)/sqrt 2`,
/// `u_c = -c0`.
///
/// Negative `c0` is handled through the site-2 gauge, so in general the
/// crossing is at `-|c0|`.
pub fn simple_params(params: &RingParams) -> Result<TwoLevelParams> {
    params.validate()?;
    let canon = params.with_nonnegative_c0();
    Ok(TwoLevelParams {
        lambda: splitting_ratio(params)?,
        c_eff: canon.c_minus(),
        u_c: -canon.c0,
        scheme: Scheme::Simple,
        alpha: 1.0,
    })
}

/// Mixing angle of the dot with the even wire state,
/// `theta_mix = atan2(2 c+, u - c0)`. For `c+ > 0` it lies in `(0, pi)` and
/// decreases with `u`.
pub fn theta_mix(params: &RingParams, u: f64) -> f64 {
    (2.0 * params.c_plus()).atan2(u - params.c0)
}

/// Strong hybridisation with `|+>`: the lower dressed state
/// `|theta_bar>` crosses `|->` at `u_c = (-1 + (c+/c0)^2 / 2) c0`.
///
/// The dressed level moves with slope `alpha = sin^2(theta_c/2)` and couples
/// to `|->` with `-c- sin(theta_c/2)`. Rescaling the detuning by `alpha` gives
/// the returned coupling `C = -c- / sin(theta_c/2)`, so the result plugs
/// straight into the single-path lineshape.
pub fn shifted_params(params: &RingParams) -> Result<TwoLevelParams> {
    params.validate()?;
    let canon = params.with_nonnegative_c0();
    if canon.c0 == 0.0 {
        return Err(Error::ZeroC0);
    }
    let c0 = canon.c0;
    let ratio = canon.c_plus() / c0;
    let u_c = (-1.0 + 0.5 * ratio * ratio) * c0;
    let half = 0.5 * theta_mix(&canon, u_c);
    let s = half.sin();
    Ok(TwoLevelParams {
        lambda: splitting_ratio(params)?,
        c_eff: -canon.c_minus() / s,
        u_c,
        scheme: Scheme::Shifted,
        alpha: s * s,
    })
}

/// Exact reduction at `c0 = 0`: `lambda = c1^2/(c1^2 + c2^2)`,
/// `C = sqrt(c1^2 + c2^2)`, `u_c = 0`.
pub fn dark_state_params(params: &RingParams) -> Result<TwoLevelParams> {
    params.validate()?;
    if params.c0 != 0.0 {
        return Err(Error::NonzeroC0(params.c0));
    }
    let w = params.c1 * params.c1 + params.c2 * params.c2;
    if w == 0.0 {
        return Err(Error::ZeroWireCoupling);
    }
    Ok(TwoLevelParams {
        lambda: params.c1 * params.c1 / w,
        c_eff: w.sqrt(),
        u_c: 0.0,
        scheme: Scheme::DarkState,
        alpha: 1.0,
    })
}

fn ket(a: f64, b: f64, c: f64) -> State3 {
    [C64::from(a), C64::from(b), C64::from(c)]
}

/// `{|0>, |+>, |->}` with `|+-> = (|1> +- |2>)/sqrt 2`.
pub fn pm_basis() -> [State3; 3] {
    [
        [ONE, ZERO, ZERO],
        ket(0.0, FRAC_1_SQRT_2, FRAC_1_SQRT_2),
        ket(0.0, FRAC_1_SQRT_2, -FRAC_1_SQRT_2),
    ]
}

/// `{|0>, |C>, |D>}` with `|C> ~ c1|1> + c2|2>` the coupled wire state and
/// `|D> ~ c2|1> - c1|2>` the dark state.
pub fn cd_basis(params: &RingParams) -> Result<[State3; 3]> {
    let w = (params.c1 * params.c1 + params.c2 * params.c2).sqrt();
    if w == 0.0 {
        return Err(Error::ZeroWireCoupling);
    }
    Ok([
        [ONE, ZERO, ZERO],
        ket(0.0, params.c1 / w, params.c2 / w),
        ket(0.0, params.c2 / w, -params.c1 / w),
    ])
}

/// Dressed states `{|theta>, |theta_bar>, |->}` at dot potential `u`:
/// `|theta> = cos(t/2)|0> + sin(t/2)|+>`, `|theta_bar> = -sin(t/2)|0> + cos(t/2)|+>`
/// with `t = theta_mix(u)`. `|theta>` is the upper dressed state.
pub fn dressed_basis(params: &RingParams, u: f64) -> [State3; 3] {
    let half = 0.5 * theta_mix(params, u);
    let (s, c) = half.sin_cos();
    let r = FRAC_1_SQRT_2;
    [
        ket(c, s * r, s * r),
        ket(-s, c * r, c * r),
        ket(0.0, r, -r),
    ]
}

/// `B^dagger H B` for a basis triad `B` (columns are the triad vectors).
pub fn transform(h: &Matrix3c, basis: &[State3; 3]) -> Matrix3c {
    let mut out = [[ZERO; 3]; 3];
    for (i, bi) in basis.iter().enumerate() {
        let hb = linalg::matvec(h, bi);
        for (j, bj) in basis.iter().enumerate() {
            out[j][i] = linalg::inner(bj, &hb);
        }
    }
    out
}

/// Ring Hamiltonian in the `{|0>, |+>, |->}` basis:
/// `[[u, c+, c-], [c+, c0, 0], [c-, 0, -c0]]`.
pub fn pm_hamiltonian(params: &RingParams, u: f64) -> Matrix3c {
    transform(build_hamiltonian_3site(params, u, TestFlux::none()).as_array(), &pm_basis())
}

/// Validity guard of the reduced wire Hamiltonian: `u >= 3 max(|c1|, |c2|)`.
pub const REDUCED_WIRE_MARGIN: f64 = 3.0;

/// Second-order effective Hamiltonian of the wire with the dot eliminated.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ReducedWire {
    /// `[[-c1^2/u, c0 - c1 c2/u], [c0 - c1 c2/u, -c2^2/u]]`.
    pub matrix: [[f64; 2]; 2],
    /// False when the dot is not far enough above the wire.
    pub valid: bool,
}

impl ReducedWire {
    /// Normalised ground state on sites (1, 2), sign fixed so the larger
    /// component is positive.
    pub fn ground_state(&self) -> [f64; 2] {
        let [[a, b], [_, d]] = self.matrix;
        let e = 0.5 * (a + d) - (0.25 * (a - d) * (a - d) + b * b).sqrt();
        let v1 = [b, e - a];
        let v2 = [e - d, b];
        let n1 = v1[0].hypot(v1[1]);
        let n2 = v2[0].hypot(v2[1]);
        let (v, n) = if n1 >= n2 { (v1, n1) } else { (v2, n2) };
        if n == 0.0 {
            return [1.0, 0.0];
        }
        let sign = if v[0].abs() >= v[1].abs() { v[0].signum() } else { v[1].signum() };
        [sign * v[0] / n, sign * v[1] / n]
    }

    pub fn energies(&self) -> [f64; 2] {
        let [[a, b], [_, d]] = self.matrix;
        let r = (0.25 * (a - d) * (a - d) + b * b).sqrt();
        [0.5 * (a + d) - r, 0.5 * (a + d) + r]
    }
}

pub fn reduced_wire_hamiltonian(params: &RingParams, u: f64) -> Result<ReducedWire> {
    params.validate()?;
    if u == 0.0 {
        return Err(Error::ZeroPotential);
    }
    let RingParams { c0, c1, c2 } = *params;
    let off = c0 - c1 * c2 / u;
    Ok(ReducedWire {
        matrix: [[-c1 * c1 / u, off], [off, -c2 * c2 / u]],
        valid: u >= REDUCED_WIRE_MARGIN * c1.abs().max(c2.abs()),
    })
}

/// Default `|c1 - c2| / |c1 + c2|` threshold below which a metamorphosis is
/// sharp.
pub const DEFAULT_SHARPNESS: f64 = 0.2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Metamorphosis {
    /// `u_m = c1 c2 / c0`, where the effective intra-wire coupling vanishes.
    pub u_m: f64,
    pub sharp: bool,
}

pub fn metamorphosis_point(params: &RingParams, sharpness: f64) -> Result<Metamorphosis> {
    params.validate()?;
    let RingParams { c0, c1, c2 } = *params;
    if c0 == 0.0 {
        return Err(Error::ZeroC0);
    }
    let sharp = c1 * c2 > 0.0 && (c1 - c2).abs() / (c1 + c2).abs() < sharpness;
    Ok(Metamorphosis {
        u_m: c1 * c2 / c0,
        sharp,
    })
}

/// Distance of the metamorphosis from the dot crossing, for the two natural
/// choices of crossing point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Separation {
    /// `u_m - 0`: from the dot crossing with `|C>` (dark-state reduction).
    pub from_dark_crossing: f64,
    /// `u_m + |c0|`: from the dot crossing with `|->` (simple reduction).
    pub from_odd_crossing: f64,
}

pub fn metamorphosis_separation(params: &RingParams) -> Result<Separation> {
    let m = metamorphosis_point(params, DEFAULT_SHARPNESS)?;
    Ok(Separation {
        from_dark_crossing: m.u_m,
        from_odd_crossing: m.u_m + params.c0.abs(),
    })
}

/// Default bound on `|c+-| / |c0|` for a two-level regime.
pub const DEFAULT_RHO: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeThresholds {
    pub rho: f64,
    pub sharpness: f64,
}

impl Default for RegimeThresholds {
    fn default() -> Self {
        Self {
            rho: DEFAULT_RHO,
            sharpness: DEFAULT_SHARPNESS,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    SimpleTwoLevel,
    ShiftedTwoLevel,
    MetamorphosisSharp,
    MetamorphosisGradual,
    DarkStateExact,
}

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Regime::SimpleTwoLevel => "SimpleTwoLevel",
            Regime::ShiftedTwoLevel => "ShiftedTwoLevel",
            Regime::MetamorphosisSharp => "MetamorphosisSharp",
            Regime::MetamorphosisGradual => "MetamorphosisGradual",
            Regime::DarkStateExact => "DarkStateExact",
        }
    }

    pub fn is_metamorphosis(self) -> bool {
        matches!(self, Regime::MetamorphosisSharp | Regime::MetamorphosisGradual)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Classification {
    pub regime: Regime,
    /// `|c+| / |c0|` (infinite at `c0 = 0`).
    pub c_plus_ratio: f64,
    /// `|c-| / |c0|` (infinite at `c0 = 0`).
    pub c_minus_ratio: f64,
}

pub fn classify_regime(params: &RingParams, thresholds: RegimeThresholds) -> Classification {
    let c0 = params.c0.abs();
    let (cp, cm) = (params.c_plus().abs(), params.c_minus().abs());
    let c_plus_ratio = cp / c0;
    let c_minus_ratio = cm / c0;
    let regime = if params.c0 == 0.0 {
        Regime::DarkStateExact
    } else if cp <= thresholds.rho * c0 {
        Regime::SimpleTwoLevel
    } else if cm <= thresholds.rho * c0 {
        Regime::ShiftedTwoLevel
    } else {
        let sharp = params.c1 * params.c2 > 0.0
            && (params.c1 - params.c2).abs() / (params.c1 + params.c2).abs() < thresholds.sharpness;
        if sharp {
            Regime::MetamorphosisSharp
        } else {
            Regime::MetamorphosisGradual
        }
    };
    Classification {
        regime,
        c_plus_ratio,
        c_minus_ratio,
    }
}

/// Two-level parameters suited to the regime of `params`. In the
/// metamorphosis regimes the dot crossing is described by the dark-state
/// reduction of the same `(c1, c2)`; its `lambda` then refers to the first
/// stage of the transport only.
pub fn regime_params(params: &RingParams, thresholds: RegimeThresholds) -> Result<TwoLevelParams> {
    match classify_regime(params, thresholds).regime {
        Regime::SimpleTwoLevel => simple_params(params),
        Regime::ShiftedTwoLevel => shifted_params(params),
        Regime::DarkStateExact => dark_state_params(params),
        Regime::MetamorphosisSharp | Regime::MetamorphosisGradual => {
            dark_state_params(&RingParams::new(0.0, params.c1, params.c2))
        }
    }
}
