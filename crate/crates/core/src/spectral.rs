//! Exact diagonalization of the ring.
//!
//! The characteristic polynomial of the ring Hamiltonian is the cubic
//!
//! ```text
//! p(E) = E^3 - u E^2 - (c0^2 + c1^2 + c2^2) E + c0^2 u - 2 c0 c1 c2 cos(phi)
//! ```
//!
//! whose three real roots follow from the trigonometric formula
//! `E_n = u/3 + 2 sqrt(Q) cos(theta/3 + 2 pi n / 3)`, `n = 0, +1, -1`, with
//! `Q = u^2/9 + (c0^2+c1^2+c2^2)/3`,
//! `R = u^3/27 + (c1^2+c2^2-2c0^2) u/6 + c0 c1 c2 cos(phi)` and
//! `cos(theta) = R / Q^{3/2}`.
//!
//! Eigenvectors come from the first cofactor row of `H - E`, which for the
//! ring reads `(E^2 - |c0|^2, c1 E + c0* c2, c2 E + c0 c1)` and does not
//! involve `u`.
//!
//! [`oracle_eigensolve`] is a cyclic Jacobi solver sharing no code path with
//! the above; it exists to cross-check it.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix3c, State3, C64, ZERO};
use crate::model::{build_hamiltonian_3site, HermitianMatrix3, RingParams, TestFlux};

/// Relative threshold for calling two roots degenerate. The absolute
/// threshold is this times `E_e - E_g + |u| + |c0| + |c1| + |c2|`.
pub const DEGENERACY_REL: f64 = 1e-10;

/// Relative threshold below which the first cofactor row is considered
/// degenerate, in units of `E^2 + c0^2 + c1^2 + c2^2`.
pub const COFACTOR_REL: f64 = 1e-13;

/// Auxiliary quantities of the trigonometric cubic solution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubicAux {
    pub cal_q: f64,
    pub cal_r: f64,
    /// Angle in `[0, pi]`; `cos(theta)` is clamped to `[-1, 1]`.
    pub theta_cubic: f64,
}

pub fn cubic_aux(params: &RingParams, u: f64, flux: TestFlux) -> CubicAux {
    let RingParams { c0, c1, c2 } = *params;
    let s = params.coupling_sum_sq();
    let cal_q = u * u / 9.0 + s / 3.0;
    let cal_r = u * u * u / 27.0
        + (c1 * c1 + c2 * c2 - 2.0 * c0 * c0) * u / 6.0
        + c0 * c1 * c2 * flux.phi.cos();
    let theta_cubic = if cal_q > 0.0 {
        (cal_r / cal_q.powf(1.5)).clamp(-1.0, 1.0).acos()
    } else {
        0.0
    };
    CubicAux {
        cal_q,
        cal_r,
        theta_cubic,
    }
}

/// Value of the secular polynomial at `e`, written in a form that avoids the
/// `u E^2` / `c0^2 u` cancellation at large `u`.
pub fn secular_polynomial(params: &RingParams, u: f64, flux: TestFlux, e: f64) -> f64 {
    let RingParams { c0, c1, c2 } = *params;
    (e - c0) * (e + c0) * (e - u) - (c1 * c1 + c2 * c2) * e - 2.0 * c0 * c1 * c2 * flux.phi.cos()
}

/// `dp/dE`.
pub fn secular_derivative(params: &RingParams, u: f64, e: f64) -> f64 {
    3.0 * e * e - 2.0 * u * e - params.coupling_sum_sq()
}

/// The three ring energies, sorted ascending.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum3 {
    /// `[E_g, E_d, E_e]`.
    pub energies: [f64; 3],
    /// Trigonometric branch index `n` of each sorted energy.
    pub trig_index: [i8; 3],
    /// Two roots coincide within the degeneracy threshold.
    pub degenerate: bool,
    pub aux: CubicAux,
}

impl Spectrum3 {
    pub fn ground(&self) -> f64 {
        self.energies[0]
    }

    pub fn middle(&self) -> f64 {
        self.energies[1]
    }

    pub fn excited(&self) -> f64 {
        self.energies[2]
    }

    pub fn span(&self) -> f64 {
        self.energies[2] - self.energies[0]
    }

    /// `E_d - E_g`.
    pub fn ground_gap(&self) -> f64 {
        self.energies[1] - self.energies[0]
    }
}

fn degeneracy_threshold(params: &RingParams, u: f64, span: f64) -> f64 {
    DEGENERACY_REL * (span + u.abs() + params.c0.abs() + params.c1.abs() + params.c2.abs())
}

/// One Newton step on the secular polynomial, kept only if it lowers the
/// residual. Near a double root the derivative vanishes and the step is
/// skipped.
fn polish_root(params: &RingParams, u: f64, flux: TestFlux, e: f64) -> f64 {
    let p = secular_polynomial(params, u, flux, e);
    let dp = secular_derivative(params, u, e);
    if p == 0.0 || dp.abs() <= f64::EPSILON * (e * e + u.abs() * e.abs() + params.coupling_sum_sq()) {
        return e;
    }
    let candidate = e - p / dp;
    if secular_polynomial(params, u, flux, candidate).abs() < p.abs() {
        candidate
    } else {
        e
    }
}

/// Ring energies from the trigonometric cubic formula.
pub fn eigenvalues_trig(params: &RingParams, u: f64, flux: TestFlux) -> Spectrum3 {
    let aux = cubic_aux(params, u, flux);
    let amp = 2.0 * aux.cal_q.sqrt();
    let mut roots: [(f64, i8); 3] = [0, 1, -1].map(|n: i8| {
        let e = u / 3.0 + amp * (aux.theta_cubic / 3.0 + f64::from(n) * 2.0 * PI / 3.0).cos();
        (polish_root(params, u, flux, e), n)
    });
    roots.sort_by(|a, b| a.0.total_cmp(&b.0));
    let energies = roots.map(|r| r.0);
    let trig_index = roots.map(|r| r.1);
    let tol = degeneracy_threshold(params, u, energies[2] - energies[0]);
    let degenerate = energies[1] - energies[0] <= tol || energies[2] - energies[1] <= tol;
    Spectrum3 {
        energies,
        trig_index,
        degenerate,
        aux,
    }
}

/// Normalized eigenvector together with its cofactor bookkeeping.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroundState3 {
    pub energy: f64,
    /// Site amplitudes; the largest-magnitude component is real positive.
    pub amplitudes: State3,
    /// Squared length of the unnormalized cofactor vector.
    pub norm_s: f64,
    /// Cofactor row used; `0` is the regular closed form, anything else means
    /// the regular form degenerated and a fallback row was taken.
    pub cofactor_row: usize,
}

impl GroundState3 {
    pub fn used_fallback(&self) -> bool {
        self.cofactor_row != 0
    }

    pub fn occupations(&self) -> [f64; 3] {
        self.amplitudes.map(|z| z.norm_sqr())
    }
}

/// Cofactor row `k` of `m`: a null vector of `m` whenever `det m = 0`.
fn cofactor_row(m: &Matrix3c, k: usize) -> State3 {
    let (a, b) = match k {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    let sign = if k == 1 { -1.0 } else { 1.0 };
    // C_kj = (-1)^{k+j} det(minor without row k, col j)
    let minor = |j: usize| {
        let (x, y) = match j {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        m[a][x] * m[b][y] - m[a][y] * m[b][x]
    };
    [sign * minor(0), -sign * minor(1), sign * minor(2)]
}

/// Normalized eigenvector of the ring Hamiltonian for the eigenvalue `energy`.
pub fn eigenstate(params: &RingParams, u: f64, flux: TestFlux, energy: f64) -> Result<GroundState3> {
    let h = build_hamiltonian_3site(params, u, flux);
    let m = h.as_array();
    let e = C64::from(energy);
    // First cofactor row written without the dot potential.
    let row0 = [
        C64::from(energy * energy - m[2][1].norm_sqr()),
        e * m[1][0] + m[1][2] * m[2][0],
        m[1][0] * m[2][1] + e * m[2][0],
    ];
    let s0 = linalg::norm_sqr(&row0);
    let scale = energy * energy + params.coupling_sum_sq();
    let threshold = COFACTOR_REL * scale;

    let (vector, s, row) = if s0.sqrt() > threshold {
        (row0, s0, 0)
    } else {
        let mut shifted = *m;
        for (i, r) in shifted.iter_mut().enumerate() {
            r[i] -= e;
        }
        let (row, v) = (1..3)
            .map(|k| (k, cofactor_row(&shifted, k)))
            .max_by(|a, b| linalg::norm_sqr(&a.1).total_cmp(&linalg::norm_sqr(&b.1)))
            .expect("two candidate rows");
        let s = linalg::norm_sqr(&v);
        let fallback_scale = scale + u.abs() * (u.abs() + energy.abs());
        if s.sqrt() <= COFACTOR_REL * fallback_scale {
            return Err(Error::DegenerateSpectrum { u, gap: 0.0 });
        }
        (v, s, row)
    };
    let normalized = linalg::scale(&vector, C64::from(1.0 / s.sqrt()));
    Ok(GroundState3 {
        energy,
        amplitudes: linalg::fix_phase(&normalized),
        norm_s: s,
        cofactor_row: row,
    })
}

/// Adiabatic ground state. Fails when the ground level is degenerate.
pub fn ground_state(params: &RingParams, u: f64, flux: TestFlux) -> Result<GroundState3> {
    let spectrum = eigenvalues_trig(params, u, flux);
    let tol = degeneracy_threshold(params, u, spectrum.span());
    if spectrum.ground_gap() <= tol {
        return Err(Error::DegenerateSpectrum {
            u,
            gap: spectrum.ground_gap(),
        });
    }
    eigenstate(params, u, flux, spectrum.ground())
}

/// Full eigendecomposition, energies ascending.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Eigensystem {
    pub energies: [f64; 3],
    /// `vectors[k]` belongs to `energies[k]`; phase fixed so the
    /// largest-magnitude component is real positive.
    pub vectors: [State3; 3],
}

impl Eigensystem {
    /// `sum_k f(E_k) |v_k><v_k|`.
    pub fn spectral_map(&self, f: impl Fn(f64) -> C64) -> Matrix3c {
        let mut out = [[ZERO; 3]; 3];
        for (e, v) in self.energies.iter().zip(&self.vectors) {
            let w = f(*e);
            for i in 0..3 {
                for j in 0..3 {
                    out[i][j] += w * v[i] * v[j].conj();
                }
            }
        }
        out
    }
}

const JACOBI_MAX_SWEEPS: usize = 64;

/// Cyclic complex Jacobi rotations. `a` must be Hermitian.
pub(crate) fn jacobi_hermitian(mut a: Matrix3c) -> Eigensystem {
    let mut v = linalg::identity();
    let frob: f64 = a.iter().flatten().map(|z| z.norm_sqr()).sum();
    let target = frob * 1e-34;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off = a[0][1].norm_sqr() + a[0][2].norm_sqr() + a[1][2].norm_sqr();
        if off <= target {
            break;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            let b = a[p][q].norm();
            if b == 0.0 {
                continue;
            }
            let phase = a[p][q] / b;
            let theta = (a[q][q].re - a[p][p].re) / (2.0 * b);
            let t = if theta.abs() > 1e150 {
                0.5 / theta
            } else {
                theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
            };
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;
            // U = diag(1, e^{-i alpha}) * [[c, s], [-s, c]] on the (p, q) block.
            let upp = C64::from(c);
            let upq = C64::from(s);
            let uqp = -s * phase.conj();
            let uqq = c * phase.conj();
            for k in 0..3 {
                let (akp, akq) = (a[k][p], a[k][q]);
                a[k][p] = akp * upp + akq * uqp;
                a[k][q] = akp * upq + akq * uqq;
                let (vkp, vkq) = (v[k][p], v[k][q]);
                v[k][p] = vkp * upp + vkq * uqp;
                v[k][q] = vkp * upq + vkq * uqq;
            }
            for j in 0..3 {
                let (apj, aqj) = (a[p][j], a[q][j]);
                a[p][j] = upp.conj() * apj + uqp.conj() * aqj;
                a[q][j] = upq.conj() * apj + uqq.conj() * aqj;
            }
            a[p][q] = ZERO;
            a[q][p] = ZERO;
            a[p][p] = C64::from(a[p][p].re);
            a[q][q] = C64::from(a[q][q].re);
        }
    }
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| a[i][i].re.total_cmp(&a[j][j].re));
    let energies = order.map(|k| a[k][k].re);
    let vectors = order.map(|k| linalg::fix_phase(&[v[0][k], v[1][k], v[2][k]]));
    Eigensystem { energies, vectors }
}

/// Independent eigendecomposition by cyclic Jacobi rotations.
pub fn oracle_eigensolve(h: &Matrix3c) -> Result<Eigensystem> {
    let scale = h.iter().flatten().map(|z| z.norm()).fold(1.0, f64::max);
    let defect = linalg::max_abs_diff(h, &linalg::adjoint(h));
    if !(defect <= 1e-12 * scale) {
        return Err(Error::NonHermitianInput(defect));
    }
    Ok(jacobi_hermitian(*h))
}

/// [`oracle_eigensolve`] for an already-validated operator.
pub fn oracle_eigensolve_hermitian(h: &HermitianMatrix3) -> Eigensystem {
    jacobi_hermitian(*h.as_array())
}
