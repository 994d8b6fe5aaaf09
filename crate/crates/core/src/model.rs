//! System parameters and operator construction.
//!
//! The ring has a dot (site 0) with on-site potential `u` and a two-site wire
//! (sites 1 and 2). Bonds are `0-1` (coupling `c1`), `0-2` (coupling `c2`)
//! and the intra-wire bond `1-2` (coupling `c0`):
//!
//! ```text
//!       | u   c1  c2 |
//!   H = | c1  0   c0 |
//!       | c2  c0  0  |
//! ```
//!
//! A test flux `phi` on a bond replaces the lower-triangle coupling `c` by
//! `c e^{i phi}` (and the upper-triangle entry by its conjugate). The current
//! operator through that bond is `I = -dH/dphi`.
//!
//! Flux conventions per bond (lower-triangle entry carries `e^{i phi}`):
//!
//! | bond    | entry  | current direction |
//! |---------|--------|-------------------|
//! | `0-1`   | (1, 0) | 0 -> 1            |
//! | `0-2`   | (2, 0) | 0 -> 2            |
//! | `1-2`   | (2, 1) | 1 -> 2            |

use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix3c, State3, C64, I, ZERO};

/// Hermiticity tolerance applied to every constructed operator.
pub const HERMITIAN_TOL: f64 = 1e-14;

/// The three real couplings of the ring.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RingParams {
    /// Intra-wire coupling (bond 1-2).
    pub c0: f64,
    /// Dot to wire-site-1 coupling (bond 0-1).
    pub c1: f64,
    /// Dot to wire-site-2 coupling (bond 0-2).
    pub c2: f64,
}

impl RingParams {
    pub const fn new(c0: f64, c1: f64, c2: f64) -> Self {
        Self { c0, c1, c2 }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.c0.is_finite() {
            return Err(Error::NonFinite("c0"));
        }
        if !self.c1.is_finite() {
            return Err(Error::NonFinite("c1"));
        }
        if !self.c2.is_finite() {
            return Err(Error::NonFinite("c2"));
        }
        Ok(())
    }

    /// Coupling of the dot to the even wire state `(|1> + |2>)/sqrt 2`.
    pub fn c_plus(&self) -> f64 {
        (self.c1 + self.c2) / SQRT_2
    }

    /// Coupling of the dot to the odd wire state `(|1> - |2>)/sqrt 2`.
    pub fn c_minus(&self) -> f64 {
        (self.c1 - self.c2) / SQRT_2
    }

    pub fn coupling_sum_sq(&self) -> f64 {
        self.c0 * self.c0 + self.c1 * self.c1 + self.c2 * self.c2
    }

    pub fn max_coupling(&self) -> f64 {
        self.c0.abs().max(self.c1.abs()).max(self.c2.abs())
    }

    /// Relabel the wire sites 1 <-> 2. Bond 0-2 of `self` becomes bond 0-1
    /// of the result.
    pub fn swap_wire(&self) -> Self {
        Self::new(self.c0, self.c2, self.c1)
    }

    /// Gauge transform on the dot, `(c1, c2) -> (-c1, -c2)`. Leaves the
    /// spectrum and every bond current unchanged.
    pub fn flip_dot_gauge(&self) -> Self {
        Self::new(self.c0, -self.c1, -self.c2)
    }

    /// Gauge transform on wire site 2 bringing `c0` to a non-negative value,
    /// `(c0, c2) -> (-c0, -c2)` when `c0 < 0`. Spectrum and bond currents are
    /// unchanged; afterwards the lower wire level is always the odd state.
    pub fn with_nonnegative_c0(&self) -> Self {
        if self.c0 < 0.0 {
            Self::new(-self.c0, self.c1, -self.c2)
        } else {
            *self
        }
    }
}

/// Bond carrying the auxiliary test flux.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Bond {
    Bond01,
    Bond02,
    Bond12,
}

impl Bond {
    /// `(row, col)` of the lower-triangle entry that picks up `e^{i phi}`.
    pub fn lower_entry(self) -> (usize, usize) {
        match self {
            Bond::Bond01 => (1, 0),
            Bond::Bond02 => (2, 0),
            Bond::Bond12 => (2, 1),
        }
    }

    pub fn coupling(self, params: &RingParams) -> f64 {
        match self {
            Bond::Bond01 => params.c1,
            Bond::Bond02 => params.c2,
            Bond::Bond12 => params.c0,
        }
    }
}

/// Auxiliary Aharonov-Bohm phase threading one bond. `phi = 0` is physical.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestFlux {
    pub phi: f64,
    pub bond: Bond,
}

impl TestFlux {
    pub const fn new(phi: f64, bond: Bond) -> Self {
        Self { phi, bond }
    }

    /// Zero flux. The bond is irrelevant at `phi = 0`.
    pub const fn none() -> Self {
        Self::new(0.0, Bond::Bond01)
    }
}

impl Default for TestFlux {
    fn default() -> Self {
        Self::none()
    }
}

/// Complex 3x3 Hermitian operator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HermitianMatrix3(Matrix3c);

impl HermitianMatrix3 {
    /// Wrap `m`, checking Hermiticity to [`HERMITIAN_TOL`].
    pub fn new(m: Matrix3c) -> Result<Self> {
        let asym = linalg::max_abs_diff(&m, &linalg::adjoint(&m));
        if !(asym <= HERMITIAN_TOL) {
            return Err(Error::NonHermitianInput(asym));
        }
        Ok(Self(m))
    }

    /// Wrap without checking. Callers guarantee Hermiticity by construction.
    pub(crate) fn from_raw(m: Matrix3c) -> Self {
        Self(m)
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.0[row][col]
    }

    pub fn as_array(&self) -> &Matrix3c {
        &self.0
    }

    pub fn apply(&self, v: &State3) -> State3 {
        linalg::matvec(&self.0, v)
    }

    /// `<v|M|v>`, real for Hermitian `M`.
    pub fn expectation(&self, v: &State3) -> f64 {
        linalg::inner(v, &self.apply(v)).re
    }

    /// Largest `|M_ij - conj(M_ji)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        linalg::max_abs_diff(&self.0, &linalg::adjoint(&self.0))
    }

    pub fn is_real_symmetric(&self, tol: f64) -> bool {
        (0..3).all(|i| {
            (0..3).all(|j| self.0[i][j].im.abs() <= tol && (self.0[i][j] - self.0[j][i]).norm() <= tol)
        })
    }

    /// Frobenius-free bound on the spectral norm: the largest absolute row sum.
    pub fn row_sum_norm(&self) -> f64 {
        self.0
            .iter()
            .map(|row| row.iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// Ring Hamiltonian at dot potential `u` with the given test flux.
pub fn build_hamiltonian_3site(params: &RingParams, u: f64, flux: TestFlux) -> HermitianMatrix3 {
    let RingParams { c0, c1, c2 } = *params;
    let mut m = [
        [C64::from(u), C64::from(c1), C64::from(c2)],
        [C64::from(c1), ZERO, C64::from(c0)],
        [C64::from(c2), C64::from(c0), ZERO],
    ];
    if flux.phi != 0.0 {
        let (r, c) = flux.bond.lower_entry();
        let value = flux.bond.coupling(params) * C64::from_polar(1.0, flux.phi);
        m[r][c] = value;
        m[c][r] = value.conj();
    }
    HermitianMatrix3::from_raw(m)
}

/// `I = -dH/dphi` for the flux bond, evaluated at `flux.phi`.
pub fn build_current_operator(params: &RingParams, flux: TestFlux) -> HermitianMatrix3 {
    let mut m = [[ZERO; 3]; 3];
    let (r, c) = flux.bond.lower_entry();
    // d/dphi (c e^{i phi}) = i c e^{i phi}
    let lower = -I * flux.bond.coupling(params) * C64::from_polar(1.0, flux.phi);
    m[r][c] = lower;
    m[c][r] = lower.conj();
    HermitianMatrix3::from_raw(m)
}

/// Parameters of the single-path two-site crossing.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoSiteParams {
    /// Dot-level coupling `C`.
    pub coupling: f64,
    /// Energy of the crossed level.
    pub u_c: f64,
    /// Current scale factor; `1` for the physical two-site system.
    pub lambda: f64,
}

impl TwoSiteParams {
    pub const fn new(coupling: f64, u_c: f64, lambda: f64) -> Self {
        Self {
            coupling,
            u_c,
            lambda,
        }
    }

    /// The physical two-site system, `lambda = 1`.
    pub const fn physical(coupling: f64, u_c: f64) -> Self {
        Self::new(coupling, u_c, 1.0)
    }
}

pub type Matrix2c = [[C64; 2]; 2];

/// `[[u, C e^{-i phi}], [C e^{i phi}, u_c]]`.
pub fn build_hamiltonian_2site(p: &TwoSiteParams, u: f64, phi: f64) -> Matrix2c {
    let lower = p.coupling * C64::from_polar(1.0, phi);
    [[C64::from(u), lower.conj()], [lower, C64::from(p.u_c)]]
}

/// `lambda * (-dH/dphi)` for the two-site system.
pub fn build_current_operator_2site(p: &TwoSiteParams, phi: f64) -> Matrix2c {
    let lower = -I * p.lambda * p.coupling * C64::from_polar(1.0, phi);
    [[ZERO, lower.conj()], [lower, ZERO]]
}
