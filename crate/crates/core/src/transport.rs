//! Geometric conductance `G(u)` and integrated current `Q(u)`.
//!
//! In the adiabatic limit the current through a bond is `<I> = G(u) du/dt`.
//! With `Psi` the ground state, `G` is the mixed Berry curvature
//!
//! ```text
//! G(u) = 2 Im <dPsi/du | dPsi/dphi>   at phi = 0
//! ```
//!
//! where `phi` is a test flux on the monitored bond. The order of the two
//! derivatives fixes the sign: with `I = -dH/dphi` and the flux convention of
//! [`crate::model`], this is the order for which `G > 0` when probability
//! flows along the bond in its positive direction (e.g. `G = dP_1/du` for the
//! single-path two-site crossing).
//!
//! For the ring at `phi = 0` the ground-state charge through bond 0-1 is a
//! function of the ground energy alone,
//!
//! ```text
//! Q(u) = F(E_g(u)),  F(E) = (c1^2 E^2 + 2 c0 c1 c2 E + c0^2 c1^2) / S(E)
//! S(E) = (E^2 - c0^2)^2 + (c1 E + c0 c2)^2 + (c2 E + c0 c1)^2
//! ```
//!
//! and `G = dQ/du = F'(E_g) dE_g/du`, with `dE_g/du` from implicit
//! differentiation of the secular polynomial.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, State3, C64};
use crate::model::{
    build_hamiltonian_2site, build_hamiltonian_3site, Bond, RingParams, TestFlux, TwoSiteParams,
};
use crate::spectral::{self, eigenvalues_trig, Spectrum3};

/// Single-path two-site lineshape,
/// `G(u) = lambda 2C^2 / (4C^2 + (u - u_c)^2)^{3/2}`.
pub fn two_site_g(p: &TwoSiteParams, u: f64) -> Result<f64> {
    if p.coupling == 0.0 {
        return Err(Error::ZeroCoupling);
    }
    let c2 = p.coupling * p.coupling;
    let x = u - p.u_c;
    Ok(p.lambda * 2.0 * c2 / (4.0 * c2 + x * x).powf(1.5))
}

/// Antiderivative of [`two_site_g`] vanishing at `u -> -inf`.
pub fn two_site_q(p: &TwoSiteParams, u: f64) -> Result<f64> {
    if p.coupling == 0.0 {
        return Err(Error::ZeroCoupling);
    }
    let x = u - p.u_c;
    let r = (4.0 * p.coupling * p.coupling + x * x).sqrt();
    Ok(p.lambda * 0.5 * (1.0 + x / r))
}

/// Ground energy of the two-site Hamiltonian.
pub fn two_site_energy(p: &TwoSiteParams, u: f64) -> f64 {
    let x = u - p.u_c;
    0.5 * ((u + p.u_c) - (4.0 * p.coupling * p.coupling + x * x).sqrt())
}

fn two_site_ground_state(p: &TwoSiteParams, u: f64, phi: f64) -> [C64; 2] {
    let h = build_hamiltonian_2site(p, u, phi);
    let (a, d, b) = (h[0][0].re, h[1][1].re, h[1][0]);
    let e = 0.5 * (a + d) - (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
    // Two equivalent null vectors of H - E; keep the better conditioned one.
    let v1 = [C64::from(e - d), b];
    let v2 = [b.conj(), C64::from(e - a)];
    let n1 = v1[0].norm_sqr() + v1[1].norm_sqr();
    let n2 = v2[0].norm_sqr() + v2[1].norm_sqr();
    let (v, n) = if n1 >= n2 { (v1, n1) } else { (v2, n2) };
    let inv = 1.0 / n.sqrt();
    [v[0] * inv, v[1] * inv]
}

/// Finite-difference steps for the numerical conductance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FiniteDifference {
    pub d_u: f64,
    pub d_phi: f64,
}

impl FiniteDifference {
    pub const fn new(d_u: f64, d_phi: f64) -> Self {
        Self { d_u, d_phi }
    }

    pub const fn uniform(d: f64) -> Self {
        Self::new(d, d)
    }
}

impl Default for FiniteDifference {
    fn default() -> Self {
        Self::uniform(1e-5)
    }
}

/// Numerical two-site conductance from central differences of the ground
/// state.
pub fn two_site_conductance_numeric(p: &TwoSiteParams, u: f64, fd: FiniteDifference) -> Result<f64> {
    let gap = (4.0 * p.coupling * p.coupling + (u - p.u_c).powi(2)).sqrt();
    let step = fd.d_u.max(fd.d_phi);
    if gap < 10.0 * step * p.coupling.abs().max(1.0) {
        return Err(Error::DegeneracyNearby { gap, step });
    }
    let center = two_site_ground_state(p, u, 0.0);
    let align = |v: [C64; 2]| {
        let o = center[0].conj() * v[0] + center[1].conj() * v[1];
        let ph = o.conj() / o.norm();
        [v[0] * ph, v[1] * ph]
    };
    let up = align(two_site_ground_state(p, u + fd.d_u, 0.0));
    let um = align(two_site_ground_state(p, u - fd.d_u, 0.0));
    let fp = align(two_site_ground_state(p, u, fd.d_phi));
    let fm = align(two_site_ground_state(p, u, -fd.d_phi));
    let mut curvature = C64::from(0.0);
    for k in 0..2 {
        let du = (up[k] - um[k]) / (2.0 * fd.d_u);
        let dphi = (fp[k] - fm[k]) / (2.0 * fd.d_phi);
        curvature += du.conj() * dphi;
    }
    Ok(p.lambda * 2.0 * curvature.im)
}

fn oracle_ground(params: &RingParams, u: f64, flux: TestFlux) -> (State3, f64) {
    let h = build_hamiltonian_3site(params, u, flux);
    let eig = spectral::oracle_eigensolve_hermitian(&h);
    (eig.vectors[0], eig.energies[1] - eig.energies[0])
}

/// Geometric conductance through `bond` by direct central differencing of
/// the ground state in `u` and in the test flux. Ground states come from the
/// Jacobi oracle, so this route is independent of the closed forms.
///
/// Neighbouring states are phase-aligned to the centre state before
/// differencing.
pub fn conductance_numeric(params: &RingParams, u: f64, bond: Bond, fd: FiniteDifference) -> Result<f64> {
    let zero = TestFlux::new(0.0, bond);
    let (center, gap) = oracle_ground(params, u, zero);
    let step = fd.d_u.max(fd.d_phi);
    let dh_norm = bond.coupling(params).abs().max(1.0);
    if gap < 10.0 * step * dh_norm {
        return Err(Error::DegeneracyNearby { gap, step });
    }
    let at = |du: f64, dphi: f64| {
        let (v, _) = oracle_ground(params, u + du, TestFlux::new(dphi, bond));
        linalg::align_phase(&center, &v)
    };
    let up = at(fd.d_u, 0.0);
    let um = at(-fd.d_u, 0.0);
    let fp = at(0.0, fd.d_phi);
    let fm = at(0.0, -fd.d_phi);
    let d_u = linalg::scale(&linalg::sub(&up, &um), C64::from(0.5 / fd.d_u));
    let d_phi = linalg::scale(&linalg::sub(&fp, &fm), C64::from(0.5 / fd.d_phi));
    Ok(2.0 * linalg::inner(&d_u, &d_phi).im)
}

/// `dE/du` for a root `e` of the secular polynomial at zero flux.
pub fn energy_slope(params: &RingParams, u: f64, e: f64) -> f64 {
    let c0 = params.c0;
    (e - c0) * (e + c0) / spectral::secular_derivative(params, u, e)
}

/// `(N, S)` of the bond 0-1 charge ratio and their `E` derivatives.
fn charge_ratio_terms(params: &RingParams, e: f64) -> (f64, f64, f64, f64) {
    let RingParams { c0, c1, c2 } = *params;
    let a = (e - c0) * (e + c0);
    let b = c1 * e + c0 * c2;
    let c = c2 * e + c0 * c1;
    let n = c1 * c1 * (e * e + c0 * c0) + 2.0 * c0 * c1 * c2 * e;
    let s = a * a + b * b + c * c;
    let dn = 2.0 * c1 * c1 * e + 2.0 * c0 * c1 * c2;
    let ds = 4.0 * e * a + 2.0 * c1 * b + 2.0 * c2 * c;
    (n, s, dn, ds)
}

fn ground_energy(params: &RingParams, u: f64) -> Result<Spectrum3> {
    params.validate()?;
    let spectrum = eigenvalues_trig(params, u, TestFlux::none());
    let gap = spectrum.ground_gap();
    let tol = spectral::DEGENERACY_REL
        * (spectrum.span() + u.abs() + params.c0.abs() + params.c1.abs() + params.c2.abs());
    if gap <= tol {
        return Err(Error::DegenerateSpectrum { u, gap });
    }
    Ok(spectrum)
}

fn conductance_exact_01(params: &RingParams, u: f64) -> Result<f64> {
    if params.c1 == 0.0 {
        return Ok(0.0);
    }
    let e = ground_energy(params, u)?.ground();
    let (n, s, dn, ds) = charge_ratio_terms(params, e);
    let df = (dn * s - n * ds) / (s * s);
    Ok(df * energy_slope(params, u, e))
}

/// Closed-form conductance through bond 0-1.
pub fn conductance_exact(params: &RingParams, u: f64) -> Result<f64> {
    conductance_exact_bond(params, u, Bond::Bond01)
}

/// Closed-form conductance through any bond.
pub fn conductance_exact_bond(params: &RingParams, u: f64, bond: Bond) -> Result<f64> {
    match bond {
        Bond::Bond01 => conductance_exact_01(params, u),
        Bond::Bond02 => conductance_exact_01(&params.swap_wire(), u),
        Bond::Bond12 => conductance_bond12(params, u),
    }
}

/// Conductance through the intra-wire bond, `G = c0^2 (c1^2 - c2^2) d/du [1/S]`.
pub fn conductance_bond12(params: &RingParams, u: f64) -> Result<f64> {
    let RingParams { c0, c1, c2 } = *params;
    let prefactor = c0 * c0 * (c1 * c1 - c2 * c2);
    if prefactor == 0.0 {
        return Ok(0.0);
    }
    let e = ground_energy(params, u)?.ground();
    let (_, s, _, ds) = charge_ratio_terms(params, e);
    Ok(-prefactor * ds / (s * s) * energy_slope(params, u, e))
}

fn integrated_current_01(params: &RingParams, u: f64) -> Result<f64> {
    if params.c1 == 0.0 {
        return Ok(0.0);
    }
    let e = ground_energy(params, u)?.ground();
    let (n, s, _, _) = charge_ratio_terms(params, e);
    Ok(n / s)
}

/// Charge transported through bond 0-1 up to `u`, `Q(u) = int_{-inf}^u G`.
pub fn integrated_current(params: &RingParams, u: f64) -> Result<f64> {
    integrated_current_bond(params, u, Bond::Bond01)
}

pub fn integrated_current_bond(params: &RingParams, u: f64, bond: Bond) -> Result<f64> {
    match bond {
        Bond::Bond01 => integrated_current_01(params, u),
        Bond::Bond02 => integrated_current_01(&params.swap_wire(), u),
        Bond::Bond12 => {
            let RingParams { c0, c1, c2 } = *params;
            let prefactor = c0 * c0 * (c1 * c1 - c2 * c2);
            if prefactor == 0.0 {
                return Ok(0.0);
            }
            let e = ground_energy(params, u)?.ground();
            let (_, s, _, _) = charge_ratio_terms(params, e);
            Ok(prefactor / s)
        }
    }
}

/// Splitting ratio `Q(+inf)` through bond 0-1.
///
/// `c1 / (c1 - c2)` for `c0 > 0` and `c1^2 / (c1^2 + c2^2)` for `c0 == 0`.
/// The jump at `c0 = 0` is real: any nonzero intra-wire coupling eventually
/// rotates the final state to the lower wire state. For `c0 < 0` the lower
/// wire state is even and the ratio becomes `c1 / (c1 + c2)`.
pub fn q_infinity(params: &RingParams) -> Result<f64> {
    params.validate()?;
    let RingParams { c0, c1, c2 } = params.with_nonnegative_c0();
    if c0 != 0.0 {
        if c1 == c2 {
            return Err(Error::DegenerateSplitting);
        }
        Ok(c1 / (c1 - c2))
    } else {
        let w = c1 * c1 + c2 * c2;
        if w == 0.0 {
            return Err(Error::ZeroWireCoupling);
        }
        Ok(c1 * c1 / w)
    }
}

/// The closed-form charge ratio evaluated at the limiting ground energy
/// (`E_g -> -|c0|`, or `E_g -> 0` with `c0 = 0`). Agrees with [`q_infinity`]
/// algebraically; kept separate as a check on the charge-ratio formula.
pub fn charge_ratio_limit(params: &RingParams) -> Result<f64> {
    params.validate()?;
    let RingParams { c0, c1, c2 } = params.with_nonnegative_c0();
    if c0 == 0.0 {
        let w = c1 * c1 + c2 * c2;
        if w == 0.0 {
            return Err(Error::ZeroWireCoupling);
        }
        // N and S both vanish like E^2; take the ratio of the E^2 terms.
        return Ok(c1 * c1 / w);
    }
    let (n, s, _, _) = charge_ratio_terms(&RingParams::new(c0, c1, c2), -c0);
    if s == 0.0 {
        return Err(Error::DegenerateSplitting);
    }
    Ok(n / s)
}

/// Everything known about the adiabatic ground state at one `u`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AdiabaticPoint {
    pub u: f64,
    pub spectrum: Spectrum3,
    /// Conductance through bond 0-1.
    pub g: f64,
    /// Integrated charge through bond 0-1.
    pub q: f64,
    /// Ground-state site occupations.
    pub occupations: [f64; 3],
}

pub fn adiabatic_point(params: &RingParams, u: f64) -> Result<AdiabaticPoint> {
    let spectrum = ground_energy(params, u)?;
    let state = spectral::eigenstate(params, u, TestFlux::none(), spectrum.ground())?;
    Ok(AdiabaticPoint {
        u,
        spectrum,
        g: conductance_exact(params, u)?,
        q: integrated_current(params, u)?,
        occupations: state.occupations(),
    })
}

/// [`adiabatic_point`] over a grid, evaluated in parallel, in grid order.
pub fn adiabatic_sweep(params: &RingParams, grid: &[f64]) -> Result<Vec<AdiabaticPoint>> {
    grid.par_iter().map(|&u| adiabatic_point(params, u)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::SQRT_2;

    #[test]
    fn two_site_peak_value() {
        let g = two_site_g(&TwoSiteParams::physical(1.0, 0.0), 0.0).unwrap();
        assert!((g - 0.25).abs() < 1e-15);
    }

    #[test]
    fn two_site_zero_coupling() {
        assert_eq!(two_site_g(&TwoSiteParams::physical(0.0, 0.0), 1.0), Err(Error::ZeroCoupling));
    }

    #[test]
    fn two_site_symmetric_about_crossing() {
        let p = TwoSiteParams::physical(0.3, -1.2);
        for x in [0.01, 0.5, 3.0, 40.0] {
            let a = two_site_g(&p, p.u_c + x).unwrap();
            let b = two_site_g(&p, p.u_c - x).unwrap();
            assert!((a - b).abs() <= 1e-15 * a.max(1e-300));
        }
    }

    #[test]
    fn two_site_numeric_reproduces_lineshape() {
        let p = TwoSiteParams::physical(0.7, 0.4);
        for k in 0..=40 {
            let u = -5.0 + 0.25 * f64::from(k);
            let exact = two_site_g(&p, u).unwrap();
            let num = two_site_conductance_numeric(&p, u, FiniteDifference::default()).unwrap();
            assert!((exact - num).abs() < 1e-6 * exact.max(1.0), "u={u} {exact} {num}");
        }
    }

    #[test]
    fn bond01_absent_carries_nothing() {
        let p = RingParams::new(1.0, 0.0, 0.6);
        for u in [-3.0, -1.0, 0.5, 4.0] {
            assert_eq!(conductance_exact(&p, u).unwrap(), 0.0);
            let g = conductance_numeric(&p, u, Bond::Bond01, FiniteDifference::default()).unwrap();
            assert!(g.abs() < 1e-9);
        }
    }

    #[test]
    fn fig4_set1_closed_form_matches_oracle() {
        let p = RingParams::new(1.0, 0.2, 0.15);
        let exact = conductance_exact(&p, -1.0).unwrap();
        let num = conductance_numeric(&p, -1.0, Bond::Bond01, FiniteDifference::default()).unwrap();
        assert!(((exact - num) / exact).abs() < 1e-6, "{exact} {num}");
    }

    #[test]
    fn slope_matches_dot_occupation() {
        // Hellmann-Feynman: dE/du = |<0|g>|^2.
        let p = RingParams::new(0.6, 1.3, -0.4);
        for u in [-4.0, -0.2, 0.9, 12.0] {
            let e = eigenvalues_trig(&p, u, TestFlux::none()).ground();
            let g = spectral::ground_state(&p, u, TestFlux::none()).unwrap();
            assert!((energy_slope(&p, u, e) - g.occupations()[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn q_infinity_branches() {
        assert!((q_infinity(&RingParams::new(1.0, 0.2, 0.15)).unwrap() - 4.0).abs() < 1e-12);
        assert!((q_infinity(&RingParams::new(0.0, 3.0, 4.0)).unwrap() - 0.36).abs() < 1e-15);
        assert_eq!(q_infinity(&RingParams::new(2.0, 1.0, 0.0)).unwrap(), 1.0);
        assert_eq!(q_infinity(&RingParams::new(2.0, 1.0, 1.0)), Err(Error::DegenerateSplitting));
        assert!((q_infinity(&RingParams::new(-1.0, 0.2, 0.15)).unwrap() - 0.2 / 0.35).abs() < 1e-15);
    }

    #[test]
    fn negative_c0_limit_matches_closed_form() {
        let p = RingParams::new(-0.7, 0.9, 0.4);
        let q = integrated_current(&p, 1e6).unwrap();
        assert!((q - q_infinity(&p).unwrap()).abs() < 1e-4, "{q}");
        assert!((charge_ratio_limit(&p).unwrap() - q_infinity(&p).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn charge_ratio_limit_is_c0_independent() {
        for c0 in [0.01, 0.1, 1.0, 10.0] {
            let q = charge_ratio_limit(&RingParams::new(c0, 0.2, 0.15)).unwrap();
            assert!((q - 4.0).abs() < 1e-12, "{c0}: {q}");
        }
    }

    #[test]
    fn bond12_antisymmetric_and_zero_on_symmetric_wire() {
        let p = RingParams::new(0.8, 1.1, 0.3);
        for u in [-2.0, 0.0, 1.5] {
            let g = conductance_bond12(&p, u).unwrap();
            let swapped = conductance_bond12(&p.swap_wire(), u).unwrap();
            assert!((g + swapped).abs() < 1e-12);
            assert_eq!(conductance_bond12(&RingParams::new(0.8, 0.5, 0.5), u).unwrap(), 0.0);
        }
    }

    #[test]
    fn simple_regime_peak_height_close_to_two_level() {
        let p = RingParams::new(1.0, 0.2, 0.15);
        let c = 0.05 / SQRT_2;
        let peak = (0..2001)
            .map(|k| -1.2 + 4e-4 * f64::from(k))
            .map(|u| conductance_exact(&p, u).unwrap())
            .fold(0.0, f64::max);
        assert!((peak / (4.0 / (4.0 * c)) - 1.0).abs() < 0.02, "{peak}");
    }
}
