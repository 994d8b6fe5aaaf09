//! Adiabatic transport through a driven three-site ring.
//!
//! A dot (site 0) with swept potential `u` is coupled to both ends of a
//! two-site wire. Raising `u` through the wire levels transfers one particle
//! from the dot into the wire, and the charge passing each bond need not lie
//! between 0 and 1: part of it circulates around the ring.
//!
//! * [`model`]: parameters, Hamiltonians and current operators.
//! * [`spectral`]: closed-form spectrum and eigenstates, plus an independent
//!   Jacobi eigensolver.
//! * [`transport`]: geometric conductance `G(u)` and integrated charge `Q(u)`.
//! * [`twolevel`]: effective two-level reductions, metamorphosis and regimes.
//! * [`dynamics`]: time-dependent propagation for finite sweep rates.
//!
//! ```
//! use ringstir::{integrated_current, q_infinity, RingParams};
//!
//! let p = RingParams::new(1.0, 0.2, 0.15);
//! let q = integrated_current(&p, 1e4).unwrap();
//! assert!((q - q_infinity(&p).unwrap()).abs() < 1e-3);
//! assert!((q - 4.0).abs() < 1e-3);
//! ```

pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod model;
pub mod quadrature;
pub mod spectral;
pub mod transport;
pub mod twolevel;

pub use dynamics::{
    adiabaticity_classify, max_current_estimate, propagate, Adiabaticity, InitialState, Sample, StepControl,
    SweepProtocol, TimeTrace,
};
pub use error::{Error, Result};
pub use model::{
    build_current_operator, build_hamiltonian_2site, build_hamiltonian_3site, Bond, HermitianMatrix3, RingParams,
    TestFlux, TwoSiteParams,
};
pub use spectral::{eigenvalues_trig, ground_state, oracle_eigensolve, GroundState3, Spectrum3};
pub use transport::{
    adiabatic_sweep, conductance_exact, conductance_exact_bond, conductance_numeric, integrated_current,
    integrated_current_bond, q_infinity, two_site_g, two_site_q, FiniteDifference,
};
pub use twolevel::{
    classify_regime, dark_state_params, metamorphosis_point, reduced_wire_hamiltonian, shifted_params,
    simple_params, Regime, RegimeThresholds, Scheme, TwoLevelParams,
};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/ring-model.md")]
    mod ring_model {}
    #[doc = include_str!("../../../book/src/spectrum.md")]
    mod spectrum {}
    #[doc = include_str!("../../../book/src/conductance.md")]
    mod conductance {}
    #[doc = include_str!("../../../book/src/two-level.md")]
    mod two_level {}
    #[doc = include_str!("../../../book/src/metamorphosis.md")]
    mod metamorphosis {}
    #[doc = include_str!("../../../book/src/dynamics.md")]
    mod dynamics {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
