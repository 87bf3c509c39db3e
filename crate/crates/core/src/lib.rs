//! Simulator for a three-level cascade atom coupled to a single-mode cavity
//! field with intensity-dependent strength, the field prepared in a nonlinear
//! coherent state.
//!
//! The crate is organized around one pipeline:
//!
//! * [`nonlinearity`] — the intensity functions `f(n)`, `g(n)` and their
//!   log-factorials (the single extension point for physical realizations),
//! * [`coherent`] — truncated Fock coefficients of the initial field state,
//! * [`dynamics`] — the closed-form evolved state at scaled time `tau`,
//! * [`observables`] — mean photon number, population inversion, Mandel Q and
//!   quadrature squeezing from the closed-form series,
//! * [`oracle`] — an independent brute-force verifier that integrates the
//!   Schrödinger equation on the truncated basis and recomputes every
//!   observable from raw amplitudes.

pub mod coherent;
pub mod dynamics;
pub mod error;
pub mod nonlinearity;
pub mod observables;
pub mod oracle;

pub use coherent::{CoefficientVector, FieldParams};
pub use dynamics::{CouplingParams, EvolvedState};
pub use error::{Error, Result};
pub use nonlinearity::NonlinearitySpec;
pub use observables::ObservableSample;
pub use oracle::OracleState;
