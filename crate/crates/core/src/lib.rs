//! Tomographic-probability representation of single-mode quantum and
//! classical states.
//!
//! The crate covers symplectic tomograms `w(X, mu, nu)`, photon-number
//! tomograms `omega(n, alpha)`, their inverse maps, and the trace-route star
//! product, with analytic formulas paired against a truncated Fock-space
//! matrix route.

pub mod error;
pub mod fock;
pub mod formats;
pub mod gaussian;
pub mod hermite2;
pub mod photon_number;
pub mod special;
pub mod star_product;
pub mod symplectic;
pub mod verify;

pub use error::{Result, TomoError};
pub use fock::{DensityMatrix, OperatorMatrix, PhasePoint, StateKind};
pub use num_complex::Complex64 as C64;
