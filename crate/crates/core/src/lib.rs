//! Solvable models for one-dimensional Schrödinger operators with
//! squeezed δ'-like potentials `α ε⁻² Ψ(x/ε)`.
//!
//! The crate computes the resonance set and coupling function of a
//! profile, spectra of the perturbed and limit operators, scattering
//! through the squeezed barrier, first-order eigenvalue correctors and the
//! convergence studies built on top of them.

pub mod cli;
pub mod error;
pub mod experiments;
pub mod ivp;
pub mod profiles;
pub mod resonance;
pub mod roots;
pub mod scattering;
pub mod spectra;

pub use error::{Error, ErrorKind, Result};
pub use ivp::{LinearOde, PropagatorMatrix, SolverConfig, StateVector};
pub use profiles::{classify, Profile, ProfileClass};
