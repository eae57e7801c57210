//! Spectral analysis of the relativistic Heun (van Diejen) modular pair of
//! analytic difference operators.
//!
//! The crate evaluates the underlying elliptic special functions, the kernel
//! and coefficient functions of the difference operators, discretizes the
//! associated Hilbert-Schmidt integral operators by Nystrom quadrature,
//! continues the joint eigenfunctions into the complex plane, extracts the
//! difference-operator eigenvalues, and runs the verification experiments
//! (exact solvable cases, eigenfunction identities, polynomial asymptotics,
//! Weyl-group isospectrality, cluster commutativity).
//!
//! Entry points:
//! - [`params::Params`] / [`coupling::Coupling`]: the geometric and coupling data.
//! - [`specfun`]: the building-block functions `G`, `E`, `R`, `s`, `G_t`.
//! - [`vdcore`]: weights, kernels, shift coefficients, identity suite.
//! - [`hsspec`]: quadrature, integral-operator discretization, continuation.
//! - [`adoeigen`]: eigenvalue extraction and identity checks.
//! - [`polyasym`]: orthonormal polynomials and decay diagnostics.
//! - [`symlab`]: cluster commutativity and Weyl-orbit isospectrality scans.
//! - [`cli`]: the configuration-driven experiment runner behind the `vds` binary.

pub mod error;
pub mod params;
pub mod specfun;

pub mod coupling;
pub mod vdcore;

pub mod hsspec;
pub mod quad;

pub mod acceptance;
pub mod adoeigen;
pub mod polyasym;
pub mod symlab;

pub mod cli;
pub mod report;

pub use error::{Result, VdError};
pub use params::{Params, Shift, Sign, TruncationPolicy};
