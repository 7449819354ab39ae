//! Brute-force references for the test suite.
//!
//! Nothing here calls the production eigensolvers or root finder: the
//! spectra come from a cyclic Jacobi iteration, the Bethe–Hessian is
//! rebuilt from its tanh form, and roots come from a plain grid scan.

mod grid;
mod ising;
mod jacobi;
mod synthetic;

pub use grid::{grid_beta_n, tanh_form_dense};
pub use ising::{exact_ising_correlations, ISING_CAP};
pub use jacobi::{dense_spectrum, DenseSpectrum, JACOBI_CAP};
pub use synthetic::{make_synthetic, SyntheticData, SyntheticKind, SyntheticSpec};
