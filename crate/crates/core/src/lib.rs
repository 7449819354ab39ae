//! Noise-based spectral embedding (NBSE).
//!
//! Builds adaptive-kernel similarity graphs, assembles the Bethe–Hessian
//! `H(β) = I + D̃(β) − S(β)`, locates the inverse temperature `β_N` where
//! its smallest eigenvalue vanishes, and uses the associated eigenvectors
//! to fingerprint features and select representatives by balanced
//! histogram binning.

pub mod ablation;
pub mod bethe_hessian;
pub mod data;
pub mod error;
pub mod eval;
pub mod graph;
pub mod nbse;
pub mod nishimori;
pub mod noise;
pub mod oracles;
pub mod sparse;

pub use data::DataMatrix;
pub use error::{NbseError, Result};
pub use graph::SimilarityGraph;

/// Format a float with 17 significant digits (lossless round trip).
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}
