use nalgebra::DMatrix;

use crate::error::{NbseError, Result};
use crate::graph::SimilarityGraph;

/// Largest graph enumerated exhaustively (2^16 states).
pub const ISING_CAP: usize = 16;

/// Exact `⟨s_i s_j⟩` under `p(s) ∝ exp(β Σ_edges W_ij s_i s_j)`.
pub fn exact_ising_correlations(g: &SimilarityGraph, beta: f64) -> Result<DMatrix<f64>> {
    let n = g.n_nodes();
    if n > ISING_CAP {
        return Err(NbseError::SizeCap { size: n, cap: ISING_CAP });
    }
    let spin = |s: u32, i: usize| if s >> i & 1 == 1 { 1.0 } else { -1.0 };
    let energy = |s: u32| -> f64 {
        g.edges()
            .iter()
            .map(|e| e.weight * spin(s, e.i) * spin(s, e.j))
            .sum()
    };
    // shift by the all-aligned exponent so no weight overflows
    let top = beta * g.edges().iter().map(|e| e.weight).sum::<f64>();
    let mut z = 0.0;
    let mut acc = DMatrix::<f64>::zeros(n, n);
    for s in 0..(1u32 << n) {
        let w = (beta * energy(s) - top).exp();
        z += w;
        for i in 0..n {
            for j in i + 1..n {
                acc[(i, j)] += w * spin(s, i) * spin(s, j);
            }
        }
    }
    let mut c = DMatrix::<f64>::identity(n, n);
    for i in 0..n {
        for j in i + 1..n {
            c[(i, j)] = acc[(i, j)] / z;
            c[(j, i)] = c[(i, j)];
        }
    }
    Ok(c)
}
