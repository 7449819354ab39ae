use nalgebra::DMatrix;

use super::jacobi::dense_spectrum;
use crate::error::{invalid, NbseError, Result};
use crate::graph::SimilarityGraph;

/// Dense `H(β)` from `ω = tanh(βW)`: diagonal `1 + Σ ω²/(1−ω²)`,
/// off-diagonal `−ω/(1−ω²)`.
pub fn tanh_form_dense(g: &SimilarityGraph, beta: f64) -> DMatrix<f64> {
    let n = g.n_nodes();
    let mut h = DMatrix::<f64>::identity(n, n);
    for e in g.edges() {
        let w = (beta * e.weight).tanh();
        let den = 1.0 - w * w;
        h[(e.i, e.i)] += w * w / den;
        h[(e.j, e.j)] += w * w / den;
        h[(e.i, e.j)] -= w / den;
        h[(e.j, e.i)] -= w / den;
    }
    h
}

/// True when a plain Cholesky factorization succeeds with positive pivots.
fn positive_definite(a: &DMatrix<f64>) -> bool {
    let n = a.nrows();
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if d <= 0.0 || !d.is_finite() {
            return false;
        }
        let d = d.sqrt();
        l[j * n + j] = d;
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / d;
        }
    }
    true
}

/// β_N by scanning `β = k·resolution` until `H(β)` stops being positive
/// definite, then interpolating `λ_min` linearly across that grid step.
pub fn grid_beta_n(g: &SimilarityGraph, resolution: f64, beta_max: f64) -> Result<f64> {
    if !(resolution > 0.0 && beta_max > resolution) {
        return invalid("grid needs 0 < resolution < beta_max");
    }
    let steps = (beta_max / resolution).ceil() as usize;
    for k in 1..=steps {
        let hi = k as f64 * resolution;
        if positive_definite(&tanh_form_dense(g, hi)) {
            continue;
        }
        let lo = hi - resolution;
        let l_lo = dense_spectrum(&tanh_form_dense(g, lo))?.values[0];
        let l_hi = dense_spectrum(&tanh_form_dense(g, hi))?.values[0];
        return Ok(lo + resolution * l_lo / (l_lo - l_hi));
    }
    Err(NbseError::NoTransition { beta_max })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_graph_has_no_sign_change() {
        let g = SimilarityGraph::from_weighted_edges(4, &[]).unwrap();
        assert!(matches!(
            grid_beta_n(&g, 0.01, 5.0),
            Err(NbseError::NoTransition { .. })
        ));
    }

    #[test]
    fn complete_graph_closed_form() {
        let mut e = Vec::new();
        for i in 0..5 {
            for j in i + 1..5 {
                e.push((i, j, 1.0));
            }
        }
        let g = SimilarityGraph::from_weighted_edges(5, &e).unwrap();
        let want = -(0.5f64).ln() / 2.0;
        let got = grid_beta_n(&g, 1e-3, 3.0).unwrap();
        assert!((got - want).abs() < 1e-3, "{got} vs {want}");
    }

    #[test]
    fn cholesky_detects_indefinite() {
        assert!(positive_definite(&DMatrix::identity(3, 3)));
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(!positive_definite(&a));
    }
}
