use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::SimilarityGraph;
use crate::error::{invalid, NbseError, Result};

/// Largest graph accepted by the dense heat-kernel diagnostic.
pub const HEAT_KERNEL_CAP: usize = 512;

/// `exp(−tL) f` for the combinatorial Laplacian `L = D_g − W`.
pub fn heat_kernel_apply(g: &SimilarityGraph, t: f64, f: &[f64]) -> Result<Vec<f64>> {
    let n = g.n_nodes();
    if n > HEAT_KERNEL_CAP {
        return Err(NbseError::SizeCap {
            size: n,
            cap: HEAT_KERNEL_CAP,
        });
    }
    if f.len() != n {
        return Err(NbseError::DimensionMismatch {
            expected: n,
            actual: f.len(),
        });
    }
    if !(t >= 0.0 && t.is_finite()) {
        return invalid(format!("diffusion time must be finite and nonnegative, got {t}"));
    }
    let mut lap = DMatrix::<f64>::zeros(n, n);
    for e in g.edges() {
        lap[(e.i, e.j)] -= e.weight;
        lap[(e.j, e.i)] -= e.weight;
        lap[(e.i, e.i)] += e.weight;
        lap[(e.j, e.j)] += e.weight;
    }
    let eig = SymmetricEigen::new(lap);
    let v = &eig.eigenvectors;
    let coeffs: DVector<f64> = v.transpose() * DVector::from_column_slice(f);
    let damped = DVector::from_iterator(
        n,
        coeffs
            .iter()
            .zip(eig.eigenvalues.iter())
            // the spectrum is ≥ 0; clamp rounding noise so exp never exceeds 1
            .map(|(c, &lam)| c * (-t * lam.max(0.0)).exp()),
    );
    Ok((v * damped).iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn two_node_closed_form() {
        let g = SimilarityGraph::from_weighted_edges(2, &[(0, 1, 1.0)]).unwrap();
        let out = heat_kernel_apply(&g, 1.0, &[1.0, 0.0]).unwrap();
        let e = (-2.0f64).exp();
        assert_relative_eq!(out[0], 0.5 * (1.0 + e), epsilon = 1e-14);
        assert_relative_eq!(out[1], 0.5 * (1.0 - e), epsilon = 1e-14);
    }

    #[test]
    fn identity_at_zero_and_constants_fixed() {
        let g = SimilarityGraph::from_weighted_edges(3, &[(0, 1, 0.4), (1, 2, 0.9)]).unwrap();
        let f = [0.3, -1.0, 2.0];
        let out = heat_kernel_apply(&g, 0.0, &f).unwrap();
        for (a, b) in out.iter().zip(&f) {
            assert_relative_eq!(a, b, epsilon = 1e-14);
        }
        for t in [0.5, 3.0, 40.0] {
            for v in heat_kernel_apply(&g, t, &[1.0; 3]).unwrap() {
                assert_relative_eq!(v, 1.0, epsilon = 1e-12);
            }
        }
        assert!(heat_kernel_apply(&g, -1.0, &f).is_err());
        assert!(heat_kernel_apply(&g, 1.0, &f[..2]).is_err());
    }
}
