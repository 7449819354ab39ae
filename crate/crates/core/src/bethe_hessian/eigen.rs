//! Smallest algebraic eigenpair of a sparse symmetric matrix.
//!
//! The matrix is split into the connected components of its off-diagonal
//! pattern; each block is solved on its own (dense below the cutoff,
//! Lanczos above) and the lowest block eigenvalue wins. On a disconnected
//! graph the returned eigenvector is therefore supported on exactly one
//! component.

use nalgebra::SymmetricEigen;

use super::lanczos::lanczos_smallest;
use super::BetheHessianAssembly;
use crate::error::{invalid, NbseError, Result};
use crate::sparse::{component_groups, SymCsr};

/// Blocks up to this size use a full dense decomposition.
pub const DENSE_CUTOFF: usize = 512;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub lambda: f64,
    /// Unit ℓ₂ norm, largest-magnitude entry positive (ties: lowest index).
    pub psi: Vec<f64>,
    /// `‖Hψ − λψ‖₂` on the full matrix.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    /// Residual tolerance, relative to `max(1, ‖H‖∞)`.
    pub tol: f64,
    /// Matrix-vector product budget per Lanczos solve.
    pub max_iter: usize,
    pub dense_cutoff: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: 20_000,
            dense_cutoff: DENSE_CUTOFF,
        }
    }
}

/// Flip `v` so its largest-magnitude entry is positive; ties go to the
/// lowest index.
pub fn apply_sign_convention(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|&x| x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

fn abs_tol(h: &SymCsr, tol: f64) -> f64 {
    tol * h.norm_inf().max(1.0)
}

fn block_min_value(block: &SymCsr, opts: &EigenOptions) -> Result<f64> {
    if block.n() <= opts.dense_cutoff {
        let vals = block.to_dense().symmetric_eigenvalues();
        Ok(vals.iter().copied().fold(f64::INFINITY, f64::min))
    } else {
        Ok(lanczos_smallest(block, abs_tol(block, opts.tol), opts.max_iter)?.0)
    }
}

fn block_min_pair(block: &SymCsr, opts: &EigenOptions) -> Result<(f64, Vec<f64>)> {
    if block.n() <= opts.dense_cutoff {
        let eig = SymmetricEigen::new(block.to_dense());
        let (k, &lambda) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty block");
        Ok((lambda, eig.eigenvectors.column(k).iter().copied().collect()))
    } else {
        let (lambda, v, _) = lanczos_smallest(block, abs_tol(block, opts.tol), opts.max_iter)?;
        Ok((lambda, v))
    }
}

fn check_size(h: &SymCsr) -> Result<()> {
    if h.n() == 0 {
        return invalid("empty matrix has no eigenpairs");
    }
    Ok(())
}

/// Smallest algebraic eigenvalue only.
pub fn smallest_eigenvalue_of(h: &SymCsr, opts: &EigenOptions) -> Result<f64> {
    check_size(h)?;
    let groups = component_groups(&h.components());
    let mut best = f64::INFINITY;
    for nodes in &groups {
        let lambda = if nodes.len() == 1 {
            h.get(nodes[0], nodes[0])
        } else {
            block_min_value(&h.principal_submatrix(nodes), opts)?
        };
        best = best.min(lambda);
    }
    Ok(best)
}

pub fn smallest_eigenpair_of(h: &SymCsr, opts: &EigenOptions) -> Result<EigenPair> {
    check_size(h)?;
    let groups = component_groups(&h.components());
    let mut best: Option<(f64, usize, Vec<f64>)> = None;
    for (c, nodes) in groups.iter().enumerate() {
        let (lambda, v) = if nodes.len() == 1 {
            (h.get(nodes[0], nodes[0]), vec![1.0])
        } else {
            block_min_pair(&h.principal_submatrix(nodes), opts)?
        };
        if best.as_ref().is_none_or(|b| lambda < b.0) {
            best = Some((lambda, c, v));
        }
    }
    let (lambda, c, local) = best.expect("at least one component");
    let mut psi = vec![0.0; h.n()];
    for (&i, &x) in groups[c].iter().zip(&local) {
        psi[i] = x;
    }
    let norm = psi.iter().map(|x| x * x).sum::<f64>().sqrt();
    psi.iter_mut().for_each(|x| *x /= norm);
    apply_sign_convention(&mut psi);

    let hv = h.mul_vec(&psi);
    let residual = hv
        .iter()
        .zip(&psi)
        .map(|(a, b)| (a - lambda * b).powi(2))
        .sum::<f64>()
        .sqrt();
    if residual > abs_tol(h, opts.tol) {
        return Err(NbseError::NonConvergence {
            iterations: 0,
            residual,
        });
    }
    Ok(EigenPair {
        lambda,
        psi,
        residual,
    })
}

pub fn smallest_eigenpair(
    a: &BetheHessianAssembly,
    tol: f64,
    max_iter: usize,
) -> Result<EigenPair> {
    smallest_eigenpair_of(
        &a.h,
        &EigenOptions {
            tol,
            max_iter,
            ..EigenOptions::default()
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bethe_hessian::assemble_bethe_hessian;
    use crate::graph::SimilarityGraph;
    use approx::assert_relative_eq;

    #[test]
    fn identity_spectrum() {
        let g = SimilarityGraph::from_weighted_edges(4, &[(0, 1, 1.0), (2, 3, 0.5)]).unwrap();
        let a = assemble_bethe_hessian(&g, 0.0).unwrap();
        let p = smallest_eigenpair(&a, 1e-12, 100).unwrap();
        assert_eq!(p.lambda, 1.0);
        assert_relative_eq!(p.psi.iter().map(|x| x * x).sum::<f64>(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn two_node_closed_form() {
        let g = SimilarityGraph::from_weighted_edges(2, &[(0, 1, 1.0)]).unwrap();
        let a = assemble_bethe_hessian(&g, 1.0).unwrap();
        let p = smallest_eigenpair(&a, 1e-12, 100).unwrap();
        let want = 1.0 + 1f64.sinh().powi(2) - 0.5 * 2f64.sinh();
        assert_relative_eq!(p.lambda, want, epsilon = 1e-14);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert_relative_eq!(p.psi[0], r, epsilon = 1e-12);
        assert_relative_eq!(p.psi[1], r, epsilon = 1e-12);
    }

    #[test]
    fn disconnected_blocks_localize() {
        // block {0,1} couples more strongly than {2,3}
        let g = SimilarityGraph::from_weighted_edges(4, &[(0, 1, 0.3), (2, 3, 0.9)]).unwrap();
        let a = assemble_bethe_hessian(&g, 1.0).unwrap();
        let p = smallest_eigenpair(&a, 1e-12, 100).unwrap();
        assert_eq!(p.psi[0], 0.0);
        assert_eq!(p.psi[1], 0.0);
        assert!(p.psi[2] > 0.0 && p.psi[3] > 0.0);
        let v = smallest_eigenvalue_of(&a.h, &EigenOptions::default()).unwrap();
        assert_relative_eq!(v, p.lambda, epsilon = 1e-14);
    }

    #[test]
    fn sign_convention_ties_go_to_lowest_index() {
        let mut v = vec![-0.5, 0.5, 0.1];
        apply_sign_convention(&mut v);
        assert_eq!(v, vec![0.5, -0.5, -0.1]);
        let mut w = vec![0.2, -0.9];
        apply_sign_convention(&mut w);
        assert_eq!(w, vec![-0.2, 0.9]);
    }
}
