//! Bethe–Hessian assembly `H(β) = I + D̃(β) − S(β)` and related operators.
//!
//! `D̃_ii = Σ_j sinh²(βW_ij)` and `S_ij = ½ sinh(2βW_ij)` on edges. The
//! tanh-parameterised form with `ω = tanh(βW)` is kept as an independent
//! assembly route for cross-checking.

mod eigen;
mod lanczos;

pub use eigen::{
    apply_sign_convention, smallest_eigenpair, smallest_eigenpair_of, smallest_eigenvalue_of,
    EigenOptions, EigenPair, DENSE_CUTOFF,
};
pub use lanczos::lanczos_smallest;

use crate::error::{invalid, NbseError, Result};
use crate::graph::SimilarityGraph;
use crate::sparse::SymCsr;

/// Largest accepted `β·max W`; `sinh` overflows near 710.
pub const SINH_GUARD: f64 = 350.0;

#[derive(Debug, Clone, PartialEq)]
pub struct BetheHessianAssembly {
    pub beta: f64,
    pub h: SymCsr,
    pub d_tilde: Vec<f64>,
    /// Coupling `S(β)`; its off-diagonal pattern is the graph's edge set.
    pub coupling: SymCsr,
}

fn check_beta(g: &SimilarityGraph, beta: f64) -> Result<()> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return invalid(format!("β must be finite and nonnegative, got {beta}"));
    }
    let product = beta * g.max_weight();
    if product > SINH_GUARD {
        return Err(NbseError::Overflow {
            product,
            limit: SINH_GUARD,
        });
    }
    Ok(())
}

pub fn assemble_bethe_hessian(g: &SimilarityGraph, beta: f64) -> Result<BetheHessianAssembly> {
    check_beta(g, beta)?;
    let n = g.n_nodes();
    let mut d_tilde = vec![0.0; n];
    let mut s_upper = Vec::with_capacity(g.n_edges());
    for e in g.edges() {
        let x = beta * e.weight;
        let sh = x.sinh();
        d_tilde[e.i] += sh * sh;
        d_tilde[e.j] += sh * sh;
        s_upper.push((e.i, e.j, 0.5 * (2.0 * x).sinh()));
    }
    let coupling = SymCsr::from_parts(&vec![0.0; n], &s_upper);
    let h_diag: Vec<f64> = d_tilde.iter().map(|d| 1.0 + d).collect();
    let h_upper: Vec<_> = s_upper.iter().map(|&(i, j, s)| (i, j, -s)).collect();
    Ok(BetheHessianAssembly {
        beta,
        h: SymCsr::from_parts(&h_diag, &h_upper),
        d_tilde,
        coupling,
    })
}

/// `H(β)` through effective couplings `ω = tanh(βW)`:
/// `H_ii = 1 + Σ ω²/(1−ω²)`, `H_ij = −ω/(1−ω²)`.
pub fn assemble_tanh_form(g: &SimilarityGraph, beta: f64) -> Result<SymCsr> {
    check_beta(g, beta)?;
    let mut diag = vec![1.0; g.n_nodes()];
    let mut upper = Vec::with_capacity(g.n_edges());
    for e in g.edges() {
        let w = (beta * e.weight).tanh();
        let denom = (1.0 - w) * (1.0 + w);
        diag[e.i] += w * w / denom;
        diag[e.j] += w * w / denom;
        upper.push((e.i, e.j, -w / denom));
    }
    Ok(SymCsr::from_parts(&diag, &upper))
}

/// `L_BH = I − (I+D̃)^{−1/2} S (I+D̃)^{−1/2}`.
pub fn bh_laplacian(a: &BetheHessianAssembly) -> SymCsr {
    let n = a.h.n();
    let inv_sqrt: Vec<f64> = a.d_tilde.iter().map(|d| 1.0 / (1.0 + d).sqrt()).collect();
    let mut upper = Vec::new();
    for i in 0..n {
        for (j, s) in a.coupling.row(i) {
            if j > i {
                upper.push((i, j, -s * inv_sqrt[i] * inv_sqrt[j]));
            }
        }
    }
    SymCsr::from_parts(&vec![1.0; n], &upper)
}

/// Second-order expansion `I − βW + β² diag(Σ_j W_ij²)`.
pub fn small_beta_approx(g: &SimilarityGraph, beta: f64) -> Result<SymCsr> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return invalid(format!("β must be finite and nonnegative, got {beta}"));
    }
    let mut diag = vec![1.0; g.n_nodes()];
    let mut upper = Vec::with_capacity(g.n_edges());
    for e in g.edges() {
        let w2 = e.weight * e.weight;
        diag[e.i] += beta * beta * w2;
        diag[e.j] += beta * beta * w2;
        upper.push((e.i, e.j, -beta * e.weight));
    }
    Ok(SymCsr::from_parts(&diag, &upper))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Inertia {
    pub n_negative: usize,
    pub n_zero: usize,
    pub n_positive: usize,
}

/// Scale-aware zero threshold `10⁻⁸·‖A‖_∞`.
pub fn default_zero_tol(a: &SymCsr) -> f64 {
    1e-8 * a.norm_inf()
}

/// Eigenvalue sign counts from a dense decomposition; `|λ| ≤ zero_tol`
/// counts as zero.
pub fn inertia(a: &SymCsr, zero_tol: f64) -> Result<Inertia> {
    if a.n() > DENSE_CUTOFF {
        return Err(NbseError::SizeCap {
            size: a.n(),
            cap: DENSE_CUTOFF,
        });
    }
    let eig = a.to_dense().symmetric_eigenvalues();
    let mut out = Inertia {
        n_negative: 0,
        n_zero: 0,
        n_positive: 0,
    };
    for &l in eig.iter() {
        if l.abs() <= zero_tol {
            out.n_zero += 1;
        } else if l < 0.0 {
            out.n_negative += 1;
        } else {
            out.n_positive += 1;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn single_edge() -> SimilarityGraph {
        SimilarityGraph::from_weighted_edges(2, &[(0, 1, 1.0)]).unwrap()
    }

    #[test]
    fn beta_zero_is_identity() {
        let g = SimilarityGraph::from_weighted_edges(3, &[(0, 1, 0.5), (1, 2, 0.9)]).unwrap();
        let a = assemble_bethe_hessian(&g, 0.0).unwrap();
        assert_eq!(a.h.to_dense(), nalgebra::DMatrix::identity(3, 3));
        assert_eq!(bh_laplacian(&a).to_dense(), nalgebra::DMatrix::identity(3, 3));
        assert_eq!(small_beta_approx(&g, 0.0).unwrap().to_dense(), nalgebra::DMatrix::identity(3, 3));
    }

    #[test]
    fn single_edge_values() {
        let a = assemble_bethe_hessian(&single_edge(), 1.0).unwrap();
        let sh2 = 1f64.sinh().powi(2);
        assert_relative_eq!(a.d_tilde[0], sh2, max_relative = 1e-15);
        assert_relative_eq!(a.d_tilde[1], sh2, max_relative = 1e-15);
        assert_relative_eq!(a.coupling.get(0, 1), 1.813430, epsilon = 1e-6);
        assert_relative_eq!(a.h.get(0, 1), -0.5 * 2f64.sinh(), max_relative = 1e-15);
        let l = bh_laplacian(&a);
        assert_relative_eq!(l.get(0, 1), -(0.5 * 2f64.sinh()) / (1.0 + sh2), max_relative = 1e-14);
    }

    #[test]
    fn triangle_matches_tanh_form() {
        let g = SimilarityGraph::from_weighted_edges(3, &[(0, 1, 0.5), (1, 2, 0.5), (0, 2, 0.5)])
            .unwrap();
        let a = assemble_bethe_hessian(&g, 0.2).unwrap();
        let t = assemble_tanh_form(&g, 0.2).unwrap();
        // hand-evaluated tanh form: ω = tanh(0.1)
        let w = 0.1f64.tanh();
        let diag = 1.0 + 2.0 * w * w / (1.0 - w * w);
        let off = -w / (1.0 - w * w);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { diag } else { off };
                assert_relative_eq!(a.h.get(i, j), want, max_relative = 1e-12);
                assert_relative_eq!(t.get(i, j), want, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn overflow_guard() {
        let g = single_edge();
        assert!(matches!(
            assemble_bethe_hessian(&g, 400.0),
            Err(NbseError::Overflow { .. })
        ));
        assert!(assemble_bethe_hessian(&g, -1.0).is_err());
        assert!(assemble_bethe_hessian(&g, 300.0).is_ok());
    }

    #[test]
    fn inertia_examples() {
        let id = SymCsr::identity(3);
        assert_eq!(
            inertia(&id, default_zero_tol(&id)).unwrap(),
            Inertia { n_negative: 0, n_zero: 0, n_positive: 3 }
        );
        let d = SymCsr::from_parts(&[-1.0, 0.0, 2.0], &[]);
        assert_eq!(
            inertia(&d, 1e-9).unwrap(),
            Inertia { n_negative: 1, n_zero: 1, n_positive: 1 }
        );
    }

    #[test]
    fn small_beta_remainder_is_cubic() {
        let g = single_edge();
        let err = |beta: f64| {
            let h = assemble_bethe_hessian(&g, beta).unwrap().h.to_dense();
            let approx = small_beta_approx(&g, beta).unwrap().to_dense();
            (h - approx).norm()
        };
        assert!(err(0.01) <= 1e-5);
        let ratio = err(0.02) / err(0.01);
        assert!((7.5..8.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn star_hub_gets_largest_diagonal() {
        let edges: Vec<_> = (1..6).map(|j| (0, j, 0.7)).collect();
        let g = SimilarityGraph::from_weighted_edges(6, &edges).unwrap();
        for beta in [0.05, 0.3, 1.0, 3.0] {
            let h = assemble_bethe_hessian(&g, beta).unwrap().h;
            for leaf in 1..6 {
                assert!(h.get(0, 0) > h.get(leaf, leaf));
            }
        }
    }
}
