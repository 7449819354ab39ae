//! Restarted Lanczos with full reorthogonalization for the smallest
//! algebraic eigenpair.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{NbseError, Result};
use crate::sparse::SymCsr;

const START_SEED: u64 = 0x1a2c_2053;
const BASIS: usize = 80;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = dot(v, v).sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// Returns `(λ, unit eigenvector, residual)`. `max_iter` caps the total
/// number of matrix-vector products.
pub fn lanczos_smallest(h: &SymCsr, tol: f64, max_iter: usize) -> Result<(f64, Vec<f64>, f64)> {
    let n = h.n();
    let m = BASIS.min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    let mut start: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    normalize(&mut start);

    let mut matvecs = 0;
    let mut best: Option<(f64, Vec<f64>, f64)> = None;
    let mut w = vec![0.0; n];
    while matvecs < max_iter {
        let mut basis: Vec<Vec<f64>> = vec![start.clone()];
        let mut alpha = Vec::with_capacity(m);
        let mut beta: Vec<f64> = Vec::with_capacity(m);
        for j in 0..m {
            h.matvec(&basis[j], &mut w);
            matvecs += 1;
            let a = dot(&w, &basis[j]);
            alpha.push(a);
            // two Gram-Schmidt passes against the whole basis
            for _ in 0..2 {
                for q in &basis {
                    let c = dot(&w, q);
                    w.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
                }
            }
            if j + 1 == m || matvecs >= max_iter {
                break;
            }
            let b = normalize(&mut w);
            if b <= 1e-14 * (a.abs() + 1.0) {
                // invariant subspace reached
                break;
            }
            beta.push(b);
            basis.push(w.clone());
        }

        let k = alpha.len();
        let mut t = DMatrix::zeros(k, k);
        for i in 0..k {
            t[(i, i)] = alpha[i];
            if i + 1 < k {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        let eig = SymmetricEigen::new(t);
        let (idx, _) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty tridiagonal");
        let s = eig.eigenvectors.column(idx);
        let mut y = vec![0.0; n];
        for (q, &c) in basis.iter().zip(s.iter()) {
            y.iter_mut().zip(q).for_each(|(yi, qi)| *yi += c * qi);
        }
        normalize(&mut y);
        h.matvec(&y, &mut w);
        let rayleigh = dot(&y, &w);
        let residual = w
            .iter()
            .zip(&y)
            .map(|(a, b)| (a - rayleigh * b).powi(2))
            .sum::<f64>()
            .sqrt();
        if best.as_ref().is_none_or(|b| residual < b.2) {
            best = Some((rayleigh, y.clone(), residual));
        }
        if residual <= tol {
            return Ok((rayleigh, y, residual));
        }
        start = y;
    }
    Err(NbseError::NonConvergence {
        iterations: matvecs,
        residual: best.map_or(f64::INFINITY, |b| b.2),
    })
}
