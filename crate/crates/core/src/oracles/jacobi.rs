use nalgebra::DMatrix;

use crate::error::{invalid, NbseError, Result};

pub const JACOBI_CAP: usize = 512;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseSpectrum {
    /// Ascending.
    pub values: Vec<f64>,
    /// Column `k` pairs with `values[k]`.
    pub vectors: DMatrix<f64>,
}

/// Full eigendecomposition by cyclic Jacobi rotations.
pub fn dense_spectrum(a: &DMatrix<f64>) -> Result<DenseSpectrum> {
    let n = a.nrows();
    if n != a.ncols() {
        return invalid(format!("matrix is {}x{}, not square", n, a.ncols()));
    }
    if n > JACOBI_CAP {
        return Err(NbseError::SizeCap { size: n, cap: JACOBI_CAP });
    }
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    for i in 0..n {
        for j in 0..i {
            if (a[(i, j)] - a[(j, i)]).abs() > 1e-12 * scale {
                return invalid("matrix is not symmetric");
            }
        }
    }
    let mut m = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    let off = |m: &DMatrix<f64>| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[(i, j)] * m[(i, j)];
                }
            }
        }
        s
    };
    let frob2: f64 = m.iter().map(|x| x * x).sum();
    for _sweep in 0..100 {
        if off(&m) <= 1e-30 * frob2.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[(k, p)], m[(k, q)]);
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[(p, k)], m[(q, k)]);
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].total_cmp(&m[(j, j)]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(DenseSpectrum { values, vectors })
}
