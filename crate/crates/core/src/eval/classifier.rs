//! Multinomial logistic regression trained by full-batch gradient descent.

use super::LabeledDataset;
use crate::data::DataMatrix;
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifierParams {
    /// L2 penalty on the weights (not the biases).
    pub l2: f64,
    pub max_epochs: usize,
    /// Stop once the gradient norm falls below this.
    pub tol: f64,
}

impl Default for ClassifierParams {
    fn default() -> Self {
        Self {
            l2: 1e-4,
            max_epochs: 500,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub n_classes: usize,
    pub n_features: usize,
    /// `C×D` row-major, acting on standardized inputs.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    /// Training-set standardization applied before the linear map.
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
    pub epochs: usize,
    pub grad_norm: f64,
    pub converged: bool,
    pub loss_history: Vec<f64>,
}

impl LinearModel {
    pub fn predict(&self, x: &DataMatrix) -> Result<Vec<usize>> {
        if x.cols() != self.n_features {
            return Err(crate::NbseError::DimensionMismatch {
                expected: self.n_features,
                actual: x.cols(),
            });
        }
        let (c, d) = (self.n_classes, self.n_features);
        let mut z = vec![0.0; d];
        Ok((0..x.rows())
            .map(|i| {
                for (l, v) in x.row(i).iter().enumerate() {
                    z[l] = (v - self.mean[l]) / self.scale[l];
                }
                let mut best = (f64::NEG_INFINITY, 0);
                for k in 0..c {
                    let w = &self.weights[k * d..(k + 1) * d];
                    let s = self.bias[k] + w.iter().zip(&z).map(|(a, b)| a * b).sum::<f64>();
                    if s > best.0 {
                        best = (s, k);
                    }
                }
                best.1
            })
            .collect())
    }
}

/// Fraction of `pred` equal to `truth`.
pub fn accuracy(pred: &[usize], truth: &[usize]) -> f64 {
    if truth.is_empty() {
        return 0.0;
    }
    let hits = pred.iter().zip(truth).filter(|(a, b)| a == b).count();
    hits as f64 / truth.len() as f64
}

/// Mean softmax cross-entropy plus `l2/2·‖W‖²` and its gradient.
///
/// `theta` holds the `C×D` weights row-major followed by `C` biases.
pub fn loss_and_grad(
    x: &DataMatrix,
    y: &[usize],
    n_classes: usize,
    theta: &[f64],
    l2: f64,
) -> (f64, Vec<f64>) {
    let (m, d, c) = (x.rows(), x.cols(), n_classes);
    let (w, b) = theta.split_at(c * d);
    let mut grad = vec![0.0; theta.len()];
    let mut loss = 0.0;
    let mut p = vec![0.0; c];
    for i in 0..m {
        let row = x.row(i);
        for k in 0..c {
            p[k] = b[k] + w[k * d..(k + 1) * d].iter().zip(row).map(|(a, v)| a * v).sum::<f64>();
        }
        let top = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let norm: f64 = p.iter().map(|s| (s - top).exp()).sum();
        loss += top + norm.ln() - p[y[i]];
        for k in 0..c {
            let r = (p[k] - top).exp() / norm - if k == y[i] { 1.0 } else { 0.0 };
            for (g, v) in grad[k * d..(k + 1) * d].iter_mut().zip(row) {
                *g += r * v;
            }
            grad[c * d + k] += r;
        }
    }
    let inv = 1.0 / m as f64;
    loss *= inv;
    grad.iter_mut().for_each(|g| *g *= inv);
    loss += 0.5 * l2 * w.iter().map(|v| v * v).sum::<f64>();
    for (g, v) in grad[..c * d].iter_mut().zip(w) {
        *g += l2 * v;
    }
    (loss, grad)
}

fn column_moments(x: &DataMatrix) -> (Vec<f64>, Vec<f64>) {
    (0..x.cols())
        .map(|l| {
            let col = x.column(l);
            let n = col.len() as f64;
            let mu = col.iter().sum::<f64>() / n;
            let sd = (col.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / n).sqrt();
            (mu, if sd > 0.0 { sd } else { 1.0 })
        })
        .unzip()
}

/// Gradient descent from zero with Armijo backtracking, so the loss never
/// increases between epochs. Hitting `max_epochs` is not an error; the model
/// records `converged = false` and the final gradient norm.
pub fn train_linear_classifier(data: &LabeledDataset, params: &ClassifierParams) -> Result<LinearModel> {
    let (d, c) = (data.x.cols(), data.n_classes);
    if d == 0 {
        return invalid("classifier needs at least one feature");
    }
    if c < 1 {
        return invalid("classifier needs at least one class");
    }
    let (mean, scale) = column_moments(&data.x);
    let mut z = data.x.clone();
    for (i, v) in z.values_mut().iter_mut().enumerate() {
        let l = i % d;
        *v = (*v - mean[l]) / scale[l];
    }

    let mut theta = vec![0.0; c * (d + 1)];
    let (mut loss, mut grad) = loss_and_grad(&z, &data.y, c, &theta, params.l2);
    let mut history = vec![loss];
    let mut step = 1.0;
    let mut epochs = 0;
    let mut gnorm = norm(&grad);
    while gnorm > params.tol && epochs < params.max_epochs {
        step *= 2.0;
        loop {
            let trial: Vec<f64> = theta.iter().zip(&grad).map(|(t, g)| t - step * g).collect();
            let (l_new, g_new) = loss_and_grad(&z, &data.y, c, &trial, params.l2);
            if l_new <= loss - 0.5 * step * gnorm * gnorm {
                theta = trial;
                loss = l_new;
                grad = g_new;
                break;
            }
            step *= 0.5;
            if step < 1e-12 {
                break;
            }
        }
        if step < 1e-12 {
            break;
        }
        epochs += 1;
        history.push(loss);
        gnorm = norm(&grad);
    }
    let converged = gnorm <= params.tol;
    if !converged {
        log::debug!("classifier stopped after {epochs} epochs, gradient norm {gnorm:e}");
    }
    let bias = theta.split_off(c * d);
    Ok(LinearModel {
        n_classes: c,
        n_features: d,
        weights: theta,
        bias,
        mean,
        scale,
        epochs,
        grad_norm: gnorm,
        converged,
        loss_history: history,
    })
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separable_one_feature() {
        let x = DataMatrix::from_columns(&[vec![-2.0, -1.5, -1.0, 1.0, 1.5, 2.0]]).unwrap();
        let y = vec![0, 0, 0, 1, 1, 1];
        let data = LabeledDataset::new(x.clone(), y.clone(), 2).unwrap();
        let model = train_linear_classifier(&data, &ClassifierParams::default()).unwrap();
        assert_eq!(accuracy(&model.predict(&x).unwrap(), &y), 1.0);
        assert!(model.loss_history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn predict_checks_width() {
        let x = DataMatrix::from_columns(&[vec![0.0, 1.0, 2.0, 3.0]]).unwrap();
        let data = LabeledDataset::new(x, vec![0, 0, 1, 1], 2).unwrap();
        let model = train_linear_classifier(&data, &ClassifierParams::default()).unwrap();
        let wide = DataMatrix::from_columns(&[vec![0.0, 1.0], vec![0.0, 1.0]]).unwrap();
        assert!(model.predict(&wide).is_err());
    }
}
