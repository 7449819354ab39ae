//! Gaussian perturbation of objects and the β_N stability sweep.
//!
//! The sweep freezes the baseline edge set and local scales, so only edge
//! weights move with the noise.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::data::DataMatrix;
use crate::error::{invalid, NbseError, Result};
use crate::eval::derive_seed;
use crate::fmt_f64;
use crate::graph::{weight_graph_on_backbone, GraphParams, SimilarityGraph};
use crate::nishimori::{find_beta_n, SearchParams};

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpec {
    /// Per-object base scale; row `i` gets standard deviation `factor·base_scales[i]`.
    pub base_scales: Vec<f64>,
    pub factor: f64,
    pub seed: u64,
}

pub fn perturb(x: &DataMatrix, spec: &NoiseSpec) -> Result<DataMatrix> {
    if !(spec.factor >= 0.0 && spec.factor.is_finite()) {
        return invalid(format!("noise factor must be non-negative, got {}", spec.factor));
    }
    if spec.base_scales.len() != x.rows() {
        return Err(NbseError::DimensionMismatch {
            expected: x.rows(),
            actual: spec.base_scales.len(),
        });
    }
    let mut out = x.clone();
    if spec.factor == 0.0 {
        return Ok(out);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let d = x.cols();
    for (i, row) in out.values_mut().chunks_mut(d).enumerate() {
        let sd = spec.factor * spec.base_scales[i];
        for v in row {
            let z: f64 = StandardNormal.sample(&mut rng);
            *v += sd * z;
        }
    }
    Ok(out)
}

/// `max |W̃_ij − W_ij| / |W_ij|` over the shared edge set.
pub fn weight_epsilon(g: &SimilarityGraph, g_tilde: &SimilarityGraph) -> Result<f64> {
    if !g.same_edge_set(g_tilde) {
        return invalid("weight comparison needs identical edge sets");
    }
    Ok(g.edges()
        .iter()
        .zip(g_tilde.edges())
        .map(|(a, b)| (b.weight - a.weight).abs() / a.weight.abs())
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShiftParams {
    /// Noise factors, ascending.
    pub factors: Vec<f64>,
    pub trials: usize,
    pub graph: GraphParams,
    pub search: SearchParams,
    pub seed: u64,
    /// Trials with `factor ≤ small_factor_ratio·min(factors)` form the
    /// small-factor regime for the bound check.
    pub small_factor_ratio: f64,
    /// Allowed multiple of the calibrated bound.
    pub bound_slack: f64,
}

impl Default for ShiftParams {
    fn default() -> Self {
        let factors = (0..8).map(|k| 10f64.powf(-3.0 + 2.0 * k as f64 / 7.0)).collect();
        Self {
            factors,
            trials: 20,
            graph: GraphParams::default(),
            search: SearchParams::default(),
            seed: 0,
            small_factor_ratio: 10.0,
            bound_slack: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShiftRow {
    pub factor: f64,
    pub trial: usize,
    pub epsilon: f64,
    /// `|β̃_N − β_N|`, `None` when the perturbed graph had no root.
    pub shift: Option<f64>,
    pub flag: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShiftFit {
    /// Least-squares slope of log(median shift) on log(factor).
    pub slope: f64,
    pub intercept: f64,
    /// 95% t interval on the slope; NaN with fewer than three points.
    pub slope_ci: (f64, f64),
    pub n_points: usize,
    /// Trials that failed and were left out of the fit.
    pub n_failed: usize,
    /// `max shift·|g| / (ε·√|E|)` over the smallest-factor trials.
    pub c1: f64,
    pub n_small_factor: usize,
    pub bound_violations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShiftTable {
    pub beta_n: f64,
    pub g: f64,
    pub n_edges: usize,
    pub rows: Vec<ShiftRow>,
    /// Median shift per factor, in factor order.
    pub medians: Vec<(f64, Option<f64>)>,
    pub fit: ShiftFit,
}

impl ShiftTable {
    /// `factor,trial,epsilon,shift`; failed trials leave `shift` empty.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "factor,trial,epsilon,shift")?;
        for r in &self.rows {
            let s = r.shift.map(fmt_f64).unwrap_or_default();
            writeln!(out, "{},{},{},{}", fmt_f64(r.factor), r.trial, fmt_f64(r.epsilon), s)?;
        }
        Ok(())
    }

    /// Fit summary as `key=value` lines.
    pub fn write_fit<W: Write>(&self, mut out: W) -> Result<()> {
        let f = &self.fit;
        writeln!(out, "beta_n={}", fmt_f64(self.beta_n))?;
        writeln!(out, "g={}", fmt_f64(self.g))?;
        writeln!(out, "n_edges={}", self.n_edges)?;
        writeln!(out, "slope={}", fmt_f64(f.slope))?;
        writeln!(out, "intercept={}", fmt_f64(f.intercept))?;
        writeln!(out, "slope_ci_low={}", fmt_f64(f.slope_ci.0))?;
        writeln!(out, "slope_ci_high={}", fmt_f64(f.slope_ci.1))?;
        writeln!(out, "n_points={}", f.n_points)?;
        writeln!(out, "n_failed={}", f.n_failed)?;
        writeln!(out, "c1={}", fmt_f64(f.c1))?;
        writeln!(out, "n_small_factor={}", f.n_small_factor)?;
        writeln!(out, "bound_violations={}", f.bound_violations)?;
        Ok(())
    }
}

fn median(v: &mut [f64]) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

/// Ordinary least squares `y = a + b·x`; returns `(b, a, 95% CI on b)`.
fn ols(x: &[f64], y: &[f64]) -> (f64, f64, (f64, f64)) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let ci = if x.len() > 2 {
        let sse: f64 = x.iter().zip(y).map(|(u, v)| (v - a - b * u).powi(2)).sum();
        let se = (sse / (n - 2.0) / sxx).sqrt();
        let t = StudentsT::new(0.0, 1.0, n - 2.0)
            .map(|d| d.inverse_cdf(0.975))
            .unwrap_or(f64::NAN);
        (b - t * se, b + t * se)
    } else {
        (f64::NAN, f64::NAN)
    };
    (b, a, ci)
}

pub fn beta_shift_sweep(x: &DataMatrix, params: &ShiftParams) -> Result<ShiftTable> {
    if params.factors.is_empty() || params.trials == 0 {
        return invalid("noise sweep needs at least one factor and one trial");
    }
    if params.factors.windows(2).any(|w| w[0] >= w[1]) || params.factors[0] < 0.0 {
        return invalid("noise factors must be non-negative and strictly ascending");
    }
    let (g0, scales) = params.graph.build(x)?;
    let base = find_beta_n(&g0, &params.search)?;
    let n_edges = g0.n_edges();

    let cells: Vec<(usize, usize)> = (0..params.factors.len())
        .flat_map(|f| (0..params.trials).map(move |t| (f, t)))
        .collect();
    let rows = cells
        .par_iter()
        .map(|&(fi, trial)| -> Result<ShiftRow> {
            let factor = params.factors[fi];
            let spec = NoiseSpec {
                base_scales: scales.sigma.clone(),
                factor,
                seed: derive_seed(params.seed, (fi * params.trials + trial) as u64),
            };
            let xp = perturb(x, &spec)?;
            let gp = weight_graph_on_backbone(&xp, &g0, &scales)?;
            let epsilon = weight_epsilon(&g0, &gp)?;
            let (shift, flag) = match find_beta_n(&gp, &params.search) {
                Ok(r) => (Some((r.beta_n - base.beta_n).abs()), None),
                Err(e @ (NbseError::NoTransition { .. } | NbseError::NonConvergence { .. })) => {
                    (None, Some(e.to_string()))
                }
                Err(e) => return Err(e),
            };
            Ok(ShiftRow {
                factor,
                trial,
                epsilon,
                shift,
                flag,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let medians: Vec<(f64, Option<f64>)> = params
        .factors
        .iter()
        .map(|&f| {
            let mut s: Vec<f64> = rows.iter().filter(|r| r.factor == f).filter_map(|r| r.shift).collect();
            (f, median(&mut s))
        })
        .collect();
    let (lx, ly): (Vec<f64>, Vec<f64>) = medians
        .iter()
        .filter_map(|&(f, m)| match m {
            Some(m) if f > 0.0 && m > 0.0 => Some((f.ln(), m.ln())),
            _ => None,
        })
        .unzip();
    let (slope, intercept, slope_ci) = if lx.len() >= 2 {
        ols(&lx, &ly)
    } else {
        (f64::NAN, f64::NAN, (f64::NAN, f64::NAN))
    };

    let f_min = params.factors[0];
    let root_e = (n_edges as f64).sqrt();
    let ratio = |r: &ShiftRow| -> Option<f64> {
        let s = r.shift?;
        (r.epsilon > 0.0).then(|| s * base.g.abs() / (r.epsilon * root_e))
    };
    let c1 = rows
        .iter()
        .filter(|r| r.factor == f_min)
        .filter_map(ratio)
        .fold(0.0, f64::max);
    let small: Vec<&ShiftRow> = rows
        .iter()
        .filter(|r| r.factor <= params.small_factor_ratio * f_min && r.shift.is_some())
        .collect();
    let bound_violations = small
        .iter()
        .filter(|r| {
            let bound = params.bound_slack * c1 * r.epsilon * root_e / base.g.abs();
            r.shift.unwrap() > bound
        })
        .count();

    Ok(ShiftTable {
        beta_n: base.beta_n,
        g: base.g,
        n_edges,
        medians,
        fit: ShiftFit {
            slope,
            intercept,
            slope_ci,
            n_points: lx.len(),
            n_failed: rows.iter().filter(|r| r.shift.is_none()).count(),
            c1,
            n_small_factor: small.len(),
            bound_violations,
        },
        rows,
    })
}
