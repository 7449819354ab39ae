//! Locating `β_N`, the smallest β where `λ_min(H(β))` crosses zero.
//!
//! `H(0) = I`, so `λ_min` starts at 1. A geometric scan brackets the first
//! sign change and a Brent iteration refines it. Nothing here assumes
//! monotonicity of `λ_min(β)`; only the bracketed sign change is used.

use std::io::Write;

use rayon::prelude::*;

use crate::bethe_hessian::{assemble_bethe_hessian, smallest_eigenvalue_of, EigenOptions, SINH_GUARD};
use crate::data::DataMatrix;
use crate::error::{invalid, NbseError, Result};
use crate::fmt_f64;
use crate::graph::{GraphParams, SimilarityGraph};
use crate::nbse::univariate_graph;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchParams {
    /// Upper end of the bracket scan; `None` means `20 / median(W)`.
    pub beta_max: Option<f64>,
    pub n_scan: usize,
    pub tol_beta: f64,
    pub tol_lambda: f64,
    pub max_iter: usize,
    pub eigen: EigenOptions,
}

impl Default for SearchParams {
    fn default() -> Self {
        Self {
            beta_max: None,
            n_scan: 40,
            tol_beta: 1e-6,
            tol_lambda: 1e-8,
            max_iter: 200,
            eigen: EigenOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BetaCurve {
    pub betas: Vec<f64>,
    pub lambdas: Vec<f64>,
}

impl BetaCurve {
    /// CSV with header `beta,lambda_min`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "beta,lambda_min")?;
        for (b, l) in self.betas.iter().zip(&self.lambdas) {
            writeln!(out, "{},{}", fmt_f64(*b), fmt_f64(*l))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NishimoriResult {
    pub beta_n: f64,
    /// Sign-change interval that contained the final iterate.
    pub bracket: (f64, f64),
    /// `|λ_min(H(β_N))|`.
    pub residual: f64,
    /// Central-difference estimate of `dλ_min/dβ` at `β_N`.
    pub g: f64,
    pub iterations: usize,
    /// Every bracket held during refinement, outermost first.
    pub brackets: Vec<(f64, f64)>,
}

pub fn lambda_min_with(g: &SimilarityGraph, beta: f64, opts: &EigenOptions) -> Result<f64> {
    let a = assemble_bethe_hessian(g, beta)?;
    smallest_eigenvalue_of(&a.h, opts)
}

/// `λ_min(H(β))` with default solver settings.
pub fn lambda_min_at(g: &SimilarityGraph, beta: f64) -> Result<f64> {
    lambda_min_with(g, beta, &EigenOptions::default())
}

pub fn beta_curve(g: &SimilarityGraph, betas: &[f64]) -> Result<BetaCurve> {
    if betas.windows(2).any(|w| w[0] >= w[1]) {
        return invalid("β grid must be strictly ascending");
    }
    let lambdas = betas
        .iter()
        .map(|&b| lambda_min_at(g, b))
        .collect::<Result<Vec<_>>>()?;
    Ok(BetaCurve {
        betas: betas.to_vec(),
        lambdas,
    })
}

/// `20 / median(W)`; errors on an edgeless graph.
pub fn default_beta_max(g: &SimilarityGraph) -> Result<f64> {
    match g.median_weight() {
        Some(m) => Ok(20.0 / m),
        None => Err(NbseError::NoTransition { beta_max: 0.0 }),
    }
}

/// Gershgorin lower bound on `λ_min(H(β))`:
/// `1 − max_i Σ_j (1 − e^{−2βW_ij})/2`.
fn gershgorin_floor(g: &SimilarityGraph, beta: f64) -> f64 {
    let worst = (0..g.n_nodes())
        .map(|i| {
            g.neighbors(i)
                .iter()
                .map(|&(_, w)| -0.5 * (-2.0 * beta * w).exp_m1())
                .sum::<f64>()
        })
        .fold(0.0, f64::max);
    1.0 - worst
}

fn scan_bracket(
    g: &SimilarityGraph,
    beta_max: f64,
    n_scan: usize,
    opts: &EigenOptions,
) -> Result<(f64, f64)> {
    if !(beta_max > 0.0 && beta_max.is_finite()) {
        return invalid(format!("beta_max must be positive, got {beta_max}"));
    }
    if n_scan < 2 {
        return invalid(format!("n_scan must be at least 2, got {n_scan}"));
    }
    let w_max = g.max_weight();
    let mut prev = 0.0;
    let mut scanned = 0.0;
    for k in 0..=n_scan {
        let beta = beta_max * 2f64.powi(k as i32 - n_scan as i32);
        if beta * w_max > SINH_GUARD {
            break;
        }
        scanned = beta;
        // a positive Gershgorin floor certifies λ_min > 0 without a solve
        let positive = gershgorin_floor(g, beta) > 0.0 || lambda_min_with(g, beta, opts)? > 0.0;
        if !positive {
            log::debug!("first sign change of λ_min in ({prev}, {beta}); later crossings ignored");
            return Ok((prev, beta));
        }
        prev = beta;
    }
    Err(NbseError::NoTransition {
        beta_max: scanned.max(prev),
    })
}

/// First sign-change interval of `λ_min` on the geometric grid
/// `beta_max·2^{k−n_scan}`, `k = 0..=n_scan`.
pub fn bracket_root(g: &SimilarityGraph, beta_max: f64, n_scan: usize) -> Result<(f64, f64)> {
    scan_bracket(g, beta_max, n_scan, &EigenOptions::default())
}

/// Bracketed Brent refinement of `f` on `[lo, hi]`, stopping once
/// `|f(β)| ≤ tol_f`. Returns `(β, f(β), iterations, brackets)`.
fn brent_root(
    mut f: impl FnMut(f64) -> Result<f64>,
    lo: f64,
    hi: f64,
    tol_f: f64,
    max_iter: usize,
) -> Result<(f64, f64, usize, Vec<(f64, f64)>)> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a)?, f(b)?);
    if fa.abs() <= tol_f {
        return Ok((a, fa, 0, vec![(lo, hi)]));
    }
    if (fa > 0.0) == (fb > 0.0) && fb != 0.0 {
        return invalid(format!("[{lo}, {hi}] does not bracket a sign change"));
    }
    let (mut c, mut fc) = (b, fb);
    let mut d = b - a;
    let mut e = d;
    let mut brackets = Vec::new();
    let mut best_residual = fb.abs().min(fa.abs());
    for iter in 0..=max_iter {
        if (fb > 0.0 && fc > 0.0) || (fb < 0.0 && fc < 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        best_residual = best_residual.min(fb.abs());
        if fb.abs() <= tol_f {
            return Ok((b, fb, iter, brackets));
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs();
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || iter == max_iter {
            break;
        }
        brackets.push((b.min(c), b.max(c)));
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            // inverse quadratic interpolation, or secant when a == c
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b)?;
    }
    Err(NbseError::NonConvergence {
        iterations: max_iter,
        residual: best_residual,
    })
}

pub fn find_beta_n(g: &SimilarityGraph, params: &SearchParams) -> Result<NishimoriResult> {
    let beta_max = match params.beta_max {
        Some(b) => b,
        None => default_beta_max(g)?,
    };
    let (lo, hi) = scan_bracket(g, beta_max, params.n_scan, &params.eigen)?;
    let lam = |beta: f64| lambda_min_with(g, beta, &params.eigen);
    let (beta_n, f_root, iterations, mut brackets) =
        brent_root(lam, lo, hi, params.tol_lambda, params.max_iter)?;
    brackets.insert(0, (lo, hi));
    brackets.dedup();
    let bracket = *brackets.last().expect("initial bracket");

    let h = params.tol_beta.max(1e-4);
    let slope = if beta_n > h {
        (lam(beta_n + h)? - lam(beta_n - h)?) / (2.0 * h)
    } else {
        (lam(beta_n + h)? - f_root) / h
    };
    Ok(NishimoriResult {
        beta_n,
        bracket,
        residual: f_root.abs(),
        g: slope,
        iterations,
        brackets,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRoot {
    pub feature: usize,
    pub result: Option<NishimoriResult>,
    /// Why no root was found for this slice.
    pub flag: Option<String>,
}

impl FeatureRoot {
    pub fn beta_n(&self) -> Option<f64> {
        self.result.as_ref().map(|r| r.beta_n)
    }
}

/// One `β_N` per feature column; failures are flagged per slice.
pub fn beta_n_per_feature(
    x: &DataMatrix,
    graph: &GraphParams,
    params: &SearchParams,
) -> Vec<FeatureRoot> {
    (0..x.cols())
        .into_par_iter()
        .map(|l| {
            let found = univariate_graph(x, l, graph).and_then(|g| find_beta_n(&g, params));
            match found {
                Ok(r) => FeatureRoot {
                    feature: l,
                    result: Some(r),
                    flag: None,
                },
                Err(e) => FeatureRoot {
                    feature: l,
                    result: None,
                    flag: Some(e.to_string()),
                },
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn single_edge() -> SimilarityGraph {
        SimilarityGraph::from_weighted_edges(2, &[(0, 1, 1.0)]).unwrap()
    }

    fn complete(n: usize, w: f64) -> SimilarityGraph {
        let mut e = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                e.push((i, j, w));
            }
        }
        SimilarityGraph::from_weighted_edges(n, &e).unwrap()
    }

    #[test]
    fn lambda_min_examples() {
        let g = single_edge();
        assert_eq!(lambda_min_at(&g, 0.0).unwrap(), 1.0);
        let want = 1.0 + 1f64.sinh().powi(2) - 0.5 * 2f64.sinh();
        assert_relative_eq!(lambda_min_at(&g, 1.0).unwrap(), want, epsilon = 1e-14);
        assert_relative_eq!(want, 0.567, epsilon = 1e-3);
    }

    #[test]
    fn single_edge_never_transitions() {
        // λ_min = cosh(β)e^{−β} > 1/2 for every β
        let g = single_edge();
        assert!(matches!(
            bracket_root(&g, 20.0, 40),
            Err(NbseError::NoTransition { .. })
        ));
    }

    #[test]
    fn empty_graph_has_no_transition() {
        let g = SimilarityGraph::from_weighted_edges(3, &[]).unwrap();
        assert!(matches!(
            find_beta_n(&g, &SearchParams::default()),
            Err(NbseError::NoTransition { .. })
        ));
        assert!(bracket_root(&g, 5.0, 10).is_err());
    }

    #[test]
    fn complete_graph_root_matches_closed_form() {
        // K_n with uniform weight w: the all-ones mode gives
        // λ = 1 − (n−1)(1 − e^{−2βw})/2, zero at e^{−2βw} = 1 − 2/(n−1)
        let (n, w) = (6, 0.5);
        let g = complete(n, w);
        let want = -(1.0 - 2.0 / (n as f64 - 1.0)).ln() / (2.0 * w);
        let r = find_beta_n(&g, &SearchParams::default()).unwrap();
        assert!(r.residual <= 1e-8);
        assert_relative_eq!(r.beta_n, want, max_relative = 1e-7);
        assert!(r.g < 0.0);
        assert!(r.bracket.0 < r.beta_n && r.beta_n < r.bracket.1);
        for &(lo, hi) in &r.brackets {
            assert!(lo <= r.beta_n && r.beta_n <= hi);
            let (flo, fhi) = (lambda_min_at(&g, lo).unwrap(), lambda_min_at(&g, hi).unwrap());
            assert!(flo * fhi <= 0.0, "bracket ({lo}, {hi}) lost its sign change");
        }
        // closed-form slope: −(n−1) w e^{−2βw}
        let slope = -(n as f64 - 1.0) * w * (-2.0 * want * w).exp();
        assert_relative_eq!(r.g, slope, max_relative = 1e-6);
    }

    #[test]
    fn gershgorin_floor_is_a_lower_bound() {
        let g = complete(5, 0.8);
        for beta in [0.01, 0.1, 0.3, 1.0] {
            assert!(gershgorin_floor(&g, beta) <= lambda_min_at(&g, beta).unwrap() + 1e-12);
        }
    }

    #[test]
    fn curve_starts_at_one_and_exports() {
        let g = complete(4, 1.0);
        let c = beta_curve(&g, &[0.0, 0.5, 1.0]).unwrap();
        assert_eq!(c.lambdas[0], 1.0);
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("beta,lambda_min\n0.0000000000000000e0,1.0000000000000000e0\n"));
        assert!(beta_curve(&g, &[0.5, 0.5]).is_err());
    }

    #[test]
    fn overflow_cap_stops_the_scan() {
        let g = single_edge();
        // every scan point above β = 350 would overflow; the scan stops there
        match bracket_root(&g, 1e6, 30) {
            Err(NbseError::NoTransition { beta_max }) => assert!(beta_max <= SINH_GUARD),
            other => panic!("unexpected {other:?}"),
        }
    }
}
