use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::LabeledDataset;
use crate::error::{invalid, Result};

/// Within-class sums of squares below this fraction of the total count as zero.
const ZERO_SS: f64 = 1e-14;

/// One-way ANOVA F statistic per feature.
///
/// A constant feature scores 0; a feature with zero within-class spread but
/// distinct class means scores `+∞`.
pub fn anova_f_scores(data: &LabeledDataset) -> Result<Vec<f64>> {
    let counts = data.class_counts();
    let c = counts.len();
    let m = data.x.rows();
    if c < 2 {
        return invalid(format!("F test needs at least two classes, got {c}"));
    }
    if let Some(k) = counts.iter().position(|&n| n == 0) {
        return invalid(format!("class {k} has no samples"));
    }
    if m <= c {
        return invalid(format!("F test needs more samples ({m}) than classes ({c})"));
    }
    let df_between = (c - 1) as f64;
    let df_within = (m - c) as f64;
    let scores = (0..data.x.cols())
        .map(|l| {
            let col = data.x.column(l);
            let grand = col.iter().sum::<f64>() / m as f64;
            let mut sums = vec![0.0; c];
            for (v, &k) in col.iter().zip(&data.y) {
                sums[k] += v;
            }
            let means: Vec<f64> = sums.iter().zip(&counts).map(|(s, &n)| s / n as f64).collect();
            let ss_between: f64 = means
                .iter()
                .zip(&counts)
                .map(|(mu, &n)| n as f64 * (mu - grand).powi(2))
                .sum();
            let ss_within: f64 = col
                .iter()
                .zip(&data.y)
                .map(|(v, &k)| (v - means[k]).powi(2))
                .sum();
            let ss_total: f64 = col.iter().map(|v| (v - grand).powi(2)).sum();
            if ss_total == 0.0 {
                0.0
            } else if ss_within <= ZERO_SS * ss_total {
                f64::INFINITY
            } else {
                (ss_between / df_between) / (ss_within / df_within)
            }
        })
        .collect();
    Ok(scores)
}

/// The `n` highest scores (ties: lowest index), returned in ascending index order.
pub fn top_n_select(scores: &[f64], n: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order.truncate(n);
    order.sort_unstable();
    order
}

/// Uniform sample of `min(n, d)` indices without replacement, sorted.
pub fn random_select(d: usize, n: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = rand::seq::index::sample(&mut rng, d, n.min(d)).into_vec();
    idx.sort_unstable();
    idx
}
