use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{
    accuracy, anova_f_scores, random_select, top_n_select, train_linear_classifier,
    ClassifierParams, LabeledDataset,
};
use crate::ablation::select_features;
use crate::error::{invalid, Result};
use crate::fmt_f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Nbse,
    Anova,
    Random,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Self::Nbse => "nbse",
            Self::Anova => "anova",
            Self::Random => "random",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = crate::NbseError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nbse" => Ok(Self::Nbse),
            "anova" => Ok(Self::Anova),
            "random" => Ok(Self::Random),
            other => invalid(format!("unknown method '{other}' (nbse|anova|random)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub methods: Vec<Method>,
    /// Retained proportions, each in (0, 1].
    pub proportions: Vec<f64>,
    pub seeds: Vec<u64>,
    pub test_fraction: f64,
    pub classifier: ClassifierParams,
    /// φ_min for the NBSE selector; required when `Method::Nbse` is listed.
    pub phi: Option<Vec<f64>>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            methods: vec![Method::Nbse, Method::Anova, Method::Random],
            proportions: (3..=10).rev().map(|k| k as f64 / 10.0).collect(),
            seeds: (0..5).collect(),
            test_fraction: 0.2,
            classifier: ClassifierParams::default(),
            phi: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub method: Method,
    pub p: f64,
    pub seed: u64,
    pub n: usize,
    pub selected: Vec<usize>,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub method: Method,
    pub p: f64,
    pub mean: f64,
    /// Sample standard deviation over seeds (0 for a single seed).
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RetentionCurve {
    pub records: Vec<SweepRecord>,
    pub points: Vec<CurvePoint>,
}

impl RetentionCurve {
    pub fn point(&self, method: Method, p: f64) -> Option<&CurvePoint> {
        self.points.iter().find(|c| c.method == method && c.p == p)
    }

    /// `method,p,seed,accuracy`
    pub fn write_records_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "method,p,seed,accuracy")?;
        for r in &self.records {
            writeln!(out, "{},{},{},{}", r.method.name(), fmt_f64(r.p), r.seed, fmt_f64(r.accuracy))?;
        }
        Ok(())
    }

    /// `method,p,mean,std`
    pub fn write_summary_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "method,p,mean,std")?;
        for c in &self.points {
            writeln!(out, "{},{},{},{}", c.method.name(), fmt_f64(c.p), fmt_f64(c.mean), fmt_f64(c.std))?;
        }
        Ok(())
    }
}

/// SplitMix64-style mixing of a base seed with a stream index.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Per-class shuffle, `round(test_fraction·n_c)` of each class held out.
/// Returns sorted `(train, test)` row indices.
pub fn stratified_split(
    y: &[usize],
    n_classes: usize,
    test_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(0.0 < test_fraction && test_fraction < 1.0) {
        return invalid(format!("test fraction {test_fraction} outside (0, 1)"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for c in 0..n_classes {
        let mut idx: Vec<usize> = (0..y.len()).filter(|&i| y[i] == c).collect();
        idx.shuffle(&mut rng);
        let k = (test_fraction * idx.len() as f64).round() as usize;
        test.extend_from_slice(&idx[..k]);
        train.extend_from_slice(&idx[k..]);
    }
    if train.is_empty() || test.is_empty() {
        return invalid("split left an empty train or test set");
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// `round(p·D)`, at least 1.
pub fn target_count(p: f64, d: usize) -> usize {
    ((p * d as f64).round() as usize).clamp(1, d)
}

fn run_cell(
    data: &LabeledDataset,
    cfg: &SweepConfig,
    method: Method,
    p: f64,
    seed: u64,
) -> Result<SweepRecord> {
    let d = data.x.cols();
    let n = target_count(p, d);
    let (train_rows, test_rows) = stratified_split(&data.y, data.n_classes, cfg.test_fraction, seed)?;
    let train = data.subset(&train_rows)?;
    let test = data.subset(&test_rows)?;
    let selected = match method {
        Method::Nbse => {
            let phi = cfg
                .phi
                .as_ref()
                .ok_or_else(|| crate::NbseError::InvalidInput("nbse method needs φ".into()))?;
            select_features(phi, n)?.indices
        }
        Method::Anova => top_n_select(&anova_f_scores(&train)?, n),
        Method::Random => random_select(d, n, derive_seed(seed, n as u64)),
    };
    let train_x = train.x.select_columns(&selected)?;
    let model = train_linear_classifier(
        &LabeledDataset::new(train_x, train.y.clone(), data.n_classes)?,
        &cfg.classifier,
    )?;
    let pred = model.predict(&test.x.select_columns(&selected)?)?;
    Ok(SweepRecord {
        method,
        p,
        seed,
        n,
        selected,
        accuracy: accuracy(&pred, &test.y),
    })
}

/// Held-out accuracy for every (method, p, seed) cell plus mean and std.
///
/// The split depends only on the seed, so at `p = 1` every method trains
/// on the same rows and the same full feature set.
pub fn retention_sweep(data: &LabeledDataset, cfg: &SweepConfig) -> Result<RetentionCurve> {
    if let Some(&p) = cfg.proportions.iter().find(|&&p| !(p > 0.0 && p <= 1.0)) {
        return invalid(format!("proportion {p} outside (0, 1]"));
    }
    if cfg.seeds.is_empty() {
        return invalid("retention sweep needs at least one seed");
    }
    if let Some(phi) = &cfg.phi {
        if phi.len() != data.x.cols() {
            return Err(crate::NbseError::DimensionMismatch {
                expected: data.x.cols(),
                actual: phi.len(),
            });
        }
    }
    let cells: Vec<(Method, f64, u64)> = cfg
        .methods
        .iter()
        .flat_map(|&m| {
            cfg.proportions
                .iter()
                .flat_map(move |&p| cfg.seeds.iter().map(move |&s| (m, p, s)))
        })
        .collect();
    let records = cells
        .par_iter()
        .map(|&(m, p, s)| run_cell(data, cfg, m, p, s))
        .collect::<Result<Vec<_>>>()?;

    let mut points = Vec::new();
    for &m in &cfg.methods {
        for &p in &cfg.proportions {
            let acc: Vec<f64> = records
                .iter()
                .filter(|r| r.method == m && r.p == p)
                .map(|r| r.accuracy)
                .collect();
            let k = acc.len() as f64;
            let mean = acc.iter().sum::<f64>() / k;
            let std = if acc.len() > 1 {
                (acc.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
            } else {
                0.0
            };
            points.push(CurvePoint { method: m, p, mean, std });
        }
    }
    Ok(RetentionCurve { records, points })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_is_stratified_and_seeded() {
        let y: Vec<usize> = (0..50).map(|i| i % 2).collect();
        let (tr, te) = stratified_split(&y, 2, 0.2, 4).unwrap();
        assert_eq!(te.len(), 10);
        assert_eq!(tr.len(), 40);
        assert_eq!(te.iter().filter(|&&i| y[i] == 0).count(), 5);
        assert_eq!(stratified_split(&y, 2, 0.2, 4).unwrap().1, te);
        assert_ne!(stratified_split(&y, 2, 0.2, 5).unwrap().1, te);
        assert!(stratified_split(&y, 2, 1.0, 4).is_err());
    }

    #[test]
    fn derived_seeds_differ() {
        assert_ne!(derive_seed(1, 0), derive_seed(1, 1));
        assert_ne!(derive_seed(1, 0), derive_seed(2, 0));
        assert_eq!(derive_seed(7, 3), derive_seed(7, 3));
    }

    #[test]
    fn target_counts() {
        assert_eq!(target_count(0.3, 60), 18);
        assert_eq!(target_count(1.0, 60), 60);
        assert_eq!(target_count(0.01, 10), 1);
        assert_eq!(target_count(0.25, 2), 1);
    }
}
