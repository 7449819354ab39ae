use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::data::DataMatrix;
use crate::error::{invalid, Result};
use crate::eval::LabeledDataset;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SyntheticKind {
    /// `n_classes` unit-variance Gaussian blobs in `R^d`; blob `c` is
    /// centred at `c·separation` along the first axis.
    SbmBlobs { d: usize, separation: f64 },
    /// `groups` latent features, each copied `copies` times with per-copy
    /// noise, plus `distractors` pure-noise columns. Each latent has class
    /// means drawn from `N(0, class_spread²)` and unit within-class noise.
    /// Columns are shuffled.
    RedundantGroups {
        groups: usize,
        copies: usize,
        distractors: usize,
        class_spread: f64,
        copy_noise: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub kind: SyntheticKind,
    pub m: usize,
    pub n_classes: usize,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn sbm_blobs(m: usize, d: usize, separation: f64, seed: u64) -> Self {
        Self {
            kind: SyntheticKind::SbmBlobs { d, separation },
            m,
            n_classes: 2,
            seed,
        }
    }

    pub fn redundant_groups(m: usize, groups: usize, distractors: usize, seed: u64) -> Self {
        Self {
            kind: SyntheticKind::RedundantGroups {
                groups,
                copies: 4,
                distractors,
                class_spread: 0.6,
                copy_noise: 0.3,
            },
            m,
            n_classes: 2,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    pub data: LabeledDataset,
    /// Planted group of each column; `None` for distractors and blob data.
    pub column_groups: Vec<Option<usize>>,
}

impl SyntheticData {
    /// Sidecar text: `labels,<y_0;y_1;…>` and `groups,<g_0;…>` with `-`
    /// marking columns outside every group.
    pub fn write_planted<W: Write>(&self, mut out: W) -> Result<()> {
        let y: Vec<String> = self.data.y.iter().map(|c| c.to_string()).collect();
        let g: Vec<String> = self
            .column_groups
            .iter()
            .map(|g| g.map_or("-".to_string(), |v| v.to_string()))
            .collect();
        writeln!(out, "labels,{}", y.join(";"))?;
        writeln!(out, "groups,{}", g.join(";"))?;
        Ok(())
    }

    /// Distinct planted groups hit by `columns`.
    pub fn groups_covered(&self, columns: &[usize]) -> usize {
        let mut hit: Vec<usize> = columns.iter().filter_map(|&c| self.column_groups[c]).collect();
        hit.sort_unstable();
        hit.dedup();
        hit.len()
    }
}

/// Labels `i mod C`, so classes differ in size by at most one.
fn balanced_labels(m: usize, c: usize) -> Vec<usize> {
    (0..m).map(|i| i % c).collect()
}

pub fn make_synthetic(spec: &SyntheticSpec) -> Result<SyntheticData> {
    let (m, c) = (spec.m, spec.n_classes);
    if m < 2 || c < 1 || c > m {
        return invalid(format!("need 2 <= M and 1 <= C <= M, got M = {m}, C = {c}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = |rng: &mut ChaCha8Rng| -> f64 { StandardNormal.sample(rng) };
    let y = balanced_labels(m, c);
    match spec.kind {
        SyntheticKind::SbmBlobs { d, separation } => {
            if d == 0 || !(separation >= 0.0) {
                return invalid("blobs need d >= 1 and separation >= 0");
            }
            let mut values = Vec::with_capacity(m * d);
            for &k in &y {
                for l in 0..d {
                    let centre = if l == 0 { k as f64 * separation } else { 0.0 };
                    values.push(centre + noise(&mut rng));
                }
            }
            Ok(SyntheticData {
                data: LabeledDataset::new(DataMatrix::new(m, d, values)?, y, c)?,
                column_groups: vec![None; d],
            })
        }
        SyntheticKind::RedundantGroups {
            groups,
            copies,
            distractors,
            class_spread,
            copy_noise,
        } => {
            if groups * copies + distractors == 0 {
                return invalid("redundant_groups needs at least one column");
            }
            if !(class_spread >= 0.0 && copy_noise >= 0.0) {
                return invalid("spread and copy noise must be non-negative");
            }
            let means = Normal::new(0.0, class_spread).expect("validated spread");
            let mut columns = Vec::new();
            let mut planted = Vec::new();
            for g in 0..groups {
                let mu: Vec<f64> = (0..c).map(|_| means.sample(&mut rng)).collect();
                let latent: Vec<f64> = y.iter().map(|&k| mu[k] + noise(&mut rng)).collect();
                for _ in 0..copies {
                    columns.push(
                        latent
                            .iter()
                            .map(|v| v + copy_noise * noise(&mut rng))
                            .collect::<Vec<_>>(),
                    );
                    planted.push(Some(g));
                }
            }
            for _ in 0..distractors {
                columns.push((0..m).map(|_| noise(&mut rng)).collect());
                planted.push(None);
            }
            let mut order: Vec<usize> = (0..columns.len()).collect();
            order.shuffle(&mut rng);
            let cols: Vec<Vec<f64>> = order.iter().map(|&k| columns[k].clone()).collect();
            let groups = order.iter().map(|&k| planted[k]).collect();
            Ok(SyntheticData {
                data: LabeledDataset::new(DataMatrix::from_columns(&cols)?, y, c)?,
                column_groups: groups,
            })
        }
    }
}
