//! Baseline selectors, a linear classifier, and the retention sweep.

mod anova;
mod classifier;
mod sweep;

pub use anova::{anova_f_scores, random_select, top_n_select};
pub use classifier::{
    accuracy, loss_and_grad, train_linear_classifier, ClassifierParams, LinearModel,
};
pub use sweep::{
    derive_seed, retention_sweep, stratified_split, target_count, CurvePoint, Method, RetentionCurve,
    SweepConfig, SweepRecord,
};

use crate::data::DataMatrix;
use crate::error::{invalid, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub x: DataMatrix,
    pub y: Vec<usize>,
    pub n_classes: usize,
}

impl LabeledDataset {
    pub fn new(x: DataMatrix, y: Vec<usize>, n_classes: usize) -> Result<Self> {
        if y.len() != x.rows() {
            return invalid(format!("{} labels for {} rows", y.len(), x.rows()));
        }
        if let Some(&bad) = y.iter().find(|&&c| c >= n_classes) {
            return invalid(format!("label {bad} outside 0..{n_classes}"));
        }
        Ok(Self { x, y, n_classes })
    }

    /// Infer the class count as `max(y) + 1`.
    pub fn from_labels(x: DataMatrix, y: Vec<usize>) -> Result<Self> {
        let c = y.iter().max().map_or(0, |m| m + 1);
        Self::new(x, y, c)
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut n = vec![0; self.n_classes];
        for &c in &self.y {
            n[c] += 1;
        }
        n
    }

    pub fn subset(&self, rows: &[usize]) -> Result<Self> {
        let x = self.x.select_rows(rows)?;
        let y = rows.iter().map(|&i| self.y[i]).collect();
        Ok(Self {
            x,
            y,
            n_classes: self.n_classes,
        })
    }
}
