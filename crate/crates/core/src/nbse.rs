//! Univariate embeddings (the fingerprint Ψ) and the transposed
//! feature-axis embedding φ_min.

use std::io::Write;

use rayon::prelude::*;

use crate::bethe_hessian::{assemble_bethe_hessian, smallest_eigenpair_of, EigenOptions};
use crate::data::DataMatrix;
use crate::error::{invalid, Result};
use crate::fmt_f64;
use crate::graph::{GraphParams, GraphStats, SimilarityGraph, Symmetrize};
use crate::nishimori::{find_beta_n, NishimoriResult, SearchParams};

/// k-NN graph on the M objects using only feature `l`.
pub fn univariate_graph(x: &DataMatrix, l: usize, params: &GraphParams) -> Result<SimilarityGraph> {
    if l >= x.cols() {
        return invalid(format!("feature index {l} out of range for D = {}", x.cols()));
    }
    Ok(params.build(&x.column_matrix(l)?)?.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FingerprintMode {
    /// One β_N from the object graph on all features, shared by every column.
    #[default]
    Global,
    /// A separate β_N per univariate graph.
    PerFeature,
}

impl std::str::FromStr for FingerprintMode {
    type Err = crate::NbseError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "global" => Ok(Self::Global),
            "per_feature" => Ok(Self::PerFeature),
            other => invalid(format!("unknown fingerprint mode '{other}' (global|per_feature)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FingerprintParams {
    pub graph: GraphParams,
    pub search: SearchParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFingerprint {
    pub mode: FingerprintMode,
    /// Column `l` of Ψ, length M; all zeros when the slice failed.
    pub columns: Vec<Vec<f64>>,
    /// β used for each column.
    pub betas: Vec<Option<f64>>,
    /// Smallest eigenvalue at the β used.
    pub lambdas: Vec<Option<f64>>,
    /// Eigen residual `‖Hψ − λψ‖₂`.
    pub residuals: Vec<Option<f64>>,
    pub flags: Vec<Option<String>>,
    /// Root on the aggregate object graph, global mode only.
    pub global: Option<NishimoriResult>,
}

impl SpectralFingerprint {
    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    pub fn n_objects(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn n_flagged(&self) -> usize {
        self.flags.iter().filter(|f| f.is_some()).count()
    }

    /// Ψ as an M×D matrix.
    pub fn to_matrix(&self) -> Result<DataMatrix> {
        DataMatrix::from_columns(&self.columns)
    }

    /// CSV with a header row of feature indices, one row per object.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let header: Vec<String> = (0..self.n_features()).map(|l| l.to_string()).collect();
        writeln!(out, "{}", header.join(","))?;
        for i in 0..self.n_objects() {
            let row: Vec<String> = self.columns.iter().map(|c| fmt_f64(c[i])).collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

struct Column {
    psi: Vec<f64>,
    beta: Option<f64>,
    lambda: Option<f64>,
    residual: Option<f64>,
    flag: Option<String>,
}

fn column_at(g: &SimilarityGraph, beta: f64, opts: &EigenOptions) -> Result<Column> {
    let a = assemble_bethe_hessian(g, beta)?;
    let pair = smallest_eigenpair_of(&a.h, opts)?;
    Ok(Column {
        psi: pair.psi,
        beta: Some(beta),
        lambda: Some(pair.lambda),
        residual: Some(pair.residual),
        flag: None,
    })
}

fn slice_column(
    x: &DataMatrix,
    l: usize,
    global_beta: Option<f64>,
    params: &FingerprintParams,
) -> Column {
    let run = || -> Result<Column> {
        let g = univariate_graph(x, l, &params.graph)?;
        let beta = match global_beta {
            Some(b) => b,
            None => find_beta_n(&g, &params.search)?.beta_n,
        };
        column_at(&g, beta, &params.search.eigen)
    };
    run().unwrap_or_else(|e| {
        log::warn!("feature {l}: {e}; using a zero fingerprint column");
        Column {
            psi: vec![0.0; x.rows()],
            beta: None,
            lambda: None,
            residual: None,
            flag: Some(e.to_string()),
        }
    })
}

/// β_N of the k-NN object graph built on every feature.
pub fn global_beta_n(x: &DataMatrix, params: &FingerprintParams) -> Result<NishimoriResult> {
    let (g, _) = params.graph.build(x)?;
    find_beta_n(&g, &params.search)
}

pub fn fingerprint(
    x: &DataMatrix,
    mode: FingerprintMode,
    params: &FingerprintParams,
) -> Result<SpectralFingerprint> {
    let global = match mode {
        FingerprintMode::Global => Some(global_beta_n(x, params)?),
        FingerprintMode::PerFeature => None,
    };
    Ok(assemble_fingerprint(x, mode, global, params))
}

/// Global-mode fingerprint reusing a root found elsewhere, e.g. on a
/// non-k-NN object graph.
pub fn fingerprint_at(
    x: &DataMatrix,
    global: NishimoriResult,
    params: &FingerprintParams,
) -> SpectralFingerprint {
    assemble_fingerprint(x, FingerprintMode::Global, Some(global), params)
}

fn assemble_fingerprint(
    x: &DataMatrix,
    mode: FingerprintMode,
    global: Option<NishimoriResult>,
    params: &FingerprintParams,
) -> SpectralFingerprint {
    let beta = global.as_ref().map(|r| r.beta_n);
    let cols: Vec<Column> = (0..x.cols())
        .into_par_iter()
        .map(|l| slice_column(x, l, beta, params))
        .collect();
    let mut fp = SpectralFingerprint {
        mode,
        columns: Vec::with_capacity(cols.len()),
        betas: Vec::with_capacity(cols.len()),
        lambdas: Vec::with_capacity(cols.len()),
        residuals: Vec::with_capacity(cols.len()),
        flags: Vec::with_capacity(cols.len()),
        global,
    };
    for c in cols {
        fp.columns.push(c.psi);
        fp.betas.push(c.beta);
        fp.lambdas.push(c.lambda);
        fp.residuals.push(c.residual);
        fp.flags.push(c.flag);
    }
    fp
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureParams {
    /// Neighbours in the feature graph; `None` means `min(10, D − 1)`.
    pub k_feat: Option<usize>,
    /// Standardize columns of X before transposing.
    pub standardize: bool,
    pub search: SearchParams,
}

impl Default for FeatureParams {
    fn default() -> Self {
        Self {
            k_feat: None,
            standardize: true,
            search: SearchParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureEmbedding {
    /// φ_min, one entry per feature.
    pub phi: Vec<f64>,
    pub beta_n: f64,
    pub root: NishimoriResult,
    /// Eigen residual of φ at β_N.
    pub residual: f64,
    pub affinity_stats: GraphStats,
    pub graph: SimilarityGraph,
}

impl FeatureEmbedding {
    /// CSV with a header row of feature indices and a single row of φ.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let header: Vec<String> = (0..self.phi.len()).map(|l| l.to_string()).collect();
        let row: Vec<String> = self.phi.iter().map(|&v| fmt_f64(v)).collect();
        writeln!(out, "{}\n{}", header.join(","), row.join(","))?;
        Ok(())
    }
}

/// Embed the rows of `z` (one row per feature) by the smallest Bethe–Hessian
/// eigenvector of their k-NN affinity graph at its β_N.
pub fn embed_feature_rows(
    z: &DataMatrix,
    k_feat: Option<usize>,
    search: &SearchParams,
) -> Result<FeatureEmbedding> {
    let d = z.rows();
    let k = k_feat.unwrap_or(10).min(d - 1);
    if k == 0 {
        return invalid("k_feat must be at least 1");
    }
    let params = GraphParams {
        k_scale: k,
        k_graph: k,
        symmetrize: Symmetrize::Union,
    };
    let (graph, _) = params.build(z)?;
    let root = find_beta_n(&graph, search)?;
    let a = assemble_bethe_hessian(&graph, root.beta_n)?;
    let pair = smallest_eigenpair_of(&a.h, &search.eigen)?;
    Ok(FeatureEmbedding {
        phi: pair.psi,
        beta_n: root.beta_n,
        root,
        residual: pair.residual,
        affinity_stats: graph.stats(),
        graph,
    })
}

/// φ_min of the feature graph built on `Xᵀ`.
pub fn feature_axis_embedding(x: &DataMatrix, params: &FeatureParams) -> Result<FeatureEmbedding> {
    if x.cols() < 2 {
        return invalid(format!("feature embedding needs D >= 2, got {}", x.cols()));
    }
    let z = if params.standardize {
        x.standardized().transpose()
    } else {
        x.transpose()
    };
    embed_feature_rows(&z, params.k_feat, &params.search)
}

/// φ_min computed from the fingerprint columns instead of raw features.
pub fn feature_axis_embedding_from_fingerprint(
    fp: &SpectralFingerprint,
    params: &FeatureParams,
) -> Result<FeatureEmbedding> {
    if fp.n_features() < 2 {
        return invalid(format!("feature embedding needs D >= 2, got {}", fp.n_features()));
    }
    let z = DataMatrix::from_rows(&fp.columns)?;
    embed_feature_rows(&z, params.k_feat, &params.search)
}
