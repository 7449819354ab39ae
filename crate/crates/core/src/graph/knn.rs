use rayon::prelude::*;

use super::{Edge, SimilarityGraph};
use crate::data::DataMatrix;
use crate::error::{invalid, NbseError, Result};

/// Lower clamp on local scales, in data distance units.
pub const SIGMA_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct LocalScales {
    pub sigma: Vec<f64>,
    pub k: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Symmetrize {
    /// Edge if either endpoint lists the other.
    #[default]
    Union,
    /// Edge only if both endpoints list each other.
    Mutual,
}

impl std::str::FromStr for Symmetrize {
    type Err = NbseError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "union" => Ok(Self::Union),
            "mutual" => Ok(Self::Mutual),
            other => invalid(format!("unknown symmetrization '{other}' (union|mutual)")),
        }
    }
}

/// Parameters shared by every object-graph construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphParams {
    /// Neighbours averaged for the local scale σ_i.
    pub k_scale: usize,
    /// Neighbours per node in the k-NN edge set.
    pub k_graph: usize,
    pub symmetrize: Symmetrize,
}

impl Default for GraphParams {
    fn default() -> Self {
        Self {
            k_scale: 10,
            k_graph: 12,
            symmetrize: Symmetrize::Union,
        }
    }
}

impl GraphParams {
    /// Clamp both neighbour counts to `n_objects − 1`.
    pub fn clamped(&self, n_objects: usize) -> Self {
        let cap = n_objects.saturating_sub(1).max(1);
        Self {
            k_scale: self.k_scale.min(cap),
            k_graph: self.k_graph.min(cap),
            symmetrize: self.symmetrize,
        }
    }

    pub fn build(&self, x: &DataMatrix) -> Result<(SimilarityGraph, LocalScales)> {
        let p = self.clamped(x.rows());
        let scales = local_scales(x, p.k_scale)?;
        let graph = build_knn_graph(x, p.k_graph, &scales, p.symmetrize)?;
        Ok((graph, scales))
    }
}

/// The `k` nearest other rows of row `i`, ordered by distance then index.
fn nearest(x: &DataMatrix, i: usize, k: usize) -> Vec<(f64, usize)> {
    let mut d: Vec<(f64, usize)> = (0..x.rows())
        .filter(|&j| j != i)
        .map(|j| (x.squared_distance(i, j), j))
        .collect();
    let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < d.len() {
        d.select_nth_unstable_by(k - 1, cmp);
        d.truncate(k);
    }
    d.sort_by(cmp);
    d
}

/// σ_i = mean Euclidean distance from row `i` to its `k` nearest other rows.
pub fn local_scales(x: &DataMatrix, k: usize) -> Result<LocalScales> {
    let m = x.rows();
    if k < 1 || k > m - 1 {
        return invalid(format!("k = {k} outside [1, {}]", m - 1));
    }
    let sigma = (0..m)
        .into_par_iter()
        .map(|i| {
            let nb = nearest(x, i, k);
            let mean = nb.iter().map(|&(d2, _)| d2.sqrt()).sum::<f64>() / k as f64;
            mean.max(SIGMA_FLOOR)
        })
        .collect();
    Ok(LocalScales { sigma, k })
}

/// Adaptive Gaussian kernel `exp(−d² / (σ_i σ_j))`.
pub fn gaussian_weight(d2: f64, sigma_i: f64, sigma_j: f64) -> Result<f64> {
    if !(sigma_i > 0.0 && sigma_j > 0.0) {
        return invalid(format!(
            "kernel scales must be positive, got {sigma_i} and {sigma_j}"
        ));
    }
    if !(d2 >= 0.0) {
        return invalid(format!("squared distance must be nonnegative, got {d2}"));
    }
    Ok((-d2 / (sigma_i * sigma_j)).exp())
}

// Far pairs can underflow to 0; keep the edge with the smallest positive weight.
fn kernel_edge(x: &DataMatrix, scales: &LocalScales, i: usize, j: usize) -> Result<f64> {
    let w = gaussian_weight(x.squared_distance(i, j), scales.sigma[i], scales.sigma[j])?;
    Ok(w.max(f64::MIN_POSITIVE))
}

fn check_scales(x: &DataMatrix, scales: &LocalScales) -> Result<()> {
    if scales.sigma.len() != x.rows() {
        return Err(NbseError::DimensionMismatch {
            expected: x.rows(),
            actual: scales.sigma.len(),
        });
    }
    Ok(())
}

/// Symmetrized k-NN graph weighted by the adaptive kernel.
pub fn build_knn_graph(
    x: &DataMatrix,
    k_graph: usize,
    scales: &LocalScales,
    symmetrize: Symmetrize,
) -> Result<SimilarityGraph> {
    let m = x.rows();
    if k_graph < 1 || k_graph > m - 1 {
        return invalid(format!("k_graph = {k_graph} outside [1, {}]", m - 1));
    }
    check_scales(x, scales)?;
    let lists: Vec<Vec<usize>> = (0..m)
        .into_par_iter()
        .map(|i| nearest(x, i, k_graph).into_iter().map(|(_, j)| j).collect())
        .collect();

    let mut pairs = Vec::new();
    for (i, list) in lists.iter().enumerate() {
        for &j in list {
            let (a, b) = (i.min(j), i.max(j));
            let reciprocal = lists[j].contains(&i);
            match symmetrize {
                // each reciprocal pair is seen twice; keep it once
                Symmetrize::Union if reciprocal && i > j => {}
                Symmetrize::Union => pairs.push((a, b)),
                Symmetrize::Mutual if reciprocal && i < j => pairs.push((a, b)),
                Symmetrize::Mutual => {}
            }
        }
    }
    let edges = pairs
        .into_iter()
        .map(|(i, j)| {
            Ok(Edge {
                i,
                j,
                weight: kernel_edge(x, scales, i, j)?,
                edge_type: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let g = SimilarityGraph::new(m, edges)?;
    let comps = g.n_components();
    if comps > 1 {
        log::warn!("k-NN graph on {m} nodes has {comps} connected components");
    }
    Ok(g)
}

/// Reweight a fixed edge set with the adaptive kernel on `x`.
pub fn weight_graph_on_backbone(
    x: &DataMatrix,
    backbone: &SimilarityGraph,
    scales: &LocalScales,
) -> Result<SimilarityGraph> {
    if backbone.n_nodes() != x.rows() {
        return Err(NbseError::DimensionMismatch {
            expected: x.rows(),
            actual: backbone.n_nodes(),
        });
    }
    check_scales(x, scales)?;
    let mut err = None;
    let g = backbone.map_weights(|e| match kernel_edge(x, scales, e.i, e.j) {
        Ok(w) => w,
        Err(e) => {
            err.get_or_insert(e);
            1.0
        }
    })?;
    match err {
        Some(e) => Err(e),
        None => Ok(g),
    }
}
