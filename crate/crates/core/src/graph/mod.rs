//! Similarity graphs on data objects.
//!
//! Two constructions share one graph type: the adaptive-kernel k-NN graph
//! and the quasi-cyclic (QC-LDPC style) backbone, which is built without
//! data and then weighted by the same kernel.

mod girth;
mod heat;
mod io;
mod knn;
mod qc;

pub use girth::girth;
pub use heat::{heat_kernel_apply, HEAT_KERNEL_CAP};
pub use io::{read_edge_list, write_edge_list};
pub use knn::{
    build_knn_graph, gaussian_weight, local_scales, weight_graph_on_backbone, GraphParams,
    LocalScales, Symmetrize, SIGMA_FLOOR,
};
pub use qc::{build_qc_backbone, LiftedArc, Protograph, QcBackbone};

use crate::error::{invalid, Result};
use crate::sparse::SymCsr;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub weight: f64,
    pub edge_type: Option<u32>,
}

/// Undirected weighted simple graph.
///
/// Edges are stored once with `i < j`, sorted; the adjacency view holds both
/// directions with the same `f64`, so symmetry is exact.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityGraph {
    n_nodes: usize,
    edges: Vec<Edge>,
    indptr: Vec<usize>,
    adjacency: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphStats {
    pub n_nodes: usize,
    pub n_edges: usize,
    pub avg_degree: f64,
    pub n_components: usize,
    pub min_weight: f64,
    pub max_weight: f64,
}

impl SimilarityGraph {
    pub fn new(n_nodes: usize, mut edges: Vec<Edge>) -> Result<Self> {
        for e in &mut edges {
            if e.i == e.j {
                return invalid(format!("self-loop at node {}", e.i));
            }
            if e.i > e.j {
                std::mem::swap(&mut e.i, &mut e.j);
            }
            if e.j >= n_nodes {
                return invalid(format!("edge ({}, {}) outside {n_nodes} nodes", e.i, e.j));
            }
            if !(e.weight.is_finite() && e.weight > 0.0) {
                return invalid(format!(
                    "edge ({}, {}) has non-positive or non-finite weight {}",
                    e.i, e.j, e.weight
                ));
            }
        }
        edges.sort_by_key(|e| (e.i, e.j));
        if let Some(w) = edges.windows(2).find(|w| (w[0].i, w[0].j) == (w[1].i, w[1].j)) {
            return invalid(format!("duplicate edge ({}, {})", w[0].i, w[0].j));
        }

        let mut lists: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_nodes];
        for e in &edges {
            lists[e.i].push((e.j, e.weight));
            lists[e.j].push((e.i, e.weight));
        }
        let mut indptr = Vec::with_capacity(n_nodes + 1);
        let mut adjacency = Vec::with_capacity(2 * edges.len());
        indptr.push(0);
        for mut l in lists {
            l.sort_by_key(|&(j, _)| j);
            adjacency.extend(l);
            indptr.push(adjacency.len());
        }
        Ok(Self {
            n_nodes,
            edges,
            indptr,
            adjacency,
        })
    }

    /// Convenience constructor for untyped edges.
    pub fn from_weighted_edges(n_nodes: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        Self::new(
            n_nodes,
            edges
                .iter()
                .map(|&(i, j, weight)| Edge {
                    i,
                    j,
                    weight,
                    edge_type: None,
                })
                .collect(),
        )
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.adjacency[self.indptr[i]..self.indptr[i + 1]]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.indptr[i + 1] - self.indptr[i]
    }

    pub fn weight(&self, i: usize, j: usize) -> Option<f64> {
        let nb = self.neighbors(i);
        nb.binary_search_by_key(&j, |&(k, _)| k).ok().map(|k| nb[k].1)
    }

    pub fn avg_degree(&self) -> f64 {
        if self.n_nodes == 0 {
            0.0
        } else {
            2.0 * self.edges.len() as f64 / self.n_nodes as f64
        }
    }

    pub fn max_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).fold(0.0, f64::max)
    }

    /// Median edge weight (lower median for even counts); `None` when empty.
    pub fn median_weight(&self) -> Option<f64> {
        if self.edges.is_empty() {
            return None;
        }
        let mut w: Vec<f64> = self.edges.iter().map(|e| e.weight).collect();
        w.sort_by(f64::total_cmp);
        Some(w[(w.len() - 1) / 2])
    }

    /// Component label per node, labels ordered by lowest member.
    pub fn component_labels(&self) -> Vec<usize> {
        let pattern = SymCsr::from_parts(
            &vec![0.0; self.n_nodes],
            &self
                .edges
                .iter()
                .map(|e| (e.i, e.j, 0.0))
                .collect::<Vec<_>>(),
        );
        pattern.components()
    }

    pub fn n_components(&self) -> usize {
        self.component_labels().into_iter().max().map_or(0, |m| m + 1)
    }

    pub fn stats(&self) -> GraphStats {
        GraphStats {
            n_nodes: self.n_nodes,
            n_edges: self.n_edges(),
            avg_degree: self.avg_degree(),
            n_components: self.n_components(),
            min_weight: self
                .edges
                .iter()
                .map(|e| e.weight)
                .fold(f64::INFINITY, f64::min),
            max_weight: self.max_weight(),
        }
    }

    /// Same edge set with every weight multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return invalid(format!("scale factor must be positive, got {c}"));
        }
        self.map_weights(|e| e.weight * c)
    }

    /// Same edge set (and types) with weights recomputed per edge.
    pub fn map_weights(&self, mut f: impl FnMut(&Edge) -> f64) -> Result<Self> {
        let edges = self
            .edges
            .iter()
            .map(|e| Edge {
                weight: f(e),
                ..*e
            })
            .collect();
        Self::new(self.n_nodes, edges)
    }

    /// True when both graphs have the same node count and edge pairs.
    pub fn same_edge_set(&self, other: &Self) -> bool {
        self.n_nodes == other.n_nodes
            && self.edges.len() == other.edges.len()
            && self
                .edges
                .iter()
                .zip(&other.edges)
                .all(|(a, b)| (a.i, a.j) == (b.i, b.j))
    }

    /// Dense weighted adjacency.
    pub fn dense_adjacency(&self) -> nalgebra::DMatrix<f64> {
        let mut w = nalgebra::DMatrix::zeros(self.n_nodes, self.n_nodes);
        for e in &self.edges {
            w[(e.i, e.j)] = e.weight;
            w[(e.j, e.i)] = e.weight;
        }
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_invalid_edges() {
        assert!(SimilarityGraph::from_weighted_edges(3, &[(0, 0, 1.0)]).is_err());
        assert!(SimilarityGraph::from_weighted_edges(3, &[(0, 3, 1.0)]).is_err());
        assert!(SimilarityGraph::from_weighted_edges(3, &[(0, 1, 0.0)]).is_err());
        assert!(SimilarityGraph::from_weighted_edges(3, &[(0, 1, 1.0), (1, 0, 0.5)]).is_err());
    }

    #[test]
    fn adjacency_is_symmetric_and_stats_add_up() {
        let g = SimilarityGraph::from_weighted_edges(4, &[(2, 0, 0.3), (0, 1, 0.7)]).unwrap();
        assert_eq!(g.weight(0, 2), Some(0.3));
        assert_eq!(g.weight(2, 0), Some(0.3));
        assert_eq!(g.weight(1, 2), None);
        let s = g.stats();
        assert_eq!((s.n_edges, s.n_components), (2, 2));
        assert_eq!(s.avg_degree, 1.0);
        assert_eq!(g.median_weight(), Some(0.3));
    }
}
