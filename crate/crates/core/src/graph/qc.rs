//! Quasi-cyclic backbone: a circulant lift of a small protograph.
//!
//! Base entry `(r, c)` with multiplicity `t` receives `t` distinct shifts
//! `s`; each shift lifts to the `L` arcs `(r, v) → (c, (v + s) mod L)`.
//! Node `(b, v)` is numbered `b·L + v`. The undirected backbone is the
//! support of the lifted arcs with self-loops dropped and parallel edges
//! collapsed (the surviving edge keeps the smallest base-entry type).

use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{girth, Edge, SimilarityGraph};
use crate::error::{invalid, NbseError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Protograph {
    /// Edge multiplicities, `m` rows × `c` columns, `m ≤ c`.
    pub base: Vec<Vec<u32>>,
    /// Circulant size `L`.
    pub lift: usize,
    /// Fixed shifts per base entry (`shifts[r][c]` has `base[r][c]`
    /// distinct values in `0..L`). Sampled from `seed` when absent.
    pub shifts: Option<Vec<Vec<Vec<usize>>>>,
    pub seed: u64,
    /// Accepted average-degree window; candidates outside it are resampled.
    pub degree_bounds: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LiftedArc {
    pub from: usize,
    pub to: usize,
    pub base_row: usize,
    pub base_col: usize,
    pub shift: usize,
}

#[derive(Debug, Clone)]
pub struct QcBackbone {
    /// Unit-weight graph with edge types from base-entry identity.
    pub graph: SimilarityGraph,
    pub shifts: Vec<Vec<Vec<usize>>>,
    /// Every lifted arc before collapsing, for multiplicity recounts.
    pub arcs: Vec<LiftedArc>,
    pub girth: Option<usize>,
    /// Shift assignments tried, including the accepted one.
    pub attempts: usize,
}

impl Protograph {
    pub fn n_blocks(&self) -> usize {
        self.base.first().map_or(0, Vec::len)
    }

    pub fn n_nodes(&self) -> usize {
        self.n_blocks() * self.lift
    }

    fn validate(&self) -> Result<()> {
        let cols = self.n_blocks();
        if self.base.is_empty() || cols == 0 {
            return invalid("protograph base matrix is empty");
        }
        if self.base.iter().any(|r| r.len() != cols) {
            return invalid("protograph rows have different lengths");
        }
        if self.base.len() > cols {
            return invalid(format!(
                "protograph has {} rows but only {cols} column blocks",
                self.base.len()
            ));
        }
        if self.lift < 2 {
            return invalid("lift size must be at least 2");
        }
        for (r, row) in self.base.iter().enumerate() {
            for (c, &t) in row.iter().enumerate() {
                if t as usize > self.lift {
                    return invalid(format!(
                        "base entry ({r}, {c}) has multiplicity {t} > lift {}",
                        self.lift
                    ));
                }
            }
        }
        if let Some(shifts) = &self.shifts {
            if shifts.len() != self.base.len() || shifts.iter().any(|r| r.len() != cols) {
                return invalid("shift table shape differs from base matrix");
            }
            for (r, row) in shifts.iter().enumerate() {
                for (c, s) in row.iter().enumerate() {
                    let mut sorted = s.clone();
                    sorted.sort_unstable();
                    sorted.dedup();
                    if s.len() != self.base[r][c] as usize
                        || sorted.len() != s.len()
                        || s.iter().any(|&v| v >= self.lift)
                    {
                        return invalid(format!(
                            "entry ({r}, {c}) needs {} distinct shifts in 0..{}",
                            self.base[r][c], self.lift
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    fn sample_shifts(&self, rng: &mut ChaCha8Rng) -> Vec<Vec<Vec<usize>>> {
        self.base
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&t| {
                        let mut s = sample(rng, self.lift, t as usize).into_vec();
                        s.sort_unstable();
                        s
                    })
                    .collect()
            })
            .collect()
    }

    fn lift_arcs(&self, shifts: &[Vec<Vec<usize>>]) -> Vec<LiftedArc> {
        let l = self.lift;
        let mut arcs = Vec::new();
        for (r, row) in shifts.iter().enumerate() {
            for (c, entry) in row.iter().enumerate() {
                for &s in entry {
                    for v in 0..l {
                        arcs.push(LiftedArc {
                            from: r * l + v,
                            to: c * l + (v + s) % l,
                            base_row: r,
                            base_col: c,
                            shift: s,
                        });
                    }
                }
            }
        }
        arcs
    }

    fn collapse(&self, arcs: &[LiftedArc]) -> Result<SimilarityGraph> {
        let cols = self.n_blocks();
        let mut edges: BTreeMap<(usize, usize), u32> = BTreeMap::new();
        for a in arcs.iter().filter(|a| a.from != a.to) {
            let key = (a.from.min(a.to), a.from.max(a.to));
            let ty = (a.base_row * cols + a.base_col) as u32;
            edges
                .entry(key)
                .and_modify(|t| *t = (*t).min(ty))
                .or_insert(ty);
        }
        SimilarityGraph::new(
            self.n_nodes(),
            edges
                .into_iter()
                .map(|((i, j), ty)| Edge {
                    i,
                    j,
                    weight: 1.0,
                    edge_type: Some(ty),
                })
                .collect(),
        )
    }
}

fn girth_at_least(g: Option<usize>, target: usize) -> bool {
    g.is_none_or(|g| g >= target)
}

fn describe(g: Option<usize>) -> String {
    g.map_or_else(|| "infinite".to_string(), |g| g.to_string())
}

/// Lift `proto`, resampling whole shift assignments (up to `max_retries`
/// extra attempts) until the girth reaches `girth_min` and the average
/// degree falls inside `degree_bounds`.
pub fn build_qc_backbone(
    proto: &Protograph,
    girth_min: usize,
    max_retries: usize,
) -> Result<QcBackbone> {
    proto.validate()?;
    if girth_min < 3 {
        return invalid(format!("girth_min must be at least 3, got {girth_min}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(proto.seed);
    let attempts = if proto.shifts.is_some() { 1 } else { max_retries + 1 };
    let mut best: Option<Option<usize>> = None;
    for attempt in 1..=attempts {
        let shifts = match &proto.shifts {
            Some(s) => s.clone(),
            None => proto.sample_shifts(&mut rng),
        };
        let arcs = proto.lift_arcs(&shifts);
        let graph = proto.collapse(&arcs)?;
        let g = girth(&graph);
        let degree_ok = proto
            .degree_bounds
            .is_none_or(|(lo, hi)| (lo..=hi).contains(&graph.avg_degree()));
        if girth_at_least(g, girth_min) && degree_ok {
            return Ok(QcBackbone {
                graph,
                shifts,
                arcs,
                girth: g,
                attempts: attempt,
            });
        }
        if degree_ok {
            let rank = g.unwrap_or(usize::MAX);
            if best.is_none_or(|b| rank > b.unwrap_or(usize::MAX)) {
                best = Some(g);
            }
        }
    }
    Err(NbseError::GirthNotMet {
        target: girth_min,
        retries: attempts - 1,
        best: best.map_or_else(
            || "none (no candidate met the degree bounds)".to_string(),
            describe,
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn proto(base: Vec<Vec<u32>>, lift: usize, shifts: Option<Vec<Vec<Vec<usize>>>>) -> Protograph {
        Protograph {
            base,
            lift,
            shifts,
            seed: 0,
            degree_bounds: None,
        }
    }

    #[test]
    fn single_circulant_is_a_cycle() {
        let p = proto(vec![vec![1]], 5, Some(vec![vec![vec![1]]]));
        let qc = build_qc_backbone(&p, 4, 0).unwrap();
        assert_eq!(qc.graph.n_edges(), 5);
        assert_eq!(qc.girth, Some(5));
        assert!(qc.graph.edges().iter().all(|e| e.weight == 1.0 && e.edge_type == Some(0)));
    }

    #[test]
    fn multi_edge_collapses_to_simple_graph() {
        // shift 0 lifts to self-loops, shift 1 to a 4-cycle
        let p = proto(vec![vec![2]], 4, Some(vec![vec![vec![0, 1]]]));
        let qc = build_qc_backbone(&p, 4, 0).unwrap();
        assert_eq!(qc.graph.n_edges(), 4);
        assert_eq!(qc.girth, Some(4));
        assert_eq!(qc.arcs.len(), 8);
    }

    #[test]
    fn fixed_shifts_failing_girth_report_best() {
        let p = proto(vec![vec![1]], 5, Some(vec![vec![vec![1]]]));
        match build_qc_backbone(&p, 6, 10) {
            Err(NbseError::GirthNotMet { best, retries, .. }) => {
                assert_eq!(best, "5");
                assert_eq!(retries, 0);
            }
            other => panic!("expected GirthNotMet, got {other:?}"),
        }
    }

    #[test]
    fn two_by_two_lift_meets_girth_six() {
        for seed in 0..10 {
            let mut p = proto(vec![vec![1, 1], vec![1, 1]], 7, None);
            p.seed = seed;
            let qc = build_qc_backbone(&p, 6, 200).unwrap();
            assert!(girth(&qc.graph).is_none_or(|g| g >= 6));
            // every accepted lift drops a diagonal entry to self-loops
            assert!(qc.graph.n_edges() < 28);
        }
    }

    #[test]
    fn rejects_bad_protographs() {
        assert!(build_qc_backbone(&proto(vec![vec![3]], 2, None), 4, 0).is_err());
        assert!(build_qc_backbone(&proto(vec![vec![1], vec![1]], 5, None), 4, 0).is_err());
        assert!(
            build_qc_backbone(&proto(vec![vec![2]], 5, Some(vec![vec![vec![1, 1]]])), 4, 0)
                .is_err()
        );
    }
}
