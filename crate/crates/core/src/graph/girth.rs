use std::collections::VecDeque;

use super::SimilarityGraph;

/// Length of the shortest cycle, `None` for forests.
///
/// BFS from every node; a non-tree edge `(u, v)` met during the search from
/// `root` closes a closed walk of length `dist[u] + dist[v] + 1`, and the
/// minimum over all roots is exactly the girth.
pub fn girth(g: &SimilarityGraph) -> Option<usize> {
    let n = g.n_nodes();
    let mut best = usize::MAX;
    let mut dist = vec![usize::MAX; n];
    let mut parent = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    for root in 0..n {
        dist.fill(usize::MAX);
        dist[root] = 0;
        parent[root] = usize::MAX;
        queue.clear();
        queue.push_back(root);
        while let Some(u) = queue.pop_front() {
            // nothing shorter than `best` can start this deep
            if 2 * dist[u] >= best {
                break;
            }
            for &(v, _) in g.neighbors(u) {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    parent[v] = u;
                    queue.push_back(v);
                } else if parent[u] != v {
                    best = best.min(dist[u] + dist[v] + 1);
                }
            }
        }
    }
    (best != usize::MAX).then_some(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(n: usize) -> SimilarityGraph {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n, 1.0)).collect();
        SimilarityGraph::from_weighted_edges(n, &edges).unwrap()
    }

    #[test]
    fn small_graphs() {
        assert_eq!(girth(&cycle(3)), Some(3));
        assert_eq!(girth(&cycle(6)), Some(6));
        let path = SimilarityGraph::from_weighted_edges(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)])
            .unwrap();
        assert_eq!(girth(&path), None);
        // 5-cycle with a chord 0-2 → triangle
        let mut edges: Vec<_> = (0..5).map(|i| (i, (i + 1) % 5, 1.0)).collect();
        edges.push((0, 2, 1.0));
        let g = SimilarityGraph::from_weighted_edges(5, &edges).unwrap();
        assert_eq!(girth(&g), Some(3));
    }
}
