use std::collections::VecDeque;

use super::{DiGraph, GraphError, NodeId};

/// Unit-capacity max flow on the split graph: node `v` becomes `v_in = 2v`
/// and `v_out = 2v + 1` joined by a capacity-1 arc, so the flow value between
/// `s_out` and `t_in` counts internally node-disjoint `s`-`t` paths.
struct SplitFlow {
    size: usize,
    cap: Vec<Vec<i32>>,
}

impl SplitFlow {
    fn new(g: &DiGraph) -> Self {
        let size = 2 * g.n();
        let mut cap = vec![vec![0; size]; size];
        for v in 0..g.n() {
            cap[2 * v][2 * v + 1] = 1;
        }
        for (u, v) in g.edges() {
            // edges between distinct nodes never bottleneck on their own
            cap[2 * u.0 + 1][2 * v.0] = g.n() as i32;
        }
        SplitFlow { size, cap }
    }

    fn max_flow(mut self, s: usize, t: usize) -> usize {
        let mut flow = 0;
        loop {
            let mut prev = vec![usize::MAX; self.size];
            prev[s] = s;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                if u == t {
                    break;
                }
                for (v, p) in prev.iter_mut().enumerate() {
                    if *p == usize::MAX && self.cap[u][v] > 0 {
                        *p = u;
                        queue.push_back(v);
                    }
                }
            }
            if prev[t] == usize::MAX {
                return flow;
            }
            let mut v = t;
            while v != s {
                let u = prev[v];
                self.cap[u][v] -= 1;
                self.cap[v][u] += 1;
                v = u;
            }
            flow += 1;
        }
    }
}

/// Minimum number of node removals that disconnect an undirected graph
/// (`n - 1` for complete graphs).
pub fn vertex_connectivity(g: &DiGraph) -> Result<usize, GraphError> {
    if !g.is_undirected() {
        return Err(GraphError::NotUndirected);
    }
    let n = g.n();
    let mut best = n - 1;
    for s in 0..n {
        for t in s + 1..n {
            if g.has_edge(NodeId(s), NodeId(t)) {
                continue;
            }
            let paths = SplitFlow::new(g).max_flow(2 * s + 1, 2 * t);
            best = best.min(paths);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{complete, random_undirected, ring, two_cliques, NodeSet};
    use itertools::Itertools;

    /// Smallest removal set that leaves the rest disconnected (or n - 1).
    fn brute_force(g: &DiGraph) -> usize {
        let n = g.n();
        for size in 0..n.saturating_sub(1) {
            for removed in (0..n).combinations(size) {
                let removed: NodeSet = removed.into_iter().map(NodeId).collect();
                let rest = g.nodes().difference(removed);
                let start = rest.first().unwrap();
                let reach = g.reach_k(start, removed, n).unwrap().with(start);
                if reach != rest {
                    return size;
                }
            }
        }
        n - 1
    }

    #[test]
    fn known_values() {
        assert_eq!(vertex_connectivity(&ring(4).unwrap()).unwrap(), 2);
        assert_eq!(vertex_connectivity(&complete(4).unwrap()).unwrap(), 3);
        assert_eq!(vertex_connectivity(&two_cliques(8, 3).unwrap()).unwrap(), 3);
        assert_eq!(brute_force(&two_cliques(8, 3).unwrap()), 3);
    }

    #[test]
    fn rejects_directed() {
        assert_eq!(vertex_connectivity(&crate::graph::example_g()), Err(GraphError::NotUndirected));
    }

    #[test]
    fn agrees_with_brute_force() {
        for seed in 0..60 {
            let n = 3 + (seed as usize % 6);
            let g = random_undirected(n, 0.5, seed).unwrap();
            assert_eq!(vertex_connectivity(&g).unwrap(), brute_force(&g), "seed {seed}: {g:?}");
        }
    }
}
