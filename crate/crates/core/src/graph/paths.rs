//! Maximum number of node-disjoint, length-bounded paths from a source set
//! into a target node.
//!
//! No polynomial exact algorithm is known for general length bounds, so this
//! is an exact search:
//!
//! 1. enumerate every simple path of length `<= k` that starts in the source
//!    set and ends at the target, stopping a path at the first source node it
//!    reaches (anything longer is dominated by its suffix);
//! 2. keep only paths whose node set is inclusion-minimal, since a path that
//!    covers another path's nodes can always be swapped for it;
//! 3. solve the remaining set-packing instance by branch and bound, bounding
//!    each branch by the number of distinct last hops still available (each
//!    path enters the target through a different in-neighbor).

use super::{DiGraph, GraphError, NodeId, NodeSet};

/// Node-count guard for the exponential search.
pub const DEFAULT_PATH_GUARD: usize = 16;

#[derive(Clone, Copy, Debug)]
struct Candidate {
    /// Path nodes excluding the target.
    nodes: NodeSet,
    /// In-neighbor of the target the path enters through.
    entry: NodeId,
}

fn validate(g: &DiGraph, sources: NodeSet, target: NodeId, k: usize, guard: usize) -> Result<(), GraphError> {
    g.check_node(target)?;
    if k == 0 {
        return Err(GraphError::ZeroDepth);
    }
    if sources.is_empty() || sources.contains(target) || !sources.is_subset(g.nodes()) {
        return Err(GraphError::BadSourceSet);
    }
    if g.n() > guard {
        return Err(GraphError::GuardExceeded { n: g.n(), guard });
    }
    Ok(())
}

fn candidates(g: &DiGraph, sources: NodeSet, target: NodeId, k: usize) -> Vec<Candidate> {
    let mut found: Vec<Candidate> = Vec::new();
    // walk backwards from the target: `path` holds the nodes collected so far
    let mut stack: Vec<(NodeId, NodeSet, NodeId, usize)> = Vec::new();
    for u in g.in_neighbors(target) {
        stack.push((u, NodeSet::singleton(u), u, 1));
    }
    while let Some((head, path, entry, len)) = stack.pop() {
        if sources.contains(head) {
            found.push(Candidate { nodes: path, entry });
            continue;
        }
        if len == k {
            continue;
        }
        for u in g.in_neighbors(head) {
            if u != target && !path.contains(u) {
                stack.push((u, path.with(u), entry, len + 1));
            }
        }
    }

    found.sort_by_key(|c| (c.nodes.len(), c.nodes.bits()));
    found.dedup_by_key(|c| c.nodes);
    let mut minimal: Vec<Candidate> = Vec::with_capacity(found.len());
    for c in found {
        // sorted by size, so any subset of `c` is already in `minimal`
        if !minimal.iter().any(|m| m.nodes.is_subset(c.nodes)) {
            minimal.push(c);
        }
    }
    minimal
}

struct Packing<'a> {
    cands: &'a [Candidate],
    best: usize,
    stop_at: usize,
}

impl Packing<'_> {
    fn search(&mut self, from: usize, used: NodeSet, count: usize) {
        if count > self.best {
            self.best = count;
        }
        if self.best >= self.stop_at {
            return;
        }
        for idx in from..self.cands.len() {
            let c = self.cands[idx];
            if !c.nodes.is_disjoint(used) {
                continue;
            }
            let entries: NodeSet =
                self.cands[idx..].iter().filter(|d| d.nodes.is_disjoint(used)).map(|d| d.entry).collect();
            if count + entries.len() <= self.best {
                return;
            }
            self.search(idx + 1, used.union(c.nodes), count + 1);
            if self.best >= self.stop_at {
                return;
            }
        }
    }
}

fn solve(g: &DiGraph, sources: NodeSet, target: NodeId, k: usize, stop_at: usize) -> usize {
    let cands = candidates(g, sources, target, k);
    let ceiling = g.in_neighbors(target).len().min(sources.len());
    let mut packing = Packing { cands: &cands, best: 0, stop_at: stop_at.min(ceiling) };
    packing.search(0, NodeSet::EMPTY, 0);
    packing.best
}

/// Largest number of directed paths, each of length at most `k`, each starting
/// in `sources` and ending at `target`, pairwise sharing only `target`.
/// Intermediate nodes may be any nodes of the graph.
pub fn max_disjoint_bounded_paths(
    g: &DiGraph,
    sources: NodeSet,
    target: NodeId,
    k: usize,
) -> Result<usize, GraphError> {
    max_disjoint_bounded_paths_with_guard(g, sources, target, k, DEFAULT_PATH_GUARD)
}

pub fn max_disjoint_bounded_paths_with_guard(
    g: &DiGraph,
    sources: NodeSet,
    target: NodeId,
    k: usize,
    guard: usize,
) -> Result<usize, GraphError> {
    validate(g, sources, target, k, guard)?;
    Ok(solve(g, sources, target, k, usize::MAX))
}

/// Whether at least `needed` such paths exist; stops as soon as they are found.
pub fn has_disjoint_bounded_paths(
    g: &DiGraph,
    sources: NodeSet,
    target: NodeId,
    k: usize,
    needed: usize,
) -> Result<bool, GraphError> {
    validate(g, sources, target, k, DEFAULT_PATH_GUARD)?;
    if needed == 0 {
        return Ok(true);
    }
    Ok(solve(g, sources, target, k, needed) >= needed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{complete, random_digraph, ring, two_cliques};
    use proptest::prelude::*;

    fn named(g: &DiGraph, names: &[&str]) -> NodeSet {
        names.iter().map(|s| g.node_by_name(s).unwrap()).collect()
    }

    #[test]
    fn ring_examples() {
        let g = ring(4).unwrap();
        let ab = named(&g, &["a", "b"]);
        let c = g.node_by_name("c").unwrap();
        // b -> c and a -> d -> c
        assert_eq!(max_disjoint_bounded_paths(&g, ab, c, 2).unwrap(), 2);
        assert_eq!(max_disjoint_bounded_paths(&g, ab, c, 1).unwrap(), 1);
    }

    #[test]
    fn direct_edge_gives_one() {
        let g = DiGraph::from_edges(3, [(0, 1)]).unwrap();
        for k in 1..=3 {
            assert!(max_disjoint_bounded_paths(&g, NodeSet::from([0]), NodeId(1), k).unwrap() >= 1);
        }
        assert_eq!(max_disjoint_bounded_paths(&g, NodeSet::from([0]), NodeId(2), 3).unwrap(), 0);
    }

    #[test]
    fn complete_graph_hits_in_degree() {
        let g = complete(6).unwrap();
        let src = NodeSet::from([0, 1, 2, 3, 4]);
        assert_eq!(max_disjoint_bounded_paths(&g, src, NodeId(5), 1).unwrap(), 5);
        assert_eq!(max_disjoint_bounded_paths(&g, NodeSet::from([0]), NodeId(5), 6).unwrap(), 1);
    }

    #[test]
    fn two_cliques_bridge_paths() {
        let g = two_cliques(8, 3).unwrap();
        let left = NodeSet::from([0, 1, 2, 3]);
        // 0->4, 1->5->4, 2->6->4
        assert_eq!(max_disjoint_bounded_paths(&g, left, NodeId(4), 2).unwrap(), 3);
        assert_eq!(max_disjoint_bounded_paths(&g, left, NodeId(4), 1).unwrap(), 1);
        assert!(has_disjoint_bounded_paths(&g, left, NodeId(7), 2, 3).unwrap());
        assert!(!has_disjoint_bounded_paths(&g, left, NodeId(7), 2, 4).unwrap());
    }

    #[test]
    fn errors() {
        let g = ring(4).unwrap();
        assert_eq!(max_disjoint_bounded_paths(&g, NodeSet::EMPTY, NodeId(0), 2), Err(GraphError::BadSourceSet));
        assert_eq!(max_disjoint_bounded_paths(&g, NodeSet::from([0, 1]), NodeId(0), 2), Err(GraphError::BadSourceSet));
        assert_eq!(max_disjoint_bounded_paths(&g, NodeSet::from([1]), NodeId(0), 0), Err(GraphError::ZeroDepth));
        let big = ring(20).unwrap();
        assert!(matches!(
            max_disjoint_bounded_paths(&big, NodeSet::from([1]), NodeId(0), 2),
            Err(GraphError::GuardExceeded { .. })
        ));
        assert_eq!(max_disjoint_bounded_paths_with_guard(&big, NodeSet::from([1]), NodeId(0), 2, 32), Ok(1));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn monotone_in_depth_and_sources(seed in any::<u64>(), n in 3usize..8, p in 0.2f64..0.8) {
            let g = random_digraph(n, p, seed).unwrap();
            let target = NodeId(n - 1);
            let small = NodeSet::from_bits(seed as u128 & ((1u128 << (n - 1)) - 1));
            prop_assume!(!small.is_empty());
            let big = small.union(NodeSet::from([0]));
            let mut prev = 0;
            for k in 1..=n {
                let v = max_disjoint_bounded_paths(&g, small, target, k).unwrap();
                prop_assert!(v >= prev);
                prop_assert!(v <= g.in_neighbors(target).len());
                prop_assert!(max_disjoint_bounded_paths(&g, big, target, k).unwrap() >= v);
                prop_assert_eq!(has_disjoint_bounded_paths(&g, small, target, k, v).unwrap(), true);
                prop_assert_eq!(has_disjoint_bounded_paths(&g, small, target, k, v + 1).unwrap(), false);
                prev = v;
            }
        }
    }
}
