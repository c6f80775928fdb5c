//! Predicates deciding when a node may average what it has received.

use itertools::Itertools;

use crate::graph::{NodeId, NodeSet, Subgraph};

/// At most `f` one-hop in-neighbors are still unheard. The node itself does not count.
pub fn wait_1(heard: NodeSet, in_nbrs: NodeSet, f: usize) -> bool {
    in_nbrs.difference(heard).len() <= f
}

/// Smallest (then lexicographically first) `F` among `candidates`, `|F| <= f`,
/// such that everything reaching `i` in `view - F` within `depth` hops is heard.
fn find_cut(
    view: &Subgraph,
    i: NodeId,
    candidates: NodeSet,
    heard: NodeSet,
    f: usize,
    depth: Option<usize>,
) -> Option<NodeSet> {
    let pool = candidates.to_vec();
    for size in 0..=f.min(pool.len()) {
        for combo in pool.iter().copied().combinations(size) {
            let cut: NodeSet = combo.into_iter().collect();
            if view.reach_avoiding(i, cut, depth).is_subset(heard) {
                return Some(cut);
            }
        }
    }
    None
}

/// The k-hop rule on `view` (the edges on `<= k` paths into `i`): returns the
/// crash set that explains away every unheard node, if one of size `<= f` exists.
pub fn wait_k_cut(view: &Subgraph, i: NodeId, heard: NodeSet, f: usize, k: usize) -> Option<NodeSet> {
    find_cut(view, i, view.nodes().without(i), heard, f, Some(k))
}

pub fn wait_k(view: &Subgraph, i: NodeId, heard: NodeSet, f: usize, k: usize) -> bool {
    wait_k_cut(view, i, heard, f, k).is_some()
}

/// Any of the `h`-hop rules for `h = 1..=k`; `views[h - 1]` is the `h`-hop view.
pub fn wait_strong(views: &[Subgraph], i: NodeId, heard: NodeSet, f: usize, k: usize) -> bool {
    (1..=k).any(|h| wait_k(&views[h - 1], i, heard, f, h))
}

/// The estimated-graph rule: some `F` of at most `f` known nodes other than `i`
/// leaves every node with a path to `i` in `est - F` heard.
pub fn wait_lwa_cut(est: &Subgraph, i: NodeId, heard: NodeSet, f: usize) -> Option<NodeSet> {
    find_cut(est, i, est.nodes().without(i), heard, f, None)
}

pub fn wait_lwa(est: &Subgraph, i: NodeId, heard: NodeSet, f: usize) -> bool {
    wait_lwa_cut(est, i, heard, f).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{example_g, ring, DiGraph};

    fn set(g: &DiGraph, names: &[&str]) -> NodeSet {
        names.iter().map(|s| g.node_by_name(s).unwrap()).collect()
    }

    #[test]
    fn one_hop() {
        let g = example_g();
        let d = g.node_by_name("D").unwrap();
        assert!(wait_1(set(&g, &["D", "C"]), g.in_neighbors(d), 1));
        let r = ring(4).unwrap();
        assert!(!wait_1(NodeSet::from([0]), r.in_neighbors(NodeId(0)), 1));
        assert!(wait_1(NodeSet::from([0]), r.in_neighbors(NodeId(0)), 2));
    }

    #[test]
    fn two_hop_on_example_graph() {
        let g = example_g();
        let d = g.node_by_name("D").unwrap();
        let view = g.k_hop_in_view(d, 2).unwrap();
        assert!(!wait_k(&view, d, set(&g, &["D", "C"]), 1, 2));
        assert_eq!(wait_k_cut(&view, d, set(&g, &["D", "C", "A"]), 1, 2), Some(set(&g, &["B"])));
        assert_eq!(wait_k_cut(&view, d, set(&g, &["A", "B", "C", "D"]), 1, 2), Some(NodeSet::EMPTY));
    }

    #[test]
    fn strong_rule() {
        let g = example_g();
        let d = g.node_by_name("D").unwrap();
        let views: Vec<_> = (1..=2).map(|h| g.k_hop_in_view(d, h).unwrap()).collect();
        assert!(wait_strong(&views, d, set(&g, &["D", "C"]), 1, 2));
        assert!(wait_strong(&views, d, set(&g, &["D", "C", "A"]), 1, 2));
        let r = ring(4).unwrap();
        let a = NodeId(0);
        let views: Vec<_> = (1..=2).map(|h| r.k_hop_in_view(a, h).unwrap()).collect();
        assert!(!wait_strong(&views, a, NodeSet::from([0]), 1, 2));
    }

    #[test]
    fn estimated_graph_rule() {
        let r = ring(4).unwrap();
        let a = NodeId(0);
        let star = Subgraph::in_star(4, a, r.in_neighbors(a));
        assert!(wait_lwa(&star, a, NodeSet::from([0]), 2));
        assert!(!wait_lwa(&star, a, NodeSet::from([0]), 1));
        let full = Subgraph::full(&r);
        assert_eq!(wait_lwa_cut(&full, a, NodeSet::full(4), 1), Some(NodeSet::EMPTY));
        assert!(!wait_lwa(&full, a, NodeSet::from([0, 1]), 1));
        assert!(wait_lwa(&full, a, NodeSet::from([0, 1, 2]), 1));
    }
}
