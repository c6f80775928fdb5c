use super::{DiGraph, NodeId, NodeSet};

/// A partial view of a graph over the global index space `0..n`: the
/// estimated topology a node assembles while learning.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Subgraph {
    nodes: NodeSet,
    in_adj: Vec<NodeSet>,
}

impl Subgraph {
    pub fn new(n: usize) -> Self {
        Subgraph { nodes: NodeSet::EMPTY, in_adj: vec![NodeSet::EMPTY; n] }
    }

    /// `G_{N => i}`: nodes `N ∪ {i}` with an edge from every member of `N` to `i`.
    pub fn in_star(n: usize, i: NodeId, sources: NodeSet) -> Self {
        let mut g = Subgraph::new(n);
        g.add_node(i);
        for j in sources {
            g.add_edge(j, i);
        }
        g
    }

    /// Undirected one-hop neighborhood of `i` in `g`, both directions.
    pub fn undirected_star(g: &DiGraph, i: NodeId) -> Self {
        let mut s = Subgraph::new(g.n());
        s.add_node(i);
        for j in g.in_neighbors(i).union(g.out_neighbors(i)) {
            if g.has_edge(j, i) {
                s.add_edge(j, i);
            }
            if g.has_edge(i, j) {
                s.add_edge(i, j);
            }
        }
        s
    }

    /// Whole graph as a subgraph.
    pub fn full(g: &DiGraph) -> Self {
        let mut s = Subgraph::new(g.n());
        s.nodes = g.nodes();
        for (u, v) in g.edges() {
            s.add_edge(u, v);
        }
        s
    }

    pub fn add_node(&mut self, i: NodeId) {
        self.nodes.insert(i);
    }

    pub fn add_edge(&mut self, from: NodeId, to: NodeId) {
        self.nodes.insert(from);
        self.nodes.insert(to);
        self.in_adj[to.0].insert(from);
    }

    pub fn nodes(&self) -> NodeSet {
        self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn has_edge(&self, from: NodeId, to: NodeId) -> bool {
        self.in_adj[to.0].contains(from)
    }

    pub fn in_neighbors(&self, i: NodeId) -> NodeSet {
        self.in_adj[i.0]
    }

    pub fn edge_count(&self) -> usize {
        self.in_adj.iter().map(|s| s.len()).sum()
    }

    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.in_adj.iter().enumerate().flat_map(|(v, ins)| ins.iter().map(move |u| (u, NodeId(v))))
    }

    /// Merge `other` into `self`; returns whether anything was added.
    pub fn union_with(&mut self, other: &Subgraph) -> bool {
        let mut changed = !other.nodes.is_subset(self.nodes);
        self.nodes = self.nodes.union(other.nodes);
        for (mine, theirs) in self.in_adj.iter_mut().zip(&other.in_adj) {
            if !theirs.is_subset(*mine) {
                changed = true;
                *mine = mine.union(*theirs);
            }
        }
        changed
    }

    /// Every node and edge of `self` is present in `g`.
    pub fn is_subgraph_of(&self, g: &DiGraph) -> bool {
        self.nodes.is_subset(g.nodes()) && self.edges().all(|(u, v)| g.has_edge(u, v))
    }

    /// Nodes other than `i` with a directed path to `i` inside `nodes - removed`,
    /// with at most `depth` hops (`None` = unbounded).
    pub fn reach_avoiding(&self, i: NodeId, removed: NodeSet, depth: Option<usize>) -> NodeSet {
        let allowed = self.nodes.difference(removed);
        let mut seen = NodeSet::singleton(i);
        let mut frontier = seen;
        let mut hops = 0;
        while !frontier.is_empty() && depth.is_none_or(|d| hops < d) {
            let mut next = NodeSet::EMPTY;
            for v in frontier {
                next = next.union(self.in_adj[v.0]);
            }
            next = next.intersection(allowed).difference(seen);
            seen = seen.union(next);
            frontier = next;
            hops += 1;
        }
        seen.without(i)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::ring;

    #[test]
    fn star_and_union() {
        let mut a = Subgraph::in_star(4, NodeId(0), NodeSet::from([1, 3]));
        assert_eq!(a.nodes(), NodeSet::from([0, 1, 3]));
        assert_eq!(a.edge_count(), 2);
        let b = Subgraph::in_star(4, NodeId(1), NodeSet::from([0, 2]));
        assert!(a.union_with(&b));
        assert!(!a.union_with(&b));
        assert_eq!(a.node_count(), 4);
        assert!(a.is_subgraph_of(&ring(4).unwrap()));
    }

    #[test]
    fn reach_unbounded_on_ring() {
        let g = ring(4).unwrap();
        let full = Subgraph::full(&g);
        // removing b leaves d and c connected to a through d
        assert_eq!(full.reach_avoiding(NodeId(0), NodeSet::from([1]), None), NodeSet::from([2, 3]));
        assert_eq!(full.reach_avoiding(NodeId(0), NodeSet::from([1, 3]), None), NodeSet::EMPTY);
        assert_eq!(full.reach_avoiding(NodeId(0), NodeSet::EMPTY, Some(1)), NodeSet::from([1, 3]));
    }

    #[test]
    fn undirected_star_is_symmetric() {
        let g = ring(5).unwrap();
        let s = Subgraph::undirected_star(&g, NodeId(0));
        assert!(s.has_edge(NodeId(1), NodeId(0)) && s.has_edge(NodeId(0), NodeId(1)));
        assert!(s.has_edge(NodeId(4), NodeId(0)) && s.has_edge(NodeId(0), NodeId(4)));
        assert_eq!(s.edge_count(), 4);
    }
}
