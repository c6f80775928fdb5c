//! Directed-graph model and the neighborhood queries the condition checkers and
//! protocols are built on.
//!
//! Graphs are immutable once built. Undirected graphs are stored as symmetric
//! digraphs with the `undirected` flag set, so every algorithm runs on them
//! unchanged.

mod connectivity;
mod format;
mod generators;
mod paths;
mod subgraph;

pub use connectivity::vertex_connectivity;
pub use format::{parse_graph, write_graph};
pub use generators::{builtin, complete, example_g, random_digraph, random_undirected, ring, two_cliques};
pub use paths::{
    has_disjoint_bounded_paths, max_disjoint_bounded_paths, max_disjoint_bounded_paths_with_guard, DEFAULT_PATH_GUARD,
};
pub use subgraph::Subgraph;

use std::collections::VecDeque;

use serde::Serialize;
use thiserror::Error;

pub use crate::nodeset::{NodeId, NodeSet, MAX_NODES};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("graph must have at least 2 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("graph has {n} nodes; at most {max} are supported")]
    TooManyNodes { n: usize, max: usize },
    #[error("node {node} is out of range for a graph with {n} nodes")]
    InvalidNode { node: usize, n: usize },
    #[error("self-loop on node {0} is not allowed")]
    SelfLoop(usize),
    #[error("duplicate label {0:?}")]
    DuplicateLabel(String),
    #[error("node {node} must not be in the removed set")]
    NodeRemoved { node: usize },
    #[error("relay depth must be at least 1")]
    ZeroDepth,
    #[error("source set must be non-empty and must not contain the target")]
    BadSourceSet,
    #[error("operation needs at most {guard} nodes, graph has {n}")]
    GuardExceeded { n: usize, guard: usize },
    #[error("operation requires an undirected graph")]
    NotUndirected,
    #[error("invalid generator parameters: {0}")]
    BadParameters(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// A simple directed graph on nodes `0..n` with optional display labels.
#[derive(Clone, PartialEq, Eq)]
pub struct DiGraph {
    n: usize,
    out_adj: Vec<NodeSet>,
    in_adj: Vec<NodeSet>,
    undirected: bool,
    labels: Vec<Option<String>>,
}

impl DiGraph {
    fn empty(n: usize, undirected: bool) -> Result<Self, GraphError> {
        if n < 2 {
            return Err(GraphError::TooFewNodes(n));
        }
        if n > MAX_NODES {
            return Err(GraphError::TooManyNodes { n, max: MAX_NODES });
        }
        Ok(DiGraph {
            n,
            out_adj: vec![NodeSet::EMPTY; n],
            in_adj: vec![NodeSet::EMPTY; n],
            undirected,
            labels: vec![None; n],
        })
    }

    fn insert_edge(&mut self, from: usize, to: usize) -> Result<(), GraphError> {
        for v in [from, to] {
            if v >= self.n {
                return Err(GraphError::InvalidNode { node: v, n: self.n });
            }
        }
        if from == to {
            return Err(GraphError::SelfLoop(from));
        }
        self.out_adj[from].insert(NodeId(to));
        self.in_adj[to].insert(NodeId(from));
        Ok(())
    }

    /// Directed graph from ordered pairs. Duplicate pairs are merged.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut g = DiGraph::empty(n, false)?;
        for (a, b) in edges {
            g.insert_edge(a, b)?;
        }
        Ok(g)
    }

    /// Undirected graph: every pair is inserted in both directions.
    pub fn undirected_from_edges<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut g = DiGraph::empty(n, true)?;
        for (a, b) in edges {
            g.insert_edge(a, b)?;
            g.insert_edge(b, a)?;
        }
        Ok(g)
    }

    /// Attach display labels. Labels must be unique.
    pub fn with_labels<I, S>(mut self, labels: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, S)>,
        S: Into<String>,
    {
        for (i, label) in labels {
            if i >= self.n {
                return Err(GraphError::InvalidNode { node: i, n: self.n });
            }
            self.labels[i] = Some(label.into());
        }
        let mut seen = std::collections::BTreeSet::new();
        for l in self.labels.iter().flatten() {
            if !seen.insert(l.as_str()) {
                return Err(GraphError::DuplicateLabel(l.clone()));
            }
        }
        Ok(self)
    }

    /// Re-tag a symmetric digraph as undirected.
    pub fn into_undirected(mut self) -> Result<Self, GraphError> {
        for (i, j) in self.edges() {
            if !self.has_edge(j, i) {
                return Err(GraphError::NotUndirected);
            }
        }
        self.undirected = true;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_undirected(&self) -> bool {
        self.undirected
    }

    pub fn nodes(&self) -> NodeSet {
        NodeSet::full(self.n)
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> {
        (0..self.n).map(NodeId)
    }

    pub fn check_node(&self, i: NodeId) -> Result<(), GraphError> {
        if i.0 < self.n {
            Ok(())
        } else {
            Err(GraphError::InvalidNode { node: i.0, n: self.n })
        }
    }

    /// `N_i^-`: one-hop incoming neighbors.
    pub fn in_neighbors(&self, i: NodeId) -> NodeSet {
        self.in_adj[i.0]
    }

    /// `N_i^+`: one-hop outgoing neighbors.
    pub fn out_neighbors(&self, i: NodeId) -> NodeSet {
        self.out_adj[i.0]
    }

    pub fn has_edge(&self, from: NodeId, to: NodeId) -> bool {
        from.0 < self.n && self.out_adj[from.0].contains(to)
    }

    /// All directed edges in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.node_ids().flat_map(move |i| self.out_adj[i.0].iter().map(move |j| (i, j)))
    }

    pub fn edge_count(&self) -> usize {
        self.out_adj.iter().map(|s| s.len()).sum()
    }

    pub fn label(&self, i: NodeId) -> Option<&str> {
        self.labels.get(i.0).and_then(|l| l.as_deref())
    }

    pub fn has_labels(&self) -> bool {
        self.labels.iter().any(Option::is_some)
    }

    /// Label if present, otherwise the index.
    pub fn name(&self, i: NodeId) -> String {
        self.label(i).map(str::to_owned).unwrap_or_else(|| i.0.to_string())
    }

    pub fn names(&self, set: NodeSet) -> Vec<String> {
        set.iter().map(|i| self.name(i)).collect()
    }

    /// Resolve a label, falling back to a numeric index.
    pub fn node_by_name(&self, name: &str) -> Option<NodeId> {
        if let Some(i) = self.labels.iter().position(|l| l.as_deref() == Some(name)) {
            return Some(NodeId(i));
        }
        name.parse::<usize>().ok().filter(|&i| i < self.n).map(NodeId)
    }

    /// `N_S^-`: nodes outside `set` with an edge into `set`.
    pub fn in_neighbors_of_set(&self, set: NodeSet) -> NodeSet {
        set.iter().fold(NodeSet::EMPTY, |acc, v| acc.union(self.in_adj[v.0])).difference(set)
    }

    /// `N_i^-(k)`: nodes other than `i` with a directed path of length at most `k` to `i`.
    pub fn k_in_neighborhood(&self, i: NodeId, k: usize) -> Result<NodeSet, GraphError> {
        self.reach_k(i, NodeSet::EMPTY, k)
    }

    /// `N_i^+(k)`: nodes other than `i` reachable from `i` within `k` hops.
    pub fn k_out_neighborhood(&self, i: NodeId, k: usize) -> Result<NodeSet, GraphError> {
        self.check_node(i)?;
        if k == 0 {
            return Err(GraphError::ZeroDepth);
        }
        Ok(bfs(&self.out_adj, i, NodeSet::EMPTY, k).without(i))
    }

    /// The k-hop in-neighborhood of `i` computed in the subgraph induced by `V - removed`.
    pub fn reach_k(&self, i: NodeId, removed: NodeSet, k: usize) -> Result<NodeSet, GraphError> {
        self.check_node(i)?;
        if k == 0 {
            return Err(GraphError::ZeroDepth);
        }
        if removed.contains(i) {
            return Err(GraphError::NodeRemoved { node: i.0 });
        }
        Ok(bfs(&self.in_adj, i, removed, k).without(i))
    }

    /// Hop distance from every node to `target` (None when unreachable).
    pub fn distances_to(&self, target: NodeId) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n];
        dist[target.0] = Some(0);
        let mut queue = VecDeque::from([target]);
        while let Some(v) = queue.pop_front() {
            let d = dist[v.0].unwrap_or(0);
            for u in self.in_adj[v.0] {
                if dist[u.0].is_none() {
                    dist[u.0] = Some(d + 1);
                    queue.push_back(u);
                }
            }
        }
        dist
    }

    /// Subgraph made of every edge lying on some path of length at most `k`
    /// into `i`: exactly the topology an iterative k-hop node may know.
    pub fn k_hop_in_view(&self, i: NodeId, k: usize) -> Result<Subgraph, GraphError> {
        let hood = self.k_in_neighborhood(i, k)?;
        let dist = self.distances_to(i);
        let mut view = Subgraph::new(self.n);
        view.add_node(i);
        for (u, v) in self.edges() {
            if let (Some(du), Some(dv)) = (dist[u.0], dist[v.0]) {
                // (u, v) lies on a <=k path into i iff 1 + dist(v) <= k and u can start it
                if (v == i || hood.contains(v)) && hood.contains(u) && dv < k && du <= k {
                    view.add_edge(u, v);
                }
            }
        }
        Ok(view)
    }
}

/// Breadth-first search over `adj` from `start`, never entering `blocked`,
/// returning every node within `depth` hops (including `start`).
fn bfs(adj: &[NodeSet], start: NodeId, blocked: NodeSet, depth: usize) -> NodeSet {
    let mut seen = NodeSet::singleton(start);
    let mut frontier = seen;
    for _ in 0..depth {
        let mut next = NodeSet::EMPTY;
        for v in frontier {
            next = next.union(adj[v.0]);
        }
        next = next.difference(seen).difference(blocked);
        if next.is_empty() {
            break;
        }
        seen = seen.union(next);
        frontier = next;
    }
    seen
}

impl std::fmt::Debug for DiGraph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let edges: Vec<_> = self
            .edges()
            .filter(|(a, b)| !self.undirected || a < b)
            .map(|(a, b)| format!("{}{}{}", self.name(a), if self.undirected { "-" } else { "->" }, self.name(b)))
            .collect();
        write!(f, "{}({}) {:?}", if self.undirected { "graph" } else { "digraph" }, self.n, edges)
    }
}

/// A labeled split of the node set into `L`, `C`, `R`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Partition {
    #[serde(rename = "L")]
    pub left: NodeSet,
    #[serde(rename = "C")]
    pub center: NodeSet,
    #[serde(rename = "R")]
    pub right: NodeSet,
}

impl Partition {
    /// Validates disjointness, coverage of `0..n` and non-empty `L` and `R`.
    pub fn new(n: usize, left: NodeSet, center: NodeSet, right: NodeSet) -> Result<Self, GraphError> {
        let all = NodeSet::full(n);
        let ok = left.is_disjoint(center)
            && left.is_disjoint(right)
            && center.is_disjoint(right)
            && left.union(center).union(right) == all
            && !left.is_empty()
            && !right.is_empty();
        if ok {
            Ok(Partition { left, center, right })
        } else {
            Err(GraphError::BadParameters(format!(
                "not a valid L/C/R partition of {n} nodes: L={left:?} C={center:?} R={right:?}"
            )))
        }
    }

    pub fn swapped(self) -> Self {
        Partition { left: self.right, center: self.center, right: self.left }
    }
}
