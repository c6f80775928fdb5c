//! Topologies used throughout the test corpus and the reproduction commands.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{DiGraph, GraphError};

fn letter_labels(n: usize, upper: bool) -> impl Iterator<Item = (usize, String)> {
    let base = if upper { b'A' } else { b'a' };
    (0..n.min(26)).map(move |i| (i, char::from(base + i as u8).to_string()))
}

/// Bidirectional cycle `0 - 1 - ... - (n-1) - 0` (a single edge for `n = 2`), labeled `a, b, c, ...` when `n <= 26`.
pub fn ring(n: usize) -> Result<DiGraph, GraphError> {
    let g = DiGraph::undirected_from_edges(n, (0..n).map(|i| (i, (i + 1) % n)))?;
    if n <= 26 {
        g.with_labels(letter_labels(n, false))
    } else {
        Ok(g)
    }
}

/// Complete undirected graph `K_n`.
pub fn complete(n: usize) -> Result<DiGraph, GraphError> {
    DiGraph::undirected_from_edges(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))))
}

/// Two complete cliques on `0..n/2` and `n/2..n`, joined by the matching
/// `i - (n/2 + i)` for `i < bridges`.
pub fn two_cliques(n: usize, bridges: usize) -> Result<DiGraph, GraphError> {
    if n < 4 || !n.is_multiple_of(2) {
        return Err(GraphError::BadParameters(format!("two_cliques needs an even n >= 4, got {n}")));
    }
    let half = n / 2;
    if bridges == 0 || bridges > half {
        return Err(GraphError::BadParameters(format!("two_cliques needs 1 <= bridges <= {half}, got {bridges}")));
    }
    let clique = |off: usize| (0..half).flat_map(move |i| (i + 1..half).map(move |j| (off + i, off + j)));
    let edges = clique(0).chain(clique(half)).chain((0..bridges).map(|i| (i, half + i)));
    DiGraph::undirected_from_edges(n, edges)
}

/// Four-node example: bidirectional `A-B`, `A-C`, `C-D`, `B-D` plus the
/// single directed edge `(C, B)`. Indices: A=0, B=1, C=2, D=3.
pub fn example_g() -> DiGraph {
    let (a, b, c, d) = (0, 1, 2, 3);
    let mut edges = Vec::new();
    for (x, y) in [(a, b), (a, c), (c, d), (b, d)] {
        edges.push((x, y));
        edges.push((y, x));
    }
    edges.push((c, b));
    DiGraph::from_edges(4, edges)
        .and_then(|g| g.with_labels(letter_labels(4, true)))
        .expect("example graph is well formed")
}

/// Builds a graph from a short spec: `ring4`, `ring:N`, `complete:N`,
/// `two-cliques:N:B`, `example-g`, `random:N:P:SEED`, `random-undirected:N:P:SEED`.
pub fn builtin(spec: &str) -> Result<DiGraph, GraphError> {
    let bad = || GraphError::BadParameters(format!("unknown graph spec {spec:?}"));
    let parts: Vec<&str> = spec.trim().split(':').collect();
    let int = |s: &str| s.parse::<usize>().map_err(|_| bad());
    match parts.as_slice() {
        ["ring4"] => ring(4),
        ["example-g" | "exampleG"] => Ok(example_g()),
        ["ring", n] => ring(int(n)?),
        ["complete", n] => complete(int(n)?),
        ["two-cliques", n, b] => two_cliques(int(n)?, int(b)?),
        ["random", n, p, seed] | ["random-undirected", n, p, seed] => {
            let p: f64 = p.parse().map_err(|_| bad())?;
            let seed: u64 = seed.parse().map_err(|_| bad())?;
            if parts[0] == "random" {
                random_digraph(int(n)?, p, seed)
            } else {
                random_undirected(int(n)?, p, seed)
            }
        }
        _ => Err(bad()),
    }
}

fn check_probability(p: f64) -> Result<(), GraphError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(GraphError::BadParameters(format!("edge probability {p} not in [0, 1]")))
    }
}

/// Each ordered pair `(i, j)`, `i != j`, is an edge independently with probability `p`.
pub fn random_digraph(n: usize, p: f64, seed: u64) -> Result<DiGraph, GraphError> {
    check_probability(p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j && rng.random_bool(p) {
                edges.push((i, j));
            }
        }
    }
    DiGraph::from_edges(n, edges)
}

/// Each unordered pair is an (undirected) edge independently with probability `p`.
pub fn random_undirected(n: usize, p: f64, seed: u64) -> Result<DiGraph, GraphError> {
    check_probability(p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(p) {
                edges.push((i, j));
            }
        }
    }
    DiGraph::undirected_from_edges(n, edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::NodeId;

    #[test]
    fn edge_counts() {
        assert_eq!(ring(4).unwrap().edge_count(), 8);
        assert_eq!(complete(5).unwrap().edge_count(), 20);
        assert_eq!(example_g().edge_count(), 9);
        // 2 * C(4,2) * 2 + 3 * 2
        assert_eq!(two_cliques(8, 3).unwrap().edge_count(), 30);
    }

    #[test]
    fn example_graph_shape() {
        let g = example_g();
        let id = |s| g.node_by_name(s).unwrap();
        assert!(g.has_edge(id("C"), id("B")));
        assert!(!g.has_edge(id("B"), id("C")));
        assert_eq!(g.in_neighbors(id("D")), [id("B"), id("C")].into_iter().collect());
        assert!(!g.is_undirected());
    }

    #[test]
    fn parameter_errors() {
        assert!(two_cliques(7, 1).is_err());
        assert!(two_cliques(8, 0).is_err());
        assert!(two_cliques(8, 5).is_err());
        assert!(random_digraph(5, 1.5, 0).is_err());
        assert!(ring(1).is_err());
        assert_eq!(ring(2).unwrap().edge_count(), 2);
    }

    #[test]
    fn builtin_specs() {
        assert_eq!(builtin("ring4").unwrap(), ring(4).unwrap());
        assert_eq!(builtin("two-cliques:8:3").unwrap(), two_cliques(8, 3).unwrap());
        assert_eq!(builtin("example-g").unwrap(), example_g());
        assert_eq!(builtin("random:6:0.3:9").unwrap(), random_digraph(6, 0.3, 9).unwrap());
        assert!(builtin("random-undirected:6:0.3:9").unwrap().is_undirected());
        assert!(builtin("ring:x").is_err());
        assert!(builtin("petersen").is_err());
    }

    #[test]
    fn random_is_seeded() {
        let a = random_digraph(7, 0.4, 11).unwrap();
        let b = random_digraph(7, 0.4, 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(random_digraph(5, 0.0, 1).unwrap().edge_count(), 0);
        assert_eq!(random_digraph(5, 1.0, 1).unwrap().edge_count(), 20);
        let u = random_undirected(6, 0.5, 3).unwrap();
        assert!(u.is_undirected());
        assert!(u.edges().all(|(x, y)| u.has_edge(y, x)));
        assert!(!u.has_edge(NodeId(0), NodeId(0)));
    }
}
