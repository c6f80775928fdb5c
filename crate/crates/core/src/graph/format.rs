//! Line-oriented graph interchange format.
//!
//! ```text
//! # comment
//! digraph 4          (or: graph 4)
//! label 0 A
//! 0 1
//! 1 2
//! ```
//!
//! For `graph`, each undirected edge is listed once and symmetrized on load.

use std::fmt::Write as _;

use super::{DiGraph, GraphError};

fn parse_err(line: usize, msg: impl Into<String>) -> GraphError {
    GraphError::Parse { line, msg: msg.into() }
}

fn parse_index(tok: &str, line: usize) -> Result<usize, GraphError> {
    tok.parse().map_err(|_| parse_err(line, format!("expected a node index, found {tok:?}")))
}

pub fn parse_graph(text: &str) -> Result<DiGraph, GraphError> {
    let mut header: Option<(bool, usize)> = None;
    let mut edges = Vec::new();
    let mut labels = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        match (header, toks.as_slice()) {
            (None, [kind @ ("digraph" | "graph"), n]) => {
                let n = n.parse().map_err(|_| parse_err(line, format!("invalid node count {n:?}")))?;
                header = Some((*kind == "graph", n));
            }
            (None, _) => {
                return Err(parse_err(line, "expected header `digraph <n>` or `graph <n>`"));
            }
            (Some(_), ["label", i, name @ ..]) if !name.is_empty() => {
                labels.push((parse_index(i, line)?, name.join(" ")));
            }
            (Some((_, n)), [a, b]) => {
                let (a, b) = (parse_index(a, line)?, parse_index(b, line)?);
                if a >= n || b >= n {
                    return Err(parse_err(line, format!("edge ({a}, {b}) out of range for {n} nodes")));
                }
                if a == b {
                    return Err(parse_err(line, format!("self-loop on node {a}")));
                }
                edges.push((a, b));
            }
            (Some(_), _) => return Err(parse_err(line, format!("unrecognized line {content:?}"))),
        }
    }

    let (undirected, n) = header.ok_or_else(|| parse_err(1, "missing header"))?;
    let g = if undirected { DiGraph::undirected_from_edges(n, edges) } else { DiGraph::from_edges(n, edges) }
        .map_err(|e| parse_err(1, e.to_string()))?;
    g.with_labels(labels).map_err(|e| parse_err(1, e.to_string()))
}

pub fn write_graph(g: &DiGraph) -> String {
    let mut out = String::new();
    let kind = if g.is_undirected() { "graph" } else { "digraph" };
    let _ = writeln!(out, "{kind} {}", g.n());
    for i in g.node_ids() {
        if let Some(l) = g.label(i) {
            let _ = writeln!(out, "label {} {l}", i.0);
        }
    }
    for (a, b) in g.edges() {
        if !g.is_undirected() || a < b {
            let _ = writeln!(out, "{} {}", a.0, b.0);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{example_g, random_digraph, random_undirected, ring};
    use proptest::prelude::*;

    #[test]
    fn parse_ring_with_comments() {
        let text = "# four ring\ngraph 4\nlabel 0 a\n0 1\n1 2 # tail\n2 3\n3 0\n";
        let g = parse_graph(text).unwrap();
        assert!(g.is_undirected());
        assert_eq!(g.edge_count(), 8);
        assert_eq!(g.label(crate::graph::NodeId(0)), Some("a"));
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert_eq!(
            parse_graph("digraph 3\n0 1\n0 7\n"),
            Err(GraphError::Parse { line: 3, msg: "edge (0, 7) out of range for 3 nodes".into() })
        );
        assert!(matches!(parse_graph("0 1\n"), Err(GraphError::Parse { line: 1, .. })));
        assert!(matches!(parse_graph("digraph 3\n1 x\n"), Err(GraphError::Parse { line: 2, .. })));
        assert!(matches!(parse_graph("digraph 3\n1 1\n"), Err(GraphError::Parse { line: 2, .. })));
        assert!(matches!(parse_graph(""), Err(GraphError::Parse { .. })));
    }

    #[test]
    fn known_graphs_roundtrip() {
        for g in [ring(4).unwrap(), example_g()] {
            assert_eq!(parse_graph(&write_graph(&g)).unwrap(), g);
        }
    }

    proptest! {
        #[test]
        fn random_roundtrip(n in 2usize..12, p in 0.0f64..1.0, seed in any::<u64>(), undirected in any::<bool>()) {
            let g = if undirected {
                random_undirected(n, p, seed).unwrap()
            } else {
                random_digraph(n, p, seed).unwrap()
            };
            prop_assert_eq!(parse_graph(&write_graph(&g)).unwrap(), g);
        }
    }
}
