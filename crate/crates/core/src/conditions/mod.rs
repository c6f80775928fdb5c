//! Arrow relations between node sets and the partition conditions built on them.
//!
//! `A -> B` holds when some node of `B` has at least `f + 1` in-neighbors in `A`;
//! `A ->_k B` relaxes this to `f + 1` node-disjoint paths of length at most `k`.
//! A graph satisfies the k-hop condition when every partition `(L, C, R)` with
//! non-empty `L` and `R` has `L ∪ C ->_k R` or `R ∪ C ->_k L`. The unbounded
//! variant uses the set-level relation: `R` has `f + 1` distinct in-neighbors
//! in `L ∪ C`.

mod oracle;
mod propagation;

pub use oracle::{oracle_kcca, ORACLE_GUARD};
pub use propagation::{propagates, PropagationSequence};

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::graph::{has_disjoint_bounded_paths, DiGraph, GraphError, NodeId, NodeSet, Partition};

/// Largest graph the partition enumeration accepts.
pub const ENUMERATION_GUARD: usize = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConditionError {
    #[error("node sets must be non-empty")]
    EmptySet,
    #[error("node sets must be disjoint")]
    Overlap,
    #[error("node sets must cover every node")]
    NotCovering,
    #[error("relay depth must be at least 1")]
    ZeroDepth,
    #[error("check needs at most {guard} nodes, graph has {n}")]
    GuardExceeded { n: usize, guard: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Outcome of a condition check. `k = None` is the unbounded (set-level) condition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub holds: bool,
    #[serde(serialize_with = "serialize_depth")]
    pub k: Option<usize>,
    pub f: usize,
    pub witness: Option<Partition>,
}

fn serialize_depth<S: Serializer>(k: &Option<usize>, s: S) -> Result<S::Ok, S::Error> {
    match k {
        Some(k) => s.serialize_u64(*k as u64),
        None => s.serialize_str("cca"),
    }
}

impl Verdict {
    pub fn condition_name(&self) -> String {
        match self.k {
            Some(k) => format!("{k}-CCA"),
            None => "CCA".to_string(),
        }
    }
}

fn check_pair(g: &DiGraph, a: NodeSet, b: NodeSet) -> Result<(), ConditionError> {
    let all = g.nodes();
    if a.is_empty() || b.is_empty() {
        return Err(ConditionError::EmptySet);
    }
    if !a.is_disjoint(b) {
        return Err(ConditionError::Overlap);
    }
    if let Some(bad) = a.union(b).difference(all).first() {
        return Err(GraphError::InvalidNode { node: bad.0, n: g.n() }.into());
    }
    Ok(())
}

/// `A -> B`: some node of `B` has at least `f + 1` in-neighbors in `A`.
pub fn arrow(g: &DiGraph, a: NodeSet, b: NodeSet, f: usize) -> Result<bool, ConditionError> {
    check_pair(g, a, b)?;
    Ok(b.iter().any(|i| g.in_neighbors(i).intersection(a).len() > f))
}

/// `in(A ->_k B)`: the nodes of `B` reached by `f + 1` disjoint `<= k` paths from `A`.
pub fn in_set_k(g: &DiGraph, a: NodeSet, b: NodeSet, f: usize, k: usize) -> Result<NodeSet, ConditionError> {
    check_pair(g, a, b)?;
    if k == 0 {
        return Err(ConditionError::ZeroDepth);
    }
    let mut out = NodeSet::EMPTY;
    for i in b {
        if absorbs(g, a, i, f, k)? {
            out.insert(i);
        }
    }
    Ok(out)
}

/// `A ->_k B`. With `k = 1` this is the same relation as [`arrow`].
pub fn arrow_k(g: &DiGraph, a: NodeSet, b: NodeSet, f: usize, k: usize) -> Result<bool, ConditionError> {
    check_pair(g, a, b)?;
    if k == 0 {
        return Err(ConditionError::ZeroDepth);
    }
    for i in b {
        if absorbs(g, a, i, f, k)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Whether `i` has `f + 1` disjoint `<= k` paths from `a`.
fn absorbs(g: &DiGraph, a: NodeSet, i: NodeId, f: usize, k: usize) -> Result<bool, ConditionError> {
    if g.in_neighbors(i).len() <= f {
        return Ok(false);
    }
    if k == 1 {
        return Ok(g.in_neighbors(i).intersection(a).len() > f);
    }
    Ok(has_disjoint_bounded_paths(g, a, i, k, f + 1)?)
}

/// `L ∪ C ⇒ R` with threshold `f + 1`: `R` has `f + 1` distinct in-neighbors outside itself.
pub fn point_relation(g: &DiGraph, a: NodeSet, b: NodeSet, threshold: usize) -> bool {
    g.in_neighbors_of_set(b).intersection(a).len() >= threshold
}

/// Whether the nodes outside `target` reach into it strongly enough; the
/// condition for a partition only depends on which side is the target.
trait SideTest {
    fn covered(&mut self, g: &DiGraph, target: NodeSet) -> Result<bool, ConditionError>;
}

struct Hops {
    f: usize,
    k: usize,
}

impl SideTest for Hops {
    fn covered(&mut self, g: &DiGraph, target: NodeSet) -> Result<bool, ConditionError> {
        arrow_k(g, g.nodes().difference(target), target, self.f, self.k)
    }
}

struct SetLevel {
    f: usize,
}

impl SideTest for SetLevel {
    fn covered(&mut self, g: &DiGraph, target: NodeSet) -> Result<bool, ConditionError> {
        Ok(point_relation(g, g.nodes().difference(target), target, self.f + 1))
    }
}

/// Memo of `covered` over all subsets, filled on demand.
struct Table<T> {
    test: T,
    memo: Vec<u8>,
}

impl<T: SideTest> Table<T> {
    fn covered(&mut self, g: &DiGraph, set: NodeSet) -> Result<bool, ConditionError> {
        let idx = set.bits() as usize;
        match self.memo[idx] {
            1 => Ok(false),
            2 => Ok(true),
            _ => {
                let v = self.test.covered(g, set)?;
                self.memo[idx] = if v { 2 } else { 1 };
                Ok(v)
            }
        }
    }
}

/// Lexicographic search over assignments (node 0 most significant; L < C < R).
/// Only assignments whose first non-C node is in L are visited: the mirrored
/// partition poses the same disjunction and always comes later in the order.
fn first_violation<T: SideTest>(
    g: &DiGraph,
    table: &mut Table<T>,
    node: usize,
    left: NodeSet,
    center: NodeSet,
    right: NodeSet,
) -> Result<Option<Partition>, ConditionError> {
    let n = g.n();
    if node == n {
        if left.is_empty() || right.is_empty() {
            return Ok(None);
        }
        if table.covered(g, right)? || table.covered(g, left)? {
            return Ok(None);
        }
        return Ok(Some(Partition { left, center, right }));
    }
    let v = NodeId(node);
    if let Some(p) = first_violation(g, table, node + 1, left.with(v), center, right)? {
        return Ok(Some(p));
    }
    if let Some(p) = first_violation(g, table, node + 1, left, center.with(v), right)? {
        return Ok(Some(p));
    }
    if left.is_empty() {
        return Ok(None);
    }
    first_violation(g, table, node + 1, left, center, right.with(v))
}

fn enumerate<T: SideTest>(g: &DiGraph, test: T) -> Result<Option<Partition>, ConditionError> {
    if g.n() > ENUMERATION_GUARD {
        return Err(ConditionError::GuardExceeded { n: g.n(), guard: ENUMERATION_GUARD });
    }
    let mut table = Table { test, memo: vec![0; 1 << g.n()] };
    first_violation(g, &mut table, 0, NodeSet::EMPTY, NodeSet::EMPTY, NodeSet::EMPTY)
}

/// Checks the k-hop partition condition; the witness is the lexicographically
/// first violating partition.
pub fn check_kcca(g: &DiGraph, f: usize, k: usize) -> Result<Verdict, ConditionError> {
    if k == 0 {
        return Err(ConditionError::ZeroDepth);
    }
    let witness = enumerate(g, Hops { f, k })?;
    Ok(Verdict { holds: witness.is_none(), k: Some(k), f, witness })
}

/// Checks the unbounded condition against the set-level in-neighbor relation.
pub fn check_cca(g: &DiGraph, f: usize) -> Result<Verdict, ConditionError> {
    let witness = enumerate(g, SetLevel { f })?;
    Ok(Verdict { holds: witness.is_none(), k: None, f, witness })
}

/// Whether `witness` violates both directions of the checked condition.
pub fn witness_violates(g: &DiGraph, verdict: &Verdict) -> Result<bool, ConditionError> {
    let Some(p) = verdict.witness else {
        return Ok(false);
    };
    let lc = p.left.union(p.center);
    let rc = p.right.union(p.center);
    Ok(match verdict.k {
        Some(k) => !arrow_k(g, lc, p.right, verdict.f, k)? && !arrow_k(g, rc, p.left, verdict.f, k)?,
        None => !point_relation(g, lc, p.right, verdict.f + 1) && !point_relation(g, rc, p.left, verdict.f + 1),
    })
}

/// Largest `f` for which the condition holds (`None` if it fails already at `f = 0`).
pub fn max_f(g: &DiGraph, k: Option<usize>) -> Result<Option<usize>, ConditionError> {
    let mut best = None;
    for f in 0..g.n() {
        let v = match k {
            Some(k) => check_kcca(g, f, k)?,
            None => check_cca(g, f)?,
        };
        if !v.holds {
            break;
        }
        best = Some(f);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{complete, random_digraph, random_undirected, ring, two_cliques, vertex_connectivity};

    fn set(g: &DiGraph, names: &[&str]) -> NodeSet {
        names.iter().map(|s| g.node_by_name(s).unwrap()).collect()
    }

    fn path3() -> DiGraph {
        DiGraph::from_edges(3, [(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn arrow_examples() {
        let k3 = complete(3).unwrap();
        assert!(arrow(&k3, NodeSet::from([0, 1]), NodeSet::from([2]), 1).unwrap());
        let g = ring(4).unwrap();
        assert!(!arrow(&g, set(&g, &["a", "b"]), set(&g, &["c", "d"]), 1).unwrap());
        assert!(arrow(&path3(), NodeSet::from([0]), NodeSet::from([1]), 0).unwrap());
        assert_eq!(arrow(&g, NodeSet::from([0, 1]), NodeSet::from([1]), 0), Err(ConditionError::Overlap));
        assert_eq!(arrow(&g, NodeSet::EMPTY, NodeSet::from([1]), 0), Err(ConditionError::EmptySet));
    }

    #[test]
    fn arrow_k_examples() {
        let g = ring(4).unwrap();
        let (ab, cd) = (set(&g, &["a", "b"]), set(&g, &["c", "d"]));
        assert!(arrow_k(&g, ab, cd, 1, 2).unwrap());
        assert!(!arrow_k(&g, ab, cd, 1, 1).unwrap());
        assert!(arrow_k(&path3(), NodeSet::from([0]), NodeSet::from([1, 2]), 0, 1).unwrap());
        assert_eq!(arrow_k(&g, ab, cd, 1, 0), Err(ConditionError::ZeroDepth));
    }

    #[test]
    fn in_set_examples() {
        let g = ring(4).unwrap();
        assert_eq!(in_set_k(&g, set(&g, &["a", "b"]), set(&g, &["c", "d"]), 1, 2).unwrap(), set(&g, &["c", "d"]));
        for k in 1..=3 {
            assert_eq!(in_set_k(&path3(), NodeSet::from([0]), NodeSet::from([1, 2]), 1, k).unwrap(), NodeSet::EMPTY);
        }
        assert_eq!(
            in_set_k(&complete(3).unwrap(), NodeSet::from([0, 1]), NodeSet::from([2]), 1, 1).unwrap(),
            NodeSet::from([2])
        );
    }

    #[test]
    fn ring_verdicts() {
        let g = ring(4).unwrap();
        let v = check_kcca(&g, 1, 1).unwrap();
        assert!(!v.holds);
        let w = v.witness.unwrap();
        assert_eq!((w.left, w.center, w.right), (set(&g, &["a", "b"]), NodeSet::EMPTY, set(&g, &["c", "d"])));
        assert!(witness_violates(&g, &v).unwrap());
        assert!(check_kcca(&g, 1, 2).unwrap().holds);
        assert!(check_cca(&g, 1).unwrap().holds);
        let v2 = check_cca(&g, 2).unwrap();
        assert!(!v2.holds);
        assert!(witness_violates(&g, &v2).unwrap());
    }

    #[test]
    fn complete_graphs() {
        assert!(check_kcca(&complete(3).unwrap(), 1, 1).unwrap().holds);
        assert!(check_kcca(&complete(5).unwrap(), 2, 1).unwrap().holds);
        assert!(!check_kcca(&complete(4).unwrap(), 2, 1).unwrap().holds);
    }

    #[test]
    fn verdict_record_shape() {
        let g = ring(4).unwrap();
        let json = serde_json::to_value(check_kcca(&g, 1, 1).unwrap()).unwrap();
        assert_eq!(json["holds"], false);
        assert_eq!(json["k"], 1);
        assert_eq!(json["witness"]["L"], serde_json::json!([0, 1]));
        assert_eq!(json["witness"]["C"], serde_json::json!([]));
        let json = serde_json::to_value(check_cca(&g, 1).unwrap()).unwrap();
        assert_eq!(json["k"], "cca");
        assert!(json["witness"].is_null());
    }

    #[test]
    fn two_cliques_depth_helps() {
        let g = two_cliques(8, 3).unwrap();
        assert!(!check_kcca(&g, 1, 1).unwrap().holds);
        assert!(check_kcca(&g, 1, 2).unwrap().holds);
        assert_eq!(max_f(&g, Some(1)).unwrap(), Some(0));
    }

    #[test]
    fn guard() {
        let g = ring(17).unwrap();
        assert!(matches!(check_cca(&g, 1), Err(ConditionError::GuardExceeded { .. })));
    }

    #[test]
    fn depth_monotone_and_unbounded_matches_n() {
        for seed in 0..40 {
            let g = random_digraph(5, 0.45, seed).unwrap();
            for f in 0..=2 {
                let verdicts: Vec<bool> = (1..=5).map(|k| check_kcca(&g, f, k).unwrap().holds).collect();
                assert!(verdicts.windows(2).all(|w| !w[0] || w[1]), "seed {seed} f {f}: {verdicts:?}");
                assert_eq!(check_cca(&g, f).unwrap().holds, verdicts[4], "seed {seed} f {f}");
            }
        }
    }

    #[test]
    fn undirected_connectivity_equivalence() {
        for seed in 0..40 {
            let n = 3 + seed as usize % 4;
            let g = random_undirected(n, 0.6, seed).unwrap();
            let kappa = vertex_connectivity(&g).unwrap();
            for f in 0..=2 {
                assert_eq!(check_cca(&g, f).unwrap().holds, kappa > f && n > 2 * f, "seed {seed} f {f}");
            }
        }
    }
}
