//! Brute-force re-derivation of the k-hop condition, kept deliberately naive:
//! every simple path is listed, every disjoint family is tried, and every
//! partition is visited without symmetry pruning.

use std::collections::HashMap;

use super::{ConditionError, Verdict};
use crate::graph::{DiGraph, NodeId, NodeSet, Partition};

pub const ORACLE_GUARD: usize = 10;

/// All simple paths of length `1..=k` starting anywhere in `sources` and ending
/// at `target`, as node sets without the target (orderings collapse).
fn all_paths(g: &DiGraph, sources: NodeSet, target: NodeId, k: usize) -> Vec<NodeSet> {
    let mut out = Vec::new();
    for s in sources {
        let mut walk = vec![s];
        extend(g, target, k, &mut walk, &mut out);
    }
    out.sort_by_key(|p| p.bits());
    out.dedup();
    out
}

fn extend(g: &DiGraph, target: NodeId, k: usize, walk: &mut Vec<NodeId>, out: &mut Vec<NodeSet>) {
    let last = *walk.last().expect("walk starts non-empty");
    if walk.len() > k {
        return;
    }
    for next in g.out_neighbors(last) {
        if next == target {
            out.push(walk.iter().copied().collect());
        } else if !walk.contains(&next) {
            walk.push(next);
            extend(g, target, k, walk, out);
            walk.pop();
        }
    }
}

/// Size of the largest pairwise-disjoint family, capped at `cap`.
fn largest_family(paths: &[NodeSet], used: NodeSet, from: usize, cap: usize) -> usize {
    if cap == 0 {
        return 0;
    }
    let mut best = 0;
    for (idx, p) in paths.iter().enumerate().skip(from) {
        if p.is_disjoint(used) {
            best = best.max(1 + largest_family(paths, used.union(*p), idx + 1, cap - 1));
            if best == cap {
                break;
            }
        }
    }
    best
}

struct Oracle<'a> {
    g: &'a DiGraph,
    f: usize,
    k: usize,
    cache: HashMap<(u128, usize), bool>,
}

impl Oracle<'_> {
    fn node_reached(&mut self, a: NodeSet, i: NodeId) -> bool {
        let (g, f, k) = (self.g, self.f, self.k);
        *self.cache.entry((a.bits(), i.0)).or_insert_with(|| {
            let paths = all_paths(g, a, i, k);
            largest_family(&paths, NodeSet::EMPTY, 0, f + 1) > f
        })
    }

    fn arrow(&mut self, a: NodeSet, b: NodeSet) -> bool {
        b.iter().any(|i| self.node_reached(a, i))
    }
}

/// Independent check of the k-hop condition; agrees with `check_kcca`, including the witness.
pub fn oracle_kcca(g: &DiGraph, f: usize, k: usize) -> Result<Verdict, ConditionError> {
    let n = g.n();
    if n > ORACLE_GUARD {
        return Err(ConditionError::GuardExceeded { n, guard: ORACLE_GUARD });
    }
    if k == 0 {
        return Err(ConditionError::ZeroDepth);
    }
    let mut oracle = Oracle { g, f, k, cache: HashMap::new() };
    let total = 3usize.pow(n as u32);
    for code in 0..total {
        // base-3 digits with node 0 most significant: 0 = L, 1 = C, 2 = R
        let (mut left, mut center, mut right) = (NodeSet::EMPTY, NodeSet::EMPTY, NodeSet::EMPTY);
        let mut rest = code;
        for node in (0..n).rev() {
            match rest % 3 {
                0 => left.insert(NodeId(node)),
                1 => center.insert(NodeId(node)),
                _ => right.insert(NodeId(node)),
            };
            rest /= 3;
        }
        if left.is_empty() || right.is_empty() {
            continue;
        }
        let violated = !oracle.arrow(left.union(center), right) && !oracle.arrow(right.union(center), left);
        if violated {
            return Ok(Verdict { holds: false, k: Some(k), f, witness: Some(Partition { left, center, right }) });
        }
    }
    Ok(Verdict { holds: true, k: Some(k), f, witness: None })
}
