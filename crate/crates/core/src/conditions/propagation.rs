use serde::Serialize;

use super::{check_pair, in_set_k, ConditionError};
use crate::graph::{DiGraph, NodeSet};

/// The absorption run `A_{t+1} = A_t ∪ in(A_t ->_k B_t)`, `B_{t+1} = B_t - in(...)`,
/// stored as the pairs `(A_0, B_0), ..., (A_l, B_l)` with `B_l` empty.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PropagationSequence {
    pub steps: Vec<(NodeSet, NodeSet)>,
}

impl PropagationSequence {
    /// Number of absorption steps.
    pub fn l(&self) -> usize {
        self.steps.len() - 1
    }
}

/// Runs the absorption process from `(a, b)`; `None` when it stalls with `B` non-empty.
pub fn propagates(
    g: &DiGraph,
    a: NodeSet,
    b: NodeSet,
    f: usize,
    k: usize,
) -> Result<Option<PropagationSequence>, ConditionError> {
    check_pair(g, a, b)?;
    if a.union(b) != g.nodes() {
        return Err(ConditionError::NotCovering);
    }
    let (mut a, mut b) = (a, b);
    let mut steps = vec![(a, b)];
    while !b.is_empty() {
        let absorbed = in_set_k(g, a, b, f, k)?;
        if absorbed.is_empty() {
            return Ok(None);
        }
        a = a.union(absorbed);
        b = b.difference(absorbed);
        steps.push((a, b));
    }
    Ok(Some(PropagationSequence { steps }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditions::check_kcca;
    use crate::graph::{complete, random_digraph, ring};

    #[test]
    fn examples() {
        let k3 = complete(3).unwrap();
        let seq = propagates(&k3, NodeSet::from([0, 1]), NodeSet::from([2]), 1, 1).unwrap().unwrap();
        assert_eq!(seq.l(), 1);
        assert_eq!(seq.steps.last(), Some(&(NodeSet::full(3), NodeSet::EMPTY)));

        let g = ring(4).unwrap();
        let seq = propagates(&g, NodeSet::from([0, 1]), NodeSet::from([2, 3]), 1, 2).unwrap().unwrap();
        assert_eq!(seq.l(), 1);

        let path = DiGraph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        assert_eq!(propagates(&path, NodeSet::from([0]), NodeSet::from([1, 2]), 1, 3).unwrap(), None);
        assert_eq!(propagates(&path, NodeSet::from([0]), NodeSet::from([1]), 0, 1), Err(ConditionError::NotCovering));
    }

    #[test]
    fn chain_takes_several_steps() {
        let path = DiGraph::from_edges(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let seq = propagates(&path, NodeSet::from([0]), NodeSet::from([1, 2, 3]), 0, 1).unwrap().unwrap();
        assert_eq!(seq.l(), 3);
        assert_eq!(seq.steps[1], (NodeSet::from([0, 1]), NodeSet::from([2, 3])));
    }

    #[test]
    fn dichotomy_on_random_graphs() {
        for seed in 0..30 {
            let g = random_digraph(5, 0.6, seed).unwrap();
            for (f, k) in [(0, 1), (1, 1), (1, 2), (1, 5)] {
                if !check_kcca(&g, f, k).unwrap().holds {
                    continue;
                }
                for bits in 1..(1u128 << 5) - 1 {
                    let a = NodeSet::from_bits(bits);
                    let b = g.nodes().difference(a);
                    let one = propagates(&g, a, b, f, k).unwrap();
                    let other = propagates(&g, b, a, f, k).unwrap();
                    assert!(one.is_some() || other.is_some(), "seed {seed} A={a:?}");
                    for s in one.iter().chain(other.iter()) {
                        assert!(s.l() + f < g.n());
                    }
                }
            }
        }
    }
}
