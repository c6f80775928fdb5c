//! Adversary scripts: how long each message takes and who crashes when.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::SimError;
use crate::graph::{DiGraph, NodeId, NodeSet};

/// One scripted delay; `None` fields match anything. Rounds are inclusive.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DelayRule {
    pub from: Option<NodeId>,
    pub to: Option<NodeId>,
    pub phase: Option<usize>,
    pub rounds: Option<(u64, u64)>,
    pub delay: u64,
}

impl DelayRule {
    fn matches(&self, from: NodeId, to: NodeId, round: u64, phase: usize) -> bool {
        self.from.is_none_or(|x| x == from)
            && self.to.is_none_or(|x| x == to)
            && self.phase.is_none_or(|x| x == phase)
            && self.rounds.is_none_or(|(lo, hi)| (lo..=hi).contains(&round))
    }
}

/// Delivery delay, in rounds, of a message on edge `(from, to)` sent at a given
/// round for a given phase (0 for learning traffic).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DelayScenario {
    Constant {
        delay: u64,
    },
    PerEdge {
        #[serde(serialize_with = "edge_list")]
        table: BTreeMap<(NodeId, NodeId), u64>,
        default: u64,
    },
    SeededRandom {
        min: u64,
        max: u64,
        seed: u64,
    },
    /// First matching rule wins.
    Script {
        rules: Vec<DelayRule>,
        default: u64,
    },
}

impl Default for DelayScenario {
    fn default() -> Self {
        DelayScenario::Constant { delay: 1 }
    }
}

fn edge_list<S: serde::Serializer>(table: &BTreeMap<(NodeId, NodeId), u64>, s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(table.iter().map(|(&(from, to), &delay)| (from, to, delay)))
}

fn mix(mut h: u64, x: u64) -> u64 {
    h ^= x.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_add(h << 6).wrapping_add(h >> 2);
    h.wrapping_mul(0xbf58_476d_1ce4_e5b9)
}

impl DelayScenario {
    pub fn delay(&self, from: NodeId, to: NodeId, round: u64, phase: usize) -> u64 {
        match self {
            DelayScenario::Constant { delay } => *delay,
            DelayScenario::PerEdge { table, default } => *table.get(&(from, to)).unwrap_or(default),
            DelayScenario::SeededRandom { min, max, seed } => {
                let key = [from.0 as u64, to.0 as u64, round, phase as u64].into_iter().fold(*seed, mix);
                ChaCha8Rng::seed_from_u64(key).random_range(*min..=*max)
            }
            DelayScenario::Script { rules, default } => {
                rules.iter().find(|r| r.matches(from, to, round, phase)).map_or(*default, |r| r.delay)
            }
        }
    }

    pub fn validate(&self, g: &DiGraph) -> Result<(), SimError> {
        let bad = |msg: String| Err(SimError::BadScenario(msg));
        let check_node = |i: Option<NodeId>| match i {
            Some(i) if i.0 >= g.n() => Err(SimError::BadScenario(format!("delay rule names unknown node {i}"))),
            _ => Ok(()),
        };
        match self {
            DelayScenario::Constant { delay: 0 } => bad("delays must be at least 1 round".into()),
            DelayScenario::PerEdge { table, default } => {
                if *default == 0 || table.values().any(|&d| d == 0) {
                    return bad("delays must be at least 1 round".into());
                }
                for &(a, b) in table.keys() {
                    check_node(Some(a))?;
                    check_node(Some(b))?;
                }
                Ok(())
            }
            DelayScenario::SeededRandom { min, max, .. } if *min == 0 || min > max => {
                bad(format!("random delays need 1 <= min <= max, got {min}..={max}"))
            }
            DelayScenario::Script { rules, default } => {
                if *default == 0 || rules.iter().any(|r| r.delay == 0) {
                    return bad("delays must be at least 1 round".into());
                }
                for r in rules {
                    check_node(r.from)?;
                    check_node(r.to)?;
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Largest delay the scenario can produce.
    pub fn max_delay(&self) -> u64 {
        match self {
            DelayScenario::Constant { delay } => *delay,
            DelayScenario::PerEdge { table, default } => table.values().copied().fold(*default, u64::max),
            DelayScenario::SeededRandom { max, .. } => *max,
            DelayScenario::Script { rules, default } => rules.iter().map(|r| r.delay).fold(*default, u64::max),
        }
    }
}

/// `node` takes its last step in `round`. Of the messages it sends in that
/// step, only those addressed to `final_recipients` go out (none by default).
/// A crash at round 0 means the node never gets past its first broadcast.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CrashEvent {
    pub node: NodeId,
    pub round: u64,
    pub final_recipients: Option<NodeSet>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CrashScenario {
    pub events: Vec<CrashEvent>,
}

impl CrashScenario {
    pub fn none() -> Self {
        CrashScenario::default()
    }

    pub fn validate(&self, g: &DiGraph, f: usize) -> Result<(), SimError> {
        if self.events.len() > f {
            return Err(SimError::TooManyCrashes { count: self.events.len(), f });
        }
        let mut seen = NodeSet::EMPTY;
        for e in &self.events {
            if e.node.0 >= g.n() {
                return Err(SimError::BadScenario(format!("crash names unknown node {}", e.node)));
            }
            if !seen.insert(e.node) {
                return Err(SimError::BadScenario(format!("node {} crashes twice", e.node)));
            }
            if e.final_recipients.is_some_and(|r| !r.is_subset(g.nodes())) {
                return Err(SimError::BadScenario(format!("crash of {} lists unknown recipients", e.node)));
            }
        }
        Ok(())
    }

    pub fn for_node(&self, i: NodeId) -> Option<&CrashEvent> {
        self.events.iter().find(|e| e.node == i)
    }

    pub fn last_round(&self) -> Option<u64> {
        self.events.iter().map(|e| e.round).max()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{example_g, ring};

    #[test]
    fn script_first_match_wins() {
        let s = DelayScenario::Script {
            rules: vec![
                DelayRule { from: Some(NodeId(0)), to: None, phase: Some(2), rounds: None, delay: 7 },
                DelayRule { from: Some(NodeId(0)), to: None, phase: None, rounds: Some((3, 4)), delay: 5 },
            ],
            default: 1,
        };
        assert_eq!(s.delay(NodeId(0), NodeId(1), 3, 2), 7);
        assert_eq!(s.delay(NodeId(0), NodeId(1), 4, 1), 5);
        assert_eq!(s.delay(NodeId(0), NodeId(1), 5, 1), 1);
        assert_eq!(s.delay(NodeId(1), NodeId(0), 3, 2), 1);
        assert_eq!(s.max_delay(), 7);
    }

    #[test]
    fn random_delays_are_reproducible() {
        let s = DelayScenario::SeededRandom { min: 1, max: 6, seed: 42 };
        let draws: Vec<u64> = (0..50).map(|r| s.delay(NodeId(1), NodeId(2), r, 3)).collect();
        let again: Vec<u64> = (0..50).map(|r| s.delay(NodeId(1), NodeId(2), r, 3)).collect();
        assert_eq!(draws, again);
        assert!(draws.iter().all(|d| (1..=6).contains(d)));
        assert!(draws.iter().any(|&d| d != draws[0]));
    }

    #[test]
    fn validation() {
        let g = ring(4).unwrap();
        assert!(DelayScenario::Constant { delay: 0 }.validate(&g).is_err());
        assert!(DelayScenario::SeededRandom { min: 3, max: 2, seed: 0 }.validate(&g).is_err());
        let crash = |node| CrashEvent { node: NodeId(node), round: 1, final_recipients: None };
        let two = CrashScenario { events: vec![crash(0), crash(1)] };
        assert_eq!(two.validate(&g, 1), Err(SimError::TooManyCrashes { count: 2, f: 1 }));
        assert!(two.validate(&g, 2).is_ok());
        assert!(CrashScenario { events: vec![crash(0), crash(0)] }.validate(&g, 2).is_err());
        assert!(CrashScenario { events: vec![crash(9)] }.validate(&example_g(), 1).is_err());
    }
}
