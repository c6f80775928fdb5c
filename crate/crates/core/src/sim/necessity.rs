//! Adversarial run showing that averaging cannot converge on a partition that
//! violates the one-hop condition: messages into `L` from outside `L`, and into
//! `R` from outside `R`, are held back, so each side only ever averages itself.

use std::collections::BTreeMap;

use super::{run, DelayScenario, RunConfig, SimError, Trace};
use crate::conditions::check_kcca;
use crate::graph::{DiGraph, NodeId, Partition};
use crate::protocols::ProtocolKind;

#[derive(Clone, Debug)]
pub struct NecessityDemo {
    pub kind: ProtocolKind,
    pub f: usize,
    /// Input spread: `L` starts at 0, `R` at `spread`, `C` at `spread / 2`.
    pub spread: f64,
    pub max_rounds: u64,
    /// Delay on the held-back edges; `None` means longer than the run.
    pub cross_delay: Option<u64>,
}

impl Default for NecessityDemo {
    fn default() -> Self {
        NecessityDemo { kind: ProtocolKind::LocWa, f: 1, spread: 1.0, max_rounds: 500, cross_delay: None }
    }
}

/// Per-edge delays holding back every edge that enters `L` from outside or `R` from outside.
pub fn necessity_delays(g: &DiGraph, p: &Partition, delay: u64) -> DelayScenario {
    let mut table = BTreeMap::new();
    for (u, v) in g.edges() {
        let into_left = p.left.contains(v) && !p.left.contains(u);
        let into_right = p.right.contains(v) && !p.right.contains(u);
        if into_left || into_right {
            table.insert((u, v), delay);
        }
    }
    DelayScenario::PerEdge { table, default: 1 }
}

/// Finds the first partition violating the one-hop condition for `demo.f` and
/// runs `demo.kind` against it. Returns the partition with the trace.
pub fn necessity_demo(g: &DiGraph, demo: &NecessityDemo) -> Result<(Partition, Trace<f64>), SimError> {
    let verdict = check_kcca(g, demo.f, 1).map_err(|e| SimError::BadScenario(e.to_string()))?;
    let p =
        verdict.witness.ok_or_else(|| SimError::BadScenario(format!("graph satisfies 1-CCA with f = {}", demo.f)))?;
    let inputs = (0..g.n())
        .map(|i| {
            let i = NodeId(i);
            if p.left.contains(i) {
                0.0
            } else if p.right.contains(i) {
                demo.spread
            } else {
                demo.spread / 2.0
            }
        })
        .collect();
    let delay = demo.cross_delay.unwrap_or(demo.max_rounds + 1);
    let cfg = RunConfig::new(demo.kind, demo.f, inputs)
        .with_delays(necessity_delays(g, &p, delay))
        .with_max_rounds(demo.max_rounds);
    Ok((p, run(g, &cfg)?))
}
