//! Deterministic round-based simulator.
//!
//! Round 0: every node enters phase 1 (or starts learning) and broadcasts.
//! A message sent in round `r` on edge `(u, v)` arrives in round
//! `r + delay(u, v, r, phase)`. In each later round, nodes act in id order:
//! a node handles every message delivered to it this round, ordered by
//! `(send_round, sender, recipient, sequence)`, then tries one update.
//! A node crashing in round `r` still takes that step, but only the sends
//! addressed to its crash event's `final_recipients` leave; afterwards it is
//! silent and messages for it are dropped.
//!
//! The run stops when every live node has finished some phase whose spread is
//! within epsilon, when nothing can happen any more, or at `max_rounds`.

mod adversary;
mod necessity;
mod scenario;
mod trace;

pub use adversary::{CrashEvent, CrashScenario, DelayRule, DelayScenario};
pub use necessity::{necessity_delays, necessity_demo, NecessityDemo};
pub use scenario::{ScalarKind, Scenario, ScenarioError};
pub use trace::{scalar_json, MessageEvent, Outcome, PayloadKind, PhaseUpdate, Trace, TraceConfig};

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::conditions::{check_cca, ENUMERATION_GUARD};
use crate::graph::{write_graph, DiGraph, NodeId, NodeSet};
use crate::protocols::{LocalView, Message, NodeState, Output, ProtocolError, ProtocolKind};
use crate::scalar::Scalar;

pub const DEFAULT_MAX_ROUNDS: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error("{count} crash events exceed the fault budget f = {f}")]
    TooManyCrashes { count: usize, f: usize },
    #[error("expected {expected} inputs, got {got}")]
    InputCount { expected: usize, got: usize },
    #[error("invalid scenario: {0}")]
    BadScenario(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StopRule {
    pub epsilon: Option<f64>,
    pub max_rounds: u64,
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule { epsilon: None, max_rounds: DEFAULT_MAX_ROUNDS }
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig<S> {
    pub kind: ProtocolKind,
    pub f: usize,
    pub inputs: Vec<S>,
    pub delays: DelayScenario,
    pub crashes: CrashScenario,
    pub stop: StopRule,
    /// Echoed into the trace; delays carry their own seed.
    pub seed: Option<u64>,
}

impl<S: Scalar> RunConfig<S> {
    pub fn new(kind: ProtocolKind, f: usize, inputs: Vec<S>) -> Self {
        RunConfig {
            kind,
            f,
            inputs,
            delays: DelayScenario::default(),
            crashes: CrashScenario::none(),
            stop: StopRule::default(),
            seed: None,
        }
    }

    pub fn with_delays(mut self, delays: DelayScenario) -> Self {
        self.delays = delays;
        self
    }

    pub fn with_crashes(mut self, crashes: CrashScenario) -> Self {
        self.crashes = crashes;
        self
    }

    pub fn with_epsilon(mut self, eps: f64) -> Self {
        self.stop.epsilon = Some(eps);
        self
    }

    pub fn with_max_rounds(mut self, max_rounds: u64) -> Self {
        self.stop.max_rounds = max_rounds;
        self
    }
}

struct InFlight<S> {
    send_round: u64,
    from: NodeId,
    to: NodeId,
    seq: usize,
    msg: Message<S>,
}

/// Checks run while the simulation executes; any failure aborts the run.
struct Monitor<'a, S> {
    g: &'a DiGraph,
    lo: S,
    hi: S,
    /// In-neighborhood each node's heard sets must stay inside (k-hop kinds).
    reach: Option<Vec<NodeSet>>,
    /// Heard sets frozen at each update, per phase (LWA on graphs meeting the condition).
    frozen: Option<HashMap<usize, Vec<(NodeId, NodeSet)>>>,
    check_estimates: bool,
}

impl<S: Scalar> Monitor<'_, S> {
    fn on_update(&mut self, i: NodeId, phase: usize, value: &S, heard: NodeSet) -> Result<(), SimError> {
        if *value < self.lo || *value > self.hi {
            return Err(SimError::Invariant(format!(
                "node {i} phase {phase}: value {value} left the input range [{}, {}]",
                self.lo, self.hi
            )));
        }
        if let Some(reach) = &self.reach {
            if !heard.without(i).is_subset(reach[i.0]) {
                return Err(SimError::Invariant(format!(
                    "node {i} phase {phase}: heard {heard:?} beyond relay depth {:?}",
                    reach[i.0]
                )));
            }
        }
        if let Some(frozen) = &mut self.frozen {
            let others = frozen.entry(phase).or_default();
            if let Some((j, hj)) = others.iter().find(|(_, hj)| hj.is_disjoint(heard)) {
                return Err(SimError::Invariant(format!(
                    "phase {phase}: heard sets of {i} {heard:?} and {j} {hj:?} are disjoint"
                )));
            }
            others.push((i, heard));
        }
        Ok(())
    }

    fn on_receive(&self, i: NodeId, state: &NodeState<S>) -> Result<(), SimError> {
        if self.check_estimates {
            if let Some(est) = &state.est {
                if !est.is_subgraph_of(self.g) {
                    return Err(SimError::Invariant(format!("node {i}: estimated graph has an edge not in G")));
                }
            }
        }
        Ok(())
    }
}

struct Engine<'a, S> {
    g: &'a DiGraph,
    cfg: &'a RunConfig<S>,
    views: Vec<LocalView>,
    states: Vec<NodeState<S>>,
    queue: BTreeMap<u64, Vec<InFlight<S>>>,
    seq: usize,
    trace: Trace<S>,
    monitor: Monitor<'a, S>,
    eps: Option<S>,
    next_observed: usize,
}

impl<S: Scalar> Engine<'_, S> {
    fn schedule(&mut self, round: u64, from: NodeId, sends: Vec<(NodeId, Message<S>)>) {
        for (to, msg) in sends {
            let delay = self.cfg.delays.delay(from, to, round, msg.phase);
            let deliver_round = round + delay;
            self.trace.messages.push(MessageEvent {
                send_round: round,
                deliver_round,
                from,
                to,
                source: msg.source,
                phase: msg.phase,
                hop_budget: msg.hop_budget,
                payload: if msg.is_learn() { PayloadKind::Learn } else { PayloadKind::Value },
                dropped: false,
            });
            self.queue.entry(deliver_round).or_default().push(InFlight {
                send_round: round,
                from,
                to,
                seq: self.seq,
                msg,
            });
            self.seq += 1;
        }
    }

    /// Folds one transition's output into the trace; returns whether state visibly advanced.
    fn absorb(
        &mut self,
        i: NodeId,
        round: u64,
        out: &mut Output<S>,
        sends: &mut Vec<(NodeId, Message<S>)>,
    ) -> Result<bool, SimError> {
        let mut progressed = false;
        if out.learned {
            self.trace.learned_at[i.0] = Some(round);
            progressed = true;
        }
        if let Some(done) = out.completed.take() {
            self.monitor.on_update(i, done.phase, &done.value, done.heard)?;
            self.trace.updates[i.0].push(PhaseUpdate {
                phase: done.phase,
                round,
                value: done.value,
                heard: done.heard,
                samples: done.samples,
            });
            progressed = true;
        }
        sends.append(&mut out.sends);
        Ok(progressed)
    }

    fn crash_now(&mut self, i: NodeId, round: u64, sends: &mut Vec<(NodeId, Message<S>)>) {
        if let Some(ev) = self.cfg.crashes.for_node(i) {
            if ev.round == round {
                let keep = ev.final_recipients.unwrap_or(NodeSet::EMPTY);
                sends.retain(|(to, _)| keep.contains(*to));
                self.states[i.0].crashed = true;
                self.trace.crashed_at[i.0] = Some(round);
            }
        }
    }

    fn start(&mut self) -> Result<(), SimError> {
        for i in self.g.node_ids() {
            let mut out = self.states[i.0].start(&self.views[i.0]);
            let mut sends = Vec::new();
            self.absorb(i, 0, &mut out, &mut sends)?;
            self.crash_now(i, 0, &mut sends);
            self.schedule(0, i, sends);
        }
        Ok(())
    }

    fn step(&mut self, round: u64) -> Result<bool, SimError> {
        let mut batch = self.queue.remove(&round).unwrap_or_default();
        batch.sort_by_key(|m| (m.send_round, m.from, m.to, m.seq));
        let mut per_node: Vec<Vec<InFlight<S>>> = (0..self.g.n()).map(|_| Vec::new()).collect();
        for m in batch {
            per_node[m.to.0].push(m);
        }
        let mut progressed = false;
        for i in self.g.node_ids() {
            let inbox = std::mem::take(&mut per_node[i.0]);
            if self.states[i.0].crashed {
                for m in inbox {
                    self.trace.messages[m.seq].dropped = true;
                }
                continue;
            }
            let mut sends = Vec::new();
            for m in inbox {
                let mut out = self.states[i.0].on_receive(&self.views[i.0], m.msg);
                self.monitor.on_receive(i, &self.states[i.0])?;
                progressed |= self.absorb(i, round, &mut out, &mut sends)?;
            }
            let mut out = self.states[i.0].try_update(&self.views[i.0]);
            progressed |= self.absorb(i, round, &mut out, &mut sends)?;
            self.crash_now(i, round, &mut sends);
            self.schedule(round, i, sends);
        }
        Ok(progressed)
    }

    /// Advances the observer; returns the phase that met epsilon, if any.
    fn observe(&mut self) -> Option<usize> {
        let eps = self.eps.as_ref()?;
        loop {
            let p = self.next_observed;
            let all_done = self.g.node_ids().all(|i| self.states[i.0].crashed || self.trace.updates[i.0].len() >= p);
            if !all_done {
                return None;
            }
            match self.trace.gap(p) {
                Some(gap) if gap <= *eps => return Some(p),
                Some(_) => self.next_observed += 1,
                None => return None,
            }
        }
    }
}

/// Runs one simulation. Identical inputs give identical traces.
pub fn run<S: Scalar>(g: &DiGraph, cfg: &RunConfig<S>) -> Result<Trace<S>, SimError> {
    let n = g.n();
    if cfg.inputs.len() != n {
        return Err(SimError::InputCount { expected: n, got: cfg.inputs.len() });
    }
    cfg.kind.validate(g)?;
    cfg.delays.validate(g)?;
    cfg.crashes.validate(g, cfg.f)?;
    let eps = match cfg.stop.epsilon {
        Some(e) if !(e > 0.0 && e.is_finite()) => {
            return Err(SimError::BadScenario(format!("epsilon must be positive, got {e}")))
        }
        Some(e) => Some(S::from_f64_lossy(e).ok_or_else(|| SimError::BadScenario(format!("epsilon {e}")))?),
        None => None,
    };

    let views = g.node_ids().map(|i| LocalView::new(g, i, cfg.kind, cfg.f)).collect::<Result<Vec<_>, _>>()?;
    let states = g.node_ids().map(|i| NodeState::new(&views[i.0], cfg.inputs[i.0].clone())).collect();

    let mut lo = cfg.inputs[0].clone();
    let mut hi = cfg.inputs[0].clone();
    for x in &cfg.inputs {
        if *x < lo {
            lo = x.clone();
        }
        if *x > hi {
            hi = x.clone();
        }
    }
    let depth = cfg.kind.depth(n);
    let reach = (depth < n)
        .then(|| g.node_ids().map(|i| g.k_in_neighborhood(i, depth).expect("depth is at least 1")).collect());
    let intersect = cfg.kind == ProtocolKind::Lwa
        && n <= ENUMERATION_GUARD
        && check_cca(g, cfg.f).map(|v| v.holds).unwrap_or(false);
    let monitor = Monitor {
        g,
        lo,
        hi,
        reach,
        frozen: intersect.then(HashMap::new),
        check_estimates: matches!(cfg.kind, ProtocolKind::Lwa | ProtocolKind::Lbc),
    };

    let trace = Trace {
        config: TraceConfig {
            protocol: cfg.kind,
            f: cfg.f,
            seed: cfg.seed,
            epsilon: cfg.stop.epsilon,
            max_rounds: cfg.stop.max_rounds,
            scalar: S::NAME,
            delays: cfg.delays.clone(),
            crashes: cfg.crashes.clone(),
            graph: write_graph(g),
        },
        inputs: cfg.inputs.clone(),
        updates: vec![Vec::new(); n],
        crashed_at: vec![None; n],
        learned_at: vec![None; n],
        messages: Vec::new(),
        outcome: Outcome::MaxRounds,
        rounds: 0,
    };
    let mut engine =
        Engine { g, cfg, views, states, queue: BTreeMap::new(), seq: 0, trace, monitor, eps, next_observed: 1 };

    engine.start()?;
    let last_crash = cfg.crashes.last_round().unwrap_or(0);
    for round in 1..=cfg.stop.max_rounds {
        engine.trace.rounds = round;
        let progressed = engine.step(round)?;
        if let Some(phase) = engine.observe() {
            engine.trace.outcome = Outcome::Converged { phase, round };
            break;
        }
        if !progressed && engine.queue.is_empty() && round >= last_crash {
            engine.trace.outcome = Outcome::Stalled { round };
            break;
        }
    }
    Ok(engine.trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{example_g, ring};

    fn example1(kind: ProtocolKind, rounds: u64) -> Trace<f64> {
        let g = example_g();
        let slow: Vec<DelayRule> = [(0, 2), (2, 0), (1, 3), (3, 1)]
            .into_iter()
            .map(|(a, b)| DelayRule {
                from: Some(NodeId(a)),
                to: Some(NodeId(b)),
                phase: None,
                rounds: None,
                delay: 10,
            })
            .collect();
        let cfg = RunConfig::new(kind, 1, vec![0.0, 1.0, 2.0, 3.0])
            .with_delays(DelayScenario::Script { rules: slow, default: 1 })
            .with_max_rounds(rounds);
        run(&g, &cfg).unwrap()
    }

    #[test]
    fn example_one_round_counts() {
        let t = example1(ProtocolKind::LocWa, 30);
        for i in 0..4 {
            for p in 1..=25 {
                assert_eq!(t.completion_round(NodeId(i), p), Some(p as u64), "node {i} phase {p}");
            }
        }
        let t = example1(ProtocolKind::KLocWa { k: 2 }, 30);
        assert_eq!(t.completion_round(NodeId(3), 1), Some(10));
        let t = example1(ProtocolKind::StrongKLocWa { k: 2 }, 30);
        assert!((0..4).all(|i| t.completion_round(NodeId(i), 1) == Some(1)));
    }

    #[test]
    fn ring_converges_with_validity() {
        let g = ring(4).unwrap();
        let cfg = RunConfig::new(ProtocolKind::KLocWa { k: 2 }, 1, vec![0.0, 0.0, 1.0, 1.0]).with_epsilon(1e-3);
        let t = run(&g, &cfg).unwrap();
        assert!(matches!(t.outcome, Outcome::Converged { .. }), "{:?}", t.outcome);
        for p in 0..=t.observed_phases() {
            assert!(t.phase_values(p).iter().all(|v| (0.0..=1.0).contains(*v)));
        }
    }

    #[test]
    fn crashes_and_partial_broadcast() {
        let g = ring(4).unwrap();
        let crash = CrashEvent { node: NodeId(2), round: 0, final_recipients: Some(NodeSet::from([1])) };
        let cfg = RunConfig::new(ProtocolKind::LocWa, 1, vec![0.0, 0.0, 1.0, 1.0])
            .with_crashes(CrashScenario { events: vec![crash] })
            .with_epsilon(1e-3);
        let t = run(&g, &cfg).unwrap();
        assert_eq!(t.crashed_at[2], Some(0));
        let from_c: Vec<_> = t.messages.iter().filter(|m| m.from == NodeId(2)).collect();
        assert_eq!(from_c.len(), 1);
        assert_eq!(from_c[0].to, NodeId(1));
        assert!(t.updates[2].is_empty());
        assert!(matches!(t.outcome, Outcome::Converged { .. }));
        let arrived: Vec<_> = t.messages.iter().filter(|m| m.to == NodeId(2) && m.deliver_round <= t.rounds).collect();
        assert!(!arrived.is_empty() && arrived.iter().all(|m| m.dropped));
    }

    #[test]
    fn too_many_crashes_rejected() {
        let g = ring(4).unwrap();
        let crash = |i| CrashEvent { node: NodeId(i), round: 1, final_recipients: None };
        let cfg = RunConfig::new(ProtocolKind::LocWa, 1, vec![0.0; 4])
            .with_crashes(CrashScenario { events: vec![crash(0), crash(1)] });
        assert_eq!(run(&g, &cfg).unwrap_err(), SimError::TooManyCrashes { count: 2, f: 1 });
        let short = RunConfig::new(ProtocolKind::LocWa, 1, vec![0.0; 3]);
        assert!(matches!(run(&g, &short), Err(SimError::InputCount { .. })));
    }

    #[test]
    fn stalls_when_nothing_can_happen() {
        let g = ring(2).unwrap();
        let crash = |i| CrashEvent { node: NodeId(i), round: 1, final_recipients: None };
        let cfg = RunConfig::new(ProtocolKind::LocWa, 2, vec![0.0, 1.0])
            .with_crashes(CrashScenario { events: vec![crash(0), crash(1)] });
        assert_eq!(run(&g, &cfg).unwrap().outcome, Outcome::Stalled { round: 2 });

        // a node without in-neighbors keeps iterating on its own
        let cfg = RunConfig::new(ProtocolKind::LocWa, 0, vec![0.0, 1.0]).with_max_rounds(50);
        let t = run(&DiGraph::from_edges(2, [(1, 0)]).unwrap(), &cfg).unwrap();
        assert_eq!(t.outcome, Outcome::MaxRounds);
        assert_eq!(t.final_phase(NodeId(1)), 50);
    }

    #[test]
    fn deterministic_jsonl() {
        let g = ring(4).unwrap();
        let cfg = RunConfig::new(ProtocolKind::StrongKLocWa { k: 2 }, 1, vec![0.0, 0.3, 0.6, 1.0])
            .with_delays(DelayScenario::SeededRandom { min: 1, max: 4, seed: 9 })
            .with_epsilon(1e-3);
        let a = run(&g, &cfg).unwrap().to_jsonl();
        let b = run(&g, &cfg).unwrap().to_jsonl();
        assert_eq!(a, b);
        let first: serde_json::Value = serde_json::from_str(a.lines().next().unwrap()).unwrap();
        assert_eq!(first["type"], "config");
        let last: serde_json::Value = serde_json::from_str(a.lines().last().unwrap()).unwrap();
        assert_eq!(last["type"], "summary");
        assert_eq!(last["outcome"]["status"], "converged");
    }
}
