//! Execution record of one simulated run and its line-delimited JSON form.
//!
//! Each line of [`Trace::to_jsonl`] is one object with a `type` field:
//!
//! - `config`: `protocol`, `f`, `seed`, `epsilon`, `max_rounds`, `scalar`, `delays`, `crashes`, `graph`
//! - `input`: `node`, `value`
//! - `send`: `send_round`, `deliver_round`, `from`, `to`, `source`, `phase`, `hop_budget`, `payload` (`value` or `learn`), `dropped`
//! - `update`: `node`, `phase`, `round`, `value`, `heard`, `samples`
//! - `learned`: `node`, `round`
//! - `crash`: `node`, `round`
//! - `summary`: `outcome`, `rounds`, `messages`, `final` (per node `phase`, `value`, `crashed`)
//!
//! Events are ordered by round; within a round sends come first, then
//! updates, learning completions and crashes, each in node order. Values are
//! JSON numbers for floating-point runs and `"p/q"` strings for exact runs.

use serde::Serialize;
use serde_json::{json, Value};

use crate::graph::{NodeId, NodeSet};
use crate::protocols::ProtocolKind;
use crate::scalar::Scalar;

use super::{CrashScenario, DelayScenario};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceConfig {
    pub protocol: ProtocolKind,
    pub f: usize,
    pub seed: Option<u64>,
    pub epsilon: Option<f64>,
    pub max_rounds: u64,
    pub scalar: &'static str,
    pub delays: DelayScenario,
    pub crashes: CrashScenario,
    /// Graph in the interchange text format.
    pub graph: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhaseUpdate<S> {
    pub phase: usize,
    pub round: u64,
    pub value: S,
    pub heard: NodeSet,
    pub samples: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PayloadKind {
    Value,
    Learn,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MessageEvent {
    pub send_round: u64,
    pub deliver_round: u64,
    pub from: NodeId,
    pub to: NodeId,
    pub source: NodeId,
    pub phase: usize,
    pub hop_budget: usize,
    pub payload: PayloadKind,
    /// The recipient had crashed by the delivery round.
    pub dropped: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Outcome {
    /// Every live node finished `phase` and the spread at that phase was within epsilon.
    Converged {
        phase: usize,
        round: u64,
    },
    /// Nothing in flight and nothing left to happen.
    Stalled {
        round: u64,
    },
    MaxRounds,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trace<S> {
    pub config: TraceConfig,
    pub inputs: Vec<S>,
    /// `updates[i][p - 1]` is node `i`'s completion of phase `p`.
    pub updates: Vec<Vec<PhaseUpdate<S>>>,
    pub crashed_at: Vec<Option<u64>>,
    pub learned_at: Vec<Option<u64>>,
    pub messages: Vec<MessageEvent>,
    pub outcome: Outcome,
    /// Last round executed.
    pub rounds: u64,
}

pub fn scalar_json<S: Scalar>(v: &S) -> Value {
    match v.exact_repr() {
        Some(text) => Value::String(text),
        None => v.to_f64().map_or(Value::Null, |x| json!(x)),
    }
}

impl<S: Scalar> Trace<S> {
    pub fn n(&self) -> usize {
        self.inputs.len()
    }

    /// `v_i[p]`; phase 0 is the input.
    pub fn value(&self, i: NodeId, p: usize) -> Option<&S> {
        if p == 0 {
            return self.inputs.get(i.0);
        }
        self.updates[i.0].get(p - 1).map(|u| &u.value)
    }

    pub fn completion_round(&self, i: NodeId, p: usize) -> Option<u64> {
        if p == 0 {
            return Some(0);
        }
        self.updates[i.0].get(p - 1).map(|u| u.round)
    }

    /// Values of every node that computed phase `p`, in node order.
    pub fn phase_values(&self, p: usize) -> Vec<&S> {
        (0..self.n()).filter_map(|i| self.value(NodeId(i), p)).collect()
    }

    /// `U[p] - μ[p]` over the nodes that computed phase `p`.
    pub fn gap(&self, p: usize) -> Option<S> {
        let vals = self.phase_values(p);
        let (first, rest) = vals.split_first()?;
        let (mut lo, mut hi) = (*first, *first);
        for v in rest {
            if *v < lo {
                lo = v;
            }
            if *v > hi {
                hi = v;
            }
        }
        Some(hi.clone() - lo.clone())
    }

    pub fn is_crashed_by_end(&self, i: NodeId) -> bool {
        self.crashed_at[i.0].is_some()
    }

    /// Highest phase finished by every node still alive at the end.
    pub fn observed_phases(&self) -> usize {
        let live: Vec<usize> =
            (0..self.n()).filter(|&i| !self.is_crashed_by_end(NodeId(i))).map(|i| self.updates[i].len()).collect();
        match live.iter().min() {
            Some(&m) => m,
            None => self.updates.iter().map(Vec::len).max().unwrap_or(0),
        }
    }

    pub fn messages_sent(&self) -> usize {
        self.messages.len()
    }

    pub fn messages_sent_by(&self, round: u64) -> usize {
        self.messages.iter().filter(|m| m.send_round <= round).count()
    }

    pub fn final_phase(&self, i: NodeId) -> usize {
        self.updates[i.0].len()
    }

    fn config_record(&self) -> Value {
        let mut v = serde_json::to_value(&self.config).expect("config serializes");
        v["type"] = json!("config");
        v
    }

    pub fn to_jsonl(&self) -> String {
        let mut lines = vec![self.config_record()];
        for (i, x) in self.inputs.iter().enumerate() {
            lines.push(json!({"type": "input", "node": i, "value": scalar_json(x)}));
        }
        // (round, category, position) keeps each round's records grouped and stable
        let mut events: Vec<(u64, u8, usize, Value)> = Vec::new();
        for (pos, m) in self.messages.iter().enumerate() {
            let mut v = serde_json::to_value(m).expect("message serializes");
            v["type"] = json!("send");
            events.push((m.send_round, 0, pos, v));
        }
        for (i, ups) in self.updates.iter().enumerate() {
            for u in ups {
                let v = json!({
                    "type": "update",
                    "node": i,
                    "phase": u.phase,
                    "round": u.round,
                    "value": scalar_json(&u.value),
                    "heard": u.heard,
                    "samples": u.samples,
                });
                events.push((u.round, 1, i, v));
            }
        }
        for (i, r) in self.learned_at.iter().enumerate() {
            if let Some(r) = r {
                events.push((*r, 2, i, json!({"type": "learned", "node": i, "round": r})));
            }
        }
        for (i, r) in self.crashed_at.iter().enumerate() {
            if let Some(r) = r {
                events.push((*r, 3, i, json!({"type": "crash", "node": i, "round": r})));
            }
        }
        events.sort_by_key(|(round, cat, pos, _)| (*round, *cat, *pos));
        lines.extend(events.into_iter().map(|(.., v)| v));
        let finals: Vec<Value> = (0..self.n())
            .map(|i| {
                let p = self.final_phase(NodeId(i));
                json!({
                    "node": i,
                    "phase": p,
                    "value": self.value(NodeId(i), p).map(scalar_json),
                    "crashed": self.crashed_at[i],
                })
            })
            .collect();
        lines.push(json!({
            "type": "summary",
            "outcome": self.outcome,
            "rounds": self.rounds,
            "messages": self.messages_sent(),
            "final": finals,
        }));
        let mut out = String::new();
        for l in lines {
            out.push_str(&l.to_string());
            out.push('\n');
        }
        out
    }
}
