use std::collections::{BTreeMap, HashMap};

use super::wait::{wait_1, wait_k, wait_lwa, wait_strong};
use super::{LocalView, Message, Payload, ProtocolKind};
use crate::graph::{NodeId, NodeSet, Subgraph};
use crate::scalar::Scalar;

/// A finished phase: the value computed for `phase` and the inputs it averaged.
#[derive(Clone, Debug, PartialEq)]
pub struct Completion<S> {
    pub phase: usize,
    pub value: S,
    pub heard: NodeSet,
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Output<S> {
    pub sends: Vec<(NodeId, Message<S>)>,
    pub completed: Option<Completion<S>>,
    /// Set on the transition that finished LBC's learning stage.
    pub learned: bool,
}

impl<S> Default for Output<S> {
    fn default() -> Self {
        Output { sends: Vec::new(), completed: None, learned: false }
    }
}

#[derive(Clone, Debug)]
pub struct NodeState<S> {
    pub id: NodeId,
    /// Current phase; 0 while LBC is still learning.
    pub phase: usize,
    /// `v_i[p - 1]`.
    pub value: S,
    /// Multiset of values collected for the current phase, own value first.
    pub received: Vec<S>,
    pub heard: NodeSet,
    /// LWA: this phase's estimate. LBC: the learned topology.
    pub est: Option<Subgraph>,
    /// Largest hop budget already relayed for each `(source, phase)`.
    relayed: HashMap<(NodeId, usize), usize>,
    future: BTreeMap<usize, Vec<Message<S>>>,
    learning: bool,
    pub crashed: bool,
}

impl<S: Scalar> NodeState<S> {
    pub fn new(view: &LocalView, input: S) -> Self {
        NodeState {
            id: view.id,
            phase: 0,
            value: input,
            received: Vec::new(),
            heard: NodeSet::EMPTY,
            est: None,
            relayed: HashMap::new(),
            future: BTreeMap::new(),
            learning: view.kind == ProtocolKind::Lbc,
            crashed: false,
        }
    }

    pub fn is_learning(&self) -> bool {
        self.learning
    }

    /// First step of the run: enter phase 1, or start learning for LBC.
    pub fn start(&mut self, view: &LocalView) -> Output<S> {
        let mut out = Output::default();
        if self.crashed {
            return out;
        }
        if self.learning {
            // the in-neighbor list is the undirected neighborhood here
            let mut star = Subgraph::new(view.n);
            star.add_node(self.id);
            for j in view.in_nbrs {
                star.add_edge(j, self.id);
                star.add_edge(self.id, j);
            }
            self.est = Some(star);
            self.broadcast_estimate(view, &mut out);
            self.finish_learning_if_complete(view, &mut out);
        } else {
            self.enter_phase(view, 1, &mut out);
        }
        out
    }

    pub fn on_receive(&mut self, view: &LocalView, msg: Message<S>) -> Output<S> {
        let mut out = Output::default();
        if self.crashed || msg.source == self.id {
            return out;
        }
        if let Payload::Learn(g) = &msg.payload {
            self.merge_estimate(view, g, &mut out);
            return out;
        }
        self.relay(view, &msg, &mut out);
        if self.learning || msg.phase > self.phase {
            self.future.entry(msg.phase).or_default().push(msg);
        } else if msg.phase == self.phase {
            self.record(view, &msg);
        }
        out
    }

    /// Averages and advances if the wait rule is satisfied.
    pub fn try_update(&mut self, view: &LocalView) -> Output<S> {
        let mut out = Output::default();
        if self.crashed || self.learning || !self.wait_satisfied(view) {
            return out;
        }
        let value = S::mean(&self.received);
        out.completed = Some(Completion {
            phase: self.phase,
            value: value.clone(),
            heard: self.heard,
            samples: self.received.len(),
        });
        self.value = value;
        self.enter_phase(view, self.phase + 1, &mut out);
        out
    }

    pub fn wait_satisfied(&self, view: &LocalView) -> bool {
        let (i, f) = (self.id, view.f);
        match view.kind {
            ProtocolKind::LocWa => wait_1(self.heard, view.in_nbrs, f),
            ProtocolKind::KLocWa { k } => wait_k(&view.hop_views[k - 1], i, self.heard, f, k),
            ProtocolKind::StrongKLocWa { k } => wait_strong(&view.hop_views, i, self.heard, f, k),
            ProtocolKind::Lwa | ProtocolKind::Lbc => {
                let est = self.est.as_ref().expect("estimate exists once a phase has started");
                wait_lwa(est, i, self.heard, f)
            }
        }
    }

    fn enter_phase(&mut self, view: &LocalView, phase: usize, out: &mut Output<S>) {
        self.phase = phase;
        self.received = vec![self.value.clone()];
        self.heard = NodeSet::singleton(self.id);
        if view.kind == ProtocolKind::Lwa {
            self.est = Some(Subgraph::in_star(view.n, self.id, view.in_nbrs));
        }
        let in_nbrs = (view.kind == ProtocolKind::Lwa).then_some(view.in_nbrs);
        let msg = Message {
            source: self.id,
            phase,
            hop_budget: view.initial_budget(),
            payload: Payload::Value { value: self.value.clone(), in_nbrs },
        };
        for j in view.out_nbrs {
            out.sends.push((j, msg.clone()));
        }
        for m in self.future.remove(&phase).unwrap_or_default() {
            self.record(view, &m);
        }
    }

    fn record(&mut self, view: &LocalView, msg: &Message<S>) {
        let Payload::Value { value, in_nbrs } = &msg.payload else {
            return;
        };
        if !self.heard.insert(msg.source) {
            return;
        }
        self.received.push(value.clone());
        if view.kind == ProtocolKind::Lwa {
            let star = Subgraph::in_star(view.n, msg.source, in_nbrs.unwrap_or(NodeSet::EMPTY));
            self.est.as_mut().expect("LWA estimate is set on phase entry").union_with(&star);
        }
    }

    /// Forwards `msg` to out-neighbors other than its source. Flooding kinds
    /// forward the first copy only; k-hop kinds forward again whenever a copy
    /// arrives with a larger remaining budget than any forwarded so far, since
    /// the first copy may have come the long way round.
    fn relay(&mut self, view: &LocalView, msg: &Message<S>, out: &mut Output<S>) {
        if msg.hop_budget == 0 {
            return;
        }
        let budget = msg.hop_budget - 1;
        let key = (msg.source, msg.phase);
        match self.relayed.get(&key) {
            Some(_) if view.kind.floods() => return,
            Some(&done) if done >= budget => return,
            _ => {}
        }
        self.relayed.insert(key, budget);
        let copy = Message { hop_budget: budget, ..msg.clone() };
        for j in view.out_nbrs.without(msg.source) {
            out.sends.push((j, copy.clone()));
        }
    }

    fn broadcast_estimate(&self, view: &LocalView, out: &mut Output<S>) {
        let est = self.est.as_ref().expect("estimate exists while learning");
        let msg = Message { source: self.id, phase: 0, hop_budget: 0, payload: Payload::Learn(est.clone()) };
        for j in view.out_nbrs {
            out.sends.push((j, msg.clone()));
        }
    }

    fn merge_estimate(&mut self, view: &LocalView, other: &Subgraph, out: &mut Output<S>) {
        let Some(est) = self.est.as_mut() else {
            return;
        };
        if est.union_with(other) {
            self.broadcast_estimate(view, out);
            self.finish_learning_if_complete(view, out);
        }
    }

    fn finish_learning_if_complete(&mut self, view: &LocalView, out: &mut Output<S>) {
        let known = self.est.as_ref().map_or(0, Subgraph::node_count);
        if self.learning && known == view.n {
            self.learning = false;
            out.learned = true;
            self.enter_phase(view, 1, out);
        }
    }
}
