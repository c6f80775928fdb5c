//! Per-node state machines for the averaging protocols.
//!
//! Every protocol runs in asynchronous phases. On entering phase `p` a node
//! broadcasts its current value, collects the phase-`p` values of others in
//! `R`, and once its wait rule is satisfied replaces its value with the mean
//! of `R` and moves to `p + 1`. The protocols differ in how far values are
//! relayed and in the wait rule:
//!
//! | kind              | relay                    | wait rule                           |
//! |-------------------|--------------------------|-------------------------------------|
//! | `LocWa`           | none                     | at most `f` in-neighbors unheard    |
//! | `KLocWa(k)`       | `k - 1` extra hops       | k-hop crash-set explanation         |
//! | `StrongKLocWa(k)` | `k - 1` extra hops       | any of the 1..=k hop rules          |
//! | `Lwa`             | flooding + in-neighbors  | crash-set explanation on est. graph |
//! | `Lbc`             | flooding after learning  | same, on the learned topology       |
//!
//! Transitions mutate the node state in place and return the messages to send;
//! the simulator owns all states and decides when messages arrive.

mod state;
mod wait;

pub use state::{Completion, NodeState, Output};
pub use wait::{wait_1, wait_k, wait_k_cut, wait_lwa, wait_lwa_cut, wait_strong};

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{DiGraph, GraphError, NodeId, NodeSet, Subgraph};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProtocolKind {
    LocWa,
    KLocWa { k: usize },
    StrongKLocWa { k: usize },
    Lwa,
    Lbc,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("relay depth {k} must lie in 1..={n}")]
    BadDepth { k: usize, n: usize },
    #[error("LBC needs an undirected graph")]
    NeedsUndirected,
    #[error("unknown protocol {0:?} (expected locwa, klocwa, strong-klocwa, lwa or lbc)")]
    Unknown(String),
    #[error("protocol {0} needs a relay depth k")]
    MissingDepth(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

impl ProtocolKind {
    /// Parses `locwa`, `klocwa`, `strong-klocwa`, `lwa`, `lbc` (case-insensitive).
    pub fn parse(name: &str, k: Option<usize>) -> Result<Self, ProtocolError> {
        let lower = name.to_ascii_lowercase();
        let need_k = || k.ok_or_else(|| ProtocolError::MissingDepth(lower.clone()));
        Ok(match lower.as_str() {
            "locwa" => ProtocolKind::LocWa,
            "klocwa" | "k-locwa" => ProtocolKind::KLocWa { k: need_k()? },
            "strong-klocwa" | "strong" => ProtocolKind::StrongKLocWa { k: need_k()? },
            "lwa" => ProtocolKind::Lwa,
            "lbc" => ProtocolKind::Lbc,
            _ => return Err(ProtocolError::Unknown(name.to_string())),
        })
    }

    /// Relay depth the protocol's messages travel; `n` for the flooding protocols.
    pub fn depth(self, n: usize) -> usize {
        match self {
            ProtocolKind::LocWa => 1,
            ProtocolKind::KLocWa { k } | ProtocolKind::StrongKLocWa { k } => k,
            ProtocolKind::Lwa | ProtocolKind::Lbc => n,
        }
    }

    pub fn validate(self, g: &DiGraph) -> Result<(), ProtocolError> {
        match self {
            ProtocolKind::KLocWa { k } | ProtocolKind::StrongKLocWa { k } if k == 0 || k > g.n() => {
                Err(ProtocolError::BadDepth { k, n: g.n() })
            }
            ProtocolKind::Lbc if !g.is_undirected() => Err(ProtocolError::NeedsUndirected),
            _ => Ok(()),
        }
    }

    fn floods(self) -> bool {
        matches!(self, ProtocolKind::Lwa | ProtocolKind::Lbc)
    }
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProtocolKind::LocWa => write!(f, "LocWA"),
            ProtocolKind::KLocWa { k } => write!(f, "{k}-LocWA"),
            ProtocolKind::StrongKLocWa { k } => write!(f, "Strong {k}-LocWA"),
            ProtocolKind::Lwa => write!(f, "LWA"),
            ProtocolKind::Lbc => write!(f, "LBC"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Payload<S> {
    /// A phase value; LWA values also carry the source's in-neighbor set.
    Value { value: S, in_nbrs: Option<NodeSet> },
    /// A topology estimate during LBC's learning stage.
    Learn(Subgraph),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Message<S> {
    pub source: NodeId,
    /// Phase of a value message; 0 for learning messages.
    pub phase: usize,
    /// Further hops this copy may be relayed.
    pub hop_budget: usize,
    pub payload: Payload<S>,
}

impl<S> Message<S> {
    pub fn is_learn(&self) -> bool {
        matches!(self.payload, Payload::Learn(_))
    }
}

/// What a node knows about the topology before the run starts.
#[derive(Clone, Debug)]
pub struct LocalView {
    pub id: NodeId,
    pub n: usize,
    pub f: usize,
    pub kind: ProtocolKind,
    pub in_nbrs: NodeSet,
    pub out_nbrs: NodeSet,
    /// `hop_views[h - 1]`: edges on paths of length `<= h` into the node, for `h = 1..=k`.
    pub hop_views: Vec<Subgraph>,
}

impl LocalView {
    pub fn new(g: &DiGraph, id: NodeId, kind: ProtocolKind, f: usize) -> Result<Self, ProtocolError> {
        g.check_node(id)?;
        kind.validate(g)?;
        let hops = match kind {
            ProtocolKind::LocWa => 1,
            ProtocolKind::KLocWa { k } | ProtocolKind::StrongKLocWa { k } => k,
            ProtocolKind::Lwa | ProtocolKind::Lbc => 0,
        };
        let hop_views = (1..=hops).map(|h| g.k_hop_in_view(id, h)).collect::<Result<_, _>>()?;
        Ok(LocalView { id, n: g.n(), f, kind, in_nbrs: g.in_neighbors(id), out_nbrs: g.out_neighbors(id), hop_views })
    }

    /// Budget a freshly originated value message starts with.
    fn initial_budget(&self) -> usize {
        self.kind.depth(self.n) - 1
    }
}
