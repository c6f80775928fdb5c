//! Scenario files: one TOML document describing a complete run.
//!
//! ```toml
//! name = "ring, two-hop relay"
//! seed = 7
//! f = 1
//! scalar = "f64"                # or "f32", "exact"
//! inputs = [0, 0, 1, 1]         # numbers, or strings such as "1/3"
//!
//! [graph]
//! builtin = "ring4"             # or: file = "g.txt" (relative to this file), or: text = """..."""
//!
//! [protocol]
//! kind = "klocwa"               # locwa | klocwa | strong-klocwa | lwa | lbc
//! k = 2
//!
//! [delays]
//! kind = "script"               # constant | per-edge | random | script
//! default = 1
//! rules = [{ from = "A", to = "C", delay = 10 }]
//!
//! [[crashes]]
//! node = "c"
//! round = 0
//! final_recipients = ["b"]
//!
//! [stop]
//! epsilon = 1e-3
//! max_rounds = 1000000
//! ```
//!
//! Nodes are named by label or by index.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use super::{CrashEvent, CrashScenario, DelayRule, DelayScenario, RunConfig, StopRule, DEFAULT_MAX_ROUNDS};
use crate::graph::{builtin, parse_graph, DiGraph, GraphError, NodeId, NodeSet};
use crate::protocols::{ProtocolError, ProtocolKind};
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("scenario syntax: {0}")]
    Syntax(#[from] toml::de::Error),
    #[error("graph: {0}")]
    Graph(#[from] GraphError),
    #[error("protocol: {0}")]
    Protocol(#[from] ProtocolError),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarKind {
    F32,
    #[default]
    F64,
    Exact,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: Option<String>,
    seed: Option<u64>,
    f: usize,
    #[serde(default)]
    scalar: ScalarKind,
    inputs: Vec<toml::Value>,
    graph: RawGraph,
    protocol: RawProtocol,
    #[serde(default)]
    delays: Option<RawDelays>,
    #[serde(default)]
    crashes: Vec<RawCrash>,
    #[serde(default)]
    stop: RawStop,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGraph {
    builtin: Option<String>,
    file: Option<String>,
    text: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProtocol {
    kind: String,
    k: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRule {
    from: Option<String>,
    to: Option<String>,
    phase: Option<usize>,
    rounds: Option<[u64; 2]>,
    delay: u64,
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum RawDelays {
    Constant { delay: u64 },
    PerEdge { default: Option<u64>, edges: Vec<RawRule> },
    Random { min: u64, max: u64, seed: Option<u64> },
    Script { default: Option<u64>, rules: Vec<RawRule> },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCrash {
    node: String,
    round: u64,
    final_recipients: Option<Vec<String>>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStop {
    epsilon: Option<f64>,
    max_rounds: Option<u64>,
}

/// A fully resolved scenario: graph loaded, node names mapped to ids.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: Option<String>,
    pub graph: DiGraph,
    pub kind: ProtocolKind,
    pub f: usize,
    /// Inputs as written, converted per scalar type at run time.
    pub inputs: Vec<String>,
    pub delays: DelayScenario,
    pub crashes: CrashScenario,
    pub stop: StopRule,
    pub seed: Option<u64>,
    pub scalar: ScalarKind,
}

fn node(g: &DiGraph, name: &str) -> Result<NodeId, ScenarioError> {
    g.node_by_name(name.trim()).ok_or_else(|| ScenarioError::Invalid(format!("unknown node {name:?}")))
}

fn wildcard(g: &DiGraph, name: &Option<String>) -> Result<Option<NodeId>, ScenarioError> {
    match name.as_deref() {
        None | Some("*") => Ok(None),
        Some(s) => node(g, s).map(Some),
    }
}

fn rule(g: &DiGraph, r: &RawRule) -> Result<DelayRule, ScenarioError> {
    Ok(DelayRule {
        from: wildcard(g, &r.from)?,
        to: wildcard(g, &r.to)?,
        phase: r.phase,
        rounds: r.rounds.map(|[a, b]| (a, b)),
        delay: r.delay,
    })
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| ScenarioError::Io { path: path.to_path_buf(), source })?;
        Scenario::from_toml(&text, path.parent())
    }

    /// Parses a scenario; `base_dir` resolves relative graph file paths.
    pub fn from_toml(text: &str, base_dir: Option<&Path>) -> Result<Self, ScenarioError> {
        let raw: RawScenario = toml::from_str(text)?;
        let graph = match (&raw.graph.builtin, &raw.graph.file, &raw.graph.text) {
            (Some(spec), None, None) => builtin(spec)?,
            (None, Some(file), None) => {
                let path = base_dir.map_or_else(|| PathBuf::from(file), |d| d.join(file));
                let text = std::fs::read_to_string(&path)
                    .map_err(|source| ScenarioError::Io { path: path.clone(), source })?;
                parse_graph(&text)?
            }
            (None, None, Some(text)) => parse_graph(text)?,
            _ => return Err(ScenarioError::Invalid("[graph] needs exactly one of builtin, file, text".into())),
        };
        let kind = ProtocolKind::parse(&raw.protocol.kind, raw.protocol.k)?;
        kind.validate(&graph)?;

        let inputs = raw
            .inputs
            .iter()
            .map(|v| match v {
                toml::Value::Integer(i) => Ok(i.to_string()),
                toml::Value::Float(x) => Ok(x.to_string()),
                toml::Value::String(s) => Ok(s.clone()),
                other => Err(ScenarioError::Invalid(format!("input {other} is not a number"))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        if inputs.len() != graph.n() {
            return Err(ScenarioError::Invalid(format!("{} inputs given for {} nodes", inputs.len(), graph.n())));
        }

        let delays = match raw.delays {
            None => DelayScenario::default(),
            Some(RawDelays::Constant { delay }) => DelayScenario::Constant { delay },
            Some(RawDelays::PerEdge { default, edges }) => {
                let mut table = BTreeMap::new();
                for e in &edges {
                    let (Some(from), Some(to)) = (&e.from, &e.to) else {
                        return Err(ScenarioError::Invalid("per-edge delays need both from and to".into()));
                    };
                    table.insert((node(&graph, from)?, node(&graph, to)?), e.delay);
                }
                DelayScenario::PerEdge { table, default: default.unwrap_or(1) }
            }
            Some(RawDelays::Random { min, max, seed }) => {
                DelayScenario::SeededRandom { min, max, seed: seed.or(raw.seed).unwrap_or(0) }
            }
            Some(RawDelays::Script { default, rules }) => DelayScenario::Script {
                rules: rules.iter().map(|r| rule(&graph, r)).collect::<Result<_, _>>()?,
                default: default.unwrap_or(1),
            },
        };

        let mut events = Vec::new();
        for c in &raw.crashes {
            let final_recipients = match &c.final_recipients {
                None => None,
                Some(names) => Some(names.iter().map(|s| node(&graph, s)).collect::<Result<NodeSet, _>>()?),
            };
            events.push(CrashEvent { node: node(&graph, &c.node)?, round: c.round, final_recipients });
        }
        let crashes = CrashScenario { events };
        crashes.validate(&graph, raw.f).map_err(|e| ScenarioError::Invalid(e.to_string()))?;
        delays.validate(&graph).map_err(|e| ScenarioError::Invalid(e.to_string()))?;

        Ok(Scenario {
            name: raw.name,
            graph,
            kind,
            f: raw.f,
            inputs,
            delays,
            crashes,
            stop: StopRule { epsilon: raw.stop.epsilon, max_rounds: raw.stop.max_rounds.unwrap_or(DEFAULT_MAX_ROUNDS) },
            seed: raw.seed,
            scalar: raw.scalar,
        })
    }

    pub fn run_config<S: Scalar>(&self) -> Result<RunConfig<S>, ScenarioError> {
        let inputs = self
            .inputs
            .iter()
            .map(|t| S::parse_input(t).ok_or_else(|| ScenarioError::Invalid(format!("bad input value {t:?}"))))
            .collect::<Result<Vec<S>, _>>()?;
        Ok(RunConfig {
            kind: self.kind,
            f: self.f,
            inputs,
            delays: self.delays.clone(),
            crashes: self.crashes.clone(),
            stop: self.stop,
            seed: self.seed,
        })
    }
}
