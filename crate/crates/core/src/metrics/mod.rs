//! Convergence bounds and observed-versus-predicted reports.
//!
//! With `α_k = 1 / max_i |N_i^-(k)|`, `δ` the initial spread and `m = n - f - 1`,
//! the k-hop protocol reaches spread `ε` within
//! `m · ⌈ln(ε/δ) / ln(1 - α_k^m / 2)⌉` phases, and sends at most that many
//! phases times `k·n²` messages.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use serde::Serialize;
use thiserror::Error;

use crate::graph::{DiGraph, GraphError};
use crate::scalar::Scalar;
use crate::sim::{Outcome, Trace};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricsError {
    #[error("node {0} has no in-neighbors within the relay depth")]
    IsolatedNode(usize),
    #[error("bound needs n - f - 1 >= 1 (n = {n}, f = {f})")]
    TooManyFaults { n: usize, f: usize },
    #[error("invalid bound argument: {0}")]
    BadArgument(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// `1 / max_i |N_i^-(k)|`, exactly.
pub fn alpha_k(g: &DiGraph, k: usize) -> Result<BigRational, MetricsError> {
    let mut widest = 0;
    for i in g.node_ids() {
        let size = g.k_in_neighborhood(i, k)?.len();
        if size == 0 {
            return Err(MetricsError::IsolatedNode(i.0));
        }
        widest = widest.max(size);
    }
    Ok(BigRational::new(BigInt::one(), BigInt::from(widest)))
}

/// Phases needed to shrink spread `delta` to `eps`; 0 when `delta <= eps`.
pub fn phase_bound(n: usize, f: usize, eps: f64, delta: f64, alpha: &BigRational) -> Result<f64, MetricsError> {
    if eps.is_nan() || eps <= 0.0 || delta.is_nan() || delta < 0.0 {
        return Err(MetricsError::BadArgument(format!("need eps > 0 and delta >= 0, got {eps}, {delta}")));
    }
    if !alpha.is_positive() || *alpha > BigRational::one() {
        return Err(MetricsError::BadArgument(format!("alpha {alpha} outside (0, 1]")));
    }
    if n < f + 2 {
        return Err(MetricsError::TooManyFaults { n, f });
    }
    if delta <= eps {
        return Ok(0.0);
    }
    let m = n - f - 1;
    // α^m is formed exactly; ln_1p keeps precision when it is tiny
    let shrink = num_traits::pow(alpha.clone(), m).to_f64().unwrap_or(0.0) / 2.0;
    if shrink <= 0.0 {
        return Err(MetricsError::BadArgument(format!("alpha^{m} underflows")));
    }
    let per_round = (eps / delta).ln() / (-shrink).ln_1p();
    Ok(m as f64 * per_round.ceil())
}

/// `phase_bound · k · n²`.
pub fn message_bound(
    n: usize,
    f: usize,
    eps: f64,
    delta: f64,
    alpha: &BigRational,
    k: usize,
) -> Result<f64, MetricsError> {
    Ok(phase_bound(n, f, eps, delta, alpha)? * (k * n * n) as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub protocol: String,
    pub n: usize,
    pub f: usize,
    pub k: usize,
    pub epsilon: f64,
    pub outcome: Outcome,
    pub delta: f64,
    pub gap_series: Vec<f64>,
    /// Exact gaps (`"p/q"`) for exact runs.
    pub gap_series_exact: Option<Vec<String>>,
    pub p_epsilon: Option<usize>,
    pub rounds_to_eps: Option<u64>,
    pub messages_sent: usize,
    pub messages_until_eps: Option<usize>,
    pub alpha_k: Option<String>,
    pub phase_bound: Option<f64>,
    pub message_bound: Option<f64>,
    pub validity_ok: bool,
    /// `p_epsilon <= phase_bound` (trivially true when the inputs already agree within epsilon).
    pub within_phase_bound: Option<bool>,
    pub within_message_bound: Option<bool>,
    /// Per node, the round each phase finished.
    pub phase_rounds: Vec<Vec<u64>>,
}

/// Post-processes a trace: spread per phase, validity, first phase within
/// `eps`, message counts, and the theoretical bounds for the run's relay depth.
pub fn analyze<S: Scalar>(g: &DiGraph, trace: &Trace<S>, eps: f64) -> Result<ConvergenceReport, MetricsError> {
    let n = g.n();
    if trace.n() != n {
        return Err(MetricsError::BadArgument(format!("trace has {} nodes, graph {}", trace.n(), n)));
    }
    let f = trace.config.f;
    let k = trace.config.protocol.depth(n);
    let eps_s = S::from_f64_lossy(eps).ok_or_else(|| MetricsError::BadArgument(format!("epsilon {eps}")))?;

    let phases = trace.observed_phases();
    let gaps: Vec<S> = (0..=phases).map(|p| trace.gap(p).unwrap_or_else(S::zero)).collect();
    let delta = gaps[0].clone();
    let validity_ok = validity_holds(trace);
    let p_epsilon = (1..=phases).find(|&p| gaps[p] <= eps_s);
    let rounds_to_eps = p_epsilon.map(|p| g.node_ids().filter_map(|i| trace.completion_round(i, p)).max().unwrap_or(0));
    let messages_until_eps = rounds_to_eps.map(|r| trace.messages_sent_by(r));

    let delta_f = delta.to_f64().unwrap_or(f64::NAN);
    let alpha = alpha_k(g, k).ok();
    let bounds = alpha.as_ref().and_then(|a| {
        let pb = phase_bound(n, f, eps, delta_f, a).ok()?;
        let mb = message_bound(n, f, eps, delta_f, a, k).ok()?;
        Some((pb, mb))
    });
    let already = delta <= eps_s;
    let within_phase_bound = match (p_epsilon, bounds) {
        (Some(p), Some((pb, _))) => Some(already || p as f64 <= pb),
        _ => None,
    };
    let within_message_bound = match (messages_until_eps, bounds) {
        (Some(m), Some((_, mb))) => Some(already || m as f64 <= mb),
        _ => None,
    };

    let exact = delta.exact_repr().is_some();
    Ok(ConvergenceReport {
        protocol: trace.config.protocol.to_string(),
        n,
        f,
        k,
        epsilon: eps,
        outcome: trace.outcome,
        delta: delta_f,
        gap_series: gaps.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect(),
        gap_series_exact: exact.then(|| gaps.iter().filter_map(Scalar::exact_repr).collect()),
        p_epsilon,
        rounds_to_eps,
        messages_sent: trace.messages_sent(),
        messages_until_eps,
        alpha_k: alpha.map(|a| a.to_string()),
        phase_bound: bounds.map(|b| b.0),
        message_bound: bounds.map(|b| b.1),
        validity_ok,
        within_phase_bound,
        within_message_bound,
        phase_rounds: g.node_ids().map(|i| trace.updates[i.0].iter().map(|u| u.round).collect()).collect(),
    })
}

/// `U[p] <= U[0]` and `μ[p] >= μ[0]` for every computed value.
pub fn validity_holds<S: Scalar>(trace: &Trace<S>) -> bool {
    let inputs = &trace.inputs;
    let Some(first) = inputs.first() else {
        return true;
    };
    let (mut lo, mut hi) = (first, first);
    for x in inputs {
        if x < lo {
            lo = x;
        }
        if x > hi {
            hi = x;
        }
    }
    trace.updates.iter().flatten().all(|u| u.value >= *lo && u.value <= *hi)
}

impl ConvergenceReport {
    /// `phase,gap` rows for plotting.
    pub fn gaps_csv(&self) -> String {
        let mut out = String::from("phase,gap\n");
        for (p, g) in self.gap_series.iter().enumerate() {
            out.push_str(&format!("{p},{g}\n"));
        }
        out
    }

    /// Whether the observed run stayed inside every bound that applies to it.
    pub fn bounds_respected(&self) -> bool {
        self.within_phase_bound.unwrap_or(true) && self.within_message_bound.unwrap_or(true)
    }
}
