//! Invariant suites over generated graph corpora and scenario batteries.

use rand::seq::IteratorRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::conditions::{
    check_cca, check_kcca, oracle_kcca, propagates, witness_violates, ConditionError, ORACLE_GUARD,
};
use crate::graph::{
    random_digraph, random_undirected, ring, two_cliques, vertex_connectivity, DiGraph, NodeId, NodeSet,
};
use crate::metrics::{analyze, validity_holds};
use crate::protocols::ProtocolKind;
use crate::sim::{run, CrashEvent, CrashScenario, DelayScenario, Outcome, RunConfig};

#[derive(Clone, Debug, Default, Serialize)]
pub struct CheckSummary {
    pub name: String,
    pub cases: usize,
    pub counterexamples: Vec<String>,
}

impl CheckSummary {
    fn new(name: &str) -> Self {
        CheckSummary { name: name.to_string(), ..Default::default() }
    }

    fn record(&mut self, ok: bool, detail: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.counterexamples.push(detail());
        }
    }

    pub fn passed(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<CheckSummary>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckSummary::passed)
    }
}

/// Deterministic random graphs with `2..=n_max` nodes.
pub fn digraph_corpus(count: usize, n_max: usize, seed: u64) -> Vec<DiGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.random_range(2..=n_max.max(2));
            let p = rng.random_range(0.2..0.9);
            random_digraph(n, p, rng.random()).expect("parameters are in range")
        })
        .collect()
}

pub fn undirected_corpus(count: usize, n_max: usize, seed: u64) -> Vec<DiGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.random_range(2..=n_max.max(2));
            let p = rng.random_range(0.2..0.95);
            random_undirected(n, p, rng.random()).expect("parameters are in range")
        })
        .collect()
}

fn describe(g: &DiGraph) -> String {
    format!("{g:?}")
}

/// Depth monotonicity, unbounded ≡ n-hop, agreement with the brute-force
/// oracle, witness soundness, and the undirected connectivity criterion.
pub fn conditions_suite(n_max: usize, seed: u64, count: usize) -> Result<SuiteReport, ConditionError> {
    let mut mono = CheckSummary::new("k-CCA implies k'-CCA");
    let mut equiv = CheckSummary::new("CCA equals n-CCA");
    let mut oracle = CheckSummary::new("checker agrees with oracle");
    let mut witness = CheckSummary::new("witnesses violate both directions");
    let mut undirected = CheckSummary::new("undirected CCA equals connectivity > f and n > 2f");

    for g in digraph_corpus(count, n_max, seed) {
        let n = g.n();
        for f in 0..=2 {
            let verdicts = (1..=n).map(|k| check_kcca(&g, f, k)).collect::<Result<Vec<_>, _>>()?;
            for (k, v) in verdicts.iter().enumerate() {
                for (k2, v2) in verdicts.iter().enumerate().skip(k) {
                    mono.record(!v.holds || v2.holds, || format!("f={f} k={} k'={} {}", k + 1, k2 + 1, describe(&g)));
                }
                if !v.holds {
                    witness.record(witness_violates(&g, v)?, || format!("f={f} k={} {}", k + 1, describe(&g)));
                }
            }
            let cca = check_cca(&g, f)?;
            equiv.record(cca.holds == verdicts[n - 1].holds, || format!("f={f} {}", describe(&g)));
            if !cca.holds {
                witness.record(witness_violates(&g, &cca)?, || format!("f={f} cca {}", describe(&g)));
            }
            if n <= ORACLE_GUARD {
                let mut ks = vec![1, 2, n];
                ks.dedup();
                for k in ks.into_iter().filter(|&k| k <= n) {
                    let o = oracle_kcca(&g, f, k)?;
                    oracle.record(o == verdicts[k - 1], || format!("f={f} k={k} {}", describe(&g)));
                }
            }
        }
    }
    for g in undirected_corpus(count, 8, seed ^ 0x5eed) {
        let kappa = vertex_connectivity(&g)?;
        for f in 0..=2 {
            let expected = kappa > f && g.n() > 2 * f;
            undirected
                .record(check_cca(&g, f)?.holds == expected, || format!("f={f} connectivity={kappa} {}", describe(&g)));
        }
    }
    Ok(SuiteReport { suite: "conditions".into(), checks: vec![mono, equiv, oracle, witness, undirected] })
}

/// On graphs meeting k-CCA, every 2-partition propagates in at least one
/// direction within `n - f - 1` steps.
pub fn propagation_suite(n_max: usize, seed: u64, count: usize) -> Result<SuiteReport, ConditionError> {
    let mut dichotomy = CheckSummary::new("A propagates to B or B to A");
    let mut length = CheckSummary::new("propagation length <= n - f - 1");
    for g in digraph_corpus(count, n_max, seed) {
        let n = g.n();
        for f in 0..=2 {
            for k in [1, 2, n] {
                if k > n || !check_kcca(&g, f, k)?.holds {
                    continue;
                }
                for bits in 1..(1u128 << n) - 1 {
                    let a = NodeSet::from_bits(bits);
                    let b = g.nodes().difference(a);
                    let fwd = propagates(&g, a, b, f, k)?;
                    let back = propagates(&g, b, a, f, k)?;
                    dichotomy
                        .record(fwd.is_some() || back.is_some(), || format!("f={f} k={k} A={a:?} {}", describe(&g)));
                    for seq in fwd.iter().chain(back.iter()) {
                        length
                            .record(seq.l() + f < n, || format!("f={f} k={k} A={a:?} l={} {}", seq.l(), describe(&g)));
                    }
                }
            }
        }
    }
    Ok(SuiteReport { suite: "propagation".into(), checks: vec![dichotomy, length] })
}

/// A named simulation in a battery.
#[derive(Clone, Debug)]
pub struct BatteryCase {
    pub name: String,
    pub graph: DiGraph,
    pub config: RunConfig<f64>,
}

fn random_inputs(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| f64::from(rng.random_range(0..=1000u32)) / 1000.0).collect()
}

/// No crash, a silent crash, or a crash whose last broadcast reaches only some out-neighbors.
fn crash_pattern(rng: &mut ChaCha8Rng, g: &DiGraph, variant: usize) -> CrashScenario {
    let node = NodeId(rng.random_range(0..g.n()));
    let round = rng.random_range(0..6);
    match variant % 3 {
        0 => CrashScenario::none(),
        1 => CrashScenario { events: vec![CrashEvent { node, round, final_recipients: None }] },
        _ => {
            let outs = g.out_neighbors(node);
            let keep: NodeSet = outs.iter().choose_multiple(rng, outs.len().div_ceil(2)).into_iter().collect();
            CrashScenario { events: vec![CrashEvent { node, round, final_recipients: Some(keep) }] }
        }
    }
}

/// Random directed graphs meeting the condition `kind` needs with `f = 1`,
/// under random delays and the three crash patterns in rotation.
pub fn random_battery(kind: ProtocolKind, cases: usize, seed: u64, eps: f64) -> Vec<BatteryCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut attempt = 0;
    while out.len() < cases {
        attempt += 1;
        let n = rng.random_range(4..=7);
        let p = rng.random_range(0.5..0.95);
        let undirected = kind == ProtocolKind::Lbc;
        let g = if undirected { random_undirected(n, p, rng.random()) } else { random_digraph(n, p, rng.random()) }
            .expect("parameters are in range");
        let holds = match kind {
            ProtocolKind::Lwa | ProtocolKind::Lbc => check_cca(&g, 1),
            other => check_kcca(&g, 1, other.depth(n)),
        }
        .map(|v| v.holds)
        .unwrap_or(false);
        if !holds {
            continue;
        }
        let variant = out.len();
        let crashes = crash_pattern(&mut rng, &g, variant);
        let delays = DelayScenario::SeededRandom { min: 1, max: rng.random_range(1..=5), seed: rng.random() };
        let config = RunConfig::new(kind, 1, random_inputs(&mut rng, n))
            .with_delays(delays)
            .with_crashes(crashes)
            .with_epsilon(eps)
            .with_max_rounds(200_000);
        out.push(BatteryCase { name: format!("{kind} #{variant} (attempt {attempt})"), graph: g, config });
    }
    out
}

/// The fixed ring case plus random k-hop scenarios.
pub fn bounds_battery(seed: u64, cases: usize, eps: f64) -> Vec<BatteryCase> {
    let ring4 = ring(4).expect("ring of four");
    let mut out = vec![BatteryCase {
        name: "ring4 2-LocWA".into(),
        graph: ring4,
        config: RunConfig::new(ProtocolKind::KLocWa { k: 2 }, 1, vec![0.0, 0.0, 1.0, 1.0]).with_epsilon(eps),
    }];
    let half = cases / 2;
    out.extend(random_battery(ProtocolKind::KLocWa { k: 2 }, cases - half, seed, eps));
    out.extend(random_battery(ProtocolKind::KLocWa { k: 1 }, half, seed ^ 1, eps));
    out
}

/// LBC cases on undirected graphs: the ring, two cliques, and random graphs.
pub fn lbc_battery(seed: u64, random_cases: usize, eps: f64) -> Vec<BatteryCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for (name, g) in [("ring4", ring(4)), ("two-cliques:8:3", two_cliques(8, 3))] {
        let g = g.expect("fixed generator parameters");
        for variant in 0..3 {
            let config = RunConfig::new(ProtocolKind::Lbc, 1, random_inputs(&mut rng, g.n()))
                .with_delays(DelayScenario::SeededRandom { min: 1, max: 3, seed: rng.random() })
                .with_crashes(crash_pattern(&mut rng, &g, variant))
                .with_epsilon(eps)
                .with_max_rounds(200_000);
            out.push(BatteryCase { name: format!("{name} LBC #{variant}"), graph: g.clone(), config });
        }
    }
    out.extend(random_battery(ProtocolKind::Lbc, random_cases, rng.random(), eps));
    out
}

/// Runs a battery and checks validity, convergence and (for k-hop kinds) the bounds.
pub fn run_battery(cases: &[BatteryCase], eps: f64, check_bounds: bool) -> SuiteReport {
    let mut converged = CheckSummary::new("reaches epsilon");
    let mut validity = CheckSummary::new("validity");
    let mut bounds = CheckSummary::new("phases and messages within bounds");
    let mut invariants = CheckSummary::new("online invariants");
    for case in cases {
        let trace = match run(&case.graph, &case.config) {
            Ok(t) => t,
            Err(e) => {
                invariants.record(false, || format!("{}: {e}", case.name));
                continue;
            }
        };
        invariants.record(true, String::new);
        validity.record(validity_holds(&trace), || case.name.clone());
        converged.record(matches!(trace.outcome, Outcome::Converged { .. }), || {
            format!("{}: {:?}", case.name, trace.outcome)
        });
        if check_bounds {
            match analyze(&case.graph, &trace, eps) {
                Ok(r) => bounds.record(r.p_epsilon.is_some() && r.bounds_respected(), || {
                    format!(
                        "{}: p_eps={:?} bound={:?} messages={:?} bound={:?}",
                        case.name, r.p_epsilon, r.phase_bound, r.messages_until_eps, r.message_bound
                    )
                }),
                Err(e) => bounds.record(false, || format!("{}: {e}", case.name)),
            }
        }
    }
    let mut checks = vec![invariants, validity, converged];
    if check_bounds {
        checks.push(bounds);
    }
    SuiteReport { suite: "battery".into(), checks }
}

pub fn bounds_suite(seed: u64) -> SuiteReport {
    let eps = 1e-3;
    SuiteReport { suite: "bounds".into(), ..run_battery(&bounds_battery(seed, 24, eps), eps, true) }
}

/// LBC battery plus the learning deadline: every node that never crashes
/// knows all of `G` within `n * max_delay` rounds.
pub fn lbc_suite(seed: u64) -> SuiteReport {
    let eps = 1e-3;
    let cases = lbc_battery(seed, 10, eps);
    let mut report = run_battery(&cases, eps, false);
    let mut learned = CheckSummary::new("learning finishes within n * max_delay rounds");
    for case in &cases {
        let Ok(trace) = run(&case.graph, &case.config) else {
            continue;
        };
        let deadline = case.graph.n() as u64 * case.config.delays.max_delay();
        for i in case.graph.node_ids().filter(|&i| case.config.crashes.for_node(i).is_none()) {
            let at = trace.learned_at[i.0];
            learned.record(at.is_some_and(|r| r <= deadline), || format!("{}: node {i} learned at {at:?}", case.name));
        }
    }
    report.checks.push(learned);
    SuiteReport { suite: "lbc".into(), ..report }
}

pub fn lwa_suite(seed: u64) -> SuiteReport {
    let eps = 1e-3;
    let cases = random_battery(ProtocolKind::Lwa, 24, seed, eps);
    SuiteReport { suite: "lwa".into(), ..run_battery(&cases, eps, false) }
}
