//! `kcca`: check topology conditions, run and sweep simulations, verify
//! invariants over generated corpora, and reproduce the worked examples.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success: condition holds, run converged, suite or reproduction passed |
//! | 1 | condition fails, or a suite or reproduction found a counterexample |
//! | 2 | bad input: unreadable or malformed graph or scenario, bad flags |
//! | 3 | a run hit `max_rounds` before reaching epsilon |
//! | 4 | a run stalled: nothing in flight and no node able to move |

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::json;

use kcca::conditions::{check_cca, check_kcca, max_f, ENUMERATION_GUARD, ORACLE_GUARD};
use kcca::graph::{random_digraph, random_undirected, write_graph, MAX_NODES};
use kcca::sim::{DelayScenario, Outcome, Scenario};
use kcca::verify::{bounds_suite, conditions_suite, lbc_suite, lwa_suite, propagation_suite, SuiteReport};
use kcca_cli::load_graph;
use kcca_cli::repro::{self, Figure, Status};
use kcca_cli::run::{run_scenario, write_outputs};

const DEFAULT_SEED: u64 = 1;

#[derive(Parser)]
#[command(name = "kcca", version, about = "Approximate crash-tolerant consensus with k-hop relays")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check 1-CCA, k-CCA or CCA on a graph.
    Check(CheckArgs),
    /// Run one scenario file.
    Simulate(SimulateArgs),
    /// Run a scenario under many random delay seeds in parallel.
    Sweep(SweepArgs),
    /// Run an invariant suite over a generated corpus.
    Verify(VerifyArgs),
    /// Write a graph in the text interchange format.
    Generate(GenerateArgs),
    /// Reproduce a worked example.
    Repro(ReproArgs),
}

#[derive(clap::Args)]
struct CheckArgs {
    /// Graph file, or builtin: ring4, ring:N, complete:N, two-cliques:N:B, example-g, random:N:P:SEED
    #[arg(long)]
    graph: String,
    /// Crash budget. Omit together with --max-f to search for the largest.
    #[arg(long, required_unless_present = "max_f")]
    f: Option<usize>,
    /// Relay depth, or `cca` for the unbounded condition.
    #[arg(long, default_value = "1")]
    k: String,
    /// Include a violating partition in the output when the condition fails.
    #[arg(long)]
    witness: bool,
    /// Report the largest f for which the condition holds instead.
    #[arg(long, conflicts_with = "f")]
    max_f: bool,
}

#[derive(clap::Args)]
struct SimulateArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Directory for trace.jsonl, report.json and gaps.csv.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the scenario's stop epsilon.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Override the scenario's round limit.
    #[arg(long)]
    max_rounds: Option<u64>,
}

#[derive(clap::Args)]
struct SweepArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, default_value_t = 16)]
    runs: u64,
    /// Run `i` uses delay seed `seed + i`.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    min_delay: u64,
    #[arg(long, default_value_t = 5)]
    max_delay: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    /// Depth monotonicity, CCA vs n-CCA, oracle agreement, witnesses, undirected connectivity.
    Conditions,
    /// Every 2-partition propagates in one direction or the other.
    #[value(name = "lemma1", alias = "propagation")]
    Propagation,
    /// Observed phases and messages stay within the closed-form bounds.
    Bounds,
    /// Flooding runs with learned topology on directed graphs.
    Lwa,
    /// Learn-then-average runs on undirected graphs.
    Lbc,
}

#[derive(clap::Args)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    suite: Suite,
    /// Largest graph in the corpus (conditions and propagation only).
    #[arg(long, default_value_t = 6)]
    n_max: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Corpus size (conditions and propagation only).
    #[arg(long, default_value_t = 200)]
    count: usize,
}

#[derive(clap::Args)]
struct GenerateArgs {
    /// Builtin spec to write out.
    #[arg(long, conflicts_with = "random")]
    graph: Option<String>,
    /// Random graph with this many nodes.
    #[arg(long, required_unless_present = "graph")]
    random: Option<usize>,
    /// Edge probability for --random.
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Symmetric edges for --random.
    #[arg(long)]
    undirected: bool,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct ReproArgs {
    #[arg(long, value_enum)]
    figure: Figure,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Check(a) => check(a),
        Command::Simulate(a) => simulate(a),
        Command::Sweep(a) => sweep(a),
        Command::Verify(a) => verify(a),
        Command::Generate(a) => generate(a),
        Command::Repro(a) => reproduce(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn parse_depth(k: &str) -> Result<Option<usize>> {
    if k.eq_ignore_ascii_case("cca") {
        return Ok(None);
    }
    match k.parse::<usize>() {
        Ok(0) => bail!("--k must be at least 1"),
        Ok(k) => Ok(Some(k)),
        Err(_) => bail!("--k must be a positive integer or `cca`, got {k:?}"),
    }
}

fn check(a: CheckArgs) -> Result<u8> {
    let g = load_graph(&a.graph)?;
    let k = parse_depth(&a.k)?;
    if g.n() > ENUMERATION_GUARD {
        bail!("graph has {} nodes; the exact check handles at most {ENUMERATION_GUARD}", g.n());
    }
    let depth = json!(k.map_or(json!("cca"), |k| json!(k)));
    if a.max_f {
        let m = max_f(&g, k)?;
        println!("{}", json!({ "graph": a.graph, "n": g.n(), "k": depth, "max_f": m }));
        return Ok(0);
    }
    let f = a.f.context("--f is required")?;
    let v = match k {
        Some(k) => check_kcca(&g, f, k)?,
        None => check_cca(&g, f)?,
    };
    let mut record =
        json!({ "graph": a.graph, "condition": v.condition_name(), "holds": v.holds, "k": depth, "f": v.f });
    if a.witness {
        record["witness"] = match &v.witness {
            Some(p) => json!({ "L": g.names(p.left), "C": g.names(p.center), "R": g.names(p.right) }),
            None => serde_json::Value::Null,
        };
    }
    println!("{record}");
    Ok(if v.holds { 0 } else { 1 })
}

fn outcome_code(outcome: Outcome) -> u8 {
    match outcome {
        Outcome::Converged { .. } => 0,
        Outcome::MaxRounds => 3,
        Outcome::Stalled { .. } => 4,
    }
}

fn load_scenario(path: &Path) -> Result<Scenario> {
    Scenario::load(path).with_context(|| format!("scenario {}", path.display()))
}

fn simulate(a: SimulateArgs) -> Result<u8> {
    let mut sc = load_scenario(&a.scenario)?;
    if let Some(eps) = a.epsilon {
        if !(eps.is_finite() && eps > 0.0) {
            bail!("--epsilon must be positive, got {eps}");
        }
        sc.stop.epsilon = Some(eps);
    }
    if let Some(m) = a.max_rounds {
        sc.stop.max_rounds = m;
    }
    let out = run_scenario(&sc)?;
    if let Some(dir) = &a.out {
        write_outputs(dir, &out)?;
    }
    let r = &out.report;
    println!(
        "{}",
        json!({
            "scenario": sc.name,
            "protocol": r.protocol,
            "outcome": r.outcome,
            "p_epsilon": r.p_epsilon,
            "rounds_to_eps": r.rounds_to_eps,
            "phase_bound": r.phase_bound,
            "messages_until_eps": r.messages_until_eps,
            "message_bound": r.message_bound,
            "validity_ok": r.validity_ok,
        })
    );
    Ok(outcome_code(r.outcome))
}

fn sweep(a: SweepArgs) -> Result<u8> {
    let base = load_scenario(&a.scenario)?;
    if a.min_delay == 0 || a.min_delay > a.max_delay {
        bail!("need 1 <= --min-delay <= --max-delay");
    }
    let rows: Vec<(u64, Result<_>)> = (0..a.runs)
        .into_par_iter()
        .map(|i| {
            let seed = a.seed.wrapping_add(i);
            let sc = Scenario {
                delays: DelayScenario::SeededRandom { min: a.min_delay, max: a.max_delay, seed },
                seed: Some(seed),
                ..base.clone()
            };
            (seed, run_scenario(&sc).map(|o| o.report))
        })
        .collect();
    println!("seed,status,p_epsilon,rounds_to_eps,messages_until_eps,phase_bound,validity_ok");
    let mut code = 0;
    let show = |x: Option<String>| x.unwrap_or_default();
    for (seed, row) in rows {
        let r = row?;
        let status = match r.outcome {
            Outcome::Converged { .. } => "converged",
            Outcome::MaxRounds => "max-rounds",
            Outcome::Stalled { .. } => "stalled",
        };
        code = code.max(outcome_code(r.outcome));
        println!(
            "{seed},{status},{},{},{},{},{}",
            show(r.p_epsilon.map(|v| v.to_string())),
            show(r.rounds_to_eps.map(|v| v.to_string())),
            show(r.messages_until_eps.map(|v| v.to_string())),
            show(r.phase_bound.map(|v| v.to_string())),
            r.validity_ok
        );
    }
    Ok(code)
}

fn print_suite(report: &SuiteReport) {
    for c in &report.checks {
        let tag = if c.passed() { "[PASS]" } else { "[FAIL]" };
        println!("{tag} {}: {} cases, {} counterexamples", c.name, c.cases, c.counterexamples.len());
        for ce in &c.counterexamples {
            println!("    {ce}");
        }
    }
}

fn verify(a: VerifyArgs) -> Result<u8> {
    let corpus = matches!(a.suite, Suite::Conditions | Suite::Propagation);
    if corpus && a.n_max > ORACLE_GUARD {
        bail!("--n-max {} exceeds the oracle guard of {ORACLE_GUARD}", a.n_max);
    }
    if corpus && a.n_max < 2 {
        bail!("--n-max must be at least 2");
    }
    let report = match a.suite {
        Suite::Conditions => conditions_suite(a.n_max, a.seed, a.count)?,
        Suite::Propagation => propagation_suite(a.n_max, a.seed, a.count)?,
        Suite::Bounds => bounds_suite(a.seed),
        Suite::Lwa => lwa_suite(a.seed),
        Suite::Lbc => lbc_suite(a.seed),
    };
    println!("suite {} (seed {})", report.suite, a.seed);
    print_suite(&report);
    Ok(if report.passed() { 0 } else { 1 })
}

fn generate(a: GenerateArgs) -> Result<u8> {
    if a.random.is_some_and(|n| n > MAX_NODES) {
        bail!("--random supports at most {MAX_NODES} nodes");
    }
    let g = match (&a.graph, a.random) {
        (Some(spec), _) => load_graph(spec)?,
        (None, Some(n)) if a.undirected => random_undirected(n, a.p, a.seed)?,
        (None, Some(n)) => random_digraph(n, a.p, a.seed)?,
        (None, None) => bail!("give --graph or --random"),
    };
    let text = write_graph(&g);
    match &a.out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(0)
}

fn reproduce(a: ReproArgs) -> Result<u8> {
    let claims = repro::reproduce(a.figure)?;
    for c in &claims {
        println!("{c}");
    }
    Ok(if claims.iter().any(|c| c.status == Status::Fail) { 1 } else { 0 })
}
