//! Reproductions of the worked examples. Each one prints one line per claim.

use std::fmt;
use std::path::Path;

use anyhow::{anyhow, Result};
use kcca::conditions::{check_kcca, max_f, Verdict};
use kcca::graph::{ring, two_cliques, DiGraph, NodeId, NodeSet, Partition};
use kcca::protocols::ProtocolKind;
use kcca::sim::{run, Outcome, Scenario, Trace};

pub const EXAMPLE1_LOCWA: &str = include_str!("../../../scenarios/example1-locwa.toml");
pub const EXAMPLE1_KLOCWA: &str = include_str!("../../../scenarios/example1-klocwa.toml");
pub const EXAMPLE1_STRONG: &str = include_str!("../../../scenarios/example1-strong.toml");
pub const NECESSITY_RING4: &str = include_str!("../../../scenarios/necessity-ring4.toml");

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Info,
}

#[derive(Clone, Debug)]
pub struct Claim {
    pub status: Status,
    pub text: String,
}

impl Claim {
    fn check(pass: bool, text: impl Into<String>) -> Self {
        Claim { status: if pass { Status::Pass } else { Status::Fail }, text: text.into() }
    }

    fn info(text: impl Into<String>) -> Self {
        Claim { status: Status::Info, text: text.into() }
    }
}

impl fmt::Display for Claim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.status {
            Status::Pass => "[PASS]",
            Status::Fail => "[FAIL]",
            Status::Info => "[INFO]",
        };
        write!(f, "{tag} {}", self.text)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Figure {
    #[value(name = "1a")]
    Ring,
    #[value(name = "1b")]
    TwoCliques,
    #[value(name = "example1")]
    Example1,
    #[value(name = "necessity")]
    Necessity,
}

pub fn reproduce(figure: Figure) -> Result<Vec<Claim>> {
    match figure {
        Figure::Ring => ring_claims(),
        Figure::TwoCliques => two_cliques_claims(),
        Figure::Example1 => example1_claims(),
        Figure::Necessity => necessity_claims(),
    }
}

pub fn set_names(g: &DiGraph, s: NodeSet) -> String {
    format!("{{{}}}", g.names(s).join(","))
}

pub fn partition_names(g: &DiGraph, p: &Partition) -> String {
    format!("L={} C={} R={}", set_names(g, p.left), set_names(g, p.center), set_names(g, p.right))
}

fn verdict_line(g: &DiGraph, v: &Verdict) -> String {
    let head = format!("{}(f={}): {}", v.condition_name(), v.f, if v.holds { "HOLDS" } else { "FAILS" });
    match &v.witness {
        Some(p) => format!("{head} (witness {})", partition_names(g, p)),
        None => head,
    }
}

fn ring_claims() -> Result<Vec<Claim>> {
    let g = ring(4)?;
    let one = check_kcca(&g, 1, 1)?;
    let halves = |p: &Partition| {
        let mut sides = [g.names(p.left), g.names(p.right)];
        sides.sort();
        p.center.is_empty() && sides == [["a", "b"], ["c", "d"]]
    };
    let witness_ok = one.witness.as_ref().is_some_and(halves);
    let two = check_kcca(&g, 1, 2)?;
    Ok(vec![
        Claim::check(!one.holds && witness_ok, verdict_line(&g, &one)),
        Claim::check(two.holds, verdict_line(&g, &two)),
    ])
}

fn two_cliques_claims() -> Result<Vec<Claim>> {
    let g = two_cliques(8, 3)?;
    let one = check_kcca(&g, 1, 1)?;
    let two = check_kcca(&g, 1, 2)?;
    let show = |m: Option<usize>| m.map_or("none".to_string(), |m| m.to_string());
    let max1 = max_f(&g, Some(1))?;
    let max2 = max_f(&g, Some(2))?;
    let max_cca = max_f(&g, None)?;
    Ok(vec![
        Claim::check(!one.holds, verdict_line(&g, &one)),
        Claim::check(two.holds, verdict_line(&g, &two)),
        Claim::check(max1 == Some(0), format!("max f for 1-CCA: {} (expected 0)", show(max1))),
        Claim::info(format!("max f for 2-CCA: {} (n = {}, brute force)", show(max2), g.n())),
        Claim::info(format!("max f for CCA: {}", show(max_cca))),
    ])
}

fn scenario(text: &str) -> Result<Scenario> {
    Ok(Scenario::from_toml(text, None::<&Path>)?)
}

fn run_f64(sc: &Scenario) -> Result<Trace<f64>> {
    Ok(run(&sc.graph, &sc.run_config::<f64>()?)?)
}

fn converged_round(t: &Trace<f64>) -> Option<u64> {
    match t.outcome {
        Outcome::Converged { round, .. } => Some(round),
        _ => None,
    }
}

fn example1_claims() -> Result<Vec<Claim>> {
    let locwa = scenario(EXAMPLE1_LOCWA)?;
    let g = locwa.graph.clone();
    let t = run_f64(&locwa)?;
    let phases = t.observed_phases();
    let lockstep = phases > 0 && g.node_ids().all(|i| (1..=phases).all(|p| t.completion_round(i, p) == Some(p as u64)));
    let mut claims =
        vec![Claim::check(lockstep, format!("LocWA: every node finishes phase t at round t (t = 1..={phases})"))];

    let d = g.node_by_name("D").ok_or_else(|| anyhow!("example graph has no node D"))?;
    let t = run_f64(&scenario(EXAMPLE1_KLOCWA)?)?;
    let at = t.completion_round(d, 1);
    claims.push(Claim::check(at == Some(10), format!("2-LocWA: D finishes phase 1 at round {}", show_round(at))));

    let strong2 = scenario(EXAMPLE1_STRONG)?;
    let t2 = run_f64(&strong2)?;
    let firsts: Vec<Option<u64>> = g.node_ids().map(|i| t2.completion_round(i, 1)).collect();
    claims.push(Claim::check(
        firsts.iter().all(|&r| r == Some(1)),
        "Strong 2-LocWA: all nodes finish phase 1 at round 1",
    ));

    let strong1 = Scenario { kind: ProtocolKind::StrongKLocWa { k: 1 }, ..strong2 };
    let t1 = run_f64(&strong1)?;
    let (r2, r1) = (converged_round(&t2), converged_round(&t1));
    claims.push(Claim::check(
        matches!((r2, r1), (Some(a), Some(b)) if a <= b),
        format!(
            "Strong 2-LocWA reaches epsilon at round {} <= Strong 1-LocWA at round {}",
            show_round(r2),
            show_round(r1)
        ),
    ));
    Ok(claims)
}

fn show_round(r: Option<u64>) -> String {
    r.map_or("never".to_string(), |r| r.to_string())
}

fn necessity_claims() -> Result<Vec<Claim>> {
    let sc = scenario(NECESSITY_RING4)?;
    let g = &sc.graph;
    let t = run_f64(&sc)?;
    let left: NodeSet = ["a", "b"].iter().filter_map(|s| g.node_by_name(s)).collect();
    let right = g.nodes().difference(left);
    let delta = t.gap(0).unwrap_or(0.0);
    let rounds = t.rounds;
    let gaps_held = (1..=t.observed_phases()).all(|p| t.gap(p) == Some(delta));
    let crosses = |from: NodeId, to: NodeId| left.contains(from) != left.contains(to);
    let leaked = t.messages.iter().any(|m| crosses(m.from, m.to) && m.deliver_round <= rounds);
    let sides_fixed = g.node_ids().all(|i| {
        let side_value = if right.contains(i) { 1.0 } else { 0.0 };
        t.updates[i.0].iter().all(|u| u.value == side_value)
    });
    Ok(vec![
        Claim::check(
            gaps_held && rounds == 500 && delta == 1.0,
            format!("gap constant at delta = {delta} for {rounds} rounds ({} phases)", t.observed_phases()),
        ),
        Claim::check(
            !leaked && sides_fixed,
            format!("no value crosses between {} and {}", set_names(g, left), set_names(g, right)),
        ),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_figure_passes() {
        for fig in [Figure::Ring, Figure::TwoCliques, Figure::Example1, Figure::Necessity] {
            let claims = reproduce(fig).unwrap();
            assert!(!claims.is_empty());
            assert!(claims.iter().all(|c| c.status != Status::Fail), "{fig:?}: {claims:?}");
        }
    }

    #[test]
    fn ring_line_names_the_witness() {
        let claims = reproduce(Figure::Ring).unwrap();
        assert_eq!(claims[0].text, "1-CCA(f=1): FAILS (witness L={a,b} C={} R={c,d})");
        assert_eq!(claims[1].text, "2-CCA(f=1): HOLDS");
    }
}
