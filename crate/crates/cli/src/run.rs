use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use kcca::metrics::{analyze, ConvergenceReport};
use kcca::sim::{run, Outcome, ScalarKind, Scenario};
use kcca::{BigRational, Scalar};

/// Epsilon used for the report when the scenario runs without a stop epsilon.
pub const REPORT_EPSILON: f64 = 1e-3;

pub struct RunOutput {
    pub jsonl: String,
    pub report: ConvergenceReport,
}

fn run_as<S: Scalar>(sc: &Scenario) -> Result<RunOutput> {
    let cfg = sc.run_config::<S>()?;
    let trace = run(&sc.graph, &cfg)?;
    let eps = sc.stop.epsilon.unwrap_or(REPORT_EPSILON);
    let report = analyze(&sc.graph, &trace, eps)?;
    Ok(RunOutput { jsonl: trace.to_jsonl(), report })
}

/// Runs a scenario with the scalar type it names.
pub fn run_scenario(sc: &Scenario) -> Result<RunOutput> {
    match sc.scalar {
        ScalarKind::F32 => run_as::<f32>(sc),
        ScalarKind::F64 => run_as::<f64>(sc),
        ScalarKind::Exact => run_as::<BigRational>(sc),
    }
}

/// Writes `trace.jsonl`, `report.json` and `gaps.csv` into `dir`.
pub fn write_outputs(dir: &Path, out: &RunOutput) -> Result<()> {
    if dir.exists() && !dir.is_dir() {
        bail!("{} exists and is not a directory", dir.display());
    }
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let write = |name: &str, body: &str| {
        let path = dir.join(name);
        fs::write(&path, body).with_context(|| format!("cannot write {}", path.display()))
    };
    write("trace.jsonl", &out.jsonl)?;
    write("report.json", &(serde_json::to_string_pretty(&out.report)? + "\n"))?;
    write("gaps.csv", &out.report.gaps_csv())
}

pub fn converged(outcome: Outcome) -> bool {
    matches!(outcome, Outcome::Converged { .. })
}
