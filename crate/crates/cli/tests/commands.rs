use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn kcca(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kcca")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON record")
}

fn scenario(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name).display().to_string()
}

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("kcca-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn check_exit_codes_and_witness() {
    let out = kcca(&["check", "--graph", "ring4", "--f", "1", "--k", "1", "--witness"]);
    assert_eq!(code(&out), 1);
    let v = stdout_json(&out);
    assert_eq!(v["holds"], false);
    assert_eq!(v["witness"]["L"], serde_json::json!(["a", "b"]));
    assert_eq!(v["witness"]["R"], serde_json::json!(["c", "d"]));
    assert_eq!(v["witness"]["C"], serde_json::json!([]));

    assert_eq!(code(&kcca(&["check", "--graph", "ring4", "--f", "1", "--k", "2"])), 0);
    let out = kcca(&["check", "--graph", "ring4", "--f", "1", "--k", "cca"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout_json(&out)["k"], "cca");

    let out = kcca(&["check", "--graph", "two-cliques:8:3", "--k", "1", "--max-f"]);
    assert_eq!(stdout_json(&out)["max_f"], 0);
}

#[test]
fn malformed_input_exits_two_without_panicking() {
    let dir = scratch("bad");
    let graph = dir.join("g.txt");
    std::fs::write(&graph, "digraph 3\n0 1\n1 x\n").unwrap();
    let out = kcca(&["check", "--graph", graph.to_str().unwrap(), "--f", "1"]);
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3"), "{err}");
    assert!(!err.contains("panicked"));

    let sc = dir.join("s.toml");
    for body in [
        "f = 1\ninputs = [0, 1]\n[graph]\nbuiltin = \"ring4\"\n[protocol]\nkind = \"locwa\"\n",
        "f = 2\ninputs = [0, 1, 0, 1]\n[graph]\nbuiltin = \"ring4\"\n[protocol]\nkind = \"locwa\"\n[[crashes]]\nnode = \"a\"\nround = 0\n[[crashes]]\nnode = \"b\"\nround = 0\n[[crashes]]\nnode = \"c\"\nround = 0\n",
        "f = 1\ninputs = [0, 1, 0, 1]\n[graph]\nbuiltin = \"ring4\"\n[protocol]\nkind = \"locwa\"\n[[crashes]]\nnode = \"z\"\nround = 0\n",
        "not toml at all [",
    ] {
        std::fs::write(&sc, body).unwrap();
        let out = kcca(&["simulate", "--scenario", sc.to_str().unwrap()]);
        assert_eq!(code(&out), 2, "{body}: {}", String::from_utf8_lossy(&out.stderr));
    }
    for args in [
        &["check", "--graph", "ring4", "--f", "1", "--k", "0"][..],
        &["verify", "--suite", "conditions", "--n-max", "11"],
        &["repro", "--figure", "9"],
        &["generate", "--random", "4", "--p", "2"],
        &["simulate", "--scenario", "/no/such/file.toml"],
    ] {
        assert_eq!(code(&kcca(args)), 2, "{args:?}");
    }
}

#[test]
fn simulate_writes_trace_report_and_gaps() {
    let dir = scratch("sim");
    let out = kcca(&["simulate", "--scenario", &scenario("example1-klocwa.toml"), "--out", dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
    // node D, phase 1
    assert_eq!(report["phase_rounds"][3][0], 10);
    let trace = std::fs::read_to_string(dir.join("trace.jsonl")).unwrap();
    let kinds: Vec<String> = trace
        .lines()
        .map(|l| serde_json::from_str::<Value>(l).unwrap()["type"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(kinds.first().map(String::as_str), Some("config"));
    assert_eq!(kinds.last().map(String::as_str), Some("summary"));
    assert!(kinds.iter().any(|k| k == "send") && kinds.iter().any(|k| k == "update"));
    let gaps = std::fs::read_to_string(dir.join("gaps.csv")).unwrap();
    assert!(gaps.starts_with("phase,gap\n0,3\n"));

    let out = kcca(&["simulate", "--scenario", &scenario("example1-locwa.toml"), "--out", dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let report: Value = serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
    for rounds in report["phase_rounds"].as_array().unwrap() {
        for (p, r) in rounds.as_array().unwrap().iter().enumerate() {
            assert_eq!(r.as_u64(), Some(p as u64 + 1));
        }
    }
}

#[test]
fn every_shipped_scenario_runs() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let out = kcca(&["simulate", "--scenario", path.to_str().unwrap()]);
        let expected = if path.ends_with("necessity-ring4.toml") { 3 } else { 0 };
        assert_eq!(code(&out), expected, "{}: {}", path.display(), String::from_utf8_lossy(&out.stderr));
        assert_eq!(stdout_json(&out)["validity_ok"], true);
        seen += 1;
    }
    assert!(seen >= 6);
}

#[test]
fn exact_and_float_runs_agree_on_the_ring() {
    let exact = stdout_json(&kcca(&["simulate", "--scenario", &scenario("ring4-klocwa-exact.toml")]));
    let float = stdout_json(&kcca(&["simulate", "--scenario", &scenario("ring4-klocwa.toml")]));
    assert_eq!(exact["p_epsilon"], float["p_epsilon"]);
    assert_eq!(exact["phase_bound"], 242.0);
}

#[test]
fn repro_and_verify_pass() {
    for fig in ["1a", "1b", "example1", "necessity"] {
        let out = kcca(&["repro", "--figure", fig]);
        assert_eq!(code(&out), 0, "{fig}");
        let text = String::from_utf8_lossy(&out.stdout);
        assert!(text.contains("[PASS]") && !text.contains("[FAIL]"), "{text}");
    }
    let out = kcca(&["verify", "--suite", "conditions", "--n-max", "5", "--count", "40"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    assert_eq!(code(&kcca(&["verify", "--suite", "lemma1", "--n-max", "5", "--count", "40"])), 0);
}

#[test]
fn sweep_reports_one_row_per_seed() {
    let out = kcca(&["sweep", "--scenario", &scenario("ring4-klocwa.toml"), "--runs", "5", "--seed", "10"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().zip(10..).all(|(r, s)| r.starts_with(&format!("{s},converged,"))));
    let again = kcca(&["sweep", "--scenario", &scenario("ring4-klocwa.toml"), "--runs", "5", "--seed", "10"]);
    assert_eq!(String::from_utf8(again.stdout).unwrap(), text);
}

#[test]
fn generated_graphs_feed_back_into_check() {
    let dir = scratch("gen");
    let file = dir.join("g.txt");
    let out = kcca(&["generate", "--graph", "two-cliques:8:3", "--out", file.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert_eq!(code(&kcca(&["check", "--graph", file.to_str().unwrap(), "--f", "1", "--k", "2"])), 0);
    let a = kcca(&["generate", "--random", "6", "--p", "0.5"]);
    let b = kcca(&["generate", "--random", "6", "--p", "0.5", "--seed", "1"]);
    assert_eq!(a.stdout, b.stdout);
}
