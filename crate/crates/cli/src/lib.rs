//! Pipelines behind the `kcca` binary: graph loading, scenario runs with the
//! scalar a scenario asks for, and the bundled reproductions.

pub mod repro;
pub mod run;

use std::path::Path;

use anyhow::{Context, Result};
use kcca::graph::{builtin, parse_graph, DiGraph};

/// A graph argument is a file path if one exists, otherwise a builtin spec.
pub fn load_graph(arg: &str) -> Result<DiGraph> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {arg}"))?;
        return parse_graph(&text).with_context(|| format!("graph file {arg}"));
    }
    builtin(arg).with_context(|| format!("{arg:?} is neither a graph file nor a builtin graph"))
}
