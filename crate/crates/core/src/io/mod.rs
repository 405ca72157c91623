//! Problem input (QPS, JSON, built-in instances) and solution output.

mod builtin;
mod json;
mod qps;

use std::path::Path;

pub use builtin::{builtin_problem, BUILTIN_PROBLEMS};
pub use json::{
    read_problem, read_solution, write_problem, write_solution, ProblemJson, Triplets,
    PROBLEM_SCHEMA,
};
pub use qps::{parse_qps, read_qps, to_qp_problem, ObjSense, QpsFile, RowKind};

use crate::error::Result;
use crate::problem::QpProblem;

/// Loads a problem by file extension (`.qps`/`.mps` or `.json`), or a
/// built-in instance when `spec` names one.
pub fn load_problem(spec: &str) -> Result<QpProblem> {
    if BUILTIN_PROBLEMS.contains(&spec) {
        return builtin_problem(spec);
    }
    let path = Path::new(spec);
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase());
    match ext.as_deref() {
        Some("json") => read_problem(path),
        Some("qps") | Some("mps") | Some("sif") => to_qp_problem(&read_qps(path)?),
        _ if path.exists() => to_qp_problem(&read_qps(path)?),
        _ => builtin_problem(spec),
    }
}
