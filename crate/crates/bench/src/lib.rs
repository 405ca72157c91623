//! Shared inputs for the solver benchmarks.

use std::path::PathBuf;

use ipqp::{load_problem, QpProblem};

/// Small Maros-Meszaros instances shipped with the repository.
pub const INSTANCES: [&str; 6] = ["HS21", "HS35", "HS76", "HS118", "LOTSCHD", "QAFIRO"];

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/maros_meszaros")
}

/// Loads `name`, either a built-in instance or a file in the data directory.
pub fn instance(name: &str) -> QpProblem {
    load_problem(name)
        .or_else(|_| load_problem(data_dir().join(format!("{name}.QPS")).to_str().unwrap()))
        .unwrap_or_else(|e| panic!("{name}: {e}"))
}
