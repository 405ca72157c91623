//! Top-level entry point: equilibrate, run a method, map back.

use serde::{Deserialize, Serialize};

use crate::config::{Method, SolverConfig};
use crate::diagnostics::{SolveTrace, Status};
use crate::equilibrate::{ruiz_equilibrate, Unscale};
use crate::error::Result;
use crate::explicit::solve_explicit;
use crate::implicit::solve_implicit;
use crate::problem::{ExplicitIterate, QpProblem};
use crate::residuals::{duality_gap, residuals, ResidualNorms};

pub const SOLUTION_SCHEMA: &str = "solution_v1";

/// Final iterate in original coordinates with summary statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub schema: String,
    pub problem: String,
    pub method: Method,
    pub status: Status,
    pub x: Vec<f64>,
    pub lambda: Vec<f64>,
    pub gamma: Vec<f64>,
    pub s: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<Vec<f64>>,
    pub objective: f64,
    pub gap: f64,
    /// Unrelaxed KKT residual norms.
    pub residuals: ResidualNorms,
    pub iterations: usize,
    pub factorizations: usize,
    pub krylov_iterations: usize,
}

impl Solution {
    pub fn converged(&self) -> bool {
        self.status == Status::Converged
    }

    pub fn iterate(&self) -> ExplicitIterate {
        ExplicitIterate {
            x: self.x.clone(),
            lambda: self.lambda.clone(),
            gamma: self.gamma.clone(),
            s: self.s.clone(),
        }
    }

    /// Builds a summary for `z` on `problem` from a finished trace.
    pub fn from_iterate(
        problem: &QpProblem,
        z: ExplicitIterate,
        v: Option<Vec<f64>>,
        trace: &SolveTrace,
        method: Method,
    ) -> Result<Self> {
        let res = residuals(problem, &z, 0.0)?.norms();
        Ok(Solution {
            schema: SOLUTION_SCHEMA.into(),
            problem: problem.name.clone(),
            method,
            status: trace.status.unwrap_or(Status::MaxIters),
            objective: problem.objective(&z.x),
            gap: duality_gap(&z.lambda, &z.s)?,
            residuals: res,
            iterations: trace.iterations(),
            factorizations: trace.factorizations(),
            krylov_iterations: trace.krylov_total(),
            x: z.x,
            lambda: z.lambda,
            gamma: z.gamma,
            s: z.s,
            v,
        })
    }
}

/// Solves `problem` with the method and options in `config`.
///
/// With `config.equilibrate` the method runs on a Ruiz-scaled copy and the
/// result is mapped back; residuals in the solution refer to the original
/// data.
pub fn solve(problem: &QpProblem, config: &SolverConfig) -> Result<(Solution, SolveTrace)> {
    config.validate()?;
    problem.validate()?;
    let (work, scaling) = if config.equilibrate {
        let (p, s) = ruiz_equilibrate(problem, config.ruiz_passes, config.ruiz_tol);
        (p, Some(s))
    } else {
        (problem.clone(), None)
    };
    let (z, v, mut trace) = match config.method {
        Method::Explicit => {
            let (z, t) = solve_explicit(&work, config)?;
            let z = scaling.as_ref().map_or(z.clone(), |s| z.unscale(s));
            (z, None, t)
        }
        Method::Implicit => {
            let (z, t) = solve_implicit(&work, config)?;
            let z = scaling.as_ref().map_or(z.clone(), |s| z.unscale(s));
            let v = z.v.clone();
            (z.to_explicit(), Some(v), t)
        }
    };
    if let Some(s) = &scaling {
        for w in &s.warnings {
            trace.warn(format!("equilibration: {w}"));
        }
    }
    let sol = Solution::from_iterate(problem, z, v, &trace, config.method)?;
    Ok((sol, trace))
}
