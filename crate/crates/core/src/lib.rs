//! Primal-dual interior-point solvers for convex quadratic programs
//!
//! ```text
//! min ½xᵀQx + qᵀx   s.t.   Ax ≥ b,  Cx = d
//! ```
//!
//! Two formulations are provided. The explicit one linearizes the relaxed
//! complementarity `λ⊙s = μ` and solves a KKT system whose middle block
//! `−Λ⁻¹S` degenerates as `μ → 0`. The implicit one substitutes
//! `λ = b_μ(v)`, `s = b_μ(−v)` with a smooth softplus retraction, so the
//! middle block `−B_μ(−v)` stays inside `(−1, 0)`. The implicit method can
//! also reuse a factorization across iterations under an inexact-Newton
//! condition, or solve with preconditioned MINRES.
//!
//! ```
//! use ipqp::{builtin_problem, solve, LinearStrategy, Method, SolverConfig};
//!
//! let problem = builtin_problem("synthetic2d").unwrap();
//! let config = SolverConfig::new(Method::Implicit, LinearStrategy::Direct);
//! let (solution, trace) = solve(&problem, &config).unwrap();
//! assert!(solution.converged());
//! assert!(trace.iterations() < 30);
//! ```

pub mod config;
pub mod diagnostics;
pub mod equilibrate;
mod error;
pub mod explicit;
pub mod implicit;
pub mod inexact;
pub mod io;
mod ipm;
pub mod kkt;
pub mod linalg;
pub mod problem;
pub mod residuals;
pub mod retraction;
mod scalar;
pub mod solve;

pub use config::{LinearStrategy, Method, SolverConfig, TraceLevel};
pub use diagnostics::{IterationRecord, SolveTrace, SpectrumMetrics, Status, TraceHeader};
pub use equilibrate::{ruiz_equilibrate, unscale_solution, ScalingState, Unscale};
pub use error::{Error, Result};
pub use explicit::{assemble_explicit, explicit_step, solve_explicit, ExplicitDirection};
pub use implicit::{assemble_implicit, implicit_step, solve_implicit, ImplicitDirection};
pub use inexact::{
    inexact_condition, solve_implicit_inexact, step_with_reuse, FrozenFactorization,
};
pub use io::{builtin_problem, load_problem, parse_qps, to_qp_problem, QpsFile};
pub use kkt::{KktSolver, KktSystem};
pub use linalg::{CscMatrix, Inertia, SparseSymmetric};
pub use problem::{ExplicitIterate, ImplicitIterate, QpProblem};
pub use residuals::{
    duality_gap, implicit_residuals, kkt_error, residuals, ResidualNorms, ResidualVector,
};
pub use retraction::{
    evaluate_retraction, exponential_map, softplus, softplus_derivative, RetractionEval,
};
pub use scalar::{Precision, Real};
pub use solve::{solve, Solution};
