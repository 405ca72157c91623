//! Factorization reuse for the implicit method via the inexact-Newton
//! condition `‖(B_μ(−v*) − B_μ(−v_k))Δv_k‖₂ ≤ θ‖r̃₂‖₂`.

use crate::config::{LinearStrategy, SolverConfig};
use crate::diagnostics::SolveTrace;
use crate::error::{Error, Result};
use crate::implicit::{assemble_with, recover, solve_implicit, ImplicitDirection};
use crate::kkt::{Formulation, KktAssembler, KktSolver, KktSystem, StepReport};
use crate::linalg::{norm2, Factorization};
use crate::problem::{ImplicitIterate, QpProblem};
use crate::retraction::evaluate_retraction;
use crate::scalar::Real;

/// A factorization of `J(v*)` kept across iterations.
#[derive(Debug, Clone)]
pub struct FrozenFactorization<T> {
    pub factorization: Factorization<T>,
    pub v_star: Vec<f64>,
    /// Middle diagonal `B_{μ*}(−v*)` stored in the frozen matrix.
    pub db_star: Vec<f64>,
    pub mu_star: f64,
    pub created_at: usize,
    pub reuse_count: usize,
}

/// Checks the simplified inexact-Newton condition with both diagonals
/// evaluated at the same `μ`.
pub fn inexact_condition(
    v_star: &[f64],
    v_k: &[f64],
    dv_k: &[f64],
    mu: f64,
    theta: f64,
    r2_k: &[f64],
) -> bool {
    let (Ok(a), Ok(b)) = (
        evaluate_retraction(v_star, mu),
        evaluate_retraction(v_k, mu),
    ) else {
        return false;
    };
    frozen_condition(&a.db_minus, &b.db_minus, dv_k, theta, r2_k)
}

/// `‖(db* − db_k) ⊙ Δv_k‖₂ ≤ θ‖r₂‖₂` for explicit diagonals.
pub fn frozen_condition(
    db_star: &[f64],
    db_k: &[f64],
    dv_k: &[f64],
    theta: f64,
    r2_k: &[f64],
) -> bool {
    if db_star.len() != db_k.len() || db_k.len() != dv_k.len() {
        return false;
    }
    let lhs: Vec<f64> = (0..dv_k.len())
        .map(|i| (db_star[i] - db_k[i]) * dv_k[i])
        .collect();
    norm2(&lhs) <= theta * norm2(r2_k)
}

/// Solves `sys` with the frozen factorization when the inexact condition
/// accepts its step, otherwise refactors at the current iterate.
#[allow(clippy::too_many_arguments)]
pub(crate) fn step_with_frozen<T: Real>(
    sys: &KktSystem,
    v_k: &[f64],
    db_k: &[f64],
    mu: f64,
    cache: Option<FrozenFactorization<T>>,
    theta: f64,
    solver: &mut KktSolver<T>,
    iteration: usize,
) -> Result<(Vec<f64>, FrozenFactorization<T>, bool, StepReport)> {
    let (n, m) = (sys.n, sys.m);
    let r2 = &sys.rhs[n..n + m];
    if let Some(mut cache) = cache {
        let dz = solver.solve_with(&cache.factorization, &sys.rhs)?;
        if frozen_condition(&cache.db_star, db_k, &dz[n..n + m], theta, r2) {
            cache.reuse_count += 1;
            let residual = crate::kkt::linear_residual(&sys.matrix, &dz, &sys.rhs);
            let mut report = StepReport {
                factorized: false,
                linear_residual: residual,
                ..Default::default()
            };
            if cfg!(debug_assertions) {
                let mut jd = sys.matrix.mul_vec_f64(&dz);
                jd.iter_mut().zip(&sys.rhs).for_each(|(a, b)| *a -= b);
                if norm2(&jd) > theta * norm2(&sys.rhs) * (1.0 + 1e-10) + 1e-14 {
                    report.warnings.push(format!(
                        "frozen step violates the unsimplified inexact-Newton condition ({:.3e} > {:.3e})",
                        norm2(&jd),
                        theta * norm2(&sys.rhs)
                    ));
                }
            }
            return Ok((dz, cache, true, report));
        }
    }
    let (dz, f, report) = solver.solve_direct(sys)?;
    let cache = FrozenFactorization {
        factorization: f,
        v_star: v_k.to_vec(),
        db_star: db_k.to_vec(),
        mu_star: mu,
        created_at: iteration,
        reuse_count: 0,
    };
    Ok((dz, cache, false, report))
}

/// One implicit Newton step that reuses `cache` when the inexact-Newton
/// condition allows it.
pub fn step_with_reuse<T: Real>(
    problem: &QpProblem,
    z: &ImplicitIterate,
    mu: f64,
    cache: Option<FrozenFactorization<T>>,
    theta: f64,
    solver: &mut KktSolver<T>,
) -> Result<(ImplicitDirection, FrozenFactorization<T>, bool)> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::Config(format!(
            "theta must lie in (0, 1), got {theta}"
        )));
    }
    let asm = KktAssembler::new(problem, Formulation::Implicit);
    let (sys, r, ret) = assemble_with(&asm, problem, z, mu)?;
    let iteration = cache
        .as_ref()
        .map_or(0, |c| c.created_at + c.reuse_count + 1);
    let (dz, cache, used, _) = step_with_frozen(
        &sys,
        &z.v,
        &ret.db_minus,
        mu,
        cache,
        theta,
        solver,
        iteration,
    )?;
    Ok((recover(problem, &dz, &r, &ret), cache, used))
}

/// Implicit method with factorization reuse at constant forcing term
/// `config.theta`.
pub fn solve_implicit_inexact(
    problem: &QpProblem,
    config: &SolverConfig,
) -> Result<(ImplicitIterate, SolveTrace)> {
    let mut c = config.clone();
    c.linear = LinearStrategy::Inexact;
    solve_implicit(problem, &c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::builtin_problem;
    use crate::retraction::softplus_derivative;

    #[test]
    fn trivial_cases_pass() {
        let v = [0.3, -1.2, 2.0];
        assert!(inexact_condition(
            &v,
            &v,
            &[5.0, -3.0, 1.0],
            0.7,
            0.1,
            &[1e-3, 0.0, 0.0]
        ));
        assert!(inexact_condition(
            &[0.0; 3],
            &v,
            &[0.0; 3],
            0.7,
            0.1,
            &[1e-9, 0.0, 0.0]
        ));
    }

    #[test]
    fn matches_elementwise_recomputation() {
        let v_star = [0.0, 0.0];
        let v_k = [1.0, 1.0];
        let dv = [0.4, -0.2];
        let r2 = [0.1, 0.05];
        let d =
            softplus_derivative(-0.0f64, 1.0).unwrap() - softplus_derivative(-1.0f64, 1.0).unwrap();
        let lhs = ((d * dv[0]).powi(2) + (d * dv[1]).powi(2)).sqrt();
        let rhs = 0.5 * (0.1f64.powi(2) + 0.05f64.powi(2)).sqrt();
        assert_eq!(
            inexact_condition(&v_star, &v_k, &dv, 1.0, 0.5, &r2),
            lhs <= rhs
        );
        assert_eq!(
            inexact_condition(&v_star, &v_k, &dv, 1.0, 0.9, &r2),
            lhs <= 0.9 / 0.5 * rhs
        );
    }

    #[test]
    fn first_call_factors() {
        let p = builtin_problem("synthetic2d").unwrap();
        let z = ImplicitIterate {
            x: vec![0.0; 2],
            lambda: vec![1.0; 4],
            gamma: vec![],
            s: vec![1.0; 4],
            v: vec![0.0; 4],
        };
        let mut solver = KktSolver::<f64>::default();
        let (_, cache, used) = step_with_reuse(&p, &z, 1.0, None, 0.5, &mut solver).unwrap();
        assert!(!used);
        assert_eq!(cache.reuse_count, 0);
        let (_, cache, used) = step_with_reuse(&p, &z, 1.0, Some(cache), 0.5, &mut solver).unwrap();
        assert!(used);
        assert_eq!(cache.reuse_count, 1);
    }
}
