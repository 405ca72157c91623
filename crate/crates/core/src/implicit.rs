//! Implicit-complementarity interior-point method on `J(v)`.

use crate::config::{LinearStrategy, SolverConfig};
use crate::diagnostics::{IterationRecord, SolveTrace, Status, TraceHeader};
use crate::error::{Error, Result};
use crate::inexact::{step_with_frozen, FrozenFactorization};
use crate::ipm::{axpy, backtrack, initial_x, mu_from_gap, Best, Tracker};
use crate::kkt::{Formulation, KktAssembler, KktSolver, KktSystem, StepReport};
use crate::linalg::norm_inf;
use crate::problem::{ImplicitIterate, QpProblem};
use crate::residuals::{duality_gap, implicit_residuals, residuals, ResidualVector};
use crate::retraction::{evaluate_retraction, softplus_unchecked, RetractionEval};
use crate::scalar::{Precision, Real};

/// Initial barrier parameter.
pub const MU0: f64 = 1.0;

/// Newton direction of the implicit method.
#[derive(Debug, Clone, PartialEq)]
pub struct ImplicitDirection {
    pub dx: Vec<f64>,
    pub dv: Vec<f64>,
    pub dgamma: Vec<f64>,
    pub dlambda: Vec<f64>,
    pub ds: Vec<f64>,
}

fn rhs(problem: &QpProblem, r: &ResidualVector) -> Vec<f64> {
    let m = problem.m;
    let (rl, rs) = r.r_comp.split_at(m);
    let w: Vec<f64> = (0..m).map(|i| r.r_i[i] - rl[i] + rs[i]).collect();
    let atw = problem.a.tmul_vec(&w);
    let mut out: Vec<f64> = r.r_x.iter().zip(&atw).map(|(rx, a)| -rx + a).collect();
    out.extend((0..m).map(|i| r.r_i[i] + rs[i]));
    out.extend_from_slice(&r.r_e);
    out
}

pub(crate) fn assemble_with(
    asm: &KktAssembler,
    problem: &QpProblem,
    z: &ImplicitIterate,
    mu: f64,
) -> Result<(KktSystem, ResidualVector, RetractionEval<f64>)> {
    let ret = evaluate_retraction(&z.v, mu)?;
    let r = implicit_residuals(problem, z, mu)?;
    Ok((asm.system(&ret.db_minus, rhs(problem, &r)), r, ret))
}

/// `J(v)` and `(−r_x + Aᵀ(r_i − r_λ + r_s), r_i + r_s, r_e)`.
pub fn assemble_implicit(problem: &QpProblem, z: &ImplicitIterate, mu: f64) -> Result<KktSystem> {
    let asm = KktAssembler::new(problem, Formulation::Implicit);
    assemble_with(&asm, problem, z, mu).map(|(s, _, _)| s)
}

pub(crate) fn recover(
    problem: &QpProblem,
    dz: &[f64],
    r: &ResidualVector,
    ret: &RetractionEval<f64>,
) -> ImplicitDirection {
    let (n, m) = (problem.n, problem.m);
    let dv = dz[n..n + m].to_vec();
    let (rl, rs) = r.r_comp.split_at(m);
    ImplicitDirection {
        dx: dz[..n].to_vec(),
        dlambda: (0..m).map(|i| ret.db_plus[i] * dv[i] - rl[i]).collect(),
        ds: (0..m).map(|i| -ret.db_minus[i] * dv[i] - rs[i]).collect(),
        dgamma: dz[n + m..].to_vec(),
        dv,
    }
}

/// Newton direction at `z` by a fresh solve of `J(v)`.
pub fn implicit_step<T: Real>(
    problem: &QpProblem,
    z: &ImplicitIterate,
    mu: f64,
    solver: &mut KktSolver<T>,
    strategy: LinearStrategy,
) -> Result<(ImplicitDirection, StepReport)> {
    let asm = KktAssembler::new(problem, Formulation::Implicit);
    let (sys, r, ret) = assemble_with(&asm, problem, z, mu)?;
    let (dz, rep) = match strategy {
        LinearStrategy::Minres => solver.solve_minres(&sys)?,
        _ => {
            let (dz, _, rep) = solver.solve_direct(&sys)?;
            (dz, rep)
        }
    };
    Ok((recover(problem, &dz, &r, &ret), rep))
}

fn moved(z: &ImplicitIterate, d: &ImplicitDirection, a: f64) -> ImplicitIterate {
    ImplicitIterate {
        x: axpy(&z.x, a, &d.dx),
        lambda: axpy(&z.lambda, a, &d.dlambda),
        gamma: axpy(&z.gamma, a, &d.dgamma),
        s: axpy(&z.s, a, &d.ds),
        v: axpy(&z.v, a, &d.dv),
    }
}

/// Runs the implicit method on `problem` as given (no equilibration).
pub fn solve_implicit(
    problem: &QpProblem,
    config: &SolverConfig,
) -> Result<(ImplicitIterate, SolveTrace)> {
    config.validate()?;
    match config.precision {
        Precision::F64 => run::<f64>(problem, config),
        Precision::F32 => run::<f32>(problem, config),
    }
}

fn run<T: Real>(
    problem: &QpProblem,
    config: &SolverConfig,
) -> Result<(ImplicitIterate, SolveTrace)> {
    let mut tr = Tracker::new(
        SolveTrace::new(TraceHeader::new(&problem.name, config)),
        config,
    );
    let asm = KktAssembler::new(problem, Formulation::Implicit);
    let mut solver = KktSolver::<T>::new(config.minres_options());
    let mut frozen: Option<FrozenFactorization<T>> = None;
    let m = problem.m;
    let start = MU0.sqrt();
    let mut z = ImplicitIterate {
        x: initial_x(problem)?,
        lambda: vec![start; m],
        gamma: vec![0.0; problem.p],
        s: vec![start; m],
        v: vec![0.0; m],
    };
    let mut mu = MU0;
    let mut best = Best::new();
    tr.restart_clock();

    for k in 0..=config.max_iters {
        let gap = duality_gap(&z.lambda, &z.s)?;
        let kkt = residuals(problem, &z.to_explicit(), 0.0)?.max_norm();
        let (sys, r, ret) = assemble_with(&asm, problem, &z, mu)?;
        let norms = r.norms();
        let mut rec = IterationRecord::new(k);
        rec.mu = if m == 0 { 0.0 } else { mu };
        rec.gap = gap;
        rec.r_x = norms.r_x;
        rec.r_i = norms.r_i;
        rec.r_e = norms.r_e;
        rec.r_comp = norms.r_comp;
        rec.kkt = kkt;
        let score = kkt.max(gap);
        best.offer(score, &z);
        tr.spectral(&mut rec, &sys, &ret.db_minus, Some(&ret.db_minus))?;

        if score <= config.tol {
            tr.push(rec)?;
            return Ok((z, tr.finish(Status::Converged)));
        }
        if k == config.max_iters {
            tr.push(rec)?;
            break;
        }

        let mut retried = false;
        let (d, a) = loop {
            let solved = match config.linear {
                LinearStrategy::Direct => solver
                    .solve_direct(&sys)
                    .map(|(dz, _, rep)| (dz, rep, false)),
                LinearStrategy::Minres => {
                    solver.solve_minres(&sys).map(|(dz, rep)| (dz, rep, false))
                }
                LinearStrategy::Inexact => step_with_frozen(
                    &sys,
                    &z.v,
                    &ret.db_minus,
                    mu,
                    frozen.take(),
                    config.theta,
                    &mut solver,
                    k,
                )
                .map(|(dz, cache, used, rep)| {
                    frozen = Some(cache);
                    (dz, rep, used)
                }),
            };
            let (dz, rep, used_frozen) = match solved {
                Ok(v) => v,
                Err(e) => {
                    let e = Error::LinearSolve {
                        iteration: k,
                        source: Box::new(e),
                    };
                    tr.trace.warn(e.to_string());
                    tr.push(rec)?;
                    return Ok((best.z.unwrap_or(z), tr.finish(Status::Stalled)));
                }
            };
            if !retried {
                tr.step_fields(&mut rec, &rep);
            } else {
                rec.factorized = true;
                rec.inertia = rep.inertia;
            }
            let d = recover(problem, &dz, &r, &ret);
            let alpha = backtrack(norms.max(), 1.0, |a| {
                implicit_residuals(problem, &moved(&z, &d, a), mu)
                    .map_or(f64::INFINITY, |r| r.max_norm())
            });
            match alpha {
                Some(a) => break (d, a),
                None if used_frozen => {
                    tr.trace.warn(format!(
                        "iteration {k}: frozen step rejected by the line search; refactoring"
                    ));
                    frozen = None;
                    retried = true;
                }
                None => {
                    tr.trace.warn(format!(
                        "iteration {k}: line search failed below step 1e-10"
                    ));
                    tr.push(rec)?;
                    return Ok((best.z.unwrap_or(z), tr.finish(Status::Stalled)));
                }
            }
        };
        rec.alpha = a;
        tr.push(rec)?;
        z = moved(&z, &d, a);

        let mut resets = 0;
        for i in 0..m {
            if !(z.lambda[i] > 0.0) {
                z.lambda[i] = softplus_unchecked(z.v[i], mu);
                resets += 1;
            }
            if !(z.s[i] > 0.0) {
                z.s[i] = softplus_unchecked(-z.v[i], mu);
                resets += 1;
            }
        }
        if resets > 0 {
            tr.trace.warn(format!(
                "iteration {k}: {resets} nonpositive multipliers or slacks reset onto the retraction"
            ));
        }
        if m > 0 {
            let feas = residuals(problem, &z.to_explicit(), 0.0)?;
            let infeas = norm_inf(&feas.r_x)
                .max(norm_inf(&feas.r_i))
                .max(norm_inf(&feas.r_e));
            let next = mu_from_gap(config.sigma, duality_gap(&z.lambda, &z.s)?, m)
                .max(config.sigma * infeas);
            if !(next > 0.0) {
                tr.trace
                    .warn(format!("iteration {k}: barrier parameter underflowed"));
                return Ok((best.z.unwrap_or(z), tr.finish(Status::Stalled)));
            }
            mu = mu.min(next);
        }
    }
    Ok((best.z.unwrap_or(z), tr.finish(Status::MaxIters)))
}
