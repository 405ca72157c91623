//! Standard primal-dual interior-point method on `E(λ,s)`.

use std::time::Instant;

use crate::config::{LinearStrategy, SolverConfig};
use crate::diagnostics::{IterationRecord, SolveTrace, Status, TraceHeader};
use crate::error::{Error, Result};
use crate::ipm::{
    axpy, backtrack, fraction_to_boundary, initial_x, mu_from_gap, neg, Best, Tracker,
};
use crate::kkt::{Formulation, KktAssembler, KktSolver, KktSystem, StepReport};
use crate::problem::{ExplicitIterate, QpProblem};
use crate::residuals::{duality_gap, residuals, ResidualVector};
use crate::scalar::{Precision, Real};

/// Newton direction of the explicit method.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplicitDirection {
    pub dx: Vec<f64>,
    pub dlambda: Vec<f64>,
    pub dgamma: Vec<f64>,
    pub ds: Vec<f64>,
}

fn check_interior(z: &ExplicitIterate) -> Result<()> {
    if let Some(i) = z.lambda.iter().position(|v| !(*v > 0.0)) {
        return Err(Error::NotInterior(format!("lambda[{i}] = {}", z.lambda[i])));
    }
    if let Some(i) = z.s.iter().position(|v| !(*v > 0.0)) {
        return Err(Error::NotInterior(format!("s[{i}] = {}", z.s[i])));
    }
    Ok(())
}

fn ratio(z: &ExplicitIterate) -> Vec<f64> {
    z.s.iter().zip(&z.lambda).map(|(s, l)| s / l).collect()
}

fn rhs(z: &ExplicitIterate, r: &ResidualVector) -> Vec<f64> {
    let mut out = neg(&r.r_x);
    out.extend(
        r.r_i
            .iter()
            .zip(&r.r_comp)
            .zip(&z.lambda)
            .map(|((ri, rc), l)| ri + rc / l),
    );
    out.extend_from_slice(&r.r_e);
    out
}

/// `E(λ,s)` and `(−r_x, r_i + Λ⁻¹r_c, r_e)`.
pub fn assemble_explicit(problem: &QpProblem, z: &ExplicitIterate, mu: f64) -> Result<KktSystem> {
    let asm = KktAssembler::new(problem, Formulation::Explicit);
    assemble_with(&asm, problem, z, mu).map(|(s, _)| s)
}

fn assemble_with(
    asm: &KktAssembler,
    problem: &QpProblem,
    z: &ExplicitIterate,
    mu: f64,
) -> Result<(KktSystem, ResidualVector)> {
    check_interior(z)?;
    let r = residuals(problem, z, mu)?;
    Ok((asm.system(&ratio(z), rhs(z, &r)), r))
}

fn recover(problem: &QpProblem, dz: &[f64], r: &ResidualVector) -> ExplicitDirection {
    let (n, m) = (problem.n, problem.m);
    let dx = dz[..n].to_vec();
    let ax = problem.a.mul_vec(&dx);
    ExplicitDirection {
        ds: ax.iter().zip(&r.r_i).map(|(a, ri)| a + ri).collect(),
        dlambda: dz[n..n + m].to_vec(),
        dgamma: dz[n + m..].to_vec(),
        dx,
    }
}

fn solve_system<T: Real>(
    solver: &mut KktSolver<T>,
    sys: &KktSystem,
    strategy: LinearStrategy,
) -> Result<(Vec<f64>, StepReport)> {
    match strategy {
        LinearStrategy::Minres => solver.solve_minres(sys),
        _ => solver.solve_direct(sys).map(|(dz, _, rep)| (dz, rep)),
    }
}

/// Computes the Newton direction at `z` for barrier parameter `μ`.
pub fn explicit_step<T: Real>(
    problem: &QpProblem,
    z: &ExplicitIterate,
    mu: f64,
    solver: &mut KktSolver<T>,
    strategy: LinearStrategy,
) -> Result<(ExplicitDirection, StepReport)> {
    let asm = KktAssembler::new(problem, Formulation::Explicit);
    let (sys, r) = assemble_with(&asm, problem, z, mu)?;
    let (dz, rep) = solve_system(solver, &sys, strategy)?;
    Ok((recover(problem, &dz, &r), rep))
}

fn merit(problem: &QpProblem, z: &ExplicitIterate, mu: f64) -> f64 {
    residuals(problem, z, mu).map_or(f64::INFINITY, |r| r.max_norm())
}

fn moved(z: &ExplicitIterate, d: &ExplicitDirection, a: f64) -> ExplicitIterate {
    ExplicitIterate {
        x: axpy(&z.x, a, &d.dx),
        lambda: axpy(&z.lambda, a, &d.dlambda),
        gamma: axpy(&z.gamma, a, &d.dgamma),
        s: axpy(&z.s, a, &d.ds),
    }
}

/// Runs the explicit method on `problem` as given (no equilibration).
pub fn solve_explicit(
    problem: &QpProblem,
    config: &SolverConfig,
) -> Result<(ExplicitIterate, SolveTrace)> {
    config.validate()?;
    let name = problem.name.clone();
    match config.precision {
        Precision::F64 => run::<f64>(problem, config, &name),
        Precision::F32 => run::<f32>(problem, config, &name),
    }
}

fn run<T: Real>(
    problem: &QpProblem,
    config: &SolverConfig,
    name: &str,
) -> Result<(ExplicitIterate, SolveTrace)> {
    let mut tr = Tracker::new(SolveTrace::new(TraceHeader::new(name, config)), config);
    let asm = KktAssembler::new(problem, Formulation::Explicit);
    let mut solver = KktSolver::<T>::new(config.minres_options());
    let m = problem.m;
    let mut z = ExplicitIterate {
        x: initial_x(problem)?,
        lambda: vec![1.0; m],
        gamma: vec![0.0; problem.p],
        s: vec![1.0; m],
    };
    let mut best = Best::new();
    tr.restart_clock();

    for k in 0..=config.max_iters {
        let gap = duality_gap(&z.lambda, &z.s)?;
        let mu = mu_from_gap(config.sigma, gap, m);
        let (sys, r) = assemble_with(&asm, problem, &z, mu)?;
        let kkt = residuals(problem, &z, 0.0)?.max_norm();
        let norms = r.norms();
        let mut rec = IterationRecord::new(k);
        rec.mu = mu;
        rec.gap = gap;
        rec.r_x = norms.r_x;
        rec.r_i = norms.r_i;
        rec.r_e = norms.r_e;
        rec.r_comp = norms.r_comp;
        rec.kkt = kkt;
        let score = kkt.max(gap);
        best.offer(score, &z);
        tr.spectral(&mut rec, &sys, &sys.middle_diagonal(), None)?;

        if score <= config.tol {
            tr.push(rec)?;
            return Ok((z, tr.finish(Status::Converged)));
        }
        if k == config.max_iters {
            tr.push(rec)?;
            break;
        }
        let t0 = Instant::now();
        let solved = solve_system(&mut solver, &sys, config.linear);
        let (dz, rep) = match solved {
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
        log::trace!("explicit iteration {k}: linear solve {:?}", t0.elapsed());
        tr.step_fields(&mut rec, &rep);
        let d = recover(problem, &dz, &r);
        let amax = fraction_to_boundary(&[(&z.lambda, &d.dlambda), (&z.s, &d.ds)]);
        let m0 = norms.max();
        let alpha = backtrack(m0, amax, |a| {
            let t = moved(&z, &d, a);
            if t.lambda.iter().chain(&t.s).any(|v| !(*v > 0.0)) {
                return f64::INFINITY;
            }
            merit(problem, &t, mu)
        });
        match alpha {
            Some(a) => {
                rec.alpha = a;
                tr.push(rec)?;
                z = moved(&z, &d, a);
            }
            None => {
                tr.trace.warn(format!(
                    "iteration {k}: line search failed below step 1e-10"
                ));
                tr.push(rec)?;
                return Ok((best.z.unwrap_or(z), tr.finish(Status::Stalled)));
            }
        }
    }
    Ok((best.z.unwrap_or(z), tr.finish(Status::MaxIters)))
}
