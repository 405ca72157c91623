use std::time::Instant;

use crate::config::{SolverConfig, TraceLevel};
use crate::diagnostics::{spectrum_metrics, IterationRecord, SolveTrace, Status};
use crate::error::Result;
use crate::kkt::{block_signs, KktSystem, StepReport};
use crate::linalg::{ldlt_factor, SparseSymmetric};
use crate::problem::QpProblem;

pub(crate) const ARMIJO: f64 = 1e-4;
pub(crate) const ALPHA_MIN: f64 = 1e-10;
pub(crate) const FRACTION_TO_BOUNDARY: f64 = 0.99;

/// Largest `α ≤ amax` of the form `amax·2⁻ᵏ`, `α ≥ ALPHA_MIN`, with
/// `merit(α) ≤ (1 − 10⁻⁴α)·merit(0)`.
pub(crate) fn backtrack(m0: f64, amax: f64, merit: impl Fn(f64) -> f64) -> Option<f64> {
    let mut a = amax;
    while a >= ALPHA_MIN {
        let v = merit(a);
        if v.is_finite() && v <= (1.0 - ARMIJO * a) * m0 {
            return Some(a);
        }
        a *= 0.5;
    }
    None
}

/// `min(1, 0.99·max{α : v + α·dv ≥ 0})` over both pairs.
pub(crate) fn fraction_to_boundary(pairs: &[(&[f64], &[f64])]) -> f64 {
    let mut amax = 1.0f64;
    for (v, dv) in pairs {
        for (x, dx) in v.iter().zip(dv.iter()) {
            if *dx < 0.0 {
                amax = amax.min(FRACTION_TO_BOUNDARY * (-x / dx));
            }
        }
    }
    amax
}

/// Minimum-norm solution of `Cx = d`, or zero without equalities.
pub(crate) fn initial_x(problem: &QpProblem) -> Result<Vec<f64>> {
    let (n, p) = (problem.n, problem.p);
    if p == 0 {
        return Ok(vec![0.0; n]);
    }
    let mut rows = Vec::new();
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    for j in 0..n {
        rows.push(j);
        cols.push(j);
        vals.push(1.0);
        for (i, v) in problem.c.col(j) {
            rows.push(n + i);
            cols.push(j);
            vals.push(v);
        }
    }
    let m = SparseSymmetric::<f64>::from_triplets(n + p, &rows, &cols, &vals)?;
    let f = ldlt_factor(&m, 1e-10 * m.norm_inf(), Some(&block_signs(n, 0, p)))?;
    let mut rhs = vec![0.0; n];
    rhs.extend_from_slice(&problem.d);
    let sol = f.solve(&rhs)?;
    Ok(sol[..n].to_vec())
}

pub(crate) fn axpy(x: &[f64], a: f64, d: &[f64]) -> Vec<f64> {
    x.iter().zip(d).map(|(x, d)| x + a * d).collect()
}

/// Bookkeeping shared by both solver loops.
pub(crate) struct Tracker {
    pub trace: SolveTrace,
    pub spectrum: bool,
    start: Instant,
    last_diag: Option<Vec<f64>>,
}

impl Tracker {
    pub fn new(trace: SolveTrace, config: &SolverConfig) -> Self {
        Tracker {
            trace,
            spectrum: config.trace_level == TraceLevel::Spectrum,
            start: Instant::now(),
            last_diag: None,
        }
    }

    pub fn restart_clock(&mut self) {
        self.start = Instant::now();
    }

    /// Fills the optional spectral fields of a record from the assembled
    /// matrix and the mutable part of its diagonal.
    pub fn spectral(
        &mut self,
        rec: &mut IterationRecord,
        sys: &KktSystem,
        diag: &[f64],
        db_minus: Option<&[f64]>,
    ) -> Result<()> {
        if !self.spectrum {
            return Ok(());
        }
        let s = spectrum_metrics(&sys.matrix)?;
        rec.eig_min = Some(s.eig_min_abs);
        rec.eig_max = Some(s.eig_max_abs);
        rec.cond = Some(s.cond);
        rec.matrix_delta = self.last_diag.as_ref().map(|prev| {
            prev.iter()
                .zip(diag)
                .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()))
        });
        rec.db_minus = db_minus.map(|d| d.to_vec());
        self.last_diag = Some(diag.to_vec());
        Ok(())
    }

    pub fn step_fields(&mut self, rec: &mut IterationRecord, rep: &StepReport) {
        rec.factorized = rep.factorized;
        rec.krylov_iters = rep.krylov.as_ref().map(|k| k.iterations);
        rec.inertia = rep.inertia;
        if let Some(k) = &rep.krylov {
            if !k.converged {
                self.trace.warn(format!(
                    "iteration {}: MINRES stopped after {} iterations at relative residual {:.3e}",
                    rec.iter, k.iterations, k.relative_residual
                ));
            }
        }
        if rep.regularized_pivots > 0 {
            self.trace.warn(format!(
                "iteration {}: {} pivots regularized",
                rec.iter, rep.regularized_pivots
            ));
        }
        for w in &rep.warnings {
            self.trace.warn(format!("iteration {}: {w}", rec.iter));
        }
    }

    pub fn push(&mut self, mut rec: IterationRecord) -> Result<()> {
        rec.wall_time_ns = self.start.elapsed().as_nanos() as u64;
        self.trace.record_iteration(rec)
    }

    pub fn finish(mut self, status: Status) -> SolveTrace {
        self.trace.status = Some(status);
        self.trace
    }
}

/// Candidate for the returned iterate when a solve does not converge.
pub(crate) struct Best<Z> {
    pub score: f64,
    pub z: Option<Z>,
}

impl<Z: Clone> Best<Z> {
    pub fn new() -> Self {
        Best {
            score: f64::INFINITY,
            z: None,
        }
    }

    pub fn offer(&mut self, score: f64, z: &Z) {
        if score < self.score {
            self.score = score;
            self.z = Some(z.clone());
        }
    }
}

pub(crate) fn mu_from_gap(sigma: f64, gap: f64, m: usize) -> f64 {
    if m == 0 {
        0.0
    } else {
        sigma * gap / m as f64
    }
}

pub(crate) fn neg(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| -x).collect()
}
