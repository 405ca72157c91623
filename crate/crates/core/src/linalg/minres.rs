use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Outcome of a Krylov solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KrylovReport {
    pub iterations: usize,
    /// Preconditioned residual norm relative to that of the right-hand side.
    pub relative_residual: f64,
    /// Relative threshold in force, `max(rtol, atol / ‖rhs‖)`.
    pub tolerance: f64,
    pub converged: bool,
    /// Preconditioned residual norm after each iteration.
    #[serde(skip)]
    pub history: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinresOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_iters: usize,
}

impl Default for MinresOptions {
    fn default() -> Self {
        MinresOptions {
            rtol: 1e-10,
            atol: 1e-10,
            max_iters: 5000,
        }
    }
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (x, y)| acc + *x * *y)
}

/// Preconditioned MINRES (Paige and Saunders) for symmetric, possibly
/// indefinite operators, starting from `x = 0`.
///
/// `precond` applies the inverse of a symmetric positive definite matrix.
pub fn minres<T, A, P>(
    apply: A,
    rhs: &[T],
    precond: P,
    opts: &MinresOptions,
) -> Result<(Vec<T>, KrylovReport)>
where
    T: Real,
    A: Fn(&[T], &mut [T]),
    P: Fn(&[T], &mut [T]),
{
    let n = rhs.len();
    let mut x = vec![T::zero(); n];
    let mut r1 = rhs.to_vec();
    let mut y = vec![T::zero(); n];
    precond(&r1, &mut y);
    let b1sq = dot(&r1, &y);
    if b1sq < T::zero() {
        return Err(Error::Config(
            "preconditioner is not positive definite".into(),
        ));
    }
    if !b1sq.is_finite() {
        return Err(Error::NaN("MINRES at iteration 0".into()));
    }
    let beta1 = b1sq.sqrt();
    let threshold = T::of(opts.rtol) * beta1;
    let threshold = threshold.max(T::of(opts.atol));
    let tolerance = if beta1 > T::zero() {
        opts.rtol.max(opts.atol / beta1.f64())
    } else {
        opts.rtol
    };
    let mut report = KrylovReport {
        iterations: 0,
        relative_residual: 0.0,
        tolerance,
        converged: true,
        history: Vec::new(),
    };
    if beta1 == T::zero() {
        return Ok((x, report));
    }

    let mut r2 = r1.clone();
    let mut v = vec![T::zero(); n];
    let mut w = vec![T::zero(); n];
    let mut w1 = vec![T::zero(); n];
    let mut w2 = vec![T::zero(); n];
    let (mut oldb, mut beta) = (T::zero(), beta1);
    let (mut dbar, mut epsln) = (T::zero(), T::zero());
    let mut phibar = beta1;
    let (mut cs, mut sn) = (-T::one(), T::zero());
    let tiny = T::min_positive_value();

    for itn in 1..=opts.max_iters {
        let s = T::one() / beta;
        for i in 0..n {
            v[i] = s * y[i];
        }
        apply(&v, &mut y);
        if itn >= 2 {
            let f = beta / oldb;
            for i in 0..n {
                y[i] = y[i] - f * r1[i];
            }
        }
        let alfa = dot(&v, &y);
        let f = alfa / beta;
        for i in 0..n {
            y[i] = y[i] - f * r2[i];
        }
        std::mem::swap(&mut r1, &mut r2);
        r2.copy_from_slice(&y);
        precond(&r2, &mut y);
        oldb = beta;
        let bsq = dot(&r2, &y);
        if bsq < T::zero() {
            return Err(Error::Config(
                "preconditioner is not positive definite".into(),
            ));
        }
        beta = bsq.sqrt();

        let oldeps = epsln;
        let delta = cs * dbar + sn * alfa;
        let gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        let gamma = gbar.hypot(beta).max(tiny);
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar = sn * phibar;

        let denom = T::one() / gamma;
        std::mem::swap(&mut w1, &mut w2);
        std::mem::swap(&mut w2, &mut w);
        for i in 0..n {
            w[i] = (v[i] - oldeps * w1[i] - delta * w2[i]) * denom;
            x[i] = x[i] + phi * w[i];
        }
        if !phibar.is_finite() || !alfa.is_finite() {
            return Err(Error::NaN(format!("MINRES at iteration {itn}")));
        }
        report.iterations = itn;
        report.history.push(phibar.f64());
        report.relative_residual = phibar.f64() / beta1.f64();
        if phibar <= threshold {
            report.converged = true;
            return Ok((x, report));
        }
        if beta == T::zero() {
            break;
        }
    }
    report.converged = false;
    Ok((x, report))
}
