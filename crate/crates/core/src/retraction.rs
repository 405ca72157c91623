//! The softplus retraction `b_μ(v) = (v + √(v² + 4μ)) / 2` and its derivative.
//!
//! Every routine is generic over the working precision and avoids the
//! cancellation of the textbook formula on the side where it occurs.

use crate::error::{Error, Result};
use crate::scalar::Real;

fn check<T: Real>(v: T, mu: T) -> Result<()> {
    if !(mu > T::zero()) {
        return Err(Error::NonPositiveBarrier(mu.f64()));
    }
    if !v.is_finite() {
        return Err(Error::Overflow(v.f64()));
    }
    Ok(())
}

/// `√(v² + 4μ)` without forming `v²`.
#[inline]
fn radius<T: Real>(v: T, mu: T) -> T {
    v.hypot(T::of(2.0) * mu.sqrt())
}

/// Evaluates `b_μ(v)`.
pub fn softplus<T: Real>(v: T, mu: T) -> Result<T> {
    check(v, mu)?;
    Ok(softplus_unchecked(v, mu))
}

#[inline]
pub(crate) fn softplus_unchecked<T: Real>(v: T, mu: T) -> T {
    let r = radius(v, mu);
    let half = T::of(0.5);
    if v < T::zero() {
        T::of(2.0) * mu / (r - v)
    } else {
        half * v + half * r
    }
}

/// Evaluates `db_μ/dv = ½(1 + v/√(v² + 4μ))`.
pub fn softplus_derivative<T: Real>(v: T, mu: T) -> Result<T> {
    check(v, mu)?;
    Ok(derivative_unchecked(v, mu))
}

#[inline]
pub(crate) fn derivative_unchecked<T: Real>(v: T, mu: T) -> T {
    if v == T::zero() {
        T::of(0.5)
    } else if v < T::zero() {
        derivative_tail(v, mu)
    } else {
        T::one() - derivative_tail(v, mu)
    }
}

/// `½(1 − |v|/√(v² + 4μ))`, the smaller of `db_μ(v)` and `db_μ(−v)`.
#[inline]
fn derivative_tail<T: Real>(v: T, mu: T) -> T {
    let r = radius(v, mu);
    T::of(2.0) * mu / r / (r + v.abs())
}

/// Vectorized retraction data at a fixed barrier parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct RetractionEval<T> {
    pub b_plus: Vec<T>,
    pub b_minus: Vec<T>,
    pub db_plus: Vec<T>,
    pub db_minus: Vec<T>,
    pub mu: T,
}

pub fn evaluate_retraction<T: Real>(v: &[T], mu: T) -> Result<RetractionEval<T>> {
    let m = v.len();
    let mut out = RetractionEval {
        b_plus: Vec::with_capacity(m),
        b_minus: Vec::with_capacity(m),
        db_plus: Vec::with_capacity(m),
        db_minus: Vec::with_capacity(m),
        mu,
    };
    if !(mu > T::zero()) {
        return Err(Error::NonPositiveBarrier(mu.f64()));
    }
    for (i, &vi) in v.iter().enumerate() {
        check(vi, mu).map_err(|e| Error::RetractionAt {
            index: i,
            source: Box::new(e),
        })?;
        let small = derivative_tail(vi, mu);
        out.b_plus.push(softplus_unchecked(vi, mu));
        out.b_minus.push(softplus_unchecked(-vi, mu));
        if vi < T::zero() {
            out.db_plus.push(small);
            out.db_minus.push(T::one() - small);
        } else {
            out.db_plus.push(T::one() - small);
            out.db_minus.push(small);
        }
    }
    Ok(out)
}

/// The exponential retraction `√μ·eᵛ`.
///
/// Only used as a comparison oracle in diagnostics and tests; the solvers
/// always use [`softplus`].
pub fn exponential_map<T: Real>(v: T, mu: T) -> Result<T> {
    check(v, mu)?;
    let out = mu.sqrt() * v.exp();
    if !out.is_finite() {
        return Err(Error::Overflow(v.f64()));
    }
    Ok(out)
}
