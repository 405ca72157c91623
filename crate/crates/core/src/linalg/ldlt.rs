use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{amd_order, SparseSymmetric};
use crate::scalar::Real;

/// Counts of positive, negative and zero eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Inertia {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

impl Inertia {
    pub fn new(positive: usize, negative: usize, zero: usize) -> Self {
        Inertia {
            positive,
            negative,
            zero,
        }
    }
}

#[derive(Debug, Clone)]
enum Pivot<T> {
    One {
        p: usize,
        d: T,
        l: Vec<(usize, T)>,
    },
    Two {
        p: usize,
        q: usize,
        d: [T; 3],
        l: Vec<(usize, T, T)>,
    },
}

/// Sparse `P M Pᵀ = L D Lᵀ` with 1×1 and 2×2 pivots.
#[derive(Debug, Clone)]
pub struct Factorization<T> {
    dim: usize,
    pivots: Vec<Pivot<T>>,
    /// Elimination order actually used.
    pub permutation: Vec<usize>,
    pub inertia: Inertia,
    /// Magnitude of the signed regularization available to tiny pivots.
    pub regularization: f64,
    /// Number of pivots replaced by the signed regularization.
    pub regularized_pivots: usize,
    matrix: SparseSymmetric<T>,
}

const MAX_REFINEMENT: usize = 3;

/// Factors `m`, computing a fresh ordering.
///
/// `signs` gives the regularization sign per index (+1 primal, −1 dual);
/// when absent the sign of the offending pivot is kept.
pub fn ldlt_factor<T: Real>(
    m: &SparseSymmetric<T>,
    static_reg: f64,
    signs: Option<&[i8]>,
) -> Result<Factorization<T>> {
    let order = amd_order(m);
    ldlt_factor_ordered(m, static_reg, signs, &order)
}

/// Factors `m` using `order` as the preferred pivot sequence; pivots
/// below `PIVOT_TOL` times the largest diagonal entry count as tiny.
pub fn ldlt_factor_ordered<T: Real>(
    m: &SparseSymmetric<T>,
    static_reg: f64,
    signs: Option<&[i8]>,
    order: &[usize],
) -> Result<Factorization<T>> {
    let maxdiag = m
        .diag()
        .iter()
        .fold(0.0f64, |acc, d| acc.max(d.f64().abs()));
    let reference = if maxdiag > 0.0 { maxdiag } else { m.norm_inf() };
    ldlt_factor_with(m, static_reg, T::PIVOT_TOL * reference, signs, order)
}

/// Factors `m`; a 1×1 pivot with `|d| < pivot_floor` is replaced by
/// `±static_reg` (or rejected as singular when `static_reg` is zero and
/// `d = 0`).
pub fn ldlt_factor_with<T: Real>(
    m: &SparseSymmetric<T>,
    static_reg: f64,
    pivot_floor: f64,
    signs: Option<&[i8]>,
    order: &[usize],
) -> Result<Factorization<T>> {
    let n = m.dim;
    if order.len() != n {
        return Err(Error::dim("ordering", n, order.len()));
    }
    if let Some(s) = signs {
        if s.len() != n {
            return Err(Error::dim("regularization signs", n, s.len()));
        }
    }
    if !m.is_finite() {
        return Err(Error::NaN("matrix to factor".into()));
    }
    let mut diag = vec![T::zero(); n];
    let mut adj: Vec<BTreeMap<usize, T>> = vec![BTreeMap::new(); n];
    for j in 0..n {
        for (i, a) in m.col(j) {
            if i == j {
                diag[j] = a;
            } else {
                adj[i].insert(j, a);
                adj[j].insert(i, a);
            }
        }
    }
    let tiny = T::of(pivot_floor);
    let delta = T::of(static_reg);
    let alpha = T::of((1.0 + 17f64.sqrt()) / 8.0);

    let mut alive = vec![true; n];
    let mut pivots = Vec::with_capacity(n);
    let mut permutation = Vec::with_capacity(n);
    let mut inertia = Inertia::default();
    let mut regularized = 0;

    let largest = |row: &BTreeMap<usize, T>| -> (T, usize) {
        let mut best = (T::zero(), usize::MAX);
        for (&j, &a) in row {
            if a.abs() > best.0 {
                best = (a.abs(), j);
            }
        }
        best
    };

    for &i in order {
        while alive[i] {
            let (w1, r) = largest(&adj[i]);
            let aii = diag[i].abs();
            let choice = if w1 == T::zero() || aii >= alpha * w1 {
                (i, None)
            } else {
                let (wr, _) = largest(&adj[r]);
                if aii * wr >= alpha * w1 * w1 {
                    (i, None)
                } else if diag[r].abs() >= alpha * wr {
                    (r, None)
                } else {
                    (i, Some(r))
                }
            };
            match choice {
                (p, None) => {
                    let mut d = diag[p];
                    if d.abs() < tiny || d == T::zero() {
                        if delta > T::zero() {
                            let sign = match signs {
                                Some(s) => s[p] as f64,
                                None if d < T::zero() => -1.0,
                                None => 1.0,
                            };
                            d = T::of(sign) * delta;
                            regularized += 1;
                        } else if d == T::zero() {
                            inertia.zero += n - permutation.len();
                            return Err(Error::Singular { inertia });
                        }
                    }
                    if !d.is_finite() {
                        return Err(Error::NaN(format!("pivot {p}")));
                    }
                    if d > T::zero() {
                        inertia.positive += 1;
                    } else {
                        inertia.negative += 1;
                    }
                    let nbrs: Vec<(usize, T)> = std::mem::take(&mut adj[p]).into_iter().collect();
                    for &(j, _) in &nbrs {
                        adj[j].remove(&p);
                    }
                    let l: Vec<(usize, T)> = nbrs.iter().map(|&(j, a)| (j, a / d)).collect();
                    for (x, &(j, ajp)) in nbrs.iter().enumerate() {
                        let lj = l[x].1;
                        diag[j] = diag[j] - ajp * lj;
                        for &(k, akp) in &nbrs[x + 1..] {
                            let upd = lj * akp;
                            let e = adj[j].entry(k).or_insert(T::zero());
                            *e = *e - upd;
                            let e = adj[k].entry(j).or_insert(T::zero());
                            *e = *e - upd;
                        }
                    }
                    alive[p] = false;
                    permutation.push(p);
                    pivots.push(Pivot::One { p, d, l });
                }
                (p, Some(q)) => {
                    let (dpp, dpq, dqq) = (diag[p], adj[p][&q], diag[q]);
                    let det = dpp * dqq - dpq * dpq;
                    if det == T::zero() || !det.is_finite() {
                        inertia.zero += n - permutation.len();
                        return Err(Error::Singular { inertia });
                    }
                    if det < T::zero() {
                        inertia.positive += 1;
                        inertia.negative += 1;
                    } else if dpp + dqq > T::zero() {
                        inertia.positive += 2;
                    } else {
                        inertia.negative += 2;
                    }
                    let (i00, i01, i11) = (dqq / det, -dpq / det, dpp / det);
                    let mut rows = std::mem::take(&mut adj[p]);
                    rows.remove(&q);
                    let mut nbrs: BTreeMap<usize, (T, T)> =
                        rows.into_iter().map(|(j, a)| (j, (a, T::zero()))).collect();
                    for (j, a) in std::mem::take(&mut adj[q]) {
                        if j != p {
                            nbrs.entry(j).or_insert((T::zero(), T::zero())).1 = a;
                        }
                    }
                    let nbrs: Vec<(usize, T, T)> =
                        nbrs.into_iter().map(|(j, (a, b))| (j, a, b)).collect();
                    for &(j, _, _) in &nbrs {
                        adj[j].remove(&p);
                        adj[j].remove(&q);
                    }
                    let l: Vec<(usize, T, T)> = nbrs
                        .iter()
                        .map(|&(j, ajp, ajq)| (j, ajp * i00 + ajq * i01, ajp * i01 + ajq * i11))
                        .collect();
                    for (x, &(j, ajp, ajq)) in nbrs.iter().enumerate() {
                        let (_, l0, l1) = l[x];
                        diag[j] = diag[j] - (l0 * ajp + l1 * ajq);
                        for &(k, akp, akq) in &nbrs[x + 1..] {
                            let upd = l0 * akp + l1 * akq;
                            let e = adj[j].entry(k).or_insert(T::zero());
                            *e = *e - upd;
                            let e = adj[k].entry(j).or_insert(T::zero());
                            *e = *e - upd;
                        }
                    }
                    alive[p] = false;
                    alive[q] = false;
                    permutation.push(p);
                    permutation.push(q);
                    pivots.push(Pivot::Two {
                        p,
                        q,
                        d: [dpp, dpq, dqq],
                        l,
                    });
                }
            }
        }
    }

    Ok(Factorization {
        dim: n,
        pivots,
        permutation,
        inertia,
        regularization: static_reg,
        regularized_pivots: regularized,
        matrix: m.clone(),
    })
}

impl<T: Real> Factorization<T> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of 2×2 pivots.
    pub fn two_by_two(&self) -> usize {
        self.pivots
            .iter()
            .filter(|p| matches!(p, Pivot::Two { .. }))
            .count()
    }

    /// Block-diagonal factor as `(index, index, value)` entries, lower part only.
    pub fn d_entries(&self) -> Vec<(usize, usize, T)> {
        let mut out = Vec::new();
        for piv in &self.pivots {
            match piv {
                Pivot::One { p, d, .. } => out.push((*p, *p, *d)),
                Pivot::Two { p, q, d, .. } => {
                    out.push((*p, *p, d[0]));
                    out.push((*q, *p, d[1]));
                    out.push((*q, *q, d[2]));
                }
            }
        }
        out
    }

    /// Applies the factorization once, without refinement.
    pub fn solve_once(&self, rhs: &[T]) -> Vec<T> {
        let mut x = rhs.to_vec();
        for piv in &self.pivots {
            match piv {
                Pivot::One { p, l, .. } => {
                    let xp = x[*p];
                    for &(j, lj) in l {
                        x[j] = x[j] - lj * xp;
                    }
                }
                Pivot::Two { p, q, l, .. } => {
                    let (xp, xq) = (x[*p], x[*q]);
                    for &(j, l0, l1) in l {
                        x[j] = x[j] - (l0 * xp + l1 * xq);
                    }
                }
            }
        }
        for piv in &self.pivots {
            match piv {
                Pivot::One { p, d, .. } => x[*p] = x[*p] / *d,
                Pivot::Two { p, q, d, .. } => {
                    let det = d[0] * d[2] - d[1] * d[1];
                    let (xp, xq) = (x[*p], x[*q]);
                    x[*p] = (d[2] * xp - d[1] * xq) / det;
                    x[*q] = (d[0] * xq - d[1] * xp) / det;
                }
            }
        }
        for piv in self.pivots.iter().rev() {
            match piv {
                Pivot::One { p, l, .. } => {
                    let s = l.iter().fold(T::zero(), |acc, &(j, lj)| acc + lj * x[j]);
                    x[*p] = x[*p] - s;
                }
                Pivot::Two { p, q, l, .. } => {
                    let (mut s0, mut s1) = (T::zero(), T::zero());
                    for &(j, l0, l1) in l {
                        s0 = s0 + l0 * x[j];
                        s1 = s1 + l1 * x[j];
                    }
                    x[*p] = x[*p] - s0;
                    x[*q] = x[*q] - s1;
                }
            }
        }
        x
    }

    /// Solves `M x = rhs` with iterative refinement in working precision.
    pub fn solve(&self, rhs: &[T]) -> Result<Vec<T>> {
        if rhs.len() != self.dim {
            return Err(Error::dim("ldlt rhs", self.dim, rhs.len()));
        }
        if rhs.iter().any(|v| !v.is_finite()) {
            return Err(Error::NaN("ldlt rhs".into()));
        }
        let bnorm = inf(rhs);
        let mut x = self.solve_once(rhs);
        if bnorm == T::zero() {
            return Ok(x);
        }
        let target = T::epsilon() * T::of(1e3) * bnorm;
        let mut r = self.residual(&x, rhs);
        let mut rnorm = inf(&r);
        for _ in 0..MAX_REFINEMENT {
            if !(rnorm > target) {
                break;
            }
            let dx = self.solve_once(&r);
            let trial: Vec<T> = x.iter().zip(&dx).map(|(a, b)| *a + *b).collect();
            let r2 = self.residual(&trial, rhs);
            let n2 = inf(&r2);
            if !(n2 < rnorm) {
                break;
            }
            x = trial;
            r = r2;
            rnorm = n2;
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NaN("ldlt solution".into()));
        }
        Ok(x)
    }

    fn residual(&self, x: &[T], rhs: &[T]) -> Vec<T> {
        let mx = self.matrix.mul_vec(x);
        rhs.iter().zip(mx).map(|(b, y)| *b - y).collect()
    }
}

/// `rhs` solved with `f`, measured as `‖M x − rhs‖∞ / ‖rhs‖∞` in `f64`.
pub fn relative_residual<T: Real>(m: &SparseSymmetric<T>, x: &[T], rhs: &[T]) -> f64 {
    let xf: Vec<f64> = x.iter().map(|v| v.f64()).collect();
    let mx = m.mul_vec_f64(&xf);
    let num = mx
        .iter()
        .zip(rhs)
        .fold(0.0f64, |acc, (a, b)| acc.max((a - b.f64()).abs()));
    let den = rhs.iter().fold(0.0f64, |acc, b| acc.max(b.f64().abs()));
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

fn inf<T: Real>(x: &[T]) -> T {
    x.iter().fold(T::zero(), |acc, v| acc.max(v.abs()))
}
