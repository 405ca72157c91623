//! Condensed Newton systems of both formulations and the linear solvers
//! applied to them.

use std::marker::PhantomData;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    block_jacobi_precond, ldlt_factor_with, minres, Factorization, Inertia, KrylovReport,
    MinresOptions, OrderingCache, SparseSymmetric,
};
use crate::problem::QpProblem;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Formulation {
    /// `E(λ,s) = [Q −Aᵀ −Cᵀ; −A −Λ⁻¹S 0; −C 0 0]`.
    Explicit,
    /// `J(v) = [Q−AᵀA −Aᵀ −Cᵀ; −A −B_μ(−v) 0; −C 0 0]`.
    Implicit,
}

/// An assembled symmetric indefinite system and its right-hand side.
#[derive(Debug, Clone, PartialEq)]
pub struct KktSystem {
    pub formulation: Formulation,
    pub matrix: SparseSymmetric<f64>,
    pub rhs: Vec<f64>,
    pub n: usize,
    pub m: usize,
    pub p: usize,
}

impl KktSystem {
    /// Index ranges of the `x`, middle (`λ` or `v`) and `γ` blocks.
    pub fn blocks(&self) -> [Range<usize>; 3] {
        blocks(self.n, self.m, self.p)
    }

    /// Diagonal of the middle block.
    /// Largest entry magnitude outside the middle diagonal, or 1 if that
    /// part is empty. Sets the scale of pivot thresholds.
    pub fn data_scale(&self) -> f64 {
        let mid = self.n..self.n + self.m;
        let mut s = 0.0f64;
        for j in 0..self.matrix.dim {
            for (i, v) in self.matrix.col(j) {
                if !(i == j && mid.contains(&i)) {
                    s = s.max(v.abs());
                }
            }
        }
        if s > 0.0 && s.is_finite() {
            s
        } else {
            1.0
        }
    }

    pub fn middle_diagonal(&self) -> Vec<f64> {
        (self.n..self.n + self.m)
            .map(|i| self.matrix.get(i, i))
            .collect()
    }
}

pub fn blocks(n: usize, m: usize, p: usize) -> [Range<usize>; 3] {
    [0..n, n..n + m, n + m..n + m + p]
}

/// Regularization signs: `+1` on the primal block, `−1` elsewhere.
pub fn block_signs(n: usize, m: usize, p: usize) -> Vec<i8> {
    let mut s = vec![1i8; n];
    s.resize(n + m + p, -1);
    s
}

/// Holds the fixed part of a KKT matrix so that each iteration only writes
/// the `m` entries of the middle diagonal.
#[derive(Debug, Clone)]
pub struct KktAssembler {
    pub formulation: Formulation,
    template: SparseSymmetric<f64>,
    diag_pos: Vec<usize>,
    n: usize,
    m: usize,
    p: usize,
}

impl KktAssembler {
    pub fn new(problem: &QpProblem, formulation: Formulation) -> Self {
        let (n, m, p) = (problem.n, problem.m, problem.p);
        let dim = n + m + p;
        let mut rows = Vec::new();
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        let mut push = |i: usize, j: usize, v: f64| {
            rows.push(i);
            cols.push(j);
            vals.push(v);
        };
        for j in 0..n {
            for (i, v) in problem.qmat.col(j) {
                if i >= j {
                    push(i, j, v);
                }
            }
        }
        if formulation == Formulation::Implicit && m > 0 {
            let g = problem.a.gram();
            for j in 0..n {
                for (i, v) in g.col(j) {
                    if i >= j {
                        push(i, j, -v);
                    }
                }
            }
        }
        for k in 0..dim {
            push(k, k, 0.0);
        }
        for j in 0..n {
            for (i, v) in problem.a.col(j) {
                push(n + i, j, -v);
            }
            for (i, v) in problem.c.col(j) {
                push(n + m + i, j, -v);
            }
        }
        let template = SparseSymmetric::from_triplets(dim, &rows, &cols, &vals)
            .expect("consistent KKT pattern");
        let diag_pos = (n..n + m)
            .map(|i| template.position(i, i).expect("diagonal present"))
            .collect();
        KktAssembler {
            formulation,
            template,
            diag_pos,
            n,
            m,
            p,
        }
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.n, self.m, self.p)
    }

    /// Matrix whose middle block is `−diag(w)`.
    pub fn matrix(&self, w: &[f64]) -> SparseSymmetric<f64> {
        let mut out = self.template.clone();
        self.update(&mut out, w);
        out
    }

    /// Rewrites the middle diagonal of a matrix produced by this assembler.
    pub fn update(&self, matrix: &mut SparseSymmetric<f64>, w: &[f64]) {
        for (&pos, &wi) in self.diag_pos.iter().zip(w) {
            matrix.nzval[pos] = -wi;
        }
    }

    pub fn system(&self, w: &[f64], rhs: Vec<f64>) -> KktSystem {
        KktSystem {
            formulation: self.formulation,
            matrix: self.matrix(w),
            rhs,
            n: self.n,
            m: self.m,
            p: self.p,
        }
    }
}

/// Diagnostics of one linear solve.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepReport {
    pub factorized: bool,
    pub krylov: Option<KrylovReport>,
    pub inertia: Option<Inertia>,
    pub regularized_pivots: usize,
    /// `‖M·Δz − rhs‖∞ / ‖rhs‖∞` evaluated in `f64`.
    pub linear_residual: f64,
    pub warnings: Vec<String>,
}

/// Direct or Krylov solves of KKT systems in working precision `T`.
///
/// Matrices and right-hand sides are rounded to `T` on entry and the
/// solution is returned in `f64`.
#[derive(Debug, Clone)]
pub struct KktSolver<T> {
    ordering: OrderingCache,
    pub minres: MinresOptions,
    _t: PhantomData<T>,
}

impl<T: Real> Default for KktSolver<T> {
    fn default() -> Self {
        Self::new(MinresOptions::default())
    }
}

impl<T: Real> KktSolver<T> {
    pub fn new(minres: MinresOptions) -> Self {
        KktSolver {
            ordering: OrderingCache::new(),
            minres,
            _t: PhantomData,
        }
    }

    /// Number of fill-reducing orderings computed so far.
    pub fn symbolic_count(&self) -> usize {
        self.ordering.symbolic_count()
    }

    pub fn factor(&mut self, sys: &KktSystem) -> Result<Factorization<T>> {
        let mt: SparseSymmetric<T> = sys.matrix.cast();
        if !mt.is_finite() {
            return Err(Error::NonFinite {
                block: "KKT matrix in working precision",
            });
        }
        let scale = sys.data_scale();
        let signs = block_signs(sys.n, sys.m, sys.p);
        let order = self.ordering.order_for(&mt).to_vec();
        ldlt_factor_with(
            &mt,
            T::STATIC_REG * scale,
            T::PIVOT_TOL * scale,
            Some(&signs),
            &order,
        )
    }

    pub fn solve_with(&self, f: &Factorization<T>, rhs: &[f64]) -> Result<Vec<f64>> {
        let rt = to_working::<T>(rhs)?;
        Ok(f.solve(&rt)?.into_iter().map(|v| v.f64()).collect())
    }

    /// Factors and solves, returning the factorization for reuse.
    pub fn solve_direct(
        &mut self,
        sys: &KktSystem,
    ) -> Result<(Vec<f64>, Factorization<T>, StepReport)> {
        let f = self.factor(sys)?;
        let dz = self.solve_with(&f, &sys.rhs)?;
        let report = StepReport {
            factorized: true,
            inertia: Some(f.inertia),
            regularized_pivots: f.regularized_pivots,
            linear_residual: linear_residual(&sys.matrix, &dz, &sys.rhs),
            ..Default::default()
        };
        Ok((dz, f, report))
    }

    /// Block-Jacobi preconditioned MINRES on the unreduced system.
    pub fn solve_minres(&self, sys: &KktSystem) -> Result<(Vec<f64>, StepReport)> {
        let mt: SparseSymmetric<T> = sys.matrix.cast();
        if !mt.is_finite() {
            return Err(Error::NonFinite {
                block: "KKT matrix in working precision",
            });
        }
        let pre = block_jacobi_precond(&mt, &sys.blocks())?;
        let rt = to_working::<T>(&sys.rhs)?;
        let (x, rep) = minres(
            |a: &[T], y: &mut [T]| mt.mul_vec_into(a, y),
            &rt,
            |a: &[T], y: &mut [T]| pre.apply(a, y),
            &self.minres,
        )?;
        let dz: Vec<f64> = x.into_iter().map(|v| v.f64()).collect();
        let report = StepReport {
            factorized: false,
            linear_residual: linear_residual(&sys.matrix, &dz, &sys.rhs),
            krylov: Some(rep),
            warnings: pre.warnings.clone(),
            ..Default::default()
        };
        Ok((dz, report))
    }
}

fn to_working<T: Real>(rhs: &[f64]) -> Result<Vec<T>> {
    let rt: Vec<T> = rhs.iter().map(|&v| T::of(v)).collect();
    if rt.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            block: "KKT right-hand side in working precision",
        });
    }
    Ok(rt)
}

pub fn linear_residual(m: &SparseSymmetric<f64>, x: &[f64], rhs: &[f64]) -> f64 {
    crate::linalg::relative_residual(m, x, rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::builtin_problem;

    #[test]
    fn explicit_template_at_unit_multipliers() {
        let p = builtin_problem("synthetic2d").unwrap();
        let asm = KktAssembler::new(&p, Formulation::Explicit);
        let e = asm.matrix(&[1.0; 4]).to_dense();
        let want = [
            [1.0, 0.0, -1.0, 0.0, 1.0, 0.0],
            [0.0, 1.0, -1.0, -1.0, 0.0, 1.0],
            [-1.0, -1.0, -1.0, 0.0, 0.0, 0.0],
            [0.0, -1.0, 0.0, -1.0, 0.0, 0.0],
            [1.0, 0.0, 0.0, 0.0, -1.0, 0.0],
            [0.0, 1.0, 0.0, 0.0, 0.0, -1.0],
        ];
        for i in 0..6 {
            assert_eq!(e[i], want[i].to_vec());
        }
    }

    #[test]
    fn implicit_primal_block() {
        let p = builtin_problem("synthetic2d").unwrap();
        let asm = KktAssembler::new(&p, Formulation::Implicit);
        let j = asm.matrix(&[0.5; 4]).to_dense();
        assert_eq!(j[0][..2], [-1.0, -1.0]);
        assert_eq!(j[1][..2], [-1.0, -2.0]);
        for i in 2..6 {
            assert_eq!(j[i][i], -0.5);
        }
    }

    #[test]
    fn explicit_inertia_is_quasi_definite() {
        let p = builtin_problem("synthetic2d").unwrap();
        let asm = KktAssembler::new(&p, Formulation::Explicit);
        let sys = asm.system(&[0.3, 2.0, 0.7, 1.1], vec![1.0; 6]);
        let mut solver = KktSolver::<f64>::default();
        let (dz, f, rep) = solver.solve_direct(&sys).unwrap();
        assert_eq!(f.inertia, Inertia::new(2, 4, 0));
        assert!(rep.linear_residual < 1e-14);
        let (dz2, rep2) = solver.solve_minres(&sys).unwrap();
        assert!(rep2.krylov.unwrap().converged);
        for (a, b) in dz.iter().zip(&dz2) {
            assert!((a - b).abs() < 1e-8);
        }
    }
}
