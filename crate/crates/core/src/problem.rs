use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CscMatrix;

/// Convex QP `min ½xᵀQx + qᵀx  s.t.  Ax ≥ b, Cx = d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QpProblem {
    pub n: usize,
    pub m: usize,
    pub p: usize,
    /// Both triangles stored.
    pub qmat: CscMatrix,
    pub q: Vec<f64>,
    pub a: CscMatrix,
    pub b: Vec<f64>,
    pub c: CscMatrix,
    pub d: Vec<f64>,
    /// Constant term of the objective, not used by the solvers.
    #[serde(default)]
    pub objective_constant: f64,
    #[serde(default)]
    pub name: String,
}

fn finite(v: &[f64], block: &'static str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { block })
    }
}

impl QpProblem {
    /// Validates dimensions and symmetrizes `Q` as `(Q + Qᵀ)/2`.
    pub fn new(
        qmat: CscMatrix,
        q: Vec<f64>,
        a: CscMatrix,
        b: Vec<f64>,
        c: CscMatrix,
        d: Vec<f64>,
    ) -> Result<Self> {
        let n = q.len();
        if qmat.nrows != n || qmat.ncols != n {
            return Err(Error::dim("Q size", n, qmat.nrows.max(qmat.ncols)));
        }
        if a.ncols != n {
            return Err(Error::dim("A columns", n, a.ncols));
        }
        if a.nrows != b.len() {
            return Err(Error::dim("b length", a.nrows, b.len()));
        }
        if c.ncols != n {
            return Err(Error::dim("C columns", n, c.ncols));
        }
        if c.nrows != d.len() {
            return Err(Error::dim("d length", c.nrows, d.len()));
        }
        finite(&qmat.nzval, "Q")?;
        finite(&q, "q")?;
        finite(&a.nzval, "A")?;
        finite(&b, "b")?;
        finite(&c.nzval, "C")?;
        finite(&d, "d")?;
        let qt = qmat.transpose();
        let mut rows = Vec::with_capacity(2 * qmat.nnz());
        let mut cols = Vec::with_capacity(2 * qmat.nnz());
        let mut vals = Vec::with_capacity(2 * qmat.nnz());
        for mat in [&qmat, &qt] {
            for j in 0..n {
                for (i, v) in mat.col(j) {
                    rows.push(i);
                    cols.push(j);
                    vals.push(0.5 * v);
                }
            }
        }
        let qsym = CscMatrix::from_triplets(n, n, &rows, &cols, &vals)?;
        Ok(QpProblem {
            n,
            m: b.len(),
            p: d.len(),
            qmat: qsym,
            q,
            a,
            b,
            c,
            d,
            objective_constant: 0.0,
            name: String::new(),
        })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        let qx = self.qmat.mul_vec(x);
        0.5 * crate::linalg::dot(x, &qx) + crate::linalg::dot(&self.q, x) + self.objective_constant
    }

    /// Checks data dimensions and finiteness of a deserialized problem.
    pub fn validate(&self) -> Result<()> {
        let rebuilt = QpProblem::new(
            self.qmat.clone(),
            self.q.clone(),
            self.a.clone(),
            self.b.clone(),
            self.c.clone(),
            self.d.clone(),
        )?;
        if rebuilt.n != self.n || rebuilt.m != self.m || rebuilt.p != self.p {
            return Err(Error::dim(
                "problem dimensions",
                rebuilt.n + rebuilt.m + rebuilt.p,
                self.n + self.m + self.p,
            ));
        }
        Ok(())
    }
}

/// State `(x, λ, γ, s)` of the standard primal-dual method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplicitIterate {
    pub x: Vec<f64>,
    pub lambda: Vec<f64>,
    pub gamma: Vec<f64>,
    pub s: Vec<f64>,
}

/// State of the implicit method, which also carries `v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImplicitIterate {
    pub x: Vec<f64>,
    pub lambda: Vec<f64>,
    pub gamma: Vec<f64>,
    pub s: Vec<f64>,
    pub v: Vec<f64>,
}

impl ExplicitIterate {
    pub fn check(&self, problem: &QpProblem) -> Result<()> {
        check_dims(problem, &self.x, &self.lambda, &self.gamma, &self.s)
    }
}

impl ImplicitIterate {
    pub fn check(&self, problem: &QpProblem) -> Result<()> {
        check_dims(problem, &self.x, &self.lambda, &self.gamma, &self.s)?;
        if self.v.len() != problem.m {
            return Err(Error::dim("v", problem.m, self.v.len()));
        }
        finite(&self.v, "v")
    }

    pub fn to_explicit(&self) -> ExplicitIterate {
        ExplicitIterate {
            x: self.x.clone(),
            lambda: self.lambda.clone(),
            gamma: self.gamma.clone(),
            s: self.s.clone(),
        }
    }
}

fn check_dims(p: &QpProblem, x: &[f64], l: &[f64], g: &[f64], s: &[f64]) -> Result<()> {
    if x.len() != p.n {
        return Err(Error::dim("x", p.n, x.len()));
    }
    if l.len() != p.m {
        return Err(Error::dim("lambda", p.m, l.len()));
    }
    if g.len() != p.p {
        return Err(Error::dim("gamma", p.p, g.len()));
    }
    if s.len() != p.m {
        return Err(Error::dim("s", p.m, s.len()));
    }
    finite(x, "x")?;
    finite(l, "lambda")?;
    finite(g, "gamma")?;
    finite(s, "s")
}
