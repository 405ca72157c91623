//! Ruiz equilibration of the stacked KKT data `[Q Aᵀ Cᵀ; A 0 0; C 0 0]`.

use serde::{Deserialize, Serialize};

use crate::problem::{ExplicitIterate, ImplicitIterate, QpProblem};

/// Diagonal scalings mapping the original problem to the scaled one:
/// `Q̃ = c·DQD`, `q̃ = c·Dq`, `Ã = E_A·A·D`, `b̃ = E_A·b`, `C̃ = E_C·C·D`,
/// `d̃ = E_C·d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingState {
    /// Column scaling `D` of the variables.
    pub d_col: Vec<f64>,
    /// Row scaling `E_A` of the inequality rows.
    pub e_ineq: Vec<f64>,
    /// Row scaling `E_C` of the equality rows.
    pub e_eq: Vec<f64>,
    pub c_obj: f64,
    pub passes: usize,
    pub warnings: Vec<String>,
}

impl ScalingState {
    pub fn identity(problem: &QpProblem) -> Self {
        ScalingState {
            d_col: vec![1.0; problem.n],
            e_ineq: vec![1.0; problem.m],
            e_eq: vec![1.0; problem.p],
            c_obj: 1.0,
            passes: 0,
            warnings: Vec::new(),
        }
    }

    /// Largest `|log10|` deviation of any scaling entry from one.
    pub fn max_log_deviation(&self) -> f64 {
        self.d_col
            .iter()
            .chain(&self.e_ineq)
            .chain(&self.e_eq)
            .chain(std::iter::once(&self.c_obj))
            .map(|v| v.log10().abs())
            .fold(0.0, f64::max)
    }
}

/// Scales the problem until every stacked row/column infinity norm is within
/// `tol` of one, or `max_passes` is reached.
pub fn ruiz_equilibrate(
    problem: &QpProblem,
    max_passes: usize,
    tol: f64,
) -> (QpProblem, ScalingState) {
    let (n, m, p) = (problem.n, problem.m, problem.p);
    let mut scaled = problem.clone();
    let mut st = ScalingState::identity(problem);
    let mut flagged = vec![false; n + m + p];

    for _ in 0..max_passes {
        let qn = scaled.qmat.col_norms();
        let an = scaled.a.col_norms();
        let cn = scaled.c.col_norms();
        let mut norms: Vec<f64> = (0..n).map(|j| qn[j].max(an[j]).max(cn[j])).collect();
        norms.extend(scaled.a.row_norms());
        norms.extend(scaled.c.row_norms());
        if norms.iter().all(|v| *v == 0.0 || (1.0 - v).abs() <= tol) {
            break;
        }
        st.passes += 1;
        let delta: Vec<f64> = norms
            .iter()
            .enumerate()
            .map(|(k, &v)| {
                if v == 0.0 {
                    if !flagged[k] {
                        flagged[k] = true;
                        st.warnings.push(format!(
                            "{} is structurally zero; scaling left at 1",
                            describe(k, n, m)
                        ));
                    }
                    1.0
                } else {
                    1.0 / v.sqrt()
                }
            })
            .collect();
        let (dx, rest) = delta.split_at(n);
        let (da, dc) = rest.split_at(m);
        scaled.qmat.scale(dx, dx);
        scaled.a.scale(da, dx);
        scaled.c.scale(dc, dx);
        for j in 0..n {
            st.d_col[j] *= dx[j];
        }
        for i in 0..m {
            st.e_ineq[i] *= da[i];
        }
        for i in 0..p {
            st.e_eq[i] *= dc[i];
        }
    }
    for j in 0..n {
        scaled.q[j] = problem.q[j] * st.d_col[j];
    }
    for i in 0..m {
        scaled.b[i] = problem.b[i] * st.e_ineq[i];
    }
    for i in 0..p {
        scaled.d[i] = problem.d[i] * st.e_eq[i];
    }
    let qmax = crate::linalg::norm_inf(&scaled.q);
    if qmax > 1.0 {
        st.c_obj = 1.0 / qmax;
        scaled.q.iter_mut().for_each(|v| *v *= st.c_obj);
        scaled.qmat.nzval.iter_mut().for_each(|v| *v *= st.c_obj);
    }
    scaled.objective_constant = problem.objective_constant * st.c_obj;
    for w in &st.warnings {
        log::warn!("equilibration: {w}");
    }
    (scaled, st)
}

fn describe(k: usize, n: usize, m: usize) -> String {
    if k < n {
        format!("column {k}")
    } else if k < n + m {
        format!("inequality row {}", k - n)
    } else {
        format!("equality row {}", k - n - m)
    }
}

/// Maps iterates between scaled and original coordinates.
pub trait Unscale: Sized {
    fn unscale(&self, scaling: &ScalingState) -> Self;
    fn scale(&self, scaling: &ScalingState) -> Self;
}

fn mul(a: &[f64], b: &[f64], f: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x * y * f).collect()
}

fn div(a: &[f64], b: &[f64], f: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x / y * f).collect()
}

impl Unscale for ExplicitIterate {
    fn unscale(&self, st: &ScalingState) -> Self {
        ExplicitIterate {
            x: mul(&self.x, &st.d_col, 1.0),
            lambda: mul(&self.lambda, &st.e_ineq, 1.0 / st.c_obj),
            gamma: mul(&self.gamma, &st.e_eq, 1.0 / st.c_obj),
            s: div(&self.s, &st.e_ineq, 1.0),
        }
    }

    fn scale(&self, st: &ScalingState) -> Self {
        ExplicitIterate {
            x: div(&self.x, &st.d_col, 1.0),
            lambda: div(&self.lambda, &st.e_ineq, st.c_obj),
            gamma: div(&self.gamma, &st.e_eq, st.c_obj),
            s: mul(&self.s, &st.e_ineq, 1.0),
        }
    }
}

impl Unscale for ImplicitIterate {
    fn unscale(&self, st: &ScalingState) -> Self {
        let e = self.to_explicit().unscale(st);
        let v = e.lambda.iter().zip(&e.s).map(|(l, s)| l - s).collect();
        ImplicitIterate {
            x: e.x,
            lambda: e.lambda,
            gamma: e.gamma,
            s: e.s,
            v,
        }
    }

    fn scale(&self, st: &ScalingState) -> Self {
        let e = self.to_explicit().scale(st);
        let v = e.lambda.iter().zip(&e.s).map(|(l, s)| l - s).collect();
        ImplicitIterate {
            x: e.x,
            lambda: e.lambda,
            gamma: e.gamma,
            s: e.s,
            v,
        }
    }
}

/// Returns the iterate in original problem coordinates.
pub fn unscale_solution<Z: Unscale>(z: &Z, scaling: &ScalingState) -> Z {
    z.unscale(scaling)
}
