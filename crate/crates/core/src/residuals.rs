use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::norm_inf;
use crate::problem::{ExplicitIterate, ImplicitIterate, QpProblem};
use crate::retraction::evaluate_retraction;

/// KKT residual blocks.
///
/// `r_comp` holds `λ⊙s − μ` for the explicit formulation and the stacked
/// pair `(λ − b_μ(v), s − b_μ(−v))` for the implicit one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualVector {
    pub r_x: Vec<f64>,
    pub r_i: Vec<f64>,
    pub r_e: Vec<f64>,
    pub r_comp: Vec<f64>,
}

/// Infinity norms of the residual blocks.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ResidualNorms {
    pub r_x: f64,
    pub r_i: f64,
    pub r_e: f64,
    pub r_comp: f64,
}

impl ResidualNorms {
    pub fn max(&self) -> f64 {
        self.r_x.max(self.r_i).max(self.r_e).max(self.r_comp)
    }
}

impl ResidualVector {
    pub fn norms(&self) -> ResidualNorms {
        ResidualNorms {
            r_x: norm_inf(&self.r_x),
            r_i: norm_inf(&self.r_i),
            r_e: norm_inf(&self.r_e),
            r_comp: norm_inf(&self.r_comp),
        }
    }

    pub fn max_norm(&self) -> f64 {
        self.norms().max()
    }
}

fn ensure_finite(v: &[f64], block: &'static str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { block })
    }
}

/// `(r_x, r_i, r_e)` shared by both formulations.
pub(crate) fn primal_dual(
    problem: &QpProblem,
    x: &[f64],
    lambda: &[f64],
    gamma: &[f64],
    s: &[f64],
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut r_x = problem.qmat.mul_vec(x);
    let at_l = problem.a.tmul_vec(lambda);
    let ct_g = problem.c.tmul_vec(gamma);
    for i in 0..problem.n {
        r_x[i] += problem.q[i] - at_l[i] - ct_g[i];
    }
    let mut r_i = problem.a.mul_vec(x);
    for i in 0..problem.m {
        r_i[i] -= problem.b[i] + s[i];
    }
    let mut r_e = problem.c.mul_vec(x);
    for i in 0..problem.p {
        r_e[i] -= problem.d[i];
    }
    (r_x, r_i, r_e)
}

/// Residuals of the relaxed KKT conditions; `μ = 0` gives the unrelaxed ones.
pub fn residuals(problem: &QpProblem, z: &ExplicitIterate, mu: f64) -> Result<ResidualVector> {
    z.check(problem)?;
    if !(mu >= 0.0) || !mu.is_finite() {
        return Err(Error::NonFinite { block: "mu" });
    }
    let (r_x, r_i, r_e) = primal_dual(problem, &z.x, &z.lambda, &z.gamma, &z.s);
    let r_comp: Vec<f64> = z.lambda.iter().zip(&z.s).map(|(l, s)| l * s - mu).collect();
    let out = ResidualVector {
        r_x,
        r_i,
        r_e,
        r_comp,
    };
    ensure_finite(&out.r_x, "r_x")?;
    ensure_finite(&out.r_i, "r_i")?;
    ensure_finite(&out.r_e, "r_e")?;
    ensure_finite(&out.r_comp, "r_comp")?;
    Ok(out)
}

/// Residuals of the implicit formulation at barrier parameter `μ > 0`.
pub fn implicit_residuals(
    problem: &QpProblem,
    z: &ImplicitIterate,
    mu: f64,
) -> Result<ResidualVector> {
    z.check(problem)?;
    let ret = evaluate_retraction(&z.v, mu)?;
    let (r_x, r_i, r_e) = primal_dual(problem, &z.x, &z.lambda, &z.gamma, &z.s);
    let mut r_comp = Vec::with_capacity(2 * problem.m);
    r_comp.extend(z.lambda.iter().zip(&ret.b_plus).map(|(l, b)| l - b));
    r_comp.extend(z.s.iter().zip(&ret.b_minus).map(|(s, b)| s - b));
    Ok(ResidualVector {
        r_x,
        r_i,
        r_e,
        r_comp,
    })
}

/// `λᵀs`.
pub fn duality_gap(lambda: &[f64], s: &[f64]) -> Result<f64> {
    if lambda.len() != s.len() {
        return Err(Error::dim("duality gap", lambda.len(), s.len()));
    }
    Ok(lambda.iter().zip(s).map(|(l, s)| l * s).sum())
}

/// Unrelaxed KKT residual `max(‖r_x‖∞, ‖r_i‖∞, ‖r_e‖∞, ‖λ⊙s‖∞)`.
pub fn kkt_error(problem: &QpProblem, z: &ExplicitIterate) -> Result<f64> {
    Ok(residuals(problem, z, 0.0)?.max_norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::builtin_problem;

    fn start(m: usize) -> ExplicitIterate {
        ExplicitIterate {
            x: vec![0.0; 2],
            lambda: vec![1.0; m],
            gamma: vec![],
            s: vec![1.0; m],
        }
    }

    #[test]
    fn synthetic_origin_by_hand() {
        let p = builtin_problem("synthetic2d").unwrap();
        let r = residuals(&p, &start(4), 0.0).unwrap();
        assert_eq!(r.r_x, vec![0.0, -1.0]);
        let want = [-1.65, -0.9, -0.15, -0.2];
        for (a, b) in r.r_i.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(r.r_comp, vec![1.0; 4]);
        assert!(r.r_e.is_empty());
    }

    #[test]
    fn centered_point_has_zero_complementarity() {
        let p = builtin_problem("synthetic2d").unwrap();
        let mu: f64 = 0.09;
        let mut z = start(4);
        z.lambda = vec![mu.sqrt(); 4];
        z.s = vec![mu.sqrt(); 4];
        let r = residuals(&p, &z, mu).unwrap();
        assert!(r.r_comp.iter().all(|v| v.abs() < 1e-16));
        assert!((duality_gap(&z.lambda, &z.s).unwrap() - 4.0 * mu).abs() < 1e-15);
    }

    #[test]
    fn gap_examples() {
        assert_eq!(duality_gap(&[1.0, 2.0], &[3.0, 0.0]).unwrap(), 3.0);
        assert_eq!(duality_gap(&[], &[]).unwrap(), 0.0);
        assert!(duality_gap(&[1.0], &[]).is_err());
    }

    #[test]
    fn errors_name_the_block() {
        let p = builtin_problem("synthetic2d").unwrap();
        let mut z = start(4);
        z.s[2] = f64::NAN;
        assert!(matches!(
            residuals(&p, &z, 0.0),
            Err(Error::NonFinite { block: "s" })
        ));
        let z = start(3);
        assert!(matches!(
            residuals(&p, &z, 0.0),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn implicit_examples() {
        let p = builtin_problem("synthetic2d").unwrap();
        let z = ImplicitIterate {
            x: vec![0.0; 2],
            lambda: vec![2.0; 4],
            gamma: vec![],
            s: vec![2.0; 4],
            v: vec![0.0; 4],
        };
        let r = implicit_residuals(&p, &z, 1.0).unwrap();
        assert_eq!(r.r_comp, vec![1.0; 8]);
    }
}
