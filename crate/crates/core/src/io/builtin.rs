use crate::error::{Error, Result};
use crate::linalg::CscMatrix;
use crate::problem::QpProblem;

/// Names accepted by [`builtin_problem`].
pub const BUILTIN_PROBLEMS: &[&str] = &["synthetic2d", "simplex2d"];

/// Small built-in instances.
///
/// `synthetic2d`: `Q = I₂`, `q = 0`, four inequalities cutting a box with
/// one slanted face. `simplex2d`: nearest point to the origin on
/// `x₁ + x₂ = 1, x ≥ 0`.
pub fn builtin_problem(name: &str) -> Result<QpProblem> {
    let p = match name {
        "synthetic2d" => QpProblem::new(
            CscMatrix::identity(2),
            vec![0.0, 0.0],
            CscMatrix::from_dense(&[
                vec![1.0, 1.0],
                vec![0.0, 1.0],
                vec![-1.0, 0.0],
                vec![0.0, -1.0],
            ]),
            vec![0.65, -0.1, -0.85, -0.8],
            CscMatrix::zeros(0, 2),
            vec![],
        )?,
        "simplex2d" => QpProblem::new(
            CscMatrix::identity(2),
            vec![0.0, 0.0],
            CscMatrix::identity(2),
            vec![0.0, 0.0],
            CscMatrix::from_dense(&[vec![1.0, 1.0]]),
            vec![1.0],
        )?,
        _ => {
            return Err(Error::UnknownProblem {
                name: name.to_string(),
                available: BUILTIN_PROBLEMS.join(", "),
            })
        }
    };
    Ok(p.with_name(name))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_data() {
        let p = builtin_problem("synthetic2d").unwrap();
        assert_eq!((p.n, p.m, p.p), (2, 4, 0));
        assert_eq!(p.b[0], 0.65);
        assert_eq!(p.qmat.to_dense(), vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
    }

    #[test]
    fn unknown_lists_names() {
        let e = builtin_problem("nope").unwrap_err().to_string();
        assert!(e.contains("synthetic2d") && e.contains("simplex2d"));
    }
}
