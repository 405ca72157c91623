use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::Float;
use serde::{Deserialize, Serialize};

/// Working precision of the linear-algebra kernels.
///
/// Residuals and line searches are always evaluated in `f64`; only matrix
/// assembly, factorization and Krylov iterations run in the selected type.
pub trait Real: Float + Debug + Display + Default + Sum + Send + Sync + 'static {
    const PRECISION: Precision;
    /// Pivots smaller than this fraction of the largest diagonal entry are
    /// replaced by a signed regularization.
    const PIVOT_TOL: f64;
    /// Magnitude of the signed regularization relative to `‖M‖∞`.
    const STATIC_REG: f64;

    fn of(v: f64) -> Self;
    fn f64(self) -> f64;
}

impl Real for f64 {
    const PRECISION: Precision = Precision::F64;
    const PIVOT_TOL: f64 = 1e-13;
    const STATIC_REG: f64 = 1e-9;

    #[inline]
    fn of(v: f64) -> Self {
        v
    }
    #[inline]
    fn f64(self) -> f64 {
        self
    }
}

// Both tolerances are the f64 values rescaled by the ratio of unit roundoffs
// (pivot test linearly, regularization by its square root).
impl Real for f32 {
    const PRECISION: Precision = Precision::F32;
    const PIVOT_TOL: f64 = 5e-5;
    const STATIC_REG: f64 = 2e-5;

    #[inline]
    fn of(v: f64) -> Self {
        v as f32
    }
    #[inline]
    fn f64(self) -> f64 {
        self as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    F64,
    F32,
}

impl Display for Precision {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Precision::F64 => "f64",
            Precision::F32 => "f32",
        })
    }
}

impl std::str::FromStr for Precision {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "f64" | "binary64" => Ok(Precision::F64),
            "f32" | "binary32" => Ok(Precision::F32),
            other => Err(format!("unknown precision {other:?} (expected f64 or f32)")),
        }
    }
}
