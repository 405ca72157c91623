use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::MinresOptions;
use crate::scalar::Precision;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Explicit,
    Implicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinearStrategy {
    Direct,
    Inexact,
    Minres,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceLevel {
    Basic,
    Spectrum,
}

macro_rules! text_enum {
    ($t:ty, $what:literal, $($v:ident => $s:literal),+) => {
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $(Self::$v => $s),+ })
            }
        }
        impl FromStr for $t {
            type Err = String;
            fn from_str(s: &str) -> std::result::Result<Self, String> {
                match s {
                    $($s => Ok(Self::$v),)+
                    other => Err(format!(concat!("unknown ", $what, " {:?}"), other)),
                }
            }
        }
    };
}

text_enum!(Method, "method", Explicit => "explicit", Implicit => "implicit");
text_enum!(LinearStrategy, "linear strategy", Direct => "direct", Inexact => "inexact", Minres => "minres");
text_enum!(TraceLevel, "trace level", Basic => "basic", Spectrum => "spectrum");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub method: Method,
    pub linear: LinearStrategy,
    pub precision: Precision,
    /// Centering parameter σ of the barrier update.
    pub sigma: f64,
    /// Forcing term θ of the inexact-Newton condition.
    pub theta: f64,
    pub tol: f64,
    pub max_iters: usize,
    pub equilibrate: bool,
    pub trace_level: TraceLevel,
    pub minres_rtol: f64,
    pub minres_atol: f64,
    pub minres_max_iters: usize,
    pub ruiz_passes: usize,
    pub ruiz_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            method: Method::Implicit,
            linear: LinearStrategy::Direct,
            precision: Precision::F64,
            sigma: 0.1,
            theta: 0.5,
            tol: 1e-9,
            max_iters: 200,
            equilibrate: true,
            trace_level: TraceLevel::Basic,
            minres_rtol: 1e-10,
            minres_atol: 1e-10,
            minres_max_iters: 5000,
            ruiz_passes: 10,
            ruiz_tol: 1e-3,
        }
    }
}

impl SolverConfig {
    pub fn new(method: Method, linear: LinearStrategy) -> Self {
        SolverConfig {
            method,
            linear,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.sigma > 0.0 && self.sigma <= 1.0) {
            return bad(format!("sigma must lie in (0, 1], got {}", self.sigma));
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return bad(format!("theta must lie in (0, 1), got {}", self.theta));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return bad(format!("tol must be positive, got {}", self.tol));
        }
        if self.max_iters == 0 {
            return bad("max_iters must be at least 1".into());
        }
        if !(self.minres_rtol > 0.0 && self.minres_atol >= 0.0) || self.minres_max_iters == 0 {
            return bad("MINRES tolerances must be positive".into());
        }
        if !(self.ruiz_tol > 0.0) {
            return bad(format!("ruiz_tol must be positive, got {}", self.ruiz_tol));
        }
        if self.linear == LinearStrategy::Inexact && self.method == Method::Explicit {
            return bad("factorization reuse is only available for the implicit method".into());
        }
        Ok(())
    }

    pub fn minres_options(&self) -> MinresOptions {
        MinresOptions {
            rtol: self.minres_rtol,
            atol: self.minres_atol,
            max_iters: self.minres_max_iters,
        }
    }
}
