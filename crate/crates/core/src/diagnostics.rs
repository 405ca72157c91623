//! Per-iteration instrumentation: residual histories, Krylov counts,
//! spectra and matrix changes.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::config::{LinearStrategy, Method, SolverConfig, TraceLevel};
use crate::error::{Error, Result};
use crate::linalg::{dense_symmetric_eigenvalues, Inertia, SparseSymmetric};
use crate::scalar::Precision;

pub const TRACE_SCHEMA: &str = "trace_v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    MaxIters,
    Stalled,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Converged => "converged",
            Status::MaxIters => "max_iters",
            Status::Stalled => "stalled",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub method: Method,
    pub linear_strategy: LinearStrategy,
    pub precision: Precision,
    pub sigma: f64,
    pub theta: Option<f64>,
    pub tol: f64,
    pub problem: String,
    pub equilibrate: bool,
    pub trace_level: TraceLevel,
    /// Partition used by the block-Jacobi preconditioner.
    pub preconditioner_blocks: Option<String>,
}

impl TraceHeader {
    pub fn new(problem: &str, config: &SolverConfig) -> Self {
        TraceHeader {
            method: config.method,
            linear_strategy: config.linear,
            precision: config.precision,
            sigma: config.sigma,
            theta: (config.linear == LinearStrategy::Inexact).then_some(config.theta),
            tol: config.tol,
            problem: problem.to_string(),
            equilibrate: config.equilibrate,
            trace_level: config.trace_level,
            preconditioner_blocks: (config.linear == LinearStrategy::Minres)
                .then(|| "x/v/gamma".to_string()),
        }
    }
}

/// One row of the trace, describing the iterate at the start of iteration
/// `iter` and the step taken from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub mu: f64,
    pub gap: f64,
    pub r_x: f64,
    pub r_i: f64,
    pub r_e: f64,
    pub r_comp: f64,
    /// Unrelaxed KKT residual (complementarity at μ = 0).
    pub kkt: f64,
    pub alpha: f64,
    pub factorized: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub krylov_iters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eig_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eig_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cond: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix_delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub db_minus: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inertia: Option<Inertia>,
    pub wall_time_ns: u64,
}

impl IterationRecord {
    pub fn new(iter: usize) -> Self {
        IterationRecord {
            iter,
            mu: 0.0,
            gap: 0.0,
            r_x: 0.0,
            r_i: 0.0,
            r_e: 0.0,
            r_comp: 0.0,
            kkt: 0.0,
            alpha: 0.0,
            factorized: false,
            krylov_iters: None,
            eig_min: None,
            eig_max: None,
            cond: None,
            matrix_delta: None,
            db_minus: None,
            inertia: None,
            wall_time_ns: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveTrace {
    pub header: TraceHeader,
    pub records: Vec<IterationRecord>,
    pub warnings: Vec<String>,
    pub status: Option<Status>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum Line {
    Header {
        schema: String,
        #[serde(flatten)]
        header: TraceHeader,
        status: Option<Status>,
        warnings: Vec<String>,
    },
    Iteration {
        schema: String,
        #[serde(flatten)]
        record: IterationRecord,
    },
}

pub const CSV_COLUMNS: [&str; 17] = [
    "iter",
    "mu",
    "gap",
    "r_x",
    "r_i",
    "r_e",
    "r_comp",
    "kkt",
    "alpha",
    "factorized",
    "krylov_iters",
    "eig_min",
    "eig_max",
    "cond",
    "matrix_delta",
    "db_minus_min",
    "wall_time_ns",
];

impl SolveTrace {
    pub fn new(header: TraceHeader) -> Self {
        SolveTrace {
            header,
            records: Vec::new(),
            warnings: Vec::new(),
            status: None,
        }
    }

    /// Appends a record; its index must exceed that of the previous one.
    pub fn record_iteration(&mut self, record: IterationRecord) -> Result<()> {
        if let Some(last) = self.records.last() {
            if record.iter <= last.iter {
                return Err(Error::TraceOrder {
                    last: last.iter,
                    got: record.iter,
                });
            }
        }
        self.records.push(record);
        Ok(())
    }

    pub fn warn(&mut self, msg: impl Into<String>) {
        let msg = msg.into();
        log::debug!("{msg}");
        self.warnings.push(msg);
    }

    pub fn iterations(&self) -> usize {
        self.records.last().map_or(0, |r| r.iter)
    }

    pub fn factorizations(&self) -> usize {
        self.records.iter().filter(|r| r.factorized).count()
    }

    pub fn krylov_total(&self) -> usize {
        self.records.iter().filter_map(|r| r.krylov_iters).sum()
    }

    pub fn final_record(&self) -> Option<&IterationRecord> {
        self.records.last()
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        let head = Line::Header {
            schema: TRACE_SCHEMA.into(),
            header: self.header.clone(),
            status: self.status,
            warnings: self.warnings.clone(),
        };
        serde_json::to_writer(&mut w, &head)?;
        writeln!(w).map_err(io_err)?;
        for r in &self.records {
            let line = Line::Iteration {
                schema: TRACE_SCHEMA.into(),
                record: r.clone(),
            };
            serde_json::to_writer(&mut w, &line)?;
            writeln!(w).map_err(io_err)?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(r: R) -> Result<Self> {
        let mut trace: Option<SolveTrace> = None;
        for (k, line) in r.lines().enumerate() {
            let line = line.map_err(io_err)?;
            if line.trim().is_empty() {
                continue;
            }
            let parsed: Line = serde_json::from_str(&line).map_err(|e| Error::Parse {
                line: k + 1,
                msg: e.to_string(),
            })?;
            match parsed {
                Line::Header {
                    schema,
                    header,
                    status,
                    warnings,
                } => {
                    check_schema(&schema, k)?;
                    let mut t = SolveTrace::new(header);
                    t.status = status;
                    t.warnings = warnings;
                    trace = Some(t);
                }
                Line::Iteration { schema, record } => {
                    check_schema(&schema, k)?;
                    let t = trace.as_mut().ok_or(Error::Parse {
                        line: k + 1,
                        msg: "iteration record before header".into(),
                    })?;
                    t.record_iteration(record)?;
                }
            }
        }
        trace.ok_or(Error::Parse {
            line: 0,
            msg: "empty trace".into(),
        })
    }

    /// CSV export with the fixed column order of [`CSV_COLUMNS`].
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(CSV_COLUMNS).map_err(csv_err)?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.records {
            let dbmin = r
                .db_minus
                .as_ref()
                .map(|d| d.iter().cloned().fold(f64::INFINITY, f64::min));
            out.write_record([
                r.iter.to_string(),
                r.mu.to_string(),
                r.gap.to_string(),
                r.r_x.to_string(),
                r.r_i.to_string(),
                r.r_e.to_string(),
                r.r_comp.to_string(),
                r.kkt.to_string(),
                r.alpha.to_string(),
                (r.factorized as u8).to_string(),
                r.krylov_iters.map(|k| k.to_string()).unwrap_or_default(),
                opt(r.eig_min),
                opt(r.eig_max),
                opt(r.cond),
                opt(r.matrix_delta),
                opt(dbmin),
                r.wall_time_ns.to_string(),
            ])
            .map_err(csv_err)?;
        }
        out.flush().map_err(io_err)?;
        Ok(())
    }
}

fn check_schema(schema: &str, k: usize) -> Result<()> {
    if schema == TRACE_SCHEMA {
        Ok(())
    } else {
        Err(Error::Parse {
            line: k + 1,
            msg: format!("unsupported schema {schema:?}"),
        })
    }
}

fn io_err(e: std::io::Error) -> Error {
    Error::Io {
        path: "<trace>".into(),
        source: e,
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io {
        path: "<trace csv>".into(),
        source: std::io::Error::other(e),
    }
}

/// Extremes of `|eig(M)|` and their ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumMetrics {
    pub eig_min_abs: f64,
    pub eig_max_abs: f64,
    /// `max|eig| / min|eig|` over eigenvalues not treated as zero.
    pub cond: f64,
    /// Eigenvalues with `|eig| < 1e-14·max|eig|`, excluded from `cond`.
    pub zero_count: usize,
}

pub fn spectrum_metrics(m: &SparseSymmetric<f64>) -> Result<SpectrumMetrics> {
    let eig = dense_symmetric_eigenvalues(&m.to_dense())?;
    Ok(metrics_from_eigenvalues(&eig))
}

pub fn metrics_from_eigenvalues(eig: &[f64]) -> SpectrumMetrics {
    let max = eig.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let cut = 1e-14 * max;
    let mut min = f64::INFINITY;
    let mut zeros = 0;
    for v in eig {
        if v.abs() < cut || *v == 0.0 {
            zeros += 1;
        } else {
            min = min.min(v.abs());
        }
    }
    if !min.is_finite() {
        min = 0.0;
    }
    SpectrumMetrics {
        eig_min_abs: min,
        eig_max_abs: max,
        cond: if min > 0.0 { max / min } else { f64::INFINITY },
        zero_count: zeros,
    }
}
