use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CscMatrix;
use crate::problem::QpProblem;
use crate::solve::Solution;

pub const PROBLEM_SCHEMA: &str = "qp_v1";

/// Coordinate listing of a sparse matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Triplets {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl Triplets {
    fn of(m: &CscMatrix) -> Self {
        let mut t = Triplets {
            rows: Vec::new(),
            cols: Vec::new(),
            vals: Vec::new(),
        };
        for j in 0..m.ncols {
            for (i, v) in m.col(j) {
                t.rows.push(i);
                t.cols.push(j);
                t.vals.push(v);
            }
        }
        t
    }

    fn build(&self, nrows: usize, ncols: usize) -> Result<CscMatrix> {
        CscMatrix::from_triplets(nrows, ncols, &self.rows, &self.cols, &self.vals)
    }
}

/// On-disk problem layout: dimensions, triplet lists and vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemJson {
    pub schema: String,
    #[serde(default)]
    pub name: String,
    pub n: usize,
    pub m: usize,
    pub p: usize,
    #[serde(rename = "Q")]
    pub qmat: Triplets,
    pub q: Vec<f64>,
    #[serde(rename = "A")]
    pub a: Triplets,
    pub b: Vec<f64>,
    #[serde(rename = "C")]
    pub c: Triplets,
    pub d: Vec<f64>,
    #[serde(default)]
    pub objective_constant: f64,
}

impl From<&QpProblem> for ProblemJson {
    fn from(p: &QpProblem) -> Self {
        ProblemJson {
            schema: PROBLEM_SCHEMA.into(),
            name: p.name.clone(),
            n: p.n,
            m: p.m,
            p: p.p,
            qmat: Triplets::of(&p.qmat),
            q: p.q.clone(),
            a: Triplets::of(&p.a),
            b: p.b.clone(),
            c: Triplets::of(&p.c),
            d: p.d.clone(),
            objective_constant: p.objective_constant,
        }
    }
}

impl ProblemJson {
    pub fn into_problem(self) -> Result<QpProblem> {
        if self.schema != PROBLEM_SCHEMA {
            return Err(Error::Config(format!(
                "unsupported problem schema '{}'",
                self.schema
            )));
        }
        if self.q.len() != self.n {
            return Err(Error::dim("q length", self.n, self.q.len()));
        }
        let mut p = QpProblem::new(
            self.qmat.build(self.n, self.n)?,
            self.q,
            self.a.build(self.m, self.n)?,
            self.b,
            self.c.build(self.p, self.n)?,
            self.d,
        )?
        .with_name(self.name);
        p.objective_constant = self.objective_constant;
        Ok(p)
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).map_err(io_err(path))?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n").map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let r = BufReader::new(File::open(path).map_err(io_err(path))?);
    Ok(serde_json::from_reader(r)?)
}

pub fn write_problem(problem: &QpProblem, path: impl AsRef<Path>) -> Result<()> {
    write_json(&ProblemJson::from(problem), path.as_ref())
}

pub fn read_problem(path: impl AsRef<Path>) -> Result<QpProblem> {
    read_json::<ProblemJson>(path.as_ref())?.into_problem()
}

pub fn write_solution(solution: &Solution, path: impl AsRef<Path>) -> Result<()> {
    write_json(solution, path.as_ref())
}

pub fn read_solution(path: impl AsRef<Path>) -> Result<Solution> {
    read_json(path.as_ref())
}
