//! Free-form QPS reader.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::CscMatrix;
use crate::problem::QpProblem;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    L,
    G,
    E,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ObjSense {
    #[default]
    Minimize,
    Maximize,
}

/// Section model of a QPS file. Row and column indices refer to `rows`
/// and `columns`; the objective row is kept separately.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct QpsFile {
    pub name: String,
    pub objective_row: String,
    pub sense: ObjSense,
    pub rows: Vec<(String, RowKind)>,
    pub columns: Vec<String>,
    /// Constraint coefficients keyed by (row, column).
    pub entries: BTreeMap<(usize, usize), f64>,
    pub cost: Vec<f64>,
    pub rhs: Vec<f64>,
    /// Right-hand side given for the objective row.
    pub objective_rhs: f64,
    pub ranges: Vec<Option<f64>>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Full symmetric quadratic term keyed by (row, column).
    pub quad: BTreeMap<(usize, usize), f64>,
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Rows,
    Columns,
    Rhs,
    Ranges,
    Bounds,
    QuadObj,
    QMatrix,
    ObjSense,
    End,
}

struct Ctx<'a> {
    line: usize,
    toks: Vec<&'a str>,
}

impl Ctx<'_> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse {
            line: self.line,
            msg: msg.into(),
        }
    }

    fn num(&self, k: usize) -> Result<f64> {
        let t = self
            .toks
            .get(k)
            .ok_or_else(|| self.err("missing numeric field"))?;
        let v: f64 = t
            .parse()
            .map_err(|_| self.err(format!("'{t}' is not a number")))?;
        if v.is_nan() {
            return Err(self.err("NaN value"));
        }
        Ok(v)
    }
}

impl QpsFile {
    pub fn n(&self) -> usize {
        self.columns.len()
    }

    /// Objective of the file as written, including the constant term.
    pub fn raw_objective(&self, x: &[f64]) -> f64 {
        let mut f: f64 = self.cost.iter().zip(x).map(|(c, x)| c * x).sum();
        for (&(i, j), v) in &self.quad {
            f += 0.5 * v * x[i] * x[j];
        }
        f -= self.objective_rhs;
        match self.sense {
            ObjSense::Minimize => f,
            ObjSense::Maximize => -f,
        }
    }

    /// Row-activity interval `[lo, hi]` of every constraint row.
    pub fn row_intervals(&self) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .enumerate()
            .map(|(i, (_, kind))| {
                let r = self.rhs[i];
                match (kind, self.ranges[i]) {
                    (RowKind::G, None) => (r, f64::INFINITY),
                    (RowKind::L, None) => (f64::NEG_INFINITY, r),
                    (RowKind::E, None) => (r, r),
                    (RowKind::G, Some(h)) => (r, r + h.abs()),
                    (RowKind::L, Some(h)) => (r - h.abs(), r),
                    (RowKind::E, Some(h)) if h >= 0.0 => (r, r + h),
                    (RowKind::E, Some(h)) => (r + h, r),
                }
            })
            .collect()
    }

    /// Membership of `x` in the feasible set described by the file.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        let mut act = vec![0.0; self.rows.len()];
        for (&(i, j), v) in &self.entries {
            act[i] += v * x[j];
        }
        let rows_ok = self
            .row_intervals()
            .iter()
            .zip(&act)
            .all(|((lo, hi), a)| *a >= lo - tol && *a <= hi + tol);
        let bounds_ok =
            (0..self.n()).all(|j| x[j] >= self.lower[j] - tol && x[j] <= self.upper[j] + tol);
        rows_ok && bounds_ok
    }
}

fn section(word: &str) -> Option<Section> {
    Some(match word {
        "NAME" => Section::None,
        "ROWS" => Section::Rows,
        "COLUMNS" => Section::Columns,
        "RHS" => Section::Rhs,
        "RANGES" => Section::Ranges,
        "BOUNDS" => Section::Bounds,
        "QUADOBJ" | "QSECTION" => Section::QuadObj,
        "QMATRIX" => Section::QMatrix,
        "OBJSENSE" => Section::ObjSense,
        "ENDATA" => Section::End,
        _ => return None,
    })
}

/// Parses QPS text. Whitespace-separated fields, `*` comment lines.
pub fn parse_qps(text: &str) -> Result<QpsFile> {
    let mut f = QpsFile::default();
    let mut sec = Section::None;
    let mut row_index: HashMap<String, usize> = HashMap::new();
    let mut col_index: HashMap<String, usize> = HashMap::new();
    let mut other_n_rows: Vec<String> = Vec::new();
    let mut upper_set: Vec<bool> = Vec::new();
    let mut lower_set: Vec<bool> = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim_end();
        if line.trim().is_empty() || line.starts_with('*') {
            continue;
        }
        let cx = Ctx {
            line: lineno + 1,
            toks: line.split_whitespace().collect(),
        };
        let toks = &cx.toks;
        if !line.starts_with(char::is_whitespace) {
            sec =
                section(toks[0]).ok_or_else(|| cx.err(format!("unknown section '{}'", toks[0])))?;
            match sec {
                Section::None => f.name = toks.get(1).unwrap_or(&"").to_string(),
                Section::ObjSense if toks.len() > 1 => f.sense = sense(&cx, toks[1])?,
                Section::End => break,
                _ => {}
            }
            continue;
        }
        match sec {
            Section::None | Section::End => return Err(cx.err("data line outside a section")),
            Section::ObjSense => f.sense = sense(&cx, toks[0])?,
            Section::Rows => {
                if toks.len() < 2 {
                    return Err(cx.err("ROWS entry needs a type and a name"));
                }
                let name = toks[1].to_string();
                let kind = match toks[0] {
                    "N" if f.objective_row.is_empty() => {
                        f.objective_row = name;
                        continue;
                    }
                    "N" => {
                        other_n_rows.push(name);
                        continue;
                    }
                    "L" => RowKind::L,
                    "G" => RowKind::G,
                    "E" => RowKind::E,
                    t => return Err(cx.err(format!("unknown row type '{t}'"))),
                };
                if row_index.contains_key(&name) || name == f.objective_row {
                    return Err(cx.err(format!("row '{name}' declared twice")));
                }
                row_index.insert(name.clone(), f.rows.len());
                f.rows.push((name, kind));
                f.rhs.push(0.0);
                f.ranges.push(None);
            }
            Section::Columns => {
                if toks.iter().any(|t| t.contains("MARKER")) {
                    continue;
                }
                if toks.len() < 3 || toks.len() % 2 == 0 {
                    return Err(cx.err("COLUMNS entry must be: column row value [row value]"));
                }
                let j = match col_index.get(toks[0]) {
                    Some(&j) => j,
                    None => {
                        let j = f.columns.len();
                        col_index.insert(toks[0].to_string(), j);
                        f.columns.push(toks[0].to_string());
                        f.cost.push(0.0);
                        f.lower.push(0.0);
                        f.upper.push(f64::INFINITY);
                        lower_set.push(false);
                        upper_set.push(false);
                        j
                    }
                };
                for k in (1..toks.len()).step_by(2) {
                    let v = cx.num(k + 1)?;
                    let r = toks[k];
                    if r == f.objective_row {
                        f.cost[j] += v;
                    } else if let Some(&i) = row_index.get(r) {
                        *f.entries.entry((i, j)).or_insert(0.0) += v;
                    } else if !other_n_rows.iter().any(|n| n == r) {
                        return Err(cx.err(format!(
                            "column '{}' references undeclared row '{r}'",
                            toks[0]
                        )));
                    }
                }
            }
            Section::Rhs | Section::Ranges => {
                let start = if toks.len() % 2 == 1 { 1 } else { 0 };
                if toks.len() < 2 {
                    return Err(cx.err("entry must list row value pairs"));
                }
                for k in (start..toks.len()).step_by(2) {
                    let v = cx.num(k + 1)?;
                    let r = toks[k];
                    if r == f.objective_row {
                        if sec == Section::Rhs {
                            f.objective_rhs += v;
                        }
                    } else if let Some(&i) = row_index.get(r) {
                        if sec == Section::Rhs {
                            f.rhs[i] += v;
                        } else {
                            f.ranges[i] = Some(f.ranges[i].unwrap_or(0.0) + v);
                        }
                    } else if !other_n_rows.iter().any(|n| n == r) {
                        return Err(cx.err(format!("reference to undeclared row '{r}'")));
                    }
                }
            }
            Section::Bounds => {
                let kind = toks[0];
                let needs_value = !matches!(kind, "FR" | "MI" | "PL" | "BV");
                let col_pos = match (needs_value, toks.len()) {
                    (true, 4) | (false, 3) => 2,
                    (true, 3) | (false, 2) => 1,
                    _ => return Err(cx.err("malformed BOUNDS entry")),
                };
                let c = toks[col_pos];
                let &j = col_index
                    .get(c)
                    .ok_or_else(|| cx.err(format!("bound on undeclared column '{c}'")))?;
                let v = if needs_value {
                    cx.num(col_pos + 1)?
                } else {
                    0.0
                };
                match kind {
                    "LO" | "LI" => {
                        f.lower[j] = v;
                        lower_set[j] = true;
                    }
                    "UP" | "UI" => {
                        f.upper[j] = v;
                        upper_set[j] = true;
                        if v < 0.0 && !lower_set[j] {
                            f.lower[j] = f64::NEG_INFINITY;
                        }
                    }
                    "FX" => {
                        f.lower[j] = v;
                        f.upper[j] = v;
                        lower_set[j] = true;
                        upper_set[j] = true;
                    }
                    "FR" => {
                        f.lower[j] = f64::NEG_INFINITY;
                        f.upper[j] = f64::INFINITY;
                    }
                    "MI" => {
                        f.lower[j] = f64::NEG_INFINITY;
                        lower_set[j] = true;
                    }
                    "PL" => f.upper[j] = f64::INFINITY,
                    "BV" => {
                        f.lower[j] = 0.0;
                        f.upper[j] = 1.0;
                    }
                    t => return Err(cx.err(format!("unknown bound type '{t}'"))),
                }
            }
            Section::QuadObj | Section::QMatrix => {
                if toks.len() != 3 {
                    return Err(cx.err("quadratic entry must be: column column value"));
                }
                let get = |c: &str| {
                    col_index.get(c).copied().ok_or_else(|| {
                        cx.err(format!("quadratic term references undeclared column '{c}'"))
                    })
                };
                let (i, j, v) = (get(toks[0])?, get(toks[1])?, cx.num(2)?);
                *f.quad.entry((i, j)).or_insert(0.0) += v;
                if sec == Section::QuadObj && i != j {
                    *f.quad.entry((j, i)).or_insert(0.0) += v;
                }
            }
        }
    }
    if f.objective_row.is_empty() {
        return Err(Error::Parse {
            line: 0,
            msg: "no objective (N) row".into(),
        });
    }
    Ok(f)
}

fn sense(cx: &Ctx, word: &str) -> Result<ObjSense> {
    match word {
        "MIN" | "MINIMIZE" => Ok(ObjSense::Minimize),
        "MAX" | "MAXIMIZE" => Ok(ObjSense::Maximize),
        w => Err(cx.err(format!("unknown objective sense '{w}'"))),
    }
}

/// Reads and parses a QPS file from disk.
pub fn read_qps(path: impl AsRef<Path>) -> Result<QpsFile> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_qps(&text)
}

#[derive(Default)]
struct Rows {
    rows: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    rhs: Vec<f64>,
}

impl Rows {
    fn push(&mut self, coeffs: &[(usize, f64)], sign: f64, rhs: f64) {
        let r = self.rhs.len();
        for &(j, v) in coeffs {
            self.rows.push(r);
            self.cols.push(j);
            self.vals.push(sign * v);
        }
        self.rhs.push(sign * rhs);
    }

    fn finish(self, n: usize) -> Result<(CscMatrix, Vec<f64>)> {
        Ok((
            CscMatrix::from_triplets(self.rhs.len(), n, &self.rows, &self.cols, &self.vals)?,
            self.rhs,
        ))
    }
}

/// Converts to `Ax ≥ b, Cx = d`: row constraints first, then bounds.
/// Fixed variables become equality rows.
pub fn to_qp_problem(file: &QpsFile) -> Result<QpProblem> {
    let n = file.n();
    for j in 0..n {
        if file.lower[j] > file.upper[j] {
            return Err(Error::InfeasibleBounds {
                column: file.columns[j].clone(),
                lower: file.lower[j],
                upper: file.upper[j],
            });
        }
    }
    let mut by_row: Vec<Vec<(usize, f64)>> = vec![Vec::new(); file.rows.len()];
    for (&(i, j), &v) in &file.entries {
        by_row[i].push((j, v));
    }
    let mut ineq = Rows::default();
    let mut eq = Rows::default();
    for (i, (lo, hi)) in file.row_intervals().into_iter().enumerate() {
        if lo == hi {
            eq.push(&by_row[i], 1.0, lo);
            continue;
        }
        if lo.is_finite() {
            ineq.push(&by_row[i], 1.0, lo);
        }
        if hi.is_finite() {
            ineq.push(&by_row[i], -1.0, hi);
        }
    }
    for j in 0..n {
        let (lo, hi) = (file.lower[j], file.upper[j]);
        if lo == hi {
            eq.push(&[(j, 1.0)], 1.0, lo);
            continue;
        }
        if lo.is_finite() {
            ineq.push(&[(j, 1.0)], 1.0, lo);
        }
        if hi.is_finite() {
            ineq.push(&[(j, 1.0)], -1.0, hi);
        }
    }
    let sign = match file.sense {
        ObjSense::Minimize => 1.0,
        ObjSense::Maximize => -1.0,
    };
    let (qr, (qc, qv)): (Vec<usize>, (Vec<usize>, Vec<f64>)) = file
        .quad
        .iter()
        .map(|(&(i, j), &v)| (i, (j, sign * v)))
        .unzip();
    let qmat = CscMatrix::from_triplets(n, n, &qr, &qc, &qv)?;
    let q = file.cost.iter().map(|c| sign * c).collect();
    let (a, b) = ineq.finish(n)?;
    let (c, d) = eq.finish(n)?;
    let mut p = QpProblem::new(qmat, q, a, b, c, d)?.with_name(file.name.clone());
    p.objective_constant = -sign * file.objective_rhs;
    Ok(p)
}
