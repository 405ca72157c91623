use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use ipqp::io::{load_problem, write_solution};
use ipqp::{
    solve as run_solver, LinearStrategy, Method, QpProblem, Solution, SolveTrace, SolverConfig,
    Status,
};

use crate::args::{BenchArgs, CompareArgs, OnOff, SolveArgs, SolverArgs};

pub const OK: u8 = 0;
pub const USAGE: u8 = 1;
pub const NOT_CONVERGED: u8 = 2;

fn usage(msg: impl std::fmt::Display) -> u8 {
    eprintln!("error: {msg}");
    USAGE
}

fn load(spec: &str) -> ipqp::Result<QpProblem> {
    load_problem(spec.strip_prefix("builtin:").unwrap_or(spec))
}

fn config(a: &SolverArgs, method: Method) -> Result<SolverConfig, String> {
    if a.theta.is_some() && a.linsolve != LinearStrategy::Inexact {
        return Err("--theta requires --linsolve inexact".into());
    }
    let mut c = SolverConfig::new(method, a.linsolve);
    c.precision = a.precision;
    c.sigma = a.sigma;
    if let Some(t) = a.theta {
        c.theta = t;
    }
    c.tol = a.tol;
    c.max_iters = a.max_iters;
    c.equilibrate = a.equilibrate == OnOff::On;
    c.trace_level = a.trace_level;
    c.validate().map_err(|e| e.to_string())?;
    Ok(c)
}

fn write_trace(trace: &SolveTrace, path: &Path) -> ipqp::Result<()> {
    let file = File::create(path).map_err(|e| ipqp::Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let w = BufWriter::new(file);
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        trace.write_csv(w)
    } else {
        trace.write_jsonl(w)
    }
}

fn report_warnings(trace: &SolveTrace) {
    for w in &trace.warnings {
        eprintln!("warning: {w}");
    }
}

fn exit_for(status: Status) -> u8 {
    match status {
        Status::Converged => OK,
        Status::MaxIters | Status::Stalled => NOT_CONVERGED,
    }
}

fn outputs(
    sol: &Solution,
    trace: &SolveTrace,
    trace_path: Option<&Path>,
    out: Option<&Path>,
) -> Result<(), u8> {
    if let Some(p) = trace_path {
        write_trace(trace, p).map_err(usage)?;
    }
    if let Some(p) = out {
        write_solution(sol, p).map_err(usage)?;
    }
    Ok(())
}

pub fn solve(a: &SolveArgs) -> u8 {
    let cfg = match config(&a.solver, a.method) {
        Ok(c) => c,
        Err(e) => return usage(e),
    };
    let problem = match load(&a.solver.problem) {
        Ok(p) => p,
        Err(e) => return usage(e),
    };
    let (sol, trace) = match run_solver(&problem, &cfg) {
        Ok(r) => r,
        Err(e) => return usage(e),
    };
    report_warnings(&trace);
    if let Err(code) = outputs(&sol, &trace, a.trace.as_deref(), a.out.as_deref()) {
        return code;
    }
    println!("problem        {}", problem.name);
    println!("method         {} ({}, {})", cfg.method, cfg.linear, cfg.precision);
    println!("status         {}", sol.status);
    println!("iterations     {}", sol.iterations);
    println!("factorizations {}", sol.factorizations);
    if cfg.linear == LinearStrategy::Minres {
        println!("krylov         {}", sol.krylov_iterations);
    }
    println!("objective      {:.10e}", sol.objective);
    println!("gap            {:.3e}", sol.gap);
    println!("kkt residual   {:.3e}", sol.residuals.max());
    exit_for(sol.status)
}

/// `trace.jsonl` becomes `trace.explicit.jsonl`.
fn tagged(path: &Path, tag: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}.{tag}.{}", ext.to_string_lossy()),
        None => format!("{stem}.{tag}"),
    };
    path.with_file_name(name)
}

struct Row {
    method: Method,
    sol: Solution,
    eig_ratio: Option<f64>,
    final_cond: Option<f64>,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |v| format!("{v:.2e}"))
}

pub fn compare(a: &CompareArgs) -> u8 {
    let problem = match load(&a.solver.problem) {
        Ok(p) => p,
        Err(e) => return usage(e),
    };
    let mut rows = Vec::new();
    for method in [Method::Explicit, Method::Implicit] {
        let mut args = a.solver.clone();
        if method == Method::Explicit && args.linsolve == LinearStrategy::Inexact {
            eprintln!("note: the explicit method has no factorization reuse; using direct solves");
            args.linsolve = LinearStrategy::Direct;
            args.theta = None;
        }
        let cfg = match config(&args, method) {
            Ok(c) => c,
            Err(e) => return usage(e),
        };
        let (sol, trace) = match run_solver(&problem, &cfg) {
            Ok(r) => r,
            Err(e) => return usage(e),
        };
        report_warnings(&trace);
        let tp = a.trace.as_deref().map(|p| tagged(p, &method.to_string()));
        let op = a.out.as_deref().map(|p| tagged(p, &method.to_string()));
        if let Err(code) = outputs(&sol, &trace, tp.as_deref(), op.as_deref()) {
            return code;
        }
        let eig: Vec<f64> = trace.records.iter().filter_map(|r| r.eig_max).collect();
        let eig_ratio = (!eig.is_empty()).then(|| {
            let hi = eig.iter().cloned().fold(0.0, f64::max);
            let lo = eig.iter().cloned().fold(f64::INFINITY, f64::min);
            hi / lo
        });
        let final_cond = trace.records.iter().rev().find_map(|r| r.cond);
        rows.push(Row {
            method,
            sol,
            eig_ratio,
            final_cond,
        });
    }
    println!("problem {}", problem.name);
    println!(
        "{:9} {:10} {:>6} {:>6} {:>8} {:>10} {:>10} {:>10} {:>10}",
        "method", "status", "iters", "facts", "krylov", "kkt", "gap", "eig ratio", "final cond"
    );
    for r in &rows {
        println!(
            "{:9} {:10} {:>6} {:>6} {:>8} {:>10.2e} {:>10.2e} {:>10} {:>10}",
            r.method.to_string(),
            r.sol.status.to_string(),
            r.sol.iterations,
            r.sol.factorizations,
            r.sol.krylov_iterations,
            r.sol.residuals.max(),
            r.sol.gap,
            fmt_opt(r.eig_ratio),
            fmt_opt(r.final_cond)
        );
    }
    if rows.iter().all(|r| r.sol.converged()) {
        OK
    } else {
        NOT_CONVERGED
    }
}

fn problem_list(spec: &str) -> Result<Vec<String>, String> {
    let path = Path::new(spec);
    if path.is_dir() {
        let mut files: Vec<String> = std::fs::read_dir(path)
            .map_err(|e| format!("{spec}: {e}"))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| {
                p.extension().is_some_and(|e| {
                    let e = e.to_string_lossy().to_ascii_lowercase();
                    e == "qps" || e == "mps" || e == "sif" || e == "json"
                })
            })
            .map(|p| p.display().to_string())
            .collect();
        files.sort();
        Ok(files)
    } else {
        Ok(spec
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(String::from)
            .collect())
    }
}

#[derive(Debug, Clone)]
struct BenchRow {
    problem: String,
    theta: f64,
    status: String,
    iterations: usize,
    factorizations: usize,
    wall_time_s: f64,
    gap: f64,
}

fn bench_one(spec: &str, theta: f64, a: &BenchArgs) -> BenchRow {
    let mut row = BenchRow {
        problem: spec.to_string(),
        theta,
        status: String::new(),
        iterations: 0,
        factorizations: 0,
        wall_time_s: 0.0,
        gap: f64::NAN,
    };
    let problem = match load(spec) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {spec}: {e}");
            row.status = "error".into();
            return row;
        }
    };
    let mut cfg = SolverConfig::new(Method::Implicit, LinearStrategy::Inexact);
    cfg.theta = theta;
    cfg.sigma = a.sigma;
    cfg.tol = a.tol;
    cfg.max_iters = a.max_iters;
    cfg.equilibrate = a.equilibrate == OnOff::On;
    let start = Instant::now();
    match run_solver(&problem, &cfg) {
        Ok((sol, trace)) => {
            row.wall_time_s = start.elapsed().as_secs_f64();
            for w in &trace.warnings {
                log::info!("{spec} theta={theta}: {w}");
            }
            row.status = sol.status.to_string();
            row.iterations = sol.iterations;
            row.factorizations = sol.factorizations;
            row.gap = sol.gap;
        }
        Err(e) => {
            eprintln!("error: {spec} theta={theta}: {e}");
            row.status = "error".into();
        }
    }
    row
}

pub fn bench(a: &BenchArgs) -> u8 {
    let problems = match problem_list(&a.problems) {
        Ok(p) => p,
        Err(e) => return usage(e),
    };
    if problems.is_empty() {
        return usage(format!("no problems found in {:?}", a.problems));
    }
    if a.theta_sweep.is_empty() {
        return usage("--theta-sweep is empty");
    }
    if let Some(t) = a.theta_sweep.iter().find(|t| !(**t > 0.0 && **t < 1.0)) {
        return usage(format!("theta must lie in (0, 1), got {t}"));
    }
    let jobs: Vec<(String, f64)> = problems
        .iter()
        .flat_map(|p| a.theta_sweep.iter().map(move |t| (p.clone(), *t)))
        .collect();
    let results: Vec<Mutex<Option<BenchRow>>> = jobs.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..a.jobs.max(1).min(jobs.len()) {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                if k >= jobs.len() {
                    break;
                }
                let row = bench_one(&jobs[k].0, jobs[k].1, a);
                *results[k].lock().unwrap() = Some(row);
            });
        }
    });
    let rows: Vec<BenchRow> = results
        .into_iter()
        .map(|m| m.into_inner().unwrap().expect("every job runs"))
        .collect();

    if let Err(e) = write_bench_csv(&rows, &a.out) {
        return usage(format!("{}: {e}", a.out.display()));
    }
    let failed = rows.iter().filter(|r| r.status != "converged").count();
    println!(
        "{} runs over {} problems, {} not converged; rows written to {}",
        rows.len(),
        problems.len(),
        failed,
        a.out.display()
    );
    if failed > 0 {
        NOT_CONVERGED
    } else {
        OK
    }
}

fn write_bench_csv(rows: &[BenchRow], path: &Path) -> Result<(), Box<dyn std::error::Error>> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    w.write_record([
        "problem",
        "theta",
        "status",
        "iterations",
        "factorizations",
        "wall_time_s",
        "gap",
    ])?;
    for r in rows {
        w.write_record([
            r.problem.clone(),
            r.theta.to_string(),
            r.status.clone(),
            r.iterations.to_string(),
            r.factorizations.to_string(),
            format!("{:.6}", r.wall_time_s),
            format!("{:e}", r.gap),
        ])?;
    }
    w.into_inner()?.flush()?;
    Ok(())
}
