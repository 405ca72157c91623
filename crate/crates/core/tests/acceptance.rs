//! Acceptance checks. Each criterion prints one PASS/FAIL line with the
//! measurements behind it.
//!
//! The process exits 0 so that failing criteria are reported rather than
//! hidden behind a test failure; set `IPQP_ACCEPTANCE_STRICT=1` to turn any
//! FAIL into a non-zero exit.

use std::ops::Range;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::Instant;

use ipqp::io::{read_qps, QpsFile, RowKind};
use ipqp::linalg::{
    block_jacobi_precond, dense_symmetric_eigenvalues, ldlt_factor, minres, MinresOptions,
    SparseSymmetric,
};
use ipqp::{
    builtin_problem, exponential_map, load_problem, softplus, softplus_derivative, solve,
    to_qp_problem, LinearStrategy, Method, Precision, QpProblem, Real, SolveTrace, SolverConfig,
    TraceLevel,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    lines: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Outcome {
            pass: true,
            lines: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        let what = what.into();
        self.lines
            .push(format!("    [{}] {what}", if ok { "ok" } else { "FAILED" }));
        self.pass &= ok;
    }

    fn note(&mut self, what: impl Into<String>) {
        self.lines.push(format!("    {}", what.into()));
    }
}

fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/maros_meszaros")
}

fn instance(name: &str) -> QpProblem {
    if name == "synthetic2d" {
        return builtin_problem(name).unwrap();
    }
    load_problem(data_dir().join(format!("{name}.QPS")).to_str().unwrap()).unwrap()
}

fn config(method: Method, linear: LinearStrategy) -> SolverConfig {
    SolverConfig::new(method, linear)
}

fn run(problem: &QpProblem, cfg: &SolverConfig) -> (ipqp::Solution, SolveTrace) {
    solve(problem, cfg).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| 10f64.powf(lo + (hi - lo) * k as f64 / (n - 1) as f64))
        .collect()
}

// 1 ----------------------------------------------------------------------

fn synthetic_correctness() -> Outcome {
    let mut out = Outcome::new();
    let problem = builtin_problem("synthetic2d").unwrap();

    // Projection of the origin onto x1 + x2 = 0.65 and its multipliers,
    // verified against the problem data rather than assumed.
    let x_star = [0.325, 0.325];
    let lam_star = [0.325, 0.0, 0.0, 0.0];
    let ax = problem.a.mul_vec(&x_star);
    let feasible = ax.iter().zip(&problem.b).all(|(a, b)| a - b >= -1e-15);
    let grad: Vec<f64> = problem
        .qmat
        .mul_vec(&x_star)
        .iter()
        .zip(&problem.q)
        .map(|(g, q)| g + q)
        .collect();
    let at_l = problem.a.tmul_vec(&lam_star);
    let stationary = grad.iter().zip(&at_l).all(|(g, l)| (g - l).abs() < 1e-15);
    let complementary = ax
        .iter()
        .zip(&problem.b)
        .zip(&lam_star)
        .all(|((a, b), l)| ((a - b) * l).abs() < 1e-15);
    out.check(
        feasible && stationary && complementary && problem.p == 0,
        "oracle point satisfies the KKT conditions of the built-in data",
    );

    for method in [Method::Explicit, Method::Implicit] {
        let cfg = config(method, LinearStrategy::Direct);
        let start = Instant::now();
        let (sol, _) = run(&problem, &cfg);
        let secs = start.elapsed().as_secs_f64();
        let dx = sol
            .x
            .iter()
            .zip(&x_star)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let dl = sol
            .lambda
            .iter()
            .zip(&lam_star)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        out.check(
            sol.converged() && dx <= 1e-6 && dl <= 1e-5 && sol.iterations <= 50 && secs < 1.0,
            format!(
                "{method}: {} in {} iterations, {:.1} ms, |x-x*| {dx:.1e}, |lambda-lambda*| {dl:.1e}",
                sol.status,
                sol.iterations,
                secs * 1e3
            ),
        );
    }
    out
}

// 2 ----------------------------------------------------------------------

struct GridReport {
    points: usize,
    worst_product: f64,
    worst_sum: f64,
    worst_difference: f64,
    open_interval_violations: usize,
    upper_not_representable: usize,
    bound_violations: usize,
}

fn retraction_grid<T: Real>(vs: &[f64], mus: &[f64], sigmas: &[f64]) -> GridReport {
    let eps = T::epsilon().f64();
    let mut rep = GridReport {
        points: 0,
        worst_product: 0.0,
        worst_sum: 0.0,
        worst_difference: 0.0,
        open_interval_violations: 0,
        upper_not_representable: 0,
        bound_violations: 0,
    };
    for &mu in mus {
        let mu_t = T::of(mu);
        for &v in vs {
            rep.points += 1;
            let vt = T::of(v);
            let bp = softplus(vt, mu_t).unwrap();
            let bm = softplus(-vt, mu_t).unwrap();
            let dp = softplus_derivative(vt, mu_t).unwrap();
            let dm = softplus_derivative(-vt, mu_t).unwrap();
            rep.worst_product = rep.worst_product.max(rel((bp * bm).f64(), mu_t.f64()));
            rep.worst_sum = rep.worst_sum.max(((dp + dm).f64() - 1.0).abs());
            rep.worst_difference = rep.worst_difference.max(rel((bp - bm).f64(), vt.f64()));

            let (small, large) = if dp < dm { (dp, dm) } else { (dm, dp) };
            if !(small > T::zero() && large <= T::one()) {
                rep.open_interval_violations += 1;
            }
            // 1 − small rounds to 1 once small drops below half an ulp of 1.
            if large == T::one() {
                if small.f64() >= eps / 2.0 {
                    rep.open_interval_violations += 1;
                } else {
                    rep.upper_not_representable += 1;
                }
            }

            for &sigma in sigmas {
                let mu_plus = T::of(sigma * mu);
                let a = vt.abs().f64();
                let (dominant, dominant_plus, other_plus) = if v > 0.0 {
                    (bp, softplus(vt, mu_plus).unwrap(), softplus(-vt, mu_plus).unwrap())
                } else {
                    (bm, softplus(-vt, mu_plus).unwrap(), softplus(vt, mu_plus).unwrap())
                };
                let mu_f = mu_t.f64();
                let slack = 4.0 * eps;
                let first =
                    other_plus > T::zero() && other_plus.f64() <= sigma * mu_f / a * (1.0 + slack);
                let diff = (dominant - dominant_plus).f64();
                let second = diff >= 0.0
                    && diff <= (1.0 - sigma) * mu_f / a + slack * dominant.f64();
                if !(first && second) {
                    rep.bound_violations += 1;
                }
            }
        }
    }
    rep
}

fn retraction_suite() -> Outcome {
    let mut out = Outcome::new();
    let start = Instant::now();
    let mut vs: Vec<f64> = logspace(-2.0, 6.0, 50);
    vs.extend(logspace(-2.0, 6.0, 50).iter().map(|v| -v));
    let mus = logspace(-10.0, 0.0, 100);
    let sigmas = [0.1, 0.5, 0.9];

    for (label, tol, rep) in [
        ("binary64", 1e-10, retraction_grid::<f64>(&vs, &mus, &sigmas)),
        ("binary32", 1e-4, retraction_grid::<f32>(&vs, &mus, &sigmas)),
    ] {
        out.check(
            rep.points == 10_000
                && rep.worst_product <= tol
                && rep.worst_sum <= tol
                && rep.worst_difference <= tol,
            format!(
                "{label}: {} points, worst rel error product {:.1e}, derivative sum {:.1e}, difference {:.1e} (tol {tol:.0e})",
                rep.points, rep.worst_product, rep.worst_sum, rep.worst_difference
            ),
        );
        out.check(
            rep.open_interval_violations == 0,
            format!(
                "{label}: derivatives in (0, 1); upper bound exact in {} points where 1 - db(-v) rounds to 1",
                rep.upper_not_representable
            ),
        );
        out.check(
            rep.bound_violations == 0,
            format!(
                "{label}: barrier-reduction bounds for sigma in {sigmas:?}, {} violations",
                rep.bound_violations
            ),
        );
    }

    let mut checked = 0;
    let mut worst = 0.0f64;
    for &mu in &mus {
        for &v in &vs {
            for &sigma in &sigmas {
                let (Ok(hi), Ok(lo)) = (exponential_map(v, mu), exponential_map(v, sigma * mu))
                else {
                    continue;
                };
                if hi == 0.0 || lo == 0.0 {
                    continue;
                }
                checked += 1;
                worst = worst.max(rel(lo / hi, sigma.sqrt()));
            }
        }
    }
    out.check(
        checked > 0 && worst <= 1e-14,
        format!("exponential map rescales by sqrt(sigma): {checked} finite points, worst rel error {worst:.1e}"),
    );
    let secs = start.elapsed().as_secs_f64();
    out.check(secs < 5.0, format!("runtime {secs:.2} s"));
    out
}

// 3 ----------------------------------------------------------------------

fn spectral_boundedness() -> Outcome {
    let mut out = Outcome::new();
    let problem = builtin_problem("synthetic2d").unwrap();
    let traced = |method| {
        let mut cfg = config(method, LinearStrategy::Direct);
        cfg.trace_level = TraceLevel::Spectrum;
        run(&problem, &cfg)
    };

    let (sol_i, trace_i) = traced(Method::Implicit);
    let eig: Vec<f64> = trace_i.records.iter().filter_map(|r| r.eig_max).collect();
    let lo = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = eig.iter().cloned().fold(0.0, f64::max);
    out.check(
        sol_i.converged() && sol_i.gap <= 1e-9 && !eig.is_empty() && hi / lo <= 10.0,
        format!(
            "implicit: gap {:.1e}, max|eig(J)| in [{lo:.3}, {hi:.3}] over {} iterations, ratio {:.2}",
            sol_i.gap,
            eig.len(),
            hi / lo
        ),
    );
    let deltas: Vec<f64> = trace_i
        .records
        .iter()
        .filter_map(|r| r.matrix_delta)
        .collect();
    let dmax = deltas.iter().cloned().fold(0.0, f64::max);
    let tail = &deltas[deltas.len().saturating_sub(5)..];
    let tail_max = tail.iter().cloned().fold(0.0, f64::max);
    out.check(
        deltas.len() >= 5 && tail_max <= 1e-2 * dmax,
        format!("implicit matrix delta: last five <= {tail_max:.1e}, maximum {dmax:.1e}"),
    );

    let (sol_e, trace_e) = traced(Method::Explicit);
    let conds: Vec<f64> = trace_e.records.iter().filter_map(|r| r.cond).collect();
    let last = conds.last().copied().unwrap_or(0.0);
    let first = conds.first().copied().unwrap_or(0.0);
    out.check(
        sol_e.converged() && sol_e.gap <= 1e-9 && last > 1e8,
        format!(
            "explicit: gap {:.1e}, cond(E) grows from {first:.1e} to {last:.1e}",
            sol_e.gap
        ),
    );
    out
}

// 4 ----------------------------------------------------------------------

const SMALL_MM: [&str; 8] = [
    "HS21", "HS35", "HS76", "HS118", "QPTEST", "ZECEVIC2", "LOTSCHD", "TAME",
];

fn inexact_newton() -> Outcome {
    let mut out = Outcome::new();
    let problem = builtin_problem("synthetic2d").unwrap();
    let (exact, _) = run(&problem, &config(Method::Implicit, LinearStrategy::Direct));
    let (half, _) = run(&problem, &config(Method::Implicit, LinearStrategy::Inexact));
    out.check(
        exact.converged() && half.converged() && half.factorizations <= 8,
        format!(
            "synthetic2d theta=0.5: {} with {} factorizations in {} iterations (exact Newton: {} in {})",
            half.status, half.factorizations, half.iterations, exact.status, exact.iterations
        ),
    );

    let thetas = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];
    let mut counts = Vec::new();
    let mut all_converged = true;
    for &theta in &thetas {
        let mut cfg = config(Method::Implicit, LinearStrategy::Inexact);
        cfg.theta = theta;
        let (sol, _) = run(&problem, &cfg);
        all_converged &= sol.converged();
        counts.push(sol.factorizations);
    }
    let inversions = counts.windows(2).filter(|w| w[1] > w[0]).count();
    out.check(
        all_converged && inversions <= 1,
        format!("theta sweep {thetas:?}: factorizations {counts:?}, {inversions} inversions"),
    );

    let mut reduced = 0;
    for name in SMALL_MM {
        let p = instance(name);
        let mut tiny = config(Method::Implicit, LinearStrategy::Inexact);
        tiny.theta = 1e-8;
        let (base, _) = run(&p, &tiny);
        let (sol, _) = run(&p, &config(Method::Implicit, LinearStrategy::Inexact));
        let cut = 1.0 - sol.factorizations as f64 / base.factorizations as f64;
        let ok = base.converged() && sol.converged() && cut >= 0.3;
        reduced += ok as usize;
        out.note(format!(
            "{name:9} n+m {:4}: theta=1e-8 {} factorizations ({}), theta=0.5 {} ({}), reduction {:.0}%",
            p.n + p.m + p.p,
            base.factorizations,
            base.status,
            sol.factorizations,
            sol.status,
            100.0 * cut
        ));
    }
    out.check(
        reduced >= 3,
        format!("{reduced} of {} small instances reduce factorizations by at least 30%", SMALL_MM.len()),
    );
    out
}

// 5 ----------------------------------------------------------------------

fn median(xs: &[usize]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_unstable();
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2] as f64
    } else {
        (v[n / 2 - 1] + v[n / 2]) as f64 / 2.0
    }
}

fn minres_mode() -> Outcome {
    let mut out = Outcome::new();
    let mut growth_somewhere = false;
    for name in ["synthetic2d", "HS21", "HS35", "HS76", "QAFIRO"] {
        let p = instance(name);
        let mut counts = Vec::new();
        let mut line = format!("{name:11}");
        let mut converged = true;
        for method in [Method::Explicit, Method::Implicit] {
            let cfg = config(method, LinearStrategy::Minres);
            let (sol, trace) = run(&p, &cfg);
            let k: Vec<usize> = trace.records.iter().filter_map(|r| r.krylov_iters).collect();
            converged &= sol.gap <= 1e-8 && sol.converged();
            line += &format!(
                " {method}: {} gap {:.1e} total {};",
                sol.status,
                sol.gap,
                k.iter().sum::<usize>()
            );
            counts.push(k);
        }
        let (ke, ki) = (&counts[0], &counts[1]);
        out.check(converged, format!("{line} both reach gap <= 1e-8"));

        let med = median(ki);
        let bounded = ki
            .iter()
            .all(|&k| k as f64 <= 3.0 * med && k as f64 >= med / 3.0);
        let (kmin, kmax) = (ki.iter().min().unwrap(), ki.iter().max().unwrap());
        out.check(
            bounded,
            format!("{name:11} implicit Krylov counts in [{kmin}, {kmax}], median {med}"),
        );

        let first = ke.first().copied().unwrap_or(0);
        let tail = &ke[ke.len().saturating_sub(3)..];
        let grows = !tail.is_empty() && tail.iter().all(|&k| k >= 3 * first);
        growth_somewhere |= grows;
        out.note(format!(
            "{name:11} explicit Krylov counts: first {first}, final three {tail:?}"
        ));

        let (te, ti) = (ke.iter().sum::<usize>(), ki.iter().sum::<usize>());
        out.check(ti < te, format!("{name:11} total Krylov implicit {ti} < explicit {te}"));
    }
    out.check(
        growth_somewhere,
        "explicit final-three counts exceed 3x the first on at least one instance",
    );
    out
}

// 6 ----------------------------------------------------------------------

fn min_kkt(trace: &SolveTrace) -> f64 {
    trace
        .records
        .iter()
        .map(|r| r.kkt)
        .fold(f64::INFINITY, f64::min)
}

fn precision_experiment() -> Outcome {
    let mut out = Outcome::new();
    for name in ["synthetic2d", "HS21", "HS35"] {
        let p = instance(name);
        for method in [Method::Explicit, Method::Implicit] {
            let mut cfg = config(method, LinearStrategy::Direct);
            cfg.precision = Precision::F32;
            cfg.tol = 1e-16;
            cfg.max_iters = 100;
            let (sol, trace) = run(&p, &cfg);
            let best = min_kkt(&trace);
            let (ok, want) = match method {
                Method::Implicit => (best <= 1e-10, "<= 1e-10"),
                Method::Explicit => (best >= 1e-6, ">= 1e-6"),
            };
            out.check(
                ok,
                format!(
                    "{name:11} binary32 {method}: smallest KKT residual {best:.1e} over {} iterations ({}), expected {want}",
                    sol.iterations, sol.status
                ),
            );

            let mut cfg = config(method, LinearStrategy::Direct);
            cfg.tol = 1e-13;
            let (_, trace) = run(&p, &cfg);
            let best = min_kkt(&trace);
            out.check(
                best <= 1e-12,
                format!("{name:11} binary64 {method}: smallest KKT residual {best:.1e}"),
            );
        }
    }
    out
}

// 7 ----------------------------------------------------------------------

/// Rows and columns of the Maros-Meszaros size table.
const PUBLISHED: [(&str, usize, usize); 17] = [
    ("CVXQP1_S", 50, 100),
    ("DUALC1", 215, 9),
    ("GENHS28", 8, 10),
    ("HS118", 17, 15),
    ("HS21", 1, 2),
    ("HS268", 5, 5),
    ("HS35", 1, 3),
    ("HS35MOD", 1, 3),
    ("HS51", 3, 5),
    ("HS52", 3, 5),
    ("HS53", 3, 5),
    ("HS76", 3, 4),
    ("LOTSCHD", 7, 12),
    ("QAFIRO", 27, 32),
    ("QPTEST", 2, 2),
    ("TAME", 1, 2),
    ("ZECEVIC2", 2, 2),
];

/// Membership in the raw file's feasible set, from the section data alone.
fn raw_member(f: &QpsFile, x: &[f64], tol: f64) -> bool {
    let mut act = vec![0.0; f.rows.len()];
    for (&(i, j), v) in &f.entries {
        act[i] += v * x[j];
    }
    for (i, (_, kind)) in f.rows.iter().enumerate() {
        let r = f.rhs[i];
        let a = act[i];
        let ok = match (kind, f.ranges[i]) {
            (RowKind::E, None) => (a - r).abs() <= tol,
            (RowKind::E, Some(h)) if h >= 0.0 => a >= r - tol && a <= r + h + tol,
            (RowKind::E, Some(h)) => a >= r + h - tol && a <= r + tol,
            (RowKind::L, h) => a <= r + tol && h.map_or(true, |h| a >= r - h.abs() - tol),
            (RowKind::G, h) => a >= r - tol && h.map_or(true, |h| a <= r + h.abs() + tol),
        };
        if !ok {
            return false;
        }
    }
    (0..f.n()).all(|j| x[j] >= f.lower[j] - tol && x[j] <= f.upper[j] + tol)
}

fn converted_member(p: &QpProblem, x: &[f64], tol: f64) -> bool {
    let ax = p.a.mul_vec(x);
    let cx = p.c.mul_vec(x);
    ax.iter().zip(&p.b).all(|(a, b)| *a >= b - tol)
        && cx.iter().zip(&p.d).all(|(c, d)| (c - d).abs() <= tol)
}

fn sample_points(f: &QpsFile, centre: &[f64], rng: &mut ChaCha8Rng, count: usize) -> Vec<Vec<f64>> {
    let n = f.n();
    let mut pts = Vec::with_capacity(count);
    for k in 0..count {
        let mut x = centre.to_vec();
        match k % 4 {
            0 => {
                for j in 0..n {
                    let lo = if f.lower[j].is_finite() { f.lower[j] } else { centre[j] - 10.0 };
                    let hi = if f.upper[j].is_finite() { f.upper[j] } else { centre[j] + 10.0 };
                    let pad = 0.1 * (hi - lo).abs().max(1.0);
                    x[j] = rng.gen_range(lo - pad..=hi + pad);
                }
            }
            1 => {
                for xj in x.iter_mut() {
                    *xj += rng.gen_range(-1e-3..1e-3) * xj.abs().max(1.0);
                }
            }
            2 => {
                for j in 0..n {
                    if rng.gen_bool(0.3) {
                        let b = if rng.gen_bool(0.5) { f.lower[j] } else { f.upper[j] };
                        if b.is_finite() {
                            x[j] = b;
                        }
                    }
                }
            }
            _ => {
                let j = rng.gen_range(0..n);
                x[j] += rng.gen_range(-1.0..1.0);
            }
        }
        pts.push(x);
    }
    pts
}

fn qps_ingestion() -> Outcome {
    let mut out = Outcome::new();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut parsed = 0;
    for (name, rows, cols) in PUBLISHED {
        let file = match read_qps(data_dir().join(format!("{name}.QPS"))) {
            Ok(f) => f,
            Err(e) => {
                out.check(false, format!("{name}: {e}"));
                continue;
            }
        };
        let p = to_qp_problem(&file).unwrap();
        parsed += 1;

        let mut expect_m = 0;
        let mut expect_p = 0;
        for (i, (_, kind)) in file.rows.iter().enumerate() {
            match (kind, file.ranges[i]) {
                (RowKind::E, None) | (RowKind::E, Some(0.0)) => expect_p += 1,
                (RowKind::E, Some(_)) => expect_m += 2,
                (_, None) => expect_m += 1,
                (_, Some(_)) => expect_m += 2,
            }
        }
        for j in 0..file.n() {
            let (lo, hi) = (file.lower[j], file.upper[j]);
            if lo == hi {
                expect_p += 1;
            } else {
                expect_m += lo.is_finite() as usize + hi.is_finite() as usize;
            }
        }
        let dims_ok = file.rows.len() == rows
            && file.n() == cols
            && p.n == cols
            && p.m == expect_m
            && p.p == expect_p;

        let (sol, _) = run(&p, &config(Method::Implicit, LinearStrategy::Direct));
        let points = sample_points(&file, &sol.x, &mut rng, 1000);
        let mut feasible = 0;
        let mut mismatches = 0;
        for x in &points {
            let raw = raw_member(&file, x, 1e-9);
            feasible += raw as usize;
            if raw != converted_member(&p, x, 1e-9) {
                mismatches += 1;
            }
        }
        out.check(
            dims_ok && mismatches == 0,
            format!(
                "{name:9} rows {} cols {} (published {rows} x {cols}), converted m {} p {}; {} of 1000 points feasible, {mismatches} mismatches",
                file.rows.len(),
                file.n(),
                p.m,
                p.p,
                feasible
            ),
        );
    }
    out.check(parsed >= 5, format!("{parsed} instances parsed"));
    out
}

// 8 ----------------------------------------------------------------------

fn quasi_definite(n1: usize, n2: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = n1 + n2;
    let mut m = vec![vec![0.0f64; n]; n];
    let density = (4.0 / n as f64).min(1.0);
    for i in 0..n {
        for j in 0..i {
            if rng.gen_bool(density) {
                let same_block = (i < n1) == (j < n1);
                let v = rng.gen_range(-1.0..1.0) * if same_block { 0.5 } else { 1.0 };
                m[i][j] = v;
                m[j][i] = v;
            }
        }
    }
    for i in 0..n {
        let row: f64 = (0..n)
            .filter(|&j| j != i && (i < n1) == (j < n1))
            .map(|j| m[i][j].abs())
            .sum();
        let d = row + rng.gen_range(0.5..2.0);
        m[i][i] = if i < n1 { d } else { -d };
    }
    m
}

fn linear_algebra() -> Outcome {
    let mut out = Outcome::new();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in [5usize, 50, 200] {
        let n1 = (n * 3).div_ceil(5);
        let dense = quasi_definite(n1, n - n1, &mut rng);
        let m = SparseSymmetric::<f64>::from_dense(&dense);
        let x_true: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let rhs = m.mul_vec(&x_true);

        let fact = ldlt_factor(&m, 0.0, None).unwrap();
        let x = fact.solve(&rhs).unwrap();
        let err = norm(&sub(&x, &x_true)) / norm(&x_true);
        out.check(
            err <= 1e-9 && fact.inertia.positive == n1 && fact.inertia.negative == n - n1,
            format!(
                "n={n:3}: LDL^T solve rel error {err:.1e}, inertia ({}, {}, {})",
                fact.inertia.positive, fact.inertia.negative, fact.inertia.zero
            ),
        );

        let blocks: [Range<usize>; 2] = [0..n1, n1..n];
        let pre = block_jacobi_precond(&m, &blocks).unwrap();
        let opts = MinresOptions {
            rtol: 1e-12,
            atol: 0.0,
            max_iters: 10 * n,
        };
        let (y, rep) = minres(
            |v: &[f64], w: &mut [f64]| m.mul_vec_into(v, w),
            &rhs,
            |v: &[f64], w: &mut [f64]| pre.apply(v, w),
            &opts,
        )
        .unwrap();
        let diff = norm(&sub(&y, &x)) / norm(&x);
        out.check(
            rep.converged && diff <= 1e-8,
            format!(
                "n={n:3}: MINRES vs direct rel difference {diff:.1e} after {} iterations",
                rep.iterations
            ),
        );

        let eig = dense_symmetric_eigenvalues(&dense).unwrap();
        let trace: f64 = (0..n).map(|i| dense[i][i]).sum();
        let eig_sum: f64 = eig.iter().sum();
        let trace_err = (eig_sum - trace).abs() / eig.iter().map(|e| e.abs()).sum::<f64>();
        let log_det_eig: f64 = eig.iter().map(|e| e.abs().ln()).sum();
        let neg_eig = eig.iter().filter(|e| **e < 0.0).count();
        let (log_det_ldl, neg_ldl) = log_abs_det(&fact);
        let det_err = (log_det_eig - log_det_ldl).abs() / log_det_ldl.abs().max(1.0);
        out.check(
            trace_err <= 1e-9 && det_err <= 1e-9 && neg_eig % 2 == neg_ldl % 2,
            format!(
                "n={n:3}: eigenvalue sum vs trace {trace_err:.1e}, log|det| vs LDL^T {det_err:.1e}, sign agrees"
            ),
        );
    }
    out
}

fn log_abs_det(f: &ipqp::linalg::Factorization<f64>) -> (f64, usize) {
    let entries = f.d_entries();
    let mut diag = std::collections::HashMap::new();
    let mut off = std::collections::HashMap::new();
    for (i, j, v) in entries {
        if i == j {
            diag.insert(i, v);
        } else {
            off.insert(j, (i, v));
        }
    }
    let mut log = 0.0;
    let mut negatives = 0;
    let mut done = std::collections::HashSet::new();
    for (&p, &(q, b)) in &off {
        let det = diag[&p] * diag[&q] - b * b;
        log += det.abs().ln();
        negatives += (det < 0.0) as usize;
        done.insert(p);
        done.insert(q);
    }
    for (&i, &d) in &diag {
        if !done.contains(&i) {
            log += d.abs().ln();
            negatives += (d < 0.0) as usize;
        }
    }
    (log, negatives)
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

// ------------------------------------------------------------------------

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("synthetic QP correctness", synthetic_correctness),
        ("retraction property suite", retraction_suite),
        ("spectral boundedness", spectral_boundedness),
        ("inexact Newton factorization reuse", inexact_newton),
        ("MINRES mode", minres_mode),
        ("precision experiment", precision_experiment),
        ("QPS ingestion", qps_ingestion),
        ("linear-algebra suite", linear_algebra),
    ];
    let verbose = std::env::var_os("IPQP_ACCEPTANCE_VERBOSE").is_some();
    let mut passed = 0;
    let mut report = Vec::new();
    for (k, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Outcome {
                pass: false,
                lines: vec![format!("    panicked: {msg}")],
            }
        });
        passed += outcome.pass as usize;
        println!(
            "{} {}. {name} ({:.1} s)",
            if outcome.pass { "PASS" } else { "FAIL" },
            k + 1,
            start.elapsed().as_secs_f64()
        );
        report.push(outcome);
    }
    println!("{passed}/{} criteria pass", criteria.len());
    for (k, outcome) in report.iter().enumerate() {
        if verbose || !outcome.pass {
            println!("criterion {}:", k + 1);
            for line in &outcome.lines {
                println!("{line}");
            }
        }
    }
    let strict = std::env::var("IPQP_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if strict && passed < criteria.len() {
        std::process::exit(1);
    }
}
