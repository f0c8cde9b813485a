//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Criteria 4 to 12 and 14 are judged from two `ke verify all --seed 42`
//! runs at different `--jobs` values.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use kernel_extrema::function::{AnalyticFunction, PointwiseFunction};
use kernel_extrema::functional::FunctionalSpec;
use kernel_extrema::geometry::SpaceParams;
use kernel_extrema::levels::{level_profile, mu, LevelConfig};
use kernel_extrema::norms::{norm, QuadratureConfig};
use kernel_extrema::search::{multistart_search, perturbation_test, SearchProblem};
use num_complex::Complex64;

type Outcome = Result<String, String>;

struct ReportRow {
    suite: String,
    check: String,
    margin: f64,
    pass: bool,
}

struct VerifyRun {
    rows: Vec<ReportRow>,
    seconds: BTreeMap<String, f64>,
    report: Vec<u8>,
    run_json: Vec<u8>,
    elapsed: Duration,
}

fn run_verify(dir: &Path, jobs: usize) -> Result<VerifyRun, String> {
    let start = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_ke"))
        .args(["--jobs", &jobs.to_string(), "verify", "all", "--seed", "42", "--out-dir"])
        .arg(dir)
        .status()
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    if status.code() != Some(0) && status.code() != Some(2) {
        return Err(format!("ke verify exited with {status}"));
    }
    let report = std::fs::read(dir.join("report.csv")).map_err(|e| e.to_string())?;
    let run_json = std::fs::read(dir.join("run.json")).map_err(|e| e.to_string())?;
    let mut rows = Vec::new();
    for rec in csv::Reader::from_reader(report.as_slice()).records() {
        let rec = rec.map_err(|e| e.to_string())?;
        rows.push(ReportRow {
            suite: rec[0].to_string(),
            check: rec[1].to_string(),
            margin: rec[3].parse().map_err(|e| format!("{e}"))?,
            pass: &rec[5] == "true",
        });
    }
    let timings: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.join("timings.json")).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
    let seconds = timings
        .as_array()
        .ok_or("timings.json is not an array")?
        .iter()
        .map(|t| (t["suite"].as_str().unwrap_or("").to_string(), t["seconds"].as_f64().unwrap_or(f64::NAN)))
        .collect();
    Ok(VerifyRun {
        rows,
        seconds,
        report,
        run_json,
        elapsed,
    })
}

/// All rows of `check` pass and there are at least `min_rows` of them.
fn judge(run: &VerifyRun, checks: &[(&str, usize)], suites: &[(&str, f64)]) -> Outcome {
    let mut notes = Vec::new();
    for &(check, min_rows) in checks {
        let rows: Vec<_> = run.rows.iter().filter(|r| r.check == check).collect();
        let failed = rows.iter().filter(|r| !r.pass).count();
        let worst = rows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
        if rows.len() < min_rows {
            return Err(format!("{check}: {} rows, expected at least {min_rows}", rows.len()));
        }
        if failed > 0 {
            return Err(format!("{check}: {failed} of {} rows failed (worst margin {worst:e})", rows.len()));
        }
        notes.push(format!("{check} {}", rows.len()));
    }
    for &(suite, limit) in suites {
        let secs = *run.seconds.get(suite).ok_or(format!("no timing for {suite}"))?;
        if !(secs < limit) {
            return Err(format!("{suite} took {secs:.1} s, limit {limit} s"));
        }
        if !run.rows.iter().any(|r| r.suite == suite) {
            return Err(format!("{suite} produced no rows"));
        }
        notes.push(format!("{suite} {secs:.1} s"));
    }
    Ok(notes.join(", "))
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    let elapsed = start.elapsed();
    if elapsed < limit {
        Ok(())
    } else {
        Err(format!("took {:.1} s, limit {:.0} s", elapsed.as_secs_f64(), limit.as_secs_f64()))
    }
}

fn constant_norms() -> Outcome {
    let start = Instant::now();
    let one = AnalyticFunction::constant(1.0);
    let quad = QuadratureConfig::default();
    let mut worst = 0.0f64;
    for p in [0.5, 1.0, 2.0, 4.0] {
        for alpha in [1.0, 1.5, 2.0, 3.0] {
            let sp = SpaceParams::new(p, alpha).map_err(|e| e.to_string())?;
            let n = norm(&one, sp, &quad).map_err(|e| e.to_string())?;
            worst = worst.max((n - 1.0).abs());
        }
    }
    if worst > 1e-8 {
        return Err(format!("worst |‖1‖ - 1| = {worst:e}"));
    }
    within(Duration::from_secs(5), start)?;
    Ok(format!("worst deviation {worst:e}"))
}

fn constant_mu() -> Outcome {
    let start = Instant::now();
    let cfg = LevelConfig::default();
    let mut worst = 0.0f64;
    for b in [1.0, 2.0, 2.5] {
        let pf = PointwiseFunction::new(AnalyticFunction::constant(1.0), 1.0, b).map_err(|e| e.to_string())?;
        let profile = level_profile(&pf, 12, &cfg).map_err(|e| e.to_string())?;
        for ((&t, &m), &err) in profile.ts.iter().zip(&profile.mus).zip(&profile.err) {
            let exact = t.powf(-1.0 / b) - 1.0;
            let dev = (m - exact).abs();
            if dev > err.max(1e-4) {
                return Err(format!("b = {b}, t = {t}: μ = {m}, exact {exact}, err {err:e}"));
            }
            worst = worst.max(dev);
        }
    }
    within(Duration::from_secs(30), start)?;
    Ok(format!("worst deviation {worst:e}"))
}

fn annulus() -> Outcome {
    let start = Instant::now();
    let t = 3.0 / 16.0;
    // u = s(1 - s) with s = |z|²; the superlevel set is s1 < s < s2.
    let disc = (1.0f64 - 4.0 * t).sqrt();
    let (s1, s2) = ((1.0 - disc) / 2.0, (1.0 + disc) / 2.0);
    let exact_mu = s2 / (1.0 - s2) - s1 / (1.0 - s1);
    let exact_g = t * (exact_mu + 1.0);
    if (exact_mu - 8.0 / 3.0).abs() > 1e-12 || (exact_g - 11.0 / 16.0).abs() > 1e-12 {
        return Err("closed form disagrees with 8/3 and 11/16".into());
    }
    let pf = PointwiseFunction::new(AnalyticFunction::identity(), 2.0, 1.0).map_err(|e| e.to_string())?;
    let est = mu(&pf, t, &LevelConfig::default()).map_err(|e| e.to_string())?;
    let tol = est.err.max(1e-3);
    let g = t * (est.value + 1.0);
    if (est.value - exact_mu).abs() > tol || (g - exact_g).abs() > tol {
        return Err(format!("μ = {}, g = {g}, tolerance {tol:e}", est.value));
    }
    within(Duration::from_secs(10), start)?;
    Ok(format!("μ = {}, g = {g}", est.value))
}

fn search_campaigns() -> Outcome {
    let start = Instant::now();
    let mut notes = Vec::new();
    for (p, alpha) in [(2.0, 1.0), (2.0, 2.0), (1.0, 2.0)] {
        let problem = SearchProblem {
            sp: SpaceParams::new(p, alpha).map_err(|e| e.to_string())?,
            functional: FunctionalSpec::Power { s: 2.0 },
            degree: 8,
            quadrature: QuadratureConfig::default(),
            budget: 3000,
            restarts: 20,
            seed: 42,
            tolerance: 1e-5,
        };
        let report = multistart_search(&problem).map_err(|e| e.to_string())?;
        if report.trace.len() < 20 {
            return Err(format!("({p}, {alpha}): only {} restarts", report.trace.len()));
        }
        if report.gap > 1e-5 {
            return Err(format!("({p}, {alpha}): gap {:e}", report.gap));
        }
        let one = [Complex64::new(1.0, 0.0)];
        let gain = perturbation_test(&one, &problem, 64, &[0.05, 0.02, 0.01, 0.005, 0.001], 7)
            .map_err(|e| e.to_string())?;
        if gain > 1e-6 {
            return Err(format!("({p}, {alpha}): perturbation gain {gain:e}"));
        }
        notes.push(format!("({p},{alpha}) gap {:.1e} gain {gain:.1e}", report.gap));
    }
    within(Duration::from_secs(600), start)?;
    Ok(notes.join(", "))
}

fn main() -> ExitCode {
    let mut results: Vec<(usize, &str, Outcome, f64)> = Vec::new();
    let timed = |id: usize, name: &'static str, f: &dyn Fn() -> Outcome| {
        let start = Instant::now();
        let outcome = f();
        (id, name, outcome, start.elapsed().as_secs_f64())
    };
    results.push(timed(1, "constant-function norms", &constant_norms));
    results.push(timed(2, "μ of the constant", &constant_mu));
    results.push(timed(3, "annulus μ and g", &annulus));

    let dirs = (tempfile::tempdir(), tempfile::tempdir());
    let runs = match dirs {
        (Ok(a), Ok(b)) => (run_verify(a.path(), 1), run_verify(b.path(), 2)),
        _ => (Err("no temporary directory".into()), Err("no temporary directory".into())),
    };
    let verify_secs = runs.0.as_ref().map(|r| r.elapsed.as_secs_f64()).unwrap_or(0.0);
    let from_run = |checks: &[(&str, usize)], suites: &[(&str, f64)]| match &runs.0 {
        Ok(run) => judge(run, checks, suites),
        Err(e) => Err(e.clone()),
    };
    let suite_secs = |suite: &str| runs.0.as_ref().ok().and_then(|r| r.seconds.get(suite).copied()).unwrap_or(0.0);

    let verify_criteria: [(usize, &str, &[(&str, usize)], &[(&str, f64)]); 9] = [
        (4, "monotone g", &[("g_nonincreasing", 2200), ("mu_slope", 1)], &[("monotone", 300.0)]),
        (5, "weak type", &[("weak_type", 2400), ("kernel_weak_type_equality", 16)], &[("weaktype", 300.0)]),
        (
            6,
            "contraction chain",
            &[
                ("norm_nonincreasing", 250),
                ("identity_norm_anchor", 3),
                ("mobius_norm_invariance", 1),
                ("pointwise_bound", 1),
                ("hardy_limit_approach", 1),
            ],
            &[("contraction", 120.0)],
        ),
        (7, "functional extremality", &[("constant_closed_form", 3), ("constant_is_extremal", 150)], &[("functional", 300.0)]),
        (8, "norm from levels", &[("hardy_norm_from_levels", 200), ("bergman_norm_from_levels", 200)], &[("weaktype", 180.0)]),
        (9, "isoperimetric residual", &[("isoperimetric", 1), ("isoperimetric_equality", 1)], &[("isoperimetric", 120.0)]),
        (
            10,
            "rearrangement lemma",
            &[
                ("weaker_condition", 10),
                ("lemma_optimality", 10),
                ("c_prime_difference", 1),
                ("c_prime_second_order", 1),
                ("envelope_nondecreasing", 10),
                ("envelope_strictly_increasing", 1),
                ("envelope_constant_s", 1),
                ("profile_reduction", 1),
            ],
            &[("lemma", 30.0)],
        ),
        (
            11,
            "coefficient inequality",
            &[
                ("coeff_inequality", 150),
                ("kernel_coeff_equality", 1),
                ("one_plus_z_h1_norm", 1),
                ("generating_identity", 1),
            ],
            &[("coeff", 120.0)],
        ),
        (
            12,
            "Dirichlet inequality",
            &[
                ("dirichlet_inequality", 40),
                ("line_average_agreement", 5),
                ("divisor_function", 200),
                ("multiplicative", 1),
            ],
            &[("dirichlet", 300.0)],
        ),
    ];
    for (id, name, checks, suites) in verify_criteria {
        let secs = suites.iter().map(|(s, _)| suite_secs(s)).sum();
        results.push((id, name, from_run(checks, suites), secs));
    }

    results.push(timed(13, "extremal search", &search_campaigns));

    let determinism = match &runs {
        (Ok(a), Ok(b)) if a.report != b.report => Err("report.csv differs between --jobs 1 and 2".into()),
        (Ok(a), Ok(b)) if a.run_json != b.run_json => Err("run.json differs between --jobs 1 and 2".into()),
        (Ok(a), Ok(_)) => Ok(format!("{} report rows identical", a.rows.len())),
        (Err(e), _) | (_, Err(e)) => Err(e.clone()),
    };
    let both_secs = verify_secs + runs.1.as_ref().map(|r| r.elapsed.as_secs_f64()).unwrap_or(0.0);
    results.push((14, "determinism", determinism, both_secs));

    results.sort_by_key(|r| r.0);
    let mut failed = 0;
    for (id, name, outcome, secs) in &results {
        match outcome {
            Ok(note) => println!("AC{id:<2} PASS  {name} ({secs:.1} s): {note}"),
            Err(why) => {
                failed += 1;
                println!("AC{id:<2} FAIL  {name} ({secs:.1} s): {why}");
            }
        }
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
