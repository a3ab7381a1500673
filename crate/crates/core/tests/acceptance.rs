//! Acceptance criteria AC-1 to AC-10, one line each.
//!
//! Every criterion is evaluated and printed before the test asserts, so a
//! single failure does not hide the others. Run with `--nocapture` to see the
//! table.

use std::time::{Duration, Instant};

use parbo::cli::{cmd_run, run_suite, Algorithm, Experiment, ExperimentConfig, StopConfig, Suite};
use parbo::evaluation::{break_even_from_parts, effective_runtime};
use parbo::Error;

const SEEDS: std::ops::Range<u64> = 0..10;

struct Verdict {
    id: &'static str,
    pass: bool,
    detail: String,
    elapsed: Duration,
}

fn experiment(problem: &str) -> Experiment {
    let mut exp = ExperimentConfig {
        problem: Some(problem.into()),
        stop: StopConfig {
            max_evals: Some(1),
            target_dv: None,
        },
        ..Default::default()
    }
    .resolve()
    .expect("registered problem");
    exp.cache_dir = Some(env!("CARGO_TARGET_TMPDIR").into());
    exp
}

/// Evaluations at which each seed first reaches `threshold`, `None` if never.
fn evals_to(exp: &Experiment, algorithm: Algorithm, threshold: f64, max_evals: usize) -> Vec<Option<usize>> {
    SEEDS
        .map(|seed| {
            let mut e = exp.clone();
            e.algorithm = algorithm;
            e.seed = seed;
            e.target_dv = Some(threshold);
            e.max_evals = Some(max_evals);
            let bundle = cmd_run(&e).expect("run completes");
            bundle.record.first_reaching(threshold).map(|r| r.evals)
        })
        .collect()
}

/// Median with unreached seeds ranked last as infinite.
fn median(v: &[Option<usize>]) -> f64 {
    let mut x: Vec<f64> = v.iter().map(|e| e.map_or(f64::INFINITY, |e| e as f64)).collect();
    x.sort_by(f64::total_cmp);
    let m = x.len() / 2;
    if x.len() % 2 == 1 {
        x[m]
    } else {
        (x[m - 1] + x[m]) / 2.0
    }
}

fn show(v: &[Option<usize>]) -> String {
    let parts: Vec<String> = v.iter().map(|e| e.map_or("-".into(), |e| e.to_string())).collect();
    parts.join(",")
}

fn timed(id: &'static str, f: impl FnOnce() -> (bool, String)) -> Verdict {
    let start = Instant::now();
    let (pass, detail) = f();
    Verdict {
        id,
        pass,
        detail,
        elapsed: start.elapsed(),
    }
}

fn within(limit_s: u64, v: Verdict) -> Verdict {
    let limit = Duration::from_secs(limit_s);
    if v.elapsed <= limit {
        return v;
    }
    Verdict {
        pass: false,
        detail: format!("{}; runtime limit {limit_s} s exceeded", v.detail),
        ..v
    }
}

fn suite(suite: Suite, instances: usize, draws: usize) -> (bool, String) {
    let r = run_suite(suite, instances, draws, 0);
    for line in r.lines.iter().filter(|l| l.starts_with("FAIL")) {
        println!("    {line}");
    }
    (
        r.passed(),
        format!(
            "{}/{} instances, max deviation {:.2e}",
            r.instances - r.failures,
            r.instances,
            r.max_deviation
        ),
    )
}

fn ac8(problem: &str, adaptive_budget: usize) -> (bool, String) {
    let exp = experiment(problem);
    let a = evals_to(&exp, Algorithm::Adaptive, 0.90, adaptive_budget);
    let n = evals_to(&exp, Algorithm::Nsgaii, 0.90, 2500);
    let (ma, mn) = (median(&a), median(&n));
    (
        ma < mn,
        format!("{problem} median adaptive-1 {ma} [{}] vs nsgaii {mn} [{}]", show(&a), show(&n)),
    )
}

fn arithmetic() -> (bool, String) {
    let mut ok = effective_runtime(5, 5, 10, 60.0, 12.0) == 612.0
        && effective_runtime(5, 1, 10, 60.0, 12.0) == 3012.0
        && effective_runtime(5, 5, 10, 0.0, 12.0) == 12.0;
    ok &= matches!(break_even_from_parts(0.8, (40, 4), (1, 50), (10.0, 2.0)), Ok(r) if r.tau == 0.05);
    ok &= matches!(
        break_even_from_parts(0.8, (10, 10), (1, 1), (1.0, 0.0)),
        Err(Error::NotApplicable(_))
    );
    (ok, "612, 3012, T_pure, tau 0.05, equal nu not applicable".into())
}

#[test]
fn acceptance() {
    let mut verdicts = Vec::new();
    let mut record = |v: Verdict| {
        println!(
            "{} {:<5} {} ({:.1} s)",
            if v.pass { "PASS" } else { "FAIL" },
            v.id,
            v.detail,
            v.elapsed.as_secs_f64()
        );
        verdicts.push((v.id, v.pass));
    };

    record(within(10, timed("AC-1", || suite(Suite::Integrals, 1000, 0))));
    record(within(120, timed("AC-2", || suite(Suite::Evi, 50, 100_000))));
    record(timed("AC-3", || suite(Suite::Truncation, 50, 0)));
    record(timed("AC-4", || suite(Suite::Pnd, 50, 100_000)));
    record(timed("AC-5", || suite(Suite::Hv, 200, 100_000)));

    record(within(
        600,
        timed("AC-6", || {
            let e = evals_to(&experiment("BNH"), Algorithm::Adaptive, 0.80, 30);
            let hits = e.iter().filter(|e| e.is_some_and(|e| e <= 40)).count();
            (hits >= 8, format!("BNH {hits}/10 seeds reach dv 0.80 within 40 evaluations [{}]", show(&e)))
        }),
    ));
    record(within(
        1200,
        timed("AC-7", || {
            let e = evals_to(&experiment("CIR"), Algorithm::Adaptive, 0.80, 140);
            let hits = e.iter().filter(|e| e.is_some_and(|e| e <= 150)).count();
            (hits >= 8, format!("CIR {hits}/10 seeds reach dv 0.80 within 150 evaluations [{}]", show(&e)))
        }),
    ));
    record(timed("AC-8", || {
        let (bnh, bnh_s) = ac8("BNH", 150);
        let (srn, srn_s) = ac8("SRN", 200);
        let mut osy = experiment("OSY");
        osy.max_evals = Some(50);
        let smoke = cmd_run(&osy);
        let osy_ok = smoke.as_ref().is_ok_and(|b| b.dataset.len() == osy.n_initial + 50);
        let osy_s = match smoke {
            Ok(b) => format!("OSY smoke {} evaluations", b.dataset.len()),
            Err(e) => format!("OSY smoke failed: {e}"),
        };
        (bnh && srn && osy_ok, format!("{bnh_s}; {srn_s}; {osy_s}"))
    }));
    record(timed("AC-9", || {
        let mut exp = experiment("BNH");
        let one = evals_to(&exp, Algorithm::Adaptive, 0.80, 100);
        exp.n_seq = 5;
        let five = evals_to(&exp, Algorithm::Adaptive, 0.80, 100);
        let (m1, m5) = (median(&one), median(&five));
        (
            m5 <= 2.0 * m1,
            format!("BNH median adaptive-5 {m5} [{}] vs adaptive-1 {m1} [{}]", show(&five), show(&one)),
        )
    }));
    record(timed("AC-10", arithmetic));

    let failed: Vec<&str> = verdicts.iter().filter(|(_, p)| !p).map(|(id, _)| *id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
