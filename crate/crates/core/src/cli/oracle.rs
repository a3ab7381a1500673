//! Validation suites comparing the closed forms with independent numerics.

use std::fmt::Write as _;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::acquisition::p_nondominated;
use crate::ehvi::{
    evi_exact, evi_truncated, gaussian_integral_i1, gaussian_integral_i2, gaussian_integral_i3,
};
use crate::evaluation::{
    oracle_mc_evi, oracle_mc_hypervolume, oracle_mc_pnd, quadrature_i1, quadrature_i2, quadrature_i3,
};
use crate::pareto::{dominates, hypervolume_grid, hypervolume_improvement, hypervolume_sweep_2d, pareto_subset};
use crate::surrogate::NormalPrediction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Integrals,
    Evi,
    Pnd,
    Hv,
    Truncation,
}

impl Suite {
    pub fn default_instances(self) -> usize {
        match self {
            Suite::Integrals => 1000,
            Suite::Hv => 200,
            _ => 50,
        }
    }
}

/// Outcome of one suite; `lines` holds one entry per instance plus notes.
#[derive(Debug, Clone, Default)]
pub struct SuiteReport {
    pub lines: Vec<String>,
    pub instances: usize,
    pub failures: usize,
    /// Largest deviation seen on an asserted comparison.
    pub max_deviation: f64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.instances > 0
    }

    fn record(&mut self, ok: bool, deviation: f64, line: String) {
        self.failures += usize::from(!ok);
        if deviation.is_finite() {
            self.max_deviation = self.max_deviation.max(deviation);
        } else {
            self.max_deviation = f64::INFINITY;
        }
        self.lines.push(format!("{} {line}", if ok { "pass" } else { "FAIL" }));
    }
}

pub fn run_suite(suite: Suite, instances: usize, draws: usize, seed: u64) -> SuiteReport {
    assert!(instances >= 1, "at least one instance is required");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SuiteReport {
        instances,
        ..SuiteReport::default()
    };
    match suite {
        Suite::Integrals => integrals(&mut report, instances, &mut rng),
        Suite::Evi => evi(&mut report, instances, draws, &mut rng),
        Suite::Pnd => pnd(&mut report, instances, draws, &mut rng),
        Suite::Hv => hv(&mut report, instances, draws, &mut rng),
        Suite::Truncation => truncation(&mut report, instances, &mut rng),
    }
    report
}

/// `k` mutually non-dominated points in the unit cube.
fn random_front(rng: &mut ChaCha8Rng, k: usize, n: usize) -> Vec<Vec<f64>> {
    let mut front: Vec<Vec<f64>> = Vec::with_capacity(k);
    while front.len() < k {
        let p: Vec<f64> = (0..n).map(|_| rng.gen()).collect();
        if front.iter().all(|q| !dominates(q, &p) && !dominates(&p, q)) {
            front.push(p);
        }
    }
    front
}

const ABS_TOL: f64 = 1e-10;

fn integrals(report: &mut SuiteReport, instances: usize, rng: &mut ChaCha8Rng) {
    // the zero-width limit of the quadrature oracle
    const DIRAC: f64 = 1e-300;
    for i in 0..instances {
        let mut a = rng.gen_range(-5.0..5.0);
        let mut b = rng.gen_range(-5.0..5.0);
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        let c = rng.gen_range(-5.0..5.0);
        let sigma = match i % 10 {
            0 => 0.0,
            1 => 1e-12,
            _ => 10f64.powf(rng.gen_range(-3.0..0.7)),
        };
        // every 20th instance puts μ on a bound, where the step takes 1/2
        let mu = match i % 20 {
            0 => a,
            10 => b,
            _ => rng.gen_range(-6.0..6.0),
        };
        let s_q = if sigma == 0.0 { DIRAC } else { sigma };
        let d1 = (gaussian_integral_i1(a, b, c, mu, sigma) - quadrature_i1(a, b, c, mu, s_q)).abs();
        let d2 = (gaussian_integral_i2(b, c, mu, sigma) - quadrature_i2(b, c, mu, s_q)).abs();
        let d3 = (gaussian_integral_i3(a, b, mu, sigma) - quadrature_i3(a, b, mu, s_q)).abs();
        let dev = d1.max(d2).max(d3);
        report.record(
            dev <= ABS_TOL,
            dev,
            format!("integrals #{i}: a={a:.4} b={b:.4} c={c:.4} mu={mu:.4} sigma={sigma:e} |dI1|={d1:.2e} |dI2|={d2:.2e} |dI3|={d3:.2e}"),
        );
    }
}

fn evi(report: &mut SuiteReport, instances: usize, draws: usize, rng: &mut ChaCha8Rng) {
    let reference = [1.2, 1.2];
    for i in 0..instances {
        let front = random_front(rng, i % 6, 2);
        let mu = vec![rng.gen_range(-0.2..1.3), rng.gen_range(-0.2..1.3)];
        let sigma = vec![rng.gen_range(0.02..0.6), rng.gen_range(0.02..0.6)];
        let pred = NormalPrediction::new(mu.clone(), sigma);
        let exact = evi_exact(&front, &reference, &pred);
        let mc = oracle_mc_evi(&front, &reference, &pred, draws, rng);
        let z = (exact - mc.estimate).abs() / mc.std_error.max(1e-300);
        report.record(
            mc.agrees_with(exact, 3.0),
            (exact - mc.estimate).abs(),
            format!(
                "evi #{i}: |P|={} closed={exact:.6e} mc={:.6e} se={:.2e} z={z:.2}",
                front.len(),
                mc.estimate,
                mc.std_error
            ),
        );
        let hvi = hypervolume_improvement(&front, &reference, &mu);
        let d0 = (evi_exact(&front, &reference, &NormalPrediction::point(mu.clone())) - hvi).abs();
        let d12 = (evi_exact(&front, &reference, &NormalPrediction::new(mu, vec![1e-12; 2])) - hvi).abs();
        let d = d0.max(d12);
        report.record(d <= 1e-8, d, format!("evi #{i}: sigma->0 |EVI - HVI|={d:.2e}"));
    }
}

fn pnd(report: &mut SuiteReport, instances: usize, draws: usize, rng: &mut ChaCha8Rng) {
    for i in 0..instances {
        let n = 1 + i % 3;
        let front = random_front(rng, 1, n);
        let mu: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.5..1.5)).collect();
        let mut sigma: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
        match i % 5 {
            0 => sigma.iter_mut().for_each(|s| *s = 0.0),
            1 => sigma[0] = 0.0,
            _ => {}
        }
        let pred = NormalPrediction::new(mu, sigma);
        let closed = p_nondominated(&front, &pred);
        let mc = oracle_mc_pnd(&front, &pred, draws, rng);
        report.record(
            mc.agrees_with(closed, 3.0),
            (closed - mc.estimate).abs(),
            format!("pnd #{i}: n={n} |P|=1 closed={closed:.6} mc={:.6} se={:.2e}", mc.estimate, mc.std_error),
        );
    }
    // the product form assumes independent events once |P| > 1; reported only
    for j in 0..10 {
        let n = 2 + j % 2;
        let k = 2 + j % 2;
        let front = random_front(rng, k, n);
        let mu: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
        let sigma: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..0.5)).collect();
        let pred = NormalPrediction::new(mu, sigma);
        let closed = p_nondominated(&front, &pred);
        let mc = oracle_mc_pnd(&front, &pred, draws, rng);
        report.lines.push(format!(
            "note pnd |P|={k} n={n}: closed={closed:.6} mc={:.6} deviation={:+.4} ({:.1} se)",
            mc.estimate,
            closed - mc.estimate,
            (closed - mc.estimate).abs() / mc.std_error.max(1e-300)
        ));
    }
}

fn hv(report: &mut SuiteReport, instances: usize, draws: usize, rng: &mut ChaCha8Rng) {
    let reference = [1.0, 1.0];
    for i in 0..instances {
        let m = rng.gen_range(1..=20);
        let cloud: Vec<Vec<f64>> = (0..m).map(|_| vec![rng.gen(), rng.gen()]).collect();
        let sweep = hypervolume_sweep_2d(&cloud, &reference);
        let grid = hypervolume_grid(&pareto_subset(&cloud), &reference);
        let mc = oracle_mc_hypervolume(&cloud, &reference, draws, rng);
        let dg = (sweep - grid).abs();
        let mut line = String::new();
        let _ = write!(
            line,
            "hv #{i}: points={m} sweep={sweep:.8} grid={grid:.8} mc={:.6} se={:.2e}",
            mc.estimate, mc.std_error
        );
        report.record(dg <= 1e-9 && mc.agrees_with(sweep, 3.0), dg, line);
    }
}

fn truncation(report: &mut SuiteReport, instances: usize, rng: &mut ChaCha8Rng) {
    let reference = [1.0, 1.0];
    let levels = [0.5, 1.0, 2.0, 3.0, 6.0, 50.0];
    for i in 0..instances {
        let front = random_front(rng, 1 + i % 5, 2);
        let pred = NormalPrediction::new(
            vec![rng.gen(), rng.gen()],
            vec![rng.gen_range(0.01..0.5), rng.gen_range(0.01..0.5)],
        );
        let exact = evi_exact(&front, &reference, &pred);
        let values: Vec<f64> = levels.iter().map(|&s| evi_truncated(&front, &reference, &pred, s)).collect();
        let monotone = values.windows(2).all(|w| w[1] >= w[0]);
        let rel = |v: f64| (v - exact).abs() / exact.max(1e-300);
        let (r3, r50) = (rel(values[3]), rel(values[5]));
        report.record(
            monotone && r50 <= 1e-9 && r3 <= 1e-2,
            r3,
            format!("truncation #{i}: exact={exact:.6e} rel(3)={r3:.2e} rel(50)={r50:.2e} monotone={monotone}"),
        );
    }
}
