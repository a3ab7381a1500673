//! Replicated comparison of the adaptive algorithm with NSGA-II.

use std::fmt;
use std::path::Path;

use serde::Serialize;

use super::config::{Algorithm, Experiment};
use super::run::{adaptive_label, run_algorithm, stopping, true_front, write_atomic};
use crate::error::{Error, Result};
use crate::evaluation::{break_even_time, RunRecord};

#[derive(Debug, Clone, PartialEq)]
pub struct BenchSettings {
    pub seeds: Vec<u64>,
    pub thresholds: Vec<f64>,
    /// Evaluation budget of each adaptive run beyond the initial sample.
    pub adaptive_max_evals: usize,
    /// Same for NSGA-II, counted in whole generations.
    pub nsgaii_max_evals: usize,
}

/// Mean and sample standard deviation over the replicates that reached a threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
    pub reached: usize,
    pub total: usize,
}

impl Stat {
    pub fn of(values: &[f64], total: usize) -> Self {
        let k = values.len();
        let mean = if k == 0 { f64::NAN } else { values.iter().sum::<f64>() / k as f64 };
        let std = if k < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1) as f64).sqrt()
        };
        Stat {
            mean,
            std,
            reached: k,
            total,
        }
    }
}

impl fmt::Display for Stat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.reached == 0 {
            return write!(f, "{:>24}", format!("- (0/{})", self.total));
        }
        let s = format!("{:.2} ± {:.2}", self.mean, self.std);
        if self.reached < self.total {
            write!(f, "{:>24}", format!("{s} ({}/{})", self.reached, self.total))
        } else {
            write!(f, "{s:>24}")
        }
    }
}

/// Evaluations needed to reach one threshold, both algorithms.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub threshold: f64,
    pub adaptive: Stat,
    pub nsgaii: Stat,
}

/// Deterministic part of a benchmark: evaluation counts per threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchSummary {
    pub problem: String,
    pub adaptive: String,
    pub population: usize,
    pub rows: Vec<BenchRow>,
}

impl fmt::Display for BenchSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{}: evaluations to reach dv, mean ± std ({} vs nsgaii, population {})",
            self.problem, self.adaptive, self.population
        )?;
        writeln!(f, "{:>6} {:>24} {:>24}", "dv", self.adaptive, "nsgaii")?;
        for r in &self.rows {
            writeln!(f, "{:>6.2} {} {}", r.threshold, r.adaptive, r.nsgaii)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct BenchReport {
    pub summary: BenchSummary,
    /// Break-even simulation time per threshold in seconds (timing dependent).
    pub break_even: Vec<(f64, Stat)>,
    /// `(seed, adaptive, nsgaii)` traces.
    pub records: Vec<(u64, RunRecord, RunRecord)>,
}

impl fmt::Display for BenchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.summary)?;
        writeln!(f, "break-even simulation time tau [s]")?;
        for (t, s) in &self.break_even {
            if s.reached == 0 {
                writeln!(f, "{t:>6.2} - (0/{})", s.total)?;
            } else {
                writeln!(f, "{t:>6.2} {:.3e} ± {:.3e} ({}/{})", s.mean, s.std, s.reached, s.total)?;
            }
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct BenchCsvRow {
    seed: u64,
    threshold: f64,
    evals: Option<usize>,
    iterations: Option<usize>,
    t_pure_s: Option<f64>,
}

fn evals_to(record: &RunRecord, threshold: f64) -> Option<usize> {
    record.first_reaching(threshold).map(|r| r.evals)
}

/// Runs both algorithms on every seed from identical initial data.
pub fn cmd_bench(exp: &Experiment, settings: &BenchSettings) -> Result<BenchReport> {
    if settings.seeds.is_empty() {
        return Err(Error::InvalidConfig("at least one replicate is required".into()));
    }
    if settings.thresholds.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return Err(Error::InvalidConfig("thresholds must lie in [0, 1]".into()));
    }
    let reference = true_front(exp)?;
    let top = settings.thresholds.iter().copied().fold(0.0, f64::max);
    let mut exp = exp.clone();
    exp.target_dv = Some(exp.target_dv.map_or(top, |t| t.max(top)));
    let stop_a = stopping(&exp, Some(settings.adaptive_max_evals), reference.volume);
    let stop_n = stopping(&exp, Some(settings.nsgaii_max_evals), reference.volume);
    let mut records = Vec::new();
    for &seed in &settings.seeds {
        let (_, a) = run_algorithm(&exp, Algorithm::Adaptive, &stop_a, seed, reference.volume)?;
        let (_, n) = run_algorithm(&exp, Algorithm::Nsgaii, &stop_n, seed, reference.volume)?;
        records.push((seed, a, n));
    }
    let total = records.len();
    let stat_for = |pick: &dyn Fn(&(u64, RunRecord, RunRecord)) -> &RunRecord, t: f64| {
        let v: Vec<f64> = records
            .iter()
            .filter_map(|r| evals_to(pick(r), t))
            .map(|e| e as f64)
            .collect();
        Stat::of(&v, total)
    };
    let rows = settings
        .thresholds
        .iter()
        .map(|&t| BenchRow {
            threshold: t,
            adaptive: stat_for(&|r| &r.1, t),
            nsgaii: stat_for(&|r| &r.2, t),
        })
        .collect();
    let break_even = settings
        .thresholds
        .iter()
        .map(|&t| {
            let taus: Vec<f64> = records
                .iter()
                .filter_map(|(_, a, n)| break_even_time(a, n, t).ok())
                .map(|b| b.tau)
                .collect();
            (t, Stat::of(&taus, total))
        })
        .collect();
    Ok(BenchReport {
        summary: BenchSummary {
            problem: exp.problem.name.to_string(),
            adaptive: adaptive_label(exp.n_seq),
            population: exp.nsgaii.population,
            rows,
        },
        break_even,
        records,
    })
}

impl BenchReport {
    /// One CSV per algorithm: `bench_<problem>_<algorithm>.csv`.
    pub fn write(&self, dir: &Path, thresholds: &[f64]) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for which in 0..2 {
            let mut out = csv::Writer::from_writer(Vec::new());
            let mut label = String::new();
            for (seed, a, n) in &self.records {
                let rec = if which == 0 { a } else { n };
                label.clone_from(&rec.algorithm);
                for &t in thresholds {
                    let row = rec.first_reaching(t);
                    out.serialize(BenchCsvRow {
                        seed: *seed,
                        threshold: t,
                        evals: row.map(|r| r.evals),
                        iterations: row.map(|r| r.iter),
                        t_pure_s: row.map(|r| r.t_pure_s),
                    })?;
                }
            }
            let bytes = out.into_inner().map_err(|e| Error::Io(e.into_error()))?;
            write_atomic(&dir.join(format!("bench_{}_{label}.csv", self.summary.problem)), &bytes)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_replicate_has_zero_std() {
        let s = Stat::of(&[12.0], 1);
        assert_eq!((s.mean, s.std), (12.0, 0.0));
        let s = Stat::of(&[10.0, 14.0], 3);
        assert_eq!(s.mean, 12.0);
        assert!((s.std - 8f64.sqrt()).abs() < 1e-12);
        assert!(format!("{s}").contains("(2/3)"));
    }
}
