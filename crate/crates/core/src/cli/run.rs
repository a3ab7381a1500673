//! Single seeded runs and their output files.

use std::fs;
use std::io::Write;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{Algorithm, Experiment, ExperimentConfig};
use crate::error::Result;
use crate::evaluation::{nsgaii_run, RunRecord};
use crate::optimizer::{initial_calculation, optimize, OptimizerConfig, RunOutcome, StoppingCriterion, VolumeTarget};
use crate::pareto::pareto_indices;
use crate::problems::{reference_front_volume, TrueFrontReference};
use crate::types::{Dataset, Sample};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Everything a run writes to disk.
#[derive(Debug, Clone)]
pub struct ResultBundle {
    /// Pareto-optimal feasible samples.
    pub front: Vec<Sample>,
    pub dataset: Dataset,
    pub record: RunRecord,
    pub config: ExperimentConfig,
    pub version: &'static str,
}

pub fn true_front(exp: &Experiment) -> Result<TrueFrontReference> {
    reference_front_volume(
        &exp.problem,
        exp.reference_resolution,
        exp.reference_seed,
        exp.cache_dir.as_deref(),
    )
}

/// Budget and target of `exp`, with the budget counted on top of the initial sample.
pub fn stopping(exp: &Experiment, max_evals: Option<usize>, true_volume: f64) -> StoppingCriterion {
    StoppingCriterion {
        max_evaluations: max_evals.map(|m| exp.n_initial + m),
        target: exp.target_dv.map(|relative_volume| VolumeTarget {
            relative_volume,
            true_volume,
        }),
    }
}

pub fn optimizer_config(exp: &Experiment) -> OptimizerConfig {
    OptimizerConfig {
        acquisition: exp.acquisition.clone(),
        n_seq: exp.n_seq,
        regressor: exp.problem.regressor,
        classifier: exp.classifier,
        de: exp.de.clone(),
        polish: exp.polish.clone(),
    }
}

pub fn adaptive_label(n_seq: usize) -> String {
    format!("adaptive-{n_seq}")
}

/// Runs `algorithm` for one seed; both algorithms start from the same initial data.
pub fn run_algorithm(
    exp: &Experiment,
    algorithm: Algorithm,
    stop: &StoppingCriterion,
    seed: u64,
    true_volume: f64,
) -> Result<(RunOutcome, RunRecord)> {
    let p = &exp.problem;
    let (outcome, label, n_seq) = match algorithm {
        Algorithm::Adaptive => {
            let out = optimize(p, &p.initial_domain, exp.n_initial, &optimizer_config(exp), stop, seed)
                .map_err(|a| a.error)?;
            (out, adaptive_label(exp.n_seq), exp.n_seq)
        }
        Algorithm::Nsgaii => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let initial = initial_calculation(p, &p.initial_domain, exp.n_initial, &mut rng)?;
            let out = nsgaii_run(p, &exp.nsgaii, &initial, stop, &p.reference, seed).map_err(|a| a.error)?;
            (out, "nsgaii".to_string(), exp.nsgaii.population)
        }
    };
    let record = RunRecord::from_state(label, n_seq, &outcome.state, &p.reference, true_volume);
    Ok((outcome, record))
}

/// Executes one experiment.
pub fn cmd_run(exp: &Experiment) -> Result<ResultBundle> {
    let reference = true_front(exp)?;
    let stop = stopping(exp, exp.max_evals, reference.volume);
    let (outcome, record) = run_algorithm(exp, exp.algorithm, &stop, exp.seed, reference.volume)?;
    let dataset = outcome.state.dataset;
    let feasible: Vec<&Sample> = dataset.samples().iter().filter(|s| s.feasibility.is_feasible()).collect();
    let ys: Vec<&[f64]> = feasible.iter().filter_map(|s| s.objectives()).collect();
    let front = pareto_indices(&ys).into_iter().map(|i| feasible[i].clone()).collect();
    Ok(ResultBundle {
        front,
        dataset,
        record,
        config: exp.echo(),
        version: VERSION,
    })
}

fn header(prefix: &str, n: usize) -> impl Iterator<Item = String> + '_ {
    (1..=n).map(move |i| format!("{prefix}{i}"))
}

fn num(v: f64) -> String {
    format!("{v}")
}

/// Columns `x1..xd,y1..yn`.
pub fn write_front<W: Write>(front: &[Sample], d: usize, n: usize, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header("x", d).chain(header("y", n)))?;
    for s in front {
        let y = s.objectives().expect("front samples are feasible");
        out.write_record(s.x.iter().chain(y).map(|&v| num(v)))?;
    }
    out.flush()?;
    Ok(())
}

/// Columns `x1..xd,feasible,y1..yn`; objectives are empty for infeasible rows.
pub fn write_dataset<W: Write>(data: &Dataset, d: usize, n: usize, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(
        header("x", d)
            .chain(std::iter::once("feasible".to_string()))
            .chain(header("y", n)),
    )?;
    for s in data.samples() {
        let mut row: Vec<String> = s.x.iter().map(|&v| num(v)).collect();
        row.push(u8::from(s.feasibility.is_feasible()).to_string());
        match s.objectives() {
            Some(y) => row.extend(y.iter().map(|&v| num(v))),
            None => row.extend(std::iter::repeat_n(String::new(), n)),
        }
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// Writes `bytes` to `path` through a temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

impl ResultBundle {
    pub fn config_text(&self) -> String {
        format!("# parbo {}\n{}", self.version, self.config.to_toml())
    }

    /// Writes `results.csv`, `front.csv`, `dataset.csv` and `config.toml`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let d = self.dataset.samples().first().map_or(0, |s| s.x.len());
        let n = self
            .config
            .problem
            .as_deref()
            .map(crate::problems::lookup)
            .transpose()?
            .map_or(0, |p| p.n_objectives);
        let mut buf = Vec::new();
        self.record.write_csv(&mut buf)?;
        write_atomic(&dir.join("results.csv"), &buf)?;
        buf.clear();
        write_front(&self.front, d, n, &mut buf)?;
        write_atomic(&dir.join("front.csv"), &buf)?;
        buf.clear();
        write_dataset(&self.dataset, d, n, &mut buf)?;
        write_atomic(&dir.join("dataset.csv"), &buf)?;
        write_atomic(&dir.join("config.toml"), self.config_text().as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dataset_csv_layout() {
        let mut d = Dataset::new();
        d.push(Sample::feasible(vec![0.5, 1.0], vec![2.0, 3.25]));
        d.push(Sample::infeasible(vec![0.0, -1.0]));
        let mut buf = Vec::new();
        write_dataset(&d, 2, 2, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "x1,x2,feasible,y1,y2\n0.5,1,1,2,3.25\n0,-1,0,,\n"
        );
    }
}
