//! Command-line front end: `run`, `bench`, `oracle` and `problems`.
//!
//! Exit status is 0 on success, 1 when a run or validation fails and 2 on
//! usage errors (bad flags, unknown problems, invalid configuration).

mod bench;
mod config;
mod oracle;
mod run;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use bench::{cmd_bench, BenchReport, BenchRow, BenchSettings, BenchSummary, Stat};
pub use config::{
    AcquisitionOverrides, Algorithm, Experiment, ExperimentConfig, ReferenceConfig, StopConfig, DEFAULT_OUTPUT_DIR,
    OUTPUT_DIR_ENV,
};
pub use oracle::{run_suite, Suite, SuiteReport};
pub use run::{cmd_run, write_dataset, write_front, ResultBundle, VERSION};

use crate::error::Error;
use crate::problems::{list_problems, lookup};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "parbo", version, about = "Adaptive Bayesian optimization of constrained Pareto fronts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one seeded optimization and write its results.
    Run {
        #[command(flatten)]
        experiment: ExperimentArgs,
        #[arg(long = "algo", value_enum)]
        algorithm: Option<Algorithm>,
    },
    /// Compare the adaptive algorithm with NSGA-II over several seeds.
    Bench {
        #[command(flatten)]
        experiment: ExperimentArgs,
        #[arg(long, default_value_t = 10)]
        replicates: usize,
        /// Explicit seeds; defaults to 0..replicates.
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        #[arg(long, value_delimiter = ',', default_value = "0.80,0.85,0.90,0.95")]
        thresholds: Vec<f64>,
        /// NSGA-II evaluation budget beyond the initial sample.
        #[arg(long, default_value_t = 2500)]
        nsga_max_evals: usize,
    },
    /// Compare closed forms against numerical oracles.
    Oracle {
        #[arg(value_enum)]
        suite: Suite,
        #[arg(long)]
        instances: Option<usize>,
        #[arg(long, default_value_t = 100_000)]
        draws: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Print only failures and the summary.
        #[arg(long)]
        quiet: bool,
    },
    /// List the benchmark problems.
    Problems,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    /// TOML configuration file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    problem: Option<String>,
    #[arg(long = "nseq")]
    n_seq: Option<usize>,
    /// Number of initial random samples.
    #[arg(long = "n0")]
    n_initial: Option<usize>,
    /// Acquisition weights `w_opt,w_con,w_exp`.
    #[arg(long, value_delimiter = ',', num_args = 3)]
    weights: Option<Vec<f64>>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    sigma_ref: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Evaluations after the initial sample.
    #[arg(long)]
    max_evals: Option<usize>,
    #[arg(long)]
    target_dv: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// `svm_platt` or `gp_laplace`.
    #[arg(long)]
    classifier: Option<String>,
    /// NSGA-II population size.
    #[arg(long)]
    population: Option<usize>,
    /// Output directory; falls back to the config file, then to $PARBO_OUTPUT_DIR.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Directory caching the reference-front volumes.
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    #[arg(long)]
    reference_resolution: Option<usize>,
}

impl ExperimentArgs {
    fn into_config(self, algorithm: Option<Algorithm>) -> Result<ExperimentConfig, Error> {
        let base = match &self.config {
            Some(path) => ExperimentConfig::from_toml(&std::fs::read_to_string(path)?)?,
            None => ExperimentConfig::default(),
        };
        let classifier = self.classifier.as_deref().map(str::parse).transpose()?;
        let nsgaii = self.population.map(|population| {
            let mut n = base.nsgaii.clone().unwrap_or_default();
            n.population = population;
            n
        });
        let flags = ExperimentConfig {
            problem: self.problem,
            algorithm,
            seed: self.seed,
            n_seq: self.n_seq,
            n_initial: self.n_initial,
            classifier,
            output_dir: self.output_dir,
            acquisition: AcquisitionOverrides {
                weights: self.weights.map(|w| [w[0], w[1], w[2]]),
                gamma: self.gamma,
                sigma_ref: self.sigma_ref,
                epsilon: self.epsilon,
            },
            stop: StopConfig {
                max_evals: self.max_evals,
                target_dv: self.target_dv,
            },
            reference: ReferenceConfig {
                resolution: self.reference_resolution,
                seed: None,
                cache_dir: self.cache_dir,
            },
            de: None,
            polish: None,
            nsgaii,
        };
        Ok(base.overridden_by(flags))
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidConfig(_) | Error::UnknownProblem(_) => EXIT_USAGE,
        _ => EXIT_FAILURE,
    }
}

fn report_error(err: &mut dyn Write, e: &Error) -> i32 {
    let _ = writeln!(err, "error: {e}");
    exit_code(e)
}

/// Parses `args` (program name first) and executes the command.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return e.exit_code();
        }
    };
    match cli.command {
        Command::Run { experiment, algorithm } => {
            let exp = match experiment.into_config(algorithm).and_then(ExperimentConfig::resolve) {
                Ok(e) => e,
                Err(e) => return report_error(err, &e),
            };
            match cmd_run(&exp).and_then(|b| b.write(&exp.output_dir).map(|_| b)) {
                Ok(bundle) => {
                    let last = bundle.record.last().copied();
                    let _ = writeln!(
                        out,
                        "{} {} seed {}: {} evaluations, dv {:.4}, front size {}, written to {}",
                        exp.problem.name,
                        bundle.record.algorithm,
                        exp.seed,
                        bundle.dataset.len(),
                        last.map_or(0.0, |r| r.dv),
                        bundle.front.len(),
                        exp.output_dir.display()
                    );
                    EXIT_OK
                }
                Err(e) => report_error(err, &e),
            }
        }
        Command::Bench {
            experiment,
            replicates,
            seeds,
            thresholds,
            nsga_max_evals,
        } => {
            if replicates == 0 {
                return report_error(err, &Error::InvalidConfig("replicates must be at least 1".into()));
            }
            let mut cfg = match experiment.into_config(None) {
                Ok(c) => c,
                Err(e) => return report_error(err, &e),
            };
            let adaptive_max_evals = cfg.stop.max_evals.unwrap_or(150);
            cfg.stop.max_evals = Some(adaptive_max_evals);
            let exp = match cfg.resolve() {
                Ok(e) => e,
                Err(e) => return report_error(err, &e),
            };
            let settings = BenchSettings {
                seeds: seeds.unwrap_or_else(|| (0..replicates as u64).collect()),
                thresholds,
                adaptive_max_evals,
                nsgaii_max_evals: nsga_max_evals,
            };
            match cmd_bench(&exp, &settings).and_then(|r| r.write(&exp.output_dir, &settings.thresholds).map(|_| r)) {
                Ok(report) => {
                    let _ = write!(out, "{report}");
                    EXIT_OK
                }
                Err(e) => report_error(err, &e),
            }
        }
        Command::Oracle {
            suite,
            instances,
            draws,
            seed,
            quiet,
        } => {
            let instances = instances.unwrap_or(suite.default_instances());
            if instances == 0 {
                return report_error(err, &Error::InvalidConfig("instances must be at least 1".into()));
            }
            if draws < 10_000 && suite != Suite::Integrals && suite != Suite::Truncation {
                return report_error(err, &Error::InvalidConfig("Monte-Carlo suites need at least 10^4 draws".into()));
            }
            let report = run_suite(suite, instances, draws, seed);
            for line in &report.lines {
                if !quiet || line.starts_with("FAIL") {
                    let _ = writeln!(out, "{line}");
                }
            }
            let _ = writeln!(
                out,
                "{suite:?}: {}/{} instances passed, max deviation {:.3e}",
                report.instances - report.failures,
                report.instances,
                report.max_deviation
            );
            if report.passed() {
                EXIT_OK
            } else {
                EXIT_FAILURE
            }
        }
        Command::Problems => {
            let _ = writeln!(out, "name  dim  objectives  constraints  n0  reference");
            for name in list_problems() {
                let p = lookup(name).expect("registered problem");
                let _ = writeln!(
                    out,
                    "{:<5} {:>3} {:>11} {:>12} {:>3}  {:?}",
                    p.name,
                    p.dim(),
                    p.n_objectives,
                    p.n_constraints,
                    p.n_initial,
                    p.reference
                );
            }
            EXIT_OK
        }
    }
}
