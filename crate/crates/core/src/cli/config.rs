//! Experiment configuration: a TOML file with dotted keys, overridden by flags.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::acquisition::{AcquisitionConfig, AcquisitionWeights};
use crate::error::{Error, Result};
use crate::evaluation::Nsga2Config;
use crate::optimizer::{DeConfig, PolishConfig};
use crate::problems::{default_resolution, lookup, BenchmarkProblem, REFERENCE_SEED};
use crate::surrogate::ClassifierKind;

/// Environment variable naming the output directory when neither a flag nor
/// the config file does.
pub const OUTPUT_DIR_ENV: &str = "PARBO_OUTPUT_DIR";

pub const DEFAULT_OUTPUT_DIR: &str = "parbo-output";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Adaptive,
    Nsgaii,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AcquisitionOverrides {
    /// `(w_opt, w_con, w_exp)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_ref: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StopConfig {
    /// Evaluations after the initial sample.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_evals: Option<usize>,
    /// Relative dominated volume at which the run stops.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_dv: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceConfig {
    /// Number of uniform designs used to approximate the true front.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resolution: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Where computed reference volumes are cached.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cache_dir: Option<PathBuf>,
}

/// Every key is optional; unset values fall back to the problem's defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub problem: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub algorithm: Option<Algorithm>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_seq: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_initial: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classifier: Option<ClassifierKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub acquisition: AcquisitionOverrides,
    #[serde(default)]
    pub stop: StopConfig,
    #[serde(default)]
    pub reference: ReferenceConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub de: Option<DeConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub polish: Option<PolishConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nsgaii: Option<Nsga2Config>,
}

fn pick<T>(over: Option<T>, base: Option<T>) -> Option<T> {
    over.or(base)
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes to TOML")
    }

    /// Values set in `over` win.
    pub fn overridden_by(self, over: ExperimentConfig) -> Self {
        ExperimentConfig {
            problem: pick(over.problem, self.problem),
            algorithm: pick(over.algorithm, self.algorithm),
            seed: pick(over.seed, self.seed),
            n_seq: pick(over.n_seq, self.n_seq),
            n_initial: pick(over.n_initial, self.n_initial),
            classifier: pick(over.classifier, self.classifier),
            output_dir: pick(over.output_dir, self.output_dir),
            acquisition: AcquisitionOverrides {
                weights: pick(over.acquisition.weights, self.acquisition.weights),
                gamma: pick(over.acquisition.gamma, self.acquisition.gamma),
                sigma_ref: pick(over.acquisition.sigma_ref, self.acquisition.sigma_ref),
                epsilon: pick(over.acquisition.epsilon, self.acquisition.epsilon),
            },
            stop: StopConfig {
                max_evals: pick(over.stop.max_evals, self.stop.max_evals),
                target_dv: pick(over.stop.target_dv, self.stop.target_dv),
            },
            reference: ReferenceConfig {
                resolution: pick(over.reference.resolution, self.reference.resolution),
                seed: pick(over.reference.seed, self.reference.seed),
                cache_dir: pick(over.reference.cache_dir, self.reference.cache_dir),
            },
            de: pick(over.de, self.de),
            polish: pick(over.polish, self.polish),
            nsgaii: pick(over.nsgaii, self.nsgaii),
        }
    }

    /// Fills every default and validates the result.
    pub fn resolve(self) -> Result<Experiment> {
        let name = self
            .problem
            .ok_or_else(|| Error::InvalidConfig("no problem given".into()))?;
        let problem = lookup(&name)?;
        let mut acquisition = problem.default_acquisition();
        if let Some([opt, con, exp]) = self.acquisition.weights {
            acquisition.weights = AcquisitionWeights { opt, con, exp };
        }
        acquisition.gamma = self.acquisition.gamma.unwrap_or(acquisition.gamma);
        acquisition.sigma_ref = self.acquisition.sigma_ref.unwrap_or(acquisition.sigma_ref);
        acquisition.epsilon = self.acquisition.epsilon.unwrap_or(acquisition.epsilon);
        acquisition.validate()?;

        let n_seq = self.n_seq.unwrap_or(1);
        let n_initial = self.n_initial.unwrap_or(problem.n_initial);
        if n_seq == 0 || n_initial == 0 {
            return Err(Error::InvalidConfig("n_seq and n_initial must be positive".into()));
        }
        if self.stop.max_evals.is_none() && self.stop.target_dv.is_none() {
            return Err(Error::InvalidConfig("set stop.max_evals and/or stop.target_dv".into()));
        }
        if let Some(t) = self.stop.target_dv {
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::InvalidConfig(format!("target_dv {t} outside [0, 1]")));
            }
        }
        let nsgaii = self.nsgaii.unwrap_or_default();
        nsgaii.validate()?;
        let output_dir = self
            .output_dir
            .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR));
        let resolution = self.reference.resolution.unwrap_or_else(|| default_resolution(&problem));
        if resolution == 0 {
            return Err(Error::InvalidConfig("reference.resolution must be positive".into()));
        }
        Ok(Experiment {
            algorithm: self.algorithm.unwrap_or(Algorithm::Adaptive),
            seed: self.seed.unwrap_or(0),
            n_seq,
            n_initial,
            classifier: self.classifier.unwrap_or_default(),
            output_dir,
            acquisition,
            max_evals: self.stop.max_evals,
            target_dv: self.stop.target_dv,
            reference_resolution: resolution,
            reference_seed: self.reference.seed.unwrap_or(REFERENCE_SEED),
            cache_dir: self.reference.cache_dir,
            de: self.de.unwrap_or_default(),
            polish: self.polish.unwrap_or_default(),
            nsgaii,
            problem,
        })
    }
}

/// A fully resolved experiment.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub problem: BenchmarkProblem,
    pub algorithm: Algorithm,
    pub seed: u64,
    pub n_seq: usize,
    pub n_initial: usize,
    pub classifier: ClassifierKind,
    pub output_dir: PathBuf,
    pub acquisition: AcquisitionConfig,
    pub max_evals: Option<usize>,
    pub target_dv: Option<f64>,
    pub reference_resolution: usize,
    pub reference_seed: u64,
    pub cache_dir: Option<PathBuf>,
    pub de: DeConfig,
    pub polish: PolishConfig,
    pub nsgaii: Nsga2Config,
}

impl Experiment {
    /// The configuration with every value spelled out; loading it back
    /// resolves to the same experiment.
    pub fn echo(&self) -> ExperimentConfig {
        let w = self.acquisition.weights;
        ExperimentConfig {
            problem: Some(self.problem.name.to_string()),
            algorithm: Some(self.algorithm),
            seed: Some(self.seed),
            n_seq: Some(self.n_seq),
            n_initial: Some(self.n_initial),
            classifier: Some(self.classifier),
            output_dir: Some(self.output_dir.clone()),
            acquisition: AcquisitionOverrides {
                weights: Some([w.opt, w.con, w.exp]),
                gamma: Some(self.acquisition.gamma),
                sigma_ref: Some(self.acquisition.sigma_ref),
                epsilon: Some(self.acquisition.epsilon),
            },
            stop: StopConfig {
                max_evals: self.max_evals,
                target_dv: self.target_dv,
            },
            reference: ReferenceConfig {
                resolution: Some(self.reference_resolution),
                seed: Some(self.reference_seed),
                cache_dir: self.cache_dir.clone(),
            },
            de: Some(self.de.clone()),
            polish: Some(self.polish.clone()),
            nsgaii: Some(self.nsgaii.clone()),
        }
    }
}
