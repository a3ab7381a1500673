//! The adaptive optimization loop: fit models, suggest a batch of designs by
//! maximizing the acquisition function against fantasy-augmented data,
//! evaluate the batch, repeat.

mod de;
mod polish;

pub use de::{differential_evolution, latin_hypercube, DeConfig};
pub use polish::{polish, PolishConfig};

use std::time::Instant;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::acquisition::{Acquisition, AcquisitionConfig};
use crate::error::{Error, Result};
use crate::pareto::{hypervolume, pareto_subset};
use crate::problems::BlackBox;
use crate::surrogate::{fit_classifier, fit_regressor, Classifier, ClassifierKind, Regressor, RegressorKind};
use crate::types::{Bounds, Dataset};

/// Settings of one adaptive run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub acquisition: AcquisitionConfig,
    pub n_seq: usize,
    pub regressor: RegressorKind,
    #[serde(default)]
    pub classifier: ClassifierKind,
    #[serde(default)]
    pub de: DeConfig,
    #[serde(default)]
    pub polish: PolishConfig,
}

/// Target relative dominated volume against a known true-front volume.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeTarget {
    pub relative_volume: f64,
    pub true_volume: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StoppingCriterion {
    pub max_evaluations: Option<usize>,
    pub target: Option<VolumeTarget>,
}

impl StoppingCriterion {
    pub fn max_evaluations(n: usize) -> Self {
        StoppingCriterion {
            max_evaluations: Some(n),
            target: None,
        }
    }

    pub fn with_target(mut self, relative_volume: f64, true_volume: f64) -> Self {
        assert!(true_volume > 0.0, "true volume must be positive");
        self.target = Some(VolumeTarget {
            relative_volume,
            true_volume,
        });
        self
    }

    fn validate(&self) -> Result<()> {
        if self.max_evaluations.is_none() && self.target.is_none() {
            return Err(Error::InvalidConfig("a stopping criterion needs a budget or a target".into()));
        }
        Ok(())
    }

    /// `Stop(D)`.
    pub fn is_met(&self, data: &Dataset, reference: &[f64]) -> bool {
        if self.max_evaluations.is_some_and(|m| data.len() >= m) {
            return true;
        }
        if let Some(t) = self.target {
            let v = hypervolume(&pareto_subset(&data.feasible_objectives()), reference);
            return v / t.true_volume >= t.relative_volume;
        }
        false
    }
}

/// Timings of one outer iteration, in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Dataset size after the iteration.
    pub evaluations: usize,
    pub model_seconds: f64,
    pub acquisition_seconds: f64,
    pub evaluation_seconds: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunState {
    pub dataset: Dataset,
    pub initial_size: usize,
    pub iterations: Vec<IterationRecord>,
}

impl RunState {
    pub fn iteration(&self) -> usize {
        self.iterations.len()
    }
}

/// A finished run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    /// Pareto subset of the feasible objectives.
    pub front: Vec<Vec<f64>>,
    pub state: RunState,
}

/// A run stopped by a failing black box; the data gathered so far is kept.
#[derive(Debug, Error)]
#[error("run aborted after {} evaluations: {error}", state.dataset.len())]
pub struct Aborted {
    pub error: Error,
    pub state: RunState,
}

/// A design together with the model predictions appended to the working data.
#[derive(Debug, Clone, PartialEq)]
pub struct Suggestion {
    pub x: Vec<f64>,
    pub predicted_objectives: Option<Vec<f64>>,
    pub predicted_feasibility: f64,
    pub acquisition: f64,
}

/// Fitted models for one outer iteration.
pub struct Models {
    pub regressor: Option<Box<dyn Regressor>>,
    pub classifier: Box<dyn Classifier>,
}

/// Uniform samples on `domain`, evaluated in order.
pub fn initial_calculation(
    problem: &dyn BlackBox,
    domain: &Bounds,
    n0: usize,
    rng: &mut dyn RngCore,
) -> Result<Dataset> {
    assert!(n0 >= 1, "at least one initial sample is required");
    assert!(problem.bounds().encloses(domain), "initial domain must lie inside the design space");
    let mut data = Dataset::new();
    for _ in 0..n0 {
        let x: Vec<f64> = domain.intervals().iter().map(|&(l, h)| rng.gen_range(l..=h)).collect();
        data.push(problem.evaluate(&x)?);
    }
    Ok(data)
}

/// Fits the classifier on every sample and the regressor on the feasible ones
/// (skipped below two feasible samples).
pub fn update_models(
    data: &Dataset,
    bounds: &Bounds,
    regressor: RegressorKind,
    classifier: ClassifierKind,
    rng: &mut dyn RngCore,
) -> Result<Models> {
    let classifier = fit_classifier(&data.labeled(), bounds, classifier)?;
    let pairs = data.feasible_pairs();
    let regressor = if pairs.len() >= 2 {
        Some(fit_regressor(&pairs, bounds, regressor, rng)?)
    } else {
        None
    };
    Ok(Models { regressor, classifier })
}

/// Differential evolution followed by a local polish; returns the design and its value.
pub fn maximize_acquisition(
    af: impl Fn(&[f64]) -> f64,
    bounds: &Bounds,
    de: &DeConfig,
    polish_cfg: &PolishConfig,
    rng: &mut dyn RngCore,
) -> (Vec<f64>, f64) {
    let in_unit = |u: &[f64]| af(&bounds.from_unit(u));
    let (u, v) = differential_evolution(in_unit, bounds.dim(), de, rng);
    let (u, v) = polish(in_unit, &u, v, polish_cfg);
    (bounds.from_unit(&u), v)
}

/// The inner loop of one iteration: `n_seq` maximizations, each against the
/// data augmented with the fantasies of the previous ones. Models are not refit.
pub fn suggestion_sequence(
    models: &Models,
    data: &Dataset,
    bounds: &Bounds,
    cfg: &OptimizerConfig,
    rng: &mut dyn RngCore,
) -> Vec<Suggestion> {
    assert!(cfg.n_seq >= 1, "n_seq must be positive");
    let mut explored: Vec<Vec<f64>> = data.designs().iter().map(|x| x.to_vec()).collect();
    let mut feasible: Vec<Vec<f64>> = data.feasible_objectives().iter().map(|y| y.to_vec()).collect();
    let regressor = models.regressor.as_deref();
    let mut batch = Vec::with_capacity(cfg.n_seq);
    for _ in 0..cfg.n_seq {
        let acq = Acquisition::new(
            &cfg.acquisition,
            bounds,
            regressor,
            models.classifier.as_ref(),
            &explored,
            &feasible,
        );
        let (x, value) = maximize_acquisition(|x| acq.value(x), bounds, &cfg.de, &cfg.polish, rng);
        let f_hat = models.classifier.predict_feasible(&x);
        let y_hat = regressor.map(|r| r.predict(&x).mu);
        explored.push(x.clone());
        if let Some(y) = &y_hat {
            if f_hat >= 0.5 {
                feasible.push(y.clone());
            }
        }
        batch.push(Suggestion {
            x,
            predicted_objectives: y_hat,
            predicted_feasibility: f_hat,
            acquisition: value,
        });
    }
    batch
}

/// Continues a run from `state` until the stopping criterion holds.
pub fn resume(
    problem: &dyn BlackBox,
    cfg: &OptimizerConfig,
    stop: &StoppingCriterion,
    mut state: RunState,
    rng: &mut dyn RngCore,
) -> std::result::Result<RunOutcome, Aborted> {
    let bounds = problem.bounds().clone();
    while !stop.is_met(&state.dataset, &cfg.acquisition.reference) {
        let t0 = Instant::now();
        let models = match update_models(&state.dataset, &bounds, cfg.regressor, cfg.classifier, rng) {
            Ok(m) => m,
            Err(error) => return Err(Aborted { error, state }),
        };
        let t1 = Instant::now();
        let batch = suggestion_sequence(&models, &state.dataset, &bounds, cfg, rng);
        let t2 = Instant::now();
        // appended in suggestion order
        for s in &batch {
            match problem.evaluate(&s.x) {
                Ok(sample) => state.dataset.push(sample),
                Err(error) => return Err(Aborted { error, state }),
            }
        }
        let t3 = Instant::now();
        state.iterations.push(IterationRecord {
            iteration: state.iterations.len() + 1,
            evaluations: state.dataset.len(),
            model_seconds: (t1 - t0).as_secs_f64(),
            acquisition_seconds: (t2 - t1).as_secs_f64(),
            evaluation_seconds: (t3 - t2).as_secs_f64(),
        });
    }
    let front = pareto_subset(&state.dataset.feasible_objectives());
    Ok(RunOutcome { front, state })
}

/// Runs the adaptive algorithm from scratch. All randomness comes from one
/// generator seeded with `seed`.
pub fn optimize(
    problem: &dyn BlackBox,
    initial_domain: &Bounds,
    n0: usize,
    cfg: &OptimizerConfig,
    stop: &StoppingCriterion,
    seed: u64,
) -> std::result::Result<RunOutcome, Aborted> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let validated = cfg
        .acquisition
        .validate()
        .and_then(|_| stop.validate())
        .and_then(|_| {
            if cfg.n_seq == 0 {
                Err(Error::InvalidConfig("n_seq must be positive".into()))
            } else if cfg.acquisition.reference.len() != problem.n_objectives() {
                Err(Error::InvalidConfig("reference point dimension differs from the objectives".into()))
            } else {
                Ok(())
            }
        });
    if let Err(error) = validated {
        return Err(Aborted {
            error,
            state: RunState::default(),
        });
    }
    let dataset = match initial_calculation(problem, initial_domain, n0, &mut rng) {
        Ok(d) => d,
        Err(error) => {
            return Err(Aborted {
                error,
                state: RunState::default(),
            })
        }
    };
    let state = RunState {
        initial_size: dataset.len(),
        dataset,
        iterations: Vec::new(),
    };
    resume(problem, cfg, stop, state, &mut rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::lookup;
    use crate::types::Sample;

    fn bnh_config(n_seq: usize) -> (crate::problems::BenchmarkProblem, OptimizerConfig) {
        let p = lookup("BNH").unwrap();
        let cfg = OptimizerConfig {
            acquisition: p.default_acquisition(),
            n_seq,
            regressor: p.regressor,
            classifier: ClassifierKind::default(),
            de: DeConfig::default(),
            polish: PolishConfig::default(),
        };
        (p, cfg)
    }

    #[test]
    fn initial_samples_stay_in_domain_and_repeat() {
        let p = lookup("BNH").unwrap();
        let mut a = ChaCha8Rng::seed_from_u64(4);
        let mut b = ChaCha8Rng::seed_from_u64(4);
        let d1 = initial_calculation(&p, &p.initial_domain, 10, &mut a).unwrap();
        let d2 = initial_calculation(&p, &p.initial_domain, 10, &mut b).unwrap();
        assert_eq!(d1, d2);
        assert_eq!(d1.len(), 10);
        for x in d1.designs() {
            assert!((0.0..=5.0).contains(&x[0]) && (-5.0..=0.0).contains(&x[1]));
        }
        let one = initial_calculation(&p, &p.initial_domain, 1, &mut a).unwrap();
        assert_eq!(one.len(), 1);
    }

    #[test]
    fn maximizer_finds_interior_peak() {
        let b = Bounds::new(&[(0.0, 1.0)]);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (x, _) = maximize_acquisition(
            |x| -(x[0] - 0.3).powi(2),
            &b,
            &DeConfig::default(),
            &PolishConfig::default(),
            &mut rng,
        );
        assert!((x[0] - 0.3).abs() < 1e-3);
        let (x, _) = maximize_acquisition(|_| 1.0, &b, &DeConfig::default(), &PolishConfig::default(), &mut rng);
        assert!(b.contains(&x));
    }

    #[test]
    fn rastrigin_global_optimum() {
        let b = Bounds::new(&[(-5.12, 5.12), (-5.12, 5.12)]);
        let neg_rastrigin = |x: &[f64]| {
            -(20.0
                + x.iter()
                    .map(|v| v * v - 10.0 * (2.0 * std::f64::consts::PI * v).cos())
                    .sum::<f64>())
        };
        let hits = (0..20)
            .filter(|&seed| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let (_, v) =
                    maximize_acquisition(neg_rastrigin, &b, &DeConfig::default(), &PolishConfig::default(), &mut rng);
                v >= -1e-2
            })
            .count();
        assert!(hits >= 18, "{hits}/20");
    }

    #[test]
    fn zero_budget_returns_initial_front() {
        let (p, cfg) = bnh_config(1);
        let out = optimize(&p, &p.initial_domain, 10, &cfg, &StoppingCriterion::max_evaluations(10), 1).unwrap();
        assert_eq!(out.state.dataset.len(), 10);
        assert!(out.state.iterations.is_empty());
        assert_eq!(out.front, pareto_subset(&out.state.dataset.feasible_objectives()));
    }

    #[test]
    fn dataset_grows_by_batches_and_is_reproducible() {
        let (p, mut cfg) = bnh_config(2);
        cfg.de.generations = 10;
        let stop = StoppingCriterion::max_evaluations(14);
        let a = optimize(&p, &p.initial_domain, 10, &cfg, &stop, 5).unwrap();
        assert_eq!(a.state.dataset.len(), 14);
        assert_eq!(a.state.iterations.len(), 2);
        for x in a.state.dataset.designs() {
            assert!(p.bounds.contains(x));
        }
        let b = optimize(&p, &p.initial_domain, 10, &cfg, &stop, 5).unwrap();
        assert_eq!(a.state.dataset, b.state.dataset);
    }

    #[derive(Debug)]
    struct Flaky {
        bounds: Bounds,
        calls: std::cell::Cell<usize>,
    }

    impl BlackBox for Flaky {
        fn bounds(&self) -> &Bounds {
            &self.bounds
        }

        fn n_objectives(&self) -> usize {
            2
        }

        fn evaluate(&self, x: &[f64]) -> Result<Sample> {
            let n = self.calls.get() + 1;
            self.calls.set(n);
            if n > 5 {
                return Err(Error::Evaluation("solver crashed".into()));
            }
            Ok(Sample::feasible(x.to_vec(), vec![x[0], 1.0 - x[0]]))
        }
    }

    #[test]
    fn failing_black_box_keeps_partial_state() {
        let (_, mut cfg) = bnh_config(1);
        cfg.acquisition.reference = vec![2.0, 2.0];
        cfg.de.generations = 5;
        let f = Flaky {
            bounds: Bounds::new(&[(0.0, 1.0)]),
            calls: std::cell::Cell::new(0),
        };
        let err = optimize(&f, &f.bounds.clone(), 3, &cfg, &StoppingCriterion::max_evaluations(10), 0).unwrap_err();
        assert_eq!(err.state.dataset.len(), 5);
        assert!(matches!(err.error, Error::Evaluation(_)));
    }
}
