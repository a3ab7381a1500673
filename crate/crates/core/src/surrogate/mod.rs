//! Probabilistic models of the black box: a separable normal density over
//! the objectives and a calibrated probability of feasibility.

mod classifier;
mod gp;
mod ridge;
mod simplex;
mod svm;

pub use classifier::{GpClassifier, LaplaceClassifierConfig, MIN_CLASS_FOR_CV};
pub use gp::{GaussianProcess, GpConfig};
pub use ridge::{BayesianRidge, RidgeConfig};
pub use svm::{SvmClassifier, SvmConfig};

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{Bounds, Feasibility};

/// Independent normal densities per objective.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalPrediction {
    pub mu: Vec<f64>,
    pub sigma: Vec<f64>,
}

impl NormalPrediction {
    pub fn new(mu: Vec<f64>, sigma: Vec<f64>) -> Self {
        assert_eq!(mu.len(), sigma.len(), "mu and sigma differ in length");
        assert!(sigma.iter().all(|&s| s >= 0.0), "negative standard deviation");
        NormalPrediction { mu, sigma }
    }

    /// A Dirac density at `mu`.
    pub fn point(mu: Vec<f64>) -> Self {
        let sigma = vec![0.0; mu.len()];
        NormalPrediction { mu, sigma }
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    /// Joint log-density, the sum of the per-objective normal log-densities.
    pub fn log_density(&self, y: &[f64]) -> f64 {
        assert_eq!(y.len(), self.dim());
        y.iter()
            .zip(self.mu.iter().zip(&self.sigma))
            .map(|(&v, (&m, &s))| {
                let z = (v - m) / s;
                -0.5 * z * z - s.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
            })
            .sum()
    }
}

/// Predicts the objective density at a design.
pub trait Regressor: Send + Sync + std::fmt::Debug {
    fn predict(&self, x: &[f64]) -> NormalPrediction;

    fn n_objectives(&self) -> usize;
}

/// Predicts the probability that a design is feasible.
pub trait Classifier: Send + Sync + std::fmt::Debug {
    fn predict_feasible(&self, x: &[f64]) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegressorKind {
    GpMatern,
    BayesRidgePoly,
}

impl std::str::FromStr for RegressorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gp_matern" => Ok(RegressorKind::GpMatern),
            "bayes_ridge_poly" => Ok(RegressorKind::BayesRidgePoly),
            other => Err(Error::InvalidConfig(format!("unknown regressor `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    /// RBF support vector machine with Platt scaling.
    #[default]
    SvmPlatt,
    /// Gaussian process classifier, Laplace approximation.
    GpLaplace,
}

impl std::str::FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "svm_platt" => Ok(ClassifierKind::SvmPlatt),
            "gp_laplace" => Ok(ClassifierKind::GpLaplace),
            other => Err(Error::InvalidConfig(format!("unknown classifier `{other}`"))),
        }
    }
}

/// One model per objective, stacked.
#[derive(Debug)]
struct Stacked<M> {
    models: Vec<M>,
}

impl Regressor for Stacked<GaussianProcess> {
    fn predict(&self, x: &[f64]) -> NormalPrediction {
        let (mu, sigma) = self.models.iter().map(|m| m.predict(x)).unzip();
        NormalPrediction { mu, sigma }
    }

    fn n_objectives(&self) -> usize {
        self.models.len()
    }
}

impl Regressor for Stacked<BayesianRidge> {
    fn predict(&self, x: &[f64]) -> NormalPrediction {
        let (mu, sigma) = self.models.iter().map(|m| m.predict(x)).unzip();
        NormalPrediction { mu, sigma }
    }

    fn n_objectives(&self) -> usize {
        self.models.len()
    }
}

fn column(pairs: &[(&[f64], &[f64])], i: usize) -> Vec<f64> {
    pairs.iter().map(|(_, y)| y[i]).collect()
}

/// Fits one independent model per objective on the feasible pairs.
pub fn fit_regressor(
    pairs: &[(&[f64], &[f64])],
    bounds: &Bounds,
    kind: RegressorKind,
    rng: &mut dyn RngCore,
) -> Result<Box<dyn Regressor>> {
    if pairs.len() < 2 {
        return Err(Error::NotEnoughData(format!(
            "regression needs at least 2 feasible samples, got {}",
            pairs.len()
        )));
    }
    let n = pairs[0].1.len();
    for (x, y) in pairs {
        assert_eq!(x.len(), bounds.dim(), "design dimension mismatch");
        assert_eq!(y.len(), n, "objective dimension mismatch");
    }
    let xs: Vec<Vec<f64>> = pairs.iter().map(|(x, _)| bounds.to_unit(x)).collect();
    Ok(match kind {
        RegressorKind::GpMatern => {
            let cfg = GpConfig::default();
            let models = (0..n)
                .map(|i| GaussianProcess::fit(&xs, &column(pairs, i), bounds.clone(), &cfg, rng))
                .collect();
            Box::new(Stacked { models })
        }
        RegressorKind::BayesRidgePoly => {
            let cfg = RidgeConfig::default();
            let models = (0..n)
                .map(|i| BayesianRidge::fit(&xs, &column(pairs, i), bounds.clone(), &cfg))
                .collect();
            Box::new(Stacked { models })
        }
    })
}

/// Fits the feasibility classifier on every labeled design.
pub fn fit_classifier(
    labeled: &[(&[f64], Feasibility)],
    bounds: &Bounds,
    kind: ClassifierKind,
) -> Result<Box<dyn Classifier>> {
    if labeled.is_empty() {
        return Err(Error::NotEnoughData("classification needs at least 1 sample".into()));
    }
    let xs: Vec<Vec<f64>> = labeled
        .iter()
        .map(|(x, _)| {
            assert_eq!(x.len(), bounds.dim(), "design dimension mismatch");
            bounds.to_unit(x)
        })
        .collect();
    let labels: Vec<bool> = labeled.iter().map(|(_, f)| f.is_feasible()).collect();
    Ok(match kind {
        ClassifierKind::SvmPlatt => Box::new(SvmClassifier::fit(&xs, &labels, bounds.clone(), &SvmConfig::default())),
        ClassifierKind::GpLaplace => Box::new(GpClassifier::fit(
            &xs,
            &labels,
            bounds.clone(),
            &LaplaceClassifierConfig::default(),
        )),
    })
}

/// `ŷ(x)`: the mean of the predictive density.
pub fn expected_objectives(r: &dyn Regressor, x: &[f64]) -> Vec<f64> {
    r.predict(x).mu
}

/// `f̂(x)`: with feasible encoded as 1, the expectation is the feasible-class probability.
pub fn expected_feasibility(c: &dyn Classifier, x: &[f64]) -> f64 {
    c.predict_feasible(x)
}
