//! The three-part acquisition function: optimization, constraint finding and
//! exploration utilities mixed by non-negative weights.

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::ehvi::{prob_at_least, EviGrid};
use crate::error::{Error, Result};
use crate::pareto::pareto_subset;
use crate::surrogate::{Classifier, NormalPrediction, Regressor};
use crate::types::Bounds;

/// Floor of the relative volume `Γ`.
pub const GAMMA_VOLUME_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcquisitionWeights {
    pub opt: f64,
    pub con: f64,
    pub exp: f64,
}

impl AcquisitionWeights {
    /// Panics on a negative weight or an all-zero vector.
    pub fn new(opt: f64, con: f64, exp: f64) -> Self {
        let w = AcquisitionWeights { opt, con, exp };
        w.validate();
        w
    }

    fn validate(&self) {
        assert!(
            self.opt >= 0.0 && self.con >= 0.0 && self.exp >= 0.0,
            "acquisition weights must be non-negative"
        );
        assert!(self.l1() > 0.0, "acquisition weights must not all be zero");
    }

    pub fn l1(&self) -> f64 {
        self.opt + self.con + self.exp
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcquisitionConfig {
    pub weights: AcquisitionWeights,
    pub gamma: f64,
    pub sigma_ref: f64,
    pub epsilon: f64,
    pub reference: Vec<f64>,
}

impl AcquisitionConfig {
    pub fn validate(&self) -> Result<()> {
        let w = &self.weights;
        if !(w.opt >= 0.0 && w.con >= 0.0 && w.exp >= 0.0) || w.l1() <= 0.0 {
            return Err(Error::InvalidConfig("weights must be non-negative with a positive sum".into()));
        }
        if !(self.gamma > 0.0) {
            return Err(Error::InvalidConfig("gamma must be positive".into()));
        }
        if !(self.sigma_ref > 0.0) {
            return Err(Error::InvalidConfig("sigma_ref must be positive".into()));
        }
        if !(self.epsilon >= 0.0) {
            return Err(Error::InvalidConfig("epsilon must be non-negative".into()));
        }
        if self.reference.is_empty() || self.reference.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("reference point must be finite".into()));
        }
        Ok(())
    }
}

/// `Γ`: product over objectives of the largest distance of a Pareto point
/// to the reference point, floored at [`GAMMA_VOLUME_FLOOR`].
pub fn relative_volume_gamma<V: AsRef<[f64]>>(objectives: &[V], reference: &[f64]) -> Result<f64> {
    let front = pareto_subset(objectives);
    if front.is_empty() {
        return Err(Error::EmptyParetoSet);
    }
    let prod: f64 = (0..reference.len())
        .map(|i| {
            front
                .iter()
                .map(|y| reference[i] - y[i])
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .product();
    Ok(prod.max(GAMMA_VOLUME_FLOOR))
}

/// Probability that a draw from `pred` is dominated by none of `front`,
/// taking the events for distinct front points as independent.
pub fn p_nondominated<V: AsRef<[f64]>>(front: &[V], pred: &NormalPrediction) -> f64 {
    front
        .iter()
        .map(|y| {
            let y = y.as_ref();
            assert_eq!(y.len(), pred.dim(), "objective dimension mismatch");
            let dominated: f64 = y
                .iter()
                .zip(pred.mu.iter().zip(&pred.sigma))
                .map(|(&yi, (&m, &s))| prob_at_least(yi, m, s))
                .product();
            1.0 - dominated
        })
        .product::<f64>()
        .clamp(0.0, 1.0)
}

/// Shannon entropy of a binary event in bits.
pub fn binary_entropy(p: f64) -> f64 {
    assert!((0.0..=1.0).contains(&p), "probability {p} outside [0, 1]");
    let h = |q: f64| if q > 0.0 { -q * q.log2() } else { 0.0 };
    (h(p) + h(1.0 - p)).clamp(0.0, 1.0)
}

/// Exponential-kernel feature distance on unit-scaled designs.
pub fn distance_metric(x1: &[f64], x2: &[f64], bounds: &Bounds, epsilon: f64) -> f64 {
    let (u1, u2) = (bounds.to_unit(x1), bounds.to_unit(x2));
    unit_distance(&u1, &u2, epsilon)
}

fn unit_distance(u1: &[f64], u2: &[f64], epsilon: f64) -> f64 {
    assert_eq!(u1.len(), u2.len(), "design dimension mismatch");
    let d2: f64 = u1.iter().zip(u2).map(|(a, b)| (a - b).powi(2)).sum();
    -(-epsilon * d2).exp_m1()
}

/// Largest value of [`distance_metric`] on a `d`-dimensional box: `1 − exp(−ε d)`.
pub fn metric_diameter(dim: usize, epsilon: f64) -> f64 {
    -(-epsilon * dim as f64).exp_m1()
}

/// Diameter estimate for an arbitrary metric from all corner pairs plus random pairs.
pub fn sampled_diameter(
    metric: impl Fn(&[f64], &[f64]) -> f64,
    bounds: &Bounds,
    random_pairs: usize,
    rng: &mut dyn RngCore,
) -> f64 {
    let d = bounds.dim();
    assert!(d < 20, "too many corners to enumerate");
    let corner = |mask: usize| -> Vec<f64> {
        (0..d)
            .map(|j| if mask >> j & 1 == 1 { bounds.upper()[j] } else { bounds.lower()[j] })
            .collect()
    };
    let n_corners = 1usize << d;
    let mut best = 0.0f64;
    for m in 0..n_corners {
        best = best.max(metric(&corner(m), &corner(n_corners - 1 - m)));
    }
    for _ in 0..random_pairs {
        let a: Vec<f64> = bounds.intervals().iter().map(|&(l, h)| rng.gen_range(l..=h)).collect();
        let b: Vec<f64> = bounds.intervals().iter().map(|&(l, h)| rng.gen_range(l..=h)).collect();
        best = best.max(metric(&a, &b));
    }
    best
}

/// Normalized repulsion: the distance from `x` to its nearest explored
/// design over the design-space diameter. `0` when `ε = 0`.
pub fn repulsion<V: AsRef<[f64]>>(explored: &[V], x: &[f64], bounds: &Bounds, epsilon: f64) -> f64 {
    assert!(!explored.is_empty(), "repulsion needs at least one explored design");
    assert!(epsilon >= 0.0, "epsilon must be non-negative");
    let unit: Vec<Vec<f64>> = explored.iter().map(|e| bounds.to_unit(e.as_ref())).collect();
    unit_repulsion(&unit, &bounds.to_unit(x), epsilon)
}

fn unit_repulsion(explored_unit: &[Vec<f64>], u: &[f64], epsilon: f64) -> f64 {
    if epsilon == 0.0 || explored_unit.is_empty() {
        return 0.0;
    }
    let nearest = explored_unit
        .iter()
        .map(|e| unit_distance(u, e, epsilon))
        .fold(f64::INFINITY, f64::min);
    (nearest / metric_diameter(u.len(), epsilon)).clamp(0.0, 1.0)
}

/// `p_f · (1 − exp(−γ · EVI / Γ))`.
pub fn optimization_utility(p_feasible: f64, evi: f64, gamma: f64, volume: f64) -> f64 {
    p_feasible * -(-gamma * evi.max(0.0) / volume).exp_m1()
}

/// `p_⊁ · S(p_f)`.
pub fn constraint_utility(p_nd: f64, p_feasible: f64) -> f64 {
    p_nd * binary_entropy(p_feasible)
}

/// `p_⊁ · R`.
pub fn explorative_utility(p_nd: f64, repulsion: f64) -> f64 {
    p_nd * repulsion
}

/// Weighted mean of the three utilities.
pub fn combine(weights: &AcquisitionWeights, u: &Utilities) -> f64 {
    weights.validate();
    (weights.opt * u.opt + weights.con * u.con + weights.exp * u.exp) / weights.l1()
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Utilities {
    pub opt: f64,
    pub con: f64,
    pub exp: f64,
}

/// Acquisition function bound to fitted models and a (possibly augmented) dataset.
///
/// With no Pareto set or no regressor, `U_opt = 0` and `p_⊁ = 1`.
pub struct Acquisition<'a> {
    cfg: &'a AcquisitionConfig,
    bounds: &'a Bounds,
    regressor: Option<&'a dyn Regressor>,
    classifier: &'a dyn Classifier,
    explored_unit: Vec<Vec<f64>>,
    front: Vec<Vec<f64>>,
    evi: Option<(EviGrid, f64)>,
}

impl<'a> Acquisition<'a> {
    pub fn new<X: AsRef<[f64]>, Y: AsRef<[f64]>>(
        cfg: &'a AcquisitionConfig,
        bounds: &'a Bounds,
        regressor: Option<&'a dyn Regressor>,
        classifier: &'a dyn Classifier,
        explored: &[X],
        feasible_objectives: &[Y],
    ) -> Self {
        cfg.weights.validate();
        let front = if regressor.is_some() { pareto_subset(feasible_objectives) } else { Vec::new() };
        let evi = if cfg.weights.opt > 0.0 && !front.is_empty() {
            let volume = relative_volume_gamma(&front, &cfg.reference).expect("front is non-empty");
            Some((EviGrid::new(&front, &cfg.reference), volume))
        } else {
            None
        };
        Acquisition {
            cfg,
            bounds,
            regressor,
            classifier,
            explored_unit: explored.iter().map(|x| bounds.to_unit(x.as_ref())).collect(),
            front,
            evi,
        }
    }

    /// Pareto set of the feasible objectives in use (empty under the fallback).
    pub fn front(&self) -> &[Vec<f64>] {
        &self.front
    }

    fn prediction(&self, x: &[f64]) -> Option<NormalPrediction> {
        match self.regressor {
            Some(r) if !self.front.is_empty() => Some(r.predict(x)),
            _ => None,
        }
    }

    fn p_nd(&self, pred: Option<&NormalPrediction>) -> f64 {
        pred.map_or(1.0, |p| p_nondominated(&self.front, p))
    }

    fn repulsion_of(&self, x: &[f64]) -> f64 {
        unit_repulsion(&self.explored_unit, &self.bounds.to_unit(x), self.cfg.epsilon)
    }

    /// All three utilities; components with zero weight are left at 0.
    pub fn utilities(&self, x: &[f64]) -> Utilities {
        let w = &self.cfg.weights;
        let pred = self.prediction(x);
        let mut u = Utilities::default();
        let need_pf = w.opt > 0.0 || w.con > 0.0;
        let p_f = if need_pf { self.classifier.predict_feasible(x).clamp(0.0, 1.0) } else { 0.0 };
        let p_nd = if w.con > 0.0 || w.exp > 0.0 { self.p_nd(pred.as_ref()) } else { 1.0 };
        if w.opt > 0.0 {
            if let (Some((grid, volume)), Some(p)) = (&self.evi, &pred) {
                let evi = grid.truncated(p, self.cfg.sigma_ref);
                u.opt = optimization_utility(p_f, evi, self.cfg.gamma, *volume);
            }
        }
        if w.con > 0.0 {
            u.con = constraint_utility(p_nd, p_f);
        }
        if w.exp > 0.0 {
            u.exp = explorative_utility(p_nd, self.repulsion_of(x));
        }
        u
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        combine(&self.cfg.weights, &self.utilities(x)).clamp(0.0, 1.0)
    }
}
