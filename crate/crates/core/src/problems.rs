//! The six constrained two-objective benchmark problems, their default
//! optimizer settings and numerically computed true-front volumes.

use std::f64::consts::FRAC_1_SQRT_2;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::acquisition::{AcquisitionConfig, AcquisitionWeights};
use crate::error::{Error, Result};
use crate::pareto::{hypervolume, pareto_indices};
use crate::surrogate::RegressorKind;
use crate::types::{Bounds, Sample};

/// A black box: maps a design to objectives (when feasible) and a feasibility label.
pub trait BlackBox {
    fn bounds(&self) -> &Bounds;

    fn n_objectives(&self) -> usize;

    /// Must be deterministic and free of side effects.
    fn evaluate(&self, x: &[f64]) -> Result<Sample>;
}

type VecFn = fn(&[f64]) -> Vec<f64>;

#[derive(Debug, Clone)]
pub struct BenchmarkProblem {
    pub name: &'static str,
    pub bounds: Bounds,
    /// Domain of the initial random samples.
    pub initial_domain: Bounds,
    pub n_initial: usize,
    pub n_objectives: usize,
    pub n_constraints: usize,
    pub reference: Vec<f64>,
    pub weights: AcquisitionWeights,
    pub epsilon: f64,
    pub gamma: f64,
    pub sigma_ref: f64,
    pub regressor: RegressorKind,
    objectives: VecFn,
    constraints: VecFn,
    feasible: fn(&[f64]) -> bool,
}

fn all_satisfied(c: &[f64]) -> bool {
    c.iter().all(|&v| v <= 0.0)
}

/// Heaviside step with `Θ(0) = 1/2`.
fn step(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        0.0
    } else {
        0.5
    }
}

fn bnh_y(x: &[f64]) -> Vec<f64> {
    vec![
        4.0 * x[0] * x[0] + 4.0 * x[1] * x[1],
        (x[0] - 5.0).powi(2) + (x[1] - 5.0).powi(2),
    ]
}

fn bnh_c(x: &[f64]) -> Vec<f64> {
    vec![
        (x[0] - 5.0).powi(2) + x[1] * x[1] - 25.0,
        -(x[0] - 8.0).powi(2) - (x[1] + 3.0).powi(2) + 7.7,
    ]
}

fn srn_y(x: &[f64]) -> Vec<f64> {
    vec![
        2.0 + (x[0] - 2.0).powi(2) + (x[1] - 1.0).powi(2),
        9.0 * x[0] - (x[1] - 1.0).powi(2),
    ]
}

fn srn_c(x: &[f64]) -> Vec<f64> {
    vec![x[0] * x[0] + x[1] * x[1] - 255.0, x[0] - 3.0 * x[1] + 10.0]
}

fn osy_y(x: &[f64]) -> Vec<f64> {
    vec![
        -25.0 * (x[0] - 2.0).powi(2)
            - (x[1] - 2.0).powi(2)
            - (x[2] - 1.0).powi(2)
            - (x[3] - 4.0).powi(2)
            - (x[4] - 1.0).powi(2),
        x.iter().map(|v| v * v).sum(),
    ]
}

fn osy_c(x: &[f64]) -> Vec<f64> {
    vec![
        -x[0] - x[1] + 2.0,
        x[0] + x[1] - 6.0,
        x[1] - x[0] - 2.0,
        x[0] - 3.0 * x[1] - 2.0,
        (x[2] - 3.0).powi(2) + x[3] - 4.0,
        -(x[4] - 3.0).powi(2) - x[5] + 4.0,
    ]
}

fn cex_y(x: &[f64]) -> Vec<f64> {
    vec![x[0], (x[1] + 1.0) / x[0]]
}

fn cex_c(x: &[f64]) -> Vec<f64> {
    vec![
        -9.0 * x[0] - x[1] + 6.0,
        -9.0 * x[0] + x[1] + 1.0,
        0.8 - x[0],
        x[0] - 2.0 / 3.0,
    ]
}

/// `c3` and `c4` exclude each other, so they act as alternatives: the design
/// must avoid the band `2/3 < x1 < 0.8`.
fn cex_feasible(x: &[f64]) -> bool {
    let c = cex_c(x);
    c[0] <= 0.0 && c[1] <= 0.0 && (c[2] <= 0.0 || c[3] <= 0.0)
}

fn fff_y(x: &[f64]) -> Vec<f64> {
    let s = FRAC_1_SQRT_2;
    vec![
        1.0 - (-(x[0] - s).powi(2) - (x[1] - s).powi(2)).exp(),
        1.0 - (-(x[0] + s).powi(2) - (x[1] + s).powi(2)).exp(),
    ]
}

fn fff_c(x: &[f64]) -> Vec<f64> {
    let y = fff_y(x);
    vec![
        x[0] * x[0] + x[1] * x[1] - 0.5,
        (y[0] - 0.4).min(0.6 - y[0]),
        (y[1] - 0.4).min(0.6 - y[1]),
    ]
}

fn cir_y(x: &[f64]) -> Vec<f64> {
    vec![
        -(0.5 * step(x[1] - x[0]) + x[0]).powi(2),
        -(0.5 * step(x[0] - x[1]) + x[1]).powi(2),
    ]
}

fn cir_c(x: &[f64]) -> Vec<f64> {
    vec![((x[0] - 1.0).powi(2) + x[1] * x[1] - 0.25).min(x[0] * x[0] + (x[1] - 1.0).powi(2) - 0.25)]
}

fn default_feasible_bnh(x: &[f64]) -> bool {
    all_satisfied(&bnh_c(x))
}
fn default_feasible_srn(x: &[f64]) -> bool {
    all_satisfied(&srn_c(x))
}
fn default_feasible_osy(x: &[f64]) -> bool {
    all_satisfied(&osy_c(x))
}
fn default_feasible_fff(x: &[f64]) -> bool {
    all_satisfied(&fff_c(x))
}
fn default_feasible_cir(x: &[f64]) -> bool {
    all_satisfied(&cir_c(x))
}

const NAMES: [&str; 6] = ["BNH", "SRN", "OSY", "CEX", "FFF", "CIR"];

/// Names of the registered problems.
pub fn list_problems() -> Vec<&'static str> {
    NAMES.to_vec()
}

/// Case-insensitive lookup.
pub fn lookup(name: &str) -> Result<BenchmarkProblem> {
    let upper = name.to_ascii_uppercase();
    let p = match upper.as_str() {
        "BNH" => BenchmarkProblem {
            name: "BNH",
            bounds: Bounds::new(&[(-5.0, 15.0), (-10.0, 10.0)]),
            initial_domain: Bounds::new(&[(0.0, 5.0), (-5.0, 0.0)]),
            n_initial: 10,
            n_objectives: 2,
            n_constraints: 2,
            reference: vec![200.0, 50.0],
            weights: AcquisitionWeights::new(0.0, 1.0, 0.0),
            epsilon: 0.0,
            gamma: 10.0,
            sigma_ref: 1.0,
            regressor: RegressorKind::GpMatern,
            objectives: bnh_y,
            constraints: bnh_c,
            feasible: default_feasible_bnh,
        },
        "SRN" => BenchmarkProblem {
            name: "SRN",
            bounds: Bounds::new(&[(-20.0, 20.0), (-20.0, 20.0)]),
            initial_domain: Bounds::new(&[(0.0, 20.0), (0.0, 20.0)]),
            n_initial: 10,
            n_objectives: 2,
            n_constraints: 2,
            reference: vec![250.0, 50.0],
            weights: AcquisitionWeights::new(0.0, 1.0, 0.0),
            epsilon: 0.0,
            gamma: 10.0,
            sigma_ref: 1.0,
            regressor: RegressorKind::GpMatern,
            objectives: srn_y,
            constraints: srn_c,
            feasible: default_feasible_srn,
        },
        "OSY" => BenchmarkProblem {
            name: "OSY",
            bounds: Bounds::new(&[(0.0, 10.0), (0.0, 10.0), (1.0, 5.0), (0.0, 6.0), (1.0, 5.0), (0.0, 10.0)]),
            initial_domain: Bounds::new(&[(2.0, 4.0), (0.0, 3.0), (2.0, 4.0), (0.0, 2.0), (1.0, 2.0), (0.0, 10.0)]),
            n_initial: 100,
            n_objectives: 2,
            n_constraints: 6,
            reference: vec![0.0, 80.0],
            weights: AcquisitionWeights::new(0.0, 1.0, 0.0),
            epsilon: 0.0,
            gamma: 200.0,
            sigma_ref: 5.0,
            regressor: RegressorKind::BayesRidgePoly,
            objectives: osy_y,
            constraints: osy_c,
            feasible: default_feasible_osy,
        },
        "CEX" => BenchmarkProblem {
            name: "CEX",
            bounds: Bounds::new(&[(0.1, 1.0), (0.0, 5.0)]),
            initial_domain: Bounds::new(&[(0.1, 1.0), (0.5, 2.5)]),
            n_initial: 10,
            n_objectives: 2,
            n_constraints: 4,
            reference: vec![1.0, 9.0],
            weights: AcquisitionWeights::new(1.0, 3.0, 1.0),
            epsilon: 1.0,
            gamma: 1.0,
            sigma_ref: 1.5,
            regressor: RegressorKind::BayesRidgePoly,
            objectives: cex_y,
            constraints: cex_c,
            feasible: cex_feasible,
        },
        "FFF" => BenchmarkProblem {
            name: "FFF",
            bounds: Bounds::new(&[(-1.0, 1.0), (-1.0, 1.0)]),
            initial_domain: Bounds::new(&[(0.25, 1.0), (0.25, 1.0)]),
            n_initial: 10,
            n_objectives: 2,
            n_constraints: 3,
            reference: vec![1.0, 1.0],
            weights: AcquisitionWeights::new(1.0, 2.0, 1.0),
            epsilon: 1.0,
            gamma: 10.0,
            sigma_ref: 1.0,
            regressor: RegressorKind::GpMatern,
            objectives: fff_y,
            constraints: fff_c,
            feasible: default_feasible_fff,
        },
        "CIR" => BenchmarkProblem {
            name: "CIR",
            bounds: Bounds::new(&[(-2.0, 2.0), (-2.0, 2.0)]),
            initial_domain: Bounds::new(&[(0.5, 1.5), (-0.5, 0.5)]),
            n_initial: 10,
            n_objectives: 2,
            n_constraints: 1,
            reference: vec![0.0, 0.0],
            weights: AcquisitionWeights::new(1.0, 1.0, 1.0),
            epsilon: 1.0,
            gamma: 1.0,
            sigma_ref: 1.0,
            regressor: RegressorKind::GpMatern,
            objectives: cir_y,
            constraints: cir_c,
            feasible: default_feasible_cir,
        },
        _ => return Err(Error::UnknownProblem(name.to_string())),
    };
    Ok(p)
}

impl BenchmarkProblem {
    pub fn dim(&self) -> usize {
        self.bounds.dim()
    }

    /// The problem's acquisition parameters.
    pub fn default_acquisition(&self) -> AcquisitionConfig {
        AcquisitionConfig {
            weights: self.weights,
            gamma: self.gamma,
            sigma_ref: self.sigma_ref,
            epsilon: self.epsilon,
            reference: self.reference.clone(),
        }
    }

    pub fn objectives(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim(), "design dimension mismatch");
        (self.objectives)(x)
    }

    /// Raw constraint values; `c_i <= 0` means satisfied.
    pub fn constraints(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim(), "design dimension mismatch");
        (self.constraints)(x)
    }

    pub fn is_feasible(&self, x: &[f64]) -> bool {
        assert_eq!(x.len(), self.dim(), "design dimension mismatch");
        (self.feasible)(x)
    }

    /// Evaluates a design; panics when `x` is outside the design space.
    pub fn evaluate_sample(&self, x: &[f64]) -> Sample {
        assert!(self.bounds.contains(x), "design {x:?} outside the bounds of {}", self.name);
        let y = self.objectives(x);
        if self.is_feasible(x) {
            Sample::feasible(x.to_vec(), y)
        } else {
            Sample::infeasible(x.to_vec())
        }
    }
}

impl BlackBox for BenchmarkProblem {
    fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    fn n_objectives(&self) -> usize {
        self.n_objectives
    }

    fn evaluate(&self, x: &[f64]) -> Result<Sample> {
        Ok(self.evaluate_sample(x))
    }
}

/// Seed used for the reference-front sampling unless stated otherwise.
pub const REFERENCE_SEED: u64 = 20_240_101;

/// Default sampling resolution: `10^6` designs, `10^7` for the 6-D OSY.
pub fn default_resolution(problem: &BenchmarkProblem) -> usize {
    if problem.dim() > 2 {
        10_000_000
    } else {
        1_000_000
    }
}

/// Hypervolume of a densely sampled approximation of the true Pareto front.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrueFrontReference {
    pub problem: String,
    pub seed: u64,
    pub resolution: usize,
    pub volume: f64,
    pub front_size: usize,
    #[serde(skip)]
    pub front: Vec<Vec<f64>>,
}

fn sample_reference(problem: &BenchmarkProblem, resolution: usize, seed: u64) -> TrueFrontReference {
    assert!(resolution >= 1, "resolution must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let intervals = problem.bounds.intervals();
    let mut x = vec![0.0; problem.dim()];
    // keep only the running non-dominated set to bound memory
    let mut pool: Vec<Vec<f64>> = Vec::new();
    let flush_at = 1 << 16;
    for _ in 0..resolution {
        for (v, &(lo, hi)) in x.iter_mut().zip(&intervals) {
            *v = rng.gen_range(lo..=hi);
        }
        if !problem.is_feasible(&x) {
            continue;
        }
        let y = problem.objectives(&x);
        if y.iter().zip(&problem.reference).all(|(a, r)| a < r) {
            pool.push(y);
        }
        if pool.len() >= flush_at {
            let keep = pareto_indices(&pool);
            pool = keep.into_iter().map(|i| pool[i].clone()).collect();
        }
    }
    let front: Vec<Vec<f64>> = pareto_indices(&pool).into_iter().map(|i| pool[i].clone()).collect();
    TrueFrontReference {
        problem: problem.name.to_string(),
        seed,
        resolution,
        volume: hypervolume(&front, &problem.reference),
        front_size: front.len(),
        front,
    }
}

fn cache_file(dir: &Path, problem: &str, resolution: usize, seed: u64) -> PathBuf {
    dir.join(format!("{problem}-{resolution}-{seed}.json"))
}

/// Reference volume from `resolution` uniform designs over the full design space.
///
/// With a cache directory the result is read from, or written to,
/// `<dir>/<problem>-<resolution>-<seed>.json`; the front itself is not cached.
pub fn reference_front_volume(
    problem: &BenchmarkProblem,
    resolution: usize,
    seed: u64,
    cache_dir: Option<&Path>,
) -> Result<TrueFrontReference> {
    if let Some(dir) = cache_dir {
        let path = cache_file(dir, problem.name, resolution, seed);
        if let Ok(text) = std::fs::read_to_string(&path) {
            if let Ok(r) = serde_json::from_str::<TrueFrontReference>(&text) {
                if r.problem == problem.name && r.seed == seed && r.resolution == resolution && r.volume > 0.0 {
                    return Ok(r);
                }
            }
        }
        let r = sample_reference(problem, resolution, seed);
        std::fs::create_dir_all(dir)?;
        let tmp = path.with_extension("json.tmp");
        std::fs::write(&tmp, serde_json::to_string_pretty(&r)?)?;
        std::fs::rename(&tmp, &path)?;
        return Ok(r);
    }
    Ok(sample_reference(problem, resolution, seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_has_six_problems() {
        let names = list_problems();
        assert_eq!(names.len(), 6);
        for n in names {
            let p = lookup(n).unwrap();
            assert!(p.bounds.encloses(&p.initial_domain), "{n}");
            assert_eq!(p.constraints(p.bounds.lower()).len(), p.n_constraints);
            assert_eq!(p.objectives(p.bounds.lower()).len(), p.n_objectives);
        }
        assert!(matches!(lookup("XXX"), Err(Error::UnknownProblem(_))));
    }

    #[test]
    fn table_entries() {
        let bnh = lookup("BNH").unwrap();
        assert_eq!((bnh.dim(), bnh.n_objectives, bnh.n_constraints), (2, 2, 2));
        assert_eq!(bnh.weights, AcquisitionWeights::new(0.0, 1.0, 0.0));
        assert_eq!((bnh.epsilon, bnh.gamma, bnh.sigma_ref), (0.0, 10.0, 1.0));
        let osy = lookup("osy").unwrap();
        assert_eq!((osy.dim(), osy.n_constraints), (6, 6));
        assert_eq!(osy.reference, vec![0.0, 80.0]);
        assert_eq!((osy.gamma, osy.sigma_ref, osy.n_initial), (200.0, 5.0, 100));
        let cex = lookup("CEX").unwrap();
        assert_eq!(cex.weights, AcquisitionWeights::new(1.0, 3.0, 1.0));
        assert_eq!((cex.epsilon, cex.gamma, cex.sigma_ref), (1.0, 1.0, 1.5));
        assert_eq!(cex.initial_domain.intervals()[1], (0.5, 2.5));
        let cir = lookup("CIR").unwrap();
        assert_eq!(cir.weights, AcquisitionWeights::new(1.0, 1.0, 1.0));
        assert_eq!((cir.epsilon, cir.gamma, cir.sigma_ref), (1.0, 1.0, 1.0));
    }

    #[test]
    fn bnh_hand_values() {
        let p = lookup("BNH").unwrap();
        let s = p.evaluate_sample(&[0.0, 0.0]);
        assert_eq!(s.objectives().unwrap(), &[0.0, 50.0]);
        let c = p.constraints(&[0.0, 0.0]);
        assert_eq!(c[0], 0.0);
        assert!((c[1] + 65.3).abs() < 1e-12);
        let s = p.evaluate_sample(&[5.0, 0.0]);
        assert_eq!(s.objectives().unwrap(), &[100.0, 25.0]);
        let c = p.constraints(&[5.0, 0.0]);
        assert_eq!(c[0], -25.0);
        assert!((c[1] + 10.3).abs() < 1e-12);
    }

    #[test]
    fn fff_hand_values() {
        let p = lookup("FFF").unwrap();
        let x = [FRAC_1_SQRT_2, FRAC_1_SQRT_2];
        assert!(p.objectives(&x)[0].abs() < 1e-15);
        let c = p.constraints(&x);
        assert!((c[0] - 0.5).abs() < 1e-12);
        assert!((c[1] + 0.4).abs() < 1e-12);
        assert!(p.evaluate_sample(&x).objectives().is_none());
    }

    #[test]
    fn cex_band_is_infeasible() {
        let p = lookup("CEX").unwrap();
        assert!(p.is_feasible(&[0.5, 2.0]));
        assert!(p.is_feasible(&[0.9, 2.0]));
        assert!(!p.is_feasible(&[0.7, 2.0]));
    }

    #[test]
    fn cir_diagonal_uses_half_step() {
        let p = lookup("CIR").unwrap();
        assert_eq!(p.objectives(&[0.5, 0.5]), vec![-0.5625, -0.5625]);
        assert_eq!(p.objectives(&[1.0, 0.0]), vec![-1.0, -0.25]);
    }

    #[test]
    #[should_panic]
    fn out_of_bounds_design_panics() {
        lookup("BNH").unwrap().evaluate_sample(&[100.0, 0.0]);
    }

    #[test]
    fn initial_domains_contain_feasible_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in list_problems() {
            let p = lookup(n).unwrap();
            let found = (0..10_000).any(|_| {
                let x: Vec<f64> = p.initial_domain.intervals().iter().map(|&(l, h)| rng.gen_range(l..=h)).collect();
                p.is_feasible(&x)
            });
            assert!(found, "{n}");
        }
    }

    #[test]
    fn reference_volume_is_reproducible_and_cached() {
        let p = lookup("CIR").unwrap();
        let dir = tempfile::tempdir().unwrap();
        let a = reference_front_volume(&p, 100_000, 3, Some(dir.path())).unwrap();
        assert!(a.volume > 0.0);
        let b = reference_front_volume(&p, 100_000, 3, Some(dir.path())).unwrap();
        assert_eq!(a.volume, b.volume);
        let c = reference_front_volume(&p, 100_000, 3, None).unwrap();
        assert_eq!(a.volume, c.volume);
    }
}
