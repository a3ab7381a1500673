//! Noise-free Gaussian process regression with a Matérn 5/2 ARD kernel.
//!
//! Inputs live in the unit cube and targets are standardized. The signal
//! amplitude has a closed-form maximum-likelihood value for fixed
//! length-scales, so only the log length-scales are searched.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::{Rng, RngCore};

use super::simplex::{minimize, SimplexOptions};
use crate::types::Bounds;

#[derive(Debug, Clone)]
pub struct GpConfig {
    pub restarts: usize,
    /// Nelder–Mead evaluations per restart, per input dimension.
    pub evals_per_dim: usize,
    pub jitter: f64,
    pub min_length_scale: f64,
    pub max_length_scale: f64,
}

impl Default for GpConfig {
    fn default() -> Self {
        GpConfig {
            restarts: 16,
            evals_per_dim: 20,
            jitter: 1e-10,
            min_length_scale: 1e-2,
            max_length_scale: 1e1,
        }
    }
}

const SQRT5: f64 = 2.236_067_977_499_79;

fn matern52(a: &[f64], b: &[f64], inv_ls: &[f64]) -> f64 {
    let r2: f64 = a
        .iter()
        .zip(b)
        .zip(inv_ls)
        .map(|((x, y), s)| ((x - y) * s).powi(2))
        .sum();
    let r = r2.sqrt();
    (1.0 + SQRT5 * r + 5.0 / 3.0 * r2) * (-SQRT5 * r).exp()
}

fn correlation(xs: &[Vec<f64>], inv_ls: &[f64], jitter: f64) -> DMatrix<f64> {
    let k = xs.len();
    let mut m = DMatrix::zeros(k, k);
    for i in 0..k {
        m[(i, i)] = 1.0 + jitter;
        for j in 0..i {
            let v = matern52(&xs[i], &xs[j], inv_ls);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// Cholesky with the jitter raised tenfold on failure, up to `1e-4`.
fn factor(xs: &[Vec<f64>], inv_ls: &[f64], jitter: f64) -> Option<(Cholesky<f64, Dyn>, f64)> {
    let mut j = jitter;
    while j <= 1e-4 {
        if let Some(c) = Cholesky::new(correlation(xs, inv_ls, j)) {
            return Some((c, j));
        }
        j *= 10.0;
    }
    None
}

/// Profiled negative log marginal likelihood (constants dropped).
fn profiled_nll(xs: &[Vec<f64>], y: &DVector<f64>, inv_ls: &[f64], jitter: f64) -> f64 {
    let Some((chol, _)) = factor(xs, inv_ls, jitter) else {
        return f64::INFINITY;
    };
    let k = y.len() as f64;
    let alpha = chol.solve(y);
    let quad = y.dot(&alpha).max(1e-300);
    let log_det: f64 = chol.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>() * 2.0;
    0.5 * k * (quad / k).ln() + 0.5 * log_det
}

/// One objective's fitted process.
#[derive(Debug, Clone)]
pub struct GaussianProcess {
    bounds: Bounds,
    xs: Vec<Vec<f64>>,
    inv_ls: Vec<f64>,
    chol: Cholesky<f64, Dyn>,
    alpha: DVector<f64>,
    amplitude2: f64,
    y_mean: f64,
    y_scale: f64,
}

impl GaussianProcess {
    /// `xs` are unit-cube inputs; predictions take problem-unit designs.
    pub fn fit(xs: &[Vec<f64>], y: &[f64], bounds: Bounds, cfg: &GpConfig, rng: &mut dyn RngCore) -> Self {
        assert_eq!(xs.len(), y.len());
        assert!(xs.len() >= 2, "a Gaussian process needs two or more points");
        let d = bounds.dim();
        let k = y.len() as f64;
        let y_mean = y.iter().sum::<f64>() / k;
        let var = y.iter().map(|v| (v - y_mean).powi(2)).sum::<f64>() / k;
        let y_scale = if var.sqrt() > 1e-12 * y_mean.abs().max(1.0) { var.sqrt() } else { 1.0 };
        let ys = DVector::from_iterator(y.len(), y.iter().map(|v| (v - y_mean) / y_scale));

        let lo = vec![cfg.min_length_scale.ln(); d];
        let hi = vec![cfg.max_length_scale.ln(); d];
        let objective = |theta: &[f64]| {
            let inv: Vec<f64> = theta.iter().map(|t| (-t).exp()).collect();
            profiled_nll(xs, &ys, &inv, cfg.jitter)
        };
        let opts = SimplexOptions {
            max_evals: cfg.evals_per_dim * d.max(1) + 10,
            f_tol: 1e-6,
            step: 0.15,
        };
        let mut best: Option<(Vec<f64>, f64)> = None;
        for r in 0..cfg.restarts.max(1) {
            let start: Vec<f64> = if r == 0 {
                vec![0.3f64.ln(); d]
            } else {
                (0..d).map(|j| rng.gen_range(lo[j]..hi[j])).collect()
            };
            let res = minimize(objective, &start, &lo, &hi, &opts);
            if best.as_ref().is_none_or(|b| res.f < b.1) {
                best = Some((res.x, res.f));
            }
        }
        let theta = best.expect("at least one restart").0;
        let inv_ls: Vec<f64> = theta.iter().map(|t| (-t).exp()).collect();
        let (chol, _) = factor(xs, &inv_ls, cfg.jitter)
            .or_else(|| factor(xs, &inv_ls, 1e-4))
            .expect("correlation matrix not positive definite even with jitter");
        let alpha = chol.solve(&ys);
        let amplitude2 = (ys.dot(&alpha) / k).max(1e-12);
        GaussianProcess {
            bounds,
            xs: xs.to_vec(),
            inv_ls,
            chol,
            alpha,
            amplitude2,
            y_mean,
            y_scale,
        }
    }

    /// Fitted length-scales in unit-cube coordinates.
    pub fn length_scales(&self) -> Vec<f64> {
        self.inv_ls.iter().map(|s| 1.0 / s).collect()
    }

    /// Prior standard deviation in objective units.
    pub fn prior_std(&self) -> f64 {
        self.amplitude2.sqrt() * self.y_scale
    }

    /// Posterior mean and standard deviation at a problem-unit design.
    pub fn predict(&self, x: &[f64]) -> (f64, f64) {
        let u = self.bounds.to_unit(x);
        let kstar = DVector::from_iterator(
            self.xs.len(),
            self.xs.iter().map(|xi| matern52(xi, &u, &self.inv_ls)),
        );
        let mean = kstar.dot(&self.alpha);
        let v = self
            .chol
            .l_dirty()
            .solve_lower_triangular(&kstar)
            .expect("triangular factor is nonsingular");
        let var = self.amplitude2 * (1.0 - v.norm_squared()).max(0.0);
        (self.y_mean + self.y_scale * mean, self.y_scale * var.sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fit_1d(xs: &[f64], f: impl Fn(f64) -> f64) -> GaussianProcess {
        let b = Bounds::new(&[(0.0, 1.0)]);
        let unit: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
        let y: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        GaussianProcess::fit(&unit, &y, b, &GpConfig::default(), &mut rng)
    }

    #[test]
    fn interpolates_training_points() {
        let xs = [0.0, 0.25, 0.5, 0.75, 1.0];
        let gp = fit_1d(&xs, |x| x * x);
        for &x in &xs {
            let (m, s) = gp.predict(&[x]);
            assert!((m - x * x).abs() < 1e-6, "{m}");
            assert!(s <= 1e-3);
            assert!(s * s <= 1e-6 * gp.prior_std().powi(2));
        }
    }

    #[test]
    fn far_from_data_reverts_to_prior() {
        // inputs scaled to [0, 1] over a wide box, data clustered in a corner
        let b = Bounds::new(&[(0.0, 1000.0)]);
        let xs: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64 * 0.002]).collect();
        let y: Vec<f64> = xs.iter().map(|x| (x[0] * 3000.0).sin()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let gp = GaussianProcess::fit(&xs, &y, b, &GpConfig::default(), &mut rng);
        let ls = gp.length_scales()[0];
        let far = 0.01 + 10.0 * ls;
        if far <= 1.0 {
            let (_, s) = gp.predict(&[far * 1000.0]);
            assert!((s - gp.prior_std()).abs() <= 0.05 * gp.prior_std(), "{s} vs {}", gp.prior_std());
        }
    }

    #[test]
    fn direct_posterior_variance_matches() {
        // k** − k*ᵀ K⁻¹ k* computed with a dense inverse
        let xs = [0.1, 0.4, 0.45, 0.9];
        let gp = fit_1d(&xs, |x| (5.0 * x).sin());
        let inv = gp.inv_ls.clone();
        let pts: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
        let kmat = correlation(&pts, &inv, 1e-10);
        let kinv = kmat.try_inverse().unwrap();
        let q = [0.7];
        let ks = DVector::from_iterator(4, pts.iter().map(|p| matern52(p, &q, &inv)));
        let direct = gp.amplitude2 * (1.0 - (ks.transpose() * &kinv * &ks)[(0, 0)]);
        let (_, s) = gp.predict(&q);
        let got = (s / gp.y_scale).powi(2);
        assert!((got - direct).abs() < 1e-8 * gp.amplitude2);
    }

    #[test]
    fn constant_targets_do_not_break() {
        let gp = fit_1d(&[0.0, 0.5, 1.0], |_| 3.0);
        let (m, s) = gp.predict(&[0.3]);
        assert!((m - 3.0).abs() < 1e-6);
        assert!(s.is_finite());
    }
}
