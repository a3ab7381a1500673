//! Bayesian ridge regression on polynomial features.
//!
//! Weight and noise precisions are set by evidence maximization with the
//! usual MacKay fixed-point updates under weak Gamma hyperpriors.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::types::Bounds;

#[derive(Debug, Clone)]
pub struct RidgeConfig {
    pub degree: u32,
    pub max_iter: usize,
    pub tol: f64,
    /// Gamma hyperprior shape and rate for both precisions.
    pub hyper_shape: f64,
    pub hyper_rate: f64,
}

impl Default for RidgeConfig {
    fn default() -> Self {
        RidgeConfig {
            degree: 3,
            max_iter: 100,
            tol: 1e-6,
            hyper_shape: 1e-6,
            hyper_rate: 1e-6,
        }
    }
}

/// All exponent vectors of total degree `1..=degree` in `d` variables.
fn monomials(d: usize, degree: u32) -> Vec<Vec<u32>> {
    fn rec(j: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if j == cur.len() {
            if cur.iter().sum::<u32>() > 0 {
                out.push(cur.clone());
            }
            return;
        }
        for e in 0..=left {
            cur[j] = e;
            rec(j + 1, left - e, cur, out);
        }
        cur[j] = 0;
    }
    let mut out = Vec::new();
    rec(0, degree, &mut vec![0; d], &mut out);
    out
}

#[derive(Debug, Clone)]
pub struct BayesianRidge {
    bounds: Bounds,
    exponents: Vec<Vec<u32>>,
    feature_mean: DVector<f64>,
    coef: DVector<f64>,
    /// Posterior weight covariance.
    sigma: DMatrix<f64>,
    noise_precision: f64,
    y_mean: f64,
    y_scale: f64,
}

impl BayesianRidge {
    fn features(exponents: &[Vec<u32>], u: &[f64]) -> DVector<f64> {
        // centred inputs in [-1, 1] keep the monomials well scaled
        let c: Vec<f64> = u.iter().map(|v| 2.0 * v - 1.0).collect();
        DVector::from_iterator(
            exponents.len(),
            exponents
                .iter()
                .map(|e| e.iter().zip(&c).map(|(&p, &v)| v.powi(p as i32)).product()),
        )
    }

    /// `xs` are unit-cube inputs; predictions take problem-unit designs.
    pub fn fit(xs: &[Vec<f64>], y: &[f64], bounds: Bounds, cfg: &RidgeConfig) -> Self {
        assert_eq!(xs.len(), y.len());
        assert!(!xs.is_empty());
        let k = y.len();
        let exponents = monomials(bounds.dim(), cfg.degree);
        let p = exponents.len();
        let mut phi = DMatrix::zeros(k, p);
        for (i, x) in xs.iter().enumerate() {
            phi.set_row(i, &Self::features(&exponents, x).transpose());
        }
        let feature_mean = DVector::from_iterator(p, (0..p).map(|j| phi.column(j).mean()));
        for j in 0..p {
            let m = feature_mean[j];
            phi.column_mut(j).add_scalar_mut(-m);
        }
        let y_mean = y.iter().sum::<f64>() / k as f64;
        let var = y.iter().map(|v| (v - y_mean).powi(2)).sum::<f64>() / k as f64;
        let y_scale = if var.sqrt() > 1e-12 * y_mean.abs().max(1.0) { var.sqrt() } else { 1.0 };
        let ys = DVector::from_iterator(k, y.iter().map(|v| (v - y_mean) / y_scale));

        let eig = SymmetricEigen::new(phi.transpose() * &phi);
        let evals = eig.eigenvalues.map(|e| e.max(0.0));
        let v = eig.eigenvectors;
        let vt_phity = v.transpose() * (phi.transpose() * &ys);
        let solve = |alpha: f64, lambda: f64| -> DVector<f64> {
            let scaled = DVector::from_iterator(
                p,
                (0..p).map(|j| vt_phity[j] / (evals[j] + lambda / alpha)),
            );
            &v * scaled
        };

        let (a1, a2) = (cfg.hyper_shape, cfg.hyper_rate);
        let mut alpha = 1.0 / (ys.variance() + f64::EPSILON);
        let mut lambda = 1.0;
        let mut coef = solve(alpha, lambda);
        for _ in 0..cfg.max_iter {
            let resid = (&ys - &phi * &coef).norm_squared();
            let gamma: f64 = evals.iter().map(|&e| alpha * e / (lambda + alpha * e)).sum();
            lambda = (gamma + 2.0 * a1) / (coef.norm_squared() + 2.0 * a2);
            alpha = (k as f64 - gamma + 2.0 * a1) / (resid + 2.0 * a2);
            let next = solve(alpha, lambda);
            let change = (&next - &coef).abs().sum();
            coef = next;
            if change < cfg.tol {
                break;
            }
        }
        let inv_diag = DMatrix::from_diagonal(&evals.map(|e| 1.0 / (lambda + alpha * e)));
        let sigma = &v * inv_diag * v.transpose();
        BayesianRidge {
            bounds,
            exponents,
            feature_mean,
            coef,
            sigma,
            noise_precision: alpha,
            y_mean,
            y_scale,
        }
    }

    pub fn n_features(&self) -> usize {
        self.exponents.len()
    }

    /// Posterior predictive mean and standard deviation, noise included.
    pub fn predict(&self, x: &[f64]) -> (f64, f64) {
        let u = self.bounds.to_unit(x);
        let f = Self::features(&self.exponents, &u) - &self.feature_mean;
        let mean = f.dot(&self.coef);
        let var = 1.0 / self.noise_precision + f.dot(&(&self.sigma * &f)).max(0.0);
        (self.y_mean + self.y_scale * mean, self.y_scale * var.sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn feature_count_includes_cross_terms() {
        // C(d + 3, 3) − 1 monomials of degree 1..=3
        assert_eq!(monomials(2, 3).len(), 9);
        assert_eq!(monomials(6, 3).len(), 83);
    }

    #[test]
    fn recovers_quadratic_on_holdout() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let b = Bounds::new(&[(-2.0, 3.0), (0.0, 4.0)]);
        let f = |x: &[f64]| 1.5 * x[0] * x[0] - 2.0 * x[0] * x[1] + 0.5 * x[1] + 3.0;
        let xs: Vec<Vec<f64>> = (0..20)
            .map(|_| vec![rng.gen_range(-2.0..3.0), rng.gen_range(0.0..4.0)])
            .collect();
        let unit: Vec<Vec<f64>> = xs.iter().map(|x| b.to_unit(x)).collect();
        let y: Vec<f64> = xs.iter().map(|x| f(x)).collect();
        let m = BayesianRidge::fit(&unit, &y, b, &RidgeConfig::default());
        let test: Vec<Vec<f64>> = (0..50)
            .map(|_| vec![rng.gen_range(-2.0..3.0), rng.gen_range(0.0..4.0)])
            .collect();
        let truth: Vec<f64> = test.iter().map(|x| f(x)).collect();
        let range = truth.iter().cloned().fold(f64::MIN, f64::max) - truth.iter().cloned().fold(f64::MAX, f64::min);
        let mae = test
            .iter()
            .zip(&truth)
            .map(|(x, t)| (m.predict(x).0 - t).abs())
            .sum::<f64>()
            / 50.0;
        assert!(mae <= 1e-2 * range, "mae {mae} range {range}");
    }

    #[test]
    fn predictive_sigma_is_positive() {
        let b = Bounds::new(&[(0.0, 1.0)]);
        let xs: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64 / 7.0]).collect();
        let y: Vec<f64> = xs.iter().map(|x| x[0].powi(2)).collect();
        let m = BayesianRidge::fit(&xs, &y, b, &RidgeConfig::default());
        for x in [0.0, 0.33, 1.0] {
            assert!(m.predict(&[x]).1 > 0.0);
        }
    }
}
