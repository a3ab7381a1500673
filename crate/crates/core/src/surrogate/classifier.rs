//! Binary feasibility classifier: a Gaussian process with logistic link,
//! fitted by the Laplace approximation.
//!
//! Kernel hyperparameters are picked from a fixed grid by leave-one-out
//! cross-validation, using the cavity distributions of the Laplace fit. While
//! either class has fewer than [`MIN_CLASS_FOR_CV`] members the Laplace
//! approximation to the marginal likelihood decides instead. Predictions
//! average the logistic
//! link over the latent posterior with the probit approximation, which keeps
//! them calibrated far from the data.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::types::Bounds;

#[derive(Debug, Clone)]
pub struct LaplaceClassifierConfig {
    /// Candidate RBF length-scales in unit-cube coordinates.
    pub length_scales: Vec<f64>,
    /// Candidate latent prior variances.
    pub amplitudes: Vec<f64>,
    pub newton_iters: usize,
    pub newton_tol: f64,
}

impl Default for LaplaceClassifierConfig {
    fn default() -> Self {
        LaplaceClassifierConfig {
            length_scales: vec![0.025, 0.05, 0.1, 0.2, 0.4, 0.8],
            amplitudes: vec![2.0, 10.0, 50.0],
            newton_iters: 30,
            newton_tol: 1e-8,
        }
    }
}

fn rbf(a: &[f64], b: &[f64], inv_ls2: f64, amp: f64) -> f64 {
    let r2: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    amp * (-0.5 * r2 * inv_ls2).exp()
}

fn logistic(f: f64) -> f64 {
    if f >= 0.0 {
        1.0 / (1.0 + (-f).exp())
    } else {
        let e = f.exp();
        e / (1.0 + e)
    }
}

/// `log σ(f)` without overflow.
fn log_logistic(f: f64) -> f64 {
    if f >= 0.0 {
        -(-f).exp().ln_1p()
    } else {
        f - f.exp().ln_1p()
    }
}

struct Mode {
    grad: DVector<f64>,
    sqrt_w: DVector<f64>,
    chol: Cholesky<f64, Dyn>,
    log_evidence: f64,
    /// Leave-one-out log predictive probability of the labels.
    loo: f64,
}

/// Smallest class size for which hyperparameters are cross-validated.
pub const MIN_CLASS_FOR_CV: usize = 5;

/// Newton iteration for the posterior mode of the latent function.
fn find_mode(kmat: &DMatrix<f64>, t: &DVector<f64>, cfg: &LaplaceClassifierConfig) -> Option<Mode> {
    let k = t.len();
    let mut f = DVector::zeros(k);
    let mut last = f64::NEG_INFINITY;
    for _ in 0..cfg.newton_iters.max(1) {
        let pi = f.map(logistic);
        let w = pi.map(|p| p * (1.0 - p));
        let sqrt_w = w.map(f64::sqrt);
        let mut b_mat = kmat.component_mul(&(&sqrt_w * sqrt_w.transpose()));
        for i in 0..k {
            b_mat[(i, i)] += 1.0;
        }
        let chol = Cholesky::new(b_mat)?;
        let grad = t - &pi;
        let b = w.component_mul(&f) + &grad;
        let kb = kmat * &b;
        let c = chol.solve(&sqrt_w.component_mul(&kb));
        let a = &b - sqrt_w.component_mul(&c);
        f = kmat * &a;
        let loglik: f64 = f
            .iter()
            .zip(t.iter())
            .map(|(&fi, &ti)| if ti > 0.5 { log_logistic(fi) } else { log_logistic(-fi) })
            .sum();
        let psi = -0.5 * a.dot(&f) + loglik;
        let done = (psi - last).abs() < cfg.newton_tol;
        last = psi;
        if done {
            break;
        }
    }
    // refresh curvature and factor at the final mode
    let pi = f.map(logistic);
    let w = pi.map(|p| p * (1.0 - p));
    let sqrt_w = w.map(f64::sqrt);
    let mut b_mat = kmat.component_mul(&(&sqrt_w * sqrt_w.transpose()));
    for i in 0..k {
        b_mat[(i, i)] += 1.0;
    }
    let chol = Cholesky::new(b_mat)?;
    let grad = t - &pi;
    let loglik: f64 = f
        .iter()
        .zip(t.iter())
        .map(|(&fi, &ti)| if ti > 0.5 { log_logistic(fi) } else { log_logistic(-fi) })
        .sum();
    // at the mode f = K ∇log p, so ½ fᵀK⁻¹f = ½ ∇ᵀ f
    let log_det_half: f64 = chol.l_dirty().diagonal().iter().map(|v| v.ln()).sum();
    let log_evidence = -0.5 * grad.dot(&f) + loglik - log_det_half;
    // Σ_ii of the Laplace posterior, Σ = K − K√W B⁻¹ √W K
    let v = chol
        .l_dirty()
        .solve_lower_triangular(&DMatrix::from_fn(k, k, |i, j| sqrt_w[i] * kmat[(i, j)]))?;
    let mut loo = 0.0;
    for i in 0..k {
        let post_var = (kmat[(i, i)] - v.column(i).norm_squared()).max(1e-12);
        let w = sqrt_w[i] * sqrt_w[i];
        let cavity_prec = (1.0 / post_var - w).max(1e-12);
        let cavity_var = 1.0 / cavity_prec;
        let cavity_mean = cavity_var * (f[i] / post_var - w * f[i] - grad[i]);
        let z = averaged_latent(cavity_mean, cavity_var);
        loo += if t[i] > 0.5 { log_logistic(z) } else { log_logistic(-z) };
    }
    Some(Mode {
        grad,
        sqrt_w,
        chol,
        log_evidence,
        loo,
    })
}

/// Probit approximation: `σ(κ m)` approximates the logistic averaged over `N(m, v)`.
fn averaged_latent(mean: f64, var: f64) -> f64 {
    mean / (1.0 + std::f64::consts::PI * var / 8.0).sqrt()
}

#[derive(Debug, Clone)]
enum Fit {
    Constant(f64),
    Laplace {
        xs: Vec<Vec<f64>>,
        inv_ls2: f64,
        amp: f64,
        grad: DVector<f64>,
        sqrt_w: DVector<f64>,
        l: DMatrix<f64>,
    },
}

#[derive(Debug, Clone)]
pub struct GpClassifier {
    bounds: Bounds,
    fit: Fit,
}

impl GpClassifier {
    /// `xs` are unit-cube inputs; `labels[i]` is `true` for feasible.
    pub fn fit(xs: &[Vec<f64>], labels: &[bool], bounds: Bounds, cfg: &LaplaceClassifierConfig) -> Self {
        assert_eq!(xs.len(), labels.len());
        assert!(!xs.is_empty());
        let k = labels.len();
        let k_feasible = labels.iter().filter(|&&l| l).count();
        if k_feasible == 0 || k_feasible == k {
            let p = (k_feasible as f64 + 1.0) / (k as f64 + 2.0);
            return GpClassifier {
                bounds,
                fit: Fit::Constant(p),
            };
        }
        let use_cv = k_feasible.min(k - k_feasible) >= MIN_CLASS_FOR_CV;
        let score = |m: &Mode| if use_cv { m.loo } else { m.log_evidence };
        let t = DVector::from_iterator(k, labels.iter().map(|&l| if l { 1.0 } else { 0.0 }));
        let mut best: Option<(f64, f64, f64, Mode)> = None;
        for &ls in &cfg.length_scales {
            let inv_ls2 = 1.0 / (ls * ls);
            let unit = DMatrix::from_fn(k, k, |i, j| rbf(&xs[i], &xs[j], inv_ls2, 1.0));
            for &amp in &cfg.amplitudes {
                let kmat = &unit * amp;
                if let Some(mode) = find_mode(&kmat, &t, cfg) {
                    if best.as_ref().is_none_or(|b| score(&mode) > score(&b.3)) {
                        best = Some((inv_ls2, amp, ls, mode));
                    }
                }
            }
        }
        let Some((inv_ls2, amp, _, mode)) = best else {
            let p = (k_feasible as f64 + 1.0) / (k as f64 + 2.0);
            return GpClassifier {
                bounds,
                fit: Fit::Constant(p),
            };
        };
        GpClassifier {
            bounds,
            fit: Fit::Laplace {
                xs: xs.to_vec(),
                inv_ls2,
                amp,
                grad: mode.grad,
                sqrt_w: mode.sqrt_w,
                l: mode.chol.l(),
            },
        }
    }

    /// Latent posterior mean and variance at a problem-unit design.
    pub fn latent(&self, x: &[f64]) -> Option<(f64, f64)> {
        let Fit::Laplace {
            xs,
            inv_ls2,
            amp,
            grad,
            sqrt_w,
            l,
        } = &self.fit
        else {
            return None;
        };
        let u = self.bounds.to_unit(x);
        let kstar = DVector::from_iterator(xs.len(), xs.iter().map(|xi| rbf(xi, &u, *inv_ls2, *amp)));
        let mean = kstar.dot(grad);
        let v = l
            .solve_lower_triangular(&sqrt_w.component_mul(&kstar))
            .expect("triangular factor is nonsingular");
        let var = (amp - v.norm_squared()).max(0.0);
        Some((mean, var))
    }

    pub fn probability(&self, x: &[f64]) -> f64 {
        match &self.fit {
            Fit::Constant(p) => *p,
            Fit::Laplace { .. } => {
                let (m, v) = self.latent(x).expect("fitted");
                logistic(averaged_latent(m, v)).clamp(0.0, 1.0)
            }
        }
    }
}

impl super::Classifier for GpClassifier {
    fn predict_feasible(&self, x: &[f64]) -> f64 {
        self.probability(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fit(points: &[Vec<f64>], labels: &[bool], b: &Bounds) -> GpClassifier {
        let unit: Vec<Vec<f64>> = points.iter().map(|x| b.to_unit(x)).collect();
        GpClassifier::fit(&unit, labels, b.clone(), &LaplaceClassifierConfig::default())
    }

    #[test]
    fn one_class_is_laplace_smoothed() {
        let b = Bounds::new(&[(0.0, 1.0)]);
        let xs: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64 / 10.0]).collect();
        let c = fit(&xs, &[true; 10], &b);
        assert_eq!(c.probability(&[0.3]), 11.0 / 12.0);
        assert!(c.probability(&[0.99]) >= 0.5);
    }

    #[test]
    fn separable_half_plane() {
        let b = Bounds::new(&[(-1.0, 1.0), (-1.0, 1.0)]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let draw = |rng: &mut ChaCha8Rng| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let xs: Vec<Vec<f64>> = (0..100).map(|_| draw(&mut rng)).collect();
        let labels: Vec<bool> = xs.iter().map(|x| x[0] >= 0.0).collect();
        let c = fit(&xs, &labels, &b);
        let test: Vec<Vec<f64>> = (0..200).map(|_| draw(&mut rng)).collect();
        let correct = test
            .iter()
            .filter(|x| (c.probability(x) >= 0.5) == (x[0] >= 0.0))
            .count();
        assert!(correct as f64 / 200.0 >= 0.95, "{correct}/200");
        assert!(c.probability(&[0.8, 0.0]) >= 0.9);
        assert!(c.probability(&[-0.8, 0.0]) <= 0.1);
    }

    #[test]
    fn symmetric_boundary_is_even_odds() {
        let b = Bounds::new(&[(-1.0, 1.0)]);
        let xs: Vec<Vec<f64>> = (0..20).map(|i| vec![-0.95 + 0.1 * i as f64]).collect();
        let labels: Vec<bool> = xs.iter().map(|x| x[0] > 0.0).collect();
        let c = fit(&xs, &labels, &b);
        assert!((c.probability(&[0.0]) - 0.5).abs() <= 0.1);
    }

    #[test]
    fn outputs_stay_in_unit_interval() {
        let b = Bounds::new(&[(0.0, 1.0), (0.0, 1.0)]);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let xs: Vec<Vec<f64>> = (0..30).map(|_| vec![rng.gen(), rng.gen()]).collect();
        let labels: Vec<bool> = xs.iter().map(|_| rng.gen_bool(0.5)).collect();
        let c = fit(&xs, &labels, &b);
        for _ in 0..200 {
            let p = c.probability(&[rng.gen(), rng.gen()]);
            assert!((0.0..=1.0).contains(&p));
        }
    }
}
