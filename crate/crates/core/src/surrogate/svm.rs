//! RBF support vector classifier with Platt-scaled probabilities.
//!
//! The dual is solved by SMO with second-order working-set selection. Kernel
//! width and box constraint come from a grid scored by stratified k-fold
//! cross-validated accuracy; the sigmoid is fitted on cross-validated decision
//! values with smoothed targets.

use nalgebra::DMatrix;

use crate::types::Bounds;

#[derive(Debug, Clone)]
pub struct SvmConfig {
    /// Candidate RBF widths `γ` in `exp(−γ‖u − u′‖²)`, unit-cube coordinates.
    pub gammas: Vec<f64>,
    /// Candidate box constraints `C`.
    pub costs: Vec<f64>,
    pub folds: usize,
    /// KKT tolerance of the SMO solver.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            gammas: vec![0.5, 2.0, 8.0, 32.0, 128.0, 512.0],
            costs: vec![0.1, 1.0, 10.0, 100.0, 1000.0],
            folds: 5,
            tol: 1e-5,
            max_iter: 100_000,
        }
    }
}

const TAU: f64 = 1e-12;

/// Dual solution on a subset of the training points.
struct Dual {
    alpha: Vec<f64>,
    rho: f64,
}

/// SMO on the points `idx` of the full kernel matrix; `y` is ±1.
fn solve(kernel: &DMatrix<f64>, idx: &[usize], y: &[f64], c: f64, cfg: &SvmConfig) -> Dual {
    let n = idx.len();
    let q = |a: usize, b: usize| y[a] * y[b] * kernel[(idx[a], idx[b])];
    let mut alpha = vec![0.0; n];
    let mut g = vec![-1.0; n];
    for _ in 0..cfg.max_iter {
        // i: maximal violating index in I_up
        let mut gmax = f64::NEG_INFINITY;
        let mut i = usize::MAX;
        for t in 0..n {
            let v = -y[t] * g[t];
            let up = if y[t] > 0.0 { alpha[t] < c } else { alpha[t] > 0.0 };
            if up && v >= gmax {
                gmax = v;
                i = t;
            }
        }
        if i == usize::MAX {
            break;
        }
        // j: second-order choice in I_low
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j = usize::MAX;
        let mut best = f64::INFINITY;
        for t in 0..n {
            let low = if y[t] > 0.0 { alpha[t] > 0.0 } else { alpha[t] < c };
            if !low {
                continue;
            }
            let v = y[t] * g[t];
            gmax2 = gmax2.max(v);
            let diff = gmax + v;
            if diff > 0.0 {
                let quad = (q(i, i) + q(t, t) - 2.0 * y[i] * y[t] * q(i, t)).max(TAU);
                let obj = -diff * diff / quad;
                if obj <= best {
                    best = obj;
                    j = t;
                }
            }
        }
        if gmax + gmax2 < cfg.tol || j == usize::MAX {
            break;
        }
        let (ai, aj) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let quad = (q(i, i) + q(j, j) + 2.0 * q(i, j)).max(TAU);
            let delta = (-g[i] - g[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = (q(i, i) + q(j, j) - 2.0 * q(i, j)).max(TAU);
            let delta = (g[i] - g[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - ai, alpha[j] - aj);
        for (t, gt) in g.iter_mut().enumerate() {
            *gt += q(t, i) * di + q(t, j) * dj;
        }
    }
    // offset from free vectors, or the midpoint of the feasible interval
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free, mut sum_free) = (0usize, 0.0);
    for t in 0..n {
        let yg = y[t] * g[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            sum_free += yg;
        }
    }
    let rho = if free > 0 { sum_free / free as f64 } else { 0.5 * (ub + lb) };
    Dual { alpha, rho }
}

/// Decision values at `targets` of a machine trained on `train`.
fn decisions(
    kernel: &DMatrix<f64>,
    train: &[usize],
    labels: &[f64],
    targets: &[usize],
    c: f64,
    cfg: &SvmConfig,
) -> Vec<f64> {
    let y: Vec<f64> = train.iter().map(|&i| labels[i]).collect();
    let pos = y.iter().filter(|&&v| v > 0.0).count();
    if pos == 0 || pos == y.len() {
        let v = if pos == 0 { -1.0 } else { 1.0 };
        return vec![v; targets.len()];
    }
    let dual = solve(kernel, train, &y, c, cfg);
    targets
        .iter()
        .map(|&t| {
            train
                .iter()
                .zip(&dual.alpha)
                .zip(&y)
                .filter(|((_, &a), _)| a > 0.0)
                .map(|((&s, &a), &ys)| a * ys * kernel[(s, t)])
                .sum::<f64>()
                - dual.rho
        })
        .collect()
}

/// Deterministic stratified fold assignment: the r-th member of a class goes to fold `r mod k`.
fn stratified_folds(labels: &[f64], k: usize) -> Vec<usize> {
    let (mut p, mut n) = (0usize, 0usize);
    labels
        .iter()
        .map(|&l| {
            let counter = if l > 0.0 { &mut p } else { &mut n };
            let f = *counter % k;
            *counter += 1;
            f
        })
        .collect()
}

/// Out-of-fold decision values for every training point.
fn cross_decisions(kernel: &DMatrix<f64>, labels: &[f64], folds: &[usize], k: usize, c: f64, cfg: &SvmConfig) -> Vec<f64> {
    let mut out = vec![0.0; labels.len()];
    for f in 0..k {
        let test: Vec<usize> = (0..labels.len()).filter(|&i| folds[i] == f).collect();
        if test.is_empty() {
            continue;
        }
        let train: Vec<usize> = (0..labels.len()).filter(|&i| folds[i] != f).collect();
        for (t, v) in test.iter().zip(decisions(kernel, &train, labels, &test, c, cfg)) {
            out[*t] = v;
        }
    }
    out
}

/// Platt sigmoid `P(+1 | f) = 1 / (1 + exp(A f + B))`, fitted by Newton's
/// method with backtracking on the regularized targets.
fn fit_sigmoid(dec: &[f64], labels: &[f64]) -> (f64, f64) {
    let prior1 = labels.iter().filter(|&&l| l > 0.0).count() as f64;
    let prior0 = labels.len() as f64 - prior1;
    let hi = (prior1 + 1.0) / (prior1 + 2.0);
    let lo = 1.0 / (prior0 + 2.0);
    let t: Vec<f64> = labels.iter().map(|&l| if l > 0.0 { hi } else { lo }).collect();
    let objective = |a: f64, b: f64| -> f64 {
        dec.iter()
            .zip(&t)
            .map(|(&f, &ti)| {
                let z = f * a + b;
                if z >= 0.0 {
                    ti * z + (-z).exp().ln_1p()
                } else {
                    (ti - 1.0) * z + z.exp().ln_1p()
                }
            })
            .sum()
    };
    let (mut a, mut b) = (0.0, ((prior0 + 1.0) / (prior1 + 1.0)).ln());
    let mut fval = objective(a, b);
    for _ in 0..100 {
        let (mut h11, mut h22, mut h21, mut g1, mut g2) = (1e-12, 1e-12, 0.0, 0.0, 0.0);
        for (&f, &ti) in dec.iter().zip(&t) {
            let z = f * a + b;
            let (p, q) = if z >= 0.0 {
                let e = (-z).exp();
                (e / (1.0 + e), 1.0 / (1.0 + e))
            } else {
                let e = z.exp();
                (1.0 / (1.0 + e), e / (1.0 + e))
            };
            let d2 = p * q;
            h11 += f * f * d2;
            h22 += d2;
            h21 += f * d2;
            let d1 = ti - p;
            g1 += f * d1;
            g2 += d1;
        }
        if g1.abs() < 1e-5 && g2.abs() < 1e-5 {
            break;
        }
        let det = h11 * h22 - h21 * h21;
        let da = -(h22 * g1 - h21 * g2) / det;
        let db = -(-h21 * g1 + h11 * g2) / det;
        let gd = g1 * da + g2 * db;
        let mut step = 1.0;
        let mut moved = false;
        while step >= 1e-10 {
            let (na, nb) = (a + step * da, b + step * db);
            let nf = objective(na, nb);
            if nf < fval + 1e-4 * step * gd {
                a = na;
                b = nb;
                fval = nf;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if !moved {
            break;
        }
    }
    (a, b)
}

fn rbf_matrix(xs: &[Vec<f64>], gamma: f64) -> DMatrix<f64> {
    let k = xs.len();
    DMatrix::from_fn(k, k, |i, j| {
        let r2: f64 = xs[i].iter().zip(&xs[j]).map(|(a, b)| (a - b).powi(2)).sum();
        (-gamma * r2).exp()
    })
}

#[derive(Debug, Clone)]
enum Fit {
    Constant(f64),
    Svm {
        support: Vec<Vec<f64>>,
        /// `α_i y_i` of the support vectors.
        coef: Vec<f64>,
        rho: f64,
        gamma: f64,
        a: f64,
        b: f64,
    },
}

#[derive(Debug, Clone)]
pub struct SvmClassifier {
    bounds: Bounds,
    fit: Fit,
}

impl SvmClassifier {
    /// `xs` are unit-cube inputs; `labels[i]` is `true` for feasible.
    pub fn fit(xs: &[Vec<f64>], labels: &[bool], bounds: Bounds, cfg: &SvmConfig) -> Self {
        assert_eq!(xs.len(), labels.len());
        assert!(!xs.is_empty());
        let k = labels.len();
        let k_feasible = labels.iter().filter(|&&l| l).count();
        if k_feasible == 0 || k_feasible == k {
            let p = (k_feasible as f64 + 1.0) / (k as f64 + 2.0);
            return SvmClassifier {
                bounds,
                fit: Fit::Constant(p),
            };
        }
        let y: Vec<f64> = labels.iter().map(|&l| if l { 1.0 } else { -1.0 }).collect();
        let nfold = cfg.folds.clamp(2, k);
        let folds = stratified_folds(&y, nfold);
        // smoothest kernel and smallest cost win ties
        let mut best: Option<(usize, f64, f64, DMatrix<f64>)> = None;
        for &gamma in &cfg.gammas {
            let kernel = rbf_matrix(xs, gamma);
            for &c in &cfg.costs {
                let dec = cross_decisions(&kernel, &y, &folds, nfold, c, cfg);
                let correct = dec.iter().zip(&y).filter(|(d, l)| (**d > 0.0) == (**l > 0.0)).count();
                if best.as_ref().is_none_or(|b| correct > b.0) {
                    best = Some((correct, gamma, c, kernel.clone()));
                }
            }
        }
        let (_, gamma, c, kernel) = best.expect("grid is non-empty");
        let dec = cross_decisions(&kernel, &y, &folds, nfold, c, cfg);
        let (a, b) = fit_sigmoid(&dec, &y);
        let all: Vec<usize> = (0..k).collect();
        let dual = solve(&kernel, &all, &y, c, cfg);
        let (support, coef): (Vec<Vec<f64>>, Vec<f64>) = dual
            .alpha
            .iter()
            .enumerate()
            .filter(|(_, &a)| a > 0.0)
            .map(|(i, &a)| (xs[i].clone(), a * y[i]))
            .unzip();
        SvmClassifier {
            bounds,
            fit: Fit::Svm {
                support,
                coef,
                rho: dual.rho,
                gamma,
                a,
                b,
            },
        }
    }

    /// Signed distance-like decision value at a problem-unit design.
    pub fn decision(&self, x: &[f64]) -> Option<f64> {
        let Fit::Svm {
            support,
            coef,
            rho,
            gamma,
            ..
        } = &self.fit
        else {
            return None;
        };
        let u = self.bounds.to_unit(x);
        let s: f64 = support
            .iter()
            .zip(coef)
            .map(|(sv, c)| {
                let r2: f64 = sv.iter().zip(&u).map(|(a, b)| (a - b).powi(2)).sum();
                c * (-gamma * r2).exp()
            })
            .sum();
        Some(s - rho)
    }

    pub fn probability(&self, x: &[f64]) -> f64 {
        match &self.fit {
            Fit::Constant(p) => *p,
            Fit::Svm { a, b, .. } => {
                let z = self.decision(x).expect("fitted") * a + b;
                let p = if z >= 0.0 {
                    let e = (-z).exp();
                    e / (1.0 + e)
                } else {
                    1.0 / (1.0 + z.exp())
                };
                p.clamp(0.0, 1.0)
            }
        }
    }
}

impl super::Classifier for SvmClassifier {
    fn predict_feasible(&self, x: &[f64]) -> f64 {
        self.probability(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fit(points: &[Vec<f64>], labels: &[bool], b: &Bounds) -> SvmClassifier {
        let unit: Vec<Vec<f64>> = points.iter().map(|x| b.to_unit(x)).collect();
        SvmClassifier::fit(&unit, labels, b.clone(), &SvmConfig::default())
    }

    #[test]
    fn dual_satisfies_kkt_on_separable_pair() {
        // two points, linear-in-feature-space solution has α = 2/‖φ1 − φ2‖²
        let xs = vec![vec![0.0], vec![1.0]];
        let kernel = rbf_matrix(&xs, 1.0);
        let d = solve(&kernel, &[0, 1], &[1.0, -1.0], 1e6, &SvmConfig::default());
        let expected = 2.0 / (2.0 - 2.0 * (-1.0f64).exp());
        assert!((d.alpha[0] - expected).abs() < 1e-6 && (d.alpha[1] - expected).abs() < 1e-6);
        assert!(d.rho.abs() < 1e-9);
    }

    #[test]
    fn sigmoid_is_monotone_in_decision_value() {
        let dec = [-2.0, -1.5, -0.5, 0.3, 1.0, 2.2, -0.2, 0.8];
        let lab = [-1.0, -1.0, -1.0, 1.0, 1.0, 1.0, 1.0, -1.0];
        let (a, _) = fit_sigmoid(&dec, &lab);
        assert!(a < 0.0);
    }

    #[test]
    fn one_class_is_laplace_smoothed() {
        let b = Bounds::new(&[(0.0, 1.0)]);
        let xs: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64 / 10.0]).collect();
        let c = fit(&xs, &[true; 10], &b);
        assert_eq!(c.probability(&[0.3]), 11.0 / 12.0);
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
        assert!(c.probability(&[0.8, 0.0]) >= 0.9, "{}", c.probability(&[0.8, 0.0]));
        assert!(c.probability(&[-0.8, 0.0]) <= 0.1);
    }

    #[test]
    fn symmetric_boundary_is_even_odds() {
        let b = Bounds::new(&[(-1.0, 1.0)]);
        let xs: Vec<Vec<f64>> = (0..20).map(|i| vec![-0.95 + 0.1 * i as f64]).collect();
        let labels: Vec<bool> = xs.iter().map(|x| x[0] > 0.0).collect();
        let c = fit(&xs, &labels, &b);
        assert!((c.probability(&[0.0]) - 0.5).abs() <= 0.1, "{}", c.probability(&[0.0]));
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
