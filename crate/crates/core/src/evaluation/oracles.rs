//! Independent numerical references for the closed forms: Monte-Carlo
//! estimators and adaptive Gauss–Kronrod quadrature.

use rand::{Rng, RngCore};
use rand_distr::{Distribution, StandardNormal};

use crate::pareto::hypervolume_improvement;
use crate::surrogate::NormalPrediction;

/// A Monte-Carlo mean and its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
}

impl McEstimate {
    /// Whether `value` lies within `k` standard errors. A zero standard error
    /// falls back to an absolute tolerance of `1e-12`.
    pub fn agrees_with(&self, value: f64, k: f64) -> bool {
        (self.estimate - value).abs() <= (k * self.std_error).max(1e-12)
    }
}

fn mean_and_error(mut sample: impl FnMut() -> f64, draws: usize) -> McEstimate {
    assert!(draws >= 2, "need at least two draws");
    // Welford keeps the variance exactly zero for constant samples
    let (mut mean, mut m2) = (0.0, 0.0);
    for k in 1..=draws {
        let v = sample();
        let d = v - mean;
        mean += d / k as f64;
        m2 += d * (v - mean);
    }
    let var = (m2 / (draws - 1) as f64).max(0.0);
    McEstimate {
        estimate: mean,
        std_error: (var / draws as f64).sqrt(),
    }
}

fn draw(pred: &NormalPrediction, rng: &mut dyn RngCore, out: &mut [f64]) {
    for ((o, &m), &s) in out.iter_mut().zip(&pred.mu).zip(&pred.sigma) {
        let z: f64 = StandardNormal.sample(rng);
        *o = m + s * z;
    }
}

/// Mean hypervolume improvement over draws from the predictive density.
pub fn oracle_mc_evi<V: AsRef<[f64]>>(
    front: &[V],
    reference: &[f64],
    pred: &NormalPrediction,
    draws: usize,
    rng: &mut dyn RngCore,
) -> McEstimate {
    assert!(draws >= 10_000, "the EVI oracle needs at least 10^4 draws");
    let mut y = vec![0.0; reference.len()];
    mean_and_error(
        || {
            draw(pred, rng, &mut y);
            hypervolume_improvement(front, reference, &y)
        },
        draws,
    )
}

/// Fraction of predictive draws that no point of `front` weakly dominates.
pub fn oracle_mc_pnd<V: AsRef<[f64]>>(
    front: &[V],
    pred: &NormalPrediction,
    draws: usize,
    rng: &mut dyn RngCore,
) -> McEstimate {
    let mut y = vec![0.0; pred.mu.len()];
    mean_and_error(
        || {
            draw(pred, rng, &mut y);
            let covered = front.iter().any(|p| p.as_ref().iter().zip(&y).all(|(a, b)| a <= b));
            if covered {
                0.0
            } else {
                1.0
            }
        },
        draws,
    )
}

/// Hypervolume by uniform sampling of the box spanned by the ideal point of
/// `front` and `reference`.
pub fn oracle_mc_hypervolume<V: AsRef<[f64]>>(
    front: &[V],
    reference: &[f64],
    draws: usize,
    rng: &mut dyn RngCore,
) -> McEstimate {
    let n = reference.len();
    let inside: Vec<&[f64]> = front
        .iter()
        .map(|p| p.as_ref())
        .filter(|p| p.iter().zip(reference).all(|(a, r)| a < r))
        .collect();
    if inside.is_empty() {
        return McEstimate {
            estimate: 0.0,
            std_error: 0.0,
        };
    }
    let lo: Vec<f64> = (0..n).map(|i| inside.iter().map(|p| p[i]).fold(f64::INFINITY, f64::min)).collect();
    let box_volume: f64 = lo.iter().zip(reference).map(|(l, r)| r - l).product();
    let mut y = vec![0.0; n];
    let frac = mean_and_error(
        || {
            for ((v, &l), &r) in y.iter_mut().zip(&lo).zip(reference) {
                *v = rng.gen_range(l..r);
            }
            if inside.iter().any(|p| p.iter().zip(&y).all(|(a, b)| a <= b)) {
                1.0
            } else {
                0.0
            }
        },
        draws,
    );
    McEstimate {
        estimate: frac.estimate * box_volume,
        std_error: frac.std_error * box_volume,
    }
}

// Gauss–Kronrod 7/15 nodes and weights on [-1, 1]; the odd Kronrod nodes are the Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// `(Kronrod estimate, |Kronrod − Gauss|)` on `[a, b]`.
fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Adaptive Gauss–Kronrod quadrature on a finite interval to absolute
/// tolerance `tol` (or to rounding level of the result), bisecting the
/// interval with the largest error estimate.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    assert!(a.is_finite() && b.is_finite(), "finite bounds required; use integrate_lower_tail");
    if a == b {
        return 0.0;
    }
    let mut parts = vec![(a, b, gk15(&f, a, b))];
    for _ in 0..2_000 {
        let total_err: f64 = parts.iter().map(|p| p.2 .1).sum();
        let scale: f64 = parts.iter().map(|p| p.2 .0.abs()).sum();
        if total_err <= tol.max(4.0 * f64::EPSILON * scale) {
            break;
        }
        let (k, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2 .1.total_cmp(&y.1 .2 .1))
            .expect("nonempty");
        let (lo, hi, _) = parts.swap_remove(k);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        parts.push((lo, mid, gk15(&f, lo, mid)));
        parts.push((mid, hi, gk15(&f, mid, hi)));
    }
    parts.iter().map(|p| p.2 .0).sum()
}

/// `∫_{−∞}^b f` via the substitution `y = b − (1 − t)/t`, `t ∈ (0, 1]`.
pub fn integrate_lower_tail(f: impl Fn(f64) -> f64, b: f64, tol: f64) -> f64 {
    integrate(
        |t| {
            let y = b - (1.0 - t) / t;
            f(y) / (t * t)
        },
        0.0,
        1.0,
        tol,
    )
}

fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// `∫_a^b g(z) φ(z) dz` after the change of variables `y = μ + σz`, so the
/// nodes stay exact however small `σ` is. The interval is split at a few
/// fixed `z` so the peak cannot be missed.
fn integrate_standardized(g: impl Fn(f64) -> f64, a: f64, b: f64, mu: f64, sigma: f64, tol: f64) -> f64 {
    assert!(sigma > 0.0, "quadrature needs a proper density");
    assert!(a <= b, "integration bounds inverted");
    // beyond |z| = 40 the density is below 1e-340 and underflows to zero
    let za = ((a - mu) / sigma).clamp(-40.0, 40.0);
    let zb = ((b - mu) / sigma).clamp(-40.0, 40.0);
    if za >= zb {
        return 0.0;
    }
    let mut pts = vec![za, zb];
    pts.extend([-12.0, -6.0, -3.0, -1.0, 0.0, 1.0, 3.0, 6.0, 12.0].into_iter().filter(|&z| z > za && z < zb));
    pts.sort_by(f64::total_cmp);
    let f = |z: f64| g(z) * std_normal_pdf(z);
    pts.windows(2).map(|w| integrate(f, w[0], w[1], tol / pts.len() as f64)).sum()
}

/// Quadrature of `∫_a^b (y − c) N(y | μ, σ²) dy`, `σ > 0`.
pub fn quadrature_i1(a: f64, b: f64, c: f64, mu: f64, sigma: f64) -> f64 {
    integrate_standardized(|z| (mu - c) + sigma * z, a, b, mu, sigma, 1e-14)
}

/// Quadrature of `∫_{−∞}^b (y − c) N(y | μ, σ²) dy`, `σ > 0`.
pub fn quadrature_i2(b: f64, c: f64, mu: f64, sigma: f64) -> f64 {
    quadrature_i1(f64::NEG_INFINITY, b, c, mu, sigma)
}

/// Quadrature of `∫_a^b N(y | μ, σ²) dy`, `σ > 0`.
pub fn quadrature_i3(a: f64, b: f64, mu: f64, sigma: f64) -> f64 {
    integrate_standardized(|_| 1.0, a, b, mu, sigma, 1e-14)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pareto::hypervolume;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn quadrature_of_polynomials_and_tails() {
        assert!((integrate(|x| x * x, 0.0, 3.0, 1e-13) - 9.0).abs() < 1e-12);
        assert!((integrate(f64::sin, 0.0, std::f64::consts::PI, 1e-13) - 2.0).abs() < 1e-12);
        assert!((integrate_lower_tail(f64::exp, 0.0, 1e-12) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn gaussian_quadrature_moments() {
        assert!((quadrature_i3(f64::NEG_INFINITY, f64::INFINITY, 2.0, 0.3) - 1.0).abs() < 1e-13);
        assert!((quadrature_i3(-1.0, 1.0, 0.0, 1.0) - libm::erf(std::f64::consts::FRAC_1_SQRT_2)).abs() < 1e-13);
        // E[Y] − c over the whole line
        assert!((quadrature_i2(f64::INFINITY, 1.0, 3.0, 2.0) - 2.0).abs() < 1e-12);
        // a narrow peak far inside a wide interval
        assert!((quadrature_i3(-1e6, 1e6, 123.0, 1e-9) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mc_evi_dirac_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let front = vec![vec![1.0, 2.0], vec![2.0, 1.0]];
        let pred = NormalPrediction::point(vec![0.5, 0.5]);
        let est = oracle_mc_evi(&front, &[3.0, 3.0], &pred, 10_000, &mut rng);
        assert_eq!(est.std_error, 0.0);
        assert_eq!(est.estimate, hypervolume_improvement(&front, &[3.0, 3.0], &[0.5, 0.5]));
    }

    #[test]
    fn mc_error_scales_with_inverse_root() {
        let front = vec![vec![1.0, 1.0]];
        let pred = NormalPrediction::new(vec![1.0, 1.0], vec![0.5, 0.5]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let e1 = oracle_mc_evi(&front, &[3.0, 3.0], &pred, 20_000, &mut rng).std_error;
        let e2 = oracle_mc_evi(&front, &[3.0, 3.0], &pred, 80_000, &mut rng).std_error;
        assert!((e1 / e2 / 2.0 - 1.0).abs() < 0.2, "ratio {}", e1 / e2);
    }

    #[test]
    fn mc_pnd_simple_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let none: Vec<Vec<f64>> = vec![];
        let pred = NormalPrediction::new(vec![0.0, 0.0], vec![1.0, 1.0]);
        assert_eq!(oracle_mc_pnd(&none, &pred, 1000, &mut rng).estimate, 1.0);
        let est = oracle_mc_pnd(&[vec![0.0, 0.0]], &pred, 100_000, &mut rng);
        assert!(est.agrees_with(0.75, 3.0), "{est:?}");
    }

    #[test]
    fn mc_hypervolume_matches_sweep() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let front = vec![vec![0.0, 2.0], vec![1.0, 1.0], vec![2.0, 0.0]];
        let est = oracle_mc_hypervolume(&front, &[3.0, 3.0], 100_000, &mut rng);
        assert!(est.agrees_with(hypervolume(&front, &[3.0, 3.0]), 3.0), "{est:?}");
    }
}
