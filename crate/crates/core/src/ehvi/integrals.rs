//! One-dimensional Gaussian moment integrals in closed form.
//!
//! `σ = 0` is handled by the Dirac limit of the normal density, with the
//! Heaviside step taken as `Θ(0) = 1/2` (the value the `σ → 0` limit of the
//! closed forms attains when `μ` sits exactly on an integration bound).

use std::f64::consts::{FRAC_1_SQRT_2, PI};

fn heaviside(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        0.0
    } else {
        0.5
    }
}

/// `erf(b) − erf(a)` without cancellation in the tails.
pub(crate) fn erf_diff(a: f64, b: f64) -> f64 {
    if a >= 0.0 && b >= 0.0 {
        libm::erfc(a) - libm::erfc(b)
    } else if a <= 0.0 && b <= 0.0 {
        libm::erfc(-b) - libm::erfc(-a)
    } else {
        libm::erf(b) - libm::erf(a)
    }
}

fn standardized(v: f64, mu: f64, sigma: f64) -> f64 {
    (v - mu) * FRAC_1_SQRT_2 / sigma
}

fn gauss_edge(z: f64) -> f64 {
    (-z * z).exp()
}

/// `∫_a^b (y − c) N(y | μ, σ²) dy`.
pub fn gaussian_integral_i1(a: f64, b: f64, c: f64, mu: f64, sigma: f64) -> f64 {
    assert!(a <= b, "integration bounds inverted: a = {a} > b = {b}");
    assert!(sigma >= 0.0, "negative standard deviation");
    if sigma == 0.0 {
        return (mu - c) * heaviside(b - mu) * heaviside(mu - a);
    }
    let za = standardized(a, mu, sigma);
    let zb = standardized(b, mu, sigma);
    0.5 * (mu - c) * erf_diff(za, zb) + sigma / (2.0 * PI).sqrt() * (gauss_edge(za) - gauss_edge(zb))
}

/// `∫_{−∞}^b (y − c) N(y | μ, σ²) dy`, the `a → −∞` limit of [`gaussian_integral_i1`].
pub fn gaussian_integral_i2(b: f64, c: f64, mu: f64, sigma: f64) -> f64 {
    assert!(sigma >= 0.0, "negative standard deviation");
    if sigma == 0.0 {
        return (mu - c) * heaviside(b - mu);
    }
    let zb = standardized(b, mu, sigma);
    0.5 * (mu - c) * libm::erfc(-zb) - sigma / (2.0 * PI).sqrt() * gauss_edge(zb)
}

/// Probability mass `∫_a^b N(y | μ, σ²) dy` (the zeroth moment).
pub fn gaussian_integral_i3(a: f64, b: f64, mu: f64, sigma: f64) -> f64 {
    assert!(a <= b, "integration bounds inverted: a = {a} > b = {b}");
    assert!(sigma >= 0.0, "negative standard deviation");
    if sigma == 0.0 {
        return heaviside(b - mu) * heaviside(mu - a);
    }
    0.5 * erf_diff(standardized(a, mu, sigma), standardized(b, mu, sigma))
}

/// `∫_{−∞}^b N(y | μ, σ²) dy`.
pub fn gaussian_mass_below(b: f64, mu: f64, sigma: f64) -> f64 {
    assert!(sigma >= 0.0, "negative standard deviation");
    if sigma == 0.0 {
        return heaviside(b - mu);
    }
    0.5 * libm::erfc(-standardized(b, mu, sigma))
}

/// `P(Y >= y)` for `Y ~ N(μ, σ²)`. At `σ = 0` this is exact: `1` iff `μ >= y`.
pub fn prob_at_least(y: f64, mu: f64, sigma: f64) -> f64 {
    if sigma == 0.0 {
        return if mu >= y { 1.0 } else { 0.0 };
    }
    0.5 * libm::erfc(standardized(y, mu, sigma))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_range_moments() {
        let (mu, s) = (1.0, 1.0);
        assert!((gaussian_integral_i1(mu - 50.0 * s, mu + 50.0 * s, 0.0, mu, s) - 1.0).abs() < 1e-9);
        assert!((gaussian_integral_i2(mu + 50.0 * s, 0.0, mu, s) - mu).abs() < 1e-9);
        assert!((gaussian_integral_i3(mu - 50.0 * s, mu + 50.0 * s, mu, s) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn dirac_limits() {
        assert_eq!(gaussian_integral_i1(0.0, 2.0, 0.5, 1.0, 0.0), 0.5);
        assert_eq!(gaussian_integral_i2(0.0, 0.0, 1.0, 0.0), 0.0);
        assert_eq!(gaussian_integral_i3(0.0, 2.0, 1.0, 0.0), 1.0);
        // on a bound the limit is halved
        assert_eq!(gaussian_integral_i3(1.0, 2.0, 1.0, 0.0), 0.5);
    }

    #[test]
    fn tiny_sigma_approaches_dirac() {
        let v = gaussian_integral_i1(0.0, 2.0, 0.5, 1.0, 1e-12);
        assert!((v - 0.5).abs() < 1e-12);
    }

    #[test]
    #[should_panic]
    fn inverted_bounds_panic() {
        gaussian_integral_i1(1.0, 0.0, 0.0, 0.0, 1.0);
    }

    #[test]
    fn tail_difference_keeps_precision() {
        // mass between 8 and 9 standard deviations
        let m = gaussian_integral_i3(8.0, 9.0, 0.0, 1.0);
        let exact = 6.219_831_985_865_83e-16;
        assert!((m - exact).abs() / exact < 1e-9);
    }

    #[test]
    fn i2_is_the_limit_of_i1() {
        for (b, c, mu, s) in [(0.4, -1.0, 0.0, 1.0), (0.16, 0.16, 1.02, 0.14), (-3.0, 2.0, 1.0, 0.5)] {
            let lim = gaussian_integral_i1(mu - 60.0 * s, b, c, mu, s);
            assert!((gaussian_integral_i2(b, c, mu, s) - lim).abs() < 1e-14);
        }
    }

    #[test]
    fn tail_integrand_sign_is_kept() {
        // ∫_{−∞}^u (u − y) N dy > 0 even deep in the tail
        let v = -gaussian_integral_i2(0.161, 0.161, 1.0175, 0.1366);
        assert!(v > 0.0 && v < 1e-11, "{v}");
    }

    #[test]
    fn prob_at_least_symmetry() {
        assert!((prob_at_least(0.0, 0.0, 1.0) - 0.5).abs() < 1e-15);
        assert_eq!(prob_at_least(1.0, 1.0, 0.0), 1.0);
        assert_eq!(prob_at_least(1.0, 0.5, 0.0), 0.0);
    }
}
