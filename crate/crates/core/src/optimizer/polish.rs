//! Local refinement of an incumbent with projected BFGS on the unit cube,
//! using central finite-difference gradients.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolishConfig {
    /// Function evaluation budget, gradients included.
    pub max_evals: usize,
    /// Finite-difference step in unit-cube coordinates.
    pub step: f64,
}

impl Default for PolishConfig {
    fn default() -> Self {
        PolishConfig {
            max_evals: 200,
            step: 1e-6,
        }
    }
}

fn project(x: &mut [f64]) {
    for v in x.iter_mut() {
        *v = v.clamp(0.0, 1.0);
    }
}

/// Maximizes `f` starting from `x0` (with known value `f0`). Never returns
/// a point worse than the start.
pub fn polish(mut f: impl FnMut(&[f64]) -> f64, x0: &[f64], f0: f64, cfg: &PolishConfig) -> (Vec<f64>, f64) {
    let d = x0.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    };
    let mut x = x0.to_vec();
    let mut fx = f0;
    // inverse Hessian approximation of the negated objective
    let mut h = vec![vec![0.0; d]; d];
    for (i, row) in h.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let gradient = |x: &[f64], evals: &mut usize, eval: &mut dyn FnMut(&[f64], &mut usize) -> f64| {
        let mut g = vec![0.0; d];
        let mut xp = x.to_vec();
        for j in 0..d {
            let hi = (x[j] + cfg.step).min(1.0);
            let lo = (x[j] - cfg.step).max(0.0);
            if hi <= lo {
                continue;
            }
            xp[j] = hi;
            let fp = eval(&xp, evals);
            xp[j] = lo;
            let fm = eval(&xp, evals);
            xp[j] = x[j];
            // gradient of the negated objective
            g[j] = -(fp - fm) / (hi - lo);
        }
        g
    };
    if cfg.max_evals < 2 * d + 1 {
        return (x, fx);
    }
    let mut g = gradient(&x, &mut evals, &mut eval);
    while evals + 2 * d < cfg.max_evals {
        // components pinned at an active bound are frozen
        let free: Vec<bool> = (0..d)
            .map(|j| !((x[j] <= 0.0 && g[j] > 0.0) || (x[j] >= 1.0 && g[j] < 0.0)))
            .collect();
        let mut dir: Vec<f64> = (0..d)
            .map(|i| {
                if !free[i] {
                    return 0.0;
                }
                -(0..d).filter(|&j| free[j]).map(|j| h[i][j] * g[j]).sum::<f64>()
            })
            .collect();
        let mut slope: f64 = dir.iter().zip(&g).map(|(a, b)| a * b).sum();
        if slope >= 0.0 {
            // not a descent direction: reset to steepest descent
            for (i, row) in h.iter_mut().enumerate() {
                row.iter_mut().for_each(|v| *v = 0.0);
                row[i] = 1.0;
            }
            dir = (0..d).map(|j| if free[j] { -g[j] } else { 0.0 }).collect();
            slope = dir.iter().zip(&g).map(|(a, b)| a * b).sum();
        }
        if slope.abs() < 1e-16 || dir.iter().all(|v| v.abs() < 1e-14) {
            break;
        }
        let mut t = 1.0;
        let mut accepted = None;
        while evals < cfg.max_evals.saturating_sub(2 * d) {
            let mut xn: Vec<f64> = x.iter().zip(&dir).map(|(a, b)| a + t * b).collect();
            project(&mut xn);
            let fn_ = eval(&xn, &mut evals);
            // Armijo test on the projected step
            let predicted: f64 = xn.iter().zip(&x).zip(&g).map(|((a, b), gj)| -(a - b) * gj).sum();
            if fn_ > fx && fn_ >= fx + 1e-4 * predicted {
                accepted = Some((xn, fn_));
                break;
            }
            t *= 0.5;
            if t < 1e-10 {
                break;
            }
        }
        let Some((xn, fn_)) = accepted else { break };
        let gn = gradient(&xn, &mut evals, &mut eval);
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        if sy > 1e-12 {
            let hy: Vec<f64> = (0..d).map(|i| (0..d).map(|j| h[i][j] * y[j]).sum()).collect();
            let yhy: f64 = y.iter().zip(&hy).map(|(a, b)| a * b).sum();
            for i in 0..d {
                for j in 0..d {
                    h[i][j] += (sy + yhy) * s[i] * s[j] / (sy * sy) - (hy[i] * s[j] + s[i] * hy[j]) / sy;
                }
            }
        }
        let gain = fn_ - fx;
        x = xn;
        fx = fn_;
        g = gn;
        if gain.abs() < 1e-15 * fx.abs().max(1.0) {
            break;
        }
    }
    if fx >= f0 {
        (x, fx)
    } else {
        (x0.to_vec(), f0)
    }
}
