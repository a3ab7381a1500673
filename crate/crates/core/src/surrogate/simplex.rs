//! Box-constrained Nelder–Mead used for kernel hyperparameter search.
//!
//! Trial vertices are projected onto the box before evaluation.

pub(crate) struct SimplexOptions {
    pub max_evals: usize,
    /// Stop when the spread of simplex values falls below this.
    pub f_tol: f64,
    /// Initial edge length as a fraction of each box side.
    pub step: f64,
}

pub(crate) struct SimplexResult {
    pub x: Vec<f64>,
    pub f: f64,
}

fn project(x: &mut [f64], lo: &[f64], hi: &[f64]) {
    for ((v, &l), &h) in x.iter_mut().zip(lo).zip(hi) {
        *v = v.clamp(l, h);
    }
}

/// Minimizes `f` from `start` within `[lo, hi]`. Non-finite values count as `+inf`.
pub(crate) fn minimize(
    mut f: impl FnMut(&[f64]) -> f64,
    start: &[f64],
    lo: &[f64],
    hi: &[f64],
    opts: &SimplexOptions,
) -> SimplexResult {
    let m = start.len();
    let mut eval = |x: &[f64], count: &mut usize| {
        *count += 1;
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    let mut evals = 0;
    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
    let mut p0 = start.to_vec();
    project(&mut p0, lo, hi);
    pts.push(p0.clone());
    for j in 0..m {
        let mut p = p0.clone();
        let h = opts.step * (hi[j] - lo[j]);
        // step inward when the start sits on the upper face
        p[j] = if p[j] + h <= hi[j] { p[j] + h } else { p[j] - h };
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| eval(p, &mut evals)).collect();

    while evals < opts.max_evals {
        let mut order: Vec<usize> = (0..=m).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        pts = order.iter().map(|&i| pts[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();
        if vals[m].is_finite() && (vals[m] - vals[0]).abs() <= opts.f_tol {
            break;
        }
        let centroid: Vec<f64> = (0..m)
            .map(|j| pts[..m].iter().map(|p| p[j]).sum::<f64>() / m as f64)
            .collect();
        let along = |t: f64| {
            let mut p: Vec<f64> = (0..m)
                .map(|j| centroid[j] + t * (pts[m][j] - centroid[j]))
                .collect();
            project(&mut p, lo, hi);
            p
        };
        let xr = along(-1.0);
        let fr = eval(&xr, &mut evals);
        if fr < vals[0] {
            let xe = along(-2.0);
            let fe = eval(&xe, &mut evals);
            if fe < fr {
                pts[m] = xe;
                vals[m] = fe;
            } else {
                pts[m] = xr;
                vals[m] = fr;
            }
            continue;
        }
        if fr < vals[m - 1] {
            pts[m] = xr;
            vals[m] = fr;
            continue;
        }
        let xc = if fr < vals[m] { along(-0.5) } else { along(0.5) };
        let fc = eval(&xc, &mut evals);
        if fc < vals[m].min(fr) {
            pts[m] = xc;
            vals[m] = fc;
            continue;
        }
        // shrink toward the best vertex
        for i in 1..=m {
            for j in 0..m {
                pts[i][j] = pts[0][j] + 0.5 * (pts[i][j] - pts[0][j]);
            }
            vals[i] = eval(&pts[i], &mut evals);
        }
    }
    let best = (0..=m).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap();
    SimplexResult {
        x: pts[best].clone(),
        f: vals[best],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(max_evals: usize) -> SimplexOptions {
        SimplexOptions {
            max_evals,
            f_tol: 1e-14,
            step: 0.1,
        }
    }

    #[test]
    fn finds_rosenbrock_minimum() {
        let rosen = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let r = minimize(rosen, &[-1.0, 1.5], &[-2.0, -2.0], &[2.0, 2.0], &opts(2000));
        assert!((r.x[0] - 1.0).abs() < 1e-3 && (r.x[1] - 1.0).abs() < 2e-3, "{:?}", r.x);
    }

    #[test]
    fn respects_box() {
        let r = minimize(|x| x[0], &[0.5], &[0.0], &[1.0], &opts(200));
        assert!(r.x[0] >= 0.0 && r.x[0] < 1e-6);
    }

    #[test]
    fn budget_is_honored() {
        let mut calls = 0;
        minimize(
            |x| {
                calls += 1;
                x.iter().map(|v| v * v).sum()
            },
            &[0.9, 0.9, 0.9],
            &[-1.0; 3],
            &[1.0; 3],
            &opts(25),
        );
        // one shrink step may overrun by at most m evaluations
        assert!(calls <= 25 + 3 + 2);
    }
}
