//! Expected hypervolume improvement over the sector grid.
//!
//! For a candidate `y` inside a non-dominated sector `s`, the gained volume
//! is the part of `[y, y_ref]` covered by non-dominated sectors `s̄` lying
//! componentwise at or above `s` (its local sectors). Per objective, that
//! part of `s̄` has extent `ū_i − y_i` when `s̄` shares the interval of `s`
//! and `ū_i − l̄_i` otherwise. With a separable normal density the
//! expectation factorizes into one-dimensional integrals over the interval
//! of `s`:
//!
//! ```text
//! EVI = Σ_{s ∈ S_⊁} Σ_{s̄ ∈ S_L(s)} ∏_i T_i(s, s̄)
//! T_i = ∫_{l_i}^{u_i} (u_i − y) N dy          if s̄_i = s_i
//! T_i = (ū_i − l̄_i) ∫_{l_i}^{u_i} N dy        if s̄_i above s_i
//! ```
//!
//! Interval identity is decided on grid indices, never on float equality.

use super::grid::{Bound, Sector, SectorGrid};
use super::integrals::{
    gaussian_integral_i1, gaussian_integral_i2, gaussian_integral_i3, gaussian_mass_below,
};
use crate::surrogate::NormalPrediction;

/// Ellipsoid centred at the predictive mean with semi-axes `σ_ref · σ_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncationEllipsoid {
    pub center: Vec<f64>,
    pub semi_axes: Vec<f64>,
}

impl TruncationEllipsoid {
    pub fn new(pred: &NormalPrediction, sigma_ref: f64) -> Self {
        assert!(sigma_ref > 0.0, "sigma_ref must be positive");
        TruncationEllipsoid {
            center: pred.mu.clone(),
            semi_axes: pred.sigma.iter().map(|s| s * sigma_ref).collect(),
        }
    }
}

const DEGENERATE_AXIS_TOL: f64 = 1e-12;

/// Whether the box `[lower, upper]` (lower ends may be `-inf`) meets the ellipsoid.
///
/// The centre is clamped into the box and the clamped point tested against
/// the ellipsoid equation; a zero semi-axis demands an exact hit in that
/// objective.
pub fn box_intersects_ellipsoid(lower: &[Bound], upper: &[f64], e: &TruncationEllipsoid) -> bool {
    let mut acc = 0.0;
    for i in 0..upper.len() {
        let c = e.center[i];
        let mut nearest = c.min(upper[i]);
        if let Bound::Finite(lo) = lower[i] {
            nearest = nearest.max(lo);
        }
        let gap = nearest - c;
        let axis = e.semi_axes[i];
        assert!(axis >= 0.0, "negative semi-axis");
        if axis == 0.0 {
            if gap.abs() > DEGENERATE_AXIS_TOL {
                return false;
            }
        } else {
            acc += (gap / axis).powi(2);
        }
    }
    acc <= 1.0
}

pub fn sector_intersects_ellipsoid(grid: &SectorGrid, s: &Sector, e: &TruncationEllipsoid) -> bool {
    box_intersects_ellipsoid(&grid.lower(s), &grid.upper(s), e)
}

/// Per-objective integrals of one prediction over every interval of an axis.
struct AxisTerms {
    /// `∫ N dy` over the interval.
    mass: Vec<f64>,
    /// `∫ (u − y) N dy` over the interval.
    same: Vec<f64>,
}

fn axis_terms(grid: &SectorGrid, pred: &NormalPrediction) -> Vec<AxisTerms> {
    assert_eq!(pred.mu.len(), grid.dim(), "prediction dimension mismatch");
    grid.axes()
        .iter()
        .enumerate()
        .map(|(i, axis)| {
            let (mu, sigma) = (pred.mu[i], pred.sigma[i]);
            assert!(sigma >= 0.0, "negative standard deviation");
            let k_max = axis.intervals();
            let mut terms = AxisTerms {
                mass: Vec::with_capacity(k_max),
                same: Vec::with_capacity(k_max),
            };
            for k in 0..k_max {
                let u = axis.upper(k);
                let lower = axis.lower(k);
                let (mass, same) = if sigma == 0.0 {
                    // half-open cells (l, u] so a point mass lands in exactly one
                    let inside = mu <= u && lower.finite().is_none_or(|l| mu > l);
                    if inside {
                        (1.0, u - mu)
                    } else {
                        (0.0, 0.0)
                    }
                } else {
                    match lower {
                        Bound::Finite(l) => (
                            gaussian_integral_i3(l, u, mu, sigma),
                            -gaussian_integral_i1(l, u, u, mu, sigma),
                        ),
                        Bound::NegInfinity => (
                            gaussian_mass_below(u, mu, sigma),
                            -gaussian_integral_i2(u, u, mu, sigma),
                        ),
                    }
                };
                terms.mass.push(mass.max(0.0));
                terms.same.push(same.max(0.0));
            }
            terms
        })
        .collect()
}

/// A non-dominated sector with its prediction-independent local-sector sums.
#[derive(Debug, Clone)]
struct CachedSector {
    sector: Sector,
    lower: Vec<Bound>,
    upper: Vec<f64>,
    /// Entry `A` (a bit set of objectives) sums, over local sectors `s̄` that
    /// share the interval of `s` exactly in the objectives of `A`, the product
    /// of the widths of `s̄` in the remaining objectives.
    local_widths: Vec<f64>,
}

/// Sector grid of a fixed Pareto set with the geometric parts of the EVI sum
/// cached, so each prediction only costs the one-dimensional integrals plus
/// `O(|S_⊁| · 2^n)` products.
#[derive(Debug, Clone)]
pub struct EviGrid {
    grid: SectorGrid,
    sectors: Vec<CachedSector>,
}

impl EviGrid {
    pub fn new<V: AsRef<[f64]>>(front: &[V], reference: &[f64]) -> Self {
        let grid = SectorGrid::new(front, reference);
        let n = grid.dim();
        assert!(n < usize::BITS as usize, "too many objectives");
        let nondominated = grid.nondominated_sectors();
        let widths: Vec<Vec<f64>> = grid
            .axes()
            .iter()
            .map(|a| {
                (0..a.intervals())
                    .map(|k| a.lower(k).finite().map_or(f64::NAN, |l| a.upper(k) - l))
                    .collect()
            })
            .collect();
        let sectors = nondominated
            .iter()
            .map(|s| {
                let mut local_widths = vec![0.0; 1 << n];
                for local in &nondominated {
                    if local.index.iter().zip(&s.index).any(|(a, b)| a > b) {
                        continue;
                    }
                    let mut set = 0usize;
                    let mut w = 1.0;
                    for i in 0..n {
                        if local.index[i] == s.index[i] {
                            set |= 1 << i;
                        } else {
                            // strictly above s, hence finite
                            w *= widths[i][local.index[i]];
                        }
                    }
                    local_widths[set] += w;
                }
                CachedSector {
                    lower: grid.lower(s),
                    upper: grid.upper(s),
                    sector: s.clone(),
                    local_widths,
                }
            })
            .collect();
        EviGrid { grid, sectors }
    }

    pub fn grid(&self) -> &SectorGrid {
        &self.grid
    }

    /// `S_⊁` in grid enumeration order.
    pub fn nondominated(&self) -> impl Iterator<Item = &Sector> {
        self.sectors.iter().map(|c| &c.sector)
    }

    fn sum_over(&self, pred: &NormalPrediction, mut keep: impl FnMut(&CachedSector) -> bool) -> f64 {
        let terms = axis_terms(&self.grid, pred);
        let n = self.grid.dim();
        let mut total = 0.0;
        for c in &self.sectors {
            let idx = &c.sector.index;
            if idx.iter().zip(&terms).any(|(&k, t)| t.mass[k] == 0.0) {
                continue;
            }
            if !keep(c) {
                continue;
            }
            for (set, &w) in c.local_widths.iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                let mut term = w;
                for i in 0..n {
                    let t = &terms[i];
                    term *= if set & (1 << i) != 0 { t.same[idx[i]] } else { t.mass[idx[i]] };
                }
                total += term;
            }
        }
        total
    }

    pub fn exact(&self, pred: &NormalPrediction) -> f64 {
        self.sum_over(pred, |_| true)
    }

    /// Restricts the outer sum to sectors meeting the truncation ellipsoid.
    pub fn truncated(&self, pred: &NormalPrediction, sigma_ref: f64) -> f64 {
        let e = TruncationEllipsoid::new(pred, sigma_ref);
        self.sum_over(pred, |c| box_intersects_ellipsoid(&c.lower, &c.upper, &e))
    }
}

/// Closed-form expected hypervolume improvement of `pred` over `front`.
pub fn evi_exact<V: AsRef<[f64]>>(front: &[V], reference: &[f64], pred: &NormalPrediction) -> f64 {
    EviGrid::new(front, reference).exact(pred)
}

/// EVI restricted to sectors meeting the `σ_ref` ellipsoid; `0 <= result <= evi_exact`.
pub fn evi_truncated<V: AsRef<[f64]>>(
    front: &[V],
    reference: &[f64],
    pred: &NormalPrediction,
    sigma_ref: f64,
) -> f64 {
    EviGrid::new(front, reference).truncated(pred, sigma_ref)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pareto::{hypervolume_improvement, pareto_subset};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pred(mu: &[f64], sigma: &[f64]) -> NormalPrediction {
        NormalPrediction::new(mu.to_vec(), sigma.to_vec())
    }

    fn random_front(rng: &mut ChaCha8Rng, k: usize, n: usize) -> Vec<Vec<f64>> {
        let raw: Vec<Vec<f64>> = (0..k).map(|_| (0..n).map(|_| rng.gen()).collect()).collect();
        pareto_subset(&raw)
    }

    /// The double sum over `S_⊁` and `S_L(s)` written out term by term.
    fn literal_double_sum(front: &[Vec<f64>], reference: &[f64], p: &NormalPrediction) -> f64 {
        let g = SectorGrid::new(front, reference);
        let nd = g.nondominated_sectors();
        let mut total = 0.0;
        for s in &nd {
            for local in &nd {
                if local.index.iter().zip(&s.index).any(|(a, b)| a > b) {
                    continue;
                }
                let (lo, up) = (g.lower(s), g.upper(s));
                let (llo, lup) = (g.lower(local), g.upper(local));
                let mut term = 1.0;
                for i in 0..g.dim() {
                    let (mu, sd) = (p.mu[i], p.sigma[i]);
                    let mass = match lo[i] {
                        Bound::Finite(l) => gaussian_integral_i3(l, up[i], mu, sd),
                        Bound::NegInfinity => gaussian_mass_below(up[i], mu, sd),
                    };
                    term *= if local.index[i] == s.index[i] {
                        match lo[i] {
                            Bound::Finite(l) => -gaussian_integral_i1(l, up[i], up[i], mu, sd),
                            Bound::NegInfinity => -gaussian_integral_i2(up[i], up[i], mu, sd),
                        }
                    } else {
                        (lup[i] - llo[i].finite().unwrap()) * mass
                    };
                }
                total += term;
            }
        }
        total
    }

    #[test]
    fn cached_sums_match_literal_double_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..100 {
            let n = rng.gen_range(2..=3);
            let k = rng.gen_range(0..7);
            let front = random_front(&mut rng, k, n);
            let reference = vec![1.0; n];
            let p = pred(
                &(0..n).map(|_| rng.gen_range(-0.2..1.1)).collect::<Vec<_>>(),
                &(0..n).map(|_| rng.gen_range(0.01..0.5)).collect::<Vec<_>>(),
            );
            let a = evi_exact(&front, &reference, &p);
            let b = literal_double_sum(&front, &reference, &p);
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1e-12), "{a} vs {b} {front:?} {p:?}");
        }
    }

    #[test]
    fn dirac_on_empty_front_is_box_volume() {
        let front: Vec<Vec<f64>> = vec![];
        let v = evi_exact(&front, &[1.0, 1.0], &pred(&[0.0, 0.0], &[0.0, 0.0]));
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dominated_dirac_is_zero() {
        let v = evi_exact(&[vec![1.0, 1.0]], &[3.0, 3.0], &pred(&[2.0, 2.0], &[1e-9, 1e-9]));
        assert!(v <= 1e-6);
    }

    #[test]
    fn vanishing_sigma_matches_improvement() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..200 {
            let n = rng.gen_range(2..=3);
            let k = rng.gen_range(0..6);
            let front = random_front(&mut rng, k, n);
            let reference = vec![1.0; n];
            let mu: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.2..1.1)).collect();
            let expected = hypervolume_improvement(&front, &reference, &mu);
            for s in [0.0, 1e-12] {
                let got = evi_exact(&front, &reference, &pred(&mu, &vec![s; n]));
                assert!((got - expected).abs() < 1e-8, "{got} vs {expected}");
            }
        }
    }

    #[test]
    fn huge_sigma_ref_equals_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let front = random_front(&mut rng, 5, 2);
            let p = pred(
                &[rng.gen(), rng.gen()],
                &[rng.gen_range(0.01..0.5), rng.gen_range(0.01..0.5)],
            );
            let g = EviGrid::new(&front, &[1.0, 1.0]);
            let exact = g.exact(&p);
            let trunc = g.truncated(&p, 50.0);
            assert!((exact - trunc).abs() <= 1e-9 * exact.max(1e-300));
        }
    }

    #[test]
    fn truncation_is_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..50 {
            let front = random_front(&mut rng, 6, 2);
            let p = pred(
                &[rng.gen(), rng.gen()],
                &[rng.gen_range(0.01..0.3), rng.gen_range(0.01..0.3)],
            );
            let g = EviGrid::new(&front, &[1.0, 1.0]);
            let mut last = 0.0;
            for sr in [0.5, 1.0, 2.0, 3.0, 6.0, 50.0] {
                let v = g.truncated(&p, sr);
                assert!(v + 1e-15 >= last);
                last = v;
            }
            assert!(last <= g.exact(&p) * (1.0 + 1e-12) + 1e-300);
        }
    }

    #[test]
    fn tiny_sigma_ref_approaches_dirac_value() {
        let front = vec![vec![0.2, 0.8], vec![0.6, 0.3]];
        let mu = [0.4, 0.5];
        let p = pred(&mu, &[0.05, 0.05]);
        let v = evi_truncated(&front, &[1.0, 1.0], &p, 1e-6);
        let dirac = hypervolume_improvement(&front, &[1.0, 1.0], &mu);
        assert!((v - dirac).abs() / dirac < 0.05, "{v} vs {dirac}");
    }

    #[test]
    fn permutation_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..30 {
            let front = random_front(&mut rng, 6, 3);
            let mu: Vec<f64> = (0..3).map(|_| rng.gen()).collect();
            let sg: Vec<f64> = (0..3).map(|_| rng.gen_range(0.01..0.4)).collect();
            let reference = [1.0, 1.1, 1.2];
            let a = evi_exact(&front, &reference, &pred(&mu, &sg));
            let perm = [2, 0, 1];
            let pf: Vec<Vec<f64>> = front.iter().map(|p| perm.iter().map(|&j| p[j]).collect()).collect();
            let pr: Vec<f64> = perm.iter().map(|&j| reference[j]).collect();
            let b = evi_exact(
                &pf,
                &pr,
                &pred(
                    &perm.iter().map(|&j| mu[j]).collect::<Vec<_>>(),
                    &perm.iter().map(|&j| sg[j]).collect::<Vec<_>>(),
                ),
            );
            assert!((a - b).abs() <= 1e-12 * a.max(1e-300));
        }
    }

    #[test]
    fn ellipsoid_examples() {
        let e = TruncationEllipsoid { center: vec![0.5, 0.5], semi_axes: vec![0.1, 0.1] };
        let inside = box_intersects_ellipsoid(&[Bound::Finite(0.0), Bound::Finite(0.0)], &[1.0, 1.0], &e);
        assert!(inside);
        let beyond = box_intersects_ellipsoid(&[Bound::Finite(0.7), Bound::NegInfinity], &[1.0, 1.0], &e);
        assert!(!beyond);
        let below = box_intersects_ellipsoid(&[Bound::NegInfinity, Bound::NegInfinity], &[0.45, 0.45], &e);
        assert!(below);
        let flat = TruncationEllipsoid { center: vec![0.5, 0.5], semi_axes: vec![0.0, 0.1] };
        assert!(!box_intersects_ellipsoid(&[Bound::Finite(0.6), Bound::NegInfinity], &[1.0, 1.0], &flat));
    }

    #[test]
    fn ellipsoid_matches_rejection_sampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..500 {
            let center = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let axes = [rng.gen_range(0.05..0.8), rng.gen_range(0.05..0.8)];
            let e = TruncationEllipsoid { center: center.to_vec(), semi_axes: axes.to_vec() };
            let lo = [rng.gen_range(-1.5..1.0), rng.gen_range(-1.5..1.0)];
            let up = [lo[0] + rng.gen_range(0.01..1.0), lo[1] + rng.gen_range(0.01..1.0)];
            let fast = box_intersects_ellipsoid(&[Bound::Finite(lo[0]), Bound::Finite(lo[1])], &up, &e);
            let mut hit = false;
            for _ in 0..100_000 {
                // uniform point in the ellipsoid
                let r = rng.gen::<f64>().sqrt();
                let t = rng.gen_range(0.0..std::f64::consts::TAU);
                let p = [center[0] + axes[0] * r * t.cos(), center[1] + axes[1] * r * t.sin()];
                if p[0] >= lo[0] && p[0] <= up[0] && p[1] >= lo[1] && p[1] <= up[1] {
                    hit = true;
                    break;
                }
            }
            if fast != hit {
                // only near-tangent boxes may disagree
                let q = [center[0].clamp(lo[0], up[0]), center[1].clamp(lo[1], up[1])];
                let level = ((q[0] - center[0]) / axes[0]).powi(2) + ((q[1] - center[1]) / axes[1]).powi(2);
                let dist = (level.sqrt() - 1.0).abs() * axes[0].min(axes[1]);
                assert!(dist <= 1e-3, "disagreement far from boundary: {dist}");
            }
        }
    }
}
