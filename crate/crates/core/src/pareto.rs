//! Pareto dominance, non-dominated filtering and dominated hypervolume.
//!
//! Minimization throughout: `a` dominates `b` when it is no worse in every
//! objective and the two vectors differ.

use crate::ehvi::grid::SectorGrid;

/// `true` iff `a_i <= b_i` for all `i` and `a != b`.
///
/// Panics on a dimension mismatch.
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    assert_eq!(a.len(), b.len(), "objective vectors differ in length");
    let mut strictly = false;
    for (&ai, &bi) in a.iter().zip(b) {
        if ai > bi {
            return false;
        }
        if ai < bi {
            strictly = true;
        }
    }
    strictly
}

/// Indices of the non-dominated elements, in input order.
///
/// Componentwise-equal vectors are duplicates: only the first occurrence is kept.
pub fn pareto_indices<V: AsRef<[f64]>>(points: &[V]) -> Vec<usize> {
    if points.is_empty() {
        return Vec::new();
    }
    let n = points[0].as_ref().len();
    for p in points {
        assert_eq!(p.as_ref().len(), n, "objective vectors differ in length");
    }
    match n {
        1 => {
            let best = points
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.as_ref()[0].total_cmp(&b.1.as_ref()[0]))
                .map(|(i, _)| i)
                .unwrap();
            vec![best]
        }
        2 => pareto_indices_2d(points),
        _ => pareto_indices_pairwise(points),
    }
}

fn pareto_indices_2d<V: AsRef<[f64]>>(points: &[V]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| {
        let (a, b) = (points[i].as_ref(), points[j].as_ref());
        a[0].total_cmp(&b[0])
            .then(a[1].total_cmp(&b[1]))
            .then(i.cmp(&j))
    });
    let mut kept = Vec::new();
    let mut best_second = f64::INFINITY;
    for i in order {
        let y = points[i].as_ref();
        if y[1] < best_second {
            kept.push(i);
            best_second = y[1];
        }
    }
    kept.sort_unstable();
    kept
}

fn pareto_indices_pairwise<V: AsRef<[f64]>>(points: &[V]) -> Vec<usize> {
    (0..points.len())
        .filter(|&i| {
            let yi = points[i].as_ref();
            points.iter().enumerate().all(|(j, yj)| {
                let yj = yj.as_ref();
                !(dominates(yj, yi) || (j < i && yj == yi))
            })
        })
        .collect()
}

/// The non-dominated subset of `points`.
pub fn pareto_subset<V: AsRef<[f64]>>(points: &[V]) -> Vec<Vec<f64>> {
    pareto_indices(points)
        .into_iter()
        .map(|i| points[i].as_ref().to_vec())
        .collect()
}

/// Volume of `{y | P ⪯ y ⪯ ref}`.
///
/// Points at or beyond the reference point in any coordinate add nothing.
/// Exact sweep for two objectives, sector-grid decomposition otherwise.
pub fn hypervolume<V: AsRef<[f64]>>(points: &[V], reference: &[f64]) -> f64 {
    assert!(!reference.is_empty(), "reference point needs at least one dimension");
    match reference.len() {
        1 => points
            .iter()
            .map(|p| p.as_ref()[0])
            .filter(|&v| v < reference[0])
            .map(|v| reference[0] - v)
            .fold(0.0, f64::max),
        2 => hypervolume_sweep_2d(points, reference),
        _ => hypervolume_grid(points, reference),
    }
}

/// Sweep over the first objective; robust to dominated input points.
pub fn hypervolume_sweep_2d<V: AsRef<[f64]>>(points: &[V], reference: &[f64]) -> f64 {
    assert_eq!(reference.len(), 2);
    let mut pts: Vec<[f64; 2]> = points
        .iter()
        .map(|p| {
            let p = p.as_ref();
            assert_eq!(p.len(), 2, "objective vectors differ in length");
            [p[0], p[1]]
        })
        .filter(|p| p[0] < reference[0] && p[1] < reference[1])
        .collect();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let mut volume = 0.0;
    let mut ceiling = reference[1];
    for p in pts {
        if p[1] < ceiling {
            volume += (reference[0] - p[0]) * (ceiling - p[1]);
            ceiling = p[1];
        }
    }
    volume
}

/// Sum of the box volumes of every dominated grid sector. Works for any `n`
/// at `O(|P|^n)` cost.
pub fn hypervolume_grid<V: AsRef<[f64]>>(points: &[V], reference: &[f64]) -> f64 {
    let front: Vec<Vec<f64>> = points.iter().map(|p| p.as_ref().to_vec()).collect();
    let grid = SectorGrid::new(&front, reference);
    grid.sectors()
        .filter(|s| grid.is_dominated(s))
        .map(|s| grid.finite_volume(&s).expect("dominated sectors are bounded"))
        .sum()
}

/// `V(P ∪ {y}) − V(P)`, never negative.
pub fn hypervolume_improvement<V: AsRef<[f64]>>(points: &[V], reference: &[f64], y: &[f64]) -> f64 {
    assert_eq!(y.len(), reference.len(), "objective vectors differ in length");
    if y.iter().zip(reference).any(|(a, r)| a >= r) {
        return 0.0;
    }
    if points.iter().any(|p| {
        let p = p.as_ref();
        p.iter().zip(y).all(|(a, b)| a <= b)
    }) {
        return 0.0;
    }
    let before = hypervolume(points, reference);
    let mut with: Vec<&[f64]> = points.iter().map(|p| p.as_ref()).collect();
    with.push(y);
    (hypervolume(&with, reference) - before).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_pareto(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = Vec::new();
        for (i, p) in points.iter().enumerate() {
            let dominated = points.iter().any(|q| dominates(q, p));
            let dup = points[..i].iter().any(|q| q == p);
            if !dominated && !dup {
                out.push(p.clone());
            }
        }
        out
    }

    #[test]
    fn dominance_examples() {
        assert!(dominates(&[1.0, 2.0], &[2.0, 3.0]));
        assert!(!dominates(&[1.0, 2.0], &[1.0, 2.0]));
        assert!(!dominates(&[1.0, 3.0], &[2.0, 2.0]));
    }

    #[test]
    #[should_panic]
    fn dominance_dimension_mismatch() {
        dominates(&[1.0], &[1.0, 2.0]);
    }

    #[test]
    fn pareto_subset_examples() {
        let empty: Vec<Vec<f64>> = vec![];
        assert!(pareto_subset(&empty).is_empty());
        let pts = vec![vec![0.0, 2.0], vec![1.0, 1.0], vec![2.0, 0.0], vec![2.0, 2.0]];
        assert_eq!(
            pareto_subset(&pts),
            vec![vec![0.0, 2.0], vec![1.0, 1.0], vec![2.0, 0.0]]
        );
    }

    #[test]
    fn duplicates_keep_first() {
        let pts = vec![vec![1.0, 1.0], vec![1.0, 1.0], vec![0.0, 3.0]];
        assert_eq!(pareto_indices(&pts), vec![0, 2]);
        let pts3 = vec![vec![1.0, 1.0, 1.0], vec![1.0, 1.0, 1.0]];
        assert_eq!(pareto_indices(&pts3), vec![0]);
    }

    #[test]
    fn pareto_matches_pairwise_filter_on_random_cloud() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let pts: Vec<Vec<f64>> = (0..50)
                .map(|_| vec![rng.gen::<f64>(), rng.gen::<f64>()])
                .collect();
            assert_eq!(pareto_subset(&pts), brute_pareto(&pts));
        }
    }

    #[test]
    fn hypervolume_examples() {
        let empty: Vec<Vec<f64>> = vec![];
        assert_eq!(hypervolume(&empty, &[3.0, 3.0]), 0.0);
        assert_eq!(hypervolume(&[vec![1.0, 1.0]], &[3.0, 3.0]), 4.0);
        let p = vec![vec![0.0, 2.0], vec![1.0, 1.0], vec![2.0, 0.0]];
        assert!((hypervolume(&p, &[3.0, 3.0]) - 6.0).abs() < 1e-12);
        assert!((hypervolume_grid(&p, &[3.0, 3.0]) - 6.0).abs() < 1e-12);
    }

    #[test]
    fn points_beyond_reference_are_clipped() {
        let p = vec![vec![4.0, 0.0], vec![1.0, 1.0]];
        assert_eq!(hypervolume(&p, &[3.0, 3.0]), 4.0);
        assert_eq!(hypervolume_grid(&p, &[3.0, 3.0]), 4.0);
    }

    #[test]
    fn hypervolume_3d_unit_cubes() {
        let p = vec![vec![0.0, 1.0, 1.0], vec![1.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]];
        // inclusion-exclusion: 3 * 2 - 3 * 1 + 1
        assert!((hypervolume(&p, &[2.0, 2.0, 2.0]) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn improvement_examples() {
        assert_eq!(hypervolume_improvement(&[vec![1.0, 1.0]], &[3.0, 3.0], &[2.0, 2.0]), 0.0);
        let empty: Vec<Vec<f64>> = vec![];
        assert_eq!(hypervolume_improvement(&empty, &[3.0, 3.0], &[1.0, 1.0]), 4.0);
        let p = vec![vec![0.0, 2.0], vec![2.0, 0.0]];
        assert!((hypervolume_improvement(&p, &[3.0, 3.0], &[1.0, 1.0]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sweep_equals_grid_on_random_fronts() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let k = rng.gen_range(0..12);
            let pts: Vec<Vec<f64>> = (0..k)
                .map(|_| vec![rng.gen_range(-1.0..1.2), rng.gen_range(-1.0..1.2)])
                .collect();
            let front = pareto_subset(&pts);
            let a = hypervolume_sweep_2d(&front, &[1.0, 1.0]);
            let b = hypervolume_grid(&front, &[1.0, 1.0]);
            assert!((a - b).abs() <= 1e-9 * a.abs().max(1e-300) + 1e-15, "{a} vs {b}");
        }
    }

    fn vec2() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-5.0f64..5.0, 2)
    }

    proptest! {
        #[test]
        fn antisymmetry(a in vec2(), b in vec2()) {
            prop_assert!(!(dominates(&a, &b) && dominates(&b, &a)));
        }

        #[test]
        fn transitivity(a in vec2(), b in vec2(), c in vec2()) {
            if dominates(&a, &b) && dominates(&b, &c) {
                prop_assert!(dominates(&a, &c));
            }
        }

        #[test]
        fn subset_is_idempotent_and_mutually_nondominated(
            pts in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 3), 0..30)
        ) {
            let once = pareto_subset(&pts);
            prop_assert_eq!(pareto_subset(&once), once.clone());
            for a in &once {
                for b in &once {
                    prop_assert!(!dominates(a, b));
                }
            }
        }

        #[test]
        fn hypervolume_is_monotone(
            pts in prop::collection::vec(vec2(), 0..20),
            extra in vec2()
        ) {
            let reference = [4.0, 4.0];
            let base = hypervolume(&pareto_subset(&pts), &reference);
            let mut more = pts.clone();
            more.push(extra);
            let grown = hypervolume(&pareto_subset(&more), &reference);
            prop_assert!(grown + 1e-12 >= base);
        }
    }
}
