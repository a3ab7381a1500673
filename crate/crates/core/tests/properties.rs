use parbo::acquisition::{binary_entropy, p_nondominated, AcquisitionConfig};
use parbo::ehvi::{evi_exact, evi_truncated};
use parbo::evaluation::{effective_runtime, nsgaii_run, relative_dominated_volume, Nsga2Config};
use parbo::optimizer::{initial_calculation, optimize, OptimizerConfig, StoppingCriterion};
use parbo::pareto::{dominates, hypervolume_improvement};
use parbo::problems::lookup;
use parbo::surrogate::{ClassifierKind, NormalPrediction};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn points(n: usize, max: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(0.0..1.0f64, n), 0..max)
}

fn prediction(n: usize) -> impl Strategy<Value = NormalPrediction> {
    (
        prop::collection::vec(-0.2..1.2f64, n),
        prop::collection::vec(prop_oneof![Just(0.0), 1e-3..0.6f64], n),
    )
        .prop_map(|(mu, sigma)| NormalPrediction::new(mu, sigma))
}

proptest! {
    #[test]
    fn truncated_evi_is_bounded_and_monotone(front in points(2, 6), pred in prediction(2)) {
        let r = [1.0, 1.0];
        let exact = evi_exact(&front, &r, &pred);
        prop_assert!(exact >= 0.0);
        let mut last = 0.0;
        for s in [0.5, 1.0, 2.0, 3.0, 6.0, 50.0] {
            let t = evi_truncated(&front, &r, &pred, s);
            prop_assert!(t >= last && t <= exact * (1.0 + 1e-12) + 1e-300);
            last = t;
        }
    }

    #[test]
    fn evi_at_zero_sigma_is_the_improvement(front in points(3, 5), mu in prop::collection::vec(-0.2..1.2f64, 3)) {
        let r = [1.0, 1.0, 1.0];
        let pred = NormalPrediction::new(mu.clone(), vec![0.0; 3]);
        let e = evi_exact(&front, &r, &pred);
        prop_assert!((e - hypervolume_improvement(&front, &r, &mu)).abs() <= 1e-8);
    }

    #[test]
    fn p_nondominated_is_a_probability_and_shrinks(front in points(2, 5), extra in prop::collection::vec(0.0..1.0f64, 2), pred in prediction(2)) {
        let p = p_nondominated(&front, &pred);
        prop_assert!((0.0..=1.0).contains(&p));
        let mut bigger = front.clone();
        bigger.push(extra);
        prop_assert!(p_nondominated(&bigger, &pred) <= p + 1e-15);
    }

    #[test]
    fn binary_entropy_is_symmetric(p in 0.0..=1.0f64) {
        let h = binary_entropy(p);
        prop_assert!((0.0..=1.0).contains(&h));
        prop_assert!((h - binary_entropy(1.0 - p)).abs() < 1e-12);
    }

    #[test]
    fn effective_runtime_grows_with_its_inputs(
        n_seq in 1usize..20, n_sim in 1usize..20, n_iter in 0usize..50,
        t_sim in 0.0..100.0f64, t_pure in 0.0..100.0f64,
    ) {
        let t = effective_runtime(n_seq, n_sim, n_iter, t_sim, t_pure);
        prop_assert!(t >= t_pure);
        prop_assert!(effective_runtime(n_seq + 1, n_sim, n_iter, t_sim, t_pure) >= t);
        prop_assert!(effective_runtime(n_seq, n_sim + 1, n_iter, t_sim, t_pure) <= t);
        prop_assert!(effective_runtime(n_seq, n_sim, n_iter + 1, t_sim, t_pure) >= t);
    }

    #[test]
    fn relative_volume_grows_with_data(ys in points(2, 12), k in 0usize..12) {
        let r = [1.0, 1.0];
        let k = k.min(ys.len());
        let part = relative_dominated_volume(&ys[..k], &r, 0.5);
        let all = relative_dominated_volume(&ys, &r, 0.5);
        prop_assert!((0.0..=1.0).contains(&part) && (0.0..=1.0).contains(&all));
        prop_assert!(part <= all);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 4, ..ProptestConfig::default() })]

    #[test]
    fn adaptive_runs_respect_bounds_and_sizes(seed in 0u64..1000, n_seq in 1usize..4, iterations in 1usize..3) {
        let p = lookup("BNH").unwrap();
        let cfg = OptimizerConfig {
            acquisition: AcquisitionConfig {
                weights: p.weights,
                gamma: p.gamma,
                sigma_ref: p.sigma_ref,
                epsilon: p.epsilon,
                reference: p.reference.clone(),
            },
            n_seq,
            regressor: p.regressor,
            classifier: ClassifierKind::default(),
            de: Default::default(),
            polish: Default::default(),
        };
        let stop = StoppingCriterion { max_evaluations: Some(p.n_initial + iterations * n_seq), target: None };
        let out = optimize(&p, &p.initial_domain, p.n_initial, &cfg, &stop, seed).unwrap();
        prop_assert_eq!(out.state.dataset.len(), p.n_initial + iterations * n_seq);
        prop_assert_eq!(out.state.iteration(), iterations);
        for s in out.state.dataset.samples() {
            prop_assert!(p.bounds.contains(&s.x));
        }
        let feasible: Vec<&[f64]> = out.state.dataset.samples().iter().filter_map(|s| s.objectives()).collect();
        for y in &out.front {
            prop_assert!(feasible.contains(&y.as_slice()));
            prop_assert!(!out.front.iter().any(|z| dominates(z, y)));
        }
    }

    #[test]
    fn nsgaii_front_is_feasible_and_nondominated(seed in 0u64..1000) {
        let p = lookup("CIR").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let initial = initial_calculation(&p, &p.initial_domain, p.n_initial, &mut rng).unwrap();
        let cfg = Nsga2Config { population: 20, ..Default::default() };
        let stop = StoppingCriterion { max_evaluations: Some(p.n_initial + 100), target: None };
        let out = nsgaii_run(&p, &cfg, &initial, &stop, &p.reference, seed).unwrap();
        prop_assert_eq!(out.state.dataset.len(), p.n_initial + 100);
        let feasible: Vec<&[f64]> = out.state.dataset.samples().iter().filter_map(|s| s.objectives()).collect();
        for y in &out.front {
            prop_assert!(feasible.contains(&y.as_slice()));
            prop_assert!(!out.front.iter().any(|z| dominates(z, y)));
        }
    }
}
