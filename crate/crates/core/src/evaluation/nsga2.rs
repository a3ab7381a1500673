//! NSGA-II baseline with binary feasibility: every feasible design beats
//! every infeasible one, and infeasible designs are mutually indifferent.

use std::cmp::Ordering;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimizer::{Aborted, IterationRecord, RunOutcome, RunState, StoppingCriterion};
use crate::pareto::{dominates, pareto_subset};
use crate::problems::BlackBox;
use crate::types::{Bounds, Dataset, Sample};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Nsga2Config {
    pub population: usize,
    pub crossover_eta: f64,
    pub crossover_rate: f64,
    pub mutation_eta: f64,
    /// Per-variable mutation probability; `1/d` when absent.
    pub mutation_rate: Option<f64>,
}

impl Default for Nsga2Config {
    fn default() -> Self {
        Nsga2Config {
            population: 50,
            crossover_eta: 15.0,
            crossover_rate: 0.9,
            mutation_eta: 20.0,
            mutation_rate: None,
        }
    }
}

impl Nsga2Config {
    pub fn validate(&self) -> Result<()> {
        if self.population < 4 || !self.population.is_multiple_of(2) {
            return Err(Error::InvalidConfig(format!(
                "NSGA-II population must be even and at least 4, got {}",
                self.population
            )));
        }
        if !(0.0..=1.0).contains(&self.crossover_rate) || self.mutation_rate.is_some_and(|r| !(0.0..=1.0).contains(&r)) {
            return Err(Error::InvalidConfig("NSGA-II rates must lie in [0, 1]".into()));
        }
        if self.crossover_eta < 0.0 || self.mutation_eta < 0.0 {
            return Err(Error::InvalidConfig("distribution indices must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Rank (0 = best) and crowding distance of every member.
fn rank_and_crowd(pop: &[Sample]) -> (Vec<usize>, Vec<f64>) {
    let n = pop.len();
    let feasible: Vec<usize> = (0..n).filter(|&i| pop[i].feasibility.is_feasible()).collect();
    let mut rank = vec![usize::MAX; n];
    let mut crowd = vec![0.0; n];
    let y = |i: usize| pop[i].objectives().expect("feasible samples carry objectives");

    // fast non-dominated sort over the feasible members
    let mut dominated_by: Vec<usize> = vec![0; n];
    let mut dominating: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (a, &i) in feasible.iter().enumerate() {
        for &j in &feasible[a + 1..] {
            if dominates(y(i), y(j)) {
                dominating[i].push(j);
                dominated_by[j] += 1;
            } else if dominates(y(j), y(i)) {
                dominating[j].push(i);
                dominated_by[i] += 1;
            }
        }
    }
    let mut current: Vec<usize> = feasible.iter().copied().filter(|&i| dominated_by[i] == 0).collect();
    let mut r = 0;
    while !current.is_empty() {
        for &i in &current {
            rank[i] = r;
        }
        assign_crowding(&current, &y, &mut crowd);
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominating[i] {
                dominated_by[j] -= 1;
                if dominated_by[j] == 0 {
                    next.push(j);
                }
            }
        }
        current = next;
        r += 1;
    }
    for v in rank.iter_mut().filter(|v| **v == usize::MAX) {
        *v = r;
    }
    (rank, crowd)
}

fn assign_crowding<'a>(front: &[usize], y: &impl Fn(usize) -> &'a [f64], crowd: &mut [f64]) {
    let m = y(front[0]).len();
    for k in 0..m {
        let mut order = front.to_vec();
        order.sort_by(|&a, &b| y(a)[k].total_cmp(&y(b)[k]));
        let (lo, hi) = (y(order[0])[k], y(order[order.len() - 1])[k]);
        crowd[order[0]] = f64::INFINITY;
        crowd[order[order.len() - 1]] = f64::INFINITY;
        if hi > lo {
            for w in order.windows(3) {
                crowd[w[1]] += (y(w[2])[k] - y(w[0])[k]) / (hi - lo);
            }
        }
    }
}

/// Crowded-comparison order: lower rank first, then larger crowding distance.
fn crowded_cmp(rank: &[usize], crowd: &[f64], a: usize, b: usize) -> Ordering {
    rank[a].cmp(&rank[b]).then(crowd[b].total_cmp(&crowd[a]))
}

/// Keeps the `size` best members; exact ties are broken by a random shuffle.
fn environmental_selection(pop: Vec<Sample>, size: usize, rng: &mut ChaCha8Rng) -> Vec<Sample> {
    if pop.len() <= size {
        return pop;
    }
    let (rank, crowd) = rank_and_crowd(&pop);
    let mut order: Vec<usize> = (0..pop.len()).collect();
    order.shuffle(rng);
    order.sort_by(|&a, &b| crowded_cmp(&rank, &crowd, a, b));
    order.truncate(size);
    order.sort_unstable();
    let mut keep = vec![false; pop.len()];
    for i in order {
        keep[i] = true;
    }
    pop.into_iter().zip(keep).filter_map(|(s, k)| k.then_some(s)).collect()
}

fn tournament(rank: &[usize], crowd: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let a = rng.gen_range(0..rank.len());
    let b = rng.gen_range(0..rank.len());
    match crowded_cmp(rank, crowd, a, b) {
        Ordering::Less => a,
        Ordering::Greater => b,
        Ordering::Equal => {
            if rng.gen_bool(0.5) {
                a
            } else {
                b
            }
        }
    }
}

/// Simulated binary crossover with bounded spread, per variable with probability 1/2.
fn sbx(p1: &[f64], p2: &[f64], bounds: &Bounds, eta: f64, rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
    let mut c1 = p1.to_vec();
    let mut c2 = p2.to_vec();
    for i in 0..p1.len() {
        if !rng.gen_bool(0.5) || (p1[i] - p2[i]).abs() <= 1e-14 {
            continue;
        }
        let (lo, hi) = (bounds.lower()[i], bounds.upper()[i]);
        let (y1, y2) = if p1[i] < p2[i] { (p1[i], p2[i]) } else { (p2[i], p1[i]) };
        let u: f64 = rng.gen();
        let spread = |beta: f64| {
            let alpha = 2.0 - beta.powf(-(eta + 1.0));
            if u <= 1.0 / alpha {
                (u * alpha).powf(1.0 / (eta + 1.0))
            } else {
                (1.0 / (2.0 - u * alpha)).powf(1.0 / (eta + 1.0))
            }
        };
        let bq1 = spread(1.0 + 2.0 * (y1 - lo) / (y2 - y1));
        let bq2 = spread(1.0 + 2.0 * (hi - y2) / (y2 - y1));
        let a = (0.5 * ((y1 + y2) - bq1 * (y2 - y1))).clamp(lo, hi);
        let b = (0.5 * ((y1 + y2) + bq2 * (y2 - y1))).clamp(lo, hi);
        if rng.gen_bool(0.5) {
            c1[i] = b;
            c2[i] = a;
        } else {
            c1[i] = a;
            c2[i] = b;
        }
    }
    (c1, c2)
}

/// Bounded polynomial mutation.
fn polynomial_mutation(x: &mut [f64], bounds: &Bounds, eta: f64, rate: f64, rng: &mut ChaCha8Rng) {
    for i in 0..x.len() {
        if !rng.gen_bool(rate) {
            continue;
        }
        let (lo, hi) = (bounds.lower()[i], bounds.upper()[i]);
        if hi <= lo {
            continue;
        }
        let d1 = (x[i] - lo) / (hi - lo);
        let d2 = (hi - x[i]) / (hi - lo);
        let u: f64 = rng.gen();
        let p = 1.0 / (eta + 1.0);
        let dq = if u < 0.5 {
            let v = 2.0 * u + (1.0 - 2.0 * u) * (1.0 - d1).powf(eta + 1.0);
            v.powf(p) - 1.0
        } else {
            let v = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - d2).powf(eta + 1.0);
            1.0 - v.powf(p)
        };
        x[i] = (x[i] + dq * (hi - lo)).clamp(lo, hi);
    }
}

fn offspring(parents: &[Sample], bounds: &Bounds, cfg: &Nsga2Config, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let (rank, crowd) = rank_and_crowd(parents);
    let rate = cfg.mutation_rate.unwrap_or(1.0 / bounds.dim() as f64);
    let mut children = Vec::with_capacity(cfg.population);
    while children.len() < cfg.population {
        let a = &parents[tournament(&rank, &crowd, rng)].x;
        let b = &parents[tournament(&rank, &crowd, rng)].x;
        let (mut c1, mut c2) = if rng.gen_bool(cfg.crossover_rate) {
            sbx(a, b, bounds, cfg.crossover_eta, rng)
        } else {
            (a.clone(), b.clone())
        };
        polynomial_mutation(&mut c1, bounds, cfg.mutation_eta, rate, rng);
        polynomial_mutation(&mut c2, bounds, cfg.mutation_eta, rate, rng);
        children.push(c1);
        children.push(c2);
    }
    children
}

/// Runs NSGA-II from `initial` (the first parent generation, trimmed to the
/// population size by environmental selection if larger).
///
/// Budgets are counted in whole generations: a generation is started only if
/// all of its evaluations fit into `stop.max_evaluations`. The returned state
/// holds every evaluated design; its iteration timings report the operator
/// time as acquisition time.
pub fn nsgaii_run(
    problem: &dyn BlackBox,
    cfg: &Nsga2Config,
    initial: &Dataset,
    stop: &StoppingCriterion,
    reference: &[f64],
    seed: u64,
) -> std::result::Result<RunOutcome, Aborted> {
    let mut state = RunState {
        dataset: initial.clone(),
        initial_size: initial.len(),
        iterations: Vec::new(),
    };
    let checked = cfg.validate().and_then(|_| {
        if stop.max_evaluations.is_none() && stop.target.is_none() {
            Err(Error::InvalidConfig("a stopping criterion needs a budget or a target".into()))
        } else if initial.is_empty() {
            Err(Error::NotEnoughData("NSGA-II needs a nonempty initial dataset".into()))
        } else {
            Ok(())
        }
    });
    if let Err(error) = checked {
        return Err(Aborted { error, state });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bounds = problem.bounds().clone();
    let mut parents = environmental_selection(initial.samples().to_vec(), cfg.population, &mut rng);
    loop {
        if stop.is_met(&state.dataset, reference) {
            break;
        }
        if stop.max_evaluations.is_some_and(|m| state.dataset.len() + cfg.population > m) {
            break;
        }
        let t0 = Instant::now();
        let children = offspring(&parents, &bounds, cfg, &mut rng);
        let t1 = Instant::now();
        let mut evaluated = Vec::with_capacity(children.len());
        for x in &children {
            match problem.evaluate(x) {
                Ok(s) => evaluated.push(s),
                Err(error) => return Err(Aborted { error, state }),
            }
        }
        let t2 = Instant::now();
        state.dataset.extend(evaluated.iter().cloned());
        let mut merged = parents;
        merged.extend(evaluated);
        parents = environmental_selection(merged, cfg.population, &mut rng);
        let t3 = Instant::now();
        state.iterations.push(IterationRecord {
            iteration: state.iterations.len() + 1,
            evaluations: state.dataset.len(),
            model_seconds: 0.0,
            acquisition_seconds: ((t1 - t0) + (t3 - t2)).as_secs_f64(),
            evaluation_seconds: (t2 - t1).as_secs_f64(),
        });
    }
    let front = pareto_subset(&state.dataset.feasible_objectives());
    Ok(RunOutcome { front, state })
}
