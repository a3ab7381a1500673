//! Differential evolution (best/1/bin) over the unit cube, maximizing.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::RngCore;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeConfig {
    /// Population size per design dimension.
    pub population_per_dim: usize,
    pub max_population: usize,
    pub generations: usize,
    /// Differential weight `F`.
    pub mutation: f64,
    /// Crossover probability `CR`.
    pub crossover: f64,
}

impl Default for DeConfig {
    fn default() -> Self {
        DeConfig {
            population_per_dim: 15,
            max_population: 120,
            generations: 100,
            mutation: 0.9,
            crossover: 0.9,
        }
    }
}

impl DeConfig {
    pub fn population(&self, dim: usize) -> usize {
        (self.population_per_dim * dim).clamp(4, self.max_population.max(4))
    }
}

/// Latin hypercube sample of `n` points in `[0, 1]^d`.
pub fn latin_hypercube(n: usize, d: usize, rng: &mut dyn RngCore) -> Vec<Vec<f64>> {
    let mut pts = vec![vec![0.0; d]; n];
    for j in 0..d {
        let mut strata: Vec<usize> = (0..n).collect();
        strata.shuffle(rng);
        for (i, &s) in strata.iter().enumerate() {
            pts[i][j] = (s as f64 + rng.gen::<f64>()) / n as f64;
        }
    }
    pts
}

/// Returns the best point found and its value.
pub fn differential_evolution(
    mut f: impl FnMut(&[f64]) -> f64,
    dim: usize,
    cfg: &DeConfig,
    rng: &mut dyn RngCore,
) -> (Vec<f64>, f64) {
    assert!(dim >= 1);
    let np = cfg.population(dim);
    let mut pop = latin_hypercube(np, dim, rng);
    let mut fit: Vec<f64> = pop.iter().map(|x| sanitize(f(x))).collect();
    let mut best = argmax(&fit);
    let mut trial = vec![0.0; dim];
    for _ in 0..cfg.generations {
        for i in 0..np {
            let (r1, r2) = distinct_pair(np, i, best, rng);
            let jrand = rng.gen_range(0..dim);
            for j in 0..dim {
                trial[j] = if j == jrand || rng.gen::<f64>() < cfg.crossover {
                    let v = pop[best][j] + cfg.mutation * (pop[r1][j] - pop[r2][j]);
                    if (0.0..=1.0).contains(&v) {
                        v
                    } else {
                        rng.gen()
                    }
                } else {
                    pop[i][j]
                };
            }
            let ft = sanitize(f(&trial));
            if ft >= fit[i] {
                pop[i].copy_from_slice(&trial);
                fit[i] = ft;
                if ft > fit[best] {
                    best = i;
                }
            }
        }
    }
    (pop[best].clone(), fit[best])
}

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::NEG_INFINITY
    } else {
        v
    }
}

fn argmax(v: &[f64]) -> usize {
    (0..v.len()).max_by(|&a, &b| v[a].total_cmp(&v[b]).then(b.cmp(&a))).unwrap()
}

/// Two distinct indices, both different from `i` and `best` when the population allows.
fn distinct_pair(np: usize, i: usize, best: usize, rng: &mut dyn RngCore) -> (usize, usize) {
    let pick = |rng: &mut dyn RngCore, avoid: &[usize]| loop {
        let r = rng.gen_range(0..np);
        if !avoid.contains(&r) || avoid.len() >= np {
            return r;
        }
    };
    let r1 = pick(rng, &[i, best]);
    let r2 = pick(rng, &[i, best, r1]);
    (r1, r2)
}
