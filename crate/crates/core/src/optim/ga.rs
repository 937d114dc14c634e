use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Method, Problem, SynthesisResult};
use crate::{Error, Result};

/// Genetic-algorithm settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaConfig {
    pub population: usize,
    pub generations: usize,
    pub p_crossover: f64,
    pub p_mutation: f64,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population: 1000,
            generations: 200,
            p_crossover: 0.9,
            p_mutation: 0.05,
            seed: 0,
        }
    }
}

impl GaConfig {
    fn validate(&self) -> Result<()> {
        if self.population < 2 {
            return Err(Error::InvalidParameter("GA population must be at least 2".into()));
        }
        for (name, p) in [("p_crossover", self.p_crossover), ("p_mutation", self.p_mutation)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParameter(format!("{name} must lie in [0, 1], got {p}")));
            }
        }
        Ok(())
    }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

fn tournament(rng: &mut ChaCha8Rng, fitness: &[f64]) -> usize {
    let a = rng.gen_range(0..fitness.len());
    let b = rng.gen_range(0..fitness.len());
    if fitness[b] < fitness[a] || (fitness[b] == fitness[a] && b < a) {
        b
    } else {
        a
    }
}

fn argmin(fitness: &[f64]) -> usize {
    let mut best = 0;
    for (i, &f) in fitness.iter().enumerate() {
        if f < fitness[best] {
            best = i;
        }
    }
    best
}

/// Integer-chromosome GA: tournament-2 selection, uniform crossover,
/// per-gene mutation to a different allele, one elite.
///
/// Every individual draws from its own ChaCha stream keyed by generation
/// and slot. The outcome does not depend on the thread count.
pub fn ga_synthesize(problem: &Problem, config: &GaConfig) -> Result<SynthesisResult> {
    config.validate()?;
    let start = Instant::now();
    let n = problem.n_elements();
    let l = problem.state_sets().n_states();
    let pop = config.population;

    let mut population: Vec<Vec<usize>> = (0..pop)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(config.seed, i as u64);
            (0..n).map(|_| rng.gen_range(0..l)).collect()
        })
        .collect();
    let mut fitness: Vec<f64> = population.par_iter().map(|c| problem.objective_states(c)).collect();
    let mut evaluations = pop as u64;
    let mut history = Vec::with_capacity(config.generations + 1);
    history.push(fitness[argmin(&fitness)]);

    for g in 0..config.generations {
        let elite = argmin(&fitness);
        let base = (g as u64 + 1) * pop as u64;
        let offspring: Vec<(Vec<usize>, f64)> = (1..pop)
            .into_par_iter()
            .map(|i| {
                let mut rng = stream(config.seed, base + i as u64);
                let pa = &population[tournament(&mut rng, &fitness)];
                let pb = &population[tournament(&mut rng, &fitness)];
                let mut child = if rng.gen_bool(config.p_crossover) {
                    pa.iter().zip(pb).map(|(&x, &y)| if rng.gen_bool(0.5) { x } else { y }).collect()
                } else {
                    pa.clone()
                };
                if l > 1 {
                    for gene in child.iter_mut() {
                        if rng.gen_bool(config.p_mutation) {
                            let k = rng.gen_range(0..l - 1);
                            *gene = if k >= *gene { k + 1 } else { k };
                        }
                    }
                }
                let f = problem.objective_states(&child);
                (child, f)
            })
            .collect();
        evaluations += offspring.len() as u64;
        let mut next_pop = Vec::with_capacity(pop);
        let mut next_fit = Vec::with_capacity(pop);
        next_pop.push(population[elite].clone());
        next_fit.push(fitness[elite]);
        for (c, f) in offspring {
            next_pop.push(c);
            next_fit.push(f);
        }
        population = next_pop;
        fitness = next_fit;
        history.push(fitness[argmin(&fitness)]);
    }

    let best = argmin(&fitness);
    let states = population.swap_remove(best);
    let mut result = problem.discrete_result(Method::Ga, states, evaluations, start.elapsed());
    result.rng_seed = Some(config.seed);
    result.history = history;
    Ok(result)
}
