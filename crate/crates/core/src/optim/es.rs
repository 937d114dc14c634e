use std::time::Instant;

use rayon::prelude::*;

use super::{Method, Problem, SynthesisResult};
use crate::{Error, Result};

pub const DEFAULT_ES_BUDGET: u64 = 1 << 24;

const CHUNK: u64 = 4096;

fn decode(mut t: u64, l: u64, states: &mut [usize]) {
    for s in states.iter_mut().rev() {
        *s = (t % l) as usize;
        t /= l;
    }
}

/// Global minimizer over all `L^N` assignments.
///
/// Index `t` enumerates assignments in lexicographic order (element 0 most
/// significant), so the smallest `(objective, t)` is the lexicographically
/// smallest optimum.
pub fn exhaustive_search(problem: &Problem, budget: u64) -> Result<SynthesisResult> {
    let start = Instant::now();
    let n = problem.n_elements();
    let l = problem.state_sets().n_states();
    let needed = (l as f64).powi(n as i32);
    if needed > budget as f64 {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    let total = (l as u64).pow(n as u32);
    let chunks = total.div_ceil(CHUNK);
    let (_, best) = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut states = vec![0usize; n];
            let mut best = (f64::INFINITY, u64::MAX);
            for t in c * CHUNK..((c + 1) * CHUNK).min(total) {
                decode(t, l as u64, &mut states);
                let v = problem.objective_states(&states);
                if v < best.0 {
                    best = (v, t);
                }
            }
            best
        })
        .reduce(
            || (f64::INFINITY, u64::MAX),
            |a, b| if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a },
        );
    let mut states = vec![0usize; n];
    decode(best, l as u64, &mut states);
    Ok(problem.discrete_result(Method::Es, states, total, start.elapsed()))
}
