use std::time::Instant;

use super::{project_to_states, Method, Problem, SynthesisResult};
use crate::discrete::cophasal_excitation;

/// Sample the GO reflection `exp(-j Φ_r(α_n))` at every element and
/// quantize it to the nearest state.
pub fn go_quantized(problem: &Problem) -> SynthesisResult {
    let start = Instant::now();
    let gamma = cophasal_excitation(problem.array(), problem.spec().phi_o());
    let states = project_to_states(&gamma, problem.state_sets()).expect("one state set per element");
    problem.discrete_result(Method::GoQ, states, 1, start.elapsed())
}
