//! Discrete beam synthesis over per-element state sets.
//!
//! Every method minimizes, or is scored against, the sidelobe ratio
//! `max_{S_φ} |F| / max |F|` evaluated by [`Problem::objective`].

mod es;
mod ga;
mod goq;
mod mpdr;
mod sigma;

pub use es::{exhaustive_search, DEFAULT_ES_BUDGET};
pub use ga::{ga_synthesize, GaConfig};
pub use goq::go_quantized;
pub use mpdr::{mpdr_relaxed, mpdr_synthesize, MpdrSolver, DEFAULT_PSI_SAMPLES};
pub use sigma::{build_sigma, sigma_convergence, SigmaMatrices, MIN_SIGMA_POINTS};

use std::time::Duration;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::discrete::{steering_vector, ElementArray, ExcitationVector, SteeringVectorTable};
use crate::geometry::{exclusion_set_mask, AngularGrid, SteeringSpec};
use crate::meta_atom::StateSets;
use crate::{Error, Result};

/// Synthesis strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Es,
    Ga,
    Mpdr,
    GoQ,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Es => "es",
            Method::Ga => "ga",
            Method::Mpdr => "mpdr",
            Method::GoQ => "go_q",
        }
    }
}

/// Array, steering window, state sets and the inner objective grid.
#[derive(Debug, Clone)]
pub struct Problem {
    array: ElementArray,
    spec: SteeringSpec,
    sets: StateSets,
    table: SteeringVectorTable,
    mask: Vec<bool>,
}

impl Problem {
    pub fn new(array: ElementArray, spec: SteeringSpec, sets: StateSets, grid_points: usize) -> Result<Self> {
        if sets.len() != array.len() {
            return Err(Error::Dimension {
                expected: array.len(),
                got: sets.len(),
            });
        }
        let grid = AngularGrid::full_circle(grid_points)?;
        let table = steering_vector(&array, &grid);
        let mask = exclusion_set_mask(&spec, &grid);
        Ok(Self {
            array,
            spec,
            sets,
            table,
            mask,
        })
    }

    pub fn array(&self) -> &ElementArray {
        &self.array
    }

    pub fn spec(&self) -> &SteeringSpec {
        &self.spec
    }

    pub fn state_sets(&self) -> &StateSets {
        &self.sets
    }

    pub fn table(&self) -> &SteeringVectorTable {
        &self.table
    }

    pub fn n_elements(&self) -> usize {
        self.array.len()
    }

    /// Sidelobe ratio of an excitation; 1 for a silent pattern.
    pub fn objective(&self, gamma: &[Complex64]) -> f64 {
        let mut side = 0.0f64;
        let mut peak = 0.0f64;
        for (row, &excluded) in self.table.rows().zip(&self.mask) {
            let f: Complex64 = row.iter().zip(gamma).map(|(a, g)| a * g).sum();
            let m = f.norm();
            peak = peak.max(m);
            if excluded {
                side = side.max(m);
            }
        }
        if peak > 0.0 {
            side / peak
        } else {
            1.0
        }
    }

    pub fn objective_states(&self, states: &[usize]) -> f64 {
        self.objective(&self.sets.gamma(states))
    }

    /// Steering vector at the nominal direction.
    pub fn a_target(&self) -> Vec<Complex64> {
        self.array.steering_vector_at(self.spec.phi_o())
    }

    pub(crate) fn discrete_result(
        &self,
        method: Method,
        states: Vec<usize>,
        evaluations: u64,
        wall_time: Duration,
    ) -> SynthesisResult {
        let gamma = self.sets.gamma(&states);
        let objective = self.objective(&gamma);
        SynthesisResult {
            method,
            excitation: ExcitationVector {
                gamma,
                states: Some(states),
                provenance: method.name().to_string(),
            },
            objective,
            evaluations,
            wall_time,
            rng_seed: None,
            history: Vec::new(),
            sidelobe_power: None,
        }
    }
}

/// Outcome of one synthesis run.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisResult {
    pub method: Method,
    pub excitation: ExcitationVector,
    /// Sidelobe ratio (linear amplitude).
    pub objective: f64,
    pub evaluations: u64,
    pub wall_time: Duration,
    pub rng_seed: Option<u64>,
    /// Best objective per GA generation.
    pub history: Vec<f64>,
    /// MPDR score `γ^H Σ_S γ` of the returned excitation.
    pub sidelobe_power: Option<f64>,
}

impl SynthesisResult {
    pub fn objective_db(&self) -> f64 {
        20.0 * self.objective.log10()
    }
}

/// Nearest state of each element; ties go to the lowest index.
pub fn project_to_states(gamma: &[Complex64], sets: &StateSets) -> Result<Vec<usize>> {
    if gamma.len() != sets.len() {
        return Err(Error::Dimension {
            expected: sets.len(),
            got: gamma.len(),
        });
    }
    Ok(gamma
        .iter()
        .enumerate()
        .map(|(n, g)| {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (k, s) in sets.set(n).iter().enumerate() {
                let d = (g - s).norm_sqr();
                if d < best_d {
                    best = k;
                    best_d = d;
                }
            }
            best
        })
        .collect())
}


#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn one_bit(n: usize) -> StateSets {
        StateSets::from_sets(vec![vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)]; n]).unwrap()
    }

    #[test]
    fn projection_picks_nearest() {
        let g = [Complex64::from_polar(0.9, 170f64.to_radians())];
        assert_eq!(project_to_states(&g, &one_bit(1)).unwrap(), vec![1]);
    }

    #[test]
    fn projection_ties_go_low() {
        let g = [Complex64::new(0.0, 1.0), Complex64::new(0.0, 0.0)];
        assert_eq!(project_to_states(&g, &one_bit(2)).unwrap(), vec![0, 0]);
    }

    #[test]
    fn projection_is_idempotent() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let sets = StateSets::from_sets(
            (0..10)
                .map(|_| (0..4).map(|_| Complex64::from_polar(rng.gen_range(0.2..1.0), rng.gen_range(-3.0..3.0))).collect())
                .collect(),
        )
        .unwrap();
        for _ in 0..50 {
            let g: Vec<Complex64> = (0..10).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            let p1 = project_to_states(&g, &sets).unwrap();
            let p2 = project_to_states(&sets.gamma(&p1), &sets).unwrap();
            assert_eq!(p1, p2);
        }
    }

    #[test]
    fn objective_is_scale_invariant_and_bounded() {
        let p = testutil::toy_problem(30.0);
        let s = [0, 1, 1, 0, 1, 0, 0, 1];
        let g = p.state_sets().gamma(&s);
        let o = p.objective(&g);
        assert!((0.0..=1.0).contains(&o));
        let scaled: Vec<Complex64> = g.iter().map(|v| v * Complex64::new(0.0, 3.0)).collect();
        assert!((p.objective(&scaled) - o).abs() < 1e-12);
        assert_eq!(p.objective(&[Complex64::new(0.0, 0.0); 8]), 1.0);
    }
}
