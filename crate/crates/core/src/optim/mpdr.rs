use std::time::Instant;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use num_complex::Complex64;
use rayon::prelude::*;

use super::{project_to_states, Method, Problem, SigmaMatrices, SynthesisResult};
use crate::{Error, Result};

pub const DEFAULT_PSI_SAMPLES: usize = 360;

const MAX_CONDITION: f64 = 1e12;
const TIKHONOV: f64 = 1e-10;

/// Hermitian factorization of `Σ`, regularized when ill-conditioned.
pub struct MpdrSolver {
    chol: Cholesky<Complex64, Dyn>,
    shift: Option<f64>,
}

impl MpdrSolver {
    pub fn new(sigma: &DMatrix<Complex64>) -> Result<Self> {
        let n = sigma.nrows();
        let ev = sigma.clone().symmetric_eigenvalues();
        let lo = ev.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ev.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let cond = if lo > 0.0 { hi / lo } else { f64::INFINITY };
        let mut m = sigma.clone();
        let mut shift = None;
        if !(cond <= MAX_CONDITION) {
            let eps = TIKHONOV * sigma.trace().re / n as f64;
            log::warn!("covariance condition estimate {cond:.2e}; adding {eps:.3e} to the diagonal");
            for i in 0..n {
                m[(i, i)] += Complex64::new(eps, 0.0);
            }
            shift = Some(eps);
        }
        let chol = Cholesky::new(m).ok_or_else(|| Error::Singular("covariance matrix is not positive definite".into()))?;
        Ok(Self { chol, shift })
    }

    /// Diagonal loading that was applied, if any.
    pub fn shift(&self) -> Option<f64> {
        self.shift
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        self.chol.solve(&DVector::from_column_slice(b)).as_slice().to_vec()
    }

    /// `Σ^{-1} a_o*`.
    pub fn direction(&self, a_o: &[Complex64]) -> Vec<Complex64> {
        let rhs: Vec<Complex64> = a_o.iter().map(|v| v.conj()).collect();
        self.solve(&rhs)
    }

    /// Relaxed solution with `a_o^T γ = ρ e^{jψ}`.
    pub fn relaxed(&self, a_o: &[Complex64], rho: f64, psi: f64) -> Result<Vec<Complex64>> {
        let w = self.direction(a_o);
        let denom: Complex64 = a_o.iter().zip(&w).map(|(a, x)| a * x).sum();
        if denom.norm() == 0.0 || !denom.is_finite() {
            return Err(Error::Singular("distortionless constraint cannot be met".into()));
        }
        let scale = Complex64::from_polar(rho, psi) / denom;
        Ok(w.iter().map(|x| x * scale).collect())
    }
}

/// Minimum-power distortionless excitation (unconstrained complex).
pub fn mpdr_relaxed(sig: &SigmaMatrices, a_o: &[Complex64], rho: f64, psi: f64) -> Result<Vec<Complex64>> {
    if a_o.len() != sig.sigma.nrows() {
        return Err(Error::Dimension {
            expected: sig.sigma.nrows(),
            got: a_o.len(),
        });
    }
    MpdrSolver::new(&sig.sigma)?.relaxed(a_o, rho, psi)
}

/// Projected MPDR with a uniform ψ sweep scored by sidelobe-region power.
pub fn mpdr_synthesize(problem: &Problem, sig: &SigmaMatrices, psi_samples: usize) -> Result<SynthesisResult> {
    let start = Instant::now();
    if psi_samples == 0 {
        return Err(Error::InvalidParameter("psi_samples must be positive".into()));
    }
    if sig.sigma.nrows() != problem.n_elements() {
        return Err(Error::Dimension {
            expected: problem.n_elements(),
            got: sig.sigma.nrows(),
        });
    }
    let solver = MpdrSolver::new(&sig.sigma)?;
    let w = solver.direction(&problem.a_target());
    let sets = problem.state_sets();
    let scored: Vec<(f64, Vec<usize>)> = (0..psi_samples)
        .into_par_iter()
        .map(|k| {
            let psi = -std::f64::consts::PI + std::f64::consts::TAU * k as f64 / psi_samples as f64;
            let rot = Complex64::from_polar(1.0, psi);
            let g: Vec<Complex64> = w.iter().map(|x| x * rot).collect();
            let states = project_to_states(&g, sets).expect("dimensions checked");
            let score = SigmaMatrices::power(&sig.sigma_s, &sets.gamma(&states));
            (score, states)
        })
        .collect();
    let mut best = 0;
    for (k, (s, _)) in scored.iter().enumerate() {
        if *s < scored[best].0 {
            best = k;
        }
    }
    let (score, states) = scored.into_iter().nth(best).expect("at least one sample");
    let mut result = problem.discrete_result(Method::Mpdr, states, psi_samples as u64, start.elapsed());
    result.sidelobe_power = Some(score);
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrete::steering_vector;
    use crate::geometry::AngularGrid;
    use crate::optim::build_sigma;
    use crate::optim::testutil::{baseline_problem, toy_problem};
    use rand::{Rng, SeedableRng};

    fn sigma_for(p: &Problem) -> SigmaMatrices {
        build_sigma(&steering_vector(p.array(), &AngularGrid::full_circle(721).unwrap()), p.spec()).unwrap()
    }

    #[test]
    fn constraint_and_rotation() {
        let p = baseline_problem(30.0);
        let s = sigma_for(&p);
        let a = p.a_target();
        let g = mpdr_relaxed(&s, &a, 2.5, 0.7).unwrap();
        let r: Complex64 = a.iter().zip(&g).map(|(x, y)| x * y).sum();
        assert!((r - Complex64::from_polar(2.5, 0.7)).norm() / 2.5 < 1e-9);
        let g2 = mpdr_relaxed(&s, &a, 2.5, 0.7 + 0.3).unwrap();
        let rot = Complex64::from_polar(1.0, 0.3);
        for (x, y) in g.iter().zip(&g2) {
            assert!((x * rot - y).norm() < 1e-9 * x.norm().max(1e-300));
        }
    }

    #[test]
    fn relaxed_solution_is_minimum_power() {
        let p = baseline_problem(45.0);
        let s = sigma_for(&p);
        let a = p.a_target();
        let g = mpdr_relaxed(&s, &a, 1.0, 0.0).unwrap();
        let best = SigmaMatrices::power(&s.sigma, &g);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let a2: f64 = a.iter().map(|v| v.norm_sqr()).sum();
        for _ in 0..100 {
            let mut x: Vec<Complex64> = (0..30).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            // Shift along conj(a) onto the constraint plane.
            let r: Complex64 = a.iter().zip(&x).map(|(u, v)| u * v).sum();
            let fix = (Complex64::new(1.0, 0.0) - r) / a2;
            for (xi, ai) in x.iter_mut().zip(&a) {
                *xi += fix * ai.conj();
            }
            assert!(SigmaMatrices::power(&s.sigma, &x) >= best);
        }
    }

    #[test]
    fn one_bit_sign_symmetry() {
        let p = baseline_problem(30.0);
        let s = sigma_for(&p);
        let solver = MpdrSolver::new(&s.sigma).unwrap();
        let w = solver.direction(&p.a_target());
        for k in 0..20 {
            let psi = 0.15 * k as f64;
            let project = |ps: f64| {
                let rot = Complex64::from_polar(1.0, ps);
                let g: Vec<Complex64> = w.iter().map(|x| x * rot).collect();
                project_to_states(&g, p.state_sets()).unwrap()
            };
            let a = project(psi);
            let b = project(psi + std::f64::consts::PI);
            let ga = p.state_sets().gamma(&a);
            let gb = p.state_sets().gamma(&b);
            let sa = SigmaMatrices::power(&s.sigma_s, &ga);
            let sb = SigmaMatrices::power(&s.sigma_s, &gb);
            assert!((sa - sb).abs() <= 1e-9 * sa.abs());
            let flipped = a.iter().zip(&b).filter(|(x, y)| x != y).count();
            // Only exact decision-boundary ties may fail to flip.
            assert!(flipped >= 29, "{flipped}");
        }
    }

    #[test]
    fn synthesize_is_deterministic_and_fast() {
        let p = baseline_problem(15.0);
        let s = sigma_for(&p);
        let t = std::time::Instant::now();
        let r1 = mpdr_synthesize(&p, &s, DEFAULT_PSI_SAMPLES).unwrap();
        assert!(t.elapsed().as_secs_f64() < 1.0);
        let r2 = mpdr_synthesize(&p, &s, DEFAULT_PSI_SAMPLES).unwrap();
        assert_eq!(r1.excitation, r2.excitation);
        assert_eq!(r1.objective, p.objective(&r1.excitation.gamma));
        assert!(r1.objective < 1.0);
    }

    #[test]
    fn regularizes_singular_covariance() {
        let mut m = DMatrix::<Complex64>::zeros(2, 2);
        m[(0, 0)] = Complex64::new(1.0, 0.0);
        let solver = MpdrSolver::new(&m).unwrap();
        assert!(solver.shift().is_some());
        let toy = toy_problem(20.0);
        assert!(MpdrSolver::new(&sigma_for(&toy).sigma).is_ok());
    }
}
