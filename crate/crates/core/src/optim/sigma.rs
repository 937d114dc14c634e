use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::discrete::{steering_vector, ElementArray, SteeringVectorTable};
use crate::geometry::{exclusion_set_mask, AngularGrid, SteeringSpec};
use crate::{Error, Result};

pub const MIN_SIGMA_POINTS: usize = 721;

/// `Σ = ∫ a* a^T dφ` over the circle and over the sidelobe region.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaMatrices {
    pub sigma: DMatrix<Complex64>,
    pub sigma_s: DMatrix<Complex64>,
}

fn quadratic_sum<'a>(rows: impl Iterator<Item = &'a [Complex64]>, n: usize, h: f64) -> DMatrix<Complex64> {
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for row in rows {
        for i in 0..n {
            let ci = row[i].conj();
            if ci == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in i..n {
                m[(i, j)] += ci * row[j];
            }
        }
    }
    for i in 0..n {
        m[(i, i)].im = 0.0;
        for j in i + 1..n {
            m[(j, i)] = m[(i, j)].conj();
        }
    }
    m * Complex64::new(h, 0.0)
}

/// Trapezoidal `Σ` and `Σ_S` on the table grid.
pub fn build_sigma(table: &SteeringVectorTable, spec: &SteeringSpec) -> Result<SigmaMatrices> {
    let grid = table.grid();
    if grid.len() < MIN_SIGMA_POINTS || !grid.is_full_circle() {
        return Err(Error::InvalidParameter(format!(
            "covariance quadrature needs a full-circle grid of at least {MIN_SIGMA_POINTS} points"
        )));
    }
    let n = table.n_elements();
    let h = grid.spacing();
    let mask = exclusion_set_mask(spec, grid);
    let sigma = quadratic_sum(table.rows(), n, h);
    let sigma_s = quadratic_sum(table.rows().zip(&mask).filter(|(_, &m)| m).map(|(r, _)| r), n, h);
    Ok(SigmaMatrices { sigma, sigma_s })
}

/// Largest entry change of `Σ` and `Σ_S` between `points` and `2·points`,
/// relative to the largest entry. Logs a warning above 1e-8.
pub fn sigma_convergence(array: &ElementArray, spec: &SteeringSpec, points: usize) -> Result<f64> {
    let coarse = build_sigma(&steering_vector(array, &AngularGrid::full_circle(points)?), spec)?;
    let fine = build_sigma(&steering_vector(array, &AngularGrid::full_circle(2 * points)?), spec)?;
    let rel = |a: &DMatrix<Complex64>, b: &DMatrix<Complex64>| {
        let scale = b.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / scale
    };
    let change = rel(&coarse.sigma, &fine.sigma).max(rel(&coarse.sigma_s, &fine.sigma_s));
    if change > 1e-8 {
        log::warn!("covariance quadrature not converged at {points} points: relative change {change:.2e} on doubling");
    }
    Ok(change)
}

impl SigmaMatrices {
    /// `max |Σ - Σ^H|` over both matrices.
    pub fn hermitian_defect(&self) -> f64 {
        [&self.sigma, &self.sigma_s]
            .iter()
            .map(|m| (*m - m.adjoint()).iter().map(|v| v.norm()).fold(0.0, f64::max))
            .fold(0.0, f64::max)
    }

    /// Smallest eigenvalue of each matrix divided by `trace/N`.
    pub fn min_relative_eigenvalues(&self) -> (f64, f64) {
        let f = |m: &DMatrix<Complex64>| {
            let n = m.nrows() as f64;
            let trace = m.trace().re;
            if trace == 0.0 {
                return 0.0;
            }
            let ev = m.clone().symmetric_eigenvalues();
            ev.iter().cloned().fold(f64::INFINITY, f64::min) / (trace / n)
        };
        (f(&self.sigma), f(&self.sigma_s))
    }

    /// `γ^H Σ γ` (real part).
    pub fn power(m: &DMatrix<Complex64>, gamma: &[Complex64]) -> f64 {
        let n = gamma.len();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let mut row = Complex64::new(0.0, 0.0);
            for j in 0..n {
                row += m[(i, j)] * gamma[j];
            }
            acc += gamma[i].conj() * row;
        }
        acc.re
    }
}
