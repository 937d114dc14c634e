//! Conformal array of reconfigurable elements on the lit half.
//!
//! `F(φ) = a(φ)^T γ`, with element contribution
//! `a_n(φ) = E_n(φ) exp{j k0R [cos(φ - α_n) + cos α_n]}`.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::{wrap_angle, AngularGrid, CylinderGeometry, SteeringSpec};
use crate::pattern::{first_null_width, metrics, PatternGrid};
use crate::{Error, Result};

/// Grid used for [`reference_beamwidth`].
pub const REFERENCE_GRID_POINTS: usize = 3601;

/// Element radiation pattern relative to the local normal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementPattern {
    #[default]
    #[serde(rename = "cos")]
    Cosine,
    #[serde(rename = "cos2")]
    CosineSquared,
}

impl ElementPattern {
    fn gain(self, offset: f64) -> f64 {
        let c = offset.cos();
        match self {
            ElementPattern::Cosine => c,
            ElementPattern::CosineSquared => c * c,
        }
    }
}

/// Illuminated elements, centred on `φ = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementArray {
    geom: CylinderGeometry,
    alphas: Vec<f64>,
    arc_pitch_m: f64,
    pattern: ElementPattern,
}

impl ElementArray {
    pub fn geometry(&self) -> &CylinderGeometry {
        &self.geom
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }

    pub fn arc_pitch_m(&self) -> f64 {
        self.arc_pitch_m
    }

    pub fn element_pattern(&self) -> ElementPattern {
        self.pattern
    }

    /// Steering vector entries at a single angle.
    pub fn steering_vector_at(&self, phi: f64) -> Vec<Complex64> {
        let x = self.geom.k0r();
        self.alphas
            .iter()
            .map(|&a| {
                let off = wrap_angle(phi - a);
                if off.abs() < FRAC_PI_2 {
                    let g = self.pattern.gain(off);
                    Complex64::from_polar(g, x * ((phi - a).cos() + a.cos()))
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect()
    }
}

/// Place `n` elements at arc pitch `p`: `α_n = (n - (N+1)/2) p/R`.
pub fn build_array(
    geom: &CylinderGeometry,
    n_elements: usize,
    arc_pitch_m: f64,
    pattern: ElementPattern,
) -> Result<ElementArray> {
    if n_elements == 0 {
        return Err(Error::InvalidParameter("array needs at least one element".into()));
    }
    if !(arc_pitch_m > 0.0 && arc_pitch_m.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "arc pitch must be positive, got {arc_pitch_m}"
        )));
    }
    let step = arc_pitch_m / geom.radius_m();
    if n_elements as f64 * step >= std::f64::consts::PI {
        return Err(Error::InvalidParameter(format!(
            "{n_elements} elements at {arc_pitch_m} m pitch extend into the shadow half"
        )));
    }
    let centre = (n_elements as f64 + 1.0) / 2.0;
    let alphas = (1..=n_elements).map(|n| (n as f64 - centre) * step).collect();
    Ok(ElementArray {
        geom: *geom,
        alphas,
        arc_pitch_m,
        pattern,
    })
}

/// `a(φ)` tabulated on a grid, row-major (one row per angle).
#[derive(Debug, Clone)]
pub struct SteeringVectorTable {
    grid: AngularGrid,
    n: usize,
    a: Vec<Complex64>,
}

impl SteeringVectorTable {
    pub fn grid(&self) -> &AngularGrid {
        &self.grid
    }

    pub fn n_elements(&self) -> usize {
        self.n
    }

    pub fn row(&self, k: usize) -> &[Complex64] {
        &self.a[k * self.n..(k + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Complex64]> {
        self.a.chunks_exact(self.n)
    }
}

pub fn steering_vector(array: &ElementArray, grid: &AngularGrid) -> SteeringVectorTable {
    let a = grid
        .samples()
        .par_iter()
        .flat_map_iter(|&phi| array.steering_vector_at(phi))
        .collect();
    SteeringVectorTable {
        grid: grid.clone(),
        n: array.len(),
        a,
    }
}

/// Excitation of every element.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcitationVector {
    pub gamma: Vec<Complex64>,
    /// Chosen state index per element, for discrete solutions.
    pub states: Option<Vec<usize>>,
    pub provenance: String,
}

impl ExcitationVector {
    pub fn continuous(gamma: Vec<Complex64>, provenance: impl Into<String>) -> Self {
        Self {
            gamma,
            states: None,
            provenance: provenance.into(),
        }
    }
}

fn dot(row: &[Complex64], gamma: &[Complex64]) -> Complex64 {
    row.iter().zip(gamma).map(|(a, g)| a * g).sum()
}

/// `F(φ) = a(φ)^T γ` on the table grid.
pub fn far_field_discrete(table: &SteeringVectorTable, gamma: &[Complex64]) -> Result<PatternGrid> {
    if gamma.len() != table.n {
        return Err(Error::Dimension {
            expected: table.n,
            got: gamma.len(),
        });
    }
    let f = table.rows().map(|r| dot(r, gamma)).collect();
    PatternGrid::new(table.grid.clone(), f)
}

/// Conjugate-phase excitation pointed at `phi_o`.
pub fn cophasal_excitation(array: &ElementArray, phi_o: f64) -> Vec<Complex64> {
    let x = array.geom.k0r();
    array
        .alphas
        .iter()
        .map(|&a| Complex64::from_polar(1.0, -x * ((phi_o - a).cos() + a.cos())))
        .collect()
}

/// How the reference beamwidth is read off the cophasal pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceRule {
    /// Half-power width.
    #[default]
    HalfPower,
    /// Width between the first nulls.
    FirstNull,
}

/// Main-lobe width of the cophasal pattern, half-power rule.
pub fn reference_beamwidth(array: &ElementArray, phi_o: f64) -> Result<f64> {
    reference_beamwidth_with(array, phi_o, ReferenceRule::HalfPower)
}

pub fn reference_beamwidth_with(array: &ElementArray, phi_o: f64, rule: ReferenceRule) -> Result<f64> {
    let grid = AngularGrid::full_circle(REFERENCE_GRID_POINTS)?;
    let table = steering_vector(array, &grid);
    let pattern = far_field_discrete(&table, &cophasal_excitation(array, phi_o))?;
    let width = match rule {
        ReferenceRule::HalfPower => {
            // Window is irrelevant for the beamwidth.
            metrics(&pattern, &SteeringSpec::new(phi_o, 1.0)?).beamwidth_rad
        }
        ReferenceRule::FirstNull => first_null_width(&pattern),
    };
    width.ok_or_else(|| Error::Domain("cophasal pattern has no resolvable main lobe".into()))
}
