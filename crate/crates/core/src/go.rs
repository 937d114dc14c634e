//! Locally passive tangent-plane (geometrical-optics) synthesis.
//!
//! Each surface point is treated as a planar reflector with local
//! reflection `Γ(φ) = exp(-j Φ_r(φ))`, `Φ_r = k0R [cos(φ - φ_o) + cos φ]`.
//! Equating it with `(Z - Z_w)/(Z + Z_w)`, `Z_w = η0 / cos φ`, gives the
//! purely reactive `Z/η0 = -j cot(Φ_r/2) / cos φ`.
//!
//! The far field is obtained by physical optics: the surface scattered
//! field is `Γ E_i` on the lit half and, optionally, `-E_i` on the shadow
//! half; it is projected onto cylindrical harmonics and radiated.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::exact::{far_field_exact, j_power, ModalExpansion};
use crate::geometry::{incident_field, AngularGrid, CylinderGeometry};
use crate::pattern::PatternGrid;
use crate::specfun::{truncation_order, CylinderFunctions};
use crate::{Error, Result};

/// Threshold on `|sin(Φ_r/2)|` and `|cos φ|` for singular points.
pub const SINGULAR_TOL: f64 = 1e-6;

/// How the shadow half of the cylinder is treated in [`far_field_po`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShadowModel {
    /// `E_s = -E_i`, the current that forms the shadow.
    #[default]
    Cancel,
    /// Lit half only.
    None,
}

/// GO design sampled on a grid.
#[derive(Debug, Clone)]
pub struct GoProfile {
    pub grid: AngularGrid,
    pub phase_fn: Vec<f64>,
    pub gamma: Vec<Complex64>,
    /// Purely imaginary; NaN where `singular_mask` is set.
    pub z_over_eta0: Vec<Complex64>,
    pub singular_mask: Vec<bool>,
}

/// `Φ_r(φ) = k0R [cos(φ - φ_o) + cos φ]`.
pub fn phase_function(geom: &CylinderGeometry, phi_o: f64, grid: &AngularGrid) -> Vec<f64> {
    let x = geom.k0r();
    grid.samples()
        .iter()
        .map(|&phi| x * ((phi - phi_o).cos() + phi.cos()))
        .collect()
}

/// `Γ(φ) = exp(-j Φ_r(φ))`.
pub fn go_reflection(geom: &CylinderGeometry, phi_o: f64, grid: &AngularGrid) -> Vec<Complex64> {
    phase_function(geom, phi_o, grid)
        .into_iter()
        .map(|p| Complex64::from_polar(1.0, -p))
        .collect()
}

/// Reactive impedance realizing [`go_reflection`].
pub fn go_impedance(geom: &CylinderGeometry, phi_o: f64, grid: &AngularGrid) -> GoProfile {
    let phase_fn = phase_function(geom, phi_o, grid);
    let gamma = phase_fn.iter().map(|&p| Complex64::from_polar(1.0, -p)).collect();
    let nan = Complex64::new(f64::NAN, f64::NAN);
    let (z_over_eta0, singular_mask) = phase_fn
        .iter()
        .zip(grid.samples())
        .map(|(&p, &phi)| {
            let (s, c) = (0.5 * p).sin_cos();
            let cos_phi = phi.cos();
            if s.abs() < SINGULAR_TOL || cos_phi.abs() < SINGULAR_TOL {
                (nan, true)
            } else {
                (Complex64::new(0.0, -(c / s) / cos_phi), false)
            }
        })
        .unzip();
    GoProfile {
        grid: grid.clone(),
        phase_fn,
        gamma,
        z_over_eta0,
        singular_mask,
    }
}

/// Plane-wave reflection of a local impedance, `(Z - Z_w)/(Z + Z_w)` with
/// `Z_w = η0 / cos φ`.
pub fn reflection_from_impedance(z_over_eta0: Complex64, phi: f64) -> Complex64 {
    let zw = 1.0 / phi.cos();
    (z_over_eta0 - zw) / (z_over_eta0 + zw)
}

/// Modal coefficients radiating a prescribed surface field `E_s(R, φ)`.
///
/// Trapezoidal projection onto `e^{-jm(φ - π/2)}` followed by division by
/// `H_m^(2)(k0R)`. The grid must cover the full circle with at least
/// `2(2M + 1)` points.
pub fn expansion_from_surface_field(
    geom: &CylinderGeometry,
    surface: &[Complex64],
    grid: &AngularGrid,
    order: usize,
) -> Result<ModalExpansion> {
    if surface.len() != grid.len() {
        return Err(Error::Dimension {
            expected: grid.len(),
            got: surface.len(),
        });
    }
    if !grid.is_full_circle() || grid.len() < 2 * (2 * order + 1) {
        return Err(Error::InvalidParameter(format!(
            "surface projection needs a full-circle grid of at least {} points",
            2 * (2 * order + 1)
        )));
    }
    let t = CylinderFunctions::new(order, geom.k0r())?;
    let n = grid.len() as f64;
    let m0 = -(order as i32);
    let coeffs = (0..=2 * order)
        .into_par_iter()
        .map(|i| {
            let m = m0 + i as i32;
            let b: Complex64 = surface
                .iter()
                .zip(grid.samples())
                .map(|(e, &phi)| e * Complex64::from_polar(1.0, m as f64 * phi))
                .sum::<Complex64>()
                / n;
            b / (j_power(m) * t.h2(m))
        })
        .collect();
    ModalExpansion::from_coeffs(order, coeffs)
}

/// Physical-optics surface field for a lit-side reflection profile.
pub fn po_surface_field(
    geom: &CylinderGeometry,
    gamma: &[Complex64],
    grid: &AngularGrid,
    shadow: ShadowModel,
) -> Vec<Complex64> {
    grid.samples()
        .iter()
        .zip(gamma)
        .map(|(&phi, &g)| {
            let ei = incident_field(geom, geom.radius_m(), phi);
            if phi.abs() < FRAC_PI_2 {
                g * ei
            } else {
                match shadow {
                    ShadowModel::Cancel => -ei,
                    ShadowModel::None => Complex64::new(0.0, 0.0),
                }
            }
        })
        .collect()
}

/// Far field of a reflection profile by physical-optics propagation.
pub fn far_field_po(
    geom: &CylinderGeometry,
    gamma: &[Complex64],
    grid: &AngularGrid,
    shadow: ShadowModel,
) -> Result<PatternGrid> {
    if gamma.len() != grid.len() {
        return Err(Error::Dimension {
            expected: grid.len(),
            got: gamma.len(),
        });
    }
    let surface = po_surface_field(geom, gamma, grid, shadow);
    let expansion = expansion_from_surface_field(geom, &surface, grid, truncation_order(geom.k0r()))?;
    Ok(far_field_exact(&expansion, grid))
}
