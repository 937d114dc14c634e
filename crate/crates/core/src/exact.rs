//! Exact modal synthesis of the surface impedance.
//!
//! The scattered field is expanded as
//! `E_s(r, φ) = Σ_m c_m e^{-jm(φ - π/2)} H_m^(2)(k0 r)` and the coefficients
//! are chosen so that on `r = R` it equals the steered plane wave
//! `exp[-j k0 R cos(φ - φ_o)]` (taken with a plus sign; patterns are
//! compared by magnitude only). The impedance that supports
//! `E_i + E_s` is then `Z = E_z / H_φ` pointwise.
//!
//! In the far field `H_m^(2)(x) ~ sqrt(2/(πx)) e^{-j(x - mπ/2 - π/4)}`,
//! so up to a common factor `F(φ) = Σ_m (-1)^m c_m e^{-jmφ}`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::geometry::{incident_field, AngularGrid, CylinderGeometry};
use crate::pattern::PatternGrid;
use crate::specfun::CylinderFunctions;
use crate::{Error, Result};

/// Relative threshold on `|η0 H_φ|` below which a grid point is a pole.
pub const POLE_TOL: f64 = 1e-6;

/// Truncated coefficient vector `c_m`, `m = -M..=M`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalExpansion {
    order: usize,
    coeffs: Vec<Complex64>,
}

impl ModalExpansion {
    /// Wrap user-supplied coefficients ordered from `m = -M` to `m = M`.
    pub fn from_coeffs(order: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != 2 * order + 1 {
            return Err(Error::Dimension {
                expected: 2 * order + 1,
                got: coeffs.len(),
            });
        }
        Ok(Self { order, coeffs })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeff(&self, m: i32) -> Complex64 {
        self.coeffs[(m + self.order as i32) as usize]
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `(m, c_m)` pairs from `-M` to `M`.
    pub fn iter(&self) -> impl Iterator<Item = (i32, Complex64)> + '_ {
        let m0 = -(self.order as i32);
        self.coeffs.iter().enumerate().map(move |(i, &c)| (m0 + i as i32, c))
    }
}

/// `c_m = exp[jm(φ_o - π)] J_m(k0R) / H_m^(2)(k0R)`.
pub fn modal_coefficients(geom: &CylinderGeometry, phi_o: f64, order: usize) -> Result<ModalExpansion> {
    let x = geom.k0r();
    if (order as f64) < x.ceil() {
        return Err(Error::InvalidParameter(format!(
            "truncation order {order} is below k0R = {x:.3}"
        )));
    }
    let t = CylinderFunctions::new(order, x)?;
    let m0 = -(order as i32);
    let coeffs = (0..=2 * order)
        .map(|i| {
            let m = m0 + i as i32;
            let phase = Complex64::from_polar(1.0, m as f64 * (phi_o - std::f64::consts::PI));
            phase * t.j(m) / t.h2(m)
        })
        .collect();
    Ok(ModalExpansion { order, coeffs })
}

/// `j^m` for integer `m`.
pub(crate) fn j_power(m: i32) -> Complex64 {
    match m.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Total tangential fields on `r = R`.
#[derive(Debug, Clone, Copy)]
pub struct SurfaceFields {
    pub e_inc: Complex64,
    pub e_sca: Complex64,
    /// `η0 H_φ` of the incident wave.
    pub h_inc: Complex64,
    /// `η0 H_φ` of the scattered wave.
    pub h_sca: Complex64,
}

impl SurfaceFields {
    pub fn e_total(&self) -> Complex64 {
        self.e_inc + self.e_sca
    }

    pub fn h_total(&self) -> Complex64 {
        self.h_inc + self.h_sca
    }
}

/// Incident and scattered fields at `r = R` for every grid angle.
pub fn surface_fields(
    geom: &CylinderGeometry,
    expansion: &ModalExpansion,
    grid: &AngularGrid,
) -> Result<Vec<SurfaceFields>> {
    let x = geom.k0r();
    let t = CylinderFunctions::new(expansion.order(), x)?;
    // d_m = c_m j^m H_m, so Σ c_m e^{-jm(φ-π/2)} H_m = Σ d_m e^{-jmφ}.
    let (d, dp): (Vec<_>, Vec<_>) = expansion
        .iter()
        .map(|(m, c)| {
            let w = c * j_power(m);
            (w * t.h2(m), w * t.h2_prime(m))
        })
        .unzip();
    let m0 = -(expansion.order() as i32);
    Ok(grid
        .samples()
        .par_iter()
        .map(|&phi| {
            let mut s = Complex64::new(0.0, 0.0);
            let mut sp = Complex64::new(0.0, 0.0);
            for (i, (dm, dpm)) in d.iter().zip(&dp).enumerate() {
                let e = Complex64::from_polar(1.0, -((m0 + i as i32) as f64) * phi);
                s += dm * e;
                sp += dpm * e;
            }
            let e_inc = incident_field(geom, geom.radius_m(), phi);
            SurfaceFields {
                e_inc,
                e_sca: s,
                h_inc: phi.cos() * e_inc,
                // (1/(jωμ0)) ∂/∂r acting on H_m(k0 r) gives -j/η0 · H'_m.
                h_sca: -Complex64::i() * sp,
            }
        })
        .collect())
}

/// Sampled normalized impedance `Z(φ)/η0` with pole annotations.
#[derive(Debug, Clone)]
pub struct ImpedanceProfile {
    pub grid: AngularGrid,
    /// NaN where `pole_mask` is set.
    pub z_over_eta0: Vec<Complex64>,
    pub pole_mask: Vec<bool>,
}

impl ImpedanceProfile {
    /// `(min, max)` of `Re{Z/η0}` over non-pole points.
    pub fn resistance_range(&self) -> Option<(f64, f64)> {
        self.finite().map(|z| z.re).fold(None, |acc, r| match acc {
            None => Some((r, r)),
            Some((lo, hi)) => Some((lo.min(r), hi.max(r))),
        })
    }

    /// `(min, max)` of `Im{Z/η0}` over non-pole points.
    pub fn reactance_range(&self) -> Option<(f64, f64)> {
        self.finite().map(|z| z.im).fold(None, |acc, r| match acc {
            None => Some((r, r)),
            Some((lo, hi)) => Some((lo.min(r), hi.max(r))),
        })
    }

    fn finite(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.z_over_eta0
            .iter()
            .zip(&self.pole_mask)
            .filter(|(_, &p)| !p)
            .map(|(z, _)| *z)
    }
}

/// Impedance that makes `E_i + E_s` satisfy `E_z = Z H_φ` on the surface.
pub fn surface_impedance(
    geom: &CylinderGeometry,
    expansion: &ModalExpansion,
    grid: &AngularGrid,
) -> Result<ImpedanceProfile> {
    let fields = surface_fields(geom, expansion, grid)?;
    let max_den = fields.iter().map(|f| f.h_total().norm()).fold(0.0, f64::max);
    let tol = POLE_TOL * max_den;
    let nan = Complex64::new(f64::NAN, f64::NAN);
    let (z, mask) = fields
        .iter()
        .map(|f| {
            let den = f.h_total();
            if den.norm() < tol {
                (nan, true)
            } else {
                (f.e_total() / den, false)
            }
        })
        .unzip();
    Ok(ImpedanceProfile {
        grid: grid.clone(),
        z_over_eta0: z,
        pole_mask: mask,
    })
}

/// `F(φ) = Σ_m (-1)^m c_m e^{-jmφ}`.
pub fn far_field_exact(expansion: &ModalExpansion, grid: &AngularGrid) -> PatternGrid {
    let f = grid
        .samples()
        .par_iter()
        .map(|&phi| {
            expansion
                .iter()
                .map(|(m, c)| {
                    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                    sign * c * Complex64::from_polar(1.0, -(m as f64) * phi)
                })
                .sum()
        })
        .collect();
    PatternGrid::new(grid.clone(), f).expect("modal pattern is finite by construction")
}

/// Per-angle relative violation `|E_z - Z η0 H_φ| / max|E_z|` of the
/// impedance boundary condition; `None` where `excluded` is set.
pub fn boundary_residual(
    geom: &CylinderGeometry,
    expansion: &ModalExpansion,
    z_over_eta0: &[Complex64],
    excluded: &[bool],
    grid: &AngularGrid,
) -> Result<Vec<Option<f64>>> {
    for len in [z_over_eta0.len(), excluded.len()] {
        if len != grid.len() {
            return Err(Error::Dimension {
                expected: grid.len(),
                got: len,
            });
        }
    }
    let fields = surface_fields(geom, expansion, grid)?;
    let scale = fields.iter().map(|f| f.e_total().norm()).fold(0.0, f64::max);
    Ok(fields
        .iter()
        .zip(z_over_eta0)
        .zip(excluded)
        .map(|((f, z), &skip)| {
            if skip || !z.is_finite() {
                None
            } else {
                Some((f.e_total() - z * f.h_total()).norm() / scale)
            }
        })
        .collect())
}
