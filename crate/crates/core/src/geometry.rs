//! Cylinder, illumination, steering window and angular sampling.
//!
//! All angles are radians, stored as principal values in `[-π, π)`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const C0: f64 = 299_792_458.0;

/// Principal value of an angle in `[-π, π)`.
pub fn wrap_angle(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(TAU) - PI;
    // rem_euclid can round up to exactly TAU for tiny negative inputs.
    if w >= PI {
        w - TAU
    } else {
        w
    }
}

/// Cylinder of radius `R` at one operating frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CylinderGeometry {
    radius_m: f64,
    freq_hz: f64,
}

impl CylinderGeometry {
    pub fn new(radius_m: f64, freq_hz: f64) -> Result<Self> {
        if !(radius_m > 0.0 && radius_m.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "radius must be positive, got {radius_m}"
            )));
        }
        if !(freq_hz > 0.0 && freq_hz.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "frequency must be positive, got {freq_hz}"
            )));
        }
        Ok(Self { radius_m, freq_hz })
    }

    pub fn radius_m(&self) -> f64 {
        self.radius_m
    }

    pub fn freq_hz(&self) -> f64 {
        self.freq_hz
    }

    /// Free-space wavenumber `2πf / c0` in rad/m.
    pub fn k0(&self) -> f64 {
        TAU * self.freq_hz / C0
    }

    /// Electrical radius `k0 R`.
    pub fn k0r(&self) -> f64 {
        self.k0() * self.radius_m
    }

    pub fn wavelength_m(&self) -> f64 {
        C0 / self.freq_hz
    }
}

/// Unit plane wave travelling along `-x`: `exp(j k0 r cos φ)`.
pub fn incident_field(geom: &CylinderGeometry, r: f64, phi: f64) -> Complex64 {
    Complex64::from_polar(1.0, geom.k0() * r * phi.cos())
}

/// Desired beam direction and main-beam window width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteeringSpec {
    phi_o: f64,
    delta_phi: f64,
}

impl SteeringSpec {
    pub fn new(phi_o: f64, delta_phi: f64) -> Result<Self> {
        if !phi_o.is_finite() {
            return Err(Error::InvalidParameter("steering angle is not finite".into()));
        }
        if !(delta_phi > 0.0 && delta_phi.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "beamwidth must be positive, got {delta_phi}"
            )));
        }
        Ok(Self {
            phi_o: wrap_angle(phi_o),
            delta_phi,
        })
    }

    pub fn from_degrees(phi_o_deg: f64, delta_phi_deg: f64) -> Result<Self> {
        Self::new(phi_o_deg.to_radians(), delta_phi_deg.to_radians())
    }

    pub fn phi_o(&self) -> f64 {
        self.phi_o
    }

    pub fn delta_phi(&self) -> f64 {
        self.delta_phi
    }

    /// Whether `phi` lies in the sidelobe (exclusion) region.
    pub fn excludes(&self, phi: f64) -> bool {
        wrap_angle(phi - self.phi_o).abs() > 0.5 * self.delta_phi
    }

    /// Log a warning if the window is narrower than what the aperture supports.
    pub fn check_against_reference(&self, reference: f64) -> bool {
        let ok = self.delta_phi >= reference;
        if !ok {
            log::warn!(
                "beamwidth {:.3} deg is below the reference {:.3} deg; synthesis may be ill-conditioned",
                self.delta_phi.to_degrees(),
                reference.to_degrees()
            );
        }
        ok
    }
}

/// Strictly increasing, uniformly spaced angles.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularGrid {
    samples: Vec<f64>,
    spacing: f64,
}

impl AngularGrid {
    /// `n` points covering the full circle, `-π + 2πk/n`.
    pub fn full_circle(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!(
                "angular grid needs at least 2 points, got {n}"
            )));
        }
        let spacing = TAU / n as f64;
        let samples = (0..n).map(|k| -PI + k as f64 * spacing).collect();
        Ok(Self { samples, spacing })
    }

    pub fn from_samples(samples: Vec<f64>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidParameter("angular grid needs at least 2 points".into()));
        }
        let spacing = samples[1] - samples[0];
        for w in samples.windows(2) {
            let d = w[1] - w[0];
            if d <= 0.0 || (d - spacing).abs() > 1e-12 {
                return Err(Error::InvalidParameter(
                    "angular grid must be strictly increasing and uniform".into(),
                ));
            }
        }
        if samples[0] < -PI || *samples.last().unwrap() >= PI {
            return Err(Error::InvalidParameter("angular grid must lie in [-pi, pi)".into()));
        }
        Ok(Self { samples, spacing })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Whether the grid wraps the whole circle (so trapezoid sums are periodic).
    pub fn is_full_circle(&self) -> bool {
        (self.spacing * self.len() as f64 - TAU).abs() < 1e-9
    }

    /// Index of the sample nearest to `phi`, wrap-aware.
    pub fn nearest_index(&self, phi: f64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, &s) in self.samples.iter().enumerate() {
            let d = wrap_angle(s - phi).abs();
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        best
    }
}

/// True where the grid angle lies in the sidelobe region `S_φ`.
pub fn exclusion_set_mask(spec: &SteeringSpec, grid: &AngularGrid) -> Vec<bool> {
    grid.samples().iter().map(|&phi| spec.excludes(phi)).collect()
}
