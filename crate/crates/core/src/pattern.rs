//! Sampled far-field patterns and the figures of merit reported for them.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::geometry::{wrap_angle, AngularGrid, SteeringSpec};
use crate::{Error, Result};

/// Complex far-field samples `F(φ)` on an angular grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternGrid {
    grid: AngularGrid,
    f: Vec<Complex64>,
}

impl PatternGrid {
    pub fn new(grid: AngularGrid, f: Vec<Complex64>) -> Result<Self> {
        if f.len() != grid.len() {
            return Err(Error::Dimension {
                expected: grid.len(),
                got: f.len(),
            });
        }
        if f.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("pattern contains non-finite samples".into()));
        }
        Ok(Self { grid, f })
    }

    pub fn grid(&self) -> &AngularGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.f
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.f.iter().map(|v| v.norm()).collect()
    }

    pub fn max_magnitude(&self) -> f64 {
        self.f.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `20 log10(|F| / reference)`; `reference` defaults to the own peak.
    pub fn magnitude_db(&self, reference: Option<f64>) -> Vec<f64> {
        let r = reference.unwrap_or_else(|| self.max_magnitude());
        self.f.iter().map(|v| 20.0 * (v.norm() / r).log10()).collect()
    }

    /// Trapezoidal `∫ |F|² dφ` over the (periodic) grid.
    pub fn energy(&self) -> f64 {
        self.f.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.spacing()
    }

    /// Linearly interpolated magnitude at an arbitrary angle.
    pub fn magnitude_at(&self, phi: f64) -> f64 {
        let s = self.grid.samples();
        let n = s.len();
        let h = self.grid.spacing();
        let t = wrap_angle(phi - s[0]).rem_euclid(std::f64::consts::TAU) / h;
        let i = (t.floor() as usize).min(n - 1);
        let frac = t - i as f64;
        let a = self.f[i].norm();
        let b = self.f[(i + 1) % n].norm();
        a + frac * (b - a)
    }
}

/// Peak, pointing, sidelobe level and beamwidth of a pattern.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatternMetrics {
    /// Peak magnitude in dB (not normalized).
    pub peak_db: f64,
    pub peak_dir_rad: f64,
    /// Highest level in the exclusion region relative to the peak;
    /// `-inf` when the exclusion region is empty or silent.
    pub sll_db: f64,
    /// Half-power width around the peak, absent without two crossings.
    pub beamwidth_rad: Option<f64>,
    /// Level at the nominal steering direction in dB (not normalized).
    pub target_level_db: f64,
}

fn db(v: f64) -> f64 {
    20.0 * v.log10()
}

/// Parabolic vertex through three samples, returning (offset, value).
fn parabolic_peak(ym: f64, y0: f64, yp: f64) -> (f64, f64) {
    let denom = ym - 2.0 * y0 + yp;
    if denom >= 0.0 {
        return (0.0, y0);
    }
    let delta = (0.5 * (ym - yp) / denom).clamp(-0.5, 0.5);
    (delta, y0 - 0.25 * (ym - yp) * delta)
}

/// Walk from `start` in direction `step` until the magnitude drops below
/// `threshold`; returns the interpolated angular distance of the crossing.
fn crossing_distance(mag: &[f64], start: usize, step: isize, threshold: f64, h: f64) -> Option<f64> {
    let n = mag.len() as isize;
    let mut prev = mag[start];
    for k in 1..n {
        let idx = (start as isize + step * k).rem_euclid(n) as usize;
        let cur = mag[idx];
        if cur < threshold {
            let frac = (prev - threshold) / (prev - cur);
            return Some((k as f64 - 1.0 + frac) * h);
        }
        prev = cur;
    }
    None
}

/// Metrics against a steering window.
///
/// The peak is refined by a parabola through the three top samples, and
/// the exclusion-region maximum includes the interpolated level at the two
/// window edges, so coarse and fine grids agree closely.
pub fn metrics(pattern: &PatternGrid, spec: &SteeringSpec) -> PatternMetrics {
    let grid = pattern.grid();
    let s = grid.samples();
    let h = grid.spacing();
    let n = s.len();
    let mag = pattern.magnitudes();

    let (imax, &ymax) = mag
        .iter()
        .enumerate()
        .fold((0, &f64::NEG_INFINITY), |acc, (i, v)| if *v > *acc.1 { (i, v) } else { acc });
    let (delta, peak) = parabolic_peak(mag[(imax + n - 1) % n], ymax, mag[(imax + 1) % n]);
    let peak = peak.max(ymax);
    let peak_dir = wrap_angle(s[imax] + delta * h);

    let mut side = mag
        .iter()
        .zip(s)
        .filter(|(_, &phi)| spec.excludes(phi))
        .map(|(m, _)| *m)
        .fold(0.0, f64::max);
    let excludes_anything = s.iter().any(|&phi| spec.excludes(phi));
    if excludes_anything {
        for edge in [-0.5, 0.5] {
            let phi = spec.phi_o() + edge * spec.delta_phi();
            side = side.max(pattern.magnitude_at(phi));
        }
    }
    let sll_db = if peak > 0.0 && side > 0.0 {
        db(side / peak)
    } else {
        f64::NEG_INFINITY
    };

    let threshold = peak / std::f64::consts::SQRT_2;
    let beamwidth = if peak > 0.0 {
        let right = crossing_distance(&mag, imax, 1, threshold, h);
        let left = crossing_distance(&mag, imax, -1, threshold, h);
        match (left, right) {
            (Some(l), Some(r)) => Some(l + r),
            _ => None,
        }
    } else {
        None
    };

    PatternMetrics {
        peak_db: db(peak),
        peak_dir_rad: peak_dir,
        sll_db,
        beamwidth_rad: beamwidth,
        target_level_db: db(pattern.magnitude_at(spec.phi_o())),
    }
}

/// Largest magnitude within `half_width` of `phi`, the main-beam level of
/// patterns whose global peak lies elsewhere.
pub fn main_beam_level(pattern: &PatternGrid, phi: f64, half_width: f64) -> f64 {
    let near = pattern
        .grid()
        .samples()
        .iter()
        .zip(pattern.values())
        .filter(|(&s, _)| wrap_angle(s - phi).abs() <= half_width)
        .map(|(_, f)| f.norm())
        .fold(0.0, f64::max);
    near.max(pattern.magnitude_at(phi))
}

/// Full width between the first nulls (local minima) either side of the
/// peak.
pub fn first_null_width(pattern: &PatternGrid) -> Option<f64> {
    let mag = pattern.magnitudes();
    let n = mag.len();
    let h = pattern.grid().spacing();
    let (imax, _) = mag
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    let walk = |step: isize| -> Option<f64> {
        for k in 1..n as isize {
            let i = (imax as isize + step * k).rem_euclid(n as isize) as usize;
            let next = (i as isize + step).rem_euclid(n as isize) as usize;
            if mag[i] == 0.0 {
                return Some(k as f64 * h);
            }
            if mag[next] > mag[i] {
                let prev = (i as isize - step).rem_euclid(n as isize) as usize;
                let (d, _) = parabolic_peak(-mag[prev], -mag[i], -mag[next]);
                return Some((k as f64 + d) * h);
            }
        }
        None
    };
    Some(walk(-1)? + walk(1)?)
}
