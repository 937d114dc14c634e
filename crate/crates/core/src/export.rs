//! CSV and JSON renderings of patterns, impedance profiles, metrics and
//! synthesis results. Angles in files are degrees.
//!
//! Non-finite numbers (for example a `-inf` sidelobe level) are written as
//! `null` in JSON and as `inf`/`-inf`/`NaN` in CSV.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::optim::{Method, SynthesisResult};
use crate::pattern::{PatternGrid, PatternMetrics};
use crate::Result;

fn csv_string<T: Serialize>(rows: impl IntoIterator<Item = T>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| crate::Error::Domain(format!("csv encoding failed: {e}")))?;
    }
    let bytes = w.into_inner().map_err(|e| crate::Error::Domain(format!("csv encoding failed: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatternRow {
    pub phi_deg: f64,
    #[serde(rename = "re_F")]
    pub re_f: f64,
    #[serde(rename = "im_F")]
    pub im_f: f64,
    /// Relative to the pattern peak.
    pub mag_db: f64,
}

/// `phi_deg,re_F,im_F,mag_db`.
pub fn pattern_csv(pattern: &PatternGrid) -> Result<String> {
    let db = pattern.magnitude_db(None);
    csv_string(pattern.grid().samples().iter().zip(pattern.values()).zip(db).map(|((p, f), d)| PatternRow {
        phi_deg: p.to_degrees(),
        re_f: f.re,
        im_f: f.im,
        mag_db: d,
    }))
}

pub fn parse_pattern_csv(text: &str) -> Result<Vec<PatternRow>> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    rdr.deserialize()
        .collect::<std::result::Result<Vec<PatternRow>, _>>()
        .map_err(|e| crate::Error::Domain(format!("pattern csv: {e}")))
}

#[derive(Serialize)]
struct ImpedanceRow {
    phi_deg: f64,
    #[serde(rename = "re_Z_over_eta0")]
    re: f64,
    #[serde(rename = "im_Z_over_eta0")]
    im: f64,
    pole_flag: u8,
}

#[derive(Serialize)]
struct GoImpedanceRow {
    phi_deg: f64,
    #[serde(rename = "re_Z_over_eta0")]
    re: f64,
    #[serde(rename = "im_Z_over_eta0")]
    im: f64,
    pole_flag: u8,
    singular_flag: u8,
}

/// `phi_deg,re_Z_over_eta0,im_Z_over_eta0,pole_flag`.
pub fn impedance_csv(phi: &[f64], z: &[Complex64], pole: &[bool]) -> Result<String> {
    csv_string(phi.iter().zip(z).zip(pole).map(|((p, z), &f)| ImpedanceRow {
        phi_deg: p.to_degrees(),
        re: z.re,
        im: z.im,
        pole_flag: f.into(),
    }))
}

/// GO variant with an extra `singular_flag` column; GO profiles have no
/// modal poles, so `pole_flag` is always 0.
pub fn go_impedance_csv(phi: &[f64], z: &[Complex64], singular: &[bool]) -> Result<String> {
    csv_string(phi.iter().zip(z).zip(singular).map(|((p, z), &f)| GoImpedanceRow {
        phi_deg: p.to_degrees(),
        re: z.re,
        im: z.im,
        pole_flag: 0,
        singular_flag: f.into(),
    }))
}

/// Metrics in file units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub peak_db: f64,
    pub peak_dir_deg: f64,
    pub sll_db: Option<f64>,
    pub beamwidth_deg: Option<f64>,
    pub target_level_db: f64,
}

impl From<&PatternMetrics> for MetricsRecord {
    fn from(m: &PatternMetrics) -> Self {
        Self {
            peak_db: m.peak_db,
            peak_dir_deg: m.peak_dir_rad.to_degrees(),
            sll_db: m.sll_db.is_finite().then_some(m.sll_db),
            beamwidth_deg: m.beamwidth_rad.map(f64::to_degrees),
            target_level_db: m.target_level_db,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaRecord {
    pub states: Option<Vec<usize>>,
    pub values: Vec<Complex64>,
}

/// Result JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisRecord {
    pub method: Method,
    pub gamma: GammaRecord,
    pub objective: f64,
    pub objective_db: f64,
    pub evaluations: u64,
    /// Null unless timing was requested.
    pub wall_time_ms: Option<f64>,
    pub rng_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sidelobe_power: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub history: Vec<f64>,
}

impl SynthesisRecord {
    pub fn new(r: &SynthesisResult, timing: bool) -> Self {
        Self {
            method: r.method,
            gamma: GammaRecord {
                states: r.excitation.states.clone(),
                values: r.excitation.gamma.clone(),
            },
            objective: r.objective,
            objective_db: r.objective_db(),
            evaluations: r.evaluations,
            wall_time_ms: timing.then(|| r.wall_time.as_secs_f64() * 1e3),
            rng_seed: r.rng_seed,
            sidelobe_power: r.sidelobe_power,
            history: r.history.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{AngularGrid, SteeringSpec};
    use crate::pattern::metrics;

    #[test]
    fn pattern_round_trip_in_degrees() {
        let g = AngularGrid::full_circle(8).unwrap();
        let f: Vec<Complex64> = (0..8).map(|k| Complex64::new(k as f64, -0.5)).collect();
        let p = PatternGrid::new(g.clone(), f.clone()).unwrap();
        let text = pattern_csv(&p).unwrap();
        assert!(text.starts_with("phi_deg,re_F,im_F,mag_db\n"));
        let rows = parse_pattern_csv(&text).unwrap();
        for ((r, s), v) in rows.iter().zip(g.samples()).zip(&f) {
            assert_eq!(r.phi_deg.to_radians(), *s);
            assert_eq!((r.re_f, r.im_f), (v.re, v.im));
        }
        assert_eq!(rows[7].mag_db, 0.0);
    }

    #[test]
    fn metrics_json_keys_and_sentinel() {
        let g = AngularGrid::full_circle(360).unwrap();
        let i = g.nearest_index(0.5);
        let mut f = vec![Complex64::new(0.0, 0.0); 360];
        f[i] = Complex64::new(1.0, 0.0);
        let p = PatternGrid::new(g, f).unwrap();
        let m = metrics(&p, &SteeringSpec::new(0.5, 0.2).unwrap());
        let v: serde_json::Value = serde_json::to_value(MetricsRecord::from(&m)).unwrap();
        let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
        assert_eq!(keys, ["beamwidth_deg", "peak_db", "peak_dir_deg", "sll_db", "target_level_db"]);
        assert!(v["sll_db"].is_null());
    }

    #[test]
    fn impedance_flags() {
        let phi = [0.0, 1.0];
        let z = [Complex64::new(0.1, 0.2), Complex64::new(f64::NAN, f64::NAN)];
        let text = go_impedance_csv(&phi, &z, &[false, true]).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("phi_deg,re_Z_over_eta0,im_Z_over_eta0,pole_flag,singular_flag"));
        assert!(lines.nth(1).unwrap().ends_with(",0,1"));
    }
}
