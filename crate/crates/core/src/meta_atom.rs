//! Discrete reflection states of the reconfigurable elements.
//!
//! A [`StateTable`] lists the `L = 2^b` complex reflection coefficients of
//! one meta-atom as a function of the local incidence angle. Tables either
//! come from the ideal one-bit model or are loaded from characterization
//! data in CSV form:
//!
//! ```text
//! # patch_side_mm: 26
//! angle_deg,state_index,mag,phase_deg
//! 0,0,1,0
//! 0,1,1,180
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::discrete::ElementArray;
use crate::{Error, Result};

/// Allowed excess of `|γ|` over one.
pub const PASSIVITY_TOL: f64 = 1e-9;

pub const CSV_HEADER: [&str; 4] = ["angle_deg", "state_index", "mag", "phase_deg"];

/// Reflection states versus incidence angle, one row per angle.
#[derive(Debug, Clone, PartialEq)]
pub struct StateTable {
    bits: u32,
    angles_deg: Vec<f64>,
    states: Vec<Vec<Complex64>>,
    mags: Vec<Vec<f64>>,
    // Unwrapped along the angle axis, in radians.
    phases: Vec<Vec<f64>>,
    pub metadata: BTreeMap<String, String>,
}

fn unwrap_column(phases: &mut [Vec<f64>], l: usize) {
    for i in 1..phases.len() {
        let prev = phases[i - 1][l];
        let mut p = phases[i][l];
        while p - prev > std::f64::consts::PI {
            p -= std::f64::consts::TAU;
        }
        while p - prev < -std::f64::consts::PI {
            p += std::f64::consts::TAU;
        }
        phases[i][l] = p;
    }
}

impl StateTable {
    /// Validate and build a table from complex states.
    pub fn new(
        bits: u32,
        angles_deg: Vec<f64>,
        states: Vec<Vec<Complex64>>,
        metadata: BTreeMap<String, String>,
    ) -> Result<Self> {
        let mags = states.iter().map(|r| r.iter().map(|s| s.norm()).collect()).collect();
        let phases = states.iter().map(|r| r.iter().map(|s| s.arg()).collect()).collect();
        Self::assemble(bits, angles_deg, states, mags, phases, metadata)
    }

    fn assemble(
        bits: u32,
        angles_deg: Vec<f64>,
        states: Vec<Vec<Complex64>>,
        mags: Vec<Vec<f64>>,
        mut phases: Vec<Vec<f64>>,
        metadata: BTreeMap<String, String>,
    ) -> Result<Self> {
        if bits == 0 || bits > 16 {
            return Err(Error::InvalidParameter(format!("unsupported bit depth {bits}")));
        }
        let l = 1usize << bits;
        if angles_deg.is_empty() || angles_deg.len() != states.len() {
            return Err(Error::InvalidParameter(
                "state table needs one state row per angle".into(),
            ));
        }
        for (i, row) in states.iter().enumerate() {
            if row.len() != l {
                return Err(Error::InvalidParameter(format!(
                    "row {i} has {} states, expected {l}",
                    row.len()
                )));
            }
            if let Some(k) = row.iter().position(|s| !(s.norm() <= 1.0 + PASSIVITY_TOL)) {
                return Err(Error::InvalidParameter(format!(
                    "row {i} state {k} is not passive (|gamma| = {})",
                    row[k].norm()
                )));
            }
        }
        if angles_deg.iter().any(|a| !(0.0..90.0).contains(a)) {
            return Err(Error::InvalidParameter("table angles must lie in [0, 90) deg".into()));
        }
        if angles_deg.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("table angles must be strictly increasing".into()));
        }
        for k in 0..l {
            unwrap_column(&mut phases, k);
        }
        Ok(Self {
            bits,
            angles_deg,
            states,
            mags,
            phases,
            metadata,
        })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn n_states(&self) -> usize {
        1 << self.bits
    }

    pub fn angles_deg(&self) -> &[f64] {
        &self.angles_deg
    }

    pub fn rows(&self) -> &[Vec<Complex64>] {
        &self.states
    }

    /// States at incidence angle `theta_deg`.
    ///
    /// Magnitude and unwrapped phase are interpolated linearly and
    /// separately; knots return the stored row unchanged and angles outside
    /// the table clamp to the nearest row.
    pub fn states_at(&self, theta_deg: f64) -> Vec<Complex64> {
        let a = &self.angles_deg;
        let last = a.len() - 1;
        if theta_deg <= a[0] {
            return self.states[0].clone();
        }
        if theta_deg >= a[last] {
            return self.states[last].clone();
        }
        let i = a.partition_point(|&v| v <= theta_deg) - 1;
        if a[i] == theta_deg {
            return self.states[i].clone();
        }
        let t = (theta_deg - a[i]) / (a[i + 1] - a[i]);
        (0..self.n_states())
            .map(|k| {
                let m = self.mags[i][k] + t * (self.mags[i + 1][k] - self.mags[i][k]);
                let p = self.phases[i][k] + t * (self.phases[i + 1][k] - self.phases[i][k]);
                Complex64::from_polar(m, p)
            })
            .collect()
    }

    /// Render in the CSV schema, metadata first.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            let _ = writeln!(out, "# {k}: {v}");
        }
        out.push_str(&CSV_HEADER.join(","));
        out.push('\n');
        for (i, &ang) in self.angles_deg.iter().enumerate() {
            for k in 0..self.n_states() {
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    ang,
                    k,
                    self.mags[i][k],
                    self.phases[i][k].to_degrees()
                );
            }
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

/// Phase split between the two states of the ideal one-bit atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseTaper {
    /// 180° at every angle.
    #[default]
    Constant,
    /// `Δ(θ) = 180° cos θ`.
    Cosine,
}

/// Lossless one-bit atom with states `{1, e^{jΔ(θ)}}`.
pub fn ideal_one_bit(taper: PhaseTaper) -> StateTable {
    let mut meta = BTreeMap::new();
    match taper {
        PhaseTaper::Constant => {
            meta.insert("model".into(), "ideal_one_bit_constant".into());
            let row = vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)];
            StateTable::assemble(1, vec![0.0], vec![row], vec![vec![1.0, 1.0]], vec![vec![0.0, std::f64::consts::PI]], meta)
                .expect("valid constant table")
        }
        PhaseTaper::Cosine => {
            meta.insert("model".into(), "ideal_one_bit_cosine".into());
            let angles: Vec<f64> = (0..90).map(f64::from).collect();
            let phases: Vec<Vec<f64>> = angles
                .iter()
                .map(|a| vec![0.0, std::f64::consts::PI * a.to_radians().cos()])
                .collect();
            let states = phases
                .iter()
                .map(|p| p.iter().map(|&v| Complex64::from_polar(1.0, v)).collect())
                .collect();
            let mags = vec![vec![1.0, 1.0]; angles.len()];
            StateTable::assemble(1, angles, states, mags, phases, meta).expect("valid cosine table")
        }
    }
}

#[derive(Debug, Deserialize)]
struct CsvRow {
    angle_deg: f64,
    state_index: usize,
    mag: f64,
    phase_deg: f64,
}

/// Parse the CSV schema. `path` is used for error messages only.
pub fn parse_state_table(text: &str, path: &Path) -> Result<StateTable> {
    let table_err = |line: u64, message: String| Error::Table {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut metadata = BTreeMap::new();
    for line in text.lines() {
        if let Some(rest) = line.trim_start().strip_prefix('#') {
            if let Some((k, v)) = rest.split_once(':') {
                metadata.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
    }
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| table_err(1, e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>() != CSV_HEADER {
        return Err(table_err(
            rdr.position().line(),
            format!("expected header {}", CSV_HEADER.join(",")),
        ));
    }

    let mut angles: Vec<f64> = Vec::new();
    let mut groups: Vec<Vec<(usize, f64, f64, u64)>> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            table_err(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let row: CsvRow = rec
            .deserialize(Some(&headers))
            .map_err(|e| table_err(line, e.to_string()))?;
        if !(row.mag.is_finite() && row.phase_deg.is_finite() && row.angle_deg.is_finite()) {
            return Err(table_err(line, "non-finite value".into()));
        }
        if row.mag < 0.0 {
            return Err(table_err(line, format!("negative magnitude {}", row.mag)));
        }
        if row.mag > 1.0 + PASSIVITY_TOL {
            return Err(table_err(line, format!("state is not passive (mag = {})", row.mag)));
        }
        match angles.last() {
            Some(&a) if a == row.angle_deg => {}
            Some(&a) if row.angle_deg < a => {
                return Err(table_err(line, "angles must be non-decreasing".into()));
            }
            _ => {
                angles.push(row.angle_deg);
                groups.push(Vec::new());
            }
        }
        groups.last_mut().expect("group exists").push((row.state_index, row.mag, row.phase_deg.to_radians(), line));
    }
    if groups.is_empty() {
        return Err(table_err(rdr.position().line(), "table has no data rows".into()));
    }

    let l = groups[0].len();
    if l < 2 || !l.is_power_of_two() {
        return Err(table_err(groups[0][0].3, format!("{l} states per angle is not a power of two")));
    }
    let bits = l.trailing_zeros();
    let mut states = Vec::with_capacity(groups.len());
    let mut mags = Vec::with_capacity(groups.len());
    let mut phases = Vec::with_capacity(groups.len());
    for g in &groups {
        let first_line = g[0].3;
        if g.len() != l {
            return Err(table_err(first_line, format!("expected {l} states at this angle, found {}", g.len())));
        }
        let mut m = vec![f64::NAN; l];
        let mut p = vec![f64::NAN; l];
        for &(k, mag, ph, line) in g {
            if k >= l || !m[k].is_nan() {
                return Err(table_err(line, format!("state index {k} is out of range or repeated")));
            }
            m[k] = mag;
            p[k] = ph;
        }
        states.push(m.iter().zip(&p).map(|(&a, &b)| Complex64::from_polar(a, b)).collect());
        mags.push(m);
        phases.push(p);
    }
    if let Some(i) = angles.iter().position(|a| !(0.0..90.0).contains(a)) {
        return Err(table_err(groups[i][0].3, "table angles must lie in [0, 90) deg".into()));
    }
    StateTable::assemble(bits, angles, states, mags, phases, metadata)
}

pub fn load_state_table(path: &Path) -> Result<StateTable> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_state_table(&text, path)
}

/// `Γ_n` at element position `alpha` (local incidence `θ = |α|`).
pub fn state_set_for_element(table: &StateTable, alpha: f64) -> Vec<Complex64> {
    table.states_at(alpha.abs().to_degrees())
}

/// Resolved state set of every element of an array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSets {
    sets: Vec<Vec<Complex64>>,
}

#[derive(Serialize)]
struct ElementStates<'a> {
    element: usize,
    alpha_deg: f64,
    states: &'a [Complex64],
}

impl StateSets {
    pub fn for_array(table: &StateTable, array: &ElementArray) -> Self {
        Self {
            sets: array.alphas().iter().map(|&a| state_set_for_element(table, a)).collect(),
        }
    }

    pub fn from_sets(sets: Vec<Vec<Complex64>>) -> Result<Self> {
        let l = sets.first().map_or(0, Vec::len);
        if l == 0 || sets.iter().any(|s| s.len() != l) {
            return Err(Error::InvalidParameter(
                "every element needs the same non-empty number of states".into(),
            ));
        }
        Ok(Self { sets })
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn n_states(&self) -> usize {
        self.sets[0].len()
    }

    pub fn set(&self, n: usize) -> &[Complex64] {
        &self.sets[n]
    }

    /// Excitation for a state assignment.
    pub fn gamma(&self, states: &[usize]) -> Vec<Complex64> {
        states.iter().zip(&self.sets).map(|(&k, s)| s[k]).collect()
    }

    /// Audit JSON, one entry per element.
    pub fn to_json(&self, array: &ElementArray) -> Result<String> {
        let entries: Vec<ElementStates> = self
            .sets
            .iter()
            .zip(array.alphas())
            .enumerate()
            .map(|(element, (s, a))| ElementStates {
                element,
                alpha_deg: a.to_degrees(),
                states: s,
            })
            .collect();
        Ok(serde_json::to_string_pretty(&entries)?)
    }
}
