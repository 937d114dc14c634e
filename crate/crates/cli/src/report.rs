//! Comparison table over finished runs.

use std::path::Path;

use cylris::export::{parse_pattern_csv, MetricsRecord, SynthesisRecord};
use cylris::geometry::{wrap_angle, AngularGrid};
use cylris::pattern::{main_beam_level, PatternGrid};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::{MethodName, RunConfig};
use crate::error::CliError;
use crate::pipeline::{Manifest, RunOutput, MANIFEST_FILE, METRICS_FILE, PATTERN_FILE, RESULT_FILE};

/// Half-width of the main-beam search around the steering direction.
pub const MAIN_BEAM_HALF_WIDTH_DEG: f64 = 5.0;

/// One run, as read back from disk or taken from memory.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub config: RunConfig,
    pub method: MethodName,
    pub phi_o_deg: f64,
    pub metrics: MetricsRecord,
    pub main_beam_db: f64,
    pub objective_db: Option<f64>,
}

fn db(v: f64) -> f64 {
    20.0 * v.log10()
}

fn read(dir: &Path, name: &str) -> Result<String, CliError> {
    let p = dir.join(name);
    std::fs::read_to_string(&p).map_err(|e| CliError::Io(p, e))
}

fn parse_json<T: for<'a> Deserialize<'a>>(dir: &Path, name: &str, text: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Config(format!("{}: {e}", dir.join(name).display())))
}

fn main_beam_db(pattern: &PatternGrid, phi_o_deg: f64) -> f64 {
    db(main_beam_level(
        pattern,
        phi_o_deg.to_radians(),
        MAIN_BEAM_HALF_WIDTH_DEG.to_radians(),
    ))
}

impl RunRecord {
    pub fn from_output(config: &RunConfig, out: &RunOutput) -> Self {
        Self {
            config: config.clone(),
            method: out.method,
            phi_o_deg: out.phi_o_deg,
            metrics: MetricsRecord::from(&out.metrics),
            main_beam_db: main_beam_db(&out.pattern, out.phi_o_deg),
            objective_db: out.result.as_ref().map(|r| r.objective_db()),
        }
    }

    /// Load a run directory written by `synth` or `sweep`.
    pub fn load(dir: &Path) -> Result<Self, CliError> {
        let manifest: Manifest = parse_json(dir, MANIFEST_FILE, &read(dir, MANIFEST_FILE)?)?;
        let config = manifest.config;
        let (method, phi_o_deg) = match config.steering.phi_o_deg.as_slice() {
            [phi] => (config.method.name, *phi),
            _ => {
                return Err(CliError::Config(format!(
                    "{} is not a single-run directory",
                    dir.display()
                )))
            }
        };
        let metrics: MetricsRecord = parse_json(dir, METRICS_FILE, &read(dir, METRICS_FILE)?)?;
        let rows = parse_pattern_csv(&read(dir, PATTERN_FILE)?)?;
        let grid = AngularGrid::from_samples(rows.iter().map(|r| r.phi_deg.to_radians()).collect())?;
        let pattern = PatternGrid::new(grid, rows.iter().map(|r| Complex64::new(r.re_f, r.im_f)).collect())?;
        let objective_db = if dir.join(RESULT_FILE).exists() {
            let r: SynthesisRecord = parse_json(dir, RESULT_FILE, &read(dir, RESULT_FILE)?)?;
            Some(r.objective_db)
        } else {
            None
        };
        Ok(Self {
            main_beam_db: main_beam_db(&pattern, phi_o_deg),
            config,
            method,
            phi_o_deg,
            metrics,
            objective_db,
        })
    }
}

/// One row of the comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub method: MethodName,
    pub phi_o_deg: f64,
    pub peak_db: f64,
    pub sll_db: Option<f64>,
    pub pointing_err_deg: f64,
    pub beamwidth_deg: Option<f64>,
    pub target_level_db: f64,
    pub target_norm_db: f64,
    pub main_beam_db: f64,
    pub main_beam_norm_db: f64,
    /// Main-beam level relative to the exact run at the same angle.
    pub vs_exact_db: Option<f64>,
    pub objective_db: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    /// Largest main-beam level at the lowest steering angle; every
    /// `*_norm_db` column is relative to it.
    pub reference_db: f64,
    pub reference_phi_o_deg: f64,
    pub rows: Vec<CompareRow>,
}

fn same_setup(a: &RunConfig, b: &RunConfig) -> bool {
    a.geometry == b.geometry
        && a.array == b.array
        && a.output.grid_points == b.output.grid_points
        && a.meta_atom == b.meta_atom
}

fn method_rank(m: MethodName) -> usize {
    MethodName::ALL.iter().position(|x| *x == m).unwrap_or(usize::MAX)
}

pub fn compare(records: &[RunRecord]) -> Result<CompareReport, CliError> {
    let first = records
        .first()
        .ok_or_else(|| CliError::Config("compare needs at least one run".into()))?;
    if let Some(bad) = records.iter().find(|r| !same_setup(&r.config, &first.config)) {
        return Err(CliError::Config(format!(
            "runs disagree in geometry, array, state model or grid ({} at {} deg vs {} at {} deg)",
            first.method.as_str(),
            first.phi_o_deg,
            bad.method.as_str(),
            bad.phi_o_deg
        )));
    }
    let lowest = records.iter().map(|r| r.phi_o_deg).fold(f64::INFINITY, f64::min);
    let reference = records
        .iter()
        .filter(|r| r.phi_o_deg == lowest)
        .map(|r| r.main_beam_db)
        .fold(f64::NEG_INFINITY, f64::max);

    let mut rows: Vec<CompareRow> = records
        .iter()
        .map(|r| {
            let exact = records
                .iter()
                .find(|e| e.method == MethodName::Exact && e.phi_o_deg == r.phi_o_deg);
            CompareRow {
                method: r.method,
                phi_o_deg: r.phi_o_deg,
                peak_db: r.metrics.peak_db,
                sll_db: r.metrics.sll_db,
                pointing_err_deg: wrap_angle((r.metrics.peak_dir_deg - r.phi_o_deg).to_radians())
                    .to_degrees()
                    .abs(),
                beamwidth_deg: r.metrics.beamwidth_deg,
                target_level_db: r.metrics.target_level_db,
                target_norm_db: r.metrics.target_level_db - reference,
                main_beam_db: r.main_beam_db,
                main_beam_norm_db: r.main_beam_db - reference,
                vs_exact_db: exact
                    .filter(|_| r.method != MethodName::Exact)
                    .map(|e| r.main_beam_db - e.main_beam_db),
                objective_db: r.objective_db,
            }
        })
        .collect();
    rows.sort_by(|a, b| {
        a.phi_o_deg
            .total_cmp(&b.phi_o_deg)
            .then(method_rank(a.method).cmp(&method_rank(b.method)))
    });
    Ok(CompareReport {
        reference_db: reference,
        reference_phi_o_deg: lowest,
        rows,
    })
}

impl CompareReport {
    pub fn to_csv(&self) -> Result<String, CliError> {
        #[derive(Serialize)]
        struct Flat<'a> {
            method: &'a str,
            phi_o_deg: f64,
            peak_db: f64,
            sll_db: Option<f64>,
            pointing_err_deg: f64,
            beamwidth_deg: Option<f64>,
            target_level_db: f64,
            target_norm_db: f64,
            main_beam_db: f64,
            main_beam_norm_db: f64,
            vs_exact_db: Option<f64>,
            objective_db: Option<f64>,
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(Flat {
                method: r.method.as_str(),
                phi_o_deg: r.phi_o_deg,
                peak_db: r.peak_db,
                sll_db: r.sll_db,
                pointing_err_deg: r.pointing_err_deg,
                beamwidth_deg: r.beamwidth_deg,
                target_level_db: r.target_level_db,
                target_norm_db: r.target_norm_db,
                main_beam_db: r.main_beam_db,
                main_beam_norm_db: r.main_beam_norm_db,
                vs_exact_db: r.vs_exact_db,
                objective_db: r.objective_db,
            })
            .map_err(|e| CliError::Numerical(format!("csv encoding failed: {e}")))?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| CliError::Numerical(format!("csv encoding failed: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }

    /// Fixed-width table for the terminal.
    pub fn to_text(&self) -> String {
        let opt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.2}"));
        let mut s = format!(
            "{:<6} {:>7} {:>8} {:>8} {:>7} {:>7} {:>9} {:>9}\n",
            "method", "phi_o", "peak_db", "sll_db", "point", "bw", "tgt_norm", "beam_norm"
        );
        for r in &self.rows {
            s += &format!(
                "{:<6} {:>7.1} {:>8.2} {:>8} {:>7.2} {:>7} {:>9.2} {:>9.2}\n",
                r.method.as_str(),
                r.phi_o_deg,
                r.peak_db,
                opt(r.sll_db),
                r.pointing_err_deg,
                opt(r.beamwidth_deg),
                r.target_norm_db,
                r.main_beam_norm_db
            );
        }
        s
    }
}
