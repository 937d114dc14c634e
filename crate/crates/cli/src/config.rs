//! Run configuration (TOML).

use std::path::{Path, PathBuf};

use cylris::discrete::{ElementPattern, ReferenceRule};
use cylris::go::ShadowModel;
use cylris::meta_atom::PhaseTaper;
use cylris::optim::GaConfig;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub geometry: GeometryBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub array: Option<ArrayBlock>,
    pub steering: SteeringBlock,
    #[serde(default)]
    pub meta_atom: MetaAtomBlock,
    pub method: MethodBlock,
    #[serde(default)]
    pub output: OutputBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepBlock>,
}

/// Methods run by `sweep`; `method.name` alone when absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    pub methods: Vec<MethodName>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryBlock {
    pub radius_m: f64,
    pub freq_hz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrayBlock {
    pub n_elements: usize,
    pub arc_pitch_m: f64,
    #[serde(default)]
    pub element_pattern: ElementPattern,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaPhiMode {
    AbsoluteDeg,
    #[default]
    RefFactor,
}

fn default_factor() -> f64 {
    1.2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SteeringBlock {
    pub phi_o_deg: Vec<f64>,
    #[serde(default)]
    pub delta_phi_mode: DeltaPhiMode,
    #[serde(default = "default_factor")]
    pub value: f64,
    #[serde(default)]
    pub reference_rule: ReferenceRule,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetaModel {
    #[default]
    Constant,
    Cosine,
    Table,
}

impl MetaModel {
    pub fn taper(self) -> Option<PhaseTaper> {
        match self {
            MetaModel::Constant => Some(PhaseTaper::Constant),
            MetaModel::Cosine => Some(PhaseTaper::Cosine),
            MetaModel::Table => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetaAtomBlock {
    #[serde(default)]
    pub model: MetaModel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodName {
    Exact,
    Go,
    Es,
    Ga,
    Mpdr,
    GoQ,
}

impl MethodName {
    pub const ALL: [MethodName; 6] = [
        MethodName::Exact,
        MethodName::Go,
        MethodName::Es,
        MethodName::Ga,
        MethodName::Mpdr,
        MethodName::GoQ,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MethodName::Exact => "exact",
            MethodName::Go => "go",
            MethodName::Es => "es",
            MethodName::Ga => "ga",
            MethodName::Mpdr => "mpdr",
            MethodName::GoQ => "go_q",
        }
    }

    pub fn parse(s: &str) -> Result<Self, CliError> {
        Self::ALL
            .into_iter()
            .find(|m| m.as_str() == s.trim())
            .ok_or_else(|| CliError::Config(format!("unknown method '{s}'")))
    }

    pub fn is_discrete(self) -> bool {
        !matches!(self, MethodName::Exact | MethodName::Go)
    }
}

fn default_psi() -> usize {
    cylris::optim::DEFAULT_PSI_SAMPLES
}

fn default_budget() -> u64 {
    cylris::optim::DEFAULT_ES_BUDGET
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodBlock {
    pub name: MethodName,
    #[serde(default)]
    pub shadow_model: ShadowModel,
    #[serde(default = "default_psi")]
    pub psi_samples: usize,
    #[serde(default = "default_budget")]
    pub es_budget: u64,
    #[serde(default)]
    pub ga: GaConfig,
}

fn default_grid() -> usize {
    3601
}
fn default_inner() -> usize {
    361
}
fn default_sigma() -> usize {
    721
}
fn default_dir() -> PathBuf {
    PathBuf::from("cylris-out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    // not echoed in manifests
    #[serde(default = "default_dir", skip_serializing)]
    pub directory: PathBuf,
    #[serde(default, skip_serializing)]
    pub threads: usize,
    #[serde(default = "default_grid")]
    pub grid_points: usize,
    #[serde(default = "default_inner")]
    pub inner_grid_points: usize,
    #[serde(default = "default_sigma")]
    pub sigma_grid_points: usize,
    #[serde(default)]
    pub timing: bool,
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self {
            directory: default_dir(),
            threads: 0,
            grid_points: default_grid(),
            inner_grid_points: default_inner(),
            sigma_grid_points: default_sigma(),
            timing: false,
        }
    }
}

impl RunConfig {
    /// Methods a sweep runs.
    pub fn sweep_methods(&self) -> Vec<MethodName> {
        match &self.sweep {
            Some(s) if !s.methods.is_empty() => s.methods.clone(),
            _ => vec![self.method.name],
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.message().replace('\n', " ")))
    }

    /// Read and validate; a relative state-table path is taken relative to
    /// the config file.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
        let mut cfg = Self::from_toml(&text)?;
        if let (Some(t), Some(dir)) = (cfg.meta_atom.table.as_mut(), path.parent()) {
            if t.is_relative() {
                *t = dir.join(&*t);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        let g = &self.geometry;
        if !(g.radius_m > 0.0 && g.radius_m.is_finite()) {
            return bad(format!("geometry.radius_m must be positive, got {}", g.radius_m));
        }
        if !(g.freq_hz > 0.0 && g.freq_hz.is_finite()) {
            return bad(format!("geometry.freq_hz must be positive, got {}", g.freq_hz));
        }
        if let Some(a) = &self.array {
            if a.n_elements == 0 {
                return bad("array.n_elements must be at least 1".into());
            }
            if !(a.arc_pitch_m > 0.0 && a.arc_pitch_m.is_finite()) {
                return bad(format!("array.arc_pitch_m must be positive, got {}", a.arc_pitch_m));
            }
        }
        let s = &self.steering;
        if s.phi_o_deg.is_empty() {
            return bad("steering.phi_o_deg must list at least one angle".into());
        }
        if s.phi_o_deg.iter().any(|v| !v.is_finite()) {
            return bad("steering.phi_o_deg must be finite".into());
        }
        if !(s.value > 0.0 && s.value.is_finite()) {
            return bad(format!("steering.value must be positive, got {}", s.value));
        }
        for name in self.sweep_methods().into_iter().chain([self.method.name]) {
            let needs_array = name.is_discrete() || s.delta_phi_mode == DeltaPhiMode::RefFactor;
            if needs_array && self.array.is_none() {
                return bad(format!(
                    "method {} with delta_phi_mode {:?} needs an [array] block",
                    name.as_str(),
                    s.delta_phi_mode
                ));
            }
        }
        match (self.meta_atom.model, &self.meta_atom.table) {
            (MetaModel::Table, None) => return bad("meta_atom.model = \"table\" needs meta_atom.table".into()),
            (MetaModel::Constant | MetaModel::Cosine, Some(_)) => {
                return bad("meta_atom.table is only valid with model = \"table\"".into())
            }
            _ => {}
        }
        let m = &self.method;
        if m.psi_samples == 0 {
            return bad("method.psi_samples must be positive".into());
        }
        if m.ga.population < 2 {
            return bad("method.ga.population must be at least 2".into());
        }
        for (k, p) in [("p_crossover", m.ga.p_crossover), ("p_mutation", m.ga.p_mutation)] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("method.ga.{k} must lie in [0, 1], got {p}"));
            }
        }
        let o = &self.output;
        if o.grid_points < 16 {
            return bad("output.grid_points must be at least 16".into());
        }
        if o.inner_grid_points < 16 {
            return bad("output.inner_grid_points must be at least 16".into());
        }
        if o.sigma_grid_points < cylris::optim::MIN_SIGMA_POINTS {
            return bad(format!(
                "output.sigma_grid_points must be at least {}",
                cylris::optim::MIN_SIGMA_POINTS
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
[geometry]
radius_m = 0.4
freq_hz = 3.6e9

[array]
n_elements = 30
arc_pitch_m = 0.038

[steering]
phi_o_deg = [15.0]

[method]
name = "mpdr"
"#;

    #[test]
    fn defaults_fill_in() {
        let c = RunConfig::from_toml(BASE).unwrap();
        c.validate().unwrap();
        assert_eq!(c.steering.value, 1.2);
        assert_eq!(c.output.grid_points, 3601);
        assert_eq!(c.method.ga, GaConfig::default());
        assert_eq!(c.meta_atom.model, MetaModel::Constant);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let t = format!("{BASE}\n[output]\ngrid_pts = 10\n");
        assert!(RunConfig::from_toml(&t).is_err());
        let t = BASE.replace("radius_m", "radius");
        assert!(RunConfig::from_toml(&t).is_err());
        let t = BASE.replace("\"mpdr\"", "\"capon\"");
        assert!(RunConfig::from_toml(&t).is_err());
    }

    #[test]
    fn semantic_checks() {
        for (from, to) in [
            ("radius_m = 0.4", "radius_m = -0.4"),
            ("phi_o_deg = [15.0]", "phi_o_deg = []"),
            ("name = \"mpdr\"", "name = \"mpdr\"\npsi_samples = 0"),
        ] {
            let c = RunConfig::from_toml(&BASE.replace(from, to)).unwrap();
            assert!(c.validate().is_err(), "{to}");
        }
        let no_array = BASE.replace("[array]\nn_elements = 30\narc_pitch_m = 0.038\n", "");
        assert!(RunConfig::from_toml(&no_array).unwrap().validate().is_err());
        let exact = no_array
            .replace("\"mpdr\"", "\"exact\"")
            .replace("phi_o_deg = [15.0]", "phi_o_deg = [15.0]\ndelta_phi_mode = \"absolute_deg\"\nvalue = 10.0");
        RunConfig::from_toml(&exact).unwrap().validate().unwrap();
    }

    #[test]
    fn manifest_echo_omits_location_and_threads() {
        let mut c = RunConfig::from_toml(BASE).unwrap();
        c.output.threads = 8;
        let v = serde_json::to_value(&c).unwrap();
        assert!(v["output"].get("threads").is_none());
        assert!(v["output"].get("directory").is_none());
        let back: RunConfig = serde_json::from_value(v).unwrap();
        assert_eq!(back.output.threads, 0);
        assert_eq!(back.method, c.method);
    }
}
