//! One method at one steering angle, rendered to file contents.

use std::collections::BTreeMap;

use cylris::discrete::{build_array, far_field_discrete, reference_beamwidth_with, steering_vector, ElementArray};
use cylris::exact::{far_field_exact, modal_coefficients, surface_impedance};
use cylris::export::{go_impedance_csv, impedance_csv, pattern_csv, MetricsRecord, SynthesisRecord};
use cylris::geometry::{AngularGrid, CylinderGeometry, SteeringSpec};
use cylris::go::{far_field_po, go_impedance};
use cylris::meta_atom::{ideal_one_bit, load_state_table, StateSets, StateTable};
use cylris::optim::{
    build_sigma, exhaustive_search, ga_synthesize, go_quantized, mpdr_synthesize, sigma_convergence, Problem,
    SynthesisResult,
};
use cylris::pattern::{metrics, PatternGrid, PatternMetrics};
use cylris::specfun::truncation_order;
use serde::Serialize;

use crate::config::{DeltaPhiMode, MethodName, RunConfig};
use crate::error::CliError;

pub const PATTERN_FILE: &str = "pattern.csv";
pub const METRICS_FILE: &str = "metrics.json";
pub const RESULT_FILE: &str = "result.json";
pub const IMPEDANCE_FILE: &str = "impedance.csv";
pub const STATES_FILE: &str = "state_sets.json";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Objects shared by every run of one config.
pub struct Setup {
    pub geom: CylinderGeometry,
    pub array: Option<ElementArray>,
    pub table: StateTable,
}

impl Setup {
    pub fn new(cfg: &RunConfig) -> Result<Self, CliError> {
        let geom = CylinderGeometry::new(cfg.geometry.radius_m, cfg.geometry.freq_hz)?;
        let array = cfg
            .array
            .map(|a| build_array(&geom, a.n_elements, a.arc_pitch_m, a.element_pattern))
            .transpose()?;
        let table = match (cfg.meta_atom.model.taper(), &cfg.meta_atom.table) {
            (Some(t), _) => ideal_one_bit(t),
            (None, Some(path)) => load_state_table(path)?,
            (None, None) => return Err(CliError::Config("meta_atom.table is missing".into())),
        };
        Ok(Self { geom, array, table })
    }

    fn array(&self) -> Result<&ElementArray, CliError> {
        self.array
            .as_ref()
            .ok_or_else(|| CliError::Config("this run needs an [array] block".into()))
    }

    /// Steering window for `phi_o_deg`.
    pub fn window(&self, cfg: &RunConfig, phi_o_deg: f64) -> Result<SteeringSpec, CliError> {
        let phi_o = phi_o_deg.to_radians();
        let s = &cfg.steering;
        let width = match s.delta_phi_mode {
            DeltaPhiMode::AbsoluteDeg => s.value.to_radians(),
            DeltaPhiMode::RefFactor => s.value * reference_beamwidth_with(self.array()?, phi_o, s.reference_rule)?,
        };
        let spec = SteeringSpec::new(phi_o, width)?;
        if let Some(a) = &self.array {
            if s.delta_phi_mode == DeltaPhiMode::AbsoluteDeg {
                spec.check_against_reference(reference_beamwidth_with(a, phi_o, s.reference_rule)?);
            }
        }
        Ok(spec)
    }
}

/// Everything one run produced.
pub struct RunOutput {
    pub method: MethodName,
    pub phi_o_deg: f64,
    pub spec: SteeringSpec,
    pub pattern: PatternGrid,
    pub metrics: PatternMetrics,
    pub result: Option<SynthesisResult>,
    /// File name to contents.
    pub files: BTreeMap<&'static str, String>,
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

pub fn run_one(cfg: &RunConfig, setup: &Setup, method: MethodName, phi_o_deg: f64) -> Result<RunOutput, CliError> {
    let spec = setup.window(cfg, phi_o_deg)?;
    let grid = AngularGrid::full_circle(cfg.output.grid_points)?;
    let mut files = BTreeMap::new();
    let mut result = None;
    let pattern = match method {
        MethodName::Exact => {
            let order = truncation_order(setup.geom.k0r());
            let expansion = modal_coefficients(&setup.geom, spec.phi_o(), order)?;
            let z = surface_impedance(&setup.geom, &expansion, &grid)?;
            files.insert(IMPEDANCE_FILE, impedance_csv(grid.samples(), &z.z_over_eta0, &z.pole_mask)?);
            far_field_exact(&expansion, &grid)
        }
        MethodName::Go => {
            let prof = go_impedance(&setup.geom, spec.phi_o(), &grid);
            files.insert(
                IMPEDANCE_FILE,
                go_impedance_csv(grid.samples(), &prof.z_over_eta0, &prof.singular_mask)?,
            );
            far_field_po(&setup.geom, &prof.gamma, &grid, cfg.method.shadow_model)?
        }
        _ => {
            let array = setup.array()?;
            let sets = StateSets::for_array(&setup.table, array);
            files.insert(STATES_FILE, sets.to_json(array)? + "\n");
            let problem = Problem::new(array.clone(), spec, sets, cfg.output.inner_grid_points)?;
            let r = match method {
                MethodName::Es => exhaustive_search(&problem, cfg.method.es_budget)?,
                MethodName::Ga => ga_synthesize(&problem, &cfg.method.ga)?,
                MethodName::Mpdr => {
                    let sgrid = AngularGrid::full_circle(cfg.output.sigma_grid_points)?;
                    let sig = build_sigma(&steering_vector(array, &sgrid), &spec)?;
                    if log::log_enabled!(log::Level::Debug) {
                        sigma_convergence(array, &spec, cfg.output.sigma_grid_points)?;
                    }
                    mpdr_synthesize(&problem, &sig, cfg.method.psi_samples)?
                }
                MethodName::GoQ => go_quantized(&problem),
                MethodName::Exact | MethodName::Go => unreachable!(),
            };
            files.insert(RESULT_FILE, json(&SynthesisRecord::new(&r, cfg.output.timing)));
            let table = steering_vector(array, &grid);
            let p = far_field_discrete(&table, &r.excitation.gamma)?;
            result = Some(r);
            p
        }
    };
    let m = metrics(&pattern, &spec);
    files.insert(PATTERN_FILE, pattern_csv(&pattern)?);
    files.insert(METRICS_FILE, json(&MetricsRecord::from(&m)));
    Ok(RunOutput {
        method,
        phi_o_deg,
        spec,
        pattern,
        metrics: m,
        result,
        files,
    })
}

/// Run record echoing the resolved config.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: Option<u64>,
    pub config: RunConfig,
}

impl Manifest {
    pub fn new(command: &str, cfg: &RunConfig) -> Self {
        let uses_seed = cfg.method.name == MethodName::Ga
            || cfg.sweep.as_ref().is_some_and(|s| s.methods.contains(&MethodName::Ga));
        Self {
            tool: "cylris".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            seed: uses_seed.then_some(cfg.method.ga.seed),
            config: cfg.clone(),
        }
    }

    pub fn render(&self) -> String {
        json(self)
    }
}
