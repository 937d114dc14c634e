//! Identity and boundary-condition checks for one config.

use cylris::discrete::{far_field_discrete, steering_vector};
use cylris::exact::{boundary_residual, modal_coefficients, surface_fields, surface_impedance};
use cylris::geometry::{AngularGrid, SteeringSpec};
use cylris::go::{go_impedance, reflection_from_impedance};
use cylris::optim::{build_sigma, MpdrSolver, SigmaMatrices};
use cylris::specfun::{jacobi_anger, truncation_order, CylinderFunctions};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::pipeline::Setup;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// Steering angle, for per-angle checks.
    pub phi_o_deg: Option<f64>,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        self.checks
            .iter()
            .map(|c| {
                let at = c.phi_o_deg.map_or(String::new(), |p| format!(" phi_o={p}"));
                format!(
                    "{} {}{}: {:.3e} (tol {:.0e})\n",
                    if c.pass { "ok  " } else { "FAIL" },
                    c.name,
                    at,
                    c.value,
                    c.tolerance
                )
            })
            .collect()
    }
}

fn push(out: &mut Vec<Check>, name: &str, phi: Option<f64>, value: f64, tolerance: f64) {
    out.push(Check {
        name: name.into(),
        phi_o_deg: phi,
        value,
        tolerance,
        pass: value.is_finite() && value < tolerance,
    });
}

fn max_of(it: impl Iterator<Item = f64>) -> f64 {
    it.fold(0.0, f64::max)
}

pub fn validate(cfg: &RunConfig, setup: &Setup) -> Result<ValidationReport, CliError> {
    let mut checks = Vec::new();
    let geom = &setup.geom;
    let x = geom.k0r();
    let order = truncation_order(x);

    let t = CylinderFunctions::new(order, x)?;
    let w0 = 2.0 / (std::f64::consts::PI * x);
    let wr = max_of((0..=order as i32).map(|m| ((t.j(m) * t.y_prime(m) - t.j_prime(m) * t.y(m)) / w0 - 1.0).abs()));
    push(&mut checks, "wronskian", None, wr, 1e-10);

    let probe = AngularGrid::full_circle(360)?;
    let ja = probe
        .samples()
        .iter()
        .map(|&phi| jacobi_anger(x, phi, order).map(|v| (v - Complex64::from_polar(1.0, x * phi.cos())).norm()))
        .collect::<Result<Vec<_>, _>>()?;
    push(&mut checks, "jacobi_anger", None, max_of(ja.into_iter()), 1e-8);

    let grid = AngularGrid::full_circle(cfg.output.grid_points)?;
    for &deg in &cfg.steering.phi_o_deg {
        let phi_o = deg.to_radians();
        let e = modal_coefficients(geom, phi_o, order)?;
        let z = surface_impedance(geom, &e, &grid)?;
        let r = boundary_residual(geom, &e, &z.z_over_eta0, &z.pole_mask, &grid)?;
        push(&mut checks, "boundary_residual", Some(deg), max_of(r.into_iter().flatten()), 1e-8);

        let fields = surface_fields(geom, &e, &grid)?;
        let id = max_of(
            grid.samples()
                .iter()
                .zip(&fields)
                .map(|(&phi, f)| (f.e_sca - Complex64::from_polar(1.0, -x * (phi - phi_o).cos())).norm()),
        );
        push(&mut checks, "surface_identity", Some(deg), id, 1e-6);

        let g = go_impedance(geom, phi_o, &grid);
        let ok = || g.z_over_eta0.iter().zip(&g.singular_mask).filter(|(_, &s)| !s);
        push(&mut checks, "go_lossless", Some(deg), max_of(ok().map(|(z, _)| z.re.abs())), 1e-12);
        let rt = max_of(
            grid.samples()
                .iter()
                .zip(&g.z_over_eta0)
                .zip(&g.gamma)
                .zip(&g.singular_mask)
                .filter(|(_, &s)| !s)
                .map(|(((&phi, z), gm), _)| (reflection_from_impedance(*z, phi) - gm).norm()),
        );
        push(&mut checks, "go_round_trip", Some(deg), rt, 1e-10);

        if let Some(array) = &setup.array {
            let spec: SteeringSpec = setup.window(cfg, deg)?;
            let sgrid = AngularGrid::full_circle(cfg.output.sigma_grid_points)?;
            let table = steering_vector(array, &sgrid);
            let sig = build_sigma(&table, &spec)?;
            push(&mut checks, "sigma_hermitian", Some(deg), sig.hermitian_defect(), 1e-12);
            let (a, b) = sig.min_relative_eigenvalues();
            push(&mut checks, "sigma_psd", Some(deg), (-a).max(-b).max(0.0), 1e-9);

            let a_o = array.steering_vector_at(phi_o);
            let solver = MpdrSolver::new(&sig.sigma)?;
            let gamma = solver.relaxed(&a_o, 1.0, 0.0)?;
            let q = SigmaMatrices::power(&sig.sigma, &gamma);
            let p = far_field_discrete(&table, &gamma)?;
            let e_int = p.values().iter().map(|f| f.norm_sqr()).sum::<f64>() * sgrid.spacing();
            push(&mut checks, "quadratic_form", Some(deg), ((q - e_int) / e_int).abs(), 1e-6);
            let c: Complex64 = a_o.iter().zip(&gamma).map(|(a, g)| a * g).sum();
            push(&mut checks, "mpdr_constraint", Some(deg), (c - 1.0).norm(), 1e-9);
        }
    }
    Ok(ValidationReport { checks })
}
