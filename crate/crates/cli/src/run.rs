use std::path::{Path, PathBuf};

use serde::Serialize;
use susy_pert::catalog::{SystemKind, UnperturbedState};
use susy_pert::engine::{
    compose_wavefunction, moderating_function, series_residual, solve_series_with, CorrectionSeries, EngineConfig,
};
use susy_pert::foundation::{normalize, quad, DomainKind, FinitePart, GridFunction, RadialGrid};
use susy_pert::oracle::{numerov_eigenvalue, numerov_wavefunction, BoundaryCondition, ClaimRecord};

use crate::output::{csv, json, num, write_all_atomic};
use crate::scenario::{ExprTag, Prepared, Scenario, ToleranceProfile};
use crate::{CliError, OutputFormat};

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub grid_points: Option<usize>,
    pub orders: Option<usize>,
    pub format: OutputFormat,
    pub tolerance: ToleranceProfile,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            out_dir: PathBuf::from("."),
            grid_points: None,
            orders: None,
            format: OutputFormat::Both,
            tolerance: ToleranceProfile::Default,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OrderReport {
    pub k: usize,
    pub delta_eps: f64,
    pub cumulative_energy: f64,
    pub residual_max: f64,
    pub flagged: bool,
    pub energy_finite_part: Option<FinitePart>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub numerov_energy: f64,
    pub abs_diff: f64,
    pub rel_diff: f64,
    /// `|⟨ψ_numerov, ψ⟩|`, absent when `ψ` could not be formed.
    pub overlap: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub name: String,
    pub units: String,
    pub base_system: SystemKind,
    pub lambda: f64,
    pub grid: RadialGrid,
    pub tolerance_profile: &'static str,
    pub unperturbed_energy: f64,
    pub total_energy: f64,
    pub base_riccati_residual: f64,
    pub series_residual_max: f64,
    pub orders: Vec<OrderReport>,
    pub oracle: Option<OracleReport>,
    pub checks: Vec<ClaimRecord>,
    pub flagged: bool,
    pub notes: Vec<String>,
}

/// Everything a run produces, before anything touches the filesystem.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: Report,
    pub energies_csv: String,
    pub wavefunction_csv: String,
}

impl RunOutput {
    pub fn files(&self, format: OutputFormat) -> Vec<(String, String)> {
        let name = &self.report.name;
        let mut files = Vec::new();
        if format.csv() {
            files.push((format!("{name}.energies.csv"), self.energies_csv.clone()));
            files.push((format!("{name}.wavefunction.csv"), self.wavefunction_csv.clone()));
        }
        if format.json() {
            files.push((format!("{name}.report.json"), json(&self.report)));
        }
        files
    }
}

/// Loads, validates and runs a scenario file, then writes its outputs.
pub fn run_scenario(config_path: &Path, options: &RunOptions) -> Result<Vec<PathBuf>, CliError> {
    let scenario = Scenario::load(config_path)?;
    let output = compute(&scenario, options)?;
    write_run(&output, &options.out_dir, options.format)
}

pub fn write_run(output: &RunOutput, dir: &Path, format: OutputFormat) -> Result<Vec<PathBuf>, CliError> {
    write_all_atomic(dir, &output.files(format))
}

/// Boundary conditions matching a grid's domain.
pub fn boundary_for(grid: &RadialGrid) -> BoundaryCondition {
    match grid.domain_kind {
        DomainKind::HalfLine => BoundaryCondition::radial(),
        DomainKind::FullLine => BoundaryCondition::decaying(),
        DomainKind::Interval => BoundaryCondition::dirichlet(),
    }
}

/// Half-widths around an unresolved window where stencils still see the singularity.
const UNRESOLVED_GUARD: f64 = 3.0;

/// Max of `|residual|` over the state's interior, skipping windows, the
/// neighbourhood of unresolved windows and non-finite samples.
pub fn residual_norm(state: &UnperturbedState, residual: &GridFunction) -> f64 {
    let mut mask = state.interior_mask();
    for (i, m) in mask.iter_mut().enumerate() {
        let r = state.grid.r(i);
        let guarded = residual.poles.iter().any(|p| !p.is_resolved() && (r - p.center).abs() <= UNRESOLVED_GUARD * p.half_width);
        *m &= !guarded && !residual.is_excluded(i) && residual.values[i].is_finite();
    }
    residual.max_abs_where(&mask)
}

/// `|∫ab|` for two normalized functions.
pub fn overlap(a: &GridFunction, b: &GridFunction) -> Result<f64, susy_pert::Error> {
    let (a, b) = (normalize(a)?, normalize(b)?);
    Ok(quad(&a.zip_with(&b, |x, y| x * y)?)?.abs())
}

/// Solves the scenario and the oracle problem and formats the outputs.
pub fn compute(scenario: &Scenario, options: &RunOptions) -> Result<RunOutput, CliError> {
    let Prepared { units, state, series, orders } = scenario.prepare(options.grid_points, options.orders)?;
    let tol = options.tolerance.scale();
    let config = EngineConfig::default();
    let ctx = |what: &str| CliError::numerical(format!("{} ({what})", scenario.name));
    let solved = solve_series_with(&state, &series, orders, &config).map_err(ctx("series"))?;
    let residual = series_residual(&solved, &series, orders).map_err(ctx("residual"))?;
    let mut notes = Vec::new();

    let (phi, psi) = match engine_wavefunction(&solved, orders) {
        Ok((phi, psi, how)) => {
            notes.push(how);
            (Some(phi), Some(psi))
        }
        Err(e) => {
            notes.push(format!("wavefunction not formed: {e}"));
            (None, None)
        }
    };

    let total = series.total().map_err(ctx("perturbation"))?;
    let potential = state.perturbed_potential(&total).map_err(ctx("potential"))?;
    let bc = boundary_for(&state.grid);
    let energy = solved.total_energy();
    let mut oracle = None;
    let mut psi_numerov = None;
    let interior_nodes = state.nodes.iter().filter(|&&z| z > state.grid.r_min && z < state.grid.r_max).count();
    match numerov_eigenvalue(&potential, &units, &bc, interior_nodes) {
        Ok(e_num) => {
            let mut ov = None;
            match numerov_wavefunction(&potential, &units, e_num, &bc) {
                Ok(mut p) => {
                    if let Some(psi) = &psi {
                        let signed = quad(&p.zip_with(psi, |x, y| x * y).map_err(ctx("overlap"))?).map_err(ctx("overlap"))?;
                        if signed < 0.0 {
                            p = p.scale(-1.0);
                        }
                        ov = Some(signed.abs());
                    }
                    psi_numerov = Some(p);
                }
                Err(e) => notes.push(format!("numerov wavefunction failed: {e}")),
            }
            let abs_diff = (energy - e_num).abs();
            oracle = Some(OracleReport {
                numerov_energy: e_num,
                abs_diff,
                rel_diff: abs_diff / e_num.abs().max(f64::MIN_POSITIVE),
                overlap: ov,
            });
        }
        Err(e) => notes.push(format!("numerov eigenvalue failed: {e}")),
    }

    let mut checks = Vec::new();
    for check in &scenario.checks {
        match check.as_str() {
            "numerov" => checks.push(match &oracle {
                Some(o) => ClaimRecord::compare(
                    "numerov",
                    o.numerov_energy,
                    energy,
                    "series energy vs numerov eigenvalue",
                    1e-6 * tol * o.numerov_energy.abs().max(1.0),
                ),
                None => ClaimRecord::compare("numerov", f64::NAN, energy, "series energy vs numerov eigenvalue", 0.0)
                    .flagged("numerov eigenvalue unavailable"),
            }),
            "Eq21" | "Eq29" => checks.extend(closed_form_checks(check, scenario, &state, energy, psi.as_ref(), tol)),
            _ => unreachable!("checks validated"),
        }
    }

    let order_reports: Vec<OrderReport> = solved
        .orders
        .iter()
        .map(|o| OrderReport {
            k: o.k,
            delta_eps: o.delta_eps,
            cumulative_energy: state.epsilon + solved.partial_energy_shift(o.k),
            residual_max: o.residual_max,
            flagged: o.flagged,
            energy_finite_part: o.energy_finite_part.clone(),
            notes: o.notes.clone(),
        })
        .collect();

    let energies_csv = csv(
        &["k", "delta_eps", "cumulative_energy"],
        std::iter::once(vec!["0".into(), num(0.0), num(state.epsilon)])
            .chain(order_reports.iter().map(|o| vec![o.k.to_string(), num(o.delta_eps), num(o.cumulative_energy)])),
    );
    let column = |f: &Option<GridFunction>, i: usize| num(f.as_ref().map_or(f64::NAN, |g| g.values[i]));
    let wavefunction_csv = csv(
        &["r", "chi", "phi", "psi", "psi_numerov"],
        (0..state.grid.n_points).map(|i| {
            vec![num(state.grid.r(i)), num(state.chi.values[i]), column(&phi, i), column(&psi, i), column(&psi_numerov, i)]
        }),
    );

    let report = Report {
        name: scenario.name.clone(),
        units: scenario.units.clone(),
        base_system: scenario.base_system,
        lambda: scenario.lambda,
        grid: state.grid,
        tolerance_profile: options.tolerance.as_str(),
        unperturbed_energy: state.epsilon,
        total_energy: energy,
        base_riccati_residual: state.max_riccati_residual(),
        series_residual_max: residual_norm(&state, &residual),
        flagged: solved.flagged(),
        orders: order_reports,
        oracle,
        checks,
        notes,
    };
    Ok(RunOutput { report, energies_csv, wavefunction_csv })
}

/// Largest `|c₋₂|` treated as a simple pole when choosing the form of `φ`.
const DOUBLE_POLE_TOL: f64 = 1e-8;

/// `φ = exp(−(1/κ)∫ΣλᵏΔW_k)` and the normalized `ψ = χφ`. When `ΔW` has
/// double or unresolved poles the exponential has essential singularities at
/// the nodes; `φ` then falls back to the first-order form `1 + λφ_1`.
fn engine_wavefunction(solved: &CorrectionSeries<'_>, orders: usize) -> Result<(GridFunction, GridFunction, String), susy_pert::Error> {
    let dw = solved.delta_w_sum(orders)?;
    let simple = dw.poles.iter().all(|p| p.is_resolved() && p.c_minus2.abs() <= DOUBLE_POLE_TOL);
    if simple {
        let phi = moderating_function(&dw, &solved.base.units)?;
        let psi = compose_wavefunction(&solved.base.chi, &phi)?;
        return Ok((phi, psi, format!("phi = exp(-(1/kappa) int sum_k lambda^k dW_k) through order {orders}")));
    }
    let phi_1 = solved.orders[0].phi.as_ref().ok_or_else(|| {
        susy_pert::Error::DegenerateFunction("first-order phi is unavailable".into())
    })?;
    let phi = phi_1.without_poles().map(|_, g| 1.0 + solved.lambda * g);
    let psi = compose_wavefunction(&solved.base.chi, &phi)?;
    Ok((phi, psi, "phi = 1 + lambda phi_1 (first order): dW has double or unresolved poles at the nodes".into()))
}

/// Energy and wavefunction rows against the exactly solvable perturbed forms.
fn closed_form_checks(
    id: &str,
    scenario: &Scenario,
    state: &UnperturbedState,
    energy: f64,
    psi: Option<&GridFunction>,
    tol: f64,
) -> Vec<ClaimRecord> {
    let u = state.units;
    let lambda = scenario.lambda;
    let ell = state.ell as f64;
    let (exact_energy, shape): (f64, Box<dyn Fn(f64) -> f64>) = match (id, scenario.base_system) {
        ("Eq21", SystemKind::RadialOscillator { w, .. }) => {
            let c = scenario.first_order_coefficient(ExprTag::QuadraticR2);
            let w_eff = w * (1.0 + 2.0 * lambda * c / (u.mass * w * w)).sqrt();
            let a = u.mass * w_eff / (2.0 * u.hbar);
            ((ell + 1.5) * u.hbar * w_eff, Box::new(move |r: f64| r.powf(ell + 1.0) * (-a * r * r).exp()))
        }
        ("Eq29", SystemKind::CoulombGround { .. }) => {
            let c = scenario.first_order_coefficient(ExprTag::InverseR);
            let charge = u.charge_sq - lambda * c;
            let e = -u.mass * charge * charge / (2.0 * u.hbar * u.hbar * (ell + 1.0).powi(2));
            let a = u.mass * charge / ((ell + 1.0) * u.hbar * u.hbar);
            (e, Box::new(move |r: f64| r.powf(ell + 1.0) * (-a * r).exp()))
        }
        _ => unreachable!("checks validated against the base system"),
    };
    let energy_tol = if id == "Eq29" { 1e-8 } else { 1e-6 };
    let mut rows = vec![ClaimRecord::compare(id, exact_energy, energy, "series cumulative energy", energy_tol * tol)];
    let exact_psi = GridFunction::from_fn(state.grid, shape);
    rows.push(match psi.map(|p| overlap(p, &exact_psi)) {
        Some(Ok(ov)) => ClaimRecord::compare(id, 1.0, ov, "overlap of series ψ with closed form", 1e-6 * tol),
        Some(Err(e)) => ClaimRecord::compare(id, 1.0, f64::NAN, "overlap of series ψ with closed form", 0.0).flagged(e.to_string()),
        None => ClaimRecord::compare(id, 1.0, f64::NAN, "overlap of series ψ with closed form", 0.0).flagged("ψ not formed"),
    });
    rows
}
