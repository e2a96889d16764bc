//! The reproduction ledger: one `ClaimRecord` per printed result of the four
//! worked examples.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use susy_pert::catalog::{coulomb_ground, infinite_well, oscillator_1d_n1, radial_oscillator, UnperturbedState};
use susy_pert::engine::{
    dw_from_ks_phi, first_order, partner_potential, perturbed_rule, shape_invariance_spectrum, solve_series,
    verify_ansatz, PerturbationSeries,
};
use susy_pert::foundation::{
    normalize, quad, DomainKind, GridFunction, PoleWindow, RadialGrid, UnitsConvention, WINDOW_SPACINGS,
};
use susy_pert::oracle::{
    lambda_curvature, numerov_eigenvalue, BoundaryCondition, ClaimRecord, CurvatureProblem, DEFAULT_LAMBDA_STEP,
};
use susy_pert::Result;

use crate::output::{csv, json, num, text, write_all_atomic};
use crate::run::overlap;
use crate::{CliError, OutputFormat, ToleranceProfile};

/// Builds every ledger row. Sections run in parallel; row order is fixed.
pub fn reproduce_paper(profile: ToleranceProfile) -> Vec<ClaimRecord> {
    let tol = profile.scale();
    let sections: [fn(f64) -> Vec<ClaimRecord>; 4] = [oscillator_rows, coulomb_rows, linear_oscillator_rows, well_rows];
    sections.par_iter().map(|section| section(tol)).collect::<Vec<_>>().into_iter().flatten().collect()
}

pub fn ledger_csv(records: &[ClaimRecord]) -> String {
    csv(
        &["claim_id", "paper_value", "computed_value", "method", "abs_diff", "rel_diff", "tolerance", "verdict", "note"],
        records.iter().map(|r| {
            vec![
                text(&r.claim_id),
                num(r.paper_value),
                num(r.computed_value),
                text(&r.method),
                num(r.abs_diff),
                num(r.rel_diff),
                num(r.tolerance),
                r.verdict.as_str().to_string(),
                text(&r.note),
            ]
        }),
    )
}

/// Writes `ledger.csv` and/or `ledger.json` into `dir`.
pub fn write_ledger(records: &[ClaimRecord], dir: &Path, format: OutputFormat) -> std::result::Result<Vec<PathBuf>, CliError> {
    let mut files = Vec::new();
    if format.csv() {
        files.push(("ledger.csv".to_string(), ledger_csv(records)));
    }
    if format.json() {
        files.push(("ledger.json".to_string(), json(&records)));
    }
    write_all_atomic(dir, &files)
}

/// A row whose computation may fail; failures become flagged rows.
fn row(id: &str, paper: f64, method: &str, tol: f64, note: &str, f: impl FnOnce() -> Result<f64>) -> ClaimRecord {
    match f() {
        Ok(v) => ClaimRecord::compare(id, paper, v, method, tol).with_note(note),
        Err(e) => ClaimRecord::compare(id, paper, f64::NAN, method, tol).flagged(format!("{note}; computation failed: {e}")),
    }
}

fn ok<T>(r: &Result<T>) -> Result<&T> {
    r.as_ref().map_err(|e| e.clone())
}

fn half_line(r_max: f64, n: usize) -> RadialGrid {
    RadialGrid::uniform(DomainKind::HalfLine, 0.0, r_max, n).expect("fixed grid")
}

fn well_grid() -> RadialGrid {
    RadialGrid::uniform(DomainKind::Interval, -PI / 2.0, PI / 2.0, 2001).expect("fixed grid")
}

fn origin(grid: &RadialGrid, c_minus2: f64, c_minus1: f64) -> PoleWindow {
    PoleWindow::new(0.0, WINDOW_SPACINGS * grid.spacing, c_minus2, c_minus1)
}

/// Interior points of `state` outside every window of `fs`.
fn clear_of(state: &UnperturbedState, fs: &[&GridFunction]) -> Vec<bool> {
    let mut mask = state.interior_mask();
    for (i, m) in mask.iter_mut().enumerate() {
        *m &= fs.iter().all(|f| !f.is_excluded(i) && f.values[i].is_finite());
    }
    mask
}

fn max_dev(f: &GridFunction, exact: impl Fn(f64) -> f64, mask: &[bool]) -> f64 {
    (0..f.len()).filter(|&i| mask[i]).map(|i| (f.values[i] - exact(f.grid.r(i))).abs()).fold(0.0, f64::max)
}

/// Spread of `ln φ − ln φ_exact`, i.e. agreement up to a constant factor.
fn log_shape_dev(phi: &GridFunction, exact: impl Fn(f64) -> f64, mask: &[bool]) -> f64 {
    let d: Vec<f64> = (0..phi.len())
        .filter(|&i| mask[i] && phi.values[i] > 0.0)
        .map(|i| phi.values[i].ln() - exact(phi.grid.r(i)).ln())
        .collect();
    let mean = d.iter().sum::<f64>() / d.len() as f64;
    d.iter().map(|x| (x - mean).abs()).fold(0.0, f64::max)
}

fn binomial_half(k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (0.5 - j as f64) / (j as f64 + 1.0))
}

fn oscillator_rows(tol: f64) -> Vec<ClaimRecord> {
    let u = UnitsConvention::oscillator();
    let w = 1.0;
    let grid = half_line(10.0, 2001);
    let dw_for = |lambda: f64| GridFunction::from_fn(grid, move |r| (u.mass / 2.0).sqrt() * w * r * ((1.0 + lambda).sqrt() - 1.0));
    let dv_for = |lambda: f64| GridFunction::from_fn(grid, move |r| 0.5 * u.mass * lambda * w * w * r * r);
    let mut rows = Vec::new();

    for ell in 0..=2u32 {
        for lambda in [0.1f64, 0.21, 0.5] {
            let paper = (ell as f64 + 1.5) * ((1.0 + lambda).sqrt() - 1.0) * u.hbar * w;
            rows.push(row("Eq18", paper, "verify_ansatz", 1e-8 * tol, &format!("l={ell} lambda={lambda}"), || {
                let state = radial_oscillator(u, w, ell, grid)?;
                Ok(verify_ansatz(&state, &dw_for(lambda), &dv_for(lambda))?.delta_eps)
            }));
        }
    }

    let lambda: f64 = 0.21;
    let e_paper = (1.0 + lambda).sqrt() * 1.5 * u.hbar * w;
    let solved = radial_oscillator(u, w, 0, grid).and_then(|state| {
        let sol = verify_ansatz(&state, &dw_for(lambda), &dv_for(lambda))?;
        Ok((state, sol))
    });
    let note = "l=0 lambda=0.21";
    match &solved {
        Ok((state, sol)) => {
            let mask = clear_of(state, &[&sol.phi]);
            rows.push(row("Eq16", 0.0, "max residual of the full perturbed Riccati identity with Eq16's dW", 1e-6 * tol, note, || {
                let w_tot = state.w_super.add(&sol.delta_w)?;
                let dwp = susy_pert::foundation::derivative(&w_tot);
                let v = state.v0.add(&dv_for(lambda))?;
                let e = state.epsilon + sol.delta_eps;
                let res = GridFunction::from_values(
                    grid,
                    (0..grid.n_points)
                        .map(|i| w_tot.values[i].powi(2) - state.kappa() * dwp.values[i] - v.values[i] + e)
                        .collect(),
                )?;
                Ok(res.max_abs_where(&clear_of(state, &[&w_tot])))
            }));
            let a = u.mass * w / (2.0 * u.hbar) * (1.0 - (1.0 + lambda).sqrt());
            rows.push(row("Eq19", 0.0, "log-shape deviation of moderating_function from Eq19", 1e-8 * tol, note, || {
                Ok(log_shape_dev(&sol.phi, |r| (a * r * r).exp(), &mask))
            }));
            rows.push(row("Eq21", e_paper, "verify_ansatz energy", 1e-8 * tol, note, || Ok(state.epsilon + sol.delta_eps)));
            let b = u.mass * w * (1.0 + lambda).sqrt() / (2.0 * u.hbar);
            rows.push(row("Eq21", 1.0, "overlap of composed psi with Eq21", 1e-6 * tol, note, || {
                overlap(&sol.psi, &GridFunction::from_fn(grid, |r| r * (-b * r * r).exp()))
            }));
        }
        Err(e) => {
            for id in ["Eq16", "Eq19", "Eq21"] {
                rows.push(ClaimRecord::compare(id, f64::NAN, f64::NAN, "verify_ansatz", 0.0).flagged(format!("{note}; {e}")));
            }
        }
    }
    let v_pert = GridFunction::from_fn(grid, |r| 0.5 * u.mass * (1.0 + lambda) * w * w * r * r);
    rows.push(row("Eq21", e_paper, "numerov eigenvalue", 1e-6 * e_paper * tol, note, || {
        numerov_eigenvalue(&v_pert, &u, &BoundaryCondition::radial(), 0)
    }));
    let k_max = 6;
    let taylor = radial_oscillator(u, w, 0, grid).and_then(|state| {
        let series = PerturbationSeries::new(lambda, vec![dv_for(1.0)])?;
        Ok(solve_series(&state, &series, k_max)?.orders.iter().map(|o| o.delta_eps).collect::<Vec<_>>())
    });
    for k in 1..=k_max {
        let paper = 1.5 * u.hbar * w * binomial_half(k);
        rows.push(row("Eq21", paper, &format!("solve_series order {k}"), 1e-8 * tol, "coefficient of lambda^k in the expansion of sqrt(1+lambda)", || {
            ok(&taylor).map(|d| d[k - 1])
        }));
    }

    rows.push(row("Eq17", 0.0, "max deviation of catalog W from Eq17", 1e-10 * tol, "l=0", || {
        let state = radial_oscillator(u, w, 0, grid)?;
        let kappa = state.kappa();
        Ok(max_dev(&state.w_super, |r| (u.mass / 2.0).sqrt() * w * r - kappa / r, &clear_of(&state, &[])))
    }));
    let v_free = GridFunction::from_fn(grid, |r| 0.5 * u.mass * w * w * r * r);
    rows.push(row("Eq20", 1.5 * u.hbar * w, "numerov eigenvalue", 1e-6 * 1.5 * tol, "l=0 lambda=0", || {
        numerov_eigenvalue(&v_free, &u, &BoundaryCondition::radial(), 0)
    }));

    let n_max = 5;
    let ladder = ok(&solved).and_then(|(state, sol)| {
        let e0 = state.epsilon + sol.delta_eps;
        let partner = partner_potential(state, &sol.delta_w, e0)?;
        let rule = perturbed_rule(state, &sol.delta_w, n_max)?;
        Ok((partner.remainder_value, shape_invariance_spectrum(e0, &rule, n_max)))
    });
    rows.push(row("Eq22", 2.0 * u.hbar * w * (1.0 + lambda).sqrt(), "partner potential remainder R(a1)", 1e-6 * tol, note, || {
        ladder.as_ref().map(|l| l.0).map_err(|e| e.clone())
    }));
    for n in 0..=n_max {
        let paper = (2.0 * n as f64 + 1.5) * u.hbar * w * (1.0 + lambda).sqrt();
        let note = format!("n={n} l=0 lambda=0.21");
        rows.push(row("Eq24", paper, "shape-invariance ladder", 1e-6 * paper * tol, &note, || {
            ladder.as_ref().map(|l| l.1[n]).map_err(|e| e.clone())
        }));
        rows.push(row("Eq24", paper, "numerov eigenvalue", 1e-6 * paper * tol, &note, || {
            numerov_eigenvalue(&v_pert, &u, &BoundaryCondition::radial(), n)
        }));
    }
    rows
}

fn coulomb_rows(tol: f64) -> Vec<ClaimRecord> {
    let u = UnitsConvention::atomic();
    let grid = half_line(40.0, 4001);
    let dw_per_lambda = -(u.mass / 8.0).sqrt() * u.charge_sq / u.hbar;
    let dv_for = |lambda: f64| {
        let c = lambda * u.charge_sq / 2.0;
        GridFunction::from_fn(grid, move |r| c / r).with_pole(origin(&grid, 0.0, c))
    };
    let mut rows = Vec::new();
    let state = match coulomb_ground(u, 0, grid) {
        Ok(s) => s,
        Err(e) => return vec![ClaimRecord::compare("Eq26", -0.5, f64::NAN, "catalog", 0.0).flagged(e.to_string())],
    };

    for lambda in [1.0, 0.2] {
        let paper = -(u.mass * u.charge_sq.powi(2) / (2.0 * u.hbar * u.hbar)) * (lambda * lambda / 4.0 - lambda);
        rows.push(row("Eq28", paper, "verify_ansatz with Eq27's dW", 1e-8 * tol, &format!("l=0 lambda={lambda}"), || {
            let dw = GridFunction::constant(grid, lambda * dw_per_lambda);
            Ok(verify_ansatz(&state, &dw, &dv_for(lambda)?)?.delta_eps)
        }));
    }
    let lambda = 0.2;
    let note = "l=0 lambda=0.2";
    rows.push(row("Eq28", 0.0, "log-shape deviation of moderating_function from Eq28's phi", 1e-8 * tol, note, || {
        let sol = verify_ansatz(&state, &GridFunction::constant(grid, lambda * dw_per_lambda), &dv_for(lambda)?)?;
        let a = lambda * u.mass * u.charge_sq / (2.0 * u.hbar);
        Ok(log_shape_dev(&sol.phi, |r| (a * r).exp(), &clear_of(&state, &[&sol.phi])))
    }));

    let e_paper = -u.mass * u.charge_sq.powi(2) / (2.0 * u.hbar * u.hbar) * (1.0 - lambda / 2.0).powi(2);
    let k_max = 4;
    let solved = dv_for(1.0).and_then(|dv| {
        let series = PerturbationSeries::new(lambda, vec![dv])?;
        let s = solve_series(&state, &series, k_max)?;
        let dw = s.delta_w_sum(k_max)?;
        let phi = susy_pert::engine::moderating_function(&dw, &u)?;
        let psi = susy_pert::engine::compose_wavefunction(&state.chi, &phi)?;
        Ok((s.orders.iter().map(|o| o.delta_eps).collect::<Vec<_>>(), s.total_energy(), psi, s.orders[0].delta_w.clone()))
    });
    rows.push(row("Eq29", e_paper, "solve_series cumulative energy through order 4", 1e-8 * tol, note, || ok(&solved).map(|s| s.1)));
    rows.push(row("Eq29", e_paper, "numerov eigenvalue", 1e-6 * e_paper.abs() * tol, note, || {
        let v = state.v0.add(&dv_for(lambda)?)?;
        numerov_eigenvalue(&v, &u, &BoundaryCondition::radial(), 0)
    }));
    rows.push(row("Eq29", 1.0, "overlap of series psi with Eq29", 1e-6 * tol, note, || {
        let s = ok(&solved)?;
        let a = u.mass * u.charge_sq * (1.0 - lambda / 2.0) / u.hbar.powi(2);
        overlap(&s.2, &GridFunction::from_fn(grid, |r| r * (-a * r).exp()))
    }));
    rows.push(row("Eq31", 0.0, "max deviation of first-order dW from Eq27 per unit lambda", 1e-6 * tol, "l=0", || {
        let s = ok(&solved)?;
        Ok(max_dev(&s.3, |_| dw_per_lambda, &clear_of(&state, &[&s.3])))
    }));
    rows.push(row("Eq26", -0.5 * u.mass * u.charge_sq.powi(2) / u.hbar.powi(2), "numerov eigenvalue", 1e-6 * 0.5 * tol, "l=0 lambda=0", || {
        numerov_eigenvalue(&state.v0, &u, &BoundaryCondition::radial(), 0)
    }));
    rows.push(row("Eq26", 0.0, "max deviation of catalog W from Eq26", 1e-10 * tol, "l=0", || {
        let slope = (u.mass / 2.0).sqrt() * u.charge_sq / u.hbar;
        let kappa = state.kappa();
        Ok(max_dev(&state.w_super, |r| slope - kappa / r, &clear_of(&state, &[])))
    }));
    let printed = [0.5, -0.125, 0.0, 0.0];
    for (k, paper) in printed.iter().enumerate() {
        let note = format!("coefficient of lambda^{}", k + 1);
        rows.push(row("Eq32", *paper, &format!("solve_series order {}", k + 1), 1e-7 * tol, &note, || ok(&solved).map(|s| s.0[k])));
    }
    rows.push(row("Eq32", 0.0, "max deviation of dw_from_ks_phi(phi01) from Eq27 per unit lambda", 1e-5 * tol, "a=1", || {
        let phi = GridFunction::from_fn(grid, |r| (r - 1.0) / 2.0);
        let dw = dw_from_ks_phi(&phi, &u);
        Ok(max_dev(&dw, |_| dw_per_lambda, &state.interior_mask()))
    }));
    rows
}

fn linear_oscillator_rows(tol: f64) -> Vec<ClaimRecord> {
    let u = UnitsConvention::half_unit();
    let (w, lambda, b) = (1.0, 0.3, -1.0);
    let grid = half_line(12.0, 2401);
    let note = format!("half line, w={w} lambda={lambda} B={b}");
    let dv = GridFunction::from_fn(grid, move |r| lambda * r + b);
    let mut rows = Vec::new();
    let state = match oscillator_1d_n1(u, w, grid) {
        Ok(s) => s,
        Err(e) => return vec![ClaimRecord::compare("Eq36", 1.5 * w, f64::NAN, "catalog", 0.0).flagged(e.to_string())],
    };

    rows.push(row("Eq36", 1.5 * w, "numerov half-line ground state of the unperturbed oscillator", 1e-6 * 1.5 * tol, "Dirichlet at 0", || {
        numerov_eigenvalue(&state.v0, &u, &BoundaryCondition::radial(), 0)
    }));
    rows.push(row("Eq36", 0.0, "max deviation of catalog W from Eq36", 1e-10 * tol, "w=1", || {
        Ok(max_dev(&state.w_super, |r| w * r / 2.0 - 1.0 / r, &clear_of(&state, &[])))
    }));
    rows.push(row("Eq35", 0.0, "max deviation of dw_from_ks_phi(Eq34 phi11) from Eq35", 1e-5 * tol, &note, || {
        let c = 2.0 * lambda / (w * w);
        let phi = GridFunction::from_fn(grid, |r| -(lambda / w) * (r - 2.0 / (w * r))).with_pole(origin(&grid, 0.0, c))?;
        let dw = dw_from_ks_phi(&phi, &u);
        let mask = clear_of(&state, &[&phi, &dw]);
        Ok(max_dev(&dw, |r| (lambda / w) * (1.0 + 2.0 / (w * r * r)), &mask))
    }));

    // on the full line ⟨r⟩ vanishes by parity
    let full_line_shift = RadialGrid::uniform(DomainKind::FullLine, -12.0, 12.0, 4801).and_then(|g| {
        let chi = normalize(&GridFunction::from_fn(g, |r| r * (-w * r * r / 4.0).exp()))?;
        quad(&chi.map(|r, c| c * c * (lambda * r + b)))
    });
    let full_note = match &full_line_shift {
        Ok(v) => format!("{note}; full-line quadrature of chi^2 (lambda r + B) gives {v:.10}"),
        Err(e) => format!("{note}; full-line quadrature failed: {e}"),
    };
    let series = PerturbationSeries::new(1.0, vec![dv.clone()]).and_then(|s| solve_series(&state, &s, 2).map(|c| c.orders));
    rows.push(row("Eq34", b, "solve_series order 1 with dV1 = lambda r + B", 1e-8 * tol, &full_note, || ok(&series).map(|o| o[0].delta_eps)));
    let second_note = format!("{note}; the half-line correction differs from the full-line shift -lambda^2/(2 m w^2) of a uniform field");
    rows.push(row("Eq34", -lambda * lambda / (w * w), "solve_series order 2 with dV1 = lambda r + B", 1e-8 * tol, &second_note, || {
        ok(&series).map(|o| o[1].delta_eps)
    }));

    let dw_exact = GridFunction::from_fn(grid, move |r| lambda / w + 1.0 / r).with_pole(origin(&grid, 0.0, 1.0));
    let ansatz = dw_exact.and_then(|dw| verify_ansatz(&state, &dw, &dv));
    let paper_shift = b - lambda * lambda / (w * w);
    rows.push(row("Eq39", 0.0, "verify_ansatz remainder standard deviation", 1e-6 * tol, &note, || ok(&ansatz).map(|s| s.remainder_std)));
    let shift = row("Eq39", paper_shift, "verify_ansatz energy shift", 1e-8 * tol, &note, || ok(&ansatz).map(|s| s.delta_eps));
    let gap = shift.computed_value - paper_shift;
    rows.push(shift.clone().flagged(format!(
        "{note}; Riccati remainder gives B - lambda^2/w^2 {gap:+.10} (offset -w); the printed sum uses the n=1 energy 3w/2 for a nodeless state"
    )));
    rows.push(row("Eq40", 0.0, "log-shape deviation of moderating_function from Eq40", 1e-8 * tol, &note, || {
        let s = ok(&ansatz)?;
        Ok(log_shape_dev(&s.phi, |r| (-lambda * r / w).exp() / r, &clear_of(&state, &[&s.phi, &s.delta_w])))
    }));
    rows.push(row("Eq41", 0.0, "max pointwise deviation of composed psi from normalized Eq41", 1e-8 * tol, &note, || {
        let s = ok(&ansatz)?;
        let exact = normalize(&GridFunction::from_fn(grid, |r| (-w * r * r / 4.0 - lambda * r / w).exp()))?;
        Ok(s.psi.values.iter().zip(&exact.values).map(|(a, e)| (a - e).abs()).fold(0.0, f64::max))
    }));

    let paper_e = 1.5 * w + b - lambda * lambda / (w * w);
    let v_of = |g: RadialGrid| GridFunction::from_fn(g, move |r| w * w * r * r / 4.0 + lambda * r + b);
    let level = |g: RadialGrid, bc: BoundaryCondition, n: usize| numerov_eigenvalue(&v_of(g), &u, &bc, n);
    let full = RadialGrid::uniform(DomainKind::FullLine, -12.0, 12.0, 4801).expect("fixed grid");
    let show = |r: &Result<f64>| r.as_ref().map_or_else(|e| format!("failed ({e})"), |v| format!("{v:.10}"));
    let (h0, h1) = (level(grid, BoundaryCondition::radial(), 0), level(grid, BoundaryCondition::radial(), 1));
    let (f0, f1) = (level(full, BoundaryCondition::decaying(), 0), level(full, BoundaryCondition::decaying(), 1));
    let numerov_note = format!(
        "numerov half line (Dirichlet at 0) n=0 {}, n=1 {}; full line n=0 {}, n=1 {}",
        show(&h0),
        show(&h1),
        show(&f0),
        show(&f1)
    );
    let riccati = ok(&ansatz).map(|s| state.epsilon + s.delta_eps);
    let riccati_row = row("Eq38", paper_e, "Riccati reading eps1 + delta_eps", 1e-8 * tol, "", || riccati);
    rows.push(riccati_row.clone().flagged(format!(
        "{note}; paper 3w/2 + B - lambda^2/w^2 = {paper_e}; Riccati reading w/2 + B - lambda^2/w^2 differs by {:+.10}; {numerov_note}",
        riccati_row.computed_value - paper_e
    )));
    for (label, value) in [("numerov full line ground state (nodeless, as Eq41)", f0), ("numerov half line ground state", h0)] {
        let r = row("Eq38", paper_e, label, 1e-6 * tol, "", || value);
        let diff = r.computed_value - paper_e;
        rows.push(r.flagged(format!("{note}; differs from the printed energy by {diff:+.10}; {numerov_note}")));
    }
    rows
}

fn well_rows(tol: f64) -> Vec<ClaimRecord> {
    let u = UnitsConvention::half_unit();
    let grid = well_grid();
    let (lambda, b) = (0.1, 0.25);
    let note = format!("n=2 lambda={lambda} B={b}");
    let coefficient = (PI * PI / 12.0 - 5.0 / 36.0) / 36.0;
    let mut rows = Vec::new();
    let state = match infinite_well(u, 2, grid) {
        Ok(s) => s,
        Err(e) => return vec![ClaimRecord::compare("Eq43", 9.0, f64::NAN, "catalog", 0.0).flagged(e.to_string())],
    };
    let eq45 = move |r: f64| {
        let sec2 = 1.0 / (3.0 * r).cos().powi(2);
        lambda * sec2 / 4.0 * (PI * PI / 4.0 - r * r) - lambda / 6.0 * (r * (3.0 * r).tan() + 1.0 / 6.0)
    };

    rows.push(row("Eq43", 1.0, "quad of the catalog chi^2", 1e-10 * tol, "n=2", || quad(&state.chi.map(|_, c| c * c))));
    rows.push(row("Eq43", 0.0, "max deviation of catalog chi from Eq43", 1e-12 * tol, "n=2, sign fixed by chi(0) > 0", || {
        Ok(max_dev(&state.chi, |r| (2.0 / PI).sqrt() * (3.0 * r).cos(), &vec![true; grid.n_points]))
    }));
    rows.push(row("Eq44", 0.0, "max deviation of catalog W from Eq44 outside pole windows", 1e-10 * tol, "n=2", || {
        Ok(max_dev(&state.w_super, |r| 3.0 * (3.0 * r).tan(), &clear_of(&state, &[])))
    }));
    rows.push(row("Eq43", 9.0, "numerov eigenvalue with two nodes", 1e-8 * tol, "unperturbed well, n=2", || {
        numerov_eigenvalue(&GridFunction::zeros(grid), &u, &BoundaryCondition::dirichlet(), 2)
    }));
    let first = first_order(&state, &GridFunction::from_fn(grid, move |r| lambda * r + b));
    rows.push(row("Eq44", b, "first_order with dV1 = lambda r + B", 1e-10 * tol, &note, || ok(&first).map(|o| o.delta_eps)));
    rows.push(row("Eq45", 0.0, "max deviation of first-order dW from Eq45 outside pole windows", 1e-6 * tol, &note, || {
        let o = ok(&first)?;
        Ok(max_dev(&o.delta_w, eq45, &clear_of(&state, &[&o.delta_w])))
    }));
    rows.push(row("Eq46", 0.0, "max deviation of dw_from_ks_phi(Eq46) from Eq45 outside pole windows", 1e-5 * tol, &note, || {
        let g = move |r: f64| lambda / 12.0 * (r * r - PI * PI / 4.0);
        let mut phi = GridFunction::from_fn(grid, move |r| g(r) * (3.0 * r).tan() + lambda * r / 36.0);
        for c in [-PI / 6.0, PI / 6.0] {
            phi = phi.with_pole(PoleWindow::new(c, WINDOW_SPACINGS * grid.spacing, 0.0, -g(c) / 3.0))?;
        }
        let dw = dw_from_ks_phi(&phi, &u);
        Ok(max_dev(&dw, eq45, &clear_of(&state, &[&phi, &dw])))
    }));

    let curvature = lambda_curvature(
        &CurvatureProblem {
            v0: GridFunction::zeros(grid),
            dv: GridFunction::from_fn(grid, |r| r),
            units: u,
            bc: BoundaryCondition::dirichlet(),
            node_target: 2,
        },
        DEFAULT_LAMBDA_STEP,
    );
    rows.push(row("Eq47", 0.0, "numerov lambda-curvature c1", 1e-7 * tol, "coefficient of lambda", || ok(&curvature).map(|c| c.c1)));
    rows.push(row("Eq47", coefficient, "numerov lambda-curvature c2", 1e-4 * tol, "coefficient of lambda^2", || ok(&curvature).map(|c| c.c2)));

    let second = PerturbationSeries::new(1.0, vec![GridFunction::from_fn(grid, |r| r)]).and_then(|s| solve_series(&state, &s, 2));
    let engine = row("Eq48", coefficient, "engine finite-part second-order energy", 1e-4 * tol, "", || {
        ok(&second).map(|s| s.orders[1].delta_eps)
    });
    let diagnostic = match &second {
        Ok(s) => match &s.orders[1].energy_finite_part {
            Some(fp) => format!(
                "finite part over window radii h, h/2, h/4: [{:.12}, {:.12}, {:.12}], relative spread {:.3e}, converged {}",
                fp.diagnostic[0], fp.diagnostic[1], fp.diagnostic[2], fp.relative_spread, fp.converged
            ),
            None => "energy integrand had no pole windows".to_string(),
        },
        Err(e) => format!("computation failed: {e}"),
    };
    let diff = engine.computed_value - coefficient;
    rows.push(engine.flagged(format!(
        "coefficient of lambda^2; the integral of chi^2 dW21^2 diverges at the nodes and is read as a Hadamard finite part; {diagnostic}; differs from Eq47 by {diff:+.3e}"
    )));
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_series_of_sqrt() {
        let expected = [1.0, 0.5, -0.125, 0.0625, -5.0 / 128.0];
        for (k, e) in expected.iter().enumerate() {
            assert!((binomial_half(k) - e).abs() < 1e-15);
        }
    }

    #[test]
    fn shape_deviation_ignores_constant_factors() {
        let g = half_line(5.0, 201);
        let f = GridFunction::from_fn(g, |r| 3.0 * (-r).exp());
        assert!(log_shape_dev(&f, |r| (-r).exp(), &vec![true; 201]) < 1e-14);
    }
}
