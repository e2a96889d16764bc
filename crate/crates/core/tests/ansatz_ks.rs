mod common;

use std::time::Instant;

use common::*;
use susy_pert::engine::{compose_wavefunction, dw_from_ks_phi, ks_phi_from_dw, moderating_function, verify_ansatz};
use susy_pert::foundation::{normalize, GridFunction, PoleWindow, UnitsConvention, WINDOW_SPACINGS};

fn overlap(a: &GridFunction, b: &GridFunction) -> f64 {
    let (a, b) = (normalize(a).unwrap(), normalize(b).unwrap());
    susy_pert::foundation::quad(&a.zip_with(&b, |x, y| x * y).unwrap()).unwrap().abs()
}

#[test]
fn oscillator_ansatz_grid() {
    let u = UnitsConvention::oscillator();
    for ell in [0, 1, 2] {
        let state = oscillator(ell);
        for lambda in [0.1f64, 0.21, 0.5] {
            let start = Instant::now();
            let dw = GridFunction::from_fn(state.grid, |r| (u.mass / 2.0).sqrt() * r * ((1.0 + lambda).sqrt() - 1.0));
            let dv = GridFunction::from_fn(state.grid, |r| 0.5 * u.mass * lambda * r * r);
            let sol = verify_ansatz(&state, &dw, &dv).unwrap();
            let expected = (ell as f64 + 1.5) * ((1.0 + lambda).sqrt() - 1.0);
            assert!((sol.delta_eps - expected).abs() < 1e-8, "l={ell} lambda={lambda}: {}", sol.delta_eps);
            assert!(sol.residual_max < 1e-6);
            let b = (1.0 + lambda).sqrt() / 2.0;
            let exact = GridFunction::from_fn(state.grid, |r| r.powi(ell as i32 + 1) * (-b * r * r).exp());
            assert!((overlap(&sol.psi, &exact) - 1.0).abs() < 1e-6);
            assert!(start.elapsed().as_secs_f64() < 1.0);
        }
    }
}

#[test]
fn coulomb_ansatz_shifts_the_charge() {
    let state = coulomb(0);
    let u = state.units;
    for lambda in [1.0, 0.2] {
        let dw = GridFunction::constant(state.grid, -lambda * (u.mass / 8.0).sqrt() * u.charge_sq / u.hbar);
        let sol = verify_ansatz(&state, &dw, &inverse_r(state.grid, lambda * u.charge_sq / 2.0)).unwrap();
        let expected = -0.5 * (lambda * lambda / 4.0 - lambda);
        assert!((sol.delta_eps - expected).abs() < 1e-8, "{lambda}: {}", sol.delta_eps);
        let exact = GridFunction::from_fn(state.grid, |r| r * (-(1.0 - lambda / 2.0) * r).exp());
        assert!((overlap(&sol.psi, &exact) - 1.0).abs() < 1e-6);
    }
}

#[test]
fn linear_oscillator_ansatz() {
    let state = linear_oscillator();
    let (lambda, b) = (0.3, -1.0);
    let grid = state.grid;
    let dw = GridFunction::from_fn(grid, move |r| lambda + 1.0 / r)
        .with_pole(PoleWindow::new(0.0, WINDOW_SPACINGS * grid.spacing, 0.0, 1.0))
        .unwrap();
    let sol = verify_ansatz(&state, &dw, &GridFunction::from_fn(grid, move |r| lambda * r + b)).unwrap();
    assert!(sol.remainder_std < 1e-6, "{}", sol.remainder_std);
    let exact = normalize(&GridFunction::from_fn(grid, |r| (-r * r / 4.0 - lambda * r).exp())).unwrap();
    let dev = sol.psi.values.iter().zip(&exact.values).map(|(a, e)| (a - e).abs()).fold(0.0, f64::max);
    assert!(dev < 1e-8, "{dev}");
}

#[test]
fn ks_round_trip_on_an_analytic_correction() {
    let state = oscillator(0);
    let units = state.units;
    let dw = GridFunction::from_fn(state.grid, |r| 0.3 * r / (1.0 + r * r));
    let back = dw_from_ks_phi(&ks_phi_from_dw(&dw, &units).unwrap(), &units);
    let mask = clear_of(&state, &[&back]);
    assert!(max_dev(&back, |r| 0.3 * r / (1.0 + r * r), &mask) < 1e-6);
}

#[test]
fn zero_correction_gives_unit_phi_and_returns_chi() {
    let state = coulomb(0);
    let phi = moderating_function(&GridFunction::zeros(state.grid), &state.units).unwrap();
    assert!(phi.values.iter().all(|v| (v - 1.0).abs() < 1e-14));
    let psi = compose_wavefunction(&state.chi, &phi).unwrap();
    let dev = psi.values.iter().zip(&state.chi.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(dev < 1e-12, "{dev}");
}

#[test]
fn truncated_well_correction_is_not_an_exact_ansatz() {
    let state = well();
    let lambda = 0.1;
    let dw = GridFunction::from_fn(state.grid, |r| well_dw1(lambda, r));
    let dw = dw.with_pole(PoleWindow::unresolved(-std::f64::consts::PI / 6.0, WINDOW_SPACINGS * state.grid.spacing)).unwrap();
    let dw = dw.with_pole(PoleWindow::unresolved(std::f64::consts::PI / 6.0, WINDOW_SPACINGS * state.grid.spacing)).unwrap();
    let dv = GridFunction::from_fn(state.grid, |r| lambda * r);
    let err = verify_ansatz(&state, &dw, &dv).unwrap_err();
    assert!(matches!(err, susy_pert::Error::AnsatzNotConstant { .. }), "{err}");
}
