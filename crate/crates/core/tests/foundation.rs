mod common;

use common::*;
use proptest::prelude::*;
use susy_pert::foundation::{derivative, log_derivative_superpotential, normalize, quad, DomainKind, GridFunction, RadialGrid, UnitsConvention};

#[test]
fn catalog_states_are_normalized() {
    for state in [coulomb(0), oscillator(0), oscillator(2), linear_oscillator(), well()] {
        let norm = quad(&state.chi.map(|_, c| c * c)).unwrap();
        assert!((norm - 1.0).abs() < 1e-8, "{:?}: {norm}", state.kind);
    }
}

#[test]
fn quadrature_converges_at_fourth_order() {
    let err = |n: usize| {
        let g = RadialGrid::uniform(DomainKind::Interval, 0.0, 2.0, n).unwrap();
        (quad(&GridFunction::from_fn(g, |x| (3.0 * x).cos() * x.exp())).unwrap() - exact()).abs()
    };
    fn exact() -> f64 {
        let f = |x: f64| x.exp() * ((3.0 * x).cos() + 3.0 * (3.0 * x).sin()) / 10.0;
        f(2.0) - f(0.0)
    }
    let (e1, e2) = (err(201), err(401));
    assert!(e1 / e2 >= 8.0 || e2 < 1e-13, "{e1:e} {e2:e}");
}

#[test]
fn superpotential_of_the_oscillator_ground_state() {
    let state = oscillator(0);
    let w = log_derivative_superpotential(&state.chi, &UnitsConvention::oscillator()).unwrap();
    let kappa = UnitsConvention::oscillator().kappa();
    let mask = clear_of(&state, &[&w]);
    let dev = max_dev(&w, |r| kappa * (r - 1.0 / r), &mask);
    assert!(dev < 1e-6, "{dev}");
}

#[test]
fn derivative_of_a_smooth_function() {
    let g = RadialGrid::uniform(DomainKind::Interval, 0.0, 3.0, 601).unwrap();
    let d = derivative(&GridFunction::from_fn(g, |x| x.sin()));
    let dev = (0..g.n_points).map(|i| (d.values[i] - g.r(i).cos()).abs()).fold(0.0, f64::max);
    assert!(dev < 1e-8, "{dev}");
}

fn gaussian_grid() -> RadialGrid {
    RadialGrid::uniform(DomainKind::FullLine, -12.0, 12.0, 2401).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn normalize_is_idempotent_and_scale_invariant(width in 0.5f64..1.2, shift in -2.0f64..2.0, scale in 1e-3f64..1e3) {
        let g = gaussian_grid();
        let f = GridFunction::from_fn(g, |x| (-(x - shift).powi(2) / (2.0 * width * width)).exp() * (1.0 + 0.3 * x));
        let once = normalize(&f).unwrap();
        let twice = normalize(&once).unwrap();
        let scaled = normalize(&f.scale(scale)).unwrap();
        for i in 0..g.n_points {
            prop_assert!((once.values[i] - twice.values[i]).abs() < 1e-12);
            prop_assert!((once.values[i] - scaled.values[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn log_derivative_round_trips(a in 0.3f64..1.5, b in -0.5f64..0.5) {
        let g = gaussian_grid();
        let units = UnitsConvention::half_unit();
        let chi = GridFunction::from_fn(g, |x| (-a * x * x / 2.0 + b * x).exp());
        let w = log_derivative_superpotential(&chi, &units).unwrap();
        let kappa = units.kappa();
        let mask: Vec<bool> = (0..g.n_points).map(|i| g.r(i).abs() < 6.0).collect();
        let dev = (0..g.n_points).filter(|&i| mask[i]).map(|i| (w.values[i] - kappa * (a * g.r(i) - b)).abs()).fold(0.0, f64::max);
        prop_assert!(dev < 1e-6, "{}", dev);
    }

    #[test]
    fn quadrature_gains_fourth_order_per_halving(k in 1.0f64..4.0) {
        let err = |n: usize| {
            let g = RadialGrid::uniform(DomainKind::Interval, 0.0, 1.0, n).unwrap();
            (quad(&GridFunction::from_fn(g, |x| (k * x).sin())).unwrap() - (1.0 - k.cos()) / k).abs()
        };
        let (e1, e2) = (err(201), err(401));
        prop_assert!(e1 / e2 >= 8.0 || e2 < 1e-14, "{:e} {:e}", e1, e2);
    }
}
