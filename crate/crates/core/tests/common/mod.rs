#![allow(dead_code)]

use std::f64::consts::PI;

use susy_pert::catalog::{coulomb_ground, infinite_well, oscillator_1d_n1, radial_oscillator, UnperturbedState};
use susy_pert::foundation::{DomainKind, GridFunction, PoleWindow, RadialGrid, UnitsConvention, WINDOW_SPACINGS};

pub fn half_line(r_max: f64, n: usize) -> RadialGrid {
    RadialGrid::uniform(DomainKind::HalfLine, 0.0, r_max, n).unwrap()
}

pub fn well_grid() -> RadialGrid {
    RadialGrid::uniform(DomainKind::Interval, -PI / 2.0, PI / 2.0, 2001).unwrap()
}

pub fn oscillator(ell: u32) -> UnperturbedState {
    radial_oscillator(UnitsConvention::oscillator(), 1.0, ell, half_line(10.0, 2001)).unwrap()
}

pub fn coulomb(ell: u32) -> UnperturbedState {
    coulomb_ground(UnitsConvention::atomic(), ell, half_line(40.0, 4001)).unwrap()
}

pub fn linear_oscillator() -> UnperturbedState {
    oscillator_1d_n1(UnitsConvention::half_unit(), 1.0, half_line(12.0, 2401)).unwrap()
}

pub fn well() -> UnperturbedState {
    infinite_well(UnitsConvention::half_unit(), 2, well_grid()).unwrap()
}

/// `c/r` with its window at the origin.
pub fn inverse_r(grid: RadialGrid, c: f64) -> GridFunction {
    GridFunction::from_fn(grid, |r| c / r)
        .with_pole(PoleWindow::new(0.0, WINDOW_SPACINGS * grid.spacing, 0.0, c))
        .unwrap()
}

/// Closed-form first-order superpotential correction of the n=2 well under `λr`.
pub fn well_dw1(lambda: f64, r: f64) -> f64 {
    let sec2 = 1.0 / (3.0 * r).cos().powi(2);
    lambda * sec2 / 4.0 * (PI * PI / 4.0 - r * r) - lambda / 6.0 * (r * (3.0 * r).tan() + 1.0 / 6.0)
}

/// Interior of `state` outside every window of `fs`.
pub fn clear_of(state: &UnperturbedState, fs: &[&GridFunction]) -> Vec<bool> {
    let mut mask = state.interior_mask();
    for (i, m) in mask.iter_mut().enumerate() {
        *m &= fs.iter().all(|f| !f.is_excluded(i) && f.values[i].is_finite());
    }
    mask
}

pub fn max_dev(f: &GridFunction, exact: impl Fn(f64) -> f64, mask: &[bool]) -> f64 {
    (0..f.len()).filter(|&i| mask[i]).map(|i| (f.values[i] - exact(f.grid.r(i))).abs()).fold(0.0, f64::max)
}

/// `(ℓ+3/2)ħw` times the k-th binomial coefficient of `√(1+λ)`.
pub fn sqrt_series(k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (0.5 - j as f64) / (j as f64 + 1.0))
}
