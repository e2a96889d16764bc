//! Composite Simpson quadrature, running integrals and Hadamard finite parts.

use serde::{Deserialize, Serialize};

use super::function::{GridFunction, PoleWindow};
use super::stencil::least_squares;
use crate::{Error, Result};

/// Composite Simpson rule over the whole grid.
pub fn quad(f: &GridFunction) -> Result<f64> {
    if !f.poles.is_empty() {
        return Err(Error::PolesPresent(f.poles.len()));
    }
    if let Some(i) = f.values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { r: f.grid.r(i) });
    }
    Ok(simpson(&f.values, f.grid.spacing))
}

pub(crate) fn simpson(v: &[f64], h: f64) -> f64 {
    let n = v.len();
    debug_assert!(n % 2 == 1);
    let mut odd = 0.0;
    let mut even = 0.0;
    for (i, &x) in v.iter().enumerate().take(n - 1).skip(1) {
        if i % 2 == 1 {
            odd += x;
        } else {
            even += x;
        }
    }
    h / 3.0 * (v[0] + v[n - 1] + 4.0 * odd + 2.0 * even)
}

const INTERVAL_STENCIL: usize = 6;

/// Weights of `∫_0^1` over a degree-5 interpolant through the six points at
/// offsets `−lead, …, 5 − lead` (in spacings).
fn interval_weights(lead: usize) -> Vec<f64> {
    let xs: Vec<f64> = (0..INTERVAL_STENCIL).map(|j| j as f64 - lead as f64).collect();
    let rows: Vec<Vec<f64>> = (0..INTERVAL_STENCIL).map(|p| xs.iter().map(|x| x.powi(p as i32)).collect()).collect();
    let moments: Vec<f64> = (0..INTERVAL_STENCIL).map(|p| 1.0 / (p as f64 + 1.0)).collect();
    least_squares(&rows, &moments)
}

/// `∫_{r_0}^{r_i} f` at every grid point, summing interval integrals of local
/// degree-5 interpolants.
pub(crate) fn cumulative_left(v: &[f64], h: f64) -> Vec<f64> {
    let n = v.len();
    let mut c = vec![0.0; n];
    if n < INTERVAL_STENCIL {
        for i in 1..n {
            c[i] = c[i - 1] + 0.5 * h * (v[i - 1] + v[i]);
        }
        return c;
    }
    let weights: Vec<Vec<f64>> = (0..INTERVAL_STENCIL - 1).map(interval_weights).collect();
    for i in 0..n - 1 {
        let start = i.saturating_sub(2).min(n - INTERVAL_STENCIL);
        let w = &weights[i - start];
        let piece: f64 = w.iter().zip(&v[start..start + INTERVAL_STENCIL]).map(|(a, b)| a * b).sum();
        c[i + 1] = c[i] + h * piece;
    }
    c
}

/// `∫_{r_i}^{r_max} f` at every grid point, accumulated from the right end so
/// that small tails keep their relative accuracy.
pub(crate) fn cumulative_right(v: &[f64], h: f64) -> Vec<f64> {
    let mut rev: Vec<f64> = v.to_vec();
    rev.reverse();
    let mut c = cumulative_left(&rev, h);
    c.reverse();
    c
}

/// Finite-part value with its window-radius convergence diagnostic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinitePart {
    pub value: f64,
    /// Values obtained with repair radius `half_width`, `half_width/2`, `half_width/4`.
    pub diagnostic: [f64; 3],
    pub relative_spread: f64,
    pub converged: bool,
}

/// Default relative spread above which a finite part is flagged.
pub const FINITE_PART_SPREAD: f64 = 1e-6;

fn analytic_part(p: &PoleWindow, a: f64, b: f64, tiny: f64) -> f64 {
    let at = |x: f64| {
        if (x - p.center).abs() < tiny {
            0.0
        } else {
            p.singular_antiderivative(x)
        }
    };
    at(b) - at(a)
}

/// Hadamard finite part of `∫ f` over the grid.
///
/// The regular part `f − Σ singular` is integrated by Simpson after points
/// near each pole are rebuilt from their neighbourhood; the singular parts
/// are integrated in closed form. The same sum with repair radii
/// `w, w/2, w/4` forms the diagnostic.
pub fn finite_part_quad(f: &GridFunction) -> Result<FinitePart> {
    finite_part_quad_with(f, FINITE_PART_SPREAD)
}

pub fn finite_part_quad_with(f: &GridFunction, spread_limit: f64) -> Result<FinitePart> {
    if f.poles.is_empty() {
        let v = quad(f)?;
        return Ok(FinitePart { value: v, diagnostic: [v; 3], relative_spread: 0.0, converged: true });
    }
    if let Some(p) = f.poles.iter().find(|p| !p.is_resolved()) {
        return Err(Error::UnresolvedPole(p.center));
    }
    let (a, b) = (f.grid.r_min, f.grid.r_max);
    let tiny = 1e-9 * f.grid.spacing;
    let singular: f64 = f.poles.iter().map(|p| analytic_part(p, a, b, tiny)).sum();
    let w = f.poles.iter().map(|p| p.half_width).fold(0.0, f64::max);
    let mut diagnostic = [0.0; 3];
    for (k, radius) in [w, w / 2.0, w / 4.0].into_iter().enumerate() {
        let g = f.regular_values_with_radius(radius);
        if let Some(i) = g.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { r: f.grid.r(i) });
        }
        diagnostic[k] = simpson(&g, f.grid.spacing) + singular;
    }
    let value = diagnostic[2];
    let lo = diagnostic.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = diagnostic.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let scale = diagnostic.iter().map(|v| v.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let relative_spread = (hi - lo) / scale;
    Ok(FinitePart { value, diagnostic, relative_spread, converged: relative_spread <= spread_limit })
}

/// Running finite-part integrals `FP∫_{r_min}^{r_i} f` (left) and
/// `FP∫_{r_i}^{r_max} f` (right). Values at a pole center are not finite.
pub(crate) fn cumulative_finite_part(f: &GridFunction) -> Result<(Vec<f64>, Vec<f64>)> {
    if let Some(p) = f.poles.iter().find(|p| !p.is_resolved()) {
        return Err(Error::UnresolvedPole(p.center));
    }
    let h = f.grid.spacing;
    let g = if f.poles.is_empty() { f.values.clone() } else { f.regular_values() };
    if let Some(i) = g.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { r: f.grid.r(i) });
    }
    let mut left = cumulative_left(&g, h);
    let mut right = cumulative_right(&g, h);
    let (a, b) = (f.grid.r_min, f.grid.r_max);
    let tiny = 1e-9 * h;
    for p in &f.poles {
        for i in 0..g.len() {
            let r = f.grid.r(i);
            left[i] += analytic_part(p, a, r, tiny);
            right[i] += analytic_part(p, r, b, tiny);
            if (r - p.center).abs() < tiny {
                left[i] = f64::NAN;
                right[i] = f64::NAN;
            }
        }
    }
    Ok((left, right))
}
