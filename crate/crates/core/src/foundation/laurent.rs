//! Least-squares extraction of double/simple pole coefficients.

use super::function::{GridFunction, PoleWindow, WINDOW_SPACINGS};
use super::stencil::least_squares;
use crate::{Error, Result};

/// Inner radius of the fitting annulus, in grid spacings.
pub const ANNULUS_INNER: f64 = 3.0;
/// Outer radius of the fitting annulus, in grid spacings.
pub const ANNULUS_OUTER: f64 = 10.0;
/// Relative RMS misfit above which the singularity is rejected.
pub const FIT_MISFIT: f64 = 1e-6;
/// Singular part smaller than this fraction of the local function size means no pole.
pub const POLE_SIGNIFICANCE: f64 = 1e-7;

/// Fits `c₋₂/(r−c)² + c₋₁/(r−c) + a₀ + a₁(r−c) + a₂(r−c)² + a₃(r−c)³` to the
/// samples at distance 3..10 spacings from `center` and returns the window.
pub fn laurent_fit(f: &GridFunction, center: f64) -> Result<PoleWindow> {
    let grid = &f.grid;
    let h = grid.spacing;
    let scale = ANNULUS_OUTER * h;
    if is_smooth_at(f, center) {
        return Err(Error::NoSingularity { center });
    }
    let (mut rows, mut ys) = (Vec::new(), Vec::new());
    for (i, &v) in f.values.iter().enumerate() {
        let d = grid.r(i) - center;
        let dist = d.abs() / h;
        if dist < ANNULUS_INNER - 1e-9 || dist > ANNULUS_OUTER + 1e-9 || !v.is_finite() {
            continue;
        }
        let u = d / scale;
        rows.push(vec![1.0 / (u * u), 1.0 / u, 1.0, u, u * u, u * u * u]);
        ys.push(v);
    }
    if rows.len() < 8 {
        return Err(Error::NotAPole { center, reason: "too few samples in the fitting annulus".into() });
    }
    let coef = least_squares(&rows, &ys);
    let size = ys.iter().map(|y| y.abs()).fold(0.0, f64::max);
    let misfit = (rows
        .iter()
        .zip(&ys)
        .map(|(row, y)| {
            let model: f64 = row.iter().zip(&coef).map(|(a, c)| a * c).sum();
            (model - y).powi(2)
        })
        .sum::<f64>()
        / ys.len() as f64)
        .sqrt();
    if size == 0.0 {
        return Err(Error::NoSingularity { center });
    }
    if misfit > FIT_MISFIT * size {
        return Err(Error::NotAPole {
            center,
            reason: format!("not a pole of order <= 2 (relative misfit {:.3e})", misfit / size),
        });
    }
    let c_minus2 = coef[0] * scale * scale;
    let c_minus1 = coef[1] * scale;
    let d_in = ANNULUS_INNER * h;
    let singular = c_minus2.abs() / (d_in * d_in) + c_minus1.abs() / d_in;
    if singular < POLE_SIGNIFICANCE * size {
        return Err(Error::NoSingularity { center });
    }
    Ok(PoleWindow::new(center, WINDOW_SPACINGS * h, c_minus2, c_minus1))
}

/// Whether the samples within the outer radius are finite and follow a
/// degree-6 polynomial, so there is nothing singular to fit.
fn is_smooth_at(f: &GridFunction, center: f64) -> bool {
    let grid = &f.grid;
    let scale = ANNULUS_OUTER * grid.spacing;
    let (mut rows, mut ys) = (Vec::new(), Vec::new());
    for (i, &v) in f.values.iter().enumerate() {
        let u = (grid.r(i) - center) / scale;
        if u.abs() > 1.0 + 1e-9 {
            continue;
        }
        if !v.is_finite() {
            return false;
        }
        rows.push((0..7).map(|k| u.powi(k)).collect::<Vec<f64>>());
        ys.push(v);
    }
    if rows.len() < 10 {
        return false;
    }
    let coef = least_squares(&rows, &ys);
    let size = ys.iter().map(|y| y.abs()).fold(0.0, f64::max);
    let worst = rows
        .iter()
        .zip(&ys)
        .map(|(row, y)| (row.iter().zip(&coef).map(|(a, c)| a * c).sum::<f64>() - y).abs())
        .fold(0.0, f64::max);
    worst <= FIT_MISFIT * size
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::foundation::grid::{DomainKind, RadialGrid};
    use std::f64::consts::PI;

    #[test]
    fn synthetic_double_pole() {
        let g = RadialGrid::uniform(DomainKind::Interval, 0.0, 2.0, 2001).unwrap();
        let f = GridFunction::from_fn(g, |r| 5.0 / ((r - 1.0) * (r - 1.0)));
        let p = laurent_fit(&f, 1.0).unwrap();
        assert!((p.c_minus2 - 5.0).abs() < 1e-4);
        assert!(p.c_minus1.abs() < 1e-4);
        assert!((p.half_width - 10.0 * g.spacing).abs() < 1e-15);
    }

    #[test]
    fn smooth_function_has_no_pole() {
        let g = RadialGrid::uniform(DomainKind::Interval, 0.0, 2.0, 2001).unwrap();
        let f = GridFunction::from_fn(g, |r| (-r * r).exp());
        assert!(matches!(laurent_fit(&f, 0.5), Err(Error::NoSingularity { .. })));
    }

    #[test]
    fn triple_pole_is_rejected() {
        let g = RadialGrid::uniform(DomainKind::Interval, 0.0, 2.0, 2001).unwrap();
        let f = GridFunction::from_fn(g, |r| (r - 1.0).powi(-3));
        assert!(matches!(laurent_fit(&f, 1.0), Err(Error::NotAPole { .. })));
    }

    #[test]
    fn one_sided_fit_at_endpoint() {
        let g = RadialGrid::uniform(DomainKind::HalfLine, 0.0, 5.0, 2001).unwrap();
        let f = GridFunction::from_fn(g, |r| r / 2.0 - 1.0 / r);
        let p = laurent_fit(&f, 0.0).unwrap();
        assert!((p.c_minus1 + 1.0).abs() < 1e-8, "{p:?}");
        assert!(p.c_minus2.abs() < 1e-10);
    }

    #[test]
    fn tangent_pole_coefficients() {
        let g = RadialGrid::uniform(DomainKind::Interval, -PI / 2.0, PI / 2.0, 2001).unwrap();
        let f = GridFunction::from_fn(g, |r| 3.0 * (3.0 * r).tan());
        let p = laurent_fit(&f, PI / 6.0).unwrap();
        assert!((p.c_minus1 + 1.0).abs() < 1e-8, "{p:?}");
        assert!(p.c_minus2.abs() < 1e-10);
    }
}
