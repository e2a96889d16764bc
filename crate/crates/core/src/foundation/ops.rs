use super::function::{GridFunction, PoleWindow};
use super::grid::DomainKind;
use super::laurent::laurent_fit;
use super::quadrature::quad;
use super::stencil::fornberg_weights;
use super::units::UnitsConvention;
use crate::{Error, Result};

const STENCIL: usize = 7;

/// First derivative on the grid: seven-point central differences inside,
/// seven-point one-sided stencils in the three points next to each end.
///
/// Resolved singular parts are subtracted before differencing and their
/// derivatives added back in closed form, so accuracy holds up to the edge of
/// each window.
pub fn derivative(f: &GridFunction) -> GridFunction {
    let grid = f.grid;
    let n = grid.n_points;
    let h = grid.spacing;
    let g = if f.poles.is_empty() && f.values.iter().all(|v| v.is_finite()) {
        f.values.clone()
    } else {
        f.regular_values()
    };
    let offsets: Vec<f64> = (0..STENCIL).map(|k| k as f64).collect();
    let half = STENCIL / 2;
    let weights: Vec<Vec<f64>> =
        (0..STENCIL).map(|x0| fornberg_weights(x0 as f64, &offsets, 1)[1].clone()).collect();
    let mut d = vec![0.0; n];
    for (i, di) in d.iter_mut().enumerate() {
        let (start, pos) = if i < half {
            (0, i)
        } else if i + half >= n {
            (n - STENCIL, i - (n - STENCIL))
        } else {
            (i - half, half)
        };
        *di = weights[pos].iter().zip(&g[start..start + STENCIL]).map(|(w, v)| w * v).sum::<f64>() / h;
    }
    let tiny = 1e-9 * h;
    for p in f.poles.iter().filter(|p| p.is_resolved()) {
        for (i, di) in d.iter_mut().enumerate() {
            let r = grid.r(i);
            *di = if (r - p.center).abs() < tiny { f64::NAN } else { *di + p.singular_derivative(r) };
        }
    }
    let poles = f
        .poles
        .iter()
        .map(|p| {
            let simple = p.is_resolved() && p.c_minus2.abs() <= 1e-8 * p.c_minus1.abs() * p.half_width;
            if simple {
                PoleWindow::new(p.center, p.half_width, -p.c_minus1, 0.0)
            } else {
                PoleWindow::unresolved(p.center, p.half_width)
            }
        })
        .collect();
    GridFunction { grid, values: d, poles }
}

/// Locates the zeros of `chi`: interior sign changes (by linear interpolation)
/// plus endpoints where it vanishes.
pub fn find_nodes(chi: &GridFunction) -> Vec<f64> {
    let grid = &chi.grid;
    let n = grid.n_points;
    let scale = chi.values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let vanishes = |v: f64| v.abs() <= 1e-12 * scale;
    let mut nodes = Vec::new();
    // an endpoint zero, as opposed to a decayed tail, is small against its neighbour too
    let endpoint_zero = |v: f64, next: f64| vanishes(v) && v.abs() <= 1e-6 * next.abs();
    if endpoint_zero(chi.values[0], chi.values[1]) {
        nodes.push(grid.r_min);
    }
    let mut last_sign = 0.0;
    let mut last_idx = 0;
    for i in 0..n {
        let v = chi.values[i];
        if vanishes(v) {
            continue;
        }
        let s = v.signum();
        if last_sign != 0.0 && s != last_sign && i > 0 {
            let (a, b) = (last_idx, i);
            let (va, vb) = (chi.values[a], chi.values[b]);
            let (ra, rb) = (grid.r(a), grid.r(b));
            let node = if b == a + 1 {
                ra - va * (rb - ra) / (vb - va)
            } else {
                0.5 * (ra + rb)
            };
            nodes.push(node);
        }
        last_sign = s;
        last_idx = i;
    }
    if endpoint_zero(chi.values[n - 1], chi.values[n - 2]) {
        nodes.push(grid.r_max);
    }
    nodes
}

/// Number of sign changes of `chi` strictly inside the grid.
pub fn interior_sign_changes(chi: &GridFunction) -> usize {
    let nodes = find_nodes(chi);
    nodes
        .iter()
        .filter(|&&r| r > chi.grid.r_min + 0.5 * chi.grid.spacing && r < chi.grid.r_max - 0.5 * chi.grid.spacing)
        .count()
}

/// `W = −κ χ′/χ`, with a fitted window registered at every zero of `chi`.
pub fn log_derivative_superpotential(chi: &GridFunction, units: &UnitsConvention) -> Result<GridFunction> {
    let kappa = units.kappa();
    let grid = chi.grid;
    let scale = chi.values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::DegenerateFunction("chi vanishes identically".into()));
    }
    // a run of vanishing samples longer than a stencil means chi is zero on a subinterval
    let mut run = 0;
    for v in &chi.values {
        run = if v.abs() <= 1e-300 { run + 1 } else { 0 };
        if run > STENCIL {
            return Err(Error::DegenerateFunction("chi vanishes on a subinterval".into()));
        }
    }
    let dchi = derivative(&chi.without_poles());
    let values: Vec<f64> = chi.values.iter().zip(&dchi.values).map(|(c, d)| -kappa * d / c).collect();
    let mut w = GridFunction::from_values(grid, values)?;
    for node in find_nodes(chi) {
        let pole = laurent_fit(&w, node).unwrap_or_else(|_| PoleWindow::unresolved(node, w.default_half_width()));
        w.add_pole(pole)?;
    }
    Ok(w)
}

/// Rescales `psi` so that `∫ψ² = 1`, keeping its sign.
pub fn normalize(psi: &GridFunction) -> Result<GridFunction> {
    let sq = psi.without_poles().map(|_, v| v * v);
    let norm2 = quad(&sq).map_err(|_| Error::NonNormalizable("non-finite samples".into()))?;
    if !(norm2.is_finite() && norm2 > 0.0) {
        return Err(Error::NonNormalizable(format!("norm² = {norm2}")));
    }
    if matches!(psi.grid.domain_kind, DomainKind::HalfLine | DomainKind::FullLine) {
        // the truncation point must carry a negligible share of the weight
        let n = psi.len();
        let edge = [psi.values[n - 1], if psi.grid.domain_kind == DomainKind::FullLine { psi.values[0] } else { 0.0 }];
        let peak = psi.values.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if edge.iter().any(|e| e.abs() > 1e-6 * peak) {
            return Err(Error::NonNormalizable("function does not decay at the truncated boundary".into()));
        }
    }
    let c = 1.0 / norm2.sqrt();
    Ok(psi.scale(c))
}
