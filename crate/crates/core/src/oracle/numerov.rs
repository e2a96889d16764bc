use serde::{Deserialize, Serialize};

use crate::foundation::{interpolate_samples, normalize, GridFunction, UnitsConvention};
use crate::{Error, Result};

/// Behaviour imposed at one end of the grid. Both kinds set `ψ = 0` at the
/// grid point; `Decaying` additionally asserts that the truncated tail is
/// negligible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndCondition {
    DirichletZero,
    Decaying,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCondition {
    pub left: EndCondition,
    pub right: EndCondition,
    /// Where the outward and inward solutions meet; chosen automatically when `None`.
    pub matching_point: Option<f64>,
}

impl BoundaryCondition {
    pub fn dirichlet() -> Self {
        Self { left: EndCondition::DirichletZero, right: EndCondition::DirichletZero, matching_point: None }
    }

    /// Regular at a radial origin, decaying outward.
    pub fn radial() -> Self {
        Self { left: EndCondition::DirichletZero, right: EndCondition::Decaying, matching_point: None }
    }

    pub fn decaying() -> Self {
        Self { left: EndCondition::Decaying, right: EndCondition::Decaying, matching_point: None }
    }
}

const RESCALE: f64 = 1e200;
const MATCH_MARGIN: usize = 5;
const MAX_ITER: usize = 200;

/// `u″ = f u` with `f = 2m(V − E)/ħ²`, plus what is needed to start the
/// outward solution at a singular origin.
struct Problem {
    f0: Vec<f64>,
    scale: f64,
    h: f64,
    /// Frobenius data `(s, c₋₁, v₀)` when `V` has a resolved window at the left end.
    origin: Option<(f64, f64, f64)>,
}

impl Problem {
    fn new(v: &GridFunction, units: &UnitsConvention) -> Result<Self> {
        let grid = v.grid;
        let scale = 2.0 * units.mass / (units.hbar * units.hbar);
        let origin_pole = v.poles.iter().find(|p| (p.center - grid.r_min).abs() < 1e-9 * grid.spacing);
        let origin = match origin_pole {
            Some(p) if p.is_resolved() => {
                let s = 0.5 * (1.0 + (1.0 + 4.0 * scale * p.c_minus2).sqrt());
                if !s.is_finite() {
                    return Err(Error::InvalidPole("attractive 1/r² too strong for a regular solution".into()));
                }
                Some((s, p.c_minus1, v.regular_values()[0]))
            }
            Some(p) => return Err(Error::UnresolvedPole(p.center)),
            None => None,
        };
        if let Some(p) = v.poles.iter().find(|p| (p.center - grid.r_min).abs() >= 1e-9 * grid.spacing) {
            return Err(Error::InvalidPole(format!("shooting needs a potential regular away from the origin, window at {}", p.center)));
        }
        let start = usize::from(origin.is_some());
        if let Some(i) = (start..v.len()).find(|&i| !v.values[i].is_finite()) {
            return Err(Error::NonFinite { r: grid.r(i) });
        }
        let mut f0: Vec<f64> = v.values.iter().map(|x| scale * x).collect();
        if origin.is_some() {
            f0[0] = f64::NAN;
        }
        Ok(Self { f0, scale, h: grid.spacing, origin })
    }

    fn n(&self) -> usize {
        self.f0.len()
    }

    fn f(&self, e: f64, i: usize) -> f64 {
        self.f0[i] - self.scale * e
    }

    /// Outward solution on `0..=last`, rescaled whenever it grows past `RESCALE`.
    fn outward(&self, e: f64, last: usize) -> Vec<f64> {
        let h2 = self.h * self.h;
        let mut u = vec![0.0; last + 1];
        if last == 0 {
            return u;
        }
        // (f·u) at the first point, needed by the first step
        let (u1, fu0) = match self.origin {
            Some((s, cm1, v0)) => {
                let a1 = 0.5 * self.scale * cm1 / s;
                let a2 = self.scale * (cm1 * a1 + v0 - e) / (4.0 * s + 2.0);
                let h = self.h;
                let u1 = h.powf(s) * (1.0 + a1 * h + a2 * h * h);
                let second = if (s - 1.0).abs() < 1e-12 {
                    2.0 * a1
                } else if (s - 2.0).abs() < 1e-12 {
                    2.0
                } else {
                    0.0
                };
                (u1, second)
            }
            None => (self.h, 0.0),
        };
        u[1] = u1;
        let y0 = -h2 * fu0 / 12.0;
        let mut y = u1 * (1.0 - h2 * self.f(e, 1) / 12.0);
        let mut z = y - y0;
        for i in 1..last {
            z += h2 * self.f(e, i) * u[i];
            y += z;
            u[i + 1] = y / (1.0 - h2 * self.f(e, i + 1) / 12.0);
            if u[i + 1].abs() > RESCALE {
                u[..=i + 1].iter_mut().for_each(|x| *x /= RESCALE);
                y /= RESCALE;
                z /= RESCALE;
            }
        }
        u
    }

    /// Inward solution on `first..n`, zero at the right end.
    fn inward(&self, e: f64, first: usize) -> Vec<f64> {
        let n = self.n();
        let h2 = self.h * self.h;
        let mut u = vec![0.0; n];
        u[n - 2] = self.h;
        let mut y = u[n - 2] * (1.0 - h2 * self.f(e, n - 2) / 12.0);
        let mut z = y;
        for i in (first + 1..n - 1).rev() {
            z += h2 * self.f(e, i) * u[i];
            y += z;
            u[i - 1] = y / (1.0 - h2 * self.f(e, i - 1) / 12.0);
            if u[i - 1].abs() > RESCALE {
                u[i - 1..].iter_mut().for_each(|x| *x /= RESCALE);
                y /= RESCALE;
                z /= RESCALE;
            }
        }
        u
    }

    /// Eigenvalues of the truncated problem below `e`, from the zeros of
    /// the outward solution.
    fn count_below(&self, e: f64) -> usize {
        let u = self.outward(e, self.n() - 1);
        sign_changes(&u[1..])
    }

    /// Scaled Wronskian of the outward and inward solutions at `m`.
    fn discriminant(&self, e: f64, m: usize) -> f64 {
        let out = self.outward(e, m + 1);
        let inw = self.inward(e, m);
        let so = out.iter().map(|x| x.abs()).fold(0.0, f64::max);
        let si = inw.iter().map(|x| x.abs()).fold(0.0, f64::max);
        (out[m] * inw[m + 1] - out[m + 1] * inw[m]) / (so * si)
    }

    fn matching_index(&self, v: &GridFunction, e: f64, bc: &BoundaryCondition) -> usize {
        let n = self.n();
        let idx = match bc.matching_point {
            Some(r) => v.grid.nearest_index(r),
            None => {
                let allowed = |i: usize| v.values[i].is_finite() && v.values[i] < e;
                match (0..n).rev().find(|&i| allowed(i)) {
                    Some(i) if i + 1 < n => i,
                    _ => n / 2,
                }
            }
        };
        idx.clamp(MATCH_MARGIN, n - 1 - MATCH_MARGIN)
    }
}

fn sign_changes(u: &[f64]) -> usize {
    let mut count = 0;
    let mut last = 0.0;
    for &x in u {
        if x != 0.0 {
            if last != 0.0 && (x > 0.0) != (last > 0.0) {
                count += 1;
            }
            last = x;
        }
    }
    count
}

/// Interior sign changes of a sampled eigenfunction.
pub fn count_nodes(psi: &GridFunction) -> usize {
    let n = psi.len();
    sign_changes(&psi.values[1..n - 1])
}

/// Energy of the eigenstate with `node_target` interior nodes of
/// `−(ħ²/2m)ψ″ + Vψ = Eψ`, with `ψ = 0` at both grid ends.
///
/// The level is bracketed by Sturm counting of the outward solution and then
/// refined on the matching Wronskian by bisection followed by a safeguarded
/// secant iteration. The solve is repeated on the grid with midpoints added
/// (potential interpolated there) and the two levels Richardson-combined,
/// which removes the `h⁴` term of the Numerov eigenvalue error.
pub fn numerov_eigenvalue(v: &GridFunction, units: &UnitsConvention, bc: &BoundaryCondition, node_target: usize) -> Result<f64> {
    let coarse = numerov_level(v, units, bc, node_target)?;
    let fine = numerov_level(&refined(v)?, units, bc, node_target)?;
    Ok(fine + (fine - coarse) / 15.0)
}

/// `v` on the grid with every interval halved.
fn refined(v: &GridFunction) -> Result<GridFunction> {
    let grid = v.grid.with_points(2 * v.grid.n_points - 1)?;
    let regular = v.regular_values();
    let values = (0..grid.n_points)
        .map(|j| {
            if j % 2 == 0 {
                v.values[j / 2]
            } else {
                let r = grid.r(j);
                interpolate_samples(&v.grid, &regular, r) + v.singular_part(r)
            }
        })
        .collect();
    GridFunction::from_values(grid, values)?.with_poles(&v.poles)
}

/// Single-grid Numerov level.
fn numerov_level(v: &GridFunction, units: &UnitsConvention, bc: &BoundaryCondition, node_target: usize) -> Result<f64> {
    let problem = Problem::new(v, units)?;
    let (lo, hi) = bracket(&problem, v, node_target)?;
    let m = problem.matching_index(v, 0.5 * (lo + hi), bc);
    let e = refine(&problem, m, lo, hi)?;
    let psi = numerov_wavefunction(v, units, e, bc)?;
    let found = count_nodes(&psi);
    if found != node_target {
        return Err(Error::NodeMismatch { expected: node_target, found });
    }
    Ok(e)
}

fn bracket(problem: &Problem, v: &GridFunction, target: usize) -> Result<(f64, f64)> {
    let start = usize::from(problem.origin.is_some());
    let vmin = v.values[start..].iter().cloned().fold(f64::INFINITY, f64::min);
    let vmax = v.values[start..].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut lo = vmin;
    if problem.count_below(lo) > target {
        return Err(Error::NotBracketed(format!("{} levels lie below the potential minimum", problem.count_below(lo))));
    }
    let mut step = (vmax - vmin).abs().max(1.0) * 1e-2;
    let mut hi = lo + step;
    let mut iter = 0;
    while problem.count_below(hi) <= target {
        lo = hi;
        step *= 2.0;
        hi += step;
        iter += 1;
        if iter > MAX_ITER || !hi.is_finite() {
            return Err(Error::NotBracketed(format!("no level with {target} nodes found")));
        }
    }
    for _ in 0..MAX_ITER {
        let (below_lo, below_hi) = (problem.count_below(lo), problem.count_below(hi));
        if below_lo == target && below_hi == target + 1 {
            return Ok((lo, hi));
        }
        let mid = 0.5 * (lo + hi);
        if problem.count_below(mid) <= target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi.abs().max(1.0) {
            break;
        }
    }
    Err(Error::NotBracketed(format!("could not isolate the level with {target} nodes")))
}

fn refine(problem: &Problem, m: usize, mut lo: f64, mut hi: f64) -> Result<f64> {
    let mut d_lo = problem.discriminant(lo, m);
    let mut d_hi = problem.discriminant(hi, m);
    if d_lo == 0.0 {
        return Ok(lo);
    }
    if d_hi == 0.0 {
        return Ok(hi);
    }
    if (d_lo > 0.0) == (d_hi > 0.0) {
        return Err(Error::NotBracketed("matching discriminant has no sign change".into()));
    }
    let tol = 1e-14 * lo.abs().max(hi.abs()).max(1.0);
    // bisection to a narrow bracket, then Illinois-style secant steps inside it
    for _ in 0..20 {
        let mid = 0.5 * (lo + hi);
        let d = problem.discriminant(mid, m);
        if (d > 0.0) == (d_lo > 0.0) {
            lo = mid;
            d_lo = d;
        } else {
            hi = mid;
            d_hi = d;
        }
    }
    let mut side = 0;
    for _ in 0..MAX_ITER {
        if hi - lo <= tol {
            return Ok(0.5 * (lo + hi));
        }
        let e = (lo * d_hi - hi * d_lo) / (d_hi - d_lo);
        let e = if e > lo && e < hi { e } else { 0.5 * (lo + hi) };
        let d = problem.discriminant(e, m);
        if d == 0.0 {
            return Ok(e);
        }
        if (d > 0.0) == (d_lo > 0.0) {
            lo = e;
            d_lo = d;
            if side == -1 {
                d_hi *= 0.5;
            }
            side = -1;
        } else {
            hi = e;
            d_hi = d;
            if side == 1 {
                d_lo *= 0.5;
            }
            side = 1;
        }
    }
    Err(Error::NoConvergence(format!("secant refinement stalled in [{lo}, {hi}]")))
}

/// Normalised eigenfunction at energy `e`, joining the outward and inward
/// solutions at the matching point.
pub fn numerov_wavefunction(v: &GridFunction, units: &UnitsConvention, e: f64, bc: &BoundaryCondition) -> Result<GridFunction> {
    let problem = Problem::new(v, units)?;
    let n = problem.n();
    let m = problem.matching_index(v, e, bc);
    let out = problem.outward(e, m + 1);
    let mut inw = problem.inward(e, m);
    let k = if out[m].abs() >= out[m + 1].abs() { m } else { m + 1 };
    if inw[k] == 0.0 {
        return Err(Error::DivergentTail(format!("inward solution vanishes at the matching point for E = {e}")));
    }
    let ratio = out[k] / inw[k];
    inw.iter_mut().for_each(|x| *x *= ratio);
    let mismatch = (out[m] * inw[m + 1] - out[m + 1] * inw[m]).abs();
    let size = out.iter().chain(&inw[m..]).map(|x| x.abs()).fold(0.0, f64::max);
    if mismatch > 1e-6 * size * size {
        return Err(Error::DivergentTail(format!("E = {e} is not an eigenvalue (relative mismatch {:.3e})", mismatch / (size * size))));
    }
    let values: Vec<f64> = (0..n).map(|i| if i <= k { out[i] } else { inw[i] }).collect();
    let mut psi = GridFunction::from_values(v.grid, values)?;
    let peak = psi.values.iter().cloned().fold(0.0, |a: f64, x| if x.abs() > a.abs() { x } else { a });
    if peak < 0.0 {
        psi = psi.scale(-1.0);
    }
    let tail_ok = |i: usize| psi.values[i].abs() <= 1e-6 * peak.abs();
    for (cond, i) in [(bc.left, 1), (bc.right, n - 2)] {
        if cond == EndCondition::Decaying && !tail_ok(i) {
            return Err(Error::DivergentTail(format!("|ψ| near r = {} is not negligible; enlarge the grid", v.grid.r(i))));
        }
    }
    normalize(&psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::foundation::{DomainKind, PoleWindow, RadialGrid};
    use std::f64::consts::PI;

    fn box_error(n_points: usize, level: usize) -> f64 {
        let g = RadialGrid::uniform(DomainKind::Interval, -PI / 2.0, PI / 2.0, n_points).unwrap();
        let units = UnitsConvention::half_unit();
        let e = numerov_eigenvalue(&GridFunction::zeros(g), &units, &BoundaryCondition::dirichlet(), level).unwrap();
        (e - ((level + 1) * (level + 1)) as f64).abs()
    }

    #[test]
    fn box_level() {
        assert!(box_error(2001, 2) < 1e-8);
    }

    #[test]
    fn numerov_converges_fast() {
        let (e1, e2) = (box_error(201, 15), box_error(401, 15));
        assert!(e1 / e2 > 30.0, "{e1} {e2}");
    }

    #[test]
    fn oscillator_ground_state() {
        let g = RadialGrid::uniform(DomainKind::HalfLine, 0.0, 10.0, 2001).unwrap();
        let v = GridFunction::from_fn(g, |r| 0.5 * r * r);
        let e = numerov_eigenvalue(&v, &UnitsConvention::oscillator(), &BoundaryCondition::radial(), 0).unwrap();
        assert!((e - 1.5).abs() < 1e-8, "{e}");
    }

    #[test]
    fn coulomb_ground_state() {
        let g = RadialGrid::uniform(DomainKind::HalfLine, 0.0, 40.0, 4001).unwrap();
        let v = GridFunction::from_fn(g, |r| -1.0 / r).with_pole(PoleWindow::new(0.0, 10.0 * g.spacing, 0.0, -1.0)).unwrap();
        let e = numerov_eigenvalue(&v, &UnitsConvention::atomic(), &BoundaryCondition::radial(), 0).unwrap();
        assert!((e + 0.5).abs() < 1e-6, "{e}");
    }

    #[test]
    fn centrifugal_barrier() {
        let g = RadialGrid::uniform(DomainKind::HalfLine, 0.0, 10.0, 2001).unwrap();
        let v = GridFunction::from_fn(g, |r| 0.5 * r * r + 1.0 / (r * r))
            .with_pole(PoleWindow::new(0.0, 10.0 * g.spacing, 1.0, 0.0))
            .unwrap();
        let e = numerov_eigenvalue(&v, &UnitsConvention::oscillator(), &BoundaryCondition::radial(), 1).unwrap();
        assert!((e - 4.5).abs() < 1e-8, "{e}");
    }
}
