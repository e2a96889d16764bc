use serde::{Deserialize, Serialize};

use super::grid::RadialGrid;
use super::stencil::poly_fit_eval;
use crate::{Error, Result};

/// Half-width of a pole window in grid spacings.
pub const WINDOW_SPACINGS: f64 = 10.0;
/// Points closer than this (in spacings) to a pole have their regular part
/// rebuilt from the neighbourhood rather than trusted.
pub const REPAIR_SPACINGS: f64 = 2.5;
const REPAIR_DEGREE: usize = 5;
const REPAIR_SAMPLES: usize = 8;

/// Local singular part `c₋₂/(r−c)² + c₋₁/(r−c)` around `center`.
///
/// Coefficients are `NaN` when the singularity is known to exist but is not of
/// order ≤ 2; such windows still exclude their points but cannot be subtracted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoleWindow {
    pub center: f64,
    pub half_width: f64,
    pub c_minus2: f64,
    pub c_minus1: f64,
}

impl PoleWindow {
    pub fn new(center: f64, half_width: f64, c_minus2: f64, c_minus1: f64) -> Self {
        Self { center, half_width, c_minus2, c_minus1 }
    }

    /// A window whose singular part could not be resolved.
    pub fn unresolved(center: f64, half_width: f64) -> Self {
        Self { center, half_width, c_minus2: f64::NAN, c_minus1: f64::NAN }
    }

    pub fn is_resolved(&self) -> bool {
        self.c_minus2.is_finite() && self.c_minus1.is_finite()
    }

    pub fn contains(&self, r: f64) -> bool {
        (r - self.center).abs() <= self.half_width * (1.0 + 1e-12)
    }

    /// Value of the singular part at `r` (zero for unresolved windows).
    pub fn singular(&self, r: f64) -> f64 {
        if !self.is_resolved() {
            return 0.0;
        }
        let d = r - self.center;
        self.c_minus2 / (d * d) + self.c_minus1 / d
    }

    /// Derivative of the singular part.
    pub fn singular_derivative(&self, r: f64) -> f64 {
        if !self.is_resolved() {
            return 0.0;
        }
        let d = r - self.center;
        -2.0 * self.c_minus2 / (d * d * d) - self.c_minus1 / (d * d)
    }

    /// Antiderivative `−c₋₂/(r−c) + c₋₁ ln|r−c|` of the singular part.
    pub fn singular_antiderivative(&self, r: f64) -> f64 {
        if !self.is_resolved() {
            return 0.0;
        }
        let d = r - self.center;
        let mut v = -self.c_minus2 / d;
        if self.c_minus1 != 0.0 {
            v += self.c_minus1 * d.abs().ln();
        }
        v
    }
}

/// A real function sampled on a [`RadialGrid`], with its registered singularities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    pub grid: RadialGrid,
    pub values: Vec<f64>,
    pub poles: Vec<PoleWindow>,
}

impl GridFunction {
    pub fn from_values(grid: RadialGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_points {
            return Err(Error::LengthMismatch { expected: grid.n_points, got: values.len() });
        }
        Ok(Self { grid, values, poles: Vec::new() })
    }

    pub fn from_fn(grid: RadialGrid, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.points().map(f).collect();
        Self { grid, values, poles: Vec::new() }
    }

    pub fn constant(grid: RadialGrid, c: f64) -> Self {
        Self::from_fn(grid, |_| c)
    }

    pub fn zeros(grid: RadialGrid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.grid.spacing
    }

    /// Registers a window, checking that it lies on the grid and does not
    /// overlap an existing one. A window may be centred on an endpoint.
    pub fn with_pole(mut self, pole: PoleWindow) -> Result<Self> {
        self.add_pole(pole)?;
        Ok(self)
    }

    pub(crate) fn add_pole(&mut self, pole: PoleWindow) -> Result<()> {
        if !(pole.half_width > 0.0) {
            return Err(Error::InvalidPole(format!("half_width {} must be positive", pole.half_width)));
        }
        let slack = 1e-9 * self.grid.spacing;
        if pole.center < self.grid.r_min - slack || pole.center > self.grid.r_max + slack {
            return Err(Error::InvalidPole(format!("center {} lies outside the grid", pole.center)));
        }
        if let Some(p) = self
            .poles
            .iter()
            .find(|p| (p.center - pole.center).abs() < p.half_width + pole.half_width)
        {
            return Err(Error::InvalidPole(format!(
                "window at {} overlaps the window at {}",
                pole.center, p.center
            )));
        }
        self.poles.push(pole);
        self.poles.sort_by(|a, b| a.center.total_cmp(&b.center));
        Ok(())
    }

    /// Registers a pole at `center` with Laurent coefficients fitted from the samples.
    pub fn with_fitted_pole(self, center: f64) -> Result<Self> {
        let pole = super::laurent::laurent_fit(&self, center)?;
        self.with_pole(pole)
    }

    /// Copy of the values with a different window list.
    pub fn with_poles(&self, poles: &[PoleWindow]) -> Result<Self> {
        let mut out = Self { grid: self.grid, values: self.values.clone(), poles: Vec::new() };
        for p in poles {
            out.add_pole(*p)?;
        }
        Ok(out)
    }

    pub fn without_poles(&self) -> Self {
        Self { grid: self.grid, values: self.values.clone(), poles: Vec::new() }
    }

    pub fn default_half_width(&self) -> f64 {
        WINDOW_SPACINGS * self.grid.spacing
    }

    /// Whether point `i` falls inside any pole window.
    pub fn is_excluded(&self, i: usize) -> bool {
        let r = self.grid.r(i);
        self.poles.iter().any(|p| p.contains(r))
    }

    /// Mask of points that are outside every pole window and finite.
    pub fn valid_mask(&self) -> Vec<bool> {
        (0..self.len()).map(|i| !self.is_excluded(i) && self.values[i].is_finite()).collect()
    }

    pub fn map(&self, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = self.values.iter().enumerate().map(|(i, &v)| f(self.grid.r(i), v)).collect();
        Self { grid: self.grid, values, poles: self.poles.clone() }
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut out = self.map(|_, v| c * v);
        for p in &mut out.poles {
            p.c_minus2 *= c;
            p.c_minus1 *= c;
        }
        out
    }

    /// Pointwise combination of two functions on the same grid. The result
    /// carries no windows; callers register the ones that apply.
    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self { grid: self.grid, values, poles: Vec::new() })
    }

    /// Sum of two functions; singular parts at a shared center add.
    pub fn add(&self, other: &Self) -> Result<Self> {
        let mut out = self.zip_with(other, |a, b| a + b)?;
        let mut poles = self.poles.clone();
        for q in &other.poles {
            if let Some(p) = poles.iter_mut().find(|p| (p.center - q.center).abs() < 1e-9 * self.grid.spacing) {
                p.c_minus2 += q.c_minus2;
                p.c_minus1 += q.c_minus1;
                p.half_width = p.half_width.max(q.half_width);
            } else {
                poles.push(*q);
            }
        }
        for p in poles {
            out.add_pole(p)?;
        }
        Ok(out)
    }

    pub(crate) fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    /// Sum of the resolved singular parts at `r`.
    pub fn singular_part(&self, r: f64) -> f64 {
        self.poles.iter().map(|p| p.singular(r)).sum()
    }

    /// Values minus every resolved singular part, with points within
    /// `REPAIR_SPACINGS` of a resolved pole (and any non-finite point)
    /// rebuilt by a local polynomial fit.
    pub fn regular_values(&self) -> Vec<f64> {
        self.regular_values_with_radius(REPAIR_SPACINGS * self.grid.spacing)
    }

    /// As [`regular_values`](Self::regular_values) with an explicit repair radius.
    pub fn regular_values_with_radius(&self, radius: f64) -> Vec<f64> {
        let n = self.len();
        let mut g: Vec<f64> =
            (0..n).map(|i| self.values[i] - self.singular_part(self.grid.r(i))).collect();
        let mut bad: Vec<bool> = g.iter().map(|v| !v.is_finite()).collect();
        for p in self.poles.iter().filter(|p| p.is_resolved()) {
            for (i, b) in bad.iter_mut().enumerate() {
                if (self.grid.r(i) - p.center).abs() < radius {
                    *b = true;
                }
            }
        }
        repair_samples(&self.grid, &mut g, &bad);
        g
    }

    /// Value at an arbitrary point by local polynomial interpolation of the
    /// regular part plus the singular parts.
    pub fn interpolate(&self, r: f64) -> f64 {
        let g = self.regular_values();
        interpolate_samples(&self.grid, &g, r) + self.singular_part(r)
    }

    pub fn max_abs_where(&self, mask: &[bool]) -> f64 {
        self.values
            .iter()
            .zip(mask)
            .filter(|(_, &m)| m)
            .map(|(v, _)| v.abs())
            .fold(0.0, f64::max)
    }
}

/// Local degree-5 interpolation of grid samples at an off-grid point.
pub fn interpolate_samples(grid: &RadialGrid, g: &[f64], r: f64) -> f64 {
    let n = grid.n_points;
    let center = ((r - grid.r_min) / grid.spacing).floor() as isize;
    let lo = (center - 2).clamp(0, n as isize - 6) as usize;
    let xs: Vec<f64> = (lo..lo + 6).map(|i| grid.r(i)).collect();
    poly_fit_eval(&xs, &g[lo..lo + 6], 5, r)
}

/// Replaces the flagged samples with local least-squares polynomial values
/// fitted to nearby trusted samples (on both sides when available).
pub fn repair_samples(grid: &RadialGrid, g: &mut [f64], bad: &[bool]) {
    let n = g.len();
    let targets: Vec<usize> = (0..n).filter(|&i| bad[i]).collect();
    if targets.is_empty() {
        return;
    }
    let good = |i: usize| !bad[i] && g[i].is_finite();
    let mut filled = Vec::with_capacity(targets.len());
    for &i in &targets {
        let mut idx = Vec::with_capacity(2 * REPAIR_SAMPLES);
        let mut k = i;
        while k > 0 && idx.len() < REPAIR_SAMPLES {
            k -= 1;
            if good(k) {
                idx.push(k);
            }
        }
        let left = idx.len();
        let mut k = i;
        while k + 1 < n && idx.len() < left + REPAIR_SAMPLES {
            k += 1;
            if good(k) {
                idx.push(k);
            }
        }
        if idx.len() < REPAIR_SAMPLES {
            filled.push((i, f64::NAN));
            continue;
        }
        let xs: Vec<f64> = idx.iter().map(|&j| grid.r(j)).collect();
        let ys: Vec<f64> = idx.iter().map(|&j| g[j]).collect();
        filled.push((i, poly_fit_eval(&xs, &ys, REPAIR_DEGREE, grid.r(i))));
    }
    for (i, v) in filled {
        g[i] = v;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::foundation::grid::DomainKind;

    fn grid() -> RadialGrid {
        RadialGrid::uniform(DomainKind::Interval, 0.0, 2.0, 401).unwrap()
    }

    #[test]
    fn overlapping_windows_rejected() {
        let f = GridFunction::zeros(grid());
        let f = f.with_pole(PoleWindow::new(1.0, 0.05, 1.0, 0.0)).unwrap();
        assert!(f.clone().with_pole(PoleWindow::new(1.07, 0.05, 1.0, 0.0)).is_err());
        assert!(f.with_pole(PoleWindow::new(3.0, 0.05, 1.0, 0.0)).is_err());
    }

    #[test]
    fn regular_part_of_synthetic_pole() {
        let g = grid();
        let f = GridFunction::from_fn(g, |r| 5.0 / ((r - 1.0) * (r - 1.0)) + r.sin())
            .with_pole(PoleWindow::new(1.0, 0.05, 5.0, 0.0))
            .unwrap();
        let reg = f.regular_values();
        for (i, v) in reg.iter().enumerate() {
            assert!((v - g.r(i).sin()).abs() < 1e-9, "i={i} {v}");
        }
    }

    #[test]
    fn endpoint_pole_is_allowed() {
        let g = grid();
        let f = GridFunction::from_fn(g, |r| 1.0 / r + 1.0)
            .with_pole(PoleWindow::new(0.0, 0.05, 0.0, 1.0))
            .unwrap();
        let reg = f.regular_values();
        assert!((reg[0] - 1.0).abs() < 1e-10);
        assert!(f.is_excluded(3));
        assert!(!f.is_excluded(11));
    }
}
