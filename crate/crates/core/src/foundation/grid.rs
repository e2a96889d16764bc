use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Smallest grid accepted; below this the pole annuli and stencils do not fit.
pub const MIN_POINTS: usize = 201;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainKind {
    /// `[0, ∞)` truncated at `r_max`.
    HalfLine,
    /// `(−∞, ∞)` truncated to `[r_min, r_max]`.
    FullLine,
    /// A finite box `[r_min, r_max]`.
    Interval,
}

/// Uniform grid with an odd number of points (composite Simpson needs an even
/// number of panels).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    pub domain_kind: DomainKind,
    pub r_min: f64,
    pub r_max: f64,
    pub n_points: usize,
    pub spacing: f64,
}

impl RadialGrid {
    pub fn uniform(domain_kind: DomainKind, r_min: f64, r_max: f64, n_points: usize) -> Result<Self> {
        if !(r_min.is_finite() && r_max.is_finite()) {
            return Err(Error::InvalidGrid("bounds must be finite".into()));
        }
        if r_min >= r_max {
            return Err(Error::InvalidGrid(format!("r_min {r_min} must be below r_max {r_max}")));
        }
        if domain_kind == DomainKind::HalfLine && r_min < 0.0 {
            return Err(Error::InvalidGrid(format!("half-line grid cannot start at {r_min} < 0")));
        }
        if n_points < MIN_POINTS {
            return Err(Error::InvalidGrid(format!("need at least {MIN_POINTS} points, got {n_points}")));
        }
        if n_points % 2 == 0 {
            return Err(Error::InvalidGrid(format!("n_points must be odd, got {n_points}")));
        }
        let spacing = (r_max - r_min) / (n_points - 1) as f64;
        Ok(Self { domain_kind, r_min, r_max, n_points, spacing })
    }

    #[inline]
    pub fn r(&self, i: usize) -> f64 {
        if i + 1 == self.n_points {
            self.r_max
        } else {
            self.r_min + i as f64 * self.spacing
        }
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |i| self.r(i))
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        self.n_points == 0
    }

    /// Index of the grid point nearest to `r`, clamped to the grid.
    pub fn nearest_index(&self, r: f64) -> usize {
        let x = ((r - self.r_min) / self.spacing).round();
        x.clamp(0.0, (self.n_points - 1) as f64) as usize
    }

    pub fn contains(&self, r: f64) -> bool {
        r >= self.r_min && r <= self.r_max
    }

    /// Same kind and bounds, different resolution.
    pub fn with_points(&self, n_points: usize) -> Result<Self> {
        Self::uniform(self.domain_kind, self.r_min, self.r_max, n_points)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn box_grid_spacing() {
        let g = RadialGrid::uniform(DomainKind::Interval, -PI / 2.0, PI / 2.0, 2001).unwrap();
        assert!((g.spacing - PI / 2000.0).abs() < 1e-15);
        assert_eq!(g.r(2000), PI / 2.0);
        assert_eq!(g.r(0), -PI / 2.0);
    }

    #[test]
    fn half_line_grid() {
        let g = RadialGrid::uniform(DomainKind::HalfLine, 0.0, 20.0, 4001).unwrap();
        assert_eq!(g.spacing, 0.005);
        assert_eq!(g.nearest_index(1.0), 200);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(RadialGrid::uniform(DomainKind::HalfLine, -1.0, 20.0, 4001).is_err());
        assert!(RadialGrid::uniform(DomainKind::Interval, 1.0, 0.0, 4001).is_err());
        assert!(RadialGrid::uniform(DomainKind::Interval, 0.0, 1.0, 4000).is_err());
        assert!(RadialGrid::uniform(DomainKind::Interval, 0.0, 1.0, 199).is_err());
    }
}
