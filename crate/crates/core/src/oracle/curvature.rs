use serde::Serialize;

use super::numerov::{numerov_eigenvalue, BoundaryCondition};
use crate::foundation::{GridFunction, UnitsConvention};
use crate::Result;

pub const DEFAULT_LAMBDA_STEP: f64 = 1e-3;

/// `E(λ)` as the eigenvalue of `v0 + λ·dv` with `node_target` nodes.
#[derive(Debug, Clone)]
pub struct CurvatureProblem {
    pub v0: GridFunction,
    pub dv: GridFunction,
    pub units: UnitsConvention,
    pub bc: BoundaryCondition,
    pub node_target: usize,
}

impl CurvatureProblem {
    pub fn energy(&self, lambda: f64) -> Result<f64> {
        let v = self.v0.add(&self.dv.scale(lambda))?;
        numerov_eigenvalue(&v, &self.units, &self.bc, self.node_target)
    }
}

/// Taylor coefficients `E(λ) = E(0) + c1 λ + c2 λ² + …`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Curvature {
    pub c1: f64,
    pub c2: f64,
}

/// Central differences at steps `h` and `h/2`, Richardson-combined.
pub fn lambda_curvature(problem: &CurvatureProblem, lambda_step: f64) -> Result<Curvature> {
    let e0 = problem.energy(0.0)?;
    let at = |h: f64| -> Result<Curvature> {
        let (ep, em) = (problem.energy(h)?, problem.energy(-h)?);
        Ok(Curvature { c1: (ep - em) / (2.0 * h), c2: (ep - 2.0 * e0 + em) / (2.0 * h * h) })
    };
    let coarse = at(lambda_step)?;
    let fine = at(0.5 * lambda_step)?;
    Ok(Curvature { c1: fine.c1 + (fine.c1 - coarse.c1) / 3.0, c2: fine.c2 + (fine.c2 - coarse.c2) / 3.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::foundation::{DomainKind, RadialGrid};

    #[test]
    fn constant_shift() {
        let g = RadialGrid::uniform(DomainKind::HalfLine, 0.0, 10.0, 1001).unwrap();
        let p = CurvatureProblem {
            v0: GridFunction::from_fn(g, |r| 0.5 * r * r),
            dv: GridFunction::constant(g, 0.7),
            units: UnitsConvention::oscillator(),
            bc: BoundaryCondition::radial(),
            node_target: 0,
        };
        let c = lambda_curvature(&p, DEFAULT_LAMBDA_STEP).unwrap();
        assert!((c.c1 - 0.7).abs() < 1e-8, "{}", c.c1);
        assert!(c.c2.abs() < 1e-4, "{}", c.c2);
    }
}
