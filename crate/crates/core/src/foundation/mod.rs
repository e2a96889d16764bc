//! Grids, sampled functions, quadrature, differentiation and the machinery
//! for node-induced singularities.

mod function;
mod grid;
mod laurent;
mod ops;
mod quadrature;
pub mod stencil;
mod units;

pub use function::{interpolate_samples, repair_samples, GridFunction, PoleWindow, REPAIR_SPACINGS, WINDOW_SPACINGS};
pub use grid::{DomainKind, RadialGrid, MIN_POINTS};
pub use laurent::{laurent_fit, ANNULUS_INNER, ANNULUS_OUTER};
pub use ops::{derivative, find_nodes, interior_sign_changes, log_derivative_superpotential, normalize};
pub use quadrature::{finite_part_quad, finite_part_quad_with, quad, FinitePart, FINITE_PART_SPREAD};
pub(crate) use quadrature::{cumulative_finite_part, cumulative_left};
pub use units::UnitsConvention;

/// Builds a uniform grid.
pub fn make_uniform_grid(domain_kind: DomainKind, r_min: f64, r_max: f64, n_points: usize) -> crate::Result<RadialGrid> {
    RadialGrid::uniform(domain_kind, r_min, r_max, n_points)
}
