//! The perturbed Riccati solver: order-by-order corrections, closed-form
//! ansatz verification, moderating functions and the shape-invariance ladder.

mod ansatz;
mod series;
mod shape;

use serde::{Deserialize, Serialize};

pub use ansatz::{
    compose_wavefunction, dw_from_ks_phi, ks_phi_from_dw, moderating_function, verify_ansatz, verify_ansatz_with,
    AnsatzSolution, ANSATZ_TOL,
};
pub use series::{
    first_order, first_order_with, next_order, next_order_with, series_residual, solve_series, solve_series_with,
    CorrectionSeries, OrderCorrection, PerturbationSeries,
};
pub use shape::{partner_potential, perturbed_rule, shape_invariance_spectrum, PartnerPotential};

/// Numerical settings shared by the engine operations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    /// Bound on residuals and on the spread of an ansatz remainder.
    pub residual_tol: f64,
    /// Highest order `solve_series` will compute.
    pub max_order: usize,
    /// Relative spread above which a finite-part energy is flagged.
    pub finite_part_spread: f64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self { residual_tol: 1e-8, max_order: 6, finite_part_spread: crate::foundation::FINITE_PART_SPREAD }
    }
}
