//! Independent checks: Numerov shooting for the perturbed Schrödinger
//! equation, λ-derivatives of its eigenvalues, and the claim records that
//! compare them with printed results.

mod claims;
mod curvature;
mod numerov;

pub use claims::{ClaimRecord, Verdict};
pub use curvature::{lambda_curvature, Curvature, CurvatureProblem, DEFAULT_LAMBDA_STEP};
pub use numerov::{count_nodes, numerov_eigenvalue, numerov_wavefunction, BoundaryCondition, EndCondition};
