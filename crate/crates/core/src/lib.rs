//! Perturbed bound states through the supersymmetric Riccati identity.
//!
//! A perturbed potential `V₀ + ℓ(ℓ+1)ħ²/2mr² + ΔV` is split around a solvable
//! reference state `χ_n` with superpotential `W_n = −κ χ_n′/χ_n`. The
//! correction `ΔW_n` then solves
//!
//! ```text
//! ΔW² − κ ΔW′ + 2 W ΔW = ΔV − Δε,     κ = ħ/√(2m)
//! ```
//!
//! either in closed form ([`engine::verify_ansatz`]) or order by order in the
//! coupling ([`engine::solve_series`]). The wavefunction is `ψ = χ φ` with
//! `ΔW = −κ φ′/φ`. [`oracle`] solves the Schrödinger equation directly as an
//! independent check.

pub mod catalog;
pub mod engine;
mod error;
pub mod foundation;
pub mod oracle;

pub use error::{Error, Result};
