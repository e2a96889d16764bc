use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Physical constants of a problem: ħ, the particle mass and the coupling e².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitsConvention {
    pub hbar: f64,
    pub mass: f64,
    pub charge_sq: f64,
}

impl UnitsConvention {
    pub fn new(hbar: f64, mass: f64, charge_sq: f64) -> Result<Self> {
        for (name, v) in [("hbar", hbar), ("mass", mass), ("charge_sq", charge_sq)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidUnits(format!("{name} must be finite and positive, got {v}")));
            }
        }
        Ok(Self { hbar, mass, charge_sq })
    }

    /// ħ = m = 1.
    pub fn oscillator() -> Self {
        Self { hbar: 1.0, mass: 1.0, charge_sq: 1.0 }
    }

    /// ħ = m = e² = 1.
    pub fn atomic() -> Self {
        Self { hbar: 1.0, mass: 1.0, charge_sq: 1.0 }
    }

    /// ħ = 2m = 1, so that ħ²/2m = 1.
    pub fn half_unit() -> Self {
        Self { hbar: 1.0, mass: 0.5, charge_sq: 1.0 }
    }

    /// Looks up a preset by its config name.
    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "oscillator-units" => Some(Self::oscillator()),
            "atomic" => Some(Self::atomic()),
            "half-unit" => Some(Self::half_unit()),
            _ => None,
        }
    }

    /// κ = ħ/√(2m), the scale relating a superpotential to a logarithmic derivative.
    pub fn kappa(&self) -> f64 {
        self.hbar / (2.0 * self.mass).sqrt()
    }

    /// ħ²/2m, the kinetic prefactor of the Schrödinger equation.
    pub fn kinetic(&self) -> f64 {
        self.hbar * self.hbar / (2.0 * self.mass)
    }
}
