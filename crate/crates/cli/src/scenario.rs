use std::path::Path;

use serde::{Deserialize, Serialize};
use susy_pert::catalog::{build_state, SystemKind, UnperturbedState};
use susy_pert::engine::{EngineConfig, PerturbationSeries};
use susy_pert::foundation::{DomainKind, GridFunction, PoleWindow, RadialGrid, UnitsConvention};

use crate::CliError;

/// Claim ids a scenario may ask to have checked.
pub const KNOWN_CHECKS: [&str; 3] = ["Eq21", "Eq29", "numerov"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExprTag {
    /// `c`
    Const,
    /// `c·r`
    Linear,
    /// `c·r²`
    QuadraticR2,
    /// `c/r`
    InverseR,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationTerm {
    pub order: usize,
    pub tag: ExprTag,
    pub coefficient: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub domain_kind: DomainKind,
    pub r_min: f64,
    pub r_max: f64,
    pub n_points: usize,
}

/// One run: base system, perturbation series `Σ λ^k ΔV_k`, grid and checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub units: String,
    pub base_system: SystemKind,
    pub perturbation: Vec<PerturbationTerm>,
    pub lambda: f64,
    pub orders: usize,
    pub grid: GridSpec,
    #[serde(default)]
    pub checks: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ToleranceProfile {
    #[default]
    Default,
    /// Every tolerance divided by ten.
    Strict,
}

impl ToleranceProfile {
    pub fn scale(self) -> f64 {
        match self {
            ToleranceProfile::Default => 1.0,
            ToleranceProfile::Strict => 0.1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ToleranceProfile::Default => "default",
            ToleranceProfile::Strict => "strict",
        }
    }
}

/// A validated scenario with its state and perturbation built.
pub struct Prepared {
    pub units: UnitsConvention,
    pub state: UnperturbedState,
    pub series: PerturbationSeries,
    pub orders: usize,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Validation(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Field-level checks that need no numerics.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Validation(msg));
        if self.name.is_empty() || !self.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
            return bad(format!("name {:?} must be non-empty and use only [A-Za-z0-9_-]", self.name));
        }
        if UnitsConvention::preset(&self.units).is_none() {
            return bad(format!("unknown units preset {:?}", self.units));
        }
        let max = EngineConfig::default().max_order;
        if self.orders == 0 || self.orders > max {
            return bad(format!("orders must lie in 1..={max}, got {}", self.orders));
        }
        if !self.lambda.is_finite() {
            return bad("lambda must be finite".into());
        }
        if self.perturbation.is_empty() {
            return bad("perturbation needs at least one term".into());
        }
        for t in &self.perturbation {
            if t.order == 0 || t.order > self.orders {
                return bad(format!("perturbation order {} outside 1..={}", t.order, self.orders));
            }
            if !t.coefficient.is_finite() {
                return bad(format!("coefficient of the order-{} {:?} term is not finite", t.order, t.tag));
            }
            if t.tag == ExprTag::InverseR && self.grid.r_min < 0.0 {
                return bad("inverse_r needs a grid with r_min ≥ 0".into());
            }
        }
        let params_finite = match self.base_system {
            SystemKind::RadialOscillator { w, .. } | SystemKind::Oscillator1dN1 { w } => w.is_finite(),
            _ => true,
        };
        if !params_finite || !self.grid.r_min.is_finite() || !self.grid.r_max.is_finite() {
            return bad("numeric fields must be finite".into());
        }
        for c in &self.checks {
            if !KNOWN_CHECKS.contains(&c.as_str()) {
                return bad(format!("unknown check {c:?}; known: {}", KNOWN_CHECKS.join(", ")));
            }
            let compatible = match c.as_str() {
                "Eq21" => matches!(self.base_system, SystemKind::RadialOscillator { .. }) && self.only_tag(ExprTag::QuadraticR2),
                "Eq29" => matches!(self.base_system, SystemKind::CoulombGround { .. }) && self.only_tag(ExprTag::InverseR),
                _ => true,
            };
            if !compatible {
                return bad(format!("check {c} does not apply to this system and perturbation"));
            }
        }
        Ok(())
    }

    fn only_tag(&self, tag: ExprTag) -> bool {
        self.perturbation.iter().all(|t| t.tag == tag && t.order == 1)
    }

    /// Sum of the coefficients of first-order terms with `tag`.
    pub fn first_order_coefficient(&self, tag: ExprTag) -> f64 {
        self.perturbation.iter().filter(|t| t.order == 1 && t.tag == tag).map(|t| t.coefficient).sum()
    }

    /// Validates, then builds the catalog state and the perturbation terms.
    pub fn prepare(&self, grid_points: Option<usize>, orders: Option<usize>) -> Result<Prepared, CliError> {
        let mut scenario = self.clone();
        if let Some(n) = grid_points {
            scenario.grid.n_points = n;
        }
        if let Some(k) = orders {
            scenario.orders = k;
        }
        scenario.validate()?;
        let units = UnitsConvention::preset(&scenario.units).expect("validated above");
        let g = scenario.grid;
        let grid = RadialGrid::uniform(g.domain_kind, g.r_min, g.r_max, g.n_points)
            .map_err(|e| CliError::Validation(e.to_string()))?;
        let state = build_state(scenario.base_system, units, grid).map_err(|e| CliError::Validation(e.to_string()))?;
        let mut terms = Vec::with_capacity(scenario.orders);
        for k in 1..=scenario.orders {
            let mut term = GridFunction::zeros(grid);
            for t in scenario.perturbation.iter().filter(|t| t.order == k) {
                term = term.add(&expression(t, &grid)?).map_err(|e| CliError::Validation(e.to_string()))?;
            }
            terms.push(term);
        }
        let series = PerturbationSeries::new(scenario.lambda, terms).map_err(|e| CliError::Validation(e.to_string()))?;
        Ok(Prepared { units, state, series, orders: scenario.orders })
    }
}

/// Samples one vocabulary term on the grid.
pub fn expression(term: &PerturbationTerm, grid: &RadialGrid) -> Result<GridFunction, CliError> {
    let c = term.coefficient;
    Ok(match term.tag {
        ExprTag::Const => GridFunction::constant(*grid, c),
        ExprTag::Linear => GridFunction::from_fn(*grid, |r| c * r),
        ExprTag::QuadraticR2 => GridFunction::from_fn(*grid, |r| c * r * r),
        ExprTag::InverseR => {
            if grid.r_min > 0.0 {
                GridFunction::from_fn(*grid, |r| c / r)
            } else if grid.domain_kind == DomainKind::HalfLine || grid.r_min == 0.0 {
                GridFunction::from_fn(*grid, |r| c / r)
                    .with_pole(PoleWindow::new(0.0, susy_pert::foundation::WINDOW_SPACINGS * grid.spacing, 0.0, c))
                    .map_err(|e| CliError::Validation(e.to_string()))?
            } else {
                return Err(CliError::Validation("inverse_r is singular inside this grid".into()));
            }
        }
    })
}
