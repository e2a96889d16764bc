use std::sync::Arc;

use serde::Serialize;

use crate::catalog::{ShapeInvarianceRule, UnperturbedState, ENDPOINT_BUFFER};
use crate::foundation::{derivative, GridFunction, PoleWindow};
use crate::{Error, Result};

/// Partner potential `V₊ = W² + κW′ + E₀` of the perturbed superpotential and
/// its offset from the re-parameterised `V₋`.
#[derive(Debug, Clone, Serialize)]
pub struct PartnerPotential {
    pub v_plus: GridFunction,
    /// Mean of `V₊(r, a₀) − V₋(r, a₁)`; `NaN` without a shape-invariance rule.
    pub remainder_value: f64,
    /// Standard deviation of the same difference over valid points.
    pub remainder_spread: f64,
}

/// `W² ± κW′ + e0`.
fn potential_from(w: &GridFunction, kappa: f64, sign: f64, e0: f64) -> GridFunction {
    let dw = derivative(w);
    let values = w.values.iter().zip(&dw.values).map(|(a, b)| a * a + sign * kappa * b + e0).collect();
    let mut v = GridFunction { grid: w.grid, values, poles: Vec::new() };
    for p in &w.poles {
        v.add_pole(PoleWindow::unresolved(p.center, p.half_width)).expect("windows of w do not overlap");
    }
    v
}

/// Mean and spread of `a − b` outside windows and the endpoint buffers.
fn constant_offset(a: &GridFunction, b: &GridFunction) -> (f64, f64) {
    let n = a.len();
    let diffs: Vec<f64> = (ENDPOINT_BUFFER..n.saturating_sub(ENDPOINT_BUFFER))
        .filter(|&i| !a.is_excluded(i) && !b.is_excluded(i))
        .map(|i| a.values[i] - b.values[i])
        .filter(|v| v.is_finite())
        .collect();
    if diffs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let m = diffs.len() as f64;
    let mean = diffs.iter().sum::<f64>() / m;
    let spread = (diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / m).sqrt();
    (mean, spread)
}

/// Perturbed superpotential `W(a) + ΔW` for a member of the family; `ΔW` is
/// carried unchanged to the shifted parameter.
fn perturbed_member(rule: &ShapeInvarianceRule, a: f64, delta_w: &GridFunction) -> Result<GridFunction> {
    let family = rule
        .superpotential
        .as_ref()
        .ok_or_else(|| Error::StateMismatch("the shape-invariance rule has no closed-form superpotential".into()))?;
    family(a, &delta_w.grid).add(delta_w)
}

/// Builds `V₊` from `W + ΔW` and, when the state has a shape-invariance rule,
/// compares it with `V₋(a₁)` of the perturbed family.
pub fn partner_potential(state: &UnperturbedState, delta_w_total: &GridFunction, e0: f64) -> Result<PartnerPotential> {
    delta_w_total.check_same_grid(&state.w_super)?;
    let kappa = state.kappa();
    let w_tot = state.w_super.add(delta_w_total)?;
    let v_plus = potential_from(&w_tot, kappa, 1.0, e0);
    let (remainder_value, remainder_spread) = match &state.shape_rule {
        Some(rule) if rule.superpotential.is_some() => {
            let a1 = (rule.shift)(rule.a0);
            let v_minus = potential_from(&perturbed_member(rule, a1, delta_w_total)?, kappa, -1.0, e0);
            constant_offset(&v_plus, &v_minus)
        }
        _ => (f64::NAN, f64::NAN),
    };
    Ok(PartnerPotential { v_plus, remainder_value, remainder_spread })
}

/// The state's rule with remainders `R(a_s)`, `s = 1..=n_max`, recomputed
/// numerically for the perturbed family and stored in a table.
pub fn perturbed_rule(state: &UnperturbedState, delta_w_total: &GridFunction, n_max: usize) -> Result<ShapeInvarianceRule> {
    let rule = state
        .shape_rule
        .as_ref()
        .ok_or_else(|| Error::StateMismatch("the state has no shape-invariance rule".into()))?;
    let kappa = state.kappa();
    let params = rule.parameters(n_max);
    let mut table = Vec::with_capacity(n_max);
    for s in 1..=n_max {
        let upper = potential_from(&perturbed_member(rule, params[s - 1], delta_w_total)?, kappa, 1.0, 0.0);
        let lower = potential_from(&perturbed_member(rule, params[s], delta_w_total)?, kappa, -1.0, 0.0);
        table.push((params[s], constant_offset(&upper, &lower).0));
    }
    let lookup = table.clone();
    Ok(ShapeInvarianceRule {
        param_name: rule.param_name.clone(),
        a0: rule.a0,
        shift: rule.shift.clone(),
        remainder: Arc::new(move |a| {
            lookup
                .iter()
                .find(|(p, _)| (p - a).abs() <= 1e-12 * (1.0 + a.abs()))
                .map_or(f64::NAN, |(_, r)| *r)
        }),
        superpotential: None,
    })
}

/// `E_n = e0 + Σ_{s=1}^{n} R(a_s)` for `n = 0..=n_max`.
pub fn shape_invariance_spectrum(e0: f64, rule: &ShapeInvarianceRule, n_max: usize) -> Vec<f64> {
    let params = rule.parameters(n_max);
    let mut e = e0;
    let mut out = vec![e0];
    for a in &params[1..] {
        e += (rule.remainder)(*a);
        out.push(e);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::radial_oscillator;
    use crate::foundation::{DomainKind, RadialGrid, UnitsConvention};

    #[test]
    fn perturbed_oscillator_ladder() {
        let grid = RadialGrid::uniform(DomainKind::HalfLine, 0.0, 8.0, 2001).unwrap();
        let state = radial_oscillator(UnitsConvention::oscillator(), 1.0, 0, grid).unwrap();
        let lambda: f64 = 0.21;
        let dw = GridFunction::from_fn(grid, |r| (0.5f64).sqrt() * r * ((1.0 + lambda).sqrt() - 1.0));
        let partner = partner_potential(&state, &dw, 1.65).unwrap();
        assert!((partner.remainder_value - 2.2).abs() < 1e-8, "{}", partner.remainder_value);
        assert!(partner.remainder_spread < 1e-6);
        let rule = perturbed_rule(&state, &dw, 5).unwrap();
        let spectrum = shape_invariance_spectrum(1.65, &rule, 5);
        for (n, e) in spectrum.iter().enumerate() {
            assert!((e - (2.0 * n as f64 + 1.5) * 1.1).abs() < 1e-7, "n={n} {e}");
        }
    }

    #[test]
    fn unperturbed_ladder_from_catalog_rule() {
        let grid = RadialGrid::uniform(DomainKind::HalfLine, 0.0, 8.0, 1001).unwrap();
        let state = radial_oscillator(UnitsConvention::oscillator(), 1.0, 1, grid).unwrap();
        let spectrum = shape_invariance_spectrum(state.epsilon, state.shape_rule.as_ref().unwrap(), 3);
        assert_eq!(spectrum, vec![2.5, 4.5, 6.5, 8.5]);
    }
}
