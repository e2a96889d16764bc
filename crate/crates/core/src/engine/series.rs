use serde::Serialize;

use super::ansatz::ks_phi_from_dw;
use super::EngineConfig;
use crate::catalog::UnperturbedState;
use crate::foundation::{
    cumulative_finite_part, cumulative_left, derivative, finite_part_quad_with, laurent_fit, quad, FinitePart, GridFunction,
    PoleWindow, REPAIR_SPACINGS,
};
use crate::{Error, Result};

/// Multiple of the window half-width excluded from residual checks around an
/// unresolved singularity.
const UNRESOLVED_GUARD: f64 = 3.0;

/// `ΔV(r; λ) = Σ_k λ^k ΔV_k(r)`.
#[derive(Debug, Clone)]
pub struct PerturbationSeries {
    pub lambda: f64,
    /// `terms[k-1]` is `ΔV_k`.
    pub terms: Vec<GridFunction>,
}

impl PerturbationSeries {
    pub fn new(lambda: f64, terms: Vec<GridFunction>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::StateMismatch("a perturbation series needs at least one term".into()));
        }
        if let Some(t) = terms.iter().find(|t| t.values.iter().any(|v| !v.is_finite()) && t.poles.is_empty()) {
            let i = t.values.iter().position(|v| !v.is_finite()).unwrap_or(0);
            return Err(Error::NonFinite { r: t.grid.r(i) });
        }
        Ok(Self { lambda, terms })
    }

    /// `ΔV_k`, zero beyond the last supplied term.
    pub fn term(&self, k: usize) -> Option<&GridFunction> {
        self.terms.get(k - 1)
    }

    /// `Σ_k λ^k ΔV_k`.
    pub fn total(&self) -> Result<GridFunction> {
        let mut total = GridFunction::zeros(self.terms[0].grid);
        let mut power = 1.0;
        for t in &self.terms {
            power *= self.lambda;
            total = total.add(&t.scale(power))?;
        }
        Ok(total)
    }
}

/// One order of the expansion: `Δε_k`, `ΔW_k` and the additive wavefunction
/// correction `φ_k`.
#[derive(Debug, Clone, Serialize)]
pub struct OrderCorrection {
    pub k: usize,
    pub delta_eps: f64,
    pub delta_w: GridFunction,
    pub phi: Option<GridFunction>,
    /// Finite-part bookkeeping when the energy integrand had windows.
    pub energy_finite_part: Option<FinitePart>,
    /// Max of `|2WΔW_k − κΔW_k′ − (ΔV_k − S_k − Δε_k)|` outside windows.
    pub residual_max: f64,
    pub flagged: bool,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct CorrectionSeries<'a> {
    pub base: &'a UnperturbedState,
    pub lambda: f64,
    pub orders: Vec<OrderCorrection>,
}

impl<'a> CorrectionSeries<'a> {
    pub fn new(base: &'a UnperturbedState, lambda: f64) -> Self {
        Self { base, lambda, orders: Vec::new() }
    }

    /// `Σ_{k≤K} λ^k Δε_k`.
    pub fn energy_shift(&self) -> f64 {
        self.partial_energy_shift(self.orders.len())
    }

    pub fn partial_energy_shift(&self, k_max: usize) -> f64 {
        self.orders.iter().take(k_max).map(|o| self.lambda.powi(o.k as i32) * o.delta_eps).sum()
    }

    /// `ε + Σ λ^k Δε_k`.
    pub fn total_energy(&self) -> f64 {
        self.base.epsilon + self.energy_shift()
    }

    /// `Σ_{k≤K} λ^k ΔW_k`, with matching windows combined.
    pub fn delta_w_sum(&self, k_max: usize) -> Result<GridFunction> {
        let mut sum = GridFunction::zeros(self.base.grid);
        for o in self.orders.iter().take(k_max) {
            sum = sum.add(&o.delta_w.scale(self.lambda.powi(o.k as i32)))?;
        }
        Ok(sum)
    }

    pub fn flagged(&self) -> bool {
        self.orders.iter().any(|o| o.flagged)
    }
}

/// Registers a window at each interior node of `state` where `f` is singular.
/// Singularities that do not fit a double/simple pole get an unresolved window.
fn register_node_poles(state: &UnperturbedState, mut f: GridFunction, notes: &mut Vec<String>) -> Result<GridFunction> {
    let (a, b) = (state.grid.r_min, state.grid.r_max);
    for &node in state.nodes.iter().filter(|&&z| z > a && z < b) {
        match laurent_fit(&f, node) {
            Ok(p) => f.add_pole(p)?,
            Err(Error::NoSingularity { .. }) => {}
            Err(Error::NotAPole { reason, .. }) => {
                notes.push(format!("singularity at r = {node:.6} left unresolved: {reason}"));
                f.add_pole(PoleWindow::unresolved(node, f.default_half_width()))?;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(f)
}

/// Solves `2WΔW − κΔW′ = rhs − Δε` with `Δε` fixed by normalizability:
/// `Δε = ∫χ² rhs / ∫χ²` (finite part when `χ² rhs` is singular at nodes).
fn solve_order(
    state: &UnperturbedState,
    k: usize,
    rhs: &GridFunction,
    config: &EngineConfig,
) -> Result<OrderCorrection> {
    let grid = state.grid;
    let kappa = state.kappa();
    let chi_sq: Vec<f64> = state.chi.values.iter().map(|c| c * c).collect();
    let norm = quad(&GridFunction::from_values(grid, chi_sq.clone())?)?;
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::NonNormalizable(format!("∫χ² = {norm}")));
    }
    let mut notes = Vec::new();
    let mut flagged = false;

    let interior_nodes: Vec<f64> = state.nodes.iter().copied().filter(|&z| z > grid.r_min && z < grid.r_max).collect();
    let at_node = |i: usize| interior_nodes.iter().any(|z| (grid.r(i) - z).abs() < 1e-9 * grid.spacing);
    let mut products: Vec<f64> = chi_sq.iter().zip(&rhs.values).map(|(c, v)| c * v).collect();
    // 0·∞ where a zero of χ cancels a singularity of the source
    let removable: Vec<bool> = (0..grid.n_points).map(|i| !products[i].is_finite() && !at_node(i)).collect();
    crate::foundation::repair_samples(&grid, &mut products, &removable);
    let weighted = GridFunction::from_values(grid, products)?;
    let weighted = register_node_poles(state, weighted, &mut notes)?;
    // Δε uses the same rule as the running integrals below, so that the
    // left and right forms of ΔW agree where they meet
    let running_norm = cumulative_left(&chi_sq, grid.spacing)[grid.n_points - 1];
    let running_total = |f: &GridFunction| -> Result<f64> { Ok(cumulative_finite_part(f)?.0[grid.n_points - 1]) };
    let (delta_eps, energy_finite_part) = if weighted.poles.is_empty() {
        (running_total(&weighted)? / running_norm, None)
    } else {
        match finite_part_quad_with(&weighted, config.finite_part_spread) {
            Ok(fp) => {
                if !fp.converged {
                    flagged = true;
                    notes.push(format!("finite part not converged (relative spread {:.3e})", fp.relative_spread));
                }
                (running_total(&weighted)? / running_norm, Some(fp))
            }
            Err(Error::UnresolvedPole(c)) => {
                flagged = true;
                notes.push(format!("energy integrand has an unresolved singularity at r = {c:.6}"));
                (f64::NAN, None)
            }
            Err(e) => return Err(e),
        }
    };

    let delta_w = if delta_eps.is_finite() {
        // q = χ²(Δε − rhs); ΔW = (1/κχ²)∫q from whichever end keeps χ² large
        let mut q = weighted.scale(-1.0);
        for (v, c) in q.values.iter_mut().zip(&chi_sq) {
            *v += delta_eps * c;
        }
        let (left, right) = cumulative_finite_part(&q)?;
        // weight beyond a truncated end, from the leading term of ∫ χ² f ≈ χ² f κ/(2W)
        let n = grid.n_points;
        let tail = |i: usize, sign: f64| {
            let w = state.w_super.values[i];
            let ok = chi_sq[i] > 0.0 && w.is_finite() && sign * w > 0.0 && q.values[i].is_finite();
            if ok { sign * q.values[i] * kappa / (2.0 * w) } else { 0.0 }
        };
        let (left_tail, right_tail) = (tail(0, -1.0), tail(n - 1, 1.0));
        let split = chi_sq
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &c)| if c > best.1 { (i, c) } else { best })
            .0;
        let floor = 1e-250 * chi_sq[split];
        let mut values: Vec<f64> = (0..grid.n_points)
            .map(|i| {
                if chi_sq[i] < floor && state.w_super.values[i].abs() > 0.0 && !on_boundary(grid, i) {
                    // underflowed tail: the local balance 2WΔW ≈ rhs − Δε
                    return (rhs.values[i] - delta_eps) / (2.0 * state.w_super.values[i]);
                }
                let integral = if i <= split { left[i] + left_tail } else { -(right[i] + right_tail) };
                integral / (kappa * chi_sq[i])
            })
            .collect();
        // removable 0/0 at zeros of χ on the boundary
        let boundary_nodes: Vec<f64> = [grid.r_min, grid.r_max]
            .into_iter()
            .filter(|&e| {
                let i = grid.nearest_index(e);
                chi_sq[i] <= 1e-24 * chi_sq[split]
            })
            .collect();
        let mut bad: Vec<bool> = values.iter().map(|v| !v.is_finite()).collect();
        for (i, b) in bad.iter_mut().enumerate() {
            let r = grid.r(i);
            if boundary_nodes.iter().any(|e| (r - e).abs() < REPAIR_SPACINGS * grid.spacing) {
                *b = true;
            }
        }
        // interior pole centers stay non-finite; only the boundary is repaired here
        for (i, b) in bad.iter_mut().enumerate() {
            if at_node(i) {
                *b = false;
            }
        }
        crate::foundation::repair_samples(&grid, &mut values, &bad);
        let dw = GridFunction::from_values(grid, values)?;
        register_node_poles(state, dw, &mut notes)?
    } else {
        let mut dw = GridFunction::from_values(grid, vec![f64::NAN; grid.n_points])?;
        dw.poles.clear();
        dw
    };

    let residual_max = if delta_eps.is_finite() {
        let dwp = derivative(&delta_w);
        let mut mask = state.interior_mask();
        for (m, v) in mask.iter_mut().zip(delta_w.valid_mask()) {
            *m &= v;
        }
        for (m, v) in mask.iter_mut().zip(rhs.valid_mask()) {
            *m &= v;
        }
        // differencing is unreliable next to a singularity that could not be subtracted
        for p in delta_w.poles.iter().filter(|p| !p.is_resolved()) {
            for (i, m) in mask.iter_mut().enumerate() {
                if (grid.r(i) - p.center).abs() <= UNRESOLVED_GUARD * p.half_width {
                    *m = false;
                }
            }
        }
        (0..grid.n_points)
            .filter(|&i| mask[i])
            .map(|i| {
                let lhs = 2.0 * state.w_super.values[i] * delta_w.values[i] - kappa * dwp.values[i];
                (lhs - (rhs.values[i] - delta_eps)).abs()
            })
            .fold(0.0, f64::max)
    } else {
        f64::NAN
    };

    Ok(OrderCorrection {
        k,
        delta_eps,
        delta_w,
        phi: None,
        energy_finite_part,
        residual_max,
        flagged,
        notes,
    })
}

fn on_boundary(grid: crate::foundation::RadialGrid, i: usize) -> bool {
    (i as f64) < REPAIR_SPACINGS || ((grid.n_points - 1 - i) as f64) < REPAIR_SPACINGS
}

/// First-order correction: `Δε₁ = ⟨χ|ΔV₁|χ⟩` and
/// `ΔW₁ = (1/κχ²) ∫ χ² (Δε₁ − ΔV₁)`.
pub fn first_order(state: &UnperturbedState, dv1: &GridFunction) -> Result<OrderCorrection> {
    first_order_with(state, dv1, &EngineConfig::default())
}

pub fn first_order_with(state: &UnperturbedState, dv1: &GridFunction, config: &EngineConfig) -> Result<OrderCorrection> {
    dv1.check_same_grid(&state.chi)?;
    solve_order(state, 1, dv1, config)
}

/// Order `k = prior.orders.len() + 1`, sourced by `ΔV_k − Σ_{j<k} ΔW_j ΔW_{k−j}`.
pub fn next_order(state: &UnperturbedState, prior: &CorrectionSeries<'_>, dv_k: &GridFunction) -> Result<OrderCorrection> {
    next_order_with(state, prior, dv_k, &EngineConfig::default())
}

pub fn next_order_with(
    state: &UnperturbedState,
    prior: &CorrectionSeries<'_>,
    dv_k: &GridFunction,
    config: &EngineConfig,
) -> Result<OrderCorrection> {
    let k = prior.orders.len() + 1;
    if k < 2 || prior.orders.iter().enumerate().any(|(i, o)| o.k != i + 1) {
        return Err(Error::MissingPriorOrders { requested: k.max(2), available: prior.orders.len() });
    }
    dv_k.check_same_grid(&state.chi)?;
    let n = state.grid.n_points;
    let mut rhs = dv_k.values.clone();
    for j in 1..k {
        let (a, b) = (&prior.orders[j - 1].delta_w.values, &prior.orders[k - j - 1].delta_w.values);
        for i in 0..n {
            rhs[i] -= a[i] * b[i];
        }
    }
    let mut rhs = GridFunction::from_values(state.grid, rhs)?;
    // windows of the source follow those of the prior ΔW_j
    for o in &prior.orders {
        for p in &o.delta_w.poles {
            if !rhs.poles.iter().any(|q| (q.center - p.center).abs() < 1e-9) {
                rhs.add_pole(PoleWindow::unresolved(p.center, p.half_width))?;
            }
        }
    }
    let mut out = solve_order(state, k, &rhs, config)?;
    if prior.flagged() {
        out.flagged = true;
        out.notes.push("built on a flagged lower order".into());
    }
    Ok(out)
}

/// Runs orders `1..=k_max` and attaches `φ_k`.
pub fn solve_series<'a>(state: &'a UnperturbedState, series: &PerturbationSeries, k_max: usize) -> Result<CorrectionSeries<'a>> {
    solve_series_with(state, series, k_max, &EngineConfig::default())
}

pub fn solve_series_with<'a>(
    state: &'a UnperturbedState,
    series: &PerturbationSeries,
    k_max: usize,
    config: &EngineConfig,
) -> Result<CorrectionSeries<'a>> {
    if k_max == 0 || k_max > config.max_order {
        return Err(Error::OrderTooHigh { requested: k_max, max: config.max_order });
    }
    let zero = GridFunction::zeros(state.grid);
    let mut out = CorrectionSeries::new(state, series.lambda);
    for k in 1..=k_max {
        let dv = series.term(k).unwrap_or(&zero);
        let mut order = if k == 1 {
            first_order_with(state, dv, config)?
        } else {
            next_order_with(state, &out, dv, config)?
        };
        if order.delta_eps.is_finite() {
            match ks_phi_from_dw(&order.delta_w, &state.units) {
                Ok(phi) => order.phi = Some(phi),
                Err(Error::UnresolvedPole(c)) => {
                    order.notes.push(format!("φ_{k} not formed: ΔW_{k} has a singularity of order > 2 at r = {c:.6}"))
                }
                Err(e) => return Err(e),
            }
        }
        out.orders.push(order);
    }
    Ok(out)
}

/// Pointwise residual of the full perturbed identity for the λ-weighted
/// partial sums through order `k_max`:
/// `ΔW² − κΔW′ + 2WΔW − ΔV + Δε`.
pub fn series_residual(series: &CorrectionSeries<'_>, perturbation: &PerturbationSeries, k_max: usize) -> Result<GridFunction> {
    let state = series.base;
    let kappa = state.kappa();
    let dw = series.delta_w_sum(k_max)?;
    let dwp = derivative(&dw);
    let mut dv = GridFunction::zeros(state.grid);
    let mut power = 1.0;
    for k in 1..=k_max {
        power *= perturbation.lambda;
        if let Some(t) = perturbation.term(k) {
            dv = dv.add(&t.scale(power))?;
        }
    }
    let de = series.partial_energy_shift(k_max);
    let values = (0..state.grid.n_points)
        .map(|i| {
            let (d, w) = (dw.values[i], state.w_super.values[i]);
            d * d - kappa * dwp.values[i] + 2.0 * w * d - dv.values[i] + de
        })
        .collect();
    let mut poles = dw.poles.clone();
    for p in state.w_super.poles.iter().chain(&dv.poles) {
        if !poles.iter().any(|q| (q.center - p.center).abs() < 1e-9) {
            poles.push(PoleWindow::unresolved(p.center, p.half_width));
        }
    }
    let mut out = GridFunction::from_values(state.grid, values)?;
    for p in poles {
        out.add_pole(PoleWindow::unresolved(p.center, p.half_width))?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{coulomb_ground, infinite_well, radial_oscillator};
    use crate::foundation::{DomainKind, RadialGrid, UnitsConvention};
    use std::f64::consts::PI;

    fn oscillator() -> UnperturbedState {
        let grid = RadialGrid::uniform(DomainKind::HalfLine, 0.0, 10.0, 2001).unwrap();
        radial_oscillator(UnitsConvention::oscillator(), 1.0, 0, grid).unwrap()
    }

    #[test]
    fn constant_perturbation_shifts_energy_only() {
        let state = oscillator();
        let o = first_order(&state, &GridFunction::constant(state.grid, 0.7)).unwrap();
        assert!((o.delta_eps - 0.7).abs() < 1e-12, "{}", o.delta_eps);
        assert!(o.delta_w.values.iter().all(|v| v.abs() < 1e-10));
        assert!(!o.flagged);
    }

    #[test]
    fn null_recursion() {
        let state = oscillator();
        let zero = GridFunction::zeros(state.grid);
        let mut prior = CorrectionSeries::new(&state, 0.1);
        prior.orders.push(first_order(&state, &zero).unwrap());
        let o = next_order(&state, &prior, &zero).unwrap();
        assert_eq!(o.k, 2);
        assert!(o.delta_eps.abs() < 1e-14);
        assert!(o.delta_w.values.iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn next_order_needs_a_first_order() {
        let state = oscillator();
        let prior = CorrectionSeries::new(&state, 0.1);
        let err = next_order(&state, &prior, &GridFunction::zeros(state.grid)).unwrap_err();
        assert!(matches!(err, Error::MissingPriorOrders { .. }));
    }

    #[test]
    fn order_cap() {
        let state = oscillator();
        let series = PerturbationSeries::new(0.1, vec![GridFunction::zeros(state.grid)]).unwrap();
        assert!(matches!(solve_series(&state, &series, 0), Err(Error::OrderTooHigh { .. })));
        assert!(matches!(solve_series(&state, &series, 7), Err(Error::OrderTooHigh { .. })));
    }

    #[test]
    fn single_order_series_equals_first_order() {
        let state = oscillator();
        let dv = GridFunction::from_fn(state.grid, |r| 0.5 * r * r);
        let series = PerturbationSeries::new(0.3, vec![dv.clone()]).unwrap();
        let solved = solve_series(&state, &series, 1).unwrap();
        let direct = first_order(&state, &dv).unwrap();
        assert_eq!(solved.orders[0].delta_eps, direct.delta_eps);
        assert_eq!(solved.orders[0].delta_w.values, direct.delta_w.values);
    }

    #[test]
    fn zero_coupling_leaves_energy_unchanged() {
        let state = oscillator();
        let dv = GridFunction::from_fn(state.grid, |r| 0.5 * r * r);
        let series = PerturbationSeries::new(0.0, vec![dv]).unwrap();
        let solved = solve_series(&state, &series, 3).unwrap();
        assert_eq!(solved.energy_shift(), 0.0);
        assert!(solved.delta_w_sum(3).unwrap().values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn first_order_is_the_expectation_value() {
        let state = oscillator();
        let dv = GridFunction::from_fn(state.grid, |r| r.powi(3) - r);
        let o = first_order(&state, &dv).unwrap();
        let expectation = quad(&state.chi.zip_with(&dv, |c, v| c * c * v).unwrap()).unwrap();
        assert!((o.delta_eps - expectation).abs() < 1e-9, "{} {expectation}", o.delta_eps);
    }

    #[test]
    fn odd_perturbation_of_a_symmetric_state() {
        let grid = RadialGrid::uniform(DomainKind::Interval, -PI / 2.0, PI / 2.0, 2001).unwrap();
        let state = infinite_well(UnitsConvention::half_unit(), 2, grid).unwrap();
        let o = first_order(&state, &GridFunction::from_fn(grid, |r| r)).unwrap();
        assert!(o.delta_eps.abs() < 1e-10, "{}", o.delta_eps);
    }

    #[test]
    fn coulomb_first_two_orders() {
        let grid = RadialGrid::uniform(DomainKind::HalfLine, 0.0, 40.0, 4001).unwrap();
        let state = coulomb_ground(UnitsConvention::atomic(), 0, grid).unwrap();
        let dv = GridFunction::from_fn(grid, |r| 0.5 / r)
            .with_pole(PoleWindow::new(0.0, 10.0 * grid.spacing, 0.0, 0.5))
            .unwrap();
        let series = PerturbationSeries::new(0.2, vec![dv]).unwrap();
        let solved = solve_series(&state, &series, 2).unwrap();
        assert!((solved.orders[0].delta_eps - 0.5).abs() < 1e-8);
        assert!((solved.orders[1].delta_eps + 0.125).abs() < 1e-8);
        assert!((solved.energy_shift() - 0.095).abs() < 1e-8);
    }
}
