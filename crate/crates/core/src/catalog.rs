//! Closed-form reference systems: eigenfunction, superpotential, energy and
//! potential for the four solvable problems the perturbation schemes start from.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::foundation::{
    derivative, interior_sign_changes, normalize, quad, DomainKind, GridFunction, PoleWindow, RadialGrid,
    UnitsConvention,
};
use crate::{Error, Result};

/// Points excluded at each end of the grid when checking the Riccati identity.
pub const ENDPOINT_BUFFER: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "system", rename_all = "snake_case")]
pub enum SystemKind {
    RadialOscillator { w: f64, ell: u32 },
    CoulombGround { ell: u32 },
    #[serde(rename = "oscillator_1d_n1")]
    Oscillator1dN1 { w: f64 },
    InfiniteWell { n: u32 },
}

/// A solvable state: `χ_n`, `W_n = −κχ_n′/χ_n`, `ε_n` and the full unperturbed
/// potential (centrifugal barrier included).
#[derive(Debug, Clone)]
pub struct UnperturbedState {
    pub kind: SystemKind,
    pub units: UnitsConvention,
    pub grid: RadialGrid,
    pub n: usize,
    pub ell: u32,
    pub epsilon: f64,
    pub chi: GridFunction,
    pub w_super: GridFunction,
    pub v0: GridFunction,
    /// Zeros of `χ` that count toward `n` (walls and the regular radial origin excluded).
    pub nodes: Vec<f64>,
    pub shape_rule: Option<ShapeInvarianceRule>,
}

/// Superpotential family `W(r; a)` on a grid.
pub type SuperpotentialFamily = Arc<dyn Fn(f64, &RadialGrid) -> GridFunction + Send + Sync>;

/// `V₊(r, a_s) = V₋(r, a_{s+1}) + R(a_{s+1})` with `a_{s+1} = shift(a_s)`.
#[derive(Clone)]
pub struct ShapeInvarianceRule {
    pub param_name: String,
    pub a0: f64,
    pub shift: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub remainder: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    /// `W(r; a)`, when the family is known in closed form.
    pub superpotential: Option<SuperpotentialFamily>,
}

impl fmt::Debug for ShapeInvarianceRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ShapeInvarianceRule")
            .field("param_name", &self.param_name)
            .field("a0", &self.a0)
            .finish_non_exhaustive()
    }
}

impl ShapeInvarianceRule {
    /// Parameters `a_0, a_1, …, a_n`.
    pub fn parameters(&self, n: usize) -> Vec<f64> {
        let mut a = vec![self.a0];
        for s in 0..n {
            a.push((self.shift)(a[s]));
        }
        a
    }
}

fn require_half_line(grid: &RadialGrid) -> Result<()> {
    if grid.domain_kind != DomainKind::HalfLine || grid.r_min != 0.0 {
        return Err(Error::InvalidGrid("this system lives on a half-line grid starting at 0".into()));
    }
    Ok(())
}

fn origin_window(grid: &RadialGrid, c_minus2: f64, c_minus1: f64) -> PoleWindow {
    PoleWindow::new(0.0, crate::foundation::WINDOW_SPACINGS * grid.spacing, c_minus2, c_minus1)
}

/// `ℓ(ℓ+1)ħ²/2m`, the coefficient of `1/r²` in the barrier.
fn barrier(units: &UnitsConvention, ell: u32) -> f64 {
    let l = ell as f64;
    l * (l + 1.0) * units.kinetic()
}

fn radial_potential(grid: RadialGrid, units: &UnitsConvention, ell: u32, smooth: impl Fn(f64) -> f64, c_minus1: f64) -> Result<GridFunction> {
    let b = barrier(units, ell);
    if b == 0.0 && c_minus1 == 0.0 {
        return Ok(GridFunction::from_fn(grid, smooth));
    }
    let barrier_term = move |r: f64| if b == 0.0 { 0.0 } else { b / (r * r) };
    GridFunction::from_fn(grid, |r| smooth(r) + c_minus1 / r + barrier_term(r)).with_pole(origin_window(&grid, b, c_minus1))
}

/// Oscillator superpotential `√(m/2) w r − (a+1) κ / r`.
fn oscillator_w(units: UnitsConvention, w: f64) -> SuperpotentialFamily {
    Arc::new(move |a: f64, grid: &RadialGrid| {
        let slope = (units.mass / 2.0).sqrt() * w;
        let c = -(a + 1.0) * units.kappa();
        GridFunction::from_fn(*grid, |r| slope * r + c / r)
            .with_pole(origin_window(grid, 0.0, c))
            .expect("origin window fits any half-line grid")
    })
}

/// Dispatches to the constructor named by `kind`.
pub fn build_state(kind: SystemKind, units: UnitsConvention, grid: RadialGrid) -> Result<UnperturbedState> {
    match kind {
        SystemKind::RadialOscillator { w, ell } => radial_oscillator(units, w, ell, grid),
        SystemKind::CoulombGround { ell } => coulomb_ground(units, ell, grid),
        SystemKind::Oscillator1dN1 { w } => oscillator_1d_n1(units, w, grid),
        SystemKind::InfiniteWell { n } => infinite_well(units, n, grid),
    }
}

/// Radial harmonic oscillator ground state of angular momentum `ell`.
pub fn radial_oscillator(units: UnitsConvention, w: f64, ell: u32, grid: RadialGrid) -> Result<UnperturbedState> {
    require_half_line(&grid)?;
    if !(w > 0.0 && w.is_finite()) {
        return Err(Error::InvalidGrid(format!("angular frequency must be positive, got {w}")));
    }
    let l = ell as f64;
    let (m, hbar) = (units.mass, units.hbar);
    let chi = normalize(&GridFunction::from_fn(grid, |r| r.powi(ell as i32 + 1) * (-m * w * r * r / (2.0 * hbar)).exp()))?;
    let family = oscillator_w(units, w);
    let w_super = family(l, &grid);
    let v0 = radial_potential(grid, &units, ell, |r| 0.5 * m * w * w * r * r, 0.0)?;
    let spacing = 2.0 * hbar * w;
    let rule = ShapeInvarianceRule {
        param_name: "ell".into(),
        a0: l,
        shift: Arc::new(|a| a + 1.0),
        remainder: Arc::new(move |_| spacing),
        superpotential: Some(family),
    };
    Ok(UnperturbedState {
        kind: SystemKind::RadialOscillator { w, ell },
        units,
        grid,
        n: 0,
        ell,
        epsilon: (l + 1.5) * hbar * w,
        chi,
        w_super,
        v0,
        nodes: Vec::new(),
        shape_rule: Some(rule),
    })
}

/// Hydrogen-like ground state of angular momentum `ell`.
pub fn coulomb_ground(units: UnitsConvention, ell: u32, grid: RadialGrid) -> Result<UnperturbedState> {
    require_half_line(&grid)?;
    let l = ell as f64;
    let (m, hbar, e2) = (units.mass, units.hbar, units.charge_sq);
    let decay = m * e2 / ((l + 1.0) * hbar * hbar);
    let chi = normalize(&GridFunction::from_fn(grid, |r| r.powi(ell as i32 + 1) * (-decay * r).exp()))?;
    let family: SuperpotentialFamily = Arc::new(move |a: f64, grid: &RadialGrid| {
        let level = (m / 2.0).sqrt() * e2 / ((a + 1.0) * hbar);
        let c = -(a + 1.0) * units.kappa();
        GridFunction::from_fn(*grid, |r| level + c / r)
            .with_pole(origin_window(grid, 0.0, c))
            .expect("origin window fits any half-line grid")
    });
    let w_super = family(l, &grid);
    let v0 = radial_potential(grid, &units, ell, |_| 0.0, -e2)?;
    let rydberg = m * e2 * e2 / (2.0 * hbar * hbar);
    let rule = ShapeInvarianceRule {
        param_name: "ell".into(),
        a0: l,
        shift: Arc::new(|a| a + 1.0),
        remainder: Arc::new(move |a| rydberg * (1.0 / (a * a) - 1.0 / ((a + 1.0) * (a + 1.0)))),
        superpotential: Some(family),
    };
    Ok(UnperturbedState {
        kind: SystemKind::CoulombGround { ell },
        units,
        grid,
        n: 0,
        ell,
        epsilon: -rydberg / ((l + 1.0) * (l + 1.0)),
        chi,
        w_super,
        v0,
        nodes: Vec::new(),
        shape_rule: Some(rule),
    })
}

/// First excited oscillator state `χ = N r exp(−m w r²/2ħ)` restricted to the
/// half line, with its node at the origin.
pub fn oscillator_1d_n1(units: UnitsConvention, w: f64, grid: RadialGrid) -> Result<UnperturbedState> {
    require_half_line(&grid)?;
    if !(w > 0.0 && w.is_finite()) {
        return Err(Error::InvalidGrid(format!("angular frequency must be positive, got {w}")));
    }
    let (m, hbar) = (units.mass, units.hbar);
    let chi = normalize(&GridFunction::from_fn(grid, |r| r * (-m * w * r * r / (2.0 * hbar)).exp()))?;
    let w_super = oscillator_w(units, w)(0.0, &grid);
    let v0 = GridFunction::from_fn(grid, |r| 0.5 * m * w * w * r * r);
    Ok(UnperturbedState {
        kind: SystemKind::Oscillator1dN1 { w },
        units,
        grid,
        n: 1,
        ell: 0,
        epsilon: 1.5 * hbar * w,
        chi,
        w_super,
        v0,
        nodes: vec![0.0],
        shape_rule: None,
    })
}

/// State `n` of the infinite well on `[−π/2, π/2]`.
pub fn infinite_well(units: UnitsConvention, n: u32, grid: RadialGrid) -> Result<UnperturbedState> {
    let tol = 1e-12;
    if grid.domain_kind != DomainKind::Interval || (grid.r_min + PI / 2.0).abs() > tol || (grid.r_max - PI / 2.0).abs() > tol {
        return Err(Error::InvalidGrid("the infinite well needs an interval grid on [-pi/2, pi/2]".into()));
    }
    let k = (n + 1) as f64;
    let even = n % 2 == 0;
    let kappa = units.kappa();
    let chi = normalize(&GridFunction::from_fn(grid, |r| if even { (k * r).cos() } else { (k * r).sin() }))?;
    let mut w_super = GridFunction::from_fn(grid, |r| {
        if even {
            kappa * k * (k * r).tan()
        } else {
            -kappa * k / (k * r).tan()
        }
    });
    // zeros of χ sit at r = (j + (1 if even)/2)·π/k
    let offset = if even { 0.5 } else { 0.0 };
    let mut zeros = Vec::new();
    let lo = (-(k / 2.0) - offset).floor() as i64 - 1;
    let hi = ((k / 2.0) - offset).ceil() as i64 + 1;
    for j in lo..=hi {
        let z = (j as f64 + offset) * PI / k;
        if z >= -PI / 2.0 - tol && z <= PI / 2.0 + tol {
            zeros.push(z.clamp(-PI / 2.0, PI / 2.0));
        }
    }
    let half_width = crate::foundation::WINDOW_SPACINGS * grid.spacing;
    for &z in &zeros {
        w_super.add_pole(PoleWindow::new(z, half_width, 0.0, -kappa))?;
    }
    let nodes: Vec<f64> = zeros.into_iter().filter(|z| z.abs() < PI / 2.0 - tol).collect();
    Ok(UnperturbedState {
        kind: SystemKind::InfiniteWell { n },
        units,
        grid,
        n: n as usize,
        ell: 0,
        epsilon: units.kinetic() * k * k,
        chi,
        w_super,
        v0: GridFunction::zeros(grid),
        nodes,
        shape_rule: None,
    })
}

impl UnperturbedState {
    pub fn kappa(&self) -> f64 {
        self.units.kappa()
    }

    /// Points outside every window of `W` and `V₀` and away from the grid ends.
    pub fn interior_mask(&self) -> Vec<bool> {
        let n = self.grid.n_points;
        let w_mask = self.w_super.valid_mask();
        let v_mask = self.v0.valid_mask();
        (0..n)
            .map(|i| i >= ENDPOINT_BUFFER && i + ENDPOINT_BUFFER < n && w_mask[i] && v_mask[i])
            .collect()
    }

    /// `W² − κW′ − (V₀ − ε)` pointwise.
    pub fn riccati_residual(&self) -> GridFunction {
        let dw = derivative(&self.w_super);
        let kappa = self.kappa();
        let values = (0..self.grid.n_points)
            .map(|i| {
                let w = self.w_super.values[i];
                w * w - kappa * dw.values[i] - (self.v0.values[i] - self.epsilon)
            })
            .collect();
        GridFunction { grid: self.grid, values, poles: self.w_super.poles.clone() }
    }

    pub fn max_riccati_residual(&self) -> f64 {
        self.riccati_residual().max_abs_where(&self.interior_mask())
    }

    /// Checks normalization, node count and the Riccati identity.
    pub fn validate(&self, residual_tol: f64) -> Result<()> {
        let norm = quad(&self.chi.map(|_, v| v * v))?;
        if (norm - 1.0).abs() > 1e-8 {
            return Err(Error::StateMismatch(format!("chi has norm {norm}")));
        }
        let boundary_nodes = self.nodes.iter().filter(|&&z| z <= self.grid.r_min || z >= self.grid.r_max).count();
        let found = interior_sign_changes(&self.chi) + boundary_nodes;
        if found != self.n || self.nodes.len() != self.n {
            return Err(Error::NodeMismatch { expected: self.n, found });
        }
        let res = self.max_riccati_residual();
        if !(res < residual_tol) {
            return Err(Error::StateMismatch(format!("Riccati residual {res:.3e} exceeds {residual_tol:.1e}")));
        }
        Ok(())
    }

    /// Full potential `V₀ + ΔV` on the state's grid.
    pub fn perturbed_potential(&self, dv: &GridFunction) -> Result<GridFunction> {
        self.v0.add(dv)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::foundation::log_derivative_superpotential;

    fn half_line(r_max: f64, n: usize) -> RadialGrid {
        RadialGrid::uniform(DomainKind::HalfLine, 0.0, r_max, n).unwrap()
    }

    fn box_grid() -> RadialGrid {
        RadialGrid::uniform(DomainKind::Interval, -PI / 2.0, PI / 2.0, 2001).unwrap()
    }

    #[test]
    fn oscillator_energies() {
        let u = UnitsConvention::oscillator();
        let s0 = radial_oscillator(u, 1.0, 0, half_line(20.0, 4001)).unwrap();
        assert_eq!(s0.epsilon, 1.5);
        let s2 = radial_oscillator(u, 1.0, 2, half_line(20.0, 4001)).unwrap();
        assert_eq!(s2.epsilon, 3.5);
        for s in [&s0, &s2] {
            s.validate(1e-8).unwrap();
        }
    }

    #[test]
    fn oscillator_ladder_reproduces_unperturbed_levels() {
        let u = UnitsConvention::oscillator();
        for ell in [0, 1, 2] {
            let s = radial_oscillator(u, 1.0, ell, half_line(20.0, 4001)).unwrap();
            let rule = s.shape_rule.as_ref().unwrap();
            let a = rule.parameters(5);
            let mut e = s.epsilon;
            for n in 1..=5 {
                e += (rule.remainder)(a[n]);
                assert!((e - (2.0 * n as f64 + ell as f64 + 1.5)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn coulomb_ground_states() {
        let u = UnitsConvention::atomic();
        let s = coulomb_ground(u, 0, half_line(40.0, 4001)).unwrap();
        assert_eq!(s.epsilon, -0.5);
        assert_eq!(interior_sign_changes(&s.chi), 0);
        s.validate(1e-8).unwrap();
        let s1 = coulomb_ground(u, 1, half_line(60.0, 6001)).unwrap();
        assert_eq!(s1.epsilon, -0.125);
        s1.validate(1e-8).unwrap();
        let norm = quad(&s.chi.map(|_, v| v * v)).unwrap();
        assert!((norm - 1.0).abs() < 1e-8);
    }

    #[test]
    fn one_dimensional_first_excited_state() {
        let s = oscillator_1d_n1(UnitsConvention::half_unit(), 1.0, half_line(20.0, 4001)).unwrap();
        assert_eq!(s.epsilon, 1.5);
        assert_eq!(s.nodes, vec![0.0]);
        assert!(s.max_riccati_residual() < 1e-6);
        s.validate(1e-6).unwrap();
        let p = s.w_super.poles[0];
        assert_eq!((p.center, p.c_minus1), (0.0, -1.0));
    }

    #[test]
    fn well_states() {
        let u = UnitsConvention::half_unit();
        let s = infinite_well(u, 2, box_grid()).unwrap();
        assert_eq!(s.epsilon, 9.0);
        assert_eq!(s.nodes.len(), 2);
        s.validate(1e-6).unwrap();
        let mask = s.w_super.valid_mask();
        for (i, r) in box_grid().points().enumerate().filter(|&(i, _)| mask[i]) {
            assert!((s.w_super.values[i] - 3.0 * (3.0 * r).tan()).abs() < 1e-9);
        }
        let s0 = infinite_well(u, 0, box_grid()).unwrap();
        assert!(s0.nodes.is_empty());
        let c = (2.0 / PI).sqrt();
        for (i, r) in box_grid().points().enumerate() {
            assert!((s0.chi.values[i] - c * r.cos()).abs() < 1e-10);
        }
        s0.validate(1e-6).unwrap();
        infinite_well(u, 3, box_grid()).unwrap().validate(1e-6).unwrap();
    }

    #[test]
    fn well_rejects_wrong_interval() {
        let g = RadialGrid::uniform(DomainKind::Interval, -1.0, 1.0, 2001).unwrap();
        assert!(infinite_well(UnitsConvention::half_unit(), 2, g).is_err());
    }

    #[test]
    fn windows_sit_on_nodes() {
        let u = UnitsConvention::half_unit();
        let s = infinite_well(u, 2, box_grid()).unwrap();
        for node in &s.nodes {
            assert!(s.w_super.poles.iter().any(|p| (p.center - node).abs() <= s.grid.spacing));
        }
    }

    #[test]
    fn log_derivative_reproduces_catalog_superpotentials() {
        let states = [
            radial_oscillator(UnitsConvention::oscillator(), 1.0, 2, half_line(20.0, 4001)).unwrap(),
            coulomb_ground(UnitsConvention::atomic(), 0, half_line(40.0, 4001)).unwrap(),
            oscillator_1d_n1(UnitsConvention::half_unit(), 1.0, half_line(20.0, 4001)).unwrap(),
            infinite_well(UnitsConvention::half_unit(), 2, box_grid()).unwrap(),
        ];
        for s in &states {
            let w = log_derivative_superpotential(&s.chi, &s.units).unwrap();
            let mask = s.interior_mask();
            let wm = w.valid_mask();
            for i in 0..s.grid.n_points {
                if mask[i] && wm[i] {
                    let d = (w.values[i] - s.w_super.values[i]).abs();
                    assert!(d < 1e-6, "{:?} at r={} diff {d}", s.kind, s.grid.r(i));
                }
            }
        }
    }
}
