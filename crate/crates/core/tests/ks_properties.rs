use proptest::prelude::*;
use susy_pert::engine::{dw_from_ks_phi, ks_phi_from_dw};
use susy_pert::foundation::{DomainKind, GridFunction, RadialGrid, UnitsConvention};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ks_round_trip(a in -1.0f64..1.0, b in -1.0f64..1.0, c in 0.2f64..2.0) {
        let g = RadialGrid::uniform(DomainKind::Interval, 0.0, 4.0, 801).unwrap();
        let units = UnitsConvention::half_unit();
        let dw = GridFunction::from_fn(g, |r| a + b * (c * r).sin());
        let back = dw_from_ks_phi(&ks_phi_from_dw(&dw, &units).unwrap(), &units);
        let dev = (2..g.n_points - 2).map(|i| (back.values[i] - dw.values[i]).abs()).fold(0.0, f64::max);
        prop_assert!(dev < 1e-6, "{}", dev);
    }
}
