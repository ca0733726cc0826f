//! Property-based checks across module boundaries.

use dwlab::grid::{to_physical, to_spectral, Field, Grid};
use dwlab::kernel::kernel_values;
use dwlab::spaces::lp_norm;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernel_identity_holds_everywhere(t in 0.0..200.0f64, xi_sq in 0.0..1e4f64) {
        let kv = kernel_values(t, xi_sq);
        let resid = kv.k_dtt + kv.k_dt + xi_sq * kv.k;
        prop_assert!(resid.abs() < 1e-8, "residual {resid:e} at t={t}, xi_sq={xi_sq}");
    }

    #[test]
    fn kernel_initial_slope_is_unit(xi_sq in 0.0..1e4f64) {
        let kv = kernel_values(0.0, xi_sq);
        prop_assert_eq!(kv.k, 0.0);
        prop_assert_eq!(kv.k_dt, 1.0);
    }

    #[test]
    fn transform_roundtrip(values in prop::collection::vec(-10.0..10.0f64, 32)) {
        let grid = Grid::new(1, 32, 5.0).unwrap();
        let f = Field::new(grid, values).unwrap();
        let back = to_physical(&to_spectral(&f)).unwrap();
        for (a, b) in f.values().iter().zip(back.values()) {
            prop_assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn parseval_any_field(values in prop::collection::vec(-10.0..10.0f64, 64)) {
        let grid = Grid::new(1, 64, 3.0).unwrap();
        let f = Field::new(grid, values).unwrap();
        let phys = lp_norm(&f, 2.0);
        let spec = to_spectral(&f).l2_norm();
        prop_assert!((phys - spec).abs() <= 1e-10 * phys.max(1.0));
    }

    #[test]
    fn norm_scaling(values in prop::collection::vec(-1.0..1.0f64, 32), c in -5.0..5.0f64, q in 1.0..8.0f64) {
        let grid = Grid::new(1, 32, 2.0).unwrap();
        let f = Field::new(grid, values).unwrap();
        let scaled = lp_norm(&f.scaled(c), q);
        let expected = c.abs() * lp_norm(&f, q);
        prop_assert!((scaled - expected).abs() <= 1e-9 * expected.max(1e-9));
    }
}
