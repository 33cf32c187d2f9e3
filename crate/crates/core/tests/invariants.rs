use std::sync::Arc;

use hermheat_core::hermite::{hermite_function, Grid, SpectralField, SpectralPlan};
use hermheat_core::propagator::{apply_semigroup, semigroup_multipliers, FractionalOrder};
use hermheat_core::{lq_norm, luxemburg_norm, PhysicalField, YoungFunction};
use proptest::prelude::*;

fn field(dim: usize, n: usize, coeffs: &[f64]) -> SpectralField<f64> {
    let mut c = SpectralField::zeros(dim, n).unwrap();
    for (slot, v) in c.coeffs_mut().iter_mut().zip(coeffs.iter().cycle()) {
        *slot = *v;
    }
    c
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn transform_round_trip(coeffs in prop::collection::vec(-1.0f64..1.0, 1..40), dim in 1usize..=2, n in 2usize..16) {
        let c = field(dim, n, &coeffs);
        let plan = SpectralPlan::new(Arc::new(Grid::gauss_hermite(dim, 2 * n + 4).unwrap()), n);
        let f = plan.inverse(&c).unwrap();
        prop_assert!(plan.forward(&f, n).unwrap().distance(&c).unwrap() <= 1e-10);
        let quad = f.grid().integrate_map(f.values(), |v| v * v).sqrt();
        prop_assert!((quad - c.l2_norm()).abs() <= 1e-8);
    }

    #[test]
    fn multipliers_are_contractive(t in 0.0f64..20.0, beta in 0.05f64..2.0, dim in 1usize..=2) {
        let m = semigroup_multipliers(dim, 40, t, FractionalOrder::new(beta).unwrap()).unwrap();
        prop_assert!(m.iter().all(|&v| v > 0.0 || t > 0.0));
        prop_assert!(m.iter().all(|&v| v <= 1.0));
        prop_assert!(m.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn semigroup_does_not_grow_l2(coeffs in prop::collection::vec(-1.0f64..1.0, 1..30), t in 0.0f64..3.0, beta in 0.1f64..1.0) {
        let c = field(1, 20, &coeffs);
        let out = apply_semigroup(&c, t, FractionalOrder::new(beta).unwrap()).unwrap();
        prop_assert!(out.l2_norm() <= c.l2_norm() * (-t).exp() + 1e-15);
    }

    #[test]
    fn power_young_function_is_lebesgue(k in 0usize..8, q in 1.0f64..6.0, scale in 0.1f64..5.0) {
        let grid = Arc::new(Grid::uniform(1, 14.0, 2801).unwrap());
        let f = PhysicalField::sample(grid, |x| scale * hermite_function(k, x[0])).unwrap();
        let lux = luxemburg_norm(&f, YoungFunction::power(q).unwrap()).unwrap().value;
        let lq = lq_norm(&f, q).unwrap().value;
        prop_assert!(((lux - lq) / lq).abs() <= 1e-7);
    }
}
