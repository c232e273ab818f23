mod common;

use proptest::prelude::*;

use common::{point, quadratic_ode};
use kahan_darboux::kahan::{build_kahan_map, check_time_symmetry, jacobian_determinant, jacobian_normalized};
use kahan_darboux::ode::QuadraticODE;
use kahan_darboux::poly::Rational;

fn small_ode() -> impl Strategy<Value = QuadraticODE> {
    (1usize..=3).prop_flat_map(quadratic_ode)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn defining_identity_holds(ode in small_ode()) {
        let map = build_kahan_map(&ode).unwrap();
        for r in map.defining_residual(&ode) {
            prop_assert!(r.is_zero());
        }
    }

    #[test]
    fn consistent_with_the_flow(ode in small_ode()) {
        let map = build_kahan_map(&ode).unwrap();
        prop_assert_eq!(map.consistency_limit(), ode.rhs());
    }

    #[test]
    fn jacobian_is_one_at_zero_step(ode in small_ode()) {
        let map = build_kahan_map(&ode).unwrap();
        prop_assert!(jacobian_normalized(&jacobian_determinant(&map)));
    }

    #[test]
    fn time_reversal(ode in quadratic_ode(3), pts in prop::collection::vec(point(3), 5), h in 1i64..=4) {
        let map = build_kahan_map(&ode).unwrap();
        let h0 = Rational::new(h.into(), 5.into());
        let rep = check_time_symmetry(&map, &pts, &h0);
        prop_assert!(rep.holds(), "{:?}", rep.failures);
        prop_assert_eq!(rep.checked + rep.skipped.len(), pts.len());
    }
}
