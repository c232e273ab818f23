mod common;

use num_traits::Zero;
use proptest::prelude::*;

use common::{point, poly, rational};
use kahan_darboux::poly::linalg::rank_rational;
use kahan_darboux::poly::{
    nullspace_over_qh, parse_poly, poly_gcd, to_canonical_text, LinearSystem, MultiPoly, Rational,
};

fn h_poly() -> impl Strategy<Value = MultiPoly> {
    prop::collection::vec(-4i64..=4, 0..=3).prop_map(|c| {
        let c: Vec<Rational> = c.into_iter().map(|x| Rational::from_integer(x.into())).collect();
        MultiPoly::from_univariate(1, 1, &c)
    })
}

fn h_matrix() -> impl Strategy<Value = (usize, Vec<Vec<MultiPoly>>)> {
    (1usize..=4, 1usize..=5).prop_flat_map(|(rows, cols)| {
        (Just(cols), prop::collection::vec(prop::collection::vec(h_poly(), cols), rows))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_operations_commute_with_evaluation(
        a in poly(3, 3, 6, true),
        b in poly(3, 3, 6, true),
        v in point(4),
    ) {
        prop_assert_eq!((&a + &b).eval(&v), a.eval(&v) + b.eval(&v));
        prop_assert_eq!((&a - &b).eval(&v), a.eval(&v) - b.eval(&v));
        prop_assert_eq!((&a * &b).eval(&v), a.eval(&v) * b.eval(&v));
    }

    #[test]
    fn ring_axioms(a in poly(2, 2, 5, true), b in poly(2, 2, 5, true), c in poly(2, 2, 5, true)) {
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert!((&a - &a).is_zero());
    }

    #[test]
    fn gcd_divides_both(a in poly(2, 3, 5, true), b in poly(2, 3, 5, true)) {
        prop_assume!(!a.is_zero() && !b.is_zero());
        let g = poly_gcd(&a, &b);
        prop_assert!(g.divides(&a));
        prop_assert!(g.divides(&b));
    }

    #[test]
    fn gcd_of_common_multiples(
        a in poly(2, 2, 4, true),
        b in poly(2, 2, 4, true),
        g in poly(2, 2, 3, true),
    ) {
        prop_assume!(!a.is_zero() && !b.is_zero() && !g.is_zero());
        let lhs = poly_gcd(&(&a * &g), &(&b * &g));
        let rhs = &poly_gcd(&a, &b) * &g;
        prop_assert_eq!(lhs.normalized(), rhs.normalized());
    }

    #[test]
    fn nullspace_certificate((cols, m) in h_matrix(), hs in prop::collection::vec(rational(), 3)) {
        let sys = LinearSystem::new(1, cols, m.clone(), None).unwrap();
        let basis = nullspace_over_qh(&sys);
        for w in &basis {
            for r in sys.apply(w) {
                prop_assert!(r.is_zero());
            }
            prop_assert!(w.iter().any(|e| !e.is_zero()));
        }
        // generic rank over Q(h): the largest rank over a few specializations,
        // plus one extra point far from the small sample values
        let mut rank = 0;
        for h in hs.iter().chain([&Rational::from_integer(1009.into())]) {
            let numeric: Vec<Vec<Rational>> =
                m.iter().map(|row| row.iter().map(|e| e.eval(&[Rational::zero(), h.clone()])).collect()).collect();
            rank = rank.max(rank_rational(&numeric, cols));
        }
        prop_assert_eq!(basis.len(), cols - rank);
    }

    #[test]
    fn print_parse_round_trip(p in poly(3, 3, 8, true)) {
        let text = to_canonical_text(&p);
        let back = parse_poly(&text, 3).unwrap();
        prop_assert_eq!(&back, &p);
        prop_assert_eq!(to_canonical_text(&back), text);
    }
}
