mod common;

use proptest::prelude::*;

use common::{poly, quadratic_ode};
use kahan_darboux::factor::{factor_irreducible, is_irreducible, FactorBasis, FactorConfig, Irreducibility};
use kahan_darboux::kahan::{build_kahan_map, jacobian_determinant};
use kahan_darboux::poly::{poly_gcd, Monomial, MultiPoly, Rational, RationalFunction};

/// `c * x_v + g` with `g` free of `x_v` and `c` a nonzero constant: irreducible.
fn linear_in_one(nvars: usize) -> impl Strategy<Value = MultiPoly> {
    (0..=nvars, 1i64..=4, poly(nvars, 2, 3, true)).prop_map(move |(v, c, g)| {
        let g = MultiPoly::from_terms(nvars, g.terms().filter(|(m, _)| m.exp(v) == 0).map(|(m, c)| (m.clone(), c.clone())));
        let mut p = g;
        p.add_term(Monomial::var(nvars + 1, v, 1), Rational::from_integer(c.into()));
        p
    })
}

fn sorted_normalized(fs: &[(MultiPoly, u32)]) -> Vec<(MultiPoly, u32)> {
    let mut v: Vec<(MultiPoly, u32)> = fs.iter().map(|(f, m)| (f.normalized(), *m)).collect();
    v.sort();
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reconstruction(ps in prop::collection::vec((poly(2, 2, 3, true), 1u32..=2), 1..=3), unit in 1i64..=6) {
        let mut target = MultiPoly::constant(2, Rational::from_integer(unit.into()));
        for (p, e) in &ps {
            target = &target * &p.pow(*e);
        }
        prop_assume!(!target.is_zero());
        let f = factor_irreducible(&target).unwrap();
        prop_assert_eq!(f.expand(2), target);
    }

    #[test]
    fn factors_are_pairwise_coprime(ps in prop::collection::vec(poly(2, 2, 3, true), 1..=3)) {
        let target = ps.iter().fold(MultiPoly::one(2), |acc, p| &acc * p);
        prop_assume!(!target.is_zero());
        let f = factor_irreducible(&target).unwrap();
        for i in 0..f.factors.len() {
            for j in i + 1..f.factors.len() {
                prop_assert!(poly_gcd(&f.factors[i].0, &f.factors[j].0).is_constant());
            }
        }
    }

    #[test]
    fn recovers_planted_factors(fs in prop::collection::vec(linear_in_one(2), 2..=4)) {
        prop_assume!(fs.iter().all(|f| !f.is_constant()));
        let target = fs.iter().fold(MultiPoly::one(2), |acc, p| &acc * p);
        let mut expected: Vec<(MultiPoly, u32)> = Vec::new();
        for f in &fs {
            let n = f.normalized();
            match expected.iter_mut().find(|(g, _)| *g == n) {
                Some(e) => e.1 += 1,
                None => expected.push((n, 1)),
            }
        }
        let got = factor_irreducible(&target).unwrap();
        prop_assert_eq!(sorted_normalized(&got.factors), sorted_normalized(&expected));
        for (f, _) in &got.factors {
            prop_assert!(matches!(is_irreducible(f, 8), Irreducibility::Irreducible));
        }
    }

    #[test]
    fn factor_basis_reconstructs(n in poly(2, 2, 4, true), d in poly(2, 2, 4, true)) {
        prop_assume!(!n.is_zero() && !d.is_zero());
        let r = RationalFunction::new(n, d).unwrap();
        let basis = FactorBasis::of(&r, &FactorConfig::default()).unwrap();
        prop_assert!(basis.reconstructs(&r));
    }

    #[test]
    fn hinted_basis_matches_plain(ode in quadratic_ode(2)) {
        let map = build_kahan_map(&ode).unwrap();
        let jac = jacobian_determinant(&map);
        let cfg = FactorConfig::default();
        let plain = FactorBasis::of(&jac.j, &cfg).unwrap();
        let hinted = FactorBasis::of_with_hints(&jac.j, std::slice::from_ref(&map.common_den), &cfg).unwrap();
        prop_assert_eq!(&hinted, &plain);
        prop_assert!(hinted.reconstructs(&jac.j));
    }
}
