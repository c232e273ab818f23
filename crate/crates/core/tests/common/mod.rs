#![allow(dead_code)]

use proptest::prelude::*;

use kahan_darboux::ode::QuadraticODE;
use kahan_darboux::poly::{Monomial, MultiPoly, Rational};

pub fn rational() -> impl Strategy<Value = Rational> {
    (-20i64..=20, 1i64..=6).prop_map(|(n, d)| Rational::new(n.into(), d.into()))
}

pub fn point(slots: usize) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec(rational(), slots)
}

/// Polynomial over `nvars` variables; `with_h` also lets terms use the `h` slot.
pub fn poly(nvars: usize, max_exp: u32, max_terms: usize, with_h: bool) -> impl Strategy<Value = MultiPoly> {
    let hmax = if with_h { max_exp } else { 0 };
    let term = (prop::collection::vec(0..=max_exp, nvars), 0..=hmax, -5i64..=5, 1i64..=3);
    prop::collection::vec(term, 0..=max_terms).prop_map(move |terms| {
        let mut p = MultiPoly::zero(nvars);
        for (mut e, hd, n, d) in terms {
            e.push(hd);
            p.add_term(Monomial::from_exponents(e), Rational::new(n.into(), d.into()));
        }
        p
    })
}

/// Quadratic right-hand sides with small integer coefficients.
pub fn quadratic_ode(n: usize) -> impl Strategy<Value = QuadraticODE> {
    let mut monos: Vec<Vec<u32>> = vec![vec![0; n + 1]];
    for i in 0..n {
        let mut e = vec![0; n + 1];
        e[i] = 1;
        monos.push(e);
        for j in i..n {
            let mut e = vec![0; n + 1];
            e[i] += 1;
            e[j] += 1;
            monos.push(e);
        }
    }
    let count = monos.len();
    prop::collection::vec(prop::collection::vec(prop_oneof![3 => Just(0i64), 1 => -3i64..=3], count), n).prop_map(
        move |coeffs| {
            let rhs: Vec<MultiPoly> = coeffs
                .iter()
                .map(|row| {
                    MultiPoly::from_terms(
                        n,
                        monos
                            .iter()
                            .zip(row)
                            .map(|(e, c)| (Monomial::from_exponents(e.clone()), Rational::from_integer((*c).into()))),
                    )
                })
                .collect();
            QuadraticODE::from_rhs(&rhs, (1..=n).map(|i| format!("x{i}")).collect()).unwrap()
        },
    )
}
