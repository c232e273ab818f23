mod common;

use proptest::prelude::*;

use common::poly;
use kahan_darboux::ode::parse_ode;
use kahan_darboux::poly::{parse_poly, MultiPoly, Rational};
use kahan_darboux::verify::{check_integral_drift, exact_float_gap, step_halving_ratio, ProductForm};

fn small_point(slots: usize) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec((-4i64..=4, 1i64..=4).prop_map(|(n, d)| Rational::new(n.into(), d.into())), slots)
}

fn form(src: &[(&str, i64)], n: usize) -> ProductForm {
    let p_bars: Vec<MultiPoly> = src.iter().map(|(s, _)| parse_poly(s, n).unwrap()).collect();
    let alpha: Vec<Rational> = src.iter().map(|(_, a)| Rational::from_integer((*a).into())).collect();
    ProductForm::new(&p_bars, &alpha)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn exact_and_float_evaluation_agree(p in poly(3, 2, 5, true), x in small_point(4)) {
        prop_assert!(exact_float_gap(&p, &x) < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// `x' = y, y' = -w^2 x` conserves `w^2 x^2 + y^2`.
    #[test]
    fn oscillator_energy_halves_like_rk4(w in 1i64..=3, x0 in 0.2f64..1.0, y0 in -1.0f64..1.0) {
        let ode = parse_ode(&format!("x' = y\ny' = -{}*x\n", w * w)).unwrap();
        let q = ProductForm::new(&[parse_poly(&format!("{}*x1^2 + x2^2", w * w), 2).unwrap()], &[Rational::from_integer(1.into())]);
        let ratio = step_halving_ratio(&ode, &q, 0.0, &[x0, y0], 1.0, 0.05).unwrap();
        prop_assert!((8.0..=32.0).contains(&ratio), "ratio {}", ratio);
    }
}

#[test]
fn example_integrals_halve_like_rk4() {
    let ode = parse_ode("x' = 2 - 2*x + x*z\ny' = -y + y*z\nz' = -y - 3*z + z^2\n").unwrap();
    let i1 = form(&[("x2", 2), ("x2 - x3 + 3", -1), ("x1 + x2 + x3 - 1", -1)], 3);
    let i2 = form(&[("x2 + 2*x3", 1), ("x2 - x3 + 3", 1), ("x2", -1), ("x1 + x2 + x3 - 1", -1)], 3);
    let x0 = [0.3, 0.4, 0.5];
    for q in [&i1, &i2] {
        let ratio = step_halving_ratio(&ode, q, 0.0, &x0, 1.0, 0.02).unwrap();
        assert!((8.0..=32.0).contains(&ratio), "ratio {ratio}");
        assert!(check_integral_drift(&ode, q, &x0, 1.0, 1e-3).unwrap() <= 1e-8);
    }
}

#[test]
fn exponential_relation_halves_like_rk4() {
    let ode = parse_ode("x' = 2 - 2*x + x*z\ny' = -y + y*z\nz' = -y - 3*z + z^2\n").unwrap();
    let q = form(&[("x2 - x3 + 3", 1), ("x2 + 2*x3", -1)], 3);
    let ratio = step_halving_ratio(&ode, &q, 3.0, &[0.3, 0.4, 0.5], 1.0, 0.02).unwrap();
    assert!((8.0..=32.0).contains(&ratio), "ratio {ratio}");
}
