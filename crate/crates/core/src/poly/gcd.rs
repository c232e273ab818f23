//! Multivariate gcd over Q.
//!
//! Variables present in only one operand are removed by taking contents. On the
//! shared variables the gcd is reconstructed by dense evaluation/interpolation
//! in one variable at a time: images are computed recursively, scaled so their
//! lex-leading coefficient matches the gcd of the inputs' leading coefficients,
//! combined by Newton interpolation and accepted after a trial division.

use num_traits::Zero;

use super::multipoly::MultiPoly;
use super::upoly::QPoly;
use super::{Monomial, Rational};

/// Greatest common divisor, primitive over Z with positive graded-lex leading
/// coefficient. `gcd(p, 0)` is `p` normalized; `gcd(0, 0)` is `0`.
pub fn poly_gcd(a: &MultiPoly, b: &MultiPoly) -> MultiPoly {
    assert_eq!(a.nvars(), b.nvars(), "polynomials over different variable sets");
    if a.is_zero() {
        return b.normalized();
    }
    if b.is_zero() {
        return a.normalized();
    }
    let ma = a.monomial_content();
    let mb = b.monomial_content();
    let mg = ma.gcd(&mb);
    let core = gcd_core(&a.div_monomial(&ma), &b.div_monomial(&mb));
    core.mul_monomial(&mg, &Rational::from_integer(1.into()))
        .normalized()
}

/// Gcd of the coefficients of `p` viewed as a polynomial in slot `var`.
pub fn content_in(p: &MultiPoly, var: usize) -> MultiPoly {
    let mut g = MultiPoly::zero(p.nvars());
    for c in p.coefficients_in(var) {
        if c.is_zero() {
            continue;
        }
        g = poly_gcd(&g, &c);
        if g.is_constant() {
            break;
        }
    }
    g
}

fn gcd_core(a: &MultiPoly, b: &MultiPoly) -> MultiPoly {
    let nv = a.nvars();
    let one = MultiPoly::one(nv);
    let mut a = a.clone();
    let mut b = b.clone();
    loop {
        if a.is_constant() || b.is_constant() {
            return one;
        }
        let va = a.variables();
        let vb = b.variables();
        if let Some(&v) = va.iter().find(|v| !vb.contains(v)) {
            a = content_in(&a, v);
            continue;
        }
        if let Some(&v) = vb.iter().find(|v| !va.contains(v)) {
            b = content_in(&b, v);
            continue;
        }
        if va.len() == 1 {
            let v = va[0];
            let g = QPoly::new(a.to_univariate(v)).gcd(&QPoly::new(b.to_univariate(v)));
            return MultiPoly::from_univariate(nv, v, &g.0).normalized();
        }
        return interpolate_gcd(&a, &b, &va);
    }
}

/// Exponents restricted to lex order over all slots (the interpolation slot is
/// always zero in the keys).
fn lex_leading(p: &MultiPoly, w: usize) -> (Monomial, QPoly) {
    let parts = p.univariate_parts(w);
    let (key, coeffs) = parts
        .into_iter()
        .max_by(|x, y| x.0.exponents().cmp(y.0.exponents()))
        .expect("nonzero polynomial");
    (key, QPoly::new(coeffs))
}

fn univariate_content(p: &MultiPoly, w: usize) -> QPoly {
    let mut g = QPoly::zero();
    for (_, coeffs) in p.univariate_parts(w) {
        g = g.gcd(&QPoly::new(coeffs));
        if g.degree() == Some(0) {
            break;
        }
    }
    g
}

fn from_qpoly(nv: usize, w: usize, q: &QPoly) -> MultiPoly {
    MultiPoly::from_univariate(nv, w, &q.0)
}

fn lex_leading_all(p: &MultiPoly) -> (Monomial, Rational) {
    let (m, c) = p
        .terms()
        .max_by(|x, y| x.0.exponents().cmp(y.0.exponents()))
        .expect("nonzero polynomial");
    (m.clone(), c.clone())
}

fn interpolate_gcd(a: &MultiPoly, b: &MultiPoly, vars: &[usize]) -> MultiPoly {
    let nv = a.nvars();
    let w = *vars
        .iter()
        .min_by_key(|&&v| a.degree_in(v).min(b.degree_in(v)))
        .unwrap();

    let ca = univariate_content(a, w);
    let cb = univariate_content(b, w);
    let c = from_qpoly(nv, w, &ca.gcd(&cb));
    let a = a.exact_div(&from_qpoly(nv, w, &ca)).expect("content divides");
    let b = b.exact_div(&from_qpoly(nv, w, &cb)).expect("content divides");

    let (_, la) = lex_leading(&a, w);
    let (_, lb) = lex_leading(&b, w);
    let gamma = la.gcd(&lb);
    let bound = a.degree_in(w).min(b.degree_in(w)) as usize + gamma.degree().unwrap_or(0);

    let mut interp: Option<MultiPoly> = None;
    let mut lead: Option<Monomial> = None;
    let mut points: Vec<Rational> = Vec::new();
    let mut basis = QPoly::one();

    const MAX_POINTS: i64 = 10_000;
    for k in 1..MAX_POINTS {
        // 1, -1, 2, -2, ...
        let t = Rational::from_integer(if k % 2 == 1 { (k + 1) / 2 } else { -(k / 2) }.into());
        if la.eval(&t).is_zero() || lb.eval(&t).is_zero() {
            continue;
        }
        let image = poly_gcd(&a.eval_var(w, &t), &b.eval_var(w, &t));
        if image.is_constant() {
            return c.normalized();
        }
        let (img_lead, img_lc) = lex_leading_all(&image);
        let image = image.scale(&(gamma.eval(&t) / img_lc));

        let stable = match &lead {
            Some(cur) if img_lead.exponents() > cur.exponents() => continue,
            Some(cur) if img_lead.exponents() == cur.exponents() => {
                let h = interp.as_ref().unwrap();
                let at_t = h.eval_var(w, &t);
                let stable = at_t == image;
                if !stable {
                    let scale = basis.eval(&t).recip();
                    let corr = (&image - &at_t).scale(&scale);
                    interp = Some(h + &(&corr * &from_qpoly(nv, w, &basis)));
                }
                stable
            }
            _ => {
                // first point, or every earlier point was unlucky
                interp = Some(image);
                lead = Some(img_lead);
                points.clear();
                basis = QPoly::one();
                false
            }
        };
        points.push(t.clone());
        basis = basis.mul(&QPoly::new(vec![-t, Rational::from_integer(1.into())]));

        if stable || points.len() > bound {
            let h = interp.as_ref().unwrap();
            let cont = univariate_content(h, w);
            let cand = h.exact_div(&from_qpoly(nv, w, &cont)).expect("content divides");
            if cand.divides(&a) && cand.divides(&b) {
                return (&c * &cand).normalized();
            }
        }
    }
    panic!("gcd interpolation did not converge");
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_poly;

    fn p(s: &str) -> MultiPoly {
        parse_poly(s, 3).unwrap()
    }

    #[test]
    fn monomial_gcd() {
        assert_eq!(poly_gcd(&p("x1^2*x2"), &p("x1*x2^2")), p("x1*x2"));
    }

    #[test]
    fn gcd_with_zero_normalizes() {
        assert_eq!(poly_gcd(&p("-4*x1 + 2"), &MultiPoly::zero(3)), p("2*x1 - 1"));
    }

    #[test]
    fn shared_linear_factor() {
        let a = p("(x1 - h)*(x2 + 1)");
        let b = p("(x1 - h)*(x2 - 1)");
        let g = poly_gcd(&a, &b);
        assert_eq!(g, p("x1 - h"));
        assert!(g.divides(&a) && g.divides(&b));
    }

    #[test]
    fn nontrivial_multivariate() {
        let g = p("x1*x2 - 3*h^2 + x3 + 1");
        let a = &g * &p("x1^2 + x3*h - 2");
        let b = &g * &p("x2^3 - x1 + h");
        assert_eq!(poly_gcd(&a, &b), g.normalized());
        let sq = &g * &g;
        assert_eq!(poly_gcd(&(&sq * &p("x1 + 1")), &(&sq * &p("x2"))), sq.normalized());
    }

    #[test]
    fn coprime_in_disjoint_variables() {
        assert!(poly_gcd(&p("x1 + 1"), &p("x2 + h")).is_one());
        let a = p("(x1 + 1)*(x2 + h)");
        assert_eq!(poly_gcd(&a, &p("x2^2*(x3 + 1) + h*x2*(x3 + 1)")), p("x2 + h"));
    }
}
