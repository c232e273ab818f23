use std::fmt;

use num_traits::Zero;

use super::gcd::poly_gcd;
use super::multipoly::MultiPoly;
use super::Rational;
use crate::error::{Error, Result};

/// Quotient of two polynomials in lowest terms.
///
/// The denominator is primitive over Z with a positive graded-lex leading
/// coefficient, so equal functions have identical representations.
#[derive(Clone, PartialEq, Eq)]
pub struct RationalFunction {
    num: MultiPoly,
    den: MultiPoly,
}

impl RationalFunction {
    pub fn new(num: MultiPoly, den: MultiPoly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::InvalidInput("zero denominator".into()));
        }
        if num.is_zero() {
            return Ok(Self::from_poly(MultiPoly::zero(num.nvars())));
        }
        let g = poly_gcd(&num, &den);
        let (num, den) = if g.is_constant() {
            (num, den)
        } else {
            (
                num.exact_div(&g).expect("gcd divides"),
                den.exact_div(&g).expect("gcd divides"),
            )
        };
        Ok(Self::normalize_unit(num, den))
    }

    /// Reduce `num / prod(parts)` using a gcd against each part separately.
    ///
    /// Equivalent to [`RationalFunction::new`] on the expanded product, but each gcd
    /// only involves one small part of the denominator.
    pub fn with_factored_den(mut num: MultiPoly, parts: &[MultiPoly]) -> Result<Self> {
        let mut den = MultiPoly::one(num.nvars());
        for part in parts {
            if part.is_zero() {
                return Err(Error::InvalidInput("zero denominator".into()));
            }
            let g = poly_gcd(&num, part);
            let rest = if g.is_constant() {
                part.clone()
            } else {
                num = num.exact_div(&g).expect("gcd divides");
                part.exact_div(&g).expect("gcd divides")
            };
            den = &den * &rest;
        }
        if num.is_zero() {
            return Ok(Self::from_poly(num));
        }
        Ok(Self::normalize_unit(num, den))
    }

    fn normalize_unit(num: MultiPoly, den: MultiPoly) -> Self {
        let (u, den) = den.normalize_with_unit();
        RationalFunction {
            num: num.scale(&u.recip()),
            den,
        }
    }

    pub fn from_poly(p: MultiPoly) -> Self {
        let nv = p.nvars();
        RationalFunction {
            num: p,
            den: MultiPoly::one(nv),
        }
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        Self::from_poly(MultiPoly::constant(nvars, c))
    }

    pub fn num(&self) -> &MultiPoly {
        &self.num
    }

    pub fn den(&self) -> &MultiPoly {
        &self.den
    }

    pub fn nvars(&self) -> usize {
        self.num.nvars()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn add(&self, o: &RationalFunction) -> RationalFunction {
        if self.den == o.den {
            return Self::new(&self.num + &o.num, self.den.clone()).expect("nonzero den");
        }
        Self::new(
            &(&self.num * &o.den) + &(&o.num * &self.den),
            &self.den * &o.den,
        )
        .expect("nonzero den")
    }

    pub fn sub(&self, o: &RationalFunction) -> RationalFunction {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> RationalFunction {
        RationalFunction {
            num: -&self.num,
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, o: &RationalFunction) -> RationalFunction {
        Self::new(&self.num * &o.num, &self.den * &o.den).expect("nonzero den")
    }

    pub fn inv(&self) -> Result<RationalFunction> {
        Self::new(self.den.clone(), self.num.clone())
    }

    pub fn div(&self, o: &RationalFunction) -> Result<RationalFunction> {
        Ok(self.mul(&o.inv()?))
    }

    pub fn pow(&self, e: u32) -> RationalFunction {
        // already coprime, so powers stay coprime
        Self::normalize_unit(self.num.pow(e), self.den.pow(e))
    }

    /// Value at a point, `None` where the denominator vanishes.
    pub fn eval(&self, point: &[Rational]) -> Option<Rational> {
        let d = self.den.eval(point);
        if d.is_zero() {
            None
        } else {
            Some(self.num.eval(point) / d)
        }
    }

    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        self.num.eval_f64(point) / self.den.eval_f64(point)
    }

    pub fn derivative(&self, var: usize) -> RationalFunction {
        let n = &(&self.num.derivative(var) * &self.den) - &(&self.num * &self.den.derivative(var));
        Self::new(n, &self.den * &self.den).expect("nonzero den")
    }

    /// Equality by cross-multiplication, valid for unreduced inputs too.
    pub fn equals_cross(&self, o: &RationalFunction) -> bool {
        (&self.num * &o.den) == (&o.num * &self.den)
    }
}

/// Replace slot `var` of `p` by a rational function.
pub fn substitute(p: &MultiPoly, var: usize, value: &RationalFunction) -> Result<RationalFunction> {
    if var > p.nvars() {
        return Err(Error::InvalidInput(format!("slot {var} out of range")));
    }
    if value.den().is_zero() {
        return Err(Error::InvalidInput("substituted value has zero denominator".into()));
    }
    let coeffs = p.coefficients_in(var);
    let d = coeffs.len() - 1;
    // sum_k c_k a^k b^(d-k) over b^d
    let mut a_pows = vec![MultiPoly::one(p.nvars())];
    let mut b_pows = vec![MultiPoly::one(p.nvars())];
    for k in 1..=d {
        a_pows.push(&a_pows[k - 1] * value.num());
        b_pows.push(&b_pows[k - 1] * value.den());
    }
    let mut num = MultiPoly::zero(p.nvars());
    for (k, c) in coeffs.iter().enumerate() {
        if !c.is_zero() {
            num = &num + &(&(c * &a_pows[k]) * &b_pows[d - k]);
        }
    }
    RationalFunction::new(num, b_pows[d].clone())
}

impl fmt::Debug for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RationalFunction({})", self)
    }
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({}) / ({})", self.num, self.den)
        }
    }
}
