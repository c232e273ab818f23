use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::monomial::Monomial;
use super::Rational;
use crate::error::{Error, Result};

/// Sparse polynomial over the rationals in `x1..xn` and the step parameter `h`.
///
/// `h` always occupies the last exponent slot, so a polynomial over `n` state
/// variables has `n + 1` slots. Terms are kept in graded-lex order with no
/// stored zero coefficients, so structural equality is mathematical equality.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiPoly {
    nvars: usize,
    terms: BTreeMap<Monomial, Rational>,
}

impl MultiPoly {
    pub fn zero(nvars: usize) -> Self {
        MultiPoly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Rational::one())
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(Monomial::one(nvars + 1), c);
        }
        p
    }

    pub fn from_int(nvars: usize, c: i64) -> Self {
        Self::constant(nvars, Rational::from_integer(c.into()))
    }

    /// The variable in slot `index` (`index == nvars` is `h`).
    pub fn var(nvars: usize, index: usize) -> Self {
        assert!(index <= nvars, "slot {index} out of range for {nvars} variables");
        let mut p = Self::zero(nvars);
        p.terms
            .insert(Monomial::var(nvars + 1, index, 1), Rational::one());
        p
    }

    pub fn h(nvars: usize) -> Self {
        Self::var(nvars, nvars)
    }

    pub fn monomial(nvars: usize, m: Monomial, c: Rational) -> Self {
        assert_eq!(m.slots(), nvars + 1);
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    pub fn from_terms<I>(nvars: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (Monomial, Rational)>,
    {
        let mut p = Self::zero(nvars);
        for (m, c) in terms {
            assert_eq!(m.slots(), nvars + 1);
            p.add_term(m, c);
        }
        p
    }

    /// Univariate polynomial `sum coeffs[k] * v^k` in slot `var`.
    pub fn from_univariate(nvars: usize, var: usize, coeffs: &[Rational]) -> Self {
        Self::from_terms(
            nvars,
            coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| (Monomial::var(nvars + 1, var, k as u32), c.clone())),
        )
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn slots(&self) -> usize {
        self.nvars + 1
    }

    pub fn h_slot(&self) -> usize {
        self.nvars
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.constant_value().is_some_and(|c| c.is_one())
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.is_one())
    }

    /// The constant value if the polynomial has no variables.
    pub fn constant_value(&self) -> Option<Rational> {
        if self.is_zero() {
            Some(Rational::zero())
        } else if self.is_constant() {
            self.terms.values().next().cloned()
        } else {
            None
        }
    }

    pub fn constant_term(&self) -> Rational {
        self.terms
            .get(&Monomial::one(self.slots()))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn coeff(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn into_terms(self) -> impl Iterator<Item = (Monomial, Rational)> {
        self.terms.into_iter()
    }

    pub fn leading_term(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().next_back()
    }

    pub fn leading_coeff(&self) -> Rational {
        self.leading_term()
            .map(|(_, c)| c.clone())
            .unwrap_or_else(Rational::zero)
    }

    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    /// Total degree in the state variables only.
    pub fn x_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.x_degree()).max().unwrap_or(0)
    }

    pub fn degree_in(&self, var: usize) -> u32 {
        self.terms.keys().map(|m| m.exp(var)).max().unwrap_or(0)
    }

    pub fn min_degree_in(&self, var: usize) -> u32 {
        self.terms.keys().map(|m| m.exp(var)).min().unwrap_or(0)
    }

    /// Slots that occur with positive exponent in some term.
    pub fn variables(&self) -> Vec<usize> {
        (0..self.slots())
            .filter(|&v| self.terms.keys().any(|m| m.exp(v) > 0))
            .collect()
    }

    pub fn depends_on(&self, var: usize) -> bool {
        self.terms.keys().any(|m| m.exp(var) > 0)
    }

    pub fn is_univariate_in(&self, var: usize) -> bool {
        self.terms
            .keys()
            .all(|m| m.exponents().iter().enumerate().all(|(i, &e)| i == var || e == 0))
    }

    pub fn scale(&self, c: &Rational) -> MultiPoly {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        MultiPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(m, a)| (m.clone(), a * c))
                .collect(),
        }
    }

    pub fn mul_monomial(&self, mono: &Monomial, c: &Rational) -> MultiPoly {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        MultiPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(m, a)| (m.mul(mono), a * c))
                .collect(),
        }
    }

    fn check_compatible(&self, other: &MultiPoly) {
        assert_eq!(
            self.nvars, other.nvars,
            "polynomials over different variable sets"
        );
    }

    pub fn add_ref(&self, other: &MultiPoly) -> MultiPoly {
        self.check_compatible(other);
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub_ref(&self, other: &MultiPoly) -> MultiPoly {
        self.check_compatible(other);
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }

    pub fn mul_ref(&self, other: &MultiPoly) -> MultiPoly {
        self.mul_filtered(other, |_| true)
    }

    /// Product keeping only the monomials accepted by `keep`.
    pub fn mul_filtered<F>(&self, other: &MultiPoly, keep: F) -> MultiPoly
    where
        F: Fn(&Monomial) -> bool,
    {
        self.check_compatible(other);
        if self.is_zero() || other.is_zero() {
            return Self::zero(self.nvars);
        }
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut acc: HashMap<Monomial, Rational> =
            HashMap::with_capacity(small.len() * large.len() / 2 + 1);
        for (ma, ca) in &small.terms {
            for (mb, cb) in &large.terms {
                let m = ma.mul(mb);
                if !keep(&m) {
                    continue;
                }
                let prod = ca * cb;
                match acc.get_mut(&m) {
                    Some(v) => *v += prod,
                    None => {
                        acc.insert(m, prod);
                    }
                }
            }
        }
        MultiPoly {
            nvars: self.nvars,
            terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        }
    }

    pub fn pow(&self, mut e: u32) -> MultiPoly {
        let mut base = self.clone();
        let mut acc = Self::one(self.nvars);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Exact quotient `self / divisor`; fails with `NotDivisible` on a nonzero remainder.
    pub fn exact_div(&self, divisor: &MultiPoly) -> Result<MultiPoly> {
        self.check_compatible(divisor);
        if divisor.is_zero() {
            return Err(Error::InvalidInput("division by the zero polynomial".into()));
        }
        if let Some(c) = divisor.constant_value() {
            return Ok(self.scale(&c.recip()));
        }
        let (lm_d, lc_d) = divisor.leading_term().expect("nonzero");
        let lm_d = lm_d.clone();
        let lc_inv = lc_d.recip();
        let mut rem = self.clone();
        let mut quotient = Self::zero(self.nvars);
        while let Some((lm_r, lc_r)) = rem.leading_term() {
            if !lm_d.divides(lm_r) {
                return Err(Error::NotDivisible);
            }
            let qm = lm_d.quotient_of(lm_r);
            let qc = lc_r * &lc_inv;
            for (m, c) in &divisor.terms {
                rem.add_term(m.mul(&qm), -(c * &qc));
            }
            quotient.add_term(qm, qc);
        }
        Ok(quotient)
    }

    pub fn divides(&self, other: &MultiPoly) -> bool {
        other.exact_div(self).is_ok()
    }

    pub fn derivative(&self, var: usize) -> MultiPoly {
        let mut out = Self::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m.exp(var);
            if e > 0 {
                out.add_term(m.with_exp(var, e - 1), c * Rational::from_integer(e.into()));
            }
        }
        out
    }

    /// Exact evaluation at a point with one value per slot.
    pub fn eval(&self, point: &[Rational]) -> Rational {
        assert_eq!(point.len(), self.slots(), "point has wrong length");
        let powers = PowerCache::new(point, self);
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, &e) in m.exponents().iter().enumerate() {
                if e > 0 {
                    t *= powers.get(i, e);
                }
            }
            acc += t;
        }
        acc
    }

    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        assert_eq!(point.len(), self.slots(), "point has wrong length");
        let mut acc = 0.0;
        for (m, c) in &self.terms {
            let mut t = rational_to_f64(c);
            for (i, &e) in m.exponents().iter().enumerate() {
                if e > 0 {
                    t *= point[i].powi(e as i32);
                }
            }
            acc += t;
        }
        acc
    }

    /// Substitute a rational value for one slot; the slot remains with exponent zero.
    pub fn eval_var(&self, var: usize, value: &Rational) -> MultiPoly {
        let max = self.degree_in(var);
        let mut pw = Vec::with_capacity(max as usize + 1);
        pw.push(Rational::one());
        for k in 1..=max as usize {
            let next = &pw[k - 1] * value;
            pw.push(next);
        }
        let mut out = Self::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m.exp(var) as usize;
            out.add_term(m.with_exp(var, 0), c * &pw[e]);
        }
        out
    }

    /// Coefficients with respect to slot `var`: `self = sum_k out[k] * var^k`.
    pub fn coefficients_in(&self, var: usize) -> Vec<MultiPoly> {
        let d = self.degree_in(var) as usize;
        let mut out = vec![Self::zero(self.nvars); d + 1];
        for (m, c) in &self.terms {
            let e = m.exp(var) as usize;
            out[e].terms.insert(m.with_exp(var, 0), c.clone());
        }
        out
    }

    /// Group terms by their exponents outside `var`, giving univariate coefficient
    /// vectors in `var`.
    pub fn univariate_parts(&self, var: usize) -> BTreeMap<Monomial, Vec<Rational>> {
        let mut out: BTreeMap<Monomial, Vec<Rational>> = BTreeMap::new();
        for (m, c) in &self.terms {
            let e = m.exp(var) as usize;
            let v = out.entry(m.with_exp(var, 0)).or_default();
            if v.len() <= e {
                v.resize(e + 1, Rational::zero());
            }
            v[e] = c.clone();
        }
        out
    }

    /// Coefficient vector in `var` of a polynomial univariate in that slot.
    pub fn to_univariate(&self, var: usize) -> Vec<Rational> {
        debug_assert!(self.is_univariate_in(var));
        let d = self.degree_in(var) as usize;
        let mut out = vec![Rational::zero(); if self.is_zero() { 0 } else { d + 1 }];
        for (m, c) in &self.terms {
            out[m.exp(var) as usize] = c.clone();
        }
        out
    }

    /// Replace slot `var` by the polynomial `value`.
    pub fn substitute_poly(&self, var: usize, value: &MultiPoly) -> MultiPoly {
        self.check_compatible(value);
        let coeffs = self.coefficients_in(var);
        let mut acc = Self::zero(self.nvars);
        for c in coeffs.iter().rev() {
            acc = &(&acc * value) + c;
        }
        acc
    }

    /// Simultaneous substitution of every slot by a polynomial over `target_nvars`
    /// state variables.
    pub fn compose(&self, target_nvars: usize, images: &[MultiPoly]) -> MultiPoly {
        assert_eq!(images.len(), self.slots());
        let mut cache: Vec<Vec<MultiPoly>> = images
            .iter()
            .map(|p| {
                assert_eq!(p.nvars, target_nvars);
                vec![Self::one(target_nvars), p.clone()]
            })
            .collect();
        let mut acc = Self::zero(target_nvars);
        for (m, c) in &self.terms {
            let mut t = Self::constant(target_nvars, c.clone());
            for (i, &e) in m.exponents().iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while cache[i].len() <= e as usize {
                    let next = cache[i].last().unwrap() * &images[i];
                    cache[i].push(next);
                }
                t = &t * &cache[i][e as usize];
            }
            acc = &acc + &t;
        }
        acc
    }

    /// Reinterpret over a different number of state variables, moving slot `i`
    /// to `slot_map[i]`.
    pub fn remap(&self, target_nvars: usize, slot_map: &[usize]) -> MultiPoly {
        assert_eq!(slot_map.len(), self.slots());
        let mut out = Self::zero(target_nvars);
        for (m, c) in &self.terms {
            let mut e = vec![0u32; target_nvars + 1];
            for (i, &k) in m.exponents().iter().enumerate() {
                if k > 0 {
                    e[slot_map[i]] += k;
                }
            }
            out.add_term(Monomial::from_exponents(e), c.clone());
        }
        out
    }

    /// Homogeneous component of total degree `d`.
    pub fn homogeneous_part(&self, d: u32) -> MultiPoly {
        MultiPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() == d)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Coefficient of `h^k`, as a polynomial in the state variables.
    pub fn h_coefficient(&self, k: u32) -> MultiPoly {
        let hs = self.h_slot();
        MultiPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.exp(hs) == k)
                .map(|(m, c)| (m.with_exp(hs, 0), c.clone()))
                .collect(),
        }
    }

    /// Largest monomial dividing every term.
    pub fn monomial_content(&self) -> Monomial {
        let mut it = self.terms.keys();
        match it.next() {
            None => Monomial::one(self.slots()),
            Some(first) => it.fold(first.clone(), |acc, m| acc.gcd(m)),
        }
    }

    pub fn div_monomial(&self, mono: &Monomial) -> MultiPoly {
        MultiPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (mono.quotient_of(m), c.clone()))
                .collect(),
        }
    }

    /// Positive rational `c` such that `self / c` has coprime integer coefficients.
    pub fn content(&self) -> Rational {
        let mut num = BigInt::zero();
        let mut den = BigInt::one();
        for c in self.terms.values() {
            num = num.gcd(c.numer());
            den = den.lcm(c.denom());
        }
        if num.is_zero() {
            Rational::one()
        } else {
            Rational::new(num, den)
        }
    }

    pub fn primitive_part(&self) -> MultiPoly {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(&self.content().recip())
    }

    /// Primitive integer polynomial with positive graded-lex leading coefficient,
    /// together with the unit `u` such that `self = u * normalized`.
    pub fn normalize_with_unit(&self) -> (Rational, MultiPoly) {
        if self.is_zero() {
            return (Rational::one(), self.clone());
        }
        let mut u = self.content();
        if self.leading_coeff().is_negative() {
            u = -u;
        }
        (u.clone(), self.scale(&u.recip()))
    }

    pub fn normalized(&self) -> MultiPoly {
        self.normalize_with_unit().1
    }

    /// Coefficients as integers after multiplying by the lcm of the denominators.
    pub fn clear_denominators(&self) -> (BigInt, MultiPoly) {
        let den = self
            .terms
            .values()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        (den.clone(), self.scale(&Rational::from_integer(den)))
    }

    /// Map over coefficients in place of a generic ring API.
    pub fn map_coeffs<F: Fn(&Rational) -> Rational>(&self, f: F) -> MultiPoly {
        let mut out = Self::zero(self.nvars);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), f(c));
        }
        out
    }
}

struct PowerCache {
    table: Vec<Vec<Rational>>,
}

impl PowerCache {
    fn new(point: &[Rational], p: &MultiPoly) -> Self {
        let table = point
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let d = p.degree_in(i) as usize;
                let mut row = Vec::with_capacity(d + 1);
                row.push(Rational::one());
                for k in 1..=d {
                    let next = &row[k - 1] * v;
                    row.push(next);
                }
                row
            })
            .collect();
        PowerCache { table }
    }

    fn get(&self, i: usize, e: u32) -> &Rational {
        &self.table[i][e as usize]
    }
}

pub fn rational_to_f64(c: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    c.to_f64().unwrap_or(f64::NAN)
}

impl fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MultiPoly({})", self)
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::text::to_canonical_text(self))
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $inner:ident) => {
        impl $tr<&MultiPoly> for &MultiPoly {
            type Output = MultiPoly;
            fn $method(self, rhs: &MultiPoly) -> MultiPoly {
                self.$inner(rhs)
            }
        }
        impl $tr<MultiPoly> for MultiPoly {
            type Output = MultiPoly;
            fn $method(self, rhs: MultiPoly) -> MultiPoly {
                (&self).$inner(&rhs)
            }
        }
        impl $tr<&MultiPoly> for MultiPoly {
            type Output = MultiPoly;
            fn $method(self, rhs: &MultiPoly) -> MultiPoly {
                (&self).$inner(rhs)
            }
        }
        impl $tr<MultiPoly> for &MultiPoly {
            type Output = MultiPoly;
            fn $method(self, rhs: MultiPoly) -> MultiPoly {
                self.$inner(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, add_ref);
forward_binop!(Sub, sub, sub_ref);
forward_binop!(Mul, mul, mul_ref);

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        MultiPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl Neg for MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        -&self
    }
}

/// The four ring operations of the arithmetic layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolyOp {
    Add,
    Sub,
    Mul,
    ExactDiv,
}

pub fn poly_arith(a: &MultiPoly, b: &MultiPoly, op: PolyOp) -> Result<MultiPoly> {
    match op {
        PolyOp::Add => Ok(a + b),
        PolyOp::Sub => Ok(a - b),
        PolyOp::Mul => Ok(a * b),
        PolyOp::ExactDiv => a.exact_div(b),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{parse_poly, q};

    fn p(s: &str, n: usize) -> MultiPoly {
        parse_poly(s, n).unwrap()
    }

    #[test]
    fn add_cancels_to_canonical_form() {
        assert_eq!(p("x1 + 1", 1) + p("x1 - 1", 1), p("2*x1", 1));
        assert!((p("x1*h", 1) - p("h*x1", 1)).is_zero());
    }

    #[test]
    fn exact_div_difference_of_squares() {
        let a = p("x1^2 - h^2", 1);
        let b = p("x1 - h", 1);
        assert_eq!(poly_arith(&a, &b, PolyOp::ExactDiv).unwrap(), p("x1 + h", 1));
        assert_eq!(
            poly_arith(&a, &p("x1 + 2", 1), PolyOp::ExactDiv),
            Err(Error::NotDivisible)
        );
    }

    #[test]
    fn eval_examples() {
        let pt = [q(2), Rational::new(1.into(), 2.into())];
        assert_eq!(p("x1 + h", 1).eval(&pt), Rational::new(5.into(), 2.into()));
        assert_eq!(MultiPoly::zero(1).eval(&pt), q(0));
    }

    #[test]
    fn derivative_and_coefficients() {
        let a = p("3*x1^2*x2 - x2*h + 5", 2);
        assert_eq!(a.derivative(0), p("6*x1*x2", 2));
        assert_eq!(a.derivative(2), p("-x2", 2));
        let cs = a.coefficients_in(1);
        assert_eq!(cs.len(), 2);
        assert_eq!(cs[0], p("5", 2));
        assert_eq!(cs[1], p("3*x1^2 - h", 2));
    }

    #[test]
    fn compose_and_pow() {
        let a = p("x1^2 + h", 1);
        let img = [p("x1 + 1", 1), p("h", 1)];
        assert_eq!(a.compose(1, &img), p("x1^2 + 2*x1 + 1 + h", 1));
        assert_eq!(p("x1 + h", 1).pow(3), p("x1^3 + 3*x1^2*h + 3*x1*h^2 + h^3", 1));
    }

    #[test]
    fn normalization() {
        let (u, n) = p("-2/3*x1 + 4/9", 1).normalize_with_unit();
        assert_eq!(n, p("3*x1 - 2", 1));
        assert_eq!(u, Rational::new((-2).into(), 9.into()));
    }
}
