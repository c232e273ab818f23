//! Irreducible factorization over Q of polynomials in `x1..xn, h`.

mod lift;
pub mod modp;
pub mod zassenhaus;

use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::poly::{content_in, poly_gcd, to_canonical_text, MultiPoly, QPoly, Rational, RationalFunction};
use lift::{factor_squarefree_multi, Image};
use zassenhaus::factor_squarefree_q;

/// Limits beyond which factorization gives up with `ResourceBudgetExceeded`.
#[derive(Clone, Debug)]
pub struct FactorConfig {
    pub seed: u64,
    pub max_total_degree: u32,
    pub max_terms: usize,
}

impl Default for FactorConfig {
    fn default() -> Self {
        FactorConfig {
            seed: 0,
            max_total_degree: 40,
            max_terms: 20_000,
        }
    }
}

/// `unit * prod factor^multiplicity`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    pub unit: Rational,
    pub factors: Vec<(MultiPoly, u32)>,
}

impl Factorization {
    pub fn expand(&self, nvars: usize) -> MultiPoly {
        self.factors
            .iter()
            .fold(MultiPoly::constant(nvars, self.unit.clone()), |acc, (f, m)| &acc * &f.pow(*m))
    }
}

fn sort_factors(v: &mut [(MultiPoly, u32)]) {
    v.sort_by_cached_key(|(f, m)| (f.total_degree(), f.len(), to_canonical_text(f), *m));
}

fn check_budget(p: &MultiPoly, cfg: &FactorConfig) -> Result<()> {
    if p.total_degree() > cfg.max_total_degree {
        return Err(Error::ResourceBudgetExceeded(format!(
            "total degree {} exceeds the factorization cap {}",
            p.total_degree(),
            cfg.max_total_degree
        )));
    }
    if p.len() > cfg.max_terms {
        return Err(Error::ResourceBudgetExceeded(format!(
            "{} terms exceed the factorization cap {}",
            p.len(),
            cfg.max_terms
        )));
    }
    Ok(())
}

/// Split off the monomial content as factors `x_i^e`.
fn monomial_factors(p: &MultiPoly) -> (Vec<(MultiPoly, u32)>, MultiPoly) {
    let m = p.monomial_content();
    let nv = p.nvars();
    let out = m
        .exponents()
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > 0)
        .map(|(i, &e)| (MultiPoly::var(nv, i), e))
        .collect();
    (out, p.div_monomial(&m))
}

/// Squarefree parts of a polynomial with no monomial content, by recursive
/// contents and Yun's algorithm in a main variable.
fn squarefree_rec(p: &MultiPoly, out: &mut Vec<(MultiPoly, u32)>) {
    if p.is_constant() {
        return;
    }
    let v = p.variables()[0];
    let c = content_in(p, v);
    let p = if c.is_constant() {
        p.clone()
    } else {
        squarefree_rec(&c, out);
        p.exact_div(&c).expect("content divides")
    };
    let dp = p.derivative(v);
    let g = poly_gcd(&p, &dp);
    let mut w = p.exact_div(&g).expect("gcd divides");
    let mut y = dp.exact_div(&g).expect("gcd divides");
    let mut z = &y - &w.derivative(v);
    let mut i = 1;
    while !w.is_constant() {
        let g = poly_gcd(&w, &z);
        w = w.exact_div(&g).expect("gcd divides");
        y = z.exact_div(&g).expect("gcd divides");
        z = &y - &w.derivative(v);
        if !g.is_constant() {
            out.push((g.normalized(), i));
        }
        i += 1;
    }
}

/// Squarefree decomposition: pairwise coprime squarefree parts with distinct
/// multiplicities whose product with multiplicities equals `p` up to a unit.
pub fn squarefree_decompose(p: &MultiPoly) -> Vec<(MultiPoly, u32)> {
    assert!(!p.is_zero(), "squarefree decomposition of zero");
    let (mut parts, rest) = monomial_factors(p);
    squarefree_rec(&rest, &mut parts);
    let mut merged: Vec<(MultiPoly, u32)> = Vec::new();
    for (f, m) in parts {
        match merged.iter_mut().find(|(_, k)| *k == m) {
            Some(slot) => slot.0 = (&slot.0 * &f).normalized(),
            None => merged.push((f, m)),
        }
    }
    merged.sort_by_key(|(_, m)| *m);
    merged
}

fn factor_squarefree(p: &MultiPoly, rng: &mut ChaCha8Rng) -> Result<Vec<MultiPoly>> {
    if p.total_degree() <= 1 {
        return Ok(vec![p.normalized()]);
    }
    let vars = p.variables();
    if vars.len() == 1 {
        let v = vars[0];
        let uni = factor_squarefree_q(&QPoly::new(p.to_univariate(v)))?;
        return Ok(uni
            .iter()
            .map(|q| MultiPoly::from_univariate(p.nvars(), v, &q.0).normalized())
            .collect());
    }
    factor_squarefree_multi(p, rng)
}

pub fn factor_irreducible(p: &MultiPoly) -> Result<Factorization> {
    factor_irreducible_with(p, &FactorConfig::default())
}

/// Irreducible factorization over Q in all variables including `h`; factors
/// are primitive with positive leading coefficient.
pub fn factor_irreducible_with(p: &MultiPoly, cfg: &FactorConfig) -> Result<Factorization> {
    if p.is_zero() {
        return Err(Error::InvalidInput("cannot factor the zero polynomial".into()));
    }
    check_budget(p, cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (mut factors, rest) = monomial_factors(p);
    let mut parts = Vec::new();
    squarefree_rec(&rest, &mut parts);
    for (part, mult) in parts {
        for f in factor_squarefree(&part, &mut rng)? {
            match factors.iter_mut().find(|(g, _)| *g == f) {
                Some(slot) => slot.1 += mult,
                None => factors.push((f, mult)),
            }
        }
    }
    sort_factors(&mut factors);
    let nv = p.nvars();
    let prod = factors
        .iter()
        .fold(MultiPoly::one(nv), |acc, (f, m)| &acc * &f.pow(*m));
    let unit = p.leading_coeff() / prod.leading_coeff();
    debug_assert_eq!(prod.scale(&unit), *p);
    Ok(Factorization { unit, factors })
}

/// Like [`factor_irreducible_with`], but first divides out the given
/// irreducible polynomials as often as they go.
pub fn factor_with_known(p: &MultiPoly, known: &[MultiPoly], cfg: &FactorConfig) -> Result<Factorization> {
    if p.is_zero() {
        return Err(Error::InvalidInput("cannot factor the zero polynomial".into()));
    }
    check_budget(p, cfg)?;
    let mut rest = p.clone();
    let mut factors: Vec<(MultiPoly, u32)> = Vec::new();
    for f in known.iter().filter(|f| !f.is_constant()) {
        let mut mult = 0;
        while let Ok(q) = rest.exact_div(f) {
            rest = q;
            mult += 1;
        }
        if mult > 0 {
            factors.push((f.clone(), mult));
        }
    }
    for (f, mult) in factor_irreducible_with(&rest, cfg)?.factors {
        match factors.iter_mut().find(|(g, _)| *g == f) {
            Some(slot) => slot.1 += mult,
            None => factors.push((f, mult)),
        }
    }
    sort_factors(&mut factors);
    let prod = factors
        .iter()
        .fold(MultiPoly::one(p.nvars()), |acc, (f, m)| &acc * &f.pow(*m));
    let unit = p.leading_coeff() / prod.leading_coeff();
    debug_assert_eq!(prod.scale(&unit), *p);
    Ok(Factorization { unit, factors })
}

/// Outcome of an irreducibility test.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Irreducibility {
    Irreducible,
    /// An exact nontrivial factor.
    Reducible(MultiPoly),
    Inconclusive,
}

/// Irreducibility over Q.
///
/// Contents and repeated factors are detected directly. Otherwise, a random
/// linear restriction that keeps the total degree and stays squarefree is
/// irreducible only if `p` is; when the restriction splits, the lifting step
/// decides.
pub fn is_irreducible(p: &MultiPoly, trials: usize) -> Irreducibility {
    is_irreducible_seeded(p, trials, 0)
}

pub fn is_irreducible_seeded(p: &MultiPoly, trials: usize, seed: u64) -> Irreducibility {
    if p.is_constant() {
        return Irreducibility::Inconclusive;
    }
    if p.total_degree() == 1 {
        return Irreducibility::Irreducible;
    }
    let m = p.monomial_content();
    if !m.is_one() {
        let i = m.exponents().iter().position(|&e| e > 0).unwrap();
        return Irreducibility::Reducible(MultiPoly::var(p.nvars(), i));
    }
    let vars = p.variables();
    for &v in &vars {
        let c = content_in(p, v);
        if !c.is_constant() {
            return Irreducibility::Reducible(c);
        }
    }
    let g = poly_gcd(p, &p.derivative(vars[0]));
    if !g.is_constant() {
        return Irreducibility::Reducible(g);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if vars.len() == 1 {
        return match factor_squarefree(p, &mut rng) {
            Ok(f) if f.len() == 1 => Irreducibility::Irreducible,
            Ok(f) => Irreducibility::Reducible(f[0].clone()),
            Err(_) => Irreducibility::Inconclusive,
        };
    }
    for t in 0..trials {
        let Some(image) = Image::random(p, 2 + t as i64, &mut rng) else {
            continue;
        };
        let Ok(uni) = factor_squarefree_q(image.univariate()) else {
            continue;
        };
        if uni.len() == 1 {
            return Irreducibility::Irreducible;
        }
        return match image.lift(&uni) {
            Ok(f) if f.len() == 1 => Irreducibility::Irreducible,
            Ok(f) => Irreducibility::Reducible(f[0].clone()),
            Err(_) => Irreducibility::Inconclusive,
        };
    }
    Irreducibility::Inconclusive
}

/// `f / f(x, 0)` when `f(x, 0)` is a nonzero constant.
pub fn h_normalized(f: &MultiPoly) -> Option<MultiPoly> {
    let c = f.h_coefficient(0).constant_value()?;
    if c.is_zero() {
        return None;
    }
    Some(f.scale(&c.recip()))
}

/// Irreducible factors of the numerator and denominator of a rational function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactorBasis {
    pub unit: Rational,
    pub numerator_factors: Vec<(MultiPoly, u32)>,
    pub denominator_factors: Vec<(MultiPoly, u32)>,
}

impl FactorBasis {
    pub fn empty() -> Self {
        FactorBasis {
            unit: Rational::one(),
            numerator_factors: Vec::new(),
            denominator_factors: Vec::new(),
        }
    }

    pub fn of(r: &RationalFunction, cfg: &FactorConfig) -> Result<Self> {
        let num = factor_irreducible_with(r.num(), cfg)?;
        let den = factor_irreducible_with(r.den(), cfg)?;
        Ok(FactorBasis {
            unit: num.unit / den.unit,
            numerator_factors: num.factors,
            denominator_factors: den.factors,
        })
    }

    /// Same result as [`FactorBasis::of`], using the factors of `hints` to
    /// shortcut the work. Suits a Jacobian whose denominator divides a power of
    /// the map's common denominator.
    pub fn of_with_hints(r: &RationalFunction, hints: &[MultiPoly], cfg: &FactorConfig) -> Result<Self> {
        let mut known: Vec<MultiPoly> = Vec::new();
        for h in hints.iter().filter(|h| !h.is_zero()) {
            for (f, _) in factor_irreducible_with(h, cfg)?.factors {
                if !known.contains(&f) {
                    known.push(f);
                }
            }
        }
        let num = factor_with_known(r.num(), &known, cfg)?;
        let den = factor_with_known(r.den(), &known, cfg)?;
        Ok(FactorBasis {
            unit: num.unit / den.unit,
            numerator_factors: num.factors,
            denominator_factors: den.factors,
        })
    }

    pub fn num_count(&self) -> usize {
        self.numerator_factors.len()
    }

    pub fn den_count(&self) -> usize {
        self.denominator_factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.numerator_factors.is_empty() && self.denominator_factors.is_empty()
    }

    /// Exact reconstruction check against `r`.
    pub fn reconstructs(&self, r: &RationalFunction) -> bool {
        let nv = r.nvars();
        let num = self
            .numerator_factors
            .iter()
            .fold(MultiPoly::constant(nv, self.unit.clone()), |acc, (f, m)| &acc * &f.pow(*m));
        let den = self
            .denominator_factors
            .iter()
            .fold(MultiPoly::one(nv), |acc, (f, m)| &acc * &f.pow(*m));
        if !r.den().is_zero() && den.scale(&(r.den().leading_coeff() / den.leading_coeff())) == *r.den() {
            let c = r.den().leading_coeff() / den.leading_coeff();
            if num.scale(&c) == *r.num() {
                return true;
            }
        }
        &num * r.den() == &den * r.num()
    }

    /// All factors, numerator first.
    pub fn all_factors(&self) -> impl Iterator<Item = &MultiPoly> {
        self.numerator_factors
            .iter()
            .chain(&self.denominator_factors)
            .map(|(f, _)| f)
    }
}
