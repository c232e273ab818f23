//! Multivariate factorization of squarefree polynomials by a random linear
//! change of coordinates, a univariate factorization and Hensel lifting.
//!
//! With `x_v = z + a_v` and `x_u = y_u + l_u z + a_u` for the other variables,
//! a polynomial of total degree `d` becomes monic of degree `d` in `z` up to a
//! constant, so the factors of its image at `y = 0` lift uniquely in the ideal
//! generated by the `y_u`.

use num_traits::Zero;
use rand::Rng;

use super::zassenhaus::{factor_squarefree_q, next_subset};
use crate::error::{Error, Result};
use crate::poly::{Monomial, MultiPoly, QPoly, Rational};

const MAX_SUBSETS: usize = 20_000;

/// A polynomial in the shifted coordinates and its univariate image.
pub(crate) struct Image {
    /// Slot playing the role of `z`.
    v: usize,
    /// Coefficient of `z` in `x_u` per slot (unused at `v` and for absent slots).
    lam: Vec<Rational>,
    /// Shift per slot.
    shift: Vec<Rational>,
    present: Vec<bool>,
    /// The transformed polynomial, made monic in `z`.
    monic: MultiPoly,
    /// Its value at `y = 0`.
    univariate: QPoly,
}

impl Image {
    /// Random coordinates; `None` when the image degenerates (the degree in
    /// `z` drops or the univariate image is not squarefree).
    pub(crate) fn random<R: Rng>(p: &MultiPoly, spread: i64, rng: &mut R) -> Option<Image> {
        let nv = p.nvars();
        let vars = p.variables();
        let v = *vars.iter().max_by_key(|&&s| (p.degree_in(s), std::cmp::Reverse(s)))?;
        let d = p.total_degree();
        let mut lam = vec![Rational::zero(); nv + 1];
        let mut shift = vec![Rational::zero(); nv + 1];
        let mut present = vec![false; nv + 1];
        for &s in &vars {
            present[s] = true;
            shift[s] = Rational::from_integer(rng.gen_range(-spread..=spread).into());
            if s != v {
                lam[s] = Rational::from_integer(rng.gen_range(-spread..=spread).into());
            }
        }
        // x_v first, so later images may mention x_v without it being shifted again
        let mut q = p.substitute_poly(v, &(&MultiPoly::var(nv, v) + &MultiPoly::constant(nv, shift[v].clone())));
        for &s in vars.iter().filter(|&&s| s != v) {
            let img = &(&MultiPoly::var(nv, s) + &MultiPoly::var(nv, v).scale(&lam[s]))
                + &MultiPoly::constant(nv, shift[s].clone());
            q = q.substitute_poly(s, &img);
        }
        if q.degree_in(v) != d {
            return None;
        }
        let lc = q.coefficients_in(v).pop()?.constant_value()?;
        let monic = q.scale(&lc.recip());
        let mut at_zero = monic.clone();
        for &s in vars.iter().filter(|&&s| s != v) {
            at_zero = at_zero.eval_var(s, &Rational::zero());
        }
        let univariate = QPoly::new(at_zero.to_univariate(v));
        let g = univariate.gcd(&univariate.derivative());
        if g.degree() != Some(0) {
            return None;
        }
        Some(Image {
            v,
            lam,
            shift,
            present,
            monic,
            univariate,
        })
    }

    pub(crate) fn univariate(&self) -> &QPoly {
        &self.univariate
    }

    fn y_degree(&self, m: &Monomial) -> u32 {
        m.degree() - m.exp(self.v)
    }

    fn map_back(&self, f: &MultiPoly) -> MultiPoly {
        let nv = f.nvars();
        let z = &MultiPoly::var(nv, self.v) - &MultiPoly::constant(nv, self.shift[self.v].clone());
        let images: Vec<MultiPoly> = (0..=nv)
            .map(|s| {
                if s == self.v {
                    z.clone()
                } else if self.present[s] {
                    &(&MultiPoly::var(nv, s) - &z.scale(&self.lam[s]))
                        - &MultiPoly::constant(nv, self.shift[s].clone())
                } else {
                    MultiPoly::var(nv, s)
                }
            })
            .collect();
        f.compose(nv, &images).normalized()
    }

    /// Irreducible factors given the monic irreducible factors of the
    /// univariate image.
    pub(crate) fn lift(&self, uni_factors: &[QPoly]) -> Result<Vec<MultiPoly>> {
        if uni_factors.len() == 1 {
            return Ok(vec![self.map_back(&self.monic)]);
        }
        let nv = self.monic.nvars();
        let v = self.v;
        let d = self.monic.degree_in(v);
        let r = uni_factors.len();

        // s_i = (prod_{j != i} q_j)^(-1) mod q_i, so that sum_i s_i prod_{j != i} q_j = 1
        let bezout: Vec<QPoly> = (0..r)
            .map(|i| {
                let others = (0..r)
                    .filter(|&j| j != i)
                    .fold(QPoly::one(), |acc, j| acc.mul(&uni_factors[j]));
                let (g, s, _) = others.rem(&uni_factors[i]).xgcd(&uni_factors[i]);
                debug_assert_eq!(g, QPoly::one());
                s
            })
            .collect();

        let mut lifted: Vec<MultiPoly> = uni_factors
            .iter()
            .map(|q| MultiPoly::from_univariate(nv, v, &q.0))
            .collect();
        let max_y = self
            .monic
            .terms()
            .map(|(m, _)| self.y_degree(m))
            .max()
            .unwrap_or(0);
        for k in 1..=max_y.min(d) {
            let keep = |m: &Monomial| self.y_degree(m) <= k;
            let prod = lifted[1..]
                .iter()
                .fold(lifted[0].clone(), |acc, f| acc.mul_filtered(f, keep));
            let err = MultiPoly::from_terms(
                nv,
                self.monic
                    .terms()
                    .filter(|(m, _)| self.y_degree(m) == k)
                    .map(|(m, c)| (m.clone(), c.clone()))
                    .chain(
                        prod.terms()
                            .filter(|(m, _)| self.y_degree(m) == k)
                            .map(|(m, c)| (m.clone(), -c)),
                    ),
            );
            if err.is_zero() {
                continue;
            }
            for (ymono, coeffs) in err.univariate_parts(v) {
                let e = QPoly::new(coeffs);
                for (i, f) in lifted.iter_mut().enumerate() {
                    let sigma = e.mul(&bezout[i]).rem(&uni_factors[i]);
                    if sigma.is_zero() {
                        continue;
                    }
                    let corr = &MultiPoly::from_univariate(nv, v, &sigma.0)
                        * &MultiPoly::monomial(nv, ymono.clone(), Rational::from_integer(1.into()));
                    *f = &*f + &corr;
                }
            }
        }

        let degs: Vec<u32> = uni_factors.iter().map(|q| q.degree().unwrap() as u32).collect();
        let mut out = Vec::new();
        let mut cur = self.monic.clone();
        let mut idx_left: Vec<usize> = (0..r).collect();
        let mut size = 1;
        let mut tried = 0usize;
        'outer: while 2 * size <= idx_left.len() {
            let n = idx_left.len();
            let mut sub: Vec<usize> = (0..size).collect();
            loop {
                tried += 1;
                if tried > MAX_SUBSETS {
                    return Err(Error::ResourceBudgetExceeded(format!(
                        "multivariate recombination over {r} lifted factors"
                    )));
                }
                let bound: u32 = sub.iter().map(|&i| degs[idx_left[i]]).sum::<u32>().min(max_y);
                let keep = |m: &Monomial| self.y_degree(m) <= bound;
                let cand = sub[1..].iter().fold(lifted[idx_left[sub[0]]].clone(), |acc, &i| {
                    acc.mul_filtered(&lifted[idx_left[i]], keep)
                });
                if let Ok(quot) = cur.exact_div(&cand) {
                    out.push(self.map_back(&cand));
                    cur = quot;
                    for &i in sub.iter().rev() {
                        idx_left.remove(i);
                    }
                    continue 'outer;
                }
                if !next_subset(&mut sub, n) {
                    break;
                }
            }
            size += 1;
        }
        if !cur.is_constant() {
            out.push(self.map_back(&cur));
        }
        Ok(out)
    }
}

/// Irreducible factors of a squarefree polynomial in at least two variables
/// that has no content with respect to any of them.
pub(crate) fn factor_squarefree_multi<R: Rng>(p: &MultiPoly, rng: &mut R) -> Result<Vec<MultiPoly>> {
    for attempt in 0..64 {
        let spread = 2 + attempt / 4;
        let Some(image) = Image::random(p, spread, rng) else {
            continue;
        };
        let uni = factor_squarefree_q(image.univariate())?;
        return image.lift(&uni);
    }
    Err(Error::ResourceBudgetExceeded(
        "no good evaluation point found for multivariate factorization".into(),
    ))
}
