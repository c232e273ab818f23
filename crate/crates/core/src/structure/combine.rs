use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{lie_derivative, ContinuumPair};
use crate::darboux::{DarbouxContext, DarbouxPair};
use crate::kahan::JacobianData;
use crate::ode::QuadraticODE;
use crate::poly::lattice::{canonical_basis, integer_kernel, integer_rows, reduce_against, reduce_basis, solve_integer};
use crate::poly::{solve_rational, Monomial, MultiPoly, Rational, RationalFunction, SolutionSet};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CombinationKind {
    FirstIntegral,
    Exponential { rate: Rational },
    Measure,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Level {
    /// Exponents over continuum pairs, statement about the flow.
    Continuum,
    /// Exponents over discrete pairs, statement about the map.
    Discrete,
}

/// `prod P_i^alpha_i` with its defining cofactor relation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Combination {
    pub alpha: Vec<Rational>,
    pub kind: CombinationKind,
    pub level: Level,
    /// `sum alpha_i C̄_i` for continuum combinations.
    pub cofactor_sum: Option<MultiPoly>,
    /// Exact certificate passed.
    pub verified: bool,
}

impl Combination {
    pub fn support(&self) -> Vec<usize> {
        (0..self.alpha.len()).filter(|&i| !self.alpha[i].is_zero()).collect()
    }

    pub fn weight(&self) -> Rational {
        self.alpha.iter().map(|a| a.abs()).sum()
    }

    pub fn integer_alpha(&self) -> Option<Vec<BigInt>> {
        self.alpha
            .iter()
            .map(|a| a.is_integer().then(|| a.to_integer()))
            .collect()
    }
}

fn to_q(v: &[BigInt]) -> Vec<Rational> {
    v.iter().map(|x| Rational::from_integer(x.clone())).collect()
}

fn weighted_sum(pairs: &[ContinuumPair], alpha: &[Rational], n: usize) -> MultiPoly {
    pairs
        .iter()
        .zip(alpha)
        .filter(|(_, a)| !a.is_zero())
        .fold(MultiPoly::zero(n), |acc, (p, a)| &acc + &p.c_bar.scale(a))
}

/// `sum_i alpha_i (grad P_i . f)(x) / P_i(x) = target(x)` at `samples` random
/// rational points where no involved `P_i` vanishes.
pub fn log_derivative_check(
    ode: &QuadraticODE,
    p_bars: &[MultiPoly],
    alpha: &[Rational],
    target: &MultiPoly,
    samples: usize,
    seed: u64,
) -> bool {
    let n = ode.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lies: Vec<MultiPoly> = p_bars.iter().map(|p| lie_derivative(ode, p)).collect();
    let mut done = 0;
    let mut attempts = 0;
    while done < samples && attempts < 50 * samples {
        attempts += 1;
        let mut pt: Vec<Rational> = (0..n)
            .map(|_| Rational::new(rng.gen_range(-60..=60i64).into(), rng.gen_range(1..=9i64).into()))
            .collect();
        pt.push(Rational::zero());
        let mut lhs = Rational::zero();
        let mut singular = false;
        for ((p, l), a) in p_bars.iter().zip(&lies).zip(alpha) {
            if a.is_zero() {
                continue;
            }
            let v = p.eval(&pt);
            if v.is_zero() {
                singular = true;
                break;
            }
            lhs += a * l.eval(&pt) / v;
        }
        if singular {
            continue;
        }
        if lhs != target.eval(&pt) {
            return false;
        }
        done += 1;
    }
    done == samples
}

/// `M grad(N).f - N grad(M).f = 0` for `I = N / M = prod P_i^alpha_i`.
fn first_integral_certificate(ode: &QuadraticODE, p_bars: &[MultiPoly], alpha: &[BigInt]) -> bool {
    let n = ode.dim();
    let mut num = MultiPoly::one(n);
    let mut den = MultiPoly::one(n);
    for (p, a) in p_bars.iter().zip(alpha) {
        let e: u32 = match a.abs().try_into() {
            Ok(e) => e,
            Err(_) => return false,
        };
        if a.is_positive() {
            num = &num * &p.pow(e);
        } else if a.is_negative() {
            den = &den * &p.pow(e);
        }
    }
    (&den * &lie_derivative(ode, &num)) == (&num * &lie_derivative(ode, &den))
}

/// First integrals, exponential relations and an invariant measure built
/// from products of continuum Darboux polynomials.
pub fn find_combinations(pairs: &[ContinuumPair], ode: &QuadraticODE) -> Vec<Combination> {
    let r = pairs.len();
    if r == 0 {
        return Vec::new();
    }
    let n = ode.dim();
    let div = ode.divergence();
    let mut monos: BTreeSet<Monomial> = pairs.iter().flat_map(|p| p.c_bar.terms().map(|(m, _)| m.clone())).collect();
    monos.extend(div.terms().map(|(m, _)| m.clone()));
    let one = Monomial::one(n + 1);
    let nonconst: Vec<&Monomial> = monos.iter().filter(|m| **m != one).collect();
    let coeff_row = |m: &Monomial| -> Vec<Rational> { pairs.iter().map(|p| p.c_bar.coeff(m)).collect() };
    let nonconst_rows: Vec<Vec<Rational>> = nonconst.iter().map(|m| coeff_row(m)).collect();
    let const_row = coeff_row(&one);
    let p_bars: Vec<MultiPoly> = pairs.iter().map(|p| p.p_bar.clone()).collect();

    let mut out = Vec::new();
    let certify = |alpha: &[Rational], target: &MultiPoly, seed: u64| -> (MultiPoly, bool) {
        let sum = weighted_sum(pairs, alpha, n);
        let ok = &sum == target && log_derivative_check(ode, &p_bars, alpha, target, 5, seed);
        (sum, ok)
    };

    let mut all_rows = nonconst_rows.clone();
    all_rows.push(const_row.clone());
    let fi_basis = canonical_basis(&integer_kernel(&integer_rows(&all_rows), r));
    for (k, v) in fi_basis.iter().enumerate() {
        let alpha = to_q(v);
        let (sum, mut ok) = certify(&alpha, &MultiPoly::zero(n), 11 + k as u64);
        ok &= first_integral_certificate(ode, &p_bars, v);
        out.push(Combination {
            alpha,
            kind: CombinationKind::FirstIntegral,
            level: Level::Continuum,
            cofactor_sum: Some(sum),
            verified: ok,
        });
    }

    let mut exps: Vec<Vec<BigInt>> = Vec::new();
    for a in 0..r {
        for b in a..r {
            for sb in [-1i64, 1] {
                let mut v = vec![BigInt::zero(); r];
                v[a] += 1;
                if b != a {
                    v[b] += sb;
                } else if sb == 1 {
                    continue;
                }
                let sum = weighted_sum(pairs, &to_q(&v), n);
                if sum.is_constant() && !sum.is_zero() {
                    exps.push(v);
                }
            }
        }
    }
    if exps.is_empty() {
        for v in integer_kernel(&integer_rows(&nonconst_rows), r) {
            let sum = weighted_sum(pairs, &to_q(&v), n);
            if !sum.is_zero() {
                exps.push(v);
            }
        }
    }
    exps.sort_by_key(|v| v.iter().map(|x| x.abs()).sum::<BigInt>());
    for (k, v) in exps.iter().enumerate() {
        let alpha = to_q(v);
        let rate = weighted_sum(pairs, &alpha, n).constant_term();
        let target = MultiPoly::constant(n, rate.clone());
        let (sum, ok) = certify(&alpha, &target, 101 + k as u64);
        out.push(Combination {
            alpha,
            kind: CombinationKind::Exponential { rate },
            level: Level::Continuum,
            cofactor_sum: Some(sum),
            verified: ok,
        });
    }

    let mut rows = nonconst_rows;
    rows.push(const_row);
    let rhs: Vec<Rational> = nonconst.iter().map(|m| div.coeff(m)).chain([div.coeff(&one)]).collect();
    let aug: Vec<Vec<Rational>> = rows
        .iter()
        .zip(&rhs)
        .map(|(row, b)| row.iter().cloned().chain([b.clone()]).collect())
        .collect();
    let aug_z = integer_rows(&aug);
    let (a_z, b_z): (Vec<Vec<BigInt>>, Vec<BigInt>) =
        aug_z.into_iter().map(|mut row| { let b = row.pop().unwrap(); (row, b) }).unzip();
    let measure = match solve_integer(&a_z, &b_z, r) {
        Some(x) => Some(to_q(&reduce_against(&x, &fi_basis))),
        None => match solve_rational(&rows, &rhs) {
            SolutionSet::Solutions { particular, .. } => Some(particular),
            SolutionSet::Infeasible => None,
        },
    };
    if let Some(alpha) = measure {
        let (sum, ok) = certify(&alpha, &div, 1009);
        out.push(Combination {
            alpha,
            kind: CombinationKind::Measure,
            level: Level::Continuum,
            cofactor_sum: Some(sum),
            verified: ok,
        });
    }
    out
}

/// Exponent vector of a cofactor over numerator then denominator factors.
fn cofactor_vector(pair: &DarbouxPair) -> Vec<Rational> {
    pair.cofactor
        .f
        .iter()
        .map(|&e| Rational::from_integer(e.into()))
        .chain(pair.cofactor.g.iter().map(|&e| -Rational::from_integer(e.into())))
        .collect()
}

fn product_of_cofactors(ctx: &DarbouxContext, pairs: &[DarbouxPair], alpha: &[BigInt]) -> Option<RationalFunction> {
    let n = ctx.nvars();
    let mut acc = RationalFunction::constant(n, Rational::one());
    for (p, a) in pairs.iter().zip(alpha) {
        if a.is_zero() {
            continue;
        }
        let c = ctx.cofactor_function(&p.cofactor)?;
        let e: u32 = a.abs().try_into().ok()?;
        let term = if a.is_positive() { c.pow(e) } else { c.inv().ok()?.pow(e) };
        acc = acc.mul(&term);
    }
    Some(acc)
}

fn sign_product(pairs: &[DarbouxPair], alpha: &[BigInt]) -> i8 {
    let odd = pairs
        .iter()
        .zip(alpha)
        .filter(|(p, a)| p.cofactor.sign == -1 && a.is_odd())
        .count();
    if odd % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Integrals and preserved measures of the map itself: `prod C_i^alpha_i`
/// equal to 1 or to the Jacobian determinant.
pub fn find_discrete_combinations(ctx: &DarbouxContext, pairs: &[DarbouxPair], jac: &JacobianData) -> Vec<Combination> {
    let r = pairs.len();
    if r == 0 {
        return Vec::new();
    }
    let vecs: Vec<Vec<Rational>> = pairs.iter().map(cofactor_vector).collect();
    let nrows = ctx.basis.num_count() + ctx.basis.den_count();
    let matrix: Vec<Vec<Rational>> = (0..nrows).map(|i| vecs.iter().map(|v| v[i].clone()).collect()).collect();
    let a_z = integer_rows(&matrix);
    let mut out = Vec::new();

    let kernel = canonical_basis(&integer_kernel(&a_z, r));
    for v in &kernel {
        let v: Vec<BigInt> = if sign_product(pairs, v) == 1 {
            v.clone()
        } else {
            v.iter().map(|x| x * 2).collect()
        };
        let verified = product_of_cofactors(ctx, pairs, &v)
            .is_some_and(|c| c.equals_cross(&RationalFunction::constant(ctx.nvars(), Rational::one())));
        out.push(Combination {
            alpha: to_q(&v),
            kind: CombinationKind::FirstIntegral,
            level: Level::Discrete,
            cofactor_sum: None,
            verified,
        });
    }

    let target: Vec<BigInt> = ctx
        .basis
        .numerator_factors
        .iter()
        .map(|(_, m)| BigInt::from(*m))
        .chain(ctx.basis.denominator_factors.iter().map(|(_, m)| -BigInt::from(*m)))
        .collect();
    if let Some(x) = solve_integer(&a_z, &target, r) {
        let x = reduce_against(&x, &reduce_basis(kernel));
        if sign_product(pairs, &x) == 1 {
            let verified = product_of_cofactors(ctx, pairs, &x).is_some_and(|c| c.equals_cross(&jac.j));
            out.push(Combination {
                alpha: to_q(&x),
                kind: CombinationKind::Measure,
                level: Level::Discrete,
                cofactor_sum: None,
                verified,
            });
        }
    }
    out
}
