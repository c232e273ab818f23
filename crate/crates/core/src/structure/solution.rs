use num_traits::{One, Signed, Zero};

use super::{Combination, CombinationKind, ContinuumPair};
use crate::error::{Error, Result};
use crate::kahan::det;
use crate::ode::QuadraticODE;
use crate::poly::{poly_gcd, rational_to_f64, to_text_with_names, Monomial, MultiPoly, Rational};

/// `numerator(x) / denominator(x) = k * exp(rate * t)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolutionRelation {
    pub numerator: MultiPoly,
    pub denominator: MultiPoly,
    pub rate: Rational,
    pub alpha: Vec<Rational>,
}

impl SolutionRelation {
    /// Value of the constant `k` along the solution through `x0`.
    pub fn constant_at(&self, x0: &[f64]) -> f64 {
        let mut pt = x0.to_vec();
        pt.push(0.0);
        self.numerator.eval_f64(&pt) / self.denominator.eval_f64(&pt)
    }
}

/// Closed form `x_i(t) = num_i / den_i` in the symbols `k_1..k_m` (slots
/// `0..m`) and `E_j = exp(rate_j t)` (slots `m..2m`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosedFormSolution {
    pub relations: Vec<SolutionRelation>,
    pub components: Vec<(MultiPoly, MultiPoly)>,
}

fn rate_text(r: &Rational) -> String {
    if r.is_one() {
        "exp(t)".into()
    } else if *r == -Rational::one() {
        "exp(-t)".into()
    } else if r.is_integer() {
        format!("exp({}*t)", r)
    } else {
        format!("exp(({})*t)", r)
    }
}

impl ClosedFormSolution {
    pub fn symbols(&self) -> usize {
        self.relations.len()
    }

    pub fn symbol_names(&self) -> Vec<String> {
        let m = self.symbols();
        (1..=m)
            .map(|i| format!("k{i}"))
            .chain(self.relations.iter().map(|r| rate_text(&r.rate)))
            .chain(["1".to_string()])
            .collect()
    }

    pub fn show_component(&self, i: usize) -> (String, String) {
        let names = self.symbol_names();
        let (n, d) = &self.components[i];
        (to_text_with_names(n, &names), to_text_with_names(d, &names))
    }

    fn point(&self, t: f64, ks: &[f64]) -> Vec<f64> {
        ks.iter()
            .copied()
            .chain(self.relations.iter().map(|r| (rational_to_f64(&r.rate) * t).exp()))
            .chain([0.0])
            .collect()
    }

    /// Constants `k_m` for the solution through `x0`.
    pub fn constants_at(&self, x0: &[f64]) -> Vec<f64> {
        self.relations.iter().map(|r| r.constant_at(x0)).collect()
    }

    pub fn eval(&self, t: f64, ks: &[f64]) -> Vec<f64> {
        let pt = self.point(t, ks);
        self.components
            .iter()
            .map(|(n, d)| n.eval_f64(&pt) / d.eval_f64(&pt))
            .collect()
    }

    /// Smallest denominator magnitude among the components at `t`.
    pub fn min_denominator(&self, t: f64, ks: &[f64]) -> f64 {
        let pt = self.point(t, ks);
        self.components
            .iter()
            .map(|(_, d)| d.eval_f64(&pt).abs())
            .fold(f64::INFINITY, f64::min)
    }

    /// `d/dt` of a polynomial in the symbols, using `dE_j/dt = rate_j E_j`.
    pub fn time_derivative(&self, p: &MultiPoly) -> MultiPoly {
        let m = self.symbols();
        MultiPoly::from_terms(
            p.nvars(),
            p.terms().map(|(mono, c)| {
                let factor: Rational = (0..m)
                    .map(|j| &self.relations[j].rate * Rational::from_integer(mono.exp(m + j).into()))
                    .sum();
                (mono.clone(), c * factor)
            }),
        )
    }

    /// `dx_i/dt` as `(num, den)`.
    pub fn velocity(&self) -> Vec<(MultiPoly, MultiPoly)> {
        self.components
            .iter()
            .map(|(n, d)| {
                let num = &(&self.time_derivative(n) * d) - &(n * &self.time_derivative(d));
                (num, d * d)
            })
            .collect()
    }

    pub fn eval_velocity(&self, t: f64, ks: &[f64]) -> Vec<f64> {
        let pt = self.point(t, ks);
        self.velocity()
            .iter()
            .map(|(n, d)| n.eval_f64(&pt) / d.eval_f64(&pt))
            .collect()
    }
}

fn is_affine(p: &MultiPoly) -> bool {
    p.total_degree() <= 1 && p.x_degree() == p.total_degree()
}

/// Numerator and denominator of a relation with exponents in {-1, 0, 1}.
fn relation_of(c: &Combination, pairs: &[ContinuumPair]) -> Option<SolutionRelation> {
    let CombinationKind::Exponential { rate } = &c.kind else {
        return None;
    };
    let n = pairs.first()?.p_bar.nvars();
    let mut num = MultiPoly::one(n);
    let mut den = MultiPoly::one(n);
    let mut nnum = 0;
    let mut nden = 0;
    for (a, p) in c.alpha.iter().zip(pairs) {
        if a.is_zero() {
            continue;
        }
        if !is_affine(&p.p_bar) {
            return None;
        }
        if a.is_one() {
            num = p.p_bar.clone();
            nnum += 1;
        } else if *a == -Rational::one() {
            den = p.p_bar.clone();
            nden += 1;
        } else {
            return None;
        }
    }
    if nnum > 1 || nden > 1 {
        return None;
    }
    Some(SolutionRelation {
        numerator: num,
        denominator: den,
        rate: rate.clone(),
        alpha: c.alpha.clone(),
    })
}

fn embed_coeff(p: &MultiPoly, var: Option<usize>, target: usize) -> MultiPoly {
    let n = p.nvars();
    let m = match var {
        Some(i) => Monomial::var(n + 1, i, 1),
        None => Monomial::one(n + 1),
    };
    MultiPoly::constant(target, p.coeff(&m))
}

fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    for i in (0..k).rev() {
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

const MAX_SUBSETS: usize = 20_000;

/// Explicit solution from `n` affine exponential relations, eliminating `x`
/// exactly over the symbols `k_m, E_m`. Subsets are tried by total `|alpha|`.
pub fn synthesize_solution(
    exps: &[Combination],
    pairs: &[ContinuumPair],
    ode: &QuadraticODE,
) -> Result<ClosedFormSolution> {
    let n = ode.dim();
    let rels: Vec<SolutionRelation> = exps.iter().filter_map(|c| relation_of(c, pairs)).collect();
    if rels.len() < n || n == 0 {
        return Err(Error::NotApplicable(format!(
            "{} affine exponential relations for {} variables",
            rels.len(),
            n
        )));
    }
    let weight = |r: &SolutionRelation| -> Rational { r.alpha.iter().map(|a| a.abs()).sum() };
    let mut subsets: Vec<Vec<usize>> = Vec::new();
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        subsets.push(idx.clone());
        if subsets.len() >= MAX_SUBSETS || !next_combination(&mut idx, rels.len()) {
            break;
        }
    }
    subsets.sort_by_cached_key(|s| s.iter().map(|&i| weight(&rels[i])).sum::<Rational>());

    let s = 2 * n;
    for subset in subsets {
        // row m: (grad P_a - k_m E_m grad P_b) . x = -(P_a(0) - k_m E_m P_b(0))
        let mut a = Vec::with_capacity(n);
        let mut b = Vec::with_capacity(n);
        for (m, &ri) in subset.iter().enumerate() {
            let r = &rels[ri];
            let ke = MultiPoly::monomial(
                s,
                Monomial::from_exponents((0..=s).map(|j| u32::from(j == m || j == n + m)).collect()),
                Rational::one(),
            );
            let row: Vec<MultiPoly> = (0..n)
                .map(|i| &embed_coeff(&r.numerator, Some(i), s) - &(&ke * &embed_coeff(&r.denominator, Some(i), s)))
                .collect();
            let rhs = &(&ke * &embed_coeff(&r.denominator, None, s)) - &embed_coeff(&r.numerator, None, s);
            a.push(row);
            b.push(rhs);
        }
        let d = det(&a, s);
        if d.is_zero() {
            continue;
        }
        let mut components = Vec::with_capacity(n);
        for i in 0..n {
            let mut ai = a.clone();
            for (row, bi) in ai.iter_mut().zip(&b) {
                row[i] = bi.clone();
            }
            let num = det(&ai, s);
            let g = poly_gcd(&num, &d);
            let (mut num, mut den) = if g.is_constant() {
                (num, d.clone())
            } else {
                (num.exact_div(&g)?, d.exact_div(&g)?)
            };
            let scale = den.normalize_with_unit().0.recip();
            num = num.scale(&scale);
            den = den.scale(&scale);
            components.push((num, den));
        }
        return Ok(ClosedFormSolution {
            relations: subset.iter().map(|&i| rels[i].clone()).collect(),
            components,
        });
    }
    Err(Error::NotApplicable("every choice of relations is degenerate in x".into()))
}
