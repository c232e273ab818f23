//! Continuum limits of discrete Darboux pairs and the integrals, exponential
//! relations, measures and closed-form solutions built from them.

mod combine;
mod solution;

pub use combine::{
    find_combinations, find_discrete_combinations, log_derivative_check, Combination, CombinationKind, Level,
};
pub use solution::{synthesize_solution, ClosedFormSolution, SolutionRelation};


use crate::darboux::{DarbouxContext, DarbouxPair};
use crate::error::{Error, Result};
use crate::ode::QuadraticODE;
use crate::poly::{MultiPoly, Rational};

/// `P̄ = P|_{h=0}` and `C̄ = lim (C - 1)/h` for one discrete pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContinuumPair {
    pub p_bar: MultiPoly,
    pub c_bar: MultiPoly,
    /// Index into the list of discrete pairs.
    pub source: usize,
}

/// `sum_i f_i grad_i p`.
pub fn lie_derivative(ode: &QuadraticODE, p: &MultiPoly) -> MultiPoly {
    ode.rhs()
        .iter()
        .enumerate()
        .fold(MultiPoly::zero(ode.dim()), |acc, (i, fi)| &acc + &(fi * &p.derivative(i)))
}

/// Lowest nonvanishing coefficient of `p` as a polynomial in `h`.
pub fn lowest_h_part(p: &MultiPoly) -> MultiPoly {
    let k = p.min_degree_in(p.h_slot());
    p.h_coefficient(k)
}

pub fn continuum_limit(ctx: &DarbouxContext, ode: &QuadraticODE, pair: &DarbouxPair, source: usize) -> Result<ContinuumPair> {
    if pair.cofactor.sign != 1 {
        return Err(Error::NoContinuumLimit);
    }
    let n = ctx.nvars();
    let p_bar = lowest_h_part(&pair.p);
    let mut c_bar = MultiPoly::zero(n);
    for (i, &e) in pair.cofactor.f.iter().enumerate() {
        if e > 0 {
            let k = ctx.num_factor(i).ok_or(Error::NoContinuumLimit)?;
            c_bar = &c_bar + &k.h_coefficient(1).scale(&Rational::from_integer(e.into()));
        }
    }
    for (j, &e) in pair.cofactor.g.iter().enumerate() {
        if e > 0 {
            let d = ctx.den_factor(j).ok_or(Error::NoContinuumLimit)?;
            c_bar = &c_bar - &d.h_coefficient(1).scale(&Rational::from_integer(e.into()));
        }
    }
    if p_bar.is_zero() || lie_derivative(ode, &p_bar) != &c_bar * &p_bar {
        return Err(Error::LimitInconsistent(format!(
            "continuum identity fails for {}",
            ode.show(&p_bar)
        )));
    }
    Ok(ContinuumPair { p_bar, c_bar, source })
}

/// Continuum pairs for every pair that has one, with the failures by index.
pub fn continuum_limits(
    ctx: &DarbouxContext,
    ode: &QuadraticODE,
    pairs: &[DarbouxPair],
) -> (Vec<ContinuumPair>, Vec<(usize, Error)>) {
    let mut ok = Vec::new();
    let mut failed = Vec::new();
    for (i, p) in pairs.iter().enumerate() {
        match continuum_limit(ctx, ode, p, i) {
            Ok(c) => ok.push(c),
            Err(e) => failed.push((i, e)),
        }
    }
    (ok, failed)
}
