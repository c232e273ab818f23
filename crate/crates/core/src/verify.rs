//! Numeric and exact-sampling checks of the symbolic findings.

use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::darboux::{DarbouxContext, DarbouxPair};
use crate::error::{Error, Result};
use crate::ode::QuadraticODE;
use crate::poly::{rational_to_f64, MultiPoly, Rational};
use crate::structure::ClosedFormSolution;

/// Values below this magnitude count as a singular denominator.
pub const SINGULAR_THRESHOLD: f64 = 1e-9;

/// Fixed-step classical RK4 with compensated accumulation of the state.
pub struct Rk4<'a> {
    ode: &'a QuadraticODE,
    x: Vec<f64>,
    carry: Vec<f64>,
}

impl<'a> Rk4<'a> {
    pub fn new(ode: &'a QuadraticODE, x0: &[f64]) -> Self {
        Rk4 {
            ode,
            x: x0.to_vec(),
            carry: vec![0.0; x0.len()],
        }
    }

    pub fn state(&self) -> &[f64] {
        &self.x
    }

    pub fn step(&mut self, dt: f64) {
        let f = |x: &[f64]| self.ode.eval_f64(x);
        let shift = |x: &[f64], k: &[f64], s: f64| -> Vec<f64> { x.iter().zip(k).map(|(a, b)| a + s * b).collect() };
        let k1 = f(&self.x);
        let k2 = f(&shift(&self.x, &k1, dt / 2.0));
        let k3 = f(&shift(&self.x, &k2, dt / 2.0));
        let k4 = f(&shift(&self.x, &k3, dt));
        for i in 0..self.x.len() {
            let inc = dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) - self.carry[i];
            let next = self.x[i] + inc;
            self.carry[i] = (next - self.x[i]) - inc;
            self.x[i] = next;
        }
    }
}

/// States at `t = 0, step, 2 step, ..., T`.
pub fn rk4_trajectory(ode: &QuadraticODE, x0: &[f64], horizon: f64, step: f64) -> Vec<(f64, Vec<f64>)> {
    let steps = (horizon / step).round() as usize;
    let mut rk = Rk4::new(ode, x0);
    let mut out = Vec::with_capacity(steps + 1);
    out.push((0.0, x0.to_vec()));
    for k in 1..=steps {
        rk.step(step);
        out.push((k as f64 * step, rk.state().to_vec()));
    }
    out
}

/// `prod P_i^alpha_i` as a floating-point function.
#[derive(Clone, Debug)]
pub struct ProductForm {
    pub factors: Vec<(MultiPoly, f64)>,
}

impl ProductForm {
    pub fn new(p_bars: &[MultiPoly], alpha: &[Rational]) -> Self {
        ProductForm {
            factors: p_bars
                .iter()
                .zip(alpha)
                .filter(|(_, a)| !a.is_zero())
                .map(|(p, a)| (p.clone(), rational_to_f64(a)))
                .collect(),
        }
    }

    pub fn constant_one() -> Self {
        ProductForm { factors: Vec::new() }
    }

    /// Value, or the offending factor value if a negative power nearly vanishes.
    pub fn eval(&self, x: &[f64]) -> std::result::Result<f64, f64> {
        let mut pt = x.to_vec();
        pt.push(0.0);
        let mut v = 1.0;
        for (p, a) in &self.factors {
            let b = p.eval_f64(&pt);
            if *a < 0.0 && b.abs() < SINGULAR_THRESHOLD {
                return Err(b);
            }
            v *= if a.fract() == 0.0 { b.powi(*a as i32) } else { b.powf(*a) };
        }
        Ok(v)
    }
}

/// Largest `|Q(x(t)) e^(-rate t) - Q(x0)| / |Q(x0)|` along an RK4 trajectory.
fn max_deviation(ode: &QuadraticODE, q: &ProductForm, rate: f64, x0: &[f64], horizon: f64, step: f64) -> Result<f64> {
    let q0 = q.eval(x0).map_err(|_| Error::DenominatorBlowup { time: 0.0 })?;
    if q0.abs() < SINGULAR_THRESHOLD {
        return Err(Error::DenominatorBlowup { time: 0.0 });
    }
    let mut worst = 0.0f64;
    for (t, x) in rk4_trajectory(ode, x0, horizon, step) {
        let v = q.eval(&x).map_err(|_| Error::DenominatorBlowup { time: t })?;
        let dev = ((v * (-rate * t).exp() - q0) / q0).abs();
        if !dev.is_finite() {
            return Err(Error::DenominatorBlowup { time: t });
        }
        worst = worst.max(dev);
    }
    Ok(worst)
}

/// Maximum relative drift of a candidate first integral.
pub fn check_integral_drift(ode: &QuadraticODE, q: &ProductForm, x0: &[f64], horizon: f64, step: f64) -> Result<f64> {
    max_deviation(ode, q, 0.0, x0, horizon, step)
}

/// Maximum relative deviation of `Q(x(t)) e^(-rate t)` from `Q(x0)`.
pub fn check_exponential(
    ode: &QuadraticODE,
    q: &ProductForm,
    rate: f64,
    x0: &[f64],
    horizon: f64,
    step: f64,
) -> Result<f64> {
    max_deviation(ode, q, rate, x0, horizon, step)
}

/// Drift at `step` divided by drift at `step / 2`.
pub fn step_halving_ratio(ode: &QuadraticODE, q: &ProductForm, rate: f64, x0: &[f64], horizon: f64, step: f64) -> Result<f64> {
    let coarse = max_deviation(ode, q, rate, x0, horizon, step)?;
    let fine = max_deviation(ode, q, rate, x0, horizon, step / 2.0)?;
    Ok(coarse / fine)
}

/// Outcome of exact sampling of `P(phi(x)) = C(x) P(x)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MapCheck {
    pub checked: usize,
    pub skipped: usize,
    pub failures: usize,
}

impl MapCheck {
    /// Passes when nothing failed; an empty sample passes vacuously.
    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    pub fn vacuous(&self) -> bool {
        self.checked == 0
    }
}

/// Exact evaluation of both sides at every `(point, h)`; samples on the
/// singular locus of the map or the cofactor are skipped.
pub fn check_map_dp(ctx: &DarbouxContext, pair: &DarbouxPair, points: &[Vec<Rational>], hs: &[Rational]) -> MapCheck {
    let mut out = MapCheck::default();
    let Some(c) = ctx.cofactor_function(&pair.cofactor) else {
        out.skipped = points.len() * hs.len();
        return out;
    };
    for x in points {
        for h in hs {
            let Some(y) = ctx.map.apply(x, h) else {
                out.skipped += 1;
                continue;
            };
            let mut px = x.clone();
            px.push(h.clone());
            let Some(cv) = c.eval(&px) else {
                out.skipped += 1;
                continue;
            };
            let mut py = y;
            py.push(h.clone());
            if pair.p.eval(&py) == cv * pair.p.eval(&px) {
                out.checked += 1;
            } else {
                out.failures += 1;
            }
        }
    }
    out
}

/// Seeded rational sample points with small numerators and denominators.
pub fn sample_points(n: usize, count: usize, seed: u64) -> Vec<Vec<Rational>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            (0..n)
                .map(|_| Rational::new(rng.gen_range(-30..=30i64).into(), rng.gen_range(1..=11i64).into()))
                .collect()
        })
        .collect()
}

/// Largest `|dx/dt - f(x)|` over `times`, with the times at which a
/// denominator vanishes.
#[derive(Clone, Debug, PartialEq)]
pub struct SolutionCheck {
    pub max_residual: f64,
    pub singular_times: Vec<f64>,
}

pub fn check_solution(ode: &QuadraticODE, sol: &ClosedFormSolution, constants: &[f64], times: &[f64]) -> SolutionCheck {
    let mut worst = 0.0f64;
    let mut singular = Vec::new();
    for &t in times {
        if sol.min_denominator(t, constants) < SINGULAR_THRESHOLD {
            singular.push(t);
            continue;
        }
        let x = sol.eval(t, constants);
        let v = sol.eval_velocity(t, constants);
        let f = ode.eval_f64(&x);
        for (a, b) in v.iter().zip(&f) {
            worst = worst.max((a - b).abs());
        }
    }
    SolutionCheck {
        max_residual: worst,
        singular_times: singular,
    }
}

/// Relative gap between exact and floating evaluation of `p` at `x`.
pub fn exact_float_gap(p: &MultiPoly, x: &[Rational]) -> f64 {
    let exact = p.eval(x);
    let xf: Vec<f64> = x.iter().map(rational_to_f64).collect();
    let float = p.eval_f64(&xf);
    let e = exact.to_f64().unwrap_or(f64::NAN);
    let scale = e.abs().max(1.0);
    if exact.is_zero() && float == 0.0 {
        return 0.0;
    }
    (float - e).abs() / scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode::parse_ode;
    use crate::poly::parse_poly;
    use num_traits::One;

    fn example() -> QuadraticODE {
        parse_ode("x' = 2 - 2*x + x*z; y' = -y + y*z; z' = -y - 3*z + z^2").unwrap()
    }

    #[test]
    fn constant_quantity_has_no_drift() {
        let ode = example();
        let d = check_integral_drift(&ode, &ProductForm::constant_one(), &[0.3, 0.4, 0.5], 1.0, 1e-2).unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn y_is_not_conserved() {
        let ode = example();
        let q = ProductForm::new(&[parse_poly("x2", 3).unwrap()], &[Rational::one()]);
        let d = check_integral_drift(&ode, &q, &[0.3, 0.4, 0.5], 1.0, 1e-3).unwrap();
        assert!(d > 1e-3);
    }

    #[test]
    fn linear_decay_rate() {
        let ode = parse_ode("x' = -2*x").unwrap();
        let q = ProductForm::new(&[parse_poly("x1", 1).unwrap()], &[Rational::one()]);
        let ok = check_exponential(&ode, &q, -2.0, &[1.5], 1.0, 1e-3).unwrap();
        assert!(ok < 1e-10);
        let wrong = check_exponential(&ode, &q, -1.0, &[1.5], 1.0, 1e-3).unwrap();
        assert!(wrong > 0.5);
    }

    #[test]
    fn blowup_is_reported() {
        let ode = parse_ode("x' = -1").unwrap();
        let q = ProductForm::new(&[parse_poly("x1", 1).unwrap()], &[-Rational::one()]);
        match check_integral_drift(&ode, &q, &[0.5], 1.0, 1e-3) {
            Err(Error::DenominatorBlowup { time }) => assert!((time - 0.5).abs() < 1e-2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn exact_and_float_agree() {
        let p = parse_poly("x1^3 - 2/3*x1*x2 + 5", 2).unwrap();
        for x in sample_points(2, 20, 4) {
            let mut pt = x.clone();
            pt.push(Rational::zero());
            assert!(exact_float_gap(&p, &pt) < 1e-12);
        }
    }
}
