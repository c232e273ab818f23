//! Kahan's discretization `(x' - x)/h = Q(x, x') + B(x + x')/2 + c` of a
//! quadratic vector field and the Jacobian determinant of the resulting map.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::ode::QuadraticODE;
use crate::poly::{MultiPoly, Rational, RationalFunction};

/// A one-step method producing a birational map from a quadratic ODE.
pub trait Discretization {
    fn name(&self) -> &'static str;
    fn build(&self, ode: &QuadraticODE) -> Result<BirationalMap>;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct KahanMethod;

impl Discretization for KahanMethod {
    fn name(&self) -> &'static str {
        "kahan"
    }

    fn build(&self, ode: &QuadraticODE) -> Result<BirationalMap> {
        build_kahan_map(ode)
    }
}

/// `x_i' = N_i(x, h) / D(x, h)`; numerators and denominator are not reduced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BirationalMap {
    pub n: usize,
    pub numerators: Vec<MultiPoly>,
    pub common_den: MultiPoly,
    pub provenance: String,
}

/// Determinant of a square matrix of polynomials: Laplace expansion up to
/// size 4, fraction-free elimination above.
pub fn det(m: &[Vec<MultiPoly>], nvars: usize) -> MultiPoly {
    let n = m.len();
    if n == 0 {
        return MultiPoly::one(nvars);
    }
    if n <= 4 {
        let cols: Vec<usize> = (0..n).collect();
        laplace(m, 0, &cols, nvars)
    } else {
        bareiss_det(m, nvars)
    }
}

fn laplace(m: &[Vec<MultiPoly>], row: usize, cols: &[usize], nvars: usize) -> MultiPoly {
    if cols.len() == 1 {
        return m[row][cols[0]].clone();
    }
    let mut acc = MultiPoly::zero(nvars);
    for (k, &c) in cols.iter().enumerate() {
        if m[row][c].is_zero() {
            continue;
        }
        let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
        let minor = laplace(m, row + 1, &rest, nvars);
        let term = &m[row][c] * &minor;
        acc = if k % 2 == 0 { &acc + &term } else { &acc - &term };
    }
    acc
}

fn bareiss_det(m: &[Vec<MultiPoly>], nvars: usize) -> MultiPoly {
    let n = m.len();
    let mut a = m.to_vec();
    let mut prev = MultiPoly::one(nvars);
    let mut negate = false;
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&i| !a[i][k].is_zero()) else {
                return MultiPoly::zero(nvars);
            };
            a.swap(k, p);
            negate = !negate;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let t = &(&a[i][j] * &a[k][k]) - &(&a[i][k] * &a[k][j]);
                a[i][j] = t.exact_div(&prev).expect("fraction-free step divides exactly");
            }
            a[i][k] = MultiPoly::zero(nvars);
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    if negate {
        -d
    } else {
        d
    }
}

fn replace_column(m: &[Vec<MultiPoly>], col: usize, v: &[MultiPoly]) -> Vec<Vec<MultiPoly>> {
    m.iter()
        .zip(v)
        .map(|(row, x)| {
            let mut r = row.clone();
            r[col] = x.clone();
            r
        })
        .collect()
}

/// `x' = x + h adj(M) f / det M` with `M = I - (h/2) f'(x)`; by Cramer's rule
/// `(adj M f)_i` is `det M` with column `i` replaced by `f`.
pub fn build_kahan_map(ode: &QuadraticODE) -> Result<BirationalMap> {
    let n = ode.dim();
    let h = MultiPoly::h(n);
    let half_h = h.scale(&Rational::new(1.into(), 2.into()));
    let jac = ode.jacobian_matrix();
    let m: Vec<Vec<MultiPoly>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let e = -(&half_h * &jac[i][j]);
                    if i == j {
                        &e + &MultiPoly::one(n)
                    } else {
                        e
                    }
                })
                .collect()
        })
        .collect();
    let d = det(&m, n);
    if d.is_zero() {
        return Err(Error::DegenerateMap);
    }
    let f = ode.rhs();
    let numerators = (0..n)
        .map(|i| {
            let cramer = det(&replace_column(&m, i, &f), n);
            &(&MultiPoly::var(n, i) * &d) + &(&h * &cramer)
        })
        .collect();
    Ok(BirationalMap {
        n,
        numerators,
        common_den: d,
        provenance: format!("kahan discretization of {}", ode.names().join(", ")),
    })
}

/// Jacobian determinant of a map, reduced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JacobianData {
    pub j: RationalFunction,
}

impl BirationalMap {
    pub fn identity(n: usize) -> Self {
        BirationalMap {
            n,
            numerators: (0..n).map(|i| MultiPoly::var(n, i)).collect(),
            common_den: MultiPoly::one(n),
            provenance: "identity".into(),
        }
    }

    /// Components as reduced rational functions.
    pub fn components(&self) -> Vec<RationalFunction> {
        self.numerators
            .iter()
            .map(|num| RationalFunction::new(num.clone(), self.common_den.clone()).expect("nonzero den"))
            .collect()
    }

    /// Image of an exact point `x` at step `h`, `None` where `D` vanishes.
    pub fn apply(&self, x: &[Rational], h: &Rational) -> Option<Vec<Rational>> {
        let mut pt = x.to_vec();
        pt.push(h.clone());
        let d = self.common_den.eval(&pt);
        if d.is_zero() {
            return None;
        }
        Some(self.numerators.iter().map(|num| num.eval(&pt) / &d).collect())
    }

    pub fn apply_f64(&self, x: &[f64], h: f64) -> Vec<f64> {
        let mut pt = x.to_vec();
        pt.push(h);
        let d = self.common_den.eval_f64(&pt);
        self.numerators.iter().map(|num| num.eval_f64(&pt) / d).collect()
    }

    /// `(x' - x)/h` minus the symmetric bilinear right-hand side, cleared of
    /// `D`; zero for a correct Kahan map of `ode`.
    pub fn defining_residual(&self, ode: &QuadraticODE) -> Vec<MultiPoly> {
        let n = self.n;
        let d = &self.common_den;
        let h = MultiPoly::h(n);
        let x = |j: usize| MultiPoly::var(n, j);
        let half = Rational::new(1.into(), 2.into());
        (0..n)
            .map(|i| {
                let lhs = &self.numerators[i] - &(&x(i) * d);
                let mut rhs = d.scale(&ode.c()[i]);
                for j in 0..n {
                    let bij = &ode.b()[i][j];
                    if !bij.is_zero() {
                        rhs = &rhs + &(&(&x(j) * d) + &self.numerators[j]).scale(&(bij * &half));
                    }
                    for k in 0..n {
                        let a = &ode.a()[i][j][k];
                        if a.is_zero() {
                            continue;
                        }
                        let s = &(&x(j) * &self.numerators[k]) + &(&self.numerators[j] * &x(k));
                        rhs = &rhs + &s.scale(&(a * &half));
                    }
                }
                &lhs - &(&h * &rhs)
            })
            .collect()
    }

    /// `(phi(x) - x)/h` at `h = 0`, which must equal `f(x)`.
    pub fn consistency_limit(&self) -> Vec<MultiPoly> {
        let n = self.n;
        self.numerators
            .iter()
            .enumerate()
            .map(|(i, num)| {
                let inc = num - &(&MultiPoly::var(n, i) * &self.common_den);
                // the increment is divisible by h, its h-linear part over D(x, 0)
                let d0 = self.common_den.h_coefficient(0);
                let c = inc.h_coefficient(1);
                let d0c = d0.constant_value().expect("D(x, 0) = 1");
                c.scale(&d0c.recip())
            })
            .collect()
    }
}

/// `J = det(d phi_i / d x_j)`.
///
/// With `A = dN/dx` and `g = grad D`, the Jacobian matrix is `(D A - N g^T)/D^2`
/// and the determinant lemma gives `J = (D det A - g^T adj(A) N) / D^(n+1)`.
pub fn jacobian_determinant(map: &BirationalMap) -> JacobianData {
    let n = map.n;
    let d = &map.common_den;
    let a: Vec<Vec<MultiPoly>> = map
        .numerators
        .iter()
        .map(|num| (0..n).map(|j| num.derivative(j)).collect())
        .collect();
    let mut num = d * &det(&a, n);
    for j in 0..n {
        let g = d.derivative(j);
        if g.is_zero() {
            continue;
        }
        num = &num - &(&g * &det(&replace_column(&a, j, &map.numerators), n));
    }
    let parts = vec![d.clone(); n + 1];
    JacobianData {
        j: RationalFunction::with_factored_den(num, &parts).expect("nonzero den"),
    }
}

/// Outcome of the reversibility check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TimeSymmetryReport {
    pub checked: usize,
    pub failures: Vec<Vec<Rational>>,
    /// Points where a denominator vanished.
    pub skipped: Vec<Vec<Rational>>,
}

impl TimeSymmetryReport {
    pub fn holds(&self) -> bool {
        self.failures.is_empty()
    }
}

/// `phi_{-h0}(phi_{h0}(p)) = p` by exact evaluation at each point.
pub fn check_time_symmetry(map: &BirationalMap, points: &[Vec<Rational>], h0: &Rational) -> TimeSymmetryReport {
    let mut report = TimeSymmetryReport {
        checked: 0,
        failures: Vec::new(),
        skipped: Vec::new(),
    };
    let minus = -h0.clone();
    for p in points {
        let back = map.apply(p, h0).and_then(|y| map.apply(&y, &minus));
        match back {
            None => report.skipped.push(p.clone()),
            Some(q) => {
                report.checked += 1;
                if &q != p {
                    report.failures.push(p.clone());
                }
            }
        }
    }
    report
}

impl JacobianData {
    /// `J(x, 0)`, which is 1 for a consistent one-step method.
    pub fn at_h_zero(&self) -> Option<Rational> {
        let num = self.j.num().h_coefficient(0);
        let den = self.j.den().h_coefficient(0);
        Some(num.constant_value()? / den.constant_value()?)
    }

    pub fn is_one(&self) -> bool {
        self.j.num().is_one() && self.j.den().is_one()
    }
}

/// Whether `J(x, 0) = 1` exactly.
pub fn jacobian_normalized(j: &JacobianData) -> bool {
    j.at_h_zero() == Some(Rational::one())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode::{parse_ode, zero_ode};
    use crate::poly::{parse_poly, q, qr};

    const EXAMPLE: &str = "x' = 2 - 2*x + x*z; y' = -y + y*z; z' = -y - 3*z + z^2";

    #[test]
    fn zero_field_gives_identity() {
        let map = build_kahan_map(&zero_ode(3)).unwrap();
        assert_eq!(map.common_den, MultiPoly::one(3));
        assert_eq!(map.numerators, BirationalMap::identity(3).numerators);
        assert!(jacobian_determinant(&map).is_one());
    }

    #[test]
    fn one_dimensional_quadratic() {
        let ode = parse_ode("x' = x^2").unwrap();
        let map = build_kahan_map(&ode).unwrap();
        let p = |s: &str| parse_poly(s, 1).unwrap();
        let phi = &map.components()[0];
        // x + h x^2/(1 - h x) = x / (1 - h x)
        assert_eq!(phi, &RationalFunction::new(p("x1"), p("1 - h*x1")).unwrap());
        // d/dx [x/(1 - hx)] = 1/(1 - hx)^2
        let j = jacobian_determinant(&map);
        assert_eq!(j.j, RationalFunction::new(p("1"), p("(1 - h*x1)^2")).unwrap());
        assert_eq!(j.j, phi.derivative(0));
    }

    #[test]
    fn example_identities() {
        let ode = parse_ode(EXAMPLE).unwrap();
        let map = build_kahan_map(&ode).unwrap();
        assert!(map.defining_residual(&ode).iter().all(MultiPoly::is_zero));
        assert_eq!(map.consistency_limit(), ode.rhs());
        let j = jacobian_determinant(&map);
        assert!(jacobian_normalized(&j));
        let report = check_time_symmetry(&map, &[vec![q(1), q(1), q(1)]], &qr(1, 10));
        assert!(report.holds() && report.checked == 1);
    }

    #[test]
    fn corrupted_map_is_not_reversible() {
        let ode = parse_ode(EXAMPLE).unwrap();
        let mut map = build_kahan_map(&ode).unwrap();
        map.numerators[0] = &map.numerators[0] + &MultiPoly::h(3);
        let report = check_time_symmetry(&map, &[vec![q(1), q(1), q(1)]], &qr(1, 10));
        assert!(!report.holds());
    }

    #[test]
    fn bareiss_agrees_with_laplace() {
        let p = |s: &str| parse_poly(s, 2).unwrap();
        let m: Vec<Vec<MultiPoly>> = (0..5)
            .map(|i| {
                (0..5)
                    .map(|j| p(&format!("{}*x1 + {}*h - {}*x2 + {}", (i * 3 + j) % 5, (i + 2 * j) % 3, (i * j) % 4, i + j)))
                    .collect()
            })
            .collect();
        let expect = {
            // expansion along the first row with 4x4 Laplace minors
            let mut acc = MultiPoly::zero(2);
            for c in 0..5 {
                let minor: Vec<Vec<MultiPoly>> = m[1..]
                    .iter()
                    .map(|r| r.iter().enumerate().filter(|(j, _)| *j != c).map(|(_, e)| e.clone()).collect())
                    .collect();
                let t = &m[0][c] * &det(&minor, 2);
                acc = if c % 2 == 0 { &acc + &t } else { &acc - &t };
            }
            acc
        };
        assert_eq!(det(&m, 2), expect);
    }
}
