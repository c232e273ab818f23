//! Quadratic vector fields `x_i' = sum a_ijk x_j x_k + sum b_ij x_j + c_i`.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{parse_expression, to_text_with_names, Monomial, MultiPoly, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadraticODE {
    n: usize,
    /// `a[i][j][k]`, symmetric in `j, k`.
    a: Vec<Vec<Vec<Rational>>>,
    b: Vec<Vec<Rational>>,
    c: Vec<Rational>,
    names: Vec<String>,
}

impl QuadraticODE {
    pub fn new(
        a: Vec<Vec<Vec<Rational>>>,
        b: Vec<Vec<Rational>>,
        c: Vec<Rational>,
        names: Vec<String>,
    ) -> Result<Self> {
        let n = c.len();
        if n == 0 {
            return Err(Error::InvalidInput("an ODE needs at least one variable".into()));
        }
        let square = |m: &Vec<Vec<Rational>>| m.len() == n && m.iter().all(|r| r.len() == n);
        if a.len() != n || !a.iter().all(square) || !square(&b) || names.len() != n {
            return Err(Error::InvalidInput("inconsistent tensor dimensions".into()));
        }
        for (i, ai) in a.iter().enumerate() {
            for j in 0..n {
                for k in 0..j {
                    if ai[j][k] != ai[k][j] {
                        return Err(Error::InvalidInput(format!(
                            "quadratic tensor not symmetric at ({}, {}, {})",
                            i + 1,
                            j + 1,
                            k + 1
                        )));
                    }
                }
            }
        }
        let mut seen = std::collections::BTreeSet::new();
        for name in &names {
            if !is_identifier(name) || !seen.insert(name.as_str()) {
                return Err(Error::InvalidInput(format!("bad or repeated variable name `{name}`")));
            }
        }
        Ok(QuadraticODE { n, a, b, c, names })
    }

    /// From right-hand sides over `x1..xn`; every polynomial must be free of `h`
    /// and of degree at most two.
    pub fn from_rhs(rhs: &[MultiPoly], names: Vec<String>) -> Result<Self> {
        let n = rhs.len();
        let zero = Rational::zero();
        let mut a = vec![vec![vec![zero.clone(); n]; n]; n];
        let mut b = vec![vec![zero.clone(); n]; n];
        let mut c = vec![zero; n];
        for (i, f) in rhs.iter().enumerate() {
            if f.nvars() != n || f.depends_on(n) {
                return Err(Error::InvalidInput("right-hand side must be a polynomial in x only".into()));
            }
            let name = names.get(i).cloned().unwrap_or_else(|| format!("x{}", i + 1));
            for (m, coef) in f.terms() {
                let vars: Vec<usize> = m
                    .exponents()
                    .iter()
                    .enumerate()
                    .flat_map(|(j, &e)| std::iter::repeat_n(j, e as usize))
                    .collect();
                match vars.as_slice() {
                    [] => c[i] = coef.clone(),
                    [j] => b[i][*j] = coef.clone(),
                    [j, k] if j == k => a[i][*j][*j] = coef.clone(),
                    [j, k] => {
                        let half = coef / Rational::from_integer(2.into());
                        a[i][*j][*k] = half.clone();
                        a[i][*k][*j] = half;
                    }
                    _ => {
                        return Err(Error::DegreeTooHigh {
                            variable: name,
                            degree: m.degree(),
                        })
                    }
                }
            }
        }
        Self::new(a, b, c, names)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn a(&self) -> &[Vec<Vec<Rational>>] {
        &self.a
    }

    pub fn b(&self) -> &[Vec<Rational>] {
        &self.b
    }

    pub fn c(&self) -> &[Rational] {
        &self.c
    }

    /// `f_i(x)` as polynomials over `x1..xn` (no `h` dependence).
    pub fn rhs(&self) -> Vec<MultiPoly> {
        let n = self.n;
        (0..n)
            .map(|i| {
                let mut f = MultiPoly::constant(n, self.c[i].clone());
                for j in 0..n {
                    f.add_term(Monomial::var(n + 1, j, 1), self.b[i][j].clone());
                    for k in 0..n {
                        let m = Monomial::var(n + 1, j, 1).mul(&Monomial::var(n + 1, k, 1));
                        f.add_term(m, self.a[i][j][k].clone());
                    }
                }
                f
            })
            .collect()
    }

    /// `f'(x)`, entry `(i, j)` is `df_i/dx_j`.
    pub fn jacobian_matrix(&self) -> Vec<Vec<MultiPoly>> {
        self.rhs()
            .iter()
            .map(|f| (0..self.n).map(|j| f.derivative(j)).collect())
            .collect()
    }

    pub fn divergence(&self) -> MultiPoly {
        self.rhs()
            .iter()
            .enumerate()
            .fold(MultiPoly::zero(self.n), |acc, (i, f)| &acc + &f.derivative(i))
    }

    pub fn is_zero(&self) -> bool {
        self.rhs().iter().all(MultiPoly::is_zero)
    }

    /// Slot names `names..., h` for printing polynomials over this system.
    pub fn slot_names(&self) -> Vec<String> {
        self.names.iter().cloned().chain(std::iter::once("h".to_string())).collect()
    }

    /// Print `p` using the declared variable names.
    pub fn show(&self, p: &MultiPoly) -> String {
        to_text_with_names(p, &self.slot_names())
    }

    /// Source text that parses back to the same system.
    pub fn print(&self) -> String {
        let mut out = String::new();
        for (name, f) in self.names.iter().zip(self.rhs()) {
            out.push_str(&format!("{name}' = {}\n", self.show(&f)));
        }
        out
    }

    pub fn to_json(&self) -> OdeJson {
        let s = |r: &Rational| r.to_string();
        OdeJson {
            n: self.n,
            a: self
                .a
                .iter()
                .map(|m| m.iter().map(|r| r.iter().map(s).collect()).collect())
                .collect(),
            b: self.b.iter().map(|r| r.iter().map(s).collect()).collect(),
            c: self.c.iter().map(s).collect(),
            names: self.names.clone(),
        }
    }

    pub fn from_json(j: &OdeJson) -> Result<Self> {
        let p = |s: &String| -> Result<Rational> {
            s.trim()
                .parse::<Rational>()
                .map_err(|_| Error::InvalidInput(format!("bad rational `{s}`")))
        };
        let a = j
            .a
            .iter()
            .map(|m| m.iter().map(|r| r.iter().map(p).collect()).collect())
            .collect::<Result<Vec<Vec<Vec<Rational>>>>>()?;
        let b = j
            .b
            .iter()
            .map(|r| r.iter().map(p).collect())
            .collect::<Result<Vec<Vec<Rational>>>>()?;
        let c = j.c.iter().map(p).collect::<Result<Vec<Rational>>>()?;
        if c.len() != j.n {
            return Err(Error::InvalidInput("`n` does not match the tensor sizes".into()));
        }
        Self::new(a, b, c, j.names.clone())
    }
}

/// Tensor form of an ODE; rationals are written as `"p/q"` strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OdeJson {
    pub n: usize,
    pub a: Vec<Vec<Vec<String>>>,
    pub b: Vec<Vec<String>>,
    pub c: Vec<String>,
    pub names: Vec<String>,
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_alphabetic() || c == '_')
        && chars.all(|c| c.is_alphanumeric() || c == '_')
}

struct Statement<'a> {
    name: &'a str,
    line: usize,
    name_col: usize,
    expr: &'a str,
    expr_col: usize,
}

fn syntax(line: usize, column: usize, msg: &str) -> Error {
    Error::Syntax {
        line,
        column,
        message: msg.to_string(),
    }
}

fn split_statements(src: &str) -> Result<Vec<Statement<'_>>> {
    let mut out = Vec::new();
    for (ln, raw) in src.lines().enumerate() {
        let line = ln + 1;
        let body = raw.split('#').next().unwrap_or("");
        let mut offset = 0;
        for piece in body.split(';') {
            let start = offset;
            offset += piece.len() + 1;
            if piece.trim().is_empty() {
                continue;
            }
            let col_of = |byte: usize| raw[..byte].chars().count() + 1;
            let Some(eq) = piece.find('=') else {
                let lead = piece.len() - piece.trim_start().len();
                return Err(syntax(line, col_of(start + lead), "expected `name' = expression`"));
            };
            let lhs = &piece[..eq];
            let lead = lhs.len() - lhs.trim_start().len();
            let lhs_t = lhs.trim();
            let Some(name) = lhs_t.strip_suffix('\'') else {
                return Err(syntax(line, col_of(start + lead), "left-hand side must read `name'`"));
            };
            let name = name.trim_end();
            if !is_identifier(name) {
                return Err(syntax(line, col_of(start + lead), "invalid variable name"));
            }
            let expr = &piece[eq + 1..];
            out.push(Statement {
                name,
                line,
                name_col: col_of(start + lead),
                expr,
                expr_col: col_of(start + eq + 1),
            });
        }
    }
    Ok(out)
}

/// Parse `name' = expression` lines (`;` also separates statements, `#`
/// starts a comment), or the JSON tensor form when the input starts with `{`.
pub fn parse_ode(src: &str) -> Result<QuadraticODE> {
    if src.trim_start().starts_with('{') {
        let j: OdeJson = serde_json::from_str(src)?;
        return QuadraticODE::from_json(&j);
    }
    let stmts = split_statements(src)?;
    if stmts.is_empty() {
        return Err(Error::InvalidInput("no equations found".into()));
    }
    let mut names: Vec<String> = Vec::new();
    for s in &stmts {
        if names.iter().any(|n| n == s.name) {
            return Err(syntax(s.line, s.name_col, &format!("`{}` is defined twice", s.name)));
        }
        names.push(s.name.to_string());
    }
    let n = names.len();
    let mut rhs = Vec::with_capacity(n);
    for s in &stmts {
        let resolve = |id: &str| names.iter().position(|x| x == id);
        let f = parse_expression(s.expr, n, s.line, s.expr_col, &resolve)?;
        if let Some((m, _)) = f.terms().find(|(m, _)| m.degree() > 2) {
            return Err(Error::DegreeTooHigh {
                variable: s.name.to_string(),
                degree: m.degree(),
            });
        }
        rhs.push(f);
    }
    QuadraticODE::from_rhs(&rhs, names)
}

/// The zero vector field on `n` variables named `x1..xn`.
pub fn zero_ode(n: usize) -> QuadraticODE {
    let z = Rational::zero();
    QuadraticODE::new(
        vec![vec![vec![z.clone(); n]; n]; n],
        vec![vec![z.clone(); n]; n],
        vec![z; n],
        (1..=n).map(|i| format!("x{i}")).collect(),
    )
    .expect("well-formed zero system")
}

/// Central finite-difference Jacobian of `f` at a floating point.
pub fn jacobian_fd(ode: &QuadraticODE, x: &[f64], step: f64) -> Vec<Vec<f64>> {
    let rhs = ode.rhs();
    let n = ode.dim();
    let eval = |p: &MultiPoly, pt: &[f64]| {
        let mut full = pt.to_vec();
        full.push(0.0);
        p.eval_f64(&full)
    };
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut xp = x.to_vec();
                    let mut xm = x.to_vec();
                    xp[j] += step;
                    xm[j] -= step;
                    (eval(&rhs[i], &xp) - eval(&rhs[i], &xm)) / (2.0 * step)
                })
                .collect()
        })
        .collect()
}

impl QuadraticODE {
    /// Numerical `f(x)`.
    pub fn eval_f64(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        let conv = crate::poly::rational_to_f64;
        (0..n)
            .map(|i| {
                let mut acc = conv(&self.c[i]);
                for j in 0..n {
                    acc += conv(&self.b[i][j]) * x[j];
                    for k in 0..n {
                        if !self.a[i][j][k].is_zero() {
                            acc += conv(&self.a[i][j][k]) * x[j] * x[k];
                        }
                    }
                }
                acc
            })
            .collect()
    }

}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{parse_poly, q, qr};

    const EXAMPLE: &str = "x' = 2 - 2*x + x*z; y' = -y + y*z; z' = -y - 3*z + z^2";

    #[test]
    fn parses_example_tensors() {
        let ode = parse_ode(EXAMPLE).unwrap();
        assert_eq!(ode.dim(), 3);
        assert_eq!(ode.c()[0], q(2));
        assert_eq!(ode.b()[0][0], q(-2));
        assert_eq!(ode.a()[0][0][2], qr(1, 2));
        assert_eq!(ode.a()[0][2][0], qr(1, 2));
        let f = ode.rhs();
        assert_eq!(f[0], parse_poly("2 - 2*x1 + x1*x3", 3).unwrap());
        assert_eq!(f[1], parse_poly("-x2 + x2*x3", 3).unwrap());
        assert_eq!(f[2], parse_poly("-x2 - 3*x3 + x3^2", 3).unwrap());
    }

    #[test]
    fn zero_and_cubic() {
        let ode = parse_ode("x' = 0").unwrap();
        assert_eq!(ode.dim(), 1);
        assert!(ode.is_zero());
        assert!(ode.divergence().is_zero());
        assert_eq!(ode.jacobian_matrix(), vec![vec![MultiPoly::zero(1)]]);
        assert!(matches!(parse_ode("x' = x^3"), Err(Error::DegreeTooHigh { degree: 3, .. })));
    }

    #[test]
    fn reports_positions() {
        assert!(matches!(
            parse_ode("x' = 1\ny' = x + w"),
            Err(Error::UnknownVariable { line: 2, column: 10, .. })
        ));
        assert!(matches!(
            parse_ode("# header\nx' = 2x"),
            Err(Error::Syntax { line: 2, column: 7, .. })
        ));
        assert!(matches!(parse_ode("x = 1"), Err(Error::Syntax { line: 1, column: 1, .. })));
        assert!(matches!(parse_ode("x' = 1; x' = 2"), Err(Error::Syntax { .. })));
    }

    #[test]
    fn jacobian_and_divergence_of_example() {
        let ode = parse_ode(EXAMPLE).unwrap();
        let p = |s: &str| parse_poly(s, 3).unwrap();
        assert_eq!(
            ode.jacobian_matrix(),
            vec![
                vec![p("x3 - 2"), p("0"), p("x1")],
                vec![p("0"), p("x3 - 1"), p("x2")],
                vec![p("0"), p("-1"), p("2*x3 - 3")],
            ]
        );
        assert_eq!(ode.divergence(), p("4*x3 - 6"));
    }

    #[test]
    fn linear_system_has_constant_jacobian() {
        let ode = parse_ode("u' = 3*u - v\nv' = 1/2*u").unwrap();
        let j = ode.jacobian_matrix();
        assert_eq!(j[0][0].constant_value(), Some(q(3)));
        assert_eq!(j[0][1].constant_value(), Some(q(-1)));
        assert_eq!(j[1][0].constant_value(), Some(qr(1, 2)));
        assert!(j[1][1].is_zero());
    }

    #[test]
    fn json_and_text_round_trip() {
        let ode = parse_ode(EXAMPLE).unwrap();
        assert_eq!(parse_ode(&ode.print()).unwrap(), ode);
        let js = serde_json::to_string(&ode.to_json()).unwrap();
        assert_eq!(parse_ode(&js).unwrap(), ode);
    }
}
