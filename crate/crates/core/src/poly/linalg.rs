//! Exact linear algebra over Q and over the rational functions in `h`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::multipoly::MultiPoly;
use super::upoly::ZPoly;
use super::Rational;
use crate::error::{Error, Result};

/// Matrix (and optional right-hand side) whose entries are polynomials in `h` only.
#[derive(Clone, Debug)]
pub struct LinearSystem {
    nvars: usize,
    matrix: Vec<Vec<MultiPoly>>,
    rhs: Option<Vec<MultiPoly>>,
    cols: usize,
}

impl LinearSystem {
    pub fn new(
        nvars: usize,
        cols: usize,
        matrix: Vec<Vec<MultiPoly>>,
        rhs: Option<Vec<MultiPoly>>,
    ) -> Result<Self> {
        let h = nvars;
        for row in &matrix {
            if row.len() != cols {
                return Err(Error::InvalidInput("ragged matrix".into()));
            }
            if row.iter().any(|e| e.nvars() != nvars || !e.is_univariate_in(h)) {
                return Err(Error::InvalidInput(
                    "linear system entries must be polynomials in h only".into(),
                ));
            }
        }
        if let Some(r) = &rhs {
            if r.len() != matrix.len() || r.iter().any(|e| !e.is_univariate_in(h)) {
                return Err(Error::InvalidInput("bad right-hand side".into()));
            }
        }
        Ok(LinearSystem {
            nvars,
            matrix,
            rhs,
            cols,
        })
    }

    pub fn rows(&self) -> usize {
        self.matrix.len()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn matrix(&self) -> &[Vec<MultiPoly>] {
        &self.matrix
    }

    pub fn rhs(&self) -> Option<&[MultiPoly]> {
        self.rhs.as_deref()
    }

    /// `matrix * w`, one polynomial per row.
    pub fn apply(&self, w: &[MultiPoly]) -> Vec<MultiPoly> {
        self.matrix
            .iter()
            .map(|row| {
                row.iter()
                    .zip(w)
                    .fold(MultiPoly::zero(self.nvars), |acc, (a, b)| &acc + &(a * b))
            })
            .collect()
    }
}

fn to_zpoly_row(row: &[MultiPoly], h: usize) -> Vec<ZPoly> {
    let den = row.iter().fold(BigInt::one(), |acc, e| {
        e.terms().fold(acc, |acc, (_, c)| acc.lcm(c.denom()))
    });
    let scale = Rational::from_integer(den);
    row.iter()
        .map(|e| {
            let coeffs = e.to_univariate(h);
            ZPoly::new(coeffs.iter().map(|c| (c * &scale).to_integer()).collect())
        })
        .collect()
}

/// Basis of the right nullspace over Q(h).
///
/// Every returned vector has polynomial entries in `h` with overall content 1
/// and a positive leading coefficient in its first nonzero entry. An empty
/// result means only the trivial solution exists.
pub fn nullspace_over_qh(sys: &LinearSystem) -> Vec<Vec<MultiPoly>> {
    let h = sys.nvars;
    let rows: Vec<Vec<ZPoly>> = sys.matrix.iter().map(|r| to_zpoly_row(r, h)).collect();
    nullspace_zh(&rows, sys.cols)
        .into_iter()
        .map(|v| {
            v.into_iter()
                .map(|z| {
                    let c: Vec<Rational> = z.0.into_iter().map(Rational::from_integer).collect();
                    MultiPoly::from_univariate(sys.nvars, h, &c)
                })
                .collect()
        })
        .collect()
}

/// Nullspace over Q(h) of a matrix with entries in Z[h].
pub fn nullspace_zh(rows: &[Vec<ZPoly>], cols: usize) -> Vec<Vec<ZPoly>> {
    if rows.is_empty() {
        return unit_vectors(cols);
    }
    // Rows independent at a sample value of h are independent over Q(h); when
    // the sample value is generic they also span the row space, which the
    // check below confirms before the reduced system is trusted.
    let selected = independent_rows_at(rows, cols, &BigInt::from(7919));
    if selected.len() < rows.len() {
        let sub: Vec<Vec<ZPoly>> = selected.iter().map(|&i| rows[i].clone()).collect();
        let basis = fraction_free_nullspace(&sub, cols);
        if basis.iter().all(|v| annihilates(rows, v)) {
            return basis;
        }
    }
    fraction_free_nullspace(rows, cols)
}

fn unit_vectors(cols: usize) -> Vec<Vec<ZPoly>> {
    (0..cols)
        .map(|j| {
            (0..cols)
                .map(|i| if i == j { ZPoly::one() } else { ZPoly::zero() })
                .collect()
        })
        .collect()
}

fn annihilates(rows: &[Vec<ZPoly>], v: &[ZPoly]) -> bool {
    rows.iter().all(|row| {
        row.iter()
            .zip(v)
            .fold(ZPoly::zero(), |acc, (a, b)| acc.add(&a.mul(b)))
            .is_zero()
    })
}

fn independent_rows_at(rows: &[Vec<ZPoly>], cols: usize, h0: &BigInt) -> Vec<usize> {
    let mut echelon: Vec<(usize, Vec<Rational>)> = Vec::new();
    let mut picked = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        let mut v: Vec<Rational> = row
            .iter()
            .map(|z| Rational::from_integer(z.eval(h0)))
            .collect();
        for (pc, e) in &echelon {
            if !v[*pc].is_zero() {
                let f = v[*pc].clone() / &e[*pc];
                for j in 0..cols {
                    if !e[j].is_zero() {
                        v[j] -= &f * &e[j];
                    }
                }
            }
        }
        if let Some(pc) = v.iter().position(|x| !x.is_zero()) {
            echelon.push((pc, v));
            picked.push(i);
            if picked.len() == cols {
                break;
            }
        }
    }
    picked
}

/// Fraction-free Gauss-Jordan elimination; after it every pivot equals the
/// last pivot `d`, so each free column `j` yields the polynomial nullspace
/// vector with `d` at `j` and minus the column entries at the pivot positions.
fn fraction_free_nullspace(rows: &[Vec<ZPoly>], cols: usize) -> Vec<Vec<ZPoly>> {
    let mut m: Vec<Vec<ZPoly>> = rows.to_vec();
    let nrows = m.len();
    let mut prev = ZPoly::one();
    let mut pivots: Vec<usize> = Vec::new();
    let mut r = 0;
    for col in 0..cols {
        if r == nrows {
            break;
        }
        let Some(p) = (r..nrows)
            .filter(|&i| !m[i][col].is_zero())
            .min_by_key(|&i| (m[i][col].degree(), m[i][col].0.iter().map(|c| c.bits()).max()))
        else {
            continue;
        };
        m.swap(r, p);
        let piv = m[r][col].clone();
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[col].clone();
            for j in 0..cols {
                let t = piv.mul(&row[j]).sub(&f.mul(&pivot_row[j]));
                row[j] = t.exact_div(&prev).expect("fraction-free elimination divides exactly");
            }
        }
        prev = piv;
        pivots.push(col);
        r += 1;
    }
    let d = prev;
    let mut basis = Vec::new();
    for free in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![ZPoly::zero(); cols];
        v[free] = d.clone();
        for (i, &pc) in pivots.iter().enumerate() {
            v[pc] = m[i][free].neg();
        }
        basis.push(make_primitive(v));
    }
    basis
}

fn make_primitive(v: Vec<ZPoly>) -> Vec<ZPoly> {
    let g = v.iter().fold(ZPoly::zero(), |acc, e| acc.gcd(e));
    let mut out: Vec<ZPoly> = if g.is_zero() || g == ZPoly::one() {
        v
    } else {
        v.iter()
            .map(|e| e.exact_div(&g).expect("content divides"))
            .collect()
    };
    if let Some(first) = out.iter().find(|e| !e.is_zero()) {
        if first.lc().is_negative() {
            out = out.iter().map(|e| e.neg()).collect();
        }
    }
    out
}

/// Solution set of a linear system over Q.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolutionSet {
    Infeasible,
    Solutions {
        particular: Vec<Rational>,
        nullspace: Vec<Vec<Rational>>,
    },
}

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rref(m: &mut [Vec<Rational>], cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..cols {
        if r == m.len() {
            break;
        }
        let Some(p) = (r..m.len()).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][col].recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && !row[col].is_zero() {
                let f = row[col].clone();
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    if !y.is_zero() {
                        *x -= &f * y;
                    }
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    pivots
}

pub fn rank_rational(matrix: &[Vec<Rational>], cols: usize) -> usize {
    let mut m = matrix.to_vec();
    rref(&mut m, cols).len()
}

pub fn nullspace_rational(matrix: &[Vec<Rational>], cols: usize) -> Vec<Vec<Rational>> {
    let mut m = matrix.to_vec();
    let pivots = rref(&mut m, cols);
    (0..cols)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![Rational::zero(); cols];
            v[free] = Rational::one();
            for (i, &pc) in pivots.iter().enumerate() {
                v[pc] = -m[i][free].clone();
            }
            v
        })
        .collect()
}

/// Exact solution set of `matrix * x = rhs` over Q.
pub fn solve_rational(matrix: &[Vec<Rational>], rhs: &[Rational]) -> SolutionSet {
    assert_eq!(matrix.len(), rhs.len(), "dimension mismatch");
    let cols = matrix.first().map_or(0, |r| r.len());
    let mut aug: Vec<Vec<Rational>> = matrix
        .iter()
        .zip(rhs)
        .map(|(row, b)| {
            assert_eq!(row.len(), cols, "ragged matrix");
            let mut r = row.clone();
            r.push(b.clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug, cols + 1);
    if pivots.contains(&cols) {
        return SolutionSet::Infeasible;
    }
    let mut particular = vec![Rational::zero(); cols];
    for (i, &pc) in pivots.iter().enumerate() {
        particular[pc] = aug[i][cols].clone();
    }
    let nullspace = (0..cols)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![Rational::zero(); cols];
            v[free] = Rational::one();
            for (i, &pc) in pivots.iter().enumerate() {
                v[pc] = -aug[i][free].clone();
            }
            v
        })
        .collect();
    SolutionSet::Solutions {
        particular,
        nullspace,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{parse_poly, q};

    fn sys(entries: &[&[&str]]) -> LinearSystem {
        let cols = entries[0].len();
        let m = entries
            .iter()
            .map(|r| r.iter().map(|s| parse_poly(s, 1).unwrap()).collect())
            .collect();
        LinearSystem::new(1, cols, m, None).unwrap()
    }

    fn hp(s: &str) -> MultiPoly {
        parse_poly(s, 1).unwrap()
    }

    #[test]
    fn nullspace_examples() {
        assert_eq!(
            nullspace_over_qh(&sys(&[&["1", "-1"]])),
            vec![vec![hp("1"), hp("1")]]
        );
        assert_eq!(
            nullspace_over_qh(&sys(&[&["h", "-1"], &["h^2", "-h"]])),
            vec![vec![hp("1"), hp("h")]]
        );
        assert!(nullspace_over_qh(&sys(&[&["1", "0"], &["0", "1"]])).is_empty());
    }

    #[test]
    fn rejects_state_variables() {
        let m = vec![vec![hp("x1")]];
        assert!(LinearSystem::new(1, 1, m, None).is_err());
    }

    #[test]
    fn nullspace_certificate_on_rank_deficient_system() {
        let s = sys(&[
            &["h", "1 - h", "2", "h^2"],
            &["2*h", "2 - 2*h", "4", "2*h^2"],
            &["1", "h", "h + 1", "0"],
            &["h + 1", "1", "h + 3", "h^2"],
        ]);
        let basis = nullspace_over_qh(&s);
        assert_eq!(basis.len(), 2);
        for w in &basis {
            assert!(s.apply(w).iter().all(|e| e.is_zero()));
        }
    }

    #[test]
    fn rational_solve_examples() {
        assert_eq!(
            solve_rational(&[vec![q(1)]], &[q(2)]),
            SolutionSet::Solutions {
                particular: vec![q(2)],
                nullspace: vec![]
            }
        );
        assert_eq!(
            solve_rational(&[vec![q(1), q(1)]], &[q(0)]),
            SolutionSet::Solutions {
                particular: vec![q(0), q(0)],
                nullspace: vec![vec![q(-1), q(1)]]
            }
        );
        assert_eq!(
            solve_rational(&[vec![q(1), q(1)], vec![q(2), q(2)]], &[q(0), q(1)]),
            SolutionSet::Infeasible
        );
    }
}
