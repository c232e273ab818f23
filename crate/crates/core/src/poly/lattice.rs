//! Integer lattices: kernels, integer solutions and small-norm bases.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::Rational;

/// Scale each row to integers.
pub fn integer_rows(m: &[Vec<Rational>]) -> Vec<Vec<BigInt>> {
    m.iter()
        .map(|row| {
            let den = row.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
            row.iter()
                .map(|c| (c * Rational::from_integer(den.clone())).to_integer())
                .collect()
        })
        .collect()
}

struct ColumnEchelon {
    /// `A * U`
    au: Vec<Vec<BigInt>>,
    u: Vec<Vec<BigInt>>,
    pivots: Vec<(usize, usize)>,
}

fn col_op(m: &mut [Vec<BigInt>], dst: usize, src: usize, q: &BigInt) {
    for row in m.iter_mut() {
        if !row[src].is_zero() {
            let t = &row[src] * q;
            row[dst] -= t;
        }
    }
}

fn col_swap(m: &mut [Vec<BigInt>], a: usize, b: usize) {
    for row in m.iter_mut() {
        row.swap(a, b);
    }
}

fn col_neg(m: &mut [Vec<BigInt>], a: usize) {
    for row in m.iter_mut() {
        row[a] = -&row[a];
    }
}

/// Unimodular column reduction `A * U = [H | 0]` with `H` in column echelon form.
fn column_echelon(a: &[Vec<BigInt>], cols: usize) -> ColumnEchelon {
    let mut au = a.to_vec();
    let mut u: Vec<Vec<BigInt>> = (0..cols)
        .map(|i| {
            (0..cols)
                .map(|j| if i == j { BigInt::one() } else { BigInt::zero() })
                .collect()
        })
        .collect();
    let mut pivots = Vec::new();
    let mut k = 0;
    for i in 0..au.len() {
        if k == cols {
            break;
        }
        loop {
            let best = (k..cols)
                .filter(|&j| !au[i][j].is_zero())
                .min_by_key(|&j| au[i][j].abs());
            let Some(best) = best else { break };
            col_swap(&mut au, k, best);
            col_swap(&mut u, k, best);
            let mut done = true;
            for j in k + 1..cols {
                if au[i][j].is_zero() {
                    continue;
                }
                let q = au[i][j].div_floor(&au[i][k]);
                col_op(&mut au, j, k, &q);
                col_op(&mut u, j, k, &q);
                if !au[i][j].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if au[i][k].is_zero() {
            continue;
        }
        if au[i][k].is_negative() {
            col_neg(&mut au, k);
            col_neg(&mut u, k);
        }
        pivots.push((i, k));
        k += 1;
    }
    ColumnEchelon { au, u, pivots }
}

/// Z-basis of `{v in Z^cols : A v = 0}`, size-reduced.
pub fn integer_kernel(a: &[Vec<BigInt>], cols: usize) -> Vec<Vec<BigInt>> {
    let ce = column_echelon(a, cols);
    let rank = ce.pivots.len();
    let basis: Vec<Vec<BigInt>> = (rank..cols)
        .map(|j| ce.u.iter().map(|row| row[j].clone()).collect())
        .collect();
    reduce_basis(basis)
}

/// Some integer solution of `A x = b`, or `None` if there is none.
pub fn solve_integer(a: &[Vec<BigInt>], b: &[BigInt], cols: usize) -> Option<Vec<BigInt>> {
    let ce = column_echelon(a, cols);
    let rank = ce.pivots.len();
    let mut y = vec![BigInt::zero(); cols];
    for &(i, k) in &ce.pivots {
        let mut r = b[i].clone();
        for (j, yj) in y.iter().enumerate().take(k) {
            r -= &ce.au[i][j] * yj;
        }
        let (qt, rem) = r.div_rem(&ce.au[i][k]);
        if !rem.is_zero() {
            return None;
        }
        y[k] = qt;
    }
    for (i, row) in ce.au.iter().enumerate() {
        let lhs: BigInt = row.iter().take(rank).zip(&y).map(|(a, b)| a * b).sum();
        if lhs != b[i] {
            return None;
        }
    }
    Some(
        ce.u.iter()
            .map(|row| row.iter().zip(&y).map(|(a, b)| a * b).sum())
            .collect(),
    )
}

fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(a: &[BigInt], q: &BigInt, b: &[BigInt]) -> Vec<BigInt> {
    a.iter().zip(b).map(|(x, y)| x - q * y).collect()
}

/// Nearest integer to `n / d` for `d > 0`.
fn round_div(n: &BigInt, d: &BigInt) -> BigInt {
    let two = BigInt::from(2);
    (n * &two + d).div_floor(&(d * &two))
}

/// Pairwise size reduction until no vector can be shortened, then sorted by
/// norm with a positive first nonzero entry.
pub fn reduce_basis(mut basis: Vec<Vec<BigInt>>) -> Vec<Vec<BigInt>> {
    basis.retain(|v| v.iter().any(|x| !x.is_zero()));
    loop {
        let mut changed = false;
        for i in 0..basis.len() {
            for j in 0..basis.len() {
                if i == j {
                    continue;
                }
                let nj = dot(&basis[j], &basis[j]);
                let q = round_div(&dot(&basis[i], &basis[j]), &nj);
                if q.is_zero() {
                    continue;
                }
                let cand = axpy(&basis[i], &q, &basis[j]);
                if dot(&cand, &cand) < dot(&basis[i], &basis[i]) {
                    basis[i] = cand;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    for v in basis.iter_mut() {
        if v.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative()) {
            for x in v.iter_mut() {
                *x = -&*x;
            }
        }
    }
    basis.sort_by(|a, b| dot(a, a).cmp(&dot(b, b)).then_with(|| b.cmp(a)));
    basis
}

/// Same lattice, spanned by its simplest vectors: smallest largest entry,
/// then smallest 1-norm, then fewest nonzeros, then lexicographically first.
/// Candidates are combinations with coefficients in {-2..2}; the input is
/// returned unchanged when those do not span the lattice or the rank exceeds 4.
pub fn canonical_basis(basis: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let d = basis.len();
    if d == 0 || d > 4 {
        return basis.to_vec();
    }
    let cols = basis[0].len();
    let mut cands: BTreeSet<Vec<BigInt>> = BTreeSet::new();
    for code in 1..5usize.pow(d as u32) {
        let mut c = code;
        let mut v = vec![BigInt::zero(); cols];
        for b in basis {
            let s = BigInt::from((c % 5) as i64 - 2);
            c /= 5;
            v = axpy(&v, &-s, b);
        }
        if let Some(first) = v.iter().find(|x| !x.is_zero()) {
            if first.is_negative() {
                v.iter_mut().for_each(|x| *x = -&*x);
            }
            cands.insert(v);
        }
    }
    let key = |v: &Vec<BigInt>| {
        let max = v.iter().map(|x| x.abs()).max().unwrap_or_default();
        let norm: BigInt = v.iter().map(|x| x.abs()).sum();
        (max, norm, v.iter().filter(|x| !x.is_zero()).count())
    };
    let mut cands: Vec<Vec<BigInt>> = cands.into_iter().collect();
    cands.sort_by(|a, b| key(a).cmp(&key(b)).then_with(|| a.cmp(b)));
    let as_columns = |vs: &[Vec<BigInt>]| -> Vec<Vec<BigInt>> {
        (0..cols).map(|i| vs.iter().map(|v| v[i].clone()).collect()).collect()
    };
    let mut picked: Vec<Vec<BigInt>> = Vec::with_capacity(d);
    for v in cands {
        picked.push(v);
        if column_echelon(&as_columns(&picked), picked.len()).pivots.len() < picked.len() {
            picked.pop();
        } else if picked.len() == d {
            break;
        }
    }
    let m = as_columns(&picked);
    if picked.len() == d && basis.iter().all(|b| solve_integer(&m, b, d).is_some()) {
        picked
    } else {
        basis.to_vec()
    }
}

/// Shorten `x` by subtracting kernel vectors; small exhaustive search over
/// shifts in {-1, 0, 1} finishes what greedy reduction leaves.
pub fn reduce_against(x: &[BigInt], kernel: &[Vec<BigInt>]) -> Vec<BigInt> {
    let mut best = x.to_vec();
    loop {
        let mut changed = false;
        for k in kernel {
            let q = round_div(&dot(&best, k), &dot(k, k));
            if q.is_zero() {
                continue;
            }
            let cand = axpy(&best, &q, k);
            if dot(&cand, &cand) < dot(&best, &best) {
                best = cand;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    if kernel.len() <= 6 {
        let base = best.clone();
        let total = 3usize.pow(kernel.len() as u32);
        for code in 0..total {
            let mut c = code;
            let mut cand = base.clone();
            for k in kernel {
                let s = BigInt::from((c % 3) as i64 - 1);
                c /= 3;
                if !s.is_zero() {
                    cand = axpy(&cand, &s, k);
                }
            }
            let (nc, nb) = (dot(&cand, &cand), dot(&best, &best));
            if nc < nb || (nc == nb && cand > best) {
                best = cand;
            }
        }
    }
    best
}
