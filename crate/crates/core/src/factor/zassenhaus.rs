//! Univariate factorization over Z: modular factorization, Hensel lifting and
//! subset recombination.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::modp::{is_prime, Field, Fp};
use crate::error::{Error, Result};
use crate::poly::{QPoly, ZPoly};

/// Largest number of candidate subsets tried during recombination.
const MAX_SUBSETS: usize = 200_000;

/// Irreducible factors with multiplicity of a nonzero integer polynomial,
/// each primitive with positive leading coefficient, together with the
/// signed content.
pub fn factor_z(f: &ZPoly) -> Result<(BigInt, Vec<(ZPoly, u32)>)> {
    assert!(!f.is_zero(), "factor of zero");
    let mut content = f.content();
    let mut g = f.primitive();
    if g.lc().is_negative() {
        g = g.neg();
        content = -content;
    }
    let mut out = Vec::new();
    let zeros = g.0.iter().take_while(|c| c.is_zero()).count();
    if zeros > 0 {
        out.push((ZPoly::new(vec![BigInt::zero(), BigInt::one()]), zeros as u32));
        g = ZPoly::new(g.0[zeros..].to_vec());
    }
    for (part, mult) in squarefree_z(&g) {
        for fac in factor_squarefree_z(&part)? {
            out.push((fac, mult));
        }
    }
    out.sort_by(|a, b| a.0.degree().cmp(&b.0.degree()).then_with(|| a.0 .0.cmp(&b.0 .0)));
    Ok((content, out))
}

/// Yun's squarefree decomposition of a primitive polynomial with positive lc.
pub fn squarefree_z(f: &ZPoly) -> Vec<(ZPoly, u32)> {
    let mut out = Vec::new();
    if f.degree().unwrap_or(0) == 0 {
        return out;
    }
    let fq = f.to_q();
    let d = fq.derivative();
    let c = fq.gcd(&d);
    let mut w = fq.div_rem(&c).0;
    let mut y = d.div_rem(&c).0;
    let mut z = y.sub(&w.derivative());
    let mut i = 1;
    while w.degree().unwrap_or(0) > 0 {
        let g = w.gcd(&z);
        w = w.div_rem(&g).0;
        y = z.div_rem(&g).0;
        z = y.sub(&w.derivative());
        if g.degree().unwrap_or(0) > 0 {
            out.push((g.to_primitive_z(), i));
        }
        i += 1;
    }
    out
}

fn modulus_for(f: &ZPoly) -> Option<Field> {
    let lc = f.lc();
    let mut best: Option<(usize, Field)> = None;
    let mut tried = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for p in (3u64..).filter(|&p| is_prime(p)).take(60) {
        let field = Field::new(p);
        if field.reduce(&lc) == 0 {
            continue;
        }
        let fp = field.monic(&field.from_z(&f.0));
        if !field.is_squarefree(&fp) {
            continue;
        }
        let count = field.factor_squarefree(&fp, &mut rng).len();
        if best.as_ref().is_none_or(|(c, _)| count < *c) {
            best = Some((count, field));
        }
        tried += 1;
        if tried == 5 || count == 1 {
            break;
        }
    }
    best.map(|(_, f)| f)
}

/// Irreducible factors of a squarefree primitive polynomial with positive lc.
pub fn factor_squarefree_z(f: &ZPoly) -> Result<Vec<ZPoly>> {
    let deg = f.degree().unwrap_or(0);
    if deg == 0 {
        return Ok(Vec::new());
    }
    if deg == 1 {
        return Ok(vec![f.clone()]);
    }
    let field = modulus_for(f).ok_or_else(|| {
        Error::ResourceBudgetExceeded("no suitable prime for univariate factorization".into())
    })?;
    let mut rng = ChaCha8Rng::seed_from_u64(0xfac7);
    let lc = f.lc();
    let fp = field.monic(&field.from_z(&f.0));
    let mod_factors = field.factor_squarefree(&fp, &mut rng);
    if mod_factors.len() == 1 {
        return Ok(vec![f.clone()]);
    }

    // 2 |lc| B with B a Mignotte-type bound on factor coefficients
    let norm: BigInt = f.0.iter().map(|c| c.abs()).max().unwrap();
    let bound = BigInt::from(2) * lc.abs() * (BigInt::one() << (deg + 1)) * norm * BigInt::from(deg + 1);
    let p = BigInt::from(field.p);
    let mut k = 1u32;
    let mut pk = p.clone();
    while pk <= bound {
        pk *= &p;
        k += 1;
    }

    let lc_inv = mod_inverse(&lc, &pk);
    let target: Vec<BigInt> = f.0.iter().map(|c| (c * &lc_inv).mod_floor(&pk)).collect();
    let lifted = lift_tree(&field, &target, &mod_factors, k);
    recombine(f, lifted, &pk)
}

fn mod_inverse(a: &BigInt, m: &BigInt) -> BigInt {
    let e = a.extended_gcd(m);
    assert!(e.gcd.is_one(), "not invertible");
    e.x.mod_floor(m)
}

fn zmod(a: &[BigInt], m: &BigInt) -> Vec<BigInt> {
    let mut v: Vec<BigInt> = a.iter().map(|c| c.mod_floor(m)).collect();
    while v.last().is_some_and(|c| c.is_zero()) {
        v.pop();
    }
    v
}

fn zmul(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    ZPoly::new(a.to_vec()).mul(&ZPoly::new(b.to_vec())).0
}

fn to_z(a: &Fp) -> Vec<BigInt> {
    a.iter().map(|&c| BigInt::from(c)).collect()
}

/// Lift monic factors of `target mod p` to monic factors mod `p^k`.
fn lift_tree(field: &Field, target: &[BigInt], factors: &[Fp], k: u32) -> Vec<Vec<BigInt>> {
    if factors.len() == 1 {
        return vec![target.to_vec()];
    }
    let mid = factors.len() / 2;
    let g0 = factors[..mid].iter().fold(vec![1u64], |acc, f| field.mul(&acc, f));
    let h0 = factors[mid..].iter().fold(vec![1u64], |acc, f| field.mul(&acc, f));
    let (g, h) = lift_pair(field, target, &g0, &h0, k);
    let mut out = lift_tree(field, &g, &factors[..mid], k);
    out.extend(lift_tree(field, &h, &factors[mid..], k));
    out
}

/// Linear Hensel lifting of `target = g0 h0 mod p` (all monic) to `p^k`.
fn lift_pair(field: &Field, target: &[BigInt], g0: &Fp, h0: &Fp, k: u32) -> (Vec<BigInt>, Vec<BigInt>) {
    let p = BigInt::from(field.p);
    let (one, s, t) = field.xgcd(g0, h0);
    debug_assert_eq!(one, vec![1]);
    let mut g = to_z(g0);
    let mut h = to_z(h0);
    let mut pm = p.clone();
    for _ in 1..k {
        let next = &pm * &p;
        let prod = zmul(&g, &h);
        let diff: Vec<BigInt> = (0..target.len().max(prod.len()))
            .map(|i| {
                target.get(i).cloned().unwrap_or_default() - prod.get(i).cloned().unwrap_or_default()
            })
            .collect();
        let diff = zmod(&diff, &next);
        if diff.is_empty() {
            pm = next;
            continue;
        }
        let e: Vec<BigInt> = diff.iter().map(|c| c / &pm).collect();
        let e = field.from_z(&e);
        // e = sigma g0 + tau h0 with deg sigma < deg h0
        let (q, sigma) = field.div_rem(&field.mul(&e, &s), h0);
        let tau = field.add(&field.mul(&e, &t), &field.mul(&q, g0));
        let add = |a: &[BigInt], c: &Fp| -> Vec<BigInt> {
            let n = a.len().max(c.len());
            let v: Vec<BigInt> = (0..n)
                .map(|i| {
                    a.get(i).cloned().unwrap_or_default()
                        + &pm * BigInt::from(*c.get(i).unwrap_or(&0))
                })
                .collect();
            zmod(&v, &next)
        };
        g = add(&g, &tau);
        h = add(&h, &sigma);
        pm = next;
    }
    (g, h)
}

fn symmetric(a: &[BigInt], m: &BigInt) -> ZPoly {
    let half = m / 2;
    ZPoly::new(
        a.iter()
            .map(|c| {
                let c = c.mod_floor(m);
                if c > half {
                    c - m
                } else {
                    c
                }
            })
            .collect(),
    )
}

fn recombine(f: &ZPoly, mut lifted: Vec<Vec<BigInt>>, pk: &BigInt) -> Result<Vec<ZPoly>> {
    let mut out = Vec::new();
    let mut cur = f.clone();
    let mut size = 1;
    let mut tried = 0usize;
    'outer: while 2 * size <= lifted.len() {
        let n = lifted.len();
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            tried += 1;
            if tried > MAX_SUBSETS {
                return Err(Error::ResourceBudgetExceeded(format!(
                    "univariate recombination over {n} modular factors"
                )));
            }
            let lc = cur.lc();
            let prod = idx
                .iter()
                .fold(vec![lc.clone()], |acc, &i| zmod(&zmul(&acc, &lifted[i]), pk));
            let cand = symmetric(&prod, pk).primitive();
            if let Some(quot) = cur.exact_div(&cand) {
                out.push(cand.normalized());
                cur = quot;
                for &i in idx.iter().rev() {
                    lifted.remove(i);
                }
                continue 'outer;
            }
            if !next_subset(&mut idx, n) {
                break;
            }
        }
        size += 1;
    }
    if cur.degree().unwrap_or(0) > 0 {
        out.push(cur.normalized());
    }
    Ok(out)
}

/// Advance to the next `k`-subset of `0..n` in lexicographic order.
pub fn next_subset(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
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

/// Irreducible monic factors over Q of a squarefree rational polynomial.
pub fn factor_squarefree_q(f: &QPoly) -> Result<Vec<QPoly>> {
    Ok(factor_squarefree_z(&f.to_primitive_z())?
        .into_iter()
        .map(|g| g.to_q().monic())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zp(v: &[i64]) -> ZPoly {
        ZPoly::new(v.iter().map(|&c| BigInt::from(c)).collect())
    }

    #[test]
    fn factors_swinnerton_dyer_like_and_products() {
        // x^4 + 1 is irreducible over Z but splits modulo every prime
        let (_, f) = factor_z(&zp(&[1, 0, 0, 0, 1])).unwrap();
        assert_eq!(f, vec![(zp(&[1, 0, 0, 0, 1]), 1)]);

        let p = zp(&[3, 2]).mul(&zp(&[-1, 0, 5])).mul(&zp(&[1, 1, 1])).mul(&zp(&[1, 1, 1]));
        let (c, f) = factor_z(&p.scale(&BigInt::from(-6))).unwrap();
        assert_eq!(c, BigInt::from(-6));
        assert_eq!(
            f,
            vec![(zp(&[3, 2]), 1), (zp(&[-1, 0, 5]), 1), (zp(&[1, 1, 1]), 2)]
        );
    }

    #[test]
    fn large_leading_coefficient() {
        let a = zp(&[7, -3, 0, 12]);
        let b = zp(&[-5, 11, 9]);
        let (_, f) = factor_z(&a.mul(&b)).unwrap();
        assert_eq!(f.len(), 2);
        assert!(f.contains(&(a, 1)) && f.contains(&(b, 1)));
    }

    #[test]
    fn x_power_content() {
        let (_, f) = factor_z(&zp(&[0, 0, 2, 2])).unwrap();
        assert_eq!(f, vec![(zp(&[0, 1]), 2), (zp(&[1, 1]), 1)]);
    }
}
