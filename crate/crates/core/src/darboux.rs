//! Discrete Darboux polynomials `P(phi(x)) = C(x) P(x)` with cofactors drawn
//! from products of the Jacobian factors.
//!
//! Factors are used in the form `F / F(x, 0)`, so every candidate cofactor
//! equals its sign at `h = 0`.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::factor::{factor_irreducible, h_normalized, FactorBasis};
use crate::kahan::BirationalMap;
use crate::poly::{nullspace_over_qh, poly_gcd, LinearSystem, Monomial, MultiPoly, Rational, RationalFunction};

/// `sign * prod K_i^f_i / prod D_j^g_j` over the normalized factors.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CofactorCandidate {
    pub sign: i8,
    pub f: Vec<u32>,
    pub g: Vec<u32>,
}

impl CofactorCandidate {
    pub fn is_tautological(&self) -> bool {
        self.sign == 1 && self.f.iter().chain(&self.g).all(|&e| e == 0)
    }

    pub fn total_exponent(&self) -> u32 {
        self.f.iter().chain(&self.g).sum()
    }
}

/// Candidate list and whether the cap cut it short.
#[derive(Clone, Debug)]
pub struct CandidateList {
    pub candidates: Vec<CofactorCandidate>,
    pub truncated: bool,
    pub total: usize,
}

/// All `(sign, f, g)` with exponents at most `max_exp`, except the constant 1.
///
/// Ordered by total exponent, then sign (+1 first), then exponents. A basis
/// without factors gives no candidates.
pub fn enumerate_cofactors(basis: &FactorBasis, max_exp: u32, max_candidates: usize) -> CandidateList {
    let nf = basis.num_count();
    let ng = basis.den_count();
    if nf + ng == 0 {
        return CandidateList {
            candidates: Vec::new(),
            truncated: false,
            total: 0,
        };
    }
    let width = nf + ng;
    let base = max_exp as usize + 1;
    let mut all: Vec<CofactorCandidate> = Vec::new();
    let count = base.pow(width as u32);
    for code in 0..count {
        let mut c = code;
        let mut exps = Vec::with_capacity(width);
        for _ in 0..width {
            exps.push((c % base) as u32);
            c /= base;
        }
        exps.reverse();
        for sign in [1i8, -1] {
            let cand = CofactorCandidate {
                sign,
                f: exps[..nf].to_vec(),
                g: exps[nf..].to_vec(),
            };
            if !cand.is_tautological() {
                all.push(cand);
            }
        }
    }
    all.sort_by(|a, b| {
        a.total_exponent()
            .cmp(&b.total_exponent())
            .then(b.sign.cmp(&a.sign))
            .then_with(|| a.f.cmp(&b.f))
            .then_with(|| a.g.cmp(&b.g))
    });
    let total = all.len();
    let truncated = total > max_candidates;
    all.truncate(max_candidates);
    CandidateList {
        candidates: all,
        truncated,
        total,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DarbouxPair {
    /// Primitive over Q[h] with positive leading coefficient.
    pub p: MultiPoly,
    pub cofactor: CofactorCandidate,
    /// Total degree of `p` in `x`.
    pub degree: u32,
    /// `p` splits into several factors.
    pub reducible: bool,
}

/// Map, factor basis and the normalized factors used for cofactors.
#[derive(Clone, Debug)]
pub struct DarbouxContext {
    pub map: BirationalMap,
    pub basis: FactorBasis,
    num_hat: Vec<Option<MultiPoly>>,
    den_hat: Vec<Option<MultiPoly>>,
}

impl DarbouxContext {
    pub fn new(map: BirationalMap, basis: FactorBasis) -> Self {
        let num_hat = basis.numerator_factors.iter().map(|(f, _)| h_normalized(f)).collect();
        let den_hat = basis.denominator_factors.iter().map(|(f, _)| h_normalized(f)).collect();
        DarbouxContext {
            map,
            basis,
            num_hat,
            den_hat,
        }
    }

    pub fn nvars(&self) -> usize {
        self.map.n
    }

    /// Numerator factor `i` scaled to value 1 at `h = 0`.
    pub fn num_factor(&self, i: usize) -> Option<&MultiPoly> {
        self.num_hat[i].as_ref()
    }

    pub fn den_factor(&self, j: usize) -> Option<&MultiPoly> {
        self.den_hat[j].as_ref()
    }

    /// `(sign * prod K^f, prod D^g)`, `None` if a used factor cannot be normalized.
    pub fn cofactor_parts(&self, c: &CofactorCandidate) -> Option<(MultiPoly, MultiPoly)> {
        let n = self.nvars();
        let mut num = MultiPoly::from_int(n, c.sign as i64);
        for (i, &e) in c.f.iter().enumerate() {
            if e > 0 {
                num = &num * &self.num_hat[i].as_ref()?.pow(e);
            }
        }
        let mut den = MultiPoly::one(n);
        for (j, &e) in c.g.iter().enumerate() {
            if e > 0 {
                den = &den * &self.den_hat[j].as_ref()?.pow(e);
            }
        }
        Some((num, den))
    }

    pub fn cofactor_function(&self, c: &CofactorCandidate) -> Option<RationalFunction> {
        let (num, den) = self.cofactor_parts(c)?;
        RationalFunction::new(num, den).ok()
    }
}

/// Exponent vectors of total degree at most `d` in `n` variables.
pub fn monomials_up_to(n: usize, d: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    fn rec(n: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for e in (0..=left).rev() {
            cur.push(e);
            rec(n, left - e, cur, out);
            cur.pop();
        }
    }
    for deg in 0..=d {
        let mut level = Vec::new();
        rec(n, deg, &mut Vec::new(), &mut level);
        level.retain(|v| v.iter().sum::<u32>() == deg);
        out.extend(level);
    }
    out
}

/// `sum_{(a, e)} c h^e N^a D^(k - |a|)`, i.e. `D^k P(phi)` for `k >= deg_x P`.
pub fn pullback_cleared(map: &BirationalMap, p: &MultiPoly, k: u32) -> MultiPoly {
    let n = map.n;
    let mut npow: Vec<Vec<MultiPoly>> = map
        .numerators
        .iter()
        .map(|num| vec![MultiPoly::one(n), num.clone()])
        .collect();
    let mut dpow = vec![MultiPoly::one(n), map.common_den.clone()];
    let mut acc = MultiPoly::zero(n);
    for (m, c) in p.terms() {
        let xdeg = m.x_degree();
        let mut t = MultiPoly::monomial(n, Monomial::var(n + 1, n, m.exp(n)), c.clone());
        for i in 0..n {
            let e = m.exp(i) as usize;
            if e == 0 {
                continue;
            }
            while npow[i].len() <= e {
                let next = npow[i].last().unwrap() * &map.numerators[i];
                npow[i].push(next);
            }
            t = &t * &npow[i][e];
        }
        let r = (k - xdeg) as usize;
        while dpow.len() <= r {
            let next = dpow.last().unwrap() * &map.common_den;
            dpow.push(next);
        }
        acc = &acc + &(&t * &dpow[r]);
    }
    acc
}

/// Divide out the content of `p` over Q[h] and fix the sign.
pub fn normalize_over_qh(p: &MultiPoly) -> MultiPoly {
    let n = p.nvars();
    let mut g = MultiPoly::zero(n);
    for (_, coeffs) in p.univariate_parts(n) {
        g = poly_gcd(&g, &MultiPoly::from_univariate(n, n, &coeffs));
        if g.is_constant() {
            break;
        }
    }
    let q = if g.is_constant() { p.clone() } else { p.exact_div(&g).expect("content divides") };
    q.normalized()
}

/// Exact check of `D^k P(phi) prod D_j^g_j = s prod K_i^f_i D^k P`, `k = deg_x P`.
pub fn verify_dp_exact(ctx: &DarbouxContext, pair: &DarbouxPair) -> bool {
    let Some((cnum, cden)) = ctx.cofactor_parts(&pair.cofactor) else {
        return false;
    };
    let k = pair.p.x_degree();
    let lhs = &pullback_cleared(&ctx.map, &pair.p, k) * &cden;
    let dk = ctx.map.common_den.pow(k);
    let rhs = &(&cnum * &dk) * &pair.p;
    lhs == rhs
}

/// Search settings.
#[derive(Clone, Debug)]
pub struct SearchConfig {
    pub max_degree: u32,
    pub max_exp: u32,
    pub max_candidates: usize,
    pub prune: bool,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            max_degree: 3,
            max_exp: 2,
            max_candidates: 10_000,
            prune: true,
            seed: 0,
        }
    }
}

/// Candidate-independent part of the linear system: `N^a D^(m - |a|)` per monomial.
pub struct ColumnCache {
    pub max_degree: u32,
    pub monomials: Vec<Vec<u32>>,
    pullbacks: Vec<MultiPoly>,
    den_pow: MultiPoly,
}

impl ColumnCache {
    pub fn new(map: &BirationalMap, max_degree: u32) -> Self {
        let n = map.n;
        let monomials = monomials_up_to(n, max_degree);
        let pullbacks = monomials
            .par_iter()
            .map(|a| {
                let m = Monomial::from_exponents(a.iter().copied().chain([0]).collect());
                pullback_cleared(map, &MultiPoly::monomial(n, m, Rational::one()), max_degree)
            })
            .collect();
        ColumnCache {
            max_degree,
            monomials,
            den_pow: map.common_den.pow(max_degree),
            pullbacks,
        }
    }

    pub fn cols(&self) -> usize {
        self.monomials.len()
    }
}

const PROBE_PRIME: u64 = (1 << 61) - 1;

fn mulm(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % PROBE_PRIME as u128) as u64
}

fn addm(a: u64, b: u64) -> u64 {
    (a + b) % PROBE_PRIME
}

fn subm(a: u64, b: u64) -> u64 {
    (a + PROBE_PRIME - b) % PROBE_PRIME
}

fn powm(mut a: u64, mut e: u64) -> u64 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = mulm(r, a);
        }
        a = mulm(a, a);
        e >>= 1;
    }
    r
}

fn to_mod(r: &Rational) -> Option<u64> {
    let p = BigInt::from(PROBE_PRIME);
    let n = r.numer().mod_floor(&p).to_u64()?;
    let d = r.denom().mod_floor(&p).to_u64()?;
    (d != 0).then(|| mulm(n, powm(d, PROBE_PRIME - 2)))
}

fn eval_mod(p: &MultiPoly, pt: &[u64]) -> Option<u64> {
    let mut acc = 0;
    for (m, c) in p.terms() {
        let mut t = to_mod(c)?;
        for (i, &e) in m.exponents().iter().enumerate() {
            if e > 0 {
                t = mulm(t, powm(pt[i], e as u64));
            }
        }
        acc = addm(acc, t);
    }
    Some(acc)
}

fn rank_mod(mut m: Vec<Vec<u64>>, cols: usize) -> usize {
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..m.len()).find(|&r| m[r][c] != 0) else {
            continue;
        };
        m.swap(rank, piv);
        let inv = powm(m[rank][c], PROBE_PRIME - 2);
        for r in rank + 1..m.len() {
            if m[r][c] != 0 {
                let f = mulm(m[r][c], inv);
                for k in c..cols {
                    let v = mulm(f, m[rank][k]);
                    m[r][k] = subm(m[r][k], v);
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Candidate-independent values of the cleared identity at fixed rational
/// sample points `(x_s, h0)`, reduced modulo a large prime.
///
/// A nonzero solution over Q(h) with coprime polynomial entries stays nonzero
/// at `h0` and annihilates every sampled row over Q; reduction modulo a prime
/// cannot raise the rank, so full column rank modulo the prime proves the
/// candidate infeasible.
pub struct ProbeTable {
    cols: usize,
    /// per point: `N^a D^(m - |a|)` and `D^m x^a` per monomial
    pull: Vec<Vec<u64>>,
    own: Vec<Vec<u64>>,
    num_vals: Vec<Vec<u64>>,
    den_vals: Vec<Vec<u64>>,
}

impl ProbeTable {
    /// `None` when some coefficient cannot be reduced; then nothing is pruned.
    pub fn new(ctx: &DarbouxContext, max_degree: u32, seed: u64) -> Option<Self> {
        let n = ctx.nvars();
        let monomials = monomials_up_to(n, max_degree);
        let cols = monomials.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h0 = Rational::new(rng.gen_range(1..=97i64).into(), rng.gen_range(101..=199i64).into());
        let h0m = to_mod(&h0)?;
        let mut table = ProbeTable {
            cols,
            pull: Vec::new(),
            own: Vec::new(),
            num_vals: Vec::new(),
            den_vals: Vec::new(),
        };
        for _ in 0..cols + 3 {
            let mut pt: Vec<u64> = (0..n)
                .map(|_| to_mod(&Rational::from_integer(rng.gen_range(-1000..=1000i64).into())))
                .collect::<Option<_>>()?;
            pt.push(h0m);
            let d = eval_mod(&ctx.map.common_den, &pt)?;
            let nv: Vec<u64> = ctx.map.numerators.iter().map(|p| eval_mod(p, &pt)).collect::<Option<_>>()?;
            let dm = powm(d, max_degree as u64);
            let mut pull = Vec::with_capacity(cols);
            let mut own = Vec::with_capacity(cols);
            for a in &monomials {
                let deg: u32 = a.iter().sum();
                let mut pv = powm(d, (max_degree - deg) as u64);
                let mut xv = dm;
                for (i, &e) in a.iter().enumerate() {
                    pv = mulm(pv, powm(nv[i], e as u64));
                    xv = mulm(xv, powm(pt[i], e as u64));
                }
                pull.push(pv);
                own.push(xv);
            }
            let factor_vals = |fs: &[Option<MultiPoly>]| -> Vec<u64> {
                fs.iter()
                    .map(|f| f.as_ref().and_then(|f| eval_mod(f, &pt)).unwrap_or(0))
                    .collect()
            };
            table.num_vals.push(factor_vals(&ctx.num_hat));
            table.den_vals.push(factor_vals(&ctx.den_hat));
            table.pull.push(pull);
            table.own.push(own);
        }
        Some(table)
    }

    /// `false` proves that no Darboux polynomial of the table's degree has this cofactor.
    pub fn feasible(&self, cand: &CofactorCandidate) -> bool {
        self.nullity(cand) > 0
    }

    /// Upper bound on the dimension of the Darboux polynomials of the table's
    /// degree with this cofactor.
    pub fn nullity(&self, cand: &CofactorCandidate) -> usize {
        let rows: Vec<Vec<u64>> = (0..self.pull.len())
            .map(|s| {
                let mut f = if cand.sign == 1 { 1 } else { PROBE_PRIME - 1 };
                for (v, &e) in self.num_vals[s].iter().zip(&cand.f) {
                    f = mulm(f, powm(*v, e as u64));
                }
                let mut g = 1;
                for (v, &e) in self.den_vals[s].iter().zip(&cand.g) {
                    g = mulm(g, powm(*v, e as u64));
                }
                (0..self.cols)
                    .map(|c| subm(mulm(self.pull[s][c], g), mulm(f, self.own[s][c])))
                    .collect()
            })
            .collect();
        self.cols - rank_mod(rows, self.cols)
    }
}

/// Darboux polynomials of degree at most `cache.max_degree` for one cofactor.
pub fn solve_dp(ctx: &DarbouxContext, cache: &ColumnCache, cand: &CofactorCandidate) -> Vec<DarbouxPair> {
    let n = ctx.nvars();
    let Some((cnum, cden)) = ctx.cofactor_parts(cand) else {
        return Vec::new();
    };
    let rhs_factor = &cnum * &cache.den_pow;
    let cols = cache.cols();
    // x-monomial -> column -> coefficients in h
    let mut rows: BTreeMap<Monomial, Vec<Vec<Rational>>> = BTreeMap::new();
    for (col, a) in cache.monomials.iter().enumerate() {
        let xa = Monomial::from_exponents(a.iter().copied().chain([0]).collect());
        let column = &(&cache.pullbacks[col] * &cden) - &rhs_factor.mul_monomial(&xa, &Rational::one());
        for (m, c) in column.terms() {
            let e = m.exp(n) as usize;
            let entry = rows.entry(m.with_exp(n, 0)).or_insert_with(|| vec![Vec::new(); cols]);
            let slot = &mut entry[col];
            if slot.len() <= e {
                slot.resize(e + 1, Rational::zero());
            }
            slot[e] = c.clone();
        }
    }
    let matrix: Vec<Vec<MultiPoly>> = rows
        .into_values()
        .map(|r| r.iter().map(|c| MultiPoly::from_univariate(n, n, c)).collect())
        .collect();
    let sys = LinearSystem::new(n, cols, matrix, None).expect("entries are polynomials in h");
    let mut out = Vec::new();
    for w in nullspace_over_qh(&sys) {
        let mut p = MultiPoly::zero(n);
        for (a, wa) in cache.monomials.iter().zip(&w) {
            let xa = Monomial::from_exponents(a.iter().copied().chain([0]).collect());
            p = &p + &wa.mul_monomial(&xa, &Rational::one());
        }
        let p = normalize_over_qh(&p);
        if p.is_constant() && cand.sign == 1 && cand.total_exponent() == 0 {
            continue;
        }
        let pair = DarbouxPair {
            degree: p.x_degree(),
            p,
            cofactor: cand.clone(),
            reducible: false,
        };
        if verify_dp_exact(ctx, &pair) {
            out.push(pair);
        }
    }
    out
}

/// Result of a full candidate search.
#[derive(Clone, Debug)]
pub struct SearchResult {
    pub pairs: Vec<DarbouxPair>,
    pub candidates_total: usize,
    pub candidates_tried: usize,
    pub candidates_pruned: usize,
    pub truncated: bool,
    pub notes: Vec<String>,
}

/// Why a candidate cannot carry a Darboux polynomial of a map that reduces to
/// the identity at `h = 0`: there `C = sign`, so `sign = -1` forces `P(x, 0) = 0`,
/// against `P` being primitive over Q[h].
fn structurally_excluded(cand: &CofactorCandidate) -> bool {
    cand.sign == -1
}

/// Union of `solve_dp` over all candidates, deduplicated; irreducible pairs first.
pub fn search_all(ctx: &DarbouxContext, cfg: &SearchConfig) -> SearchResult {
    let list = enumerate_cofactors(&ctx.basis, cfg.max_exp, cfg.max_candidates);
    let mut notes = Vec::new();
    if ctx.basis.is_empty() {
        notes.push(
            "the Jacobian has no nonconstant factors; only the tautological cofactor C = 1 remains, \
             under which every polynomial is invariant"
                .to_string(),
        );
    }
    if list.truncated {
        notes.push(format!(
            "candidate list truncated to {} of {}",
            list.candidates.len(),
            list.total
        ));
    }
    let m = cfg.max_degree;
    let caches: Vec<OnceLock<ColumnCache>> = (0..=m).map(|_| OnceLock::new()).collect();
    let cache = |k: u32| caches[k as usize].get_or_init(|| ColumnCache::new(&ctx.map, k));
    let probes: Option<Vec<ProbeTable>> = if cfg.prune && m > 0 {
        (1..=m).map(|k| ProbeTable::new(ctx, k, cfg.seed)).collect()
    } else {
        None
    };
    let results: Vec<(bool, Vec<DarbouxPair>)> = list
        .candidates
        .par_iter()
        .map(|cand| {
            if !cfg.prune {
                return (false, solve_dp(ctx, cache(m), cand));
            }
            if structurally_excluded(cand) {
                return (true, Vec::new());
            }
            let Some(probes) = &probes else {
                return (false, solve_dp(ctx, cache(m), cand));
            };
            let nullity: Vec<usize> = probes.iter().map(|t| t.nullity(cand)).collect();
            let top = nullity[m as usize - 1];
            if top == 0 {
                return (true, Vec::new());
            }
            // smallest degree already carrying as many solutions as degree m can
            let k = nullity.iter().position(|&v| v == top).unwrap() as u32 + 1;
            let found = solve_dp(ctx, cache(k), cand);
            if found.len() >= top || k == m {
                (false, found)
            } else {
                (false, solve_dp(ctx, cache(m), cand))
            }
        })
        .collect();
    let pruned = results.iter().filter(|(p, _)| *p).count();
    let mut pairs: Vec<DarbouxPair> = Vec::new();
    for (_, found) in results {
        for pair in found {
            if !pairs.iter().any(|q| q.p == pair.p) {
                pairs.push(pair);
            }
        }
    }
    for pair in pairs.iter_mut() {
        pair.reducible = match factor_irreducible(&pair.p) {
            Ok(f) => f.factors.iter().map(|(_, m)| *m).sum::<u32>() > 1,
            Err(_) => false,
        };
    }
    pairs.sort_by_key(|p| (p.reducible, p.degree));
    SearchResult {
        pairs,
        candidates_total: list.total,
        candidates_tried: list.candidates.len(),
        candidates_pruned: pruned,
        truncated: list.truncated,
        notes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factor::FactorConfig;
    use crate::kahan::{build_kahan_map, jacobian_determinant};
    use crate::ode::parse_ode;
    use crate::poly::parse_poly;

    fn example() -> DarbouxContext {
        let ode = parse_ode("x' = 2 - 2*x + x*z; y' = -y + y*z; z' = -y - 3*z + z^2").unwrap();
        let map = build_kahan_map(&ode).unwrap();
        let j = jacobian_determinant(&map);
        let basis = FactorBasis::of(&j.j, &FactorConfig::default()).unwrap();
        DarbouxContext::new(map, basis)
    }

    #[test]
    fn counts_candidates() {
        let ctx = example();
        assert_eq!(enumerate_cofactors(&ctx.basis, 1, 10_000).candidates.len(), 127);
        let capped = enumerate_cofactors(&ctx.basis, 1, 10);
        assert!(capped.truncated && capped.candidates.len() == 10);
        assert!(enumerate_cofactors(&FactorBasis::empty(), 2, 100).candidates.is_empty());
    }

    #[test]
    fn monomial_count() {
        assert_eq!(monomials_up_to(3, 1).len(), 4);
        assert_eq!(monomials_up_to(3, 3).len(), 20);
        assert_eq!(monomials_up_to(2, 2).len(), 6);
    }

    #[test]
    fn y_is_not_invariant() {
        let ctx = example();
        let nf = ctx.basis.num_count();
        let pair = DarbouxPair {
            p: parse_poly("x2", 3).unwrap(),
            cofactor: CofactorCandidate {
                sign: 1,
                f: vec![0; nf],
                g: vec![0; ctx.basis.den_count()],
            },
            degree: 1,
            reducible: false,
        };
        assert!(!verify_dp_exact(&ctx, &pair));
        let constant = DarbouxPair {
            p: MultiPoly::one(3),
            degree: 0,
            ..pair
        };
        assert!(verify_dp_exact(&ctx, &constant));
    }

    #[test]
    fn infeasible_candidate_is_empty() {
        let ctx = example();
        let cache = ColumnCache::new(&ctx.map, 1);
        let nf = ctx.basis.num_count();
        let mut f = vec![0; nf];
        f[0] = 1;
        let cand = CofactorCandidate {
            sign: 1,
            f,
            g: vec![0; ctx.basis.den_count()],
        };
        assert!(solve_dp(&ctx, &cache, &cand).is_empty());
    }

    #[test]
    fn affine_pairs_of_example() {
        let ctx = example();
        let cfg = SearchConfig {
            max_degree: 1,
            max_exp: 1,
            ..SearchConfig::default()
        };
        let res = search_all(&ctx, &cfg);
        let mut found: Vec<MultiPoly> = res.pairs.iter().map(|p| p.p.clone()).collect();
        let mut expected: Vec<MultiPoly> = ["x3 - x2 - 3", "2*x3 + x2", "x2", "x1 + x2 + x3 - 1"]
            .iter()
            .map(|s| parse_poly(s, 3).unwrap().normalized())
            .collect();
        found.sort();
        expected.sort();
        assert_eq!(found, expected);
        assert!(res.pairs.iter().all(|p| !p.reducible && verify_dp_exact(&ctx, p)));
    }
}
