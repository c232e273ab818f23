use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::time::Instant;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use kahan_darboux::darboux::{search_all, verify_dp_exact, DarbouxContext, DarbouxPair, SearchConfig};
use kahan_darboux::factor::{factor_irreducible, FactorBasis, FactorConfig};
use kahan_darboux::kahan::{build_kahan_map, check_time_symmetry, jacobian_determinant, BirationalMap, JacobianData};
use kahan_darboux::ode::{parse_ode, QuadraticODE};
use kahan_darboux::poly::lattice::solve_integer;
use kahan_darboux::poly::{parse_poly, Monomial, MultiPoly, Rational, RationalFunction};
use kahan_darboux::report::{emit_report, run_pipeline, Format, PipelineConfig};
use kahan_darboux::structure::{
    continuum_limit, find_combinations, find_discrete_combinations, synthesize_solution, Combination,
    CombinationKind, ContinuumPair,
};
use kahan_darboux::verify::{check_integral_drift, check_solution, step_halving_ratio, ProductForm};

const EXAMPLE: &str = "x' = 2 - 2*x + x*z\ny' = -y + y*z\nz' = -y - 3*z + z^2\n";

// Factors of the Jacobian determinant of the example, as printed in the source.
const K1: &str = "-1/4*h^2*x2 + 3/4*h^2*x3 - 3/4*h^2 - 1/2*h*x3 - h + 1";
const K2: &str = "-1/4*h^2*x2 - 1/4*h^2*x3 - 3/4*h^2 - 1/2*h*x3 + h + 1";
const K3: &str = "-1/4*h^2*x2 - 3/4*h^2*x3 + 3/4*h^2 - 1/2*h*x3 + 2*h + 1";
const K4: &str = "1/8*h^3*x2*x3 - 1/8*h^3*x3^2 - 1/4*h^3*x2 + 7/8*h^3*x3 + 1/4*h^2*x3^2 - 3/4*h^3 \
                  - 1/4*h^2*x2 - 1/4*h^2*x3 - 5/4*h^2 - h*x3 + h + 1";
const D1: &str = "-1/2*h*x3 + h + 1";
const D2: &str = "1/2*h^2*x3^2 + 1/4*h^2*x2 - 5/4*h^2*x3 + 3/4*h^2 - 3/2*h*x3 + 2*h + 1";

// Table of affine Darboux polynomials and their continuum cofactors.
const TABLE: [(&str, &str); 4] = [
    ("x3 - x2 - 3", "x3"),
    ("2*x3 + x2", "x3 - 3"),
    ("x2", "x3 - 1"),
    ("x1 + x2 + x3 - 1", "x3 - 2"),
];

fn p3(s: &str) -> MultiPoly {
    parse_poly(s, 3).unwrap()
}

fn same_up_to_unit(a: &MultiPoly, b: &MultiPoly) -> bool {
    !a.is_zero() && !b.is_zero() && a.normalized() == b.normalized()
}

fn line(n: usize, ok: bool, detail: &str) {
    let tag = if ok { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "criterion {n:>2}: {tag}  {detail}");
}

struct Example {
    ode: QuadraticODE,
    map: BirationalMap,
    map_seconds: f64,
    jac: JacobianData,
    basis: FactorBasis,
    ctx: DarbouxContext,
    pairs: Vec<DarbouxPair>,
    continuum: Vec<ContinuumPair>,
    combinations: Vec<Combination>,
    discrete: Vec<Combination>,
}

fn example() -> Example {
    let ode = parse_ode(EXAMPLE).unwrap();
    let t = Instant::now();
    let map = build_kahan_map(&ode).unwrap();
    let map_seconds = t.elapsed().as_secs_f64();
    let jac = jacobian_determinant(&map);
    let basis = FactorBasis::of(&jac.j, &FactorConfig::default()).unwrap();
    let ctx = DarbouxContext::new(map.clone(), basis.clone());
    let cfg = SearchConfig {
        max_degree: 1,
        max_exp: 1,
        ..SearchConfig::default()
    };
    let pairs = search_all(&ctx, &cfg).pairs;
    let continuum: Vec<ContinuumPair> = pairs
        .iter()
        .enumerate()
        .filter_map(|(i, p)| continuum_limit(&ctx, &ode, p, i).ok())
        .collect();
    let combinations = find_combinations(&continuum, &ode);
    let discrete = find_discrete_combinations(&ctx, &pairs, &jac);
    Example {
        ode,
        map,
        map_seconds,
        jac,
        basis,
        ctx,
        pairs,
        continuum,
        combinations,
        discrete,
    }
}

/// Index of the continuum pair whose `P̄` is `p` up to a constant.
fn index_of(e: &Example, p: &str) -> Option<usize> {
    let p = p3(p);
    e.continuum.iter().position(|c| same_up_to_unit(&c.p_bar, &p))
}

fn criterion_1(e: &Example) -> (bool, String) {
    let d = &p3(D1) * &p3(D2);
    let ok = same_up_to_unit(&e.map.common_den, &d) && e.map_seconds < 5.0;
    (ok, format!("D = D1*D2 up to unit, map built in {:.3} s", e.map_seconds))
}

fn criterion_2(e: &Example) -> (bool, String) {
    let k = [K1, K2, K3, K4].iter().fold(MultiPoly::one(3), |acc, s| &acc * &p3(s));
    let d = &p3(D1) * &p3(D2).pow(4);
    // J.num / J.den = c * k / d for a nonzero constant c
    let lhs = e.jac.j.num() * &d;
    let rhs = e.jac.j.den() * &k;
    let equal = same_up_to_unit(&lhs, &rhs);
    let mut found_k: Vec<usize> = Vec::new();
    for (f, m) in &e.basis.numerator_factors {
        if *m == 1 {
            if let Some(i) = [K1, K2, K3, K4].iter().position(|s| same_up_to_unit(f, &p3(s))) {
                found_k.push(i);
            }
        }
    }
    found_k.sort();
    let dens: Vec<(usize, u32)> = e
        .basis
        .denominator_factors
        .iter()
        .filter_map(|(f, m)| [D1, D2].iter().position(|s| same_up_to_unit(f, &p3(s))).map(|i| (i, *m)))
        .collect();
    let mults_ok = e.basis.num_count() == 4
        && found_k == vec![0, 1, 2, 3]
        && e.basis.den_count() == 2
        && dens.contains(&(0, 1))
        && dens.contains(&(1, 4));
    let ok = equal && mults_ok && e.basis.reconstructs(&e.jac.j);
    (ok, format!("J = K1K2K3K4/(D1*D2^4): {equal}, multiplicities (1,1,1,1;1,4): {mults_ok}"))
}

fn criterion_3(e: &Example) -> (bool, String) {
    let found: BTreeSet<MultiPoly> = e.pairs.iter().map(|p| p.p.normalized()).collect();
    let expected: BTreeSet<MultiPoly> = TABLE.iter().map(|(p, _)| p3(p).normalized()).collect();
    let all_verified = e.pairs.iter().all(|p| verify_dp_exact(&e.ctx, p));
    let labels: Vec<String> = e
        .pairs
        .iter()
        .map(|p| {
            let k: Vec<String> = p
                .cofactor
                .f
                .iter()
                .enumerate()
                .filter(|(_, &x)| x > 0)
                .map(|(i, _)| {
                    let fi = &e.basis.numerator_factors[i].0;
                    let table = [K1, K2, K3, K4].iter().position(|s| same_up_to_unit(fi, &p3(s)));
                    table.map_or("?".into(), |t| format!("K{}", t + 1))
                })
                .collect();
            format!("{} <- {}", kahan_darboux::poly::to_text_with_names(&p.p, &["x", "y", "z", "h"]), k.join("*"))
        })
        .collect();
    let ok = e.pairs.len() == 4 && found == expected && all_verified;
    (ok, format!("{} pairs, exact identities hold: {all_verified}; pairing {}", e.pairs.len(), labels.join(", ")))
}

fn criterion_4(e: &Example) -> (bool, String) {
    let cbars: BTreeSet<MultiPoly> = e.continuum.iter().map(|c| c.c_bar.clone()).collect();
    let expected: BTreeSet<MultiPoly> = TABLE.iter().map(|(_, c)| p3(c)).collect();
    let mut pairing_ok = e.continuum.len() == 4;
    for (p, c) in TABLE {
        let target = p3(c);
        let hit = e
            .continuum
            .iter()
            .find(|cp| same_up_to_unit(&cp.p_bar, &p3(p)))
            .is_some_and(|cp| cp.c_bar == target && lie(&e.ode, &cp.p_bar) == &target * &cp.p_bar);
        pairing_ok &= hit;
    }
    let ok = cbars == expected && pairing_ok;
    (ok, format!("cofactor set {{z, z-1, z-2, z-3}}: {}, pairing and flow identity: {pairing_ok}", cbars == expected))
}

/// `grad(p) . f`, computed term by term from the right-hand sides.
fn lie(ode: &QuadraticODE, p: &MultiPoly) -> MultiPoly {
    let mut acc = MultiPoly::zero(ode.dim());
    for (i, fi) in ode.rhs().iter().enumerate() {
        acc = &acc + &(fi * &p.derivative(i));
    }
    acc
}

fn exponent_vector(e: &Example, factors: &[(&str, i64)]) -> Option<Vec<BigInt>> {
    let mut v = vec![BigInt::zero(); e.continuum.len()];
    for (p, a) in factors {
        v[index_of(e, p)?] += *a;
    }
    Some(v)
}

fn in_span(basis: &[Vec<BigInt>], v: &[BigInt]) -> bool {
    let rows: Vec<Vec<BigInt>> = (0..v.len()).map(|i| basis.iter().map(|b| b[i].clone()).collect()).collect();
    solve_integer(&rows, v, basis.len()).is_some()
}

fn integral_certificate(ode: &QuadraticODE, num: &MultiPoly, den: &MultiPoly) -> bool {
    &(den * &lie(ode, num)) - &(num * &lie(ode, den)) == MultiPoly::zero(ode.dim())
}

fn criterion_5(e: &Example) -> (bool, String) {
    let fis: Vec<&Combination> = e
        .combinations
        .iter()
        .filter(|c| c.kind == CombinationKind::FirstIntegral)
        .collect();
    let basis: Vec<Vec<BigInt>> = fis.iter().filter_map(|c| c.integer_alpha()).collect();
    let i1 = exponent_vector(e, &[("x2", 2), ("x3 - x2 - 3", -1), ("x1 + x2 + x3 - 1", -1)]);
    let i2 = exponent_vector(e, &[("x2", 1), ("x1 + x2 + x3 - 1", 1), ("x3 - x2 - 3", -1), ("2*x3 + x2", -1)]);
    let (Some(i1), Some(i2)) = (i1, i2) else {
        return (false, "continuum pairs missing".into());
    };
    // the two bases generate the same lattice
    let same_lattice = basis.len() == 2
        && in_span(&basis, &i1)
        && in_span(&basis, &i2)
        && basis.iter().all(|b| in_span(&[i1.clone(), i2.clone()], b));
    let cert1 = integral_certificate(&e.ode, &p3("x2^2"), &(&p3("x3 - x2 - 3") * &p3("x1 + x2 + x3 - 1")));
    let cert2 = integral_certificate(
        &e.ode,
        &(&p3("x2") * &p3("x1 + x2 + x3 - 1")),
        &(&p3("x3 - x2 - 3") * &p3("2*x3 + x2")),
    );
    let all_verified = fis.iter().all(|c| c.verified);
    let ok = same_lattice && cert1 && cert2 && all_verified;
    (
        ok,
        format!(
            "dimension {}, spans I1 and I2: {same_lattice}, certificates I1 {cert1} I2 {cert2}, basis verified {all_verified}",
            fis.len()
        ),
    )
}

fn criterion_6(e: &Example) -> (bool, String) {
    let p1 = "x3 - x2 - 3";
    let expected = [("2*x3 + x2", 3), ("x2", 1), ("x1 + x2 + x3 - 1", 2)];
    let mut got = Vec::new();
    let mut ok = true;
    for (other, rate) in expected {
        let Some(v) = exponent_vector(e, &[(p1, 1), (other, -1)]) else {
            return (false, "continuum pairs missing".into());
        };
        let alpha: Vec<Rational> = v.iter().map(|x| Rational::from_integer(x.clone())).collect();
        let neg: Vec<Rational> = alpha.iter().map(|a| -a.clone()).collect();
        let found = e.combinations.iter().find_map(|c| match &c.kind {
            CombinationKind::Exponential { rate } if c.verified && c.alpha == alpha => Some(rate.clone()),
            CombinationKind::Exponential { rate } if c.verified && c.alpha == neg => Some(-rate.clone()),
            _ => None,
        });
        ok &= found == Some(Rational::from_integer(rate.into()));
        got.push(found.map_or("none".into(), |r| r.to_string()));
    }
    (ok, format!("rates of P1/P2, P1/P3, P1/P4: {}", got.join(", ")))
}

fn criterion_7(e: &Example) -> (bool, String) {
    let ones = vec![Rational::one(); 4];
    let div = p3("4*x3 - 6");
    let continuum = e.ode.divergence() == div
        && e.combinations.iter().any(|c| {
            c.kind == CombinationKind::Measure && c.alpha == ones && c.cofactor_sum.as_ref() == Some(&div) && c.verified
        });
    // exact product of the four map cofactors against J
    let mut prod = RationalFunction::constant(3, Rational::one());
    for p in &e.pairs {
        prod = prod.mul(&e.ctx.cofactor_function(&p.cofactor).unwrap());
    }
    let product_is_j = prod.num() * e.jac.j.den() == prod.den() * e.jac.j.num();
    let discrete = product_is_j
        && e.discrete
            .iter()
            .any(|c| c.kind == CombinationKind::Measure && c.alpha == ones && c.verified);
    (
        continuum && discrete,
        format!("sum of C̄ = 4z - 6 = div f: {continuum}, product of C = J: {discrete}"),
    )
}

/// Closed-form solution as printed in the source, with constants `k2, k3, k4`.
fn printed_solution(t: f64, k2: f64, k3: f64, k4: f64) -> [f64; 3] {
    let (e1, e2, e3) = (t.exp(), (2.0 * t).exp(), (3.0 * t).exp());
    let x = (6.0 * e2 * k4 * k2 + 2.0 * (-3.0 * e1 * k2 + (1.0 + k2 * e3) * k4) * k3)
        / (k4 * (2.0 * e3 * k2 * k3 + 3.0 * e2 * k2 - k3));
    let y = 6.0 * k2 * e2 / (-2.0 * e3 * k2 * k3 - 3.0 * e2 * k2 + k3);
    let z = (-3.0 * k3 + 3.0 * e2 * k2) / (2.0 * e3 * k2 * k3 + 3.0 * e2 * k2 - k3);
    [x, y, z]
}

fn criterion_8(e: &Example) -> (bool, String) {
    let exps: Vec<Combination> = e
        .combinations
        .iter()
        .filter(|c| matches!(c.kind, CombinationKind::Exponential { .. }))
        .cloned()
        .collect();
    let sol = match synthesize_solution(&exps, &e.continuum, &e.ode) {
        Ok(s) => s,
        Err(err) => return (false, format!("no solution: {err}")),
    };
    let (k2, k3, k4) = (1.0, 2.0, 3.0);
    let x0 = printed_solution(0.0, k2, k3, k4);
    let ks = sol.constants_at(&x0);
    let times: Vec<f64> = (0..20).map(|i| i as f64 / 19.0).collect();
    let check = check_solution(&e.ode, &sol, &ks, &times);
    let mut gap = 0.0f64;
    for &t in &times {
        let ours = sol.eval(t, &ks);
        let printed = printed_solution(t, k2, k3, k4);
        for (a, b) in ours.iter().zip(printed) {
            gap = gap.max((a - b).abs());
        }
    }
    let ok = check.singular_times.is_empty() && check.max_residual <= 1e-9 && gap <= 1e-10;
    (ok, format!("residual {:.2e}, gap to printed formulas {:.2e}", check.max_residual, gap))
}

fn criterion_9(e: &Example) -> (bool, String) {
    let x0 = [0.3, 0.4, 0.5];
    let q = |a: &[(&str, i64)]| {
        let polys: Vec<MultiPoly> = a.iter().map(|(p, _)| p3(p)).collect();
        let alpha: Vec<Rational> = a.iter().map(|(_, k)| Rational::from_integer((*k).into())).collect();
        ProductForm::new(&polys, &alpha)
    };
    let i1 = q(&[("x2", 2), ("x3 - x2 - 3", -1), ("x1 + x2 + x3 - 1", -1)]);
    let i2 = q(&[("x2", 1), ("x1 + x2 + x3 - 1", 1), ("x3 - x2 - 3", -1), ("2*x3 + x2", -1)]);
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, f) in [("I1", &i1), ("I2", &i2)] {
        let drift = check_integral_drift(&e.ode, f, &x0, 1.0, 1e-3);
        let ratio = step_halving_ratio(&e.ode, f, 0.0, &x0, 1.0, 1e-3);
        match (drift, ratio) {
            (Ok(d), Ok(r)) => {
                ok &= d <= 1e-8 && (8.0..=32.0).contains(&r);
                parts.push(format!("{name} drift {d:.2e} halving {r:.2}"));
            }
            _ => {
                ok = false;
                parts.push(format!("{name} blew up"));
            }
        }
    }
    (ok, parts.join(", "))
}

fn random_ode(rng: &mut ChaCha8Rng) -> QuadraticODE {
    let n = rng.gen_range(2..=3usize);
    let mut monos: Vec<Monomial> = vec![Monomial::one(n + 1)];
    for i in 0..n {
        monos.push(Monomial::var(n + 1, i, 1));
        for j in i..n {
            let mut e = vec![0u32; n + 1];
            e[i] += 1;
            e[j] += 1;
            monos.push(Monomial::from_exponents(e));
        }
    }
    let rhs: Vec<MultiPoly> = (0..n)
        .map(|_| {
            let mut p = MultiPoly::zero(n);
            for m in &monos {
                if rng.gen_bool(0.3) {
                    let c: i64 = rng.gen_range(-3..=3);
                    p.add_term(m.clone(), Rational::from_integer(c.into()));
                }
            }
            p
        })
        .collect();
    QuadraticODE::from_rhs(&rhs, (1..=n).map(|i| format!("x{i}")).collect()).unwrap()
}

fn random_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<Rational> {
    (0..n)
        .map(|_| Rational::new(rng.gen_range(-9..=9i64).into(), rng.gen_range(1..=7i64).into()))
        .collect()
}

fn criterion_10() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut dps, mut dp_fail, mut limits, mut limit_fail, mut budget) = (0, 0, 0, 0, 0);
    let (mut sym_checked, mut sym_fail) = (0, 0);
    for _ in 0..50 {
        let ode = random_ode(&mut rng);
        let n = ode.dim();
        let map = build_kahan_map(&ode).unwrap();

        let h0 = Rational::new(1.into(), 3.into());
        let mut points = Vec::new();
        let mut tries = 0;
        while points.len() < 5 && tries < 200 {
            tries += 1;
            let p = random_point(&mut rng, n);
            let rep = check_time_symmetry(&map, std::slice::from_ref(&p), &h0);
            if rep.checked == 1 {
                points.push(p);
                sym_fail += rep.failures.len();
            }
        }
        sym_checked += points.len();
        if points.len() < 5 {
            sym_fail += 1;
        }

        let jac = jacobian_determinant(&map);
        let basis = match FactorBasis::of(&jac.j, &FactorConfig::default()) {
            Ok(b) => b,
            Err(_) => {
                budget += 1;
                continue;
            }
        };
        let ctx = DarbouxContext::new(map, basis);
        let cfg = SearchConfig {
            max_degree: 2,
            max_exp: 1,
            max_candidates: 2000,
            ..SearchConfig::default()
        };
        for (i, pair) in search_all(&ctx, &cfg).pairs.iter().enumerate() {
            dps += 1;
            if !verify_dp_exact(&ctx, pair) {
                dp_fail += 1;
            }
            if pair.cofactor.sign == 1 {
                match continuum_limit(&ctx, &ode, pair, i) {
                    Ok(c) => {
                        limits += 1;
                        if lie(&ode, &c.p_bar) != &c.c_bar * &c.p_bar {
                            limit_fail += 1;
                        }
                    }
                    Err(_) => limit_fail += 1,
                }
            }
        }
    }
    let a = dp_fail == 0 && limit_fail == 0 && dps > 0 && budget == 0;
    let b = sym_fail == 0 && sym_checked == 250;

    let mut recon_fail = 0;
    for _ in 0..100 {
        let nv = rng.gen_range(1..=3usize);
        let mut target = MultiPoly::constant(nv, Rational::from_integer(rng.gen_range(1..=5i64).into()));
        for _ in 0..rng.gen_range(1..=3) {
            let mut f = MultiPoly::zero(nv);
            for _ in 0..rng.gen_range(2..=4) {
                let e: Vec<u32> = (0..=nv).map(|_| rng.gen_range(0..=2)).collect();
                f.add_term(Monomial::from_exponents(e), Rational::from_integer(rng.gen_range(-4..=4i64).into()));
            }
            if f.is_zero() {
                continue;
            }
            target = &target * &f.pow(rng.gen_range(1..=2));
        }
        match factor_irreducible(&target) {
            Ok(fz) if fz.expand(nv) == target => {}
            _ => recon_fail += 1,
        }
    }
    let c = recon_fail == 0;

    let cfg = PipelineConfig {
        max_degree: 2,
        seed: 7,
        ..PipelineConfig::default()
    };
    let first = emit_report(&run_pipeline(EXAMPLE, &cfg).0, Format::Json);
    let second = emit_report(&run_pipeline(EXAMPLE, &cfg).0, Format::Json);
    let d = first == second;

    (
        a && b && c && d,
        format!(
            "(a) {dps} pairs, {dp_fail} failed, {limits} limits, {limit_fail} failed, {budget} over budget; \
             (b) {sym_checked} reversibility points, {sym_fail} failed; (c) {recon_fail} of 100 reconstructions failed; \
             (d) byte-identical: {d}"
        ),
    )
}

#[test]
fn acceptance() {
    let e = example();
    let mut results: BTreeMap<usize, bool> = BTreeMap::new();
    let checks: [(usize, &dyn Fn(&Example) -> (bool, String)); 9] = [
        (1, &criterion_1),
        (2, &criterion_2),
        (3, &criterion_3),
        (4, &criterion_4),
        (5, &criterion_5),
        (6, &criterion_6),
        (7, &criterion_7),
        (8, &criterion_8),
        (9, &criterion_9),
    ];
    for (n, f) in checks {
        let (ok, detail) = f(&e);
        line(n, ok, &detail);
        results.insert(n, ok);
    }
    let (ok, detail) = criterion_10();
    line(10, ok, &detail);
    results.insert(10, ok);
    let failed: Vec<usize> = results.iter().filter(|(_, ok)| !**ok).map(|(n, _)| *n).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
