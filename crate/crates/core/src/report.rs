//! Pipeline orchestration and the machine-readable report.

use std::fmt::Write as _;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::darboux::{search_all, verify_dp_exact, CofactorCandidate, DarbouxContext, DarbouxPair, SearchConfig};
use crate::error::{Error, Result};
use crate::factor::{FactorBasis, FactorConfig};
use crate::kahan::{build_kahan_map, check_time_symmetry, jacobian_determinant, BirationalMap, JacobianData};
use crate::ode::{parse_ode, OdeJson, QuadraticODE};
use crate::poly::{parse_poly, to_canonical_text, MultiPoly, Rational, RationalFunction};
use crate::structure::{
    continuum_limit, find_combinations, find_discrete_combinations, synthesize_solution, ClosedFormSolution,
    Combination, CombinationKind, ContinuumPair, Level,
};
use crate::verify::{
    check_exponential, check_integral_drift, check_map_dp, check_solution, sample_points, step_halving_ratio,
    ProductForm,
};

pub const SCHEMA: u32 = 1;

/// Last stage to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Kahan,
    Factor,
    Darboux,
    Structure,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PipelineConfig {
    pub max_degree: u32,
    pub max_exp: u32,
    pub candidate_cap: usize,
    pub prune: bool,
    pub seed: u64,
    pub verify: bool,
    pub until: Stage,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            max_degree: 3,
            max_exp: 2,
            candidate_cap: 10_000,
            prune: true,
            seed: 0,
            verify: false,
            until: Stage::Structure,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_degree == 0 || self.max_exp == 0 || self.candidate_cap == 0 {
            return Err(Error::InvalidInput("degree, exponent and candidate caps must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    SymbolicallyVerified,
    NumericallyVerified,
    Unverified,
    Failed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub max_degree: u32,
    pub max_exp: u32,
    pub candidate_cap: usize,
    pub prune: bool,
    pub seed: u64,
    pub verify: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OdeEcho {
    pub names: Vec<String>,
    pub rhs: Vec<String>,
    pub divergence: String,
    pub tensor: OdeJson,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RationalEcho {
    pub numerator: String,
    pub denominator: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KahanEcho {
    pub numerators: Vec<String>,
    pub denominator: String,
    pub jacobian: RationalEcho,
    pub jacobian_at_h_zero_is_one: bool,
    pub time_symmetry: Status,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorEntry {
    pub label: String,
    pub poly: String,
    pub multiplicity: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorEcho {
    pub unit: String,
    pub numerator: Vec<FactorEntry>,
    pub denominator: Vec<FactorEntry>,
    pub reconstruction: Status,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairEcho {
    pub label: String,
    pub p: String,
    pub sign: i8,
    pub f: Vec<u32>,
    pub g: Vec<u32>,
    pub cofactor: String,
    pub degree: u32,
    pub reducible: bool,
    pub status: Status,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DarbouxEcho {
    pub candidates_total: usize,
    pub candidates_tried: usize,
    pub candidates_pruned: usize,
    pub truncated: bool,
    pub pairs: Vec<PairEcho>,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuumEcho {
    pub pair: String,
    pub p_bar: String,
    pub c_bar: String,
    pub status: Status,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExcludedEcho {
    pub pair: String,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CombinationEcho {
    pub level: String,
    /// Exponents over all discrete pairs, in report order.
    pub alpha: Vec<String>,
    pub expression: String,
    pub numerator: String,
    pub denominator: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cofactor_sum: Option<String>,
    pub status: Status,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolEcho {
    pub symbol: String,
    /// `k_m = numerator / denominator` evaluated at `x(0)`.
    pub numerator: String,
    pub denominator: String,
    pub rate: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentEcho {
    pub variable: String,
    pub numerator: String,
    pub denominator: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionEcho {
    pub constants: Vec<SymbolEcho>,
    pub components: Vec<ComponentEcho>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureEcho {
    pub pairs: Vec<ContinuumEcho>,
    pub excluded: Vec<ExcludedEcho>,
    pub first_integrals: Vec<CombinationEcho>,
    pub exponentials: Vec<CombinationEcho>,
    pub measures: Vec<CombinationEcho>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solution: Option<SolutionEcho>,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckEcho {
    pub name: String,
    pub status: CheckStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observed: Option<f64>,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageError {
    pub stage: String,
    pub kind: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureReport {
    pub schema: u32,
    pub config: ConfigEcho,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ode: Option<OdeEcho>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kahan: Option<KahanEcho>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factors: Option<FactorEcho>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub darboux: Option<DarbouxEcho>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub structure: Option<StructureEcho>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verification: Option<Vec<CheckEcho>>,
    pub errors: Vec<StageError>,
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::NotDivisible => "not-divisible",
        Error::InvalidInput(_) => "invalid-input",
        Error::Syntax { .. } => "syntax",
        Error::DegreeTooHigh { .. } => "degree-too-high",
        Error::UnknownVariable { .. } => "unknown-variable",
        Error::DegenerateMap => "degenerate-map",
        Error::ResourceBudgetExceeded(_) => "resource-budget-exceeded",
        Error::NoContinuumLimit => "no-continuum-limit",
        Error::LimitInconsistent(_) => "limit-inconsistent",
        Error::NotApplicable(_) => "not-applicable",
        Error::DenominatorBlowup { .. } => "denominator-blowup",
        Error::Io(_) => "io",
        Error::Json(_) => "json",
    }
}

/// Process exit code for an error: 2 for input errors, 3 for exhausted budgets, 1 otherwise.
pub fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Syntax { .. } | Error::DegreeTooHigh { .. } | Error::UnknownVariable { .. } | Error::InvalidInput(_) => 2,
        Error::ResourceBudgetExceeded(_) => 3,
        _ => 1,
    }
}

impl StructureReport {
    fn new(cfg: &PipelineConfig) -> Self {
        StructureReport {
            schema: SCHEMA,
            config: ConfigEcho {
                max_degree: cfg.max_degree,
                max_exp: cfg.max_exp,
                candidate_cap: cfg.candidate_cap,
                prune: cfg.prune,
                seed: cfg.seed,
                verify: cfg.verify,
            },
            ode: None,
            kahan: None,
            factors: None,
            darboux: None,
            structure: None,
            verification: None,
            errors: Vec::new(),
        }
    }

    fn fail(&mut self, stage: &str, e: &Error) {
        self.errors.push(StageError {
            stage: stage.into(),
            kind: error_kind(e).into(),
            message: e.to_string(),
        });
    }

    /// 0 on success, 4 on a failed verification check, else the code of the first error.
    pub fn exit_code(&self) -> i32 {
        if let Some(e) = self.errors.first() {
            return match e.kind.as_str() {
                "syntax" | "degree-too-high" | "unknown-variable" | "invalid-input" => 2,
                "resource-budget-exceeded" => 3,
                _ => 1,
            };
        }
        if self
            .verification
            .as_ref()
            .is_some_and(|v| v.iter().any(|c| c.status == CheckStatus::Fail))
        {
            return 4;
        }
        0
    }
}

fn text(p: &MultiPoly) -> String {
    to_canonical_text(p)
}

fn q_text(r: &Rational) -> String {
    r.to_string()
}

/// `sign * K1^a * ... / (D1^b * ...)` over the factor labels.
pub fn cofactor_text(c: &CofactorCandidate) -> String {
    let power = |label: String, e: u32| if e == 1 { label } else { format!("{label}^{e}") };
    let num: Vec<String> = c
        .f
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > 0)
        .map(|(i, &e)| power(format!("K{}", i + 1), e))
        .collect();
    let den: Vec<String> = c
        .g
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > 0)
        .map(|(j, &e)| power(format!("D{}", j + 1), e))
        .collect();
    let mut s = if num.is_empty() { "1".to_string() } else { num.join("*") };
    if !den.is_empty() {
        if den.len() == 1 {
            s = format!("{s}/{}", den[0]);
        } else {
            s = format!("{s}/({})", den.join("*"));
        }
    }
    if c.sign == -1 {
        s = format!("-{s}");
    }
    s
}

fn exponent_text(e: &Rational) -> String {
    if e.is_integer() {
        e.to_string()
    } else {
        format!("({e})")
    }
}

/// Formal product and its numerator/denominator in factored canonical form.
fn product_texts(labels: &[String], polys: &[&MultiPoly], alpha: &[Rational]) -> (String, String, String) {
    let mut expr_num = Vec::new();
    let mut expr_den = Vec::new();
    let mut num = Vec::new();
    let mut den = Vec::new();
    for ((label, p), a) in labels.iter().zip(polys).zip(alpha) {
        if a.is_zero() {
            continue;
        }
        let e = a.abs();
        let (lbl, poly) = if e.is_one() {
            (label.clone(), format!("({})", text(p)))
        } else {
            (
                format!("{label}^{}", exponent_text(&e)),
                format!("({})^{}", text(p), exponent_text(&e)),
            )
        };
        if a.is_positive() {
            expr_num.push(lbl);
            num.push(poly);
        } else {
            expr_den.push(lbl);
            den.push(poly);
        }
    }
    let join = |v: Vec<String>| if v.is_empty() { "1".to_string() } else { v.join("*") };
    let expr = if expr_den.is_empty() {
        join(expr_num)
    } else if expr_den.len() == 1 {
        format!("{}/{}", join(expr_num), expr_den[0])
    } else {
        format!("{}/({})", join(expr_num), expr_den.join("*"))
    };
    (expr, join(num), join(den))
}

/// Everything the pipeline derived, kept for verification and the tests.
#[derive(Clone, Debug)]
pub struct Findings {
    pub ode: QuadraticODE,
    pub map: Option<BirationalMap>,
    pub jacobian: Option<JacobianData>,
    pub context: Option<DarbouxContext>,
    pub pairs: Vec<DarbouxPair>,
    pub continuum: Vec<ContinuumPair>,
    pub combinations: Vec<Combination>,
    pub discrete: Vec<Combination>,
    pub solution: Option<ClosedFormSolution>,
}

/// Parse `src` and run the pipeline; a parse failure is recorded in the report.
pub fn run_pipeline(src: &str, cfg: &PipelineConfig) -> (StructureReport, Option<Findings>) {
    let mut report = StructureReport::new(cfg);
    if let Err(e) = cfg.validate() {
        report.fail("config", &e);
        return (report, None);
    }
    let ode = match parse_ode(src) {
        Ok(o) => o,
        Err(e) => {
            report.fail("parse", &e);
            return (report, None);
        }
    };
    let findings = run_on(&ode, cfg, &mut report);
    (report, Some(findings))
}

/// Exponents over all discrete pairs; pairs without a continuum limit get 0.
fn full_alpha(c: &Combination, continuum: &[ContinuumPair], npairs: usize) -> Vec<Rational> {
    match c.level {
        Level::Discrete => c.alpha.clone(),
        Level::Continuum => {
            let mut v = vec![Rational::zero(); npairs];
            for (a, cp) in c.alpha.iter().zip(continuum) {
                v[cp.source] = a.clone();
            }
            v
        }
    }
}

fn status_of(ok: bool) -> Status {
    if ok {
        Status::SymbolicallyVerified
    } else {
        Status::Failed
    }
}

fn combination_echo(c: &Combination, f: &Findings) -> CombinationEcho {
    let npairs = f.pairs.len();
    let alpha = full_alpha(c, &f.continuum, npairs);
    let labels: Vec<String> = (1..=npairs).map(|i| format!("P{i}")).collect();
    let continuum_polys: Vec<MultiPoly> = (0..npairs)
        .map(|i| {
            f.continuum
                .iter()
                .find(|cp| cp.source == i)
                .map_or_else(|| f.pairs[i].p.clone(), |cp| cp.p_bar.clone())
        })
        .collect();
    let polys: Vec<&MultiPoly> = match c.level {
        Level::Continuum => continuum_polys.iter().collect(),
        Level::Discrete => f.pairs.iter().map(|p| &p.p).collect(),
    };
    let (expression, numerator, denominator) = product_texts(&labels, &polys, &alpha);
    CombinationEcho {
        level: match c.level {
            Level::Continuum => "continuum".into(),
            Level::Discrete => "discrete".into(),
        },
        alpha: alpha.iter().map(q_text).collect(),
        expression,
        numerator,
        denominator,
        rate: match &c.kind {
            CombinationKind::Exponential { rate } => Some(q_text(rate)),
            _ => None,
        },
        cofactor_sum: c.cofactor_sum.as_ref().map(text),
        status: status_of(c.verified),
    }
}

fn solution_echo(sol: &ClosedFormSolution, ode: &QuadraticODE) -> SolutionEcho {
    SolutionEcho {
        constants: sol
            .relations
            .iter()
            .enumerate()
            .map(|(m, r)| SymbolEcho {
                symbol: format!("k{}", m + 1),
                numerator: text(&r.numerator),
                denominator: text(&r.denominator),
                rate: q_text(&r.rate),
            })
            .collect(),
        components: (0..ode.dim())
            .map(|i| {
                let (numerator, denominator) = sol.show_component(i);
                ComponentEcho {
                    variable: format!("x{}", i + 1),
                    numerator,
                    denominator,
                }
            })
            .collect(),
    }
}

fn run_on(ode: &QuadraticODE, cfg: &PipelineConfig, report: &mut StructureReport) -> Findings {
    let mut f = Findings {
        ode: ode.clone(),
        map: None,
        jacobian: None,
        context: None,
        pairs: Vec::new(),
        continuum: Vec::new(),
        combinations: Vec::new(),
        discrete: Vec::new(),
        solution: None,
    };
    report.ode = Some(OdeEcho {
        names: ode.names().to_vec(),
        rhs: ode.rhs().iter().map(text).collect(),
        divergence: text(&ode.divergence()),
        tensor: ode.to_json(),
    });

    let map = match build_kahan_map(ode) {
        Ok(m) => m,
        Err(e) => {
            report.fail("kahan", &e);
            return f;
        }
    };
    let jac = jacobian_determinant(&map);
    let sym_points = sample_points(ode.dim(), 3, cfg.seed ^ 0x5eed);
    let sym = check_time_symmetry(&map, &sym_points, &Rational::new(1.into(), 7.into()));
    report.kahan = Some(KahanEcho {
        numerators: map.numerators.iter().map(text).collect(),
        denominator: text(&map.common_den),
        jacobian: RationalEcho {
            numerator: text(jac.j.num()),
            denominator: text(jac.j.den()),
        },
        jacobian_at_h_zero_is_one: jac.is_one() || jac.at_h_zero() == Some(Rational::one()),
        time_symmetry: if sym.holds() { Status::SymbolicallyVerified } else { Status::Failed },
    });
    f.map = Some(map.clone());
    f.jacobian = Some(jac.clone());
    if cfg.until == Stage::Kahan {
        return f;
    }

    let fcfg = FactorConfig {
        seed: cfg.seed,
        ..FactorConfig::default()
    };
    let basis = match FactorBasis::of_with_hints(&jac.j, std::slice::from_ref(&map.common_den), &fcfg) {
        Ok(b) => b,
        Err(e) => {
            report.fail("factor", &e);
            return f;
        }
    };
    let entries = |fs: &[(MultiPoly, u32)], prefix: &str| -> Vec<FactorEntry> {
        fs.iter()
            .enumerate()
            .map(|(i, (p, m))| FactorEntry {
                label: format!("{prefix}{}", i + 1),
                poly: text(p),
                multiplicity: *m,
            })
            .collect()
    };
    report.factors = Some(FactorEcho {
        unit: q_text(&basis.unit),
        numerator: entries(&basis.numerator_factors, "K"),
        denominator: entries(&basis.denominator_factors, "D"),
        reconstruction: status_of(basis.reconstructs(&jac.j)),
    });
    let ctx = DarbouxContext::new(map, basis);
    f.context = Some(ctx.clone());
    if cfg.until == Stage::Factor {
        return f;
    }

    let scfg = SearchConfig {
        max_degree: cfg.max_degree,
        max_exp: cfg.max_exp,
        max_candidates: cfg.candidate_cap,
        prune: cfg.prune,
        seed: cfg.seed,
    };
    let res = search_all(&ctx, &scfg);
    report.darboux = Some(DarbouxEcho {
        candidates_total: res.candidates_total,
        candidates_tried: res.candidates_tried,
        candidates_pruned: res.candidates_pruned,
        truncated: res.truncated,
        pairs: res
            .pairs
            .iter()
            .enumerate()
            .map(|(i, p)| PairEcho {
                label: format!("P{}", i + 1),
                p: text(&p.p),
                sign: p.cofactor.sign,
                f: p.cofactor.f.clone(),
                g: p.cofactor.g.clone(),
                cofactor: cofactor_text(&p.cofactor),
                degree: p.degree,
                reducible: p.reducible,
                status: status_of(verify_dp_exact(&ctx, p)),
            })
            .collect(),
        notes: res.notes.clone(),
    });
    f.pairs = res.pairs;
    if cfg.until == Stage::Darboux {
        if cfg.verify {
            report.verification = Some(verify_findings(&f, cfg.seed));
        }
        return f;
    }

    // irreducible pairs come first; products of them add nothing new
    let irreducible = f.pairs.iter().take_while(|p| !p.reducible).count();
    let mut excluded = Vec::new();
    for (i, p) in f.pairs.iter().enumerate().take(irreducible) {
        match continuum_limit(&ctx, ode, p, i) {
            Ok(c) => f.continuum.push(c),
            Err(e) => excluded.push(ExcludedEcho {
                pair: format!("P{}", i + 1),
                reason: e.to_string(),
            }),
        }
    }
    f.combinations = find_combinations(&f.continuum, ode);
    f.discrete = find_discrete_combinations(&ctx, &f.pairs[..irreducible], &jac);
    let mut notes = Vec::new();
    let exps: Vec<Combination> = f
        .combinations
        .iter()
        .filter(|c| matches!(c.kind, CombinationKind::Exponential { .. }))
        .cloned()
        .collect();
    match synthesize_solution(&exps, &f.continuum, ode) {
        Ok(s) => f.solution = Some(s),
        Err(e) => notes.push(format!("no closed-form solution: {e}")),
    }
    let echo_kind = |pred: &dyn Fn(&CombinationKind) -> bool| -> Vec<CombinationEcho> {
        f.combinations
            .iter()
            .chain(&f.discrete)
            .filter(|c| pred(&c.kind))
            .map(|c| combination_echo(c, &f))
            .collect()
    };
    report.structure = Some(StructureEcho {
        pairs: f
            .continuum
            .iter()
            .map(|c| ContinuumEcho {
                pair: format!("P{}", c.source + 1),
                p_bar: text(&c.p_bar),
                c_bar: text(&c.c_bar),
                status: Status::SymbolicallyVerified,
            })
            .collect(),
        excluded,
        first_integrals: echo_kind(&|k| matches!(k, CombinationKind::FirstIntegral)),
        exponentials: echo_kind(&|k| matches!(k, CombinationKind::Exponential { .. })),
        measures: echo_kind(&|k| matches!(k, CombinationKind::Measure)),
        solution: f.solution.as_ref().map(|s| solution_echo(s, ode)),
        notes,
    });
    if cfg.verify {
        report.verification = Some(verify_findings(&f, cfg.seed));
    }
    f
}

/// Default initial point `(0.3, 0.4, 0.5, ...)` for trajectory checks.
pub fn default_x0(n: usize) -> Vec<f64> {
    (0..n).map(|i| 0.3 + 0.1 * i as f64).collect()
}

pub const DRIFT_TOLERANCE: f64 = 1e-8;
pub const RESIDUAL_TOLERANCE: f64 = 1e-9;
const HORIZON: f64 = 1.0;
const STEP: f64 = 1e-3;
/// Drifts below this are dominated by roundoff; step halving says nothing there.
const ROUNDOFF_FLOOR: f64 = 1e-10;

fn check(name: String, status: CheckStatus, observed: Option<f64>, detail: String) -> CheckEcho {
    CheckEcho {
        name,
        status,
        observed,
        detail,
    }
}

fn pass_fail(ok: bool) -> CheckStatus {
    if ok {
        CheckStatus::Pass
    } else {
        CheckStatus::Fail
    }
}

/// Independent checks of every finding: exact sampling of the discrete
/// identities, RK4 trajectories for integrals and exponential relations and
/// the residual of the closed-form solution.
pub fn verify_findings(f: &Findings, seed: u64) -> Vec<CheckEcho> {
    let mut out = Vec::new();
    let n = f.ode.dim();
    if let Some(ctx) = &f.context {
        let points = sample_points(n, 5, seed ^ 0xdb);
        let hs = [Rational::new(1.into(), 7.into()), Rational::new(1.into(), 13.into())];
        for (i, p) in f.pairs.iter().enumerate() {
            let r = check_map_dp(ctx, p, &points, &hs);
            let status = if r.vacuous() {
                CheckStatus::Skipped
            } else {
                pass_fail(r.passed())
            };
            out.push(check(
                format!("map-dp P{}", i + 1),
                status,
                None,
                format!("{} exact samples, {} skipped, {} failed", r.checked, r.skipped, r.failures),
            ));
        }
    }

    let x0 = default_x0(n);
    let p_bars: Vec<MultiPoly> = f.continuum.iter().map(|c| c.p_bar.clone()).collect();
    for (k, c) in f.combinations.iter().enumerate() {
        let q = ProductForm::new(&p_bars, &c.alpha);
        let (label, rate) = match &c.kind {
            CombinationKind::FirstIntegral => ("integral", 0.0),
            CombinationKind::Exponential { rate } => ("exponential", crate::poly::rational_to_f64(rate)),
            CombinationKind::Measure => {
                let ok = c.cofactor_sum.as_ref() == Some(&f.ode.divergence());
                out.push(check(
                    format!("measure-identity #{}", k + 1),
                    pass_fail(ok),
                    None,
                    "sum alpha_i C̄_i = div f".into(),
                ));
                continue;
            }
        };
        let name = format!("{label}-drift #{}", k + 1);
        let drift = if rate == 0.0 {
            check_integral_drift(&f.ode, &q, &x0, HORIZON, STEP)
        } else {
            check_exponential(&f.ode, &q, rate, &x0, HORIZON, STEP)
        };
        match drift {
            Ok(d) if d.is_finite() => {
                out.push(check(name.clone(), pass_fail(d <= DRIFT_TOLERANCE), Some(d), format!("RK4 step {STEP}, T = {HORIZON}")));
                if let Ok(ratio) = step_halving_ratio(&f.ode, &q, rate, &x0, HORIZON, STEP) {
                    let (status, detail) = if (8.0..=32.0).contains(&ratio) {
                        (CheckStatus::Pass, "drift ratio for step h vs h/2")
                    } else if d < ROUNDOFF_FLOOR {
                        (CheckStatus::Skipped, "drift at roundoff level, ratio not informative")
                    } else {
                        (CheckStatus::Fail, "drift ratio for step h vs h/2")
                    };
                    out.push(check(format!("{label}-halving #{}", k + 1), status, Some(ratio), detail.into()));
                }
            }
            Ok(_) => out.push(check(name, CheckStatus::Skipped, None, "trajectory left the finite range".into())),
            Err(e) => out.push(check(name, CheckStatus::Skipped, None, e.to_string())),
        }
    }

    for (k, c) in f.discrete.iter().enumerate() {
        let what = match c.kind {
            CombinationKind::Measure => "product of cofactors equals J",
            _ => "product of cofactors equals 1",
        };
        out.push(check(format!("discrete #{}", k + 1), pass_fail(c.verified), None, what.into()));
    }

    if let Some(sol) = &f.solution {
        let ks = sol.constants_at(&x0);
        let times: Vec<f64> = (0..=20).map(|i| i as f64 * 0.05).collect();
        let r = check_solution(&f.ode, sol, &ks, &times);
        let scale = times
            .iter()
            .map(|&t| f.ode.eval_f64(&sol.eval(t, &ks)).iter().fold(0.0f64, |a, b| a.max(b.abs())))
            .filter(|v| v.is_finite())
            .fold(1.0f64, f64::max);
        out.push(check(
            "solution-residual".into(),
            pass_fail(r.max_residual <= RESIDUAL_TOLERANCE * scale),
            Some(r.max_residual),
            format!("{} sample times, {} singular", times.len(), r.singular_times.len()),
        ));
        let start = sol.eval(0.0, &ks);
        let gap = start.iter().zip(&x0).fold(0.0f64, |a, (u, v)| a.max((u - v).abs()));
        out.push(check(
            "solution-initial-value".into(),
            pass_fail(gap <= 1e-9),
            Some(gap),
            "x(0) recovered from k_m".into(),
        ));
    }
    out
}

/// Rebuild the findings recorded in a report; recomputed symbolic objects
/// must agree with the recorded ones.
pub fn findings_from_report(report: &StructureReport) -> Result<(Findings, Vec<CheckEcho>)> {
    let mut mismatches = Vec::new();
    let ode_echo = report
        .ode
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("report has no ODE".into()))?;
    let ode = QuadraticODE::from_json(&ode_echo.tensor)?;
    let n = ode.dim();
    let map = build_kahan_map(&ode)?;
    let jac = jacobian_determinant(&map);
    let mut f = Findings {
        ode: ode.clone(),
        map: Some(map.clone()),
        jacobian: Some(jac.clone()),
        context: None,
        pairs: Vec::new(),
        continuum: Vec::new(),
        combinations: Vec::new(),
        discrete: Vec::new(),
        solution: None,
    };
    if let Some(k) = &report.kahan {
        let same = k.denominator == text(&map.common_den)
            && k.numerators == map.numerators.iter().map(text).collect::<Vec<_>>();
        mismatches.push(check("report-kahan-map".into(), pass_fail(same), None, "recomputed map".into()));
    }
    let Some(fe) = &report.factors else {
        return Ok((f, mismatches));
    };
    let parse_entries = |es: &[FactorEntry]| -> Result<Vec<(MultiPoly, u32)>> {
        es.iter().map(|e| Ok((parse_poly(&e.poly, n)?, e.multiplicity))).collect()
    };
    let basis = FactorBasis {
        unit: fe
            .unit
            .parse::<Rational>()
            .map_err(|_| Error::InvalidInput(format!("bad unit `{}`", fe.unit)))?,
        numerator_factors: parse_entries(&fe.numerator)?,
        denominator_factors: parse_entries(&fe.denominator)?,
    };
    mismatches.push(check(
        "report-factorization".into(),
        pass_fail(basis.reconstructs(&jac.j)),
        None,
        "recorded factors multiply to J".into(),
    ));
    let ctx = DarbouxContext::new(map, basis);
    f.context = Some(ctx.clone());
    let Some(de) = &report.darboux else {
        return Ok((f, mismatches));
    };
    for pe in &de.pairs {
        f.pairs.push(DarbouxPair {
            p: parse_poly(&pe.p, n)?,
            cofactor: CofactorCandidate {
                sign: pe.sign,
                f: pe.f.clone(),
                g: pe.g.clone(),
            },
            degree: pe.degree,
            reducible: pe.reducible,
        });
    }
    for (i, p) in f.pairs.iter().enumerate() {
        mismatches.push(check(
            format!("report-dp P{}", i + 1),
            pass_fail(verify_dp_exact(&ctx, p)),
            None,
            "exact identity".into(),
        ));
    }
    let Some(se) = &report.structure else {
        return Ok((f, mismatches));
    };
    let irreducible = f.pairs.iter().take_while(|p| !p.reducible).count();
    for (i, p) in f.pairs.iter().enumerate().take(irreducible) {
        if let Ok(c) = continuum_limit(&ctx, &ode, p, i) {
            f.continuum.push(c);
        }
    }
    let recorded: Vec<(String, String)> = se.pairs.iter().map(|c| (c.p_bar.clone(), c.c_bar.clone())).collect();
    let recomputed: Vec<(String, String)> = f.continuum.iter().map(|c| (text(&c.p_bar), text(&c.c_bar))).collect();
    mismatches.push(check(
        "report-continuum".into(),
        pass_fail(recorded == recomputed),
        None,
        "recomputed continuum limits".into(),
    ));
    let parse_alpha = |c: &CombinationEcho| -> Result<Vec<Rational>> {
        c.alpha
            .iter()
            .map(|a| a.parse::<Rational>().map_err(|_| Error::InvalidInput(format!("bad exponent `{a}`"))))
            .collect()
    };
    let div = ode.divergence();
    for (echoes, kind) in [(&se.first_integrals, 0), (&se.exponentials, 1), (&se.measures, 2)] {
        for ce in echoes {
            let full = parse_alpha(ce)?;
            let level = if ce.level == "discrete" { Level::Discrete } else { Level::Continuum };
            let alpha: Vec<Rational> = match level {
                Level::Discrete => full[..irreducible.min(full.len())].to_vec(),
                Level::Continuum => f.continuum.iter().map(|c| full[c.source].clone()).collect(),
            };
            let kind = match kind {
                0 => CombinationKind::FirstIntegral,
                1 => CombinationKind::Exponential {
                    rate: ce
                        .rate
                        .as_deref()
                        .unwrap_or("0")
                        .parse::<Rational>()
                        .map_err(|_| Error::InvalidInput("bad rate".into()))?,
                },
                _ => CombinationKind::Measure,
            };
            let sum = (level == Level::Continuum).then(|| {
                f.continuum
                    .iter()
                    .zip(&alpha)
                    .fold(MultiPoly::zero(n), |acc, (c, a)| &acc + &c.c_bar.scale(a))
            });
            let verified = match (&kind, &sum) {
                (CombinationKind::FirstIntegral, Some(s)) => s.is_zero(),
                (CombinationKind::Exponential { rate }, Some(s)) => s.constant_value().as_ref() == Some(rate) && !rate.is_zero(),
                (CombinationKind::Measure, Some(s)) => *s == div,
                (CombinationKind::Measure, None) => discrete_product(&ctx, &f.pairs, &alpha).is_some_and(|r| r.equals_cross(&jac.j)),
                (_, None) => discrete_product(&ctx, &f.pairs, &alpha)
                    .is_some_and(|r| r.equals_cross(&RationalFunction::constant(n, Rational::one()))),
            };
            let comb = Combination {
                alpha,
                kind,
                level,
                cofactor_sum: sum,
                verified,
            };
            match level {
                Level::Continuum => f.combinations.push(comb),
                Level::Discrete => f.discrete.push(comb),
            }
        }
    }
    if se.solution.is_some() {
        let exps: Vec<Combination> = f
            .combinations
            .iter()
            .filter(|c| matches!(c.kind, CombinationKind::Exponential { .. }))
            .cloned()
            .collect();
        match synthesize_solution(&exps, &f.continuum, &ode) {
            Ok(sol) => {
                let same = se.solution.as_ref() == Some(&solution_echo(&sol, &ode));
                mismatches.push(check("report-solution".into(), pass_fail(same), None, "re-synthesized".into()));
                f.solution = Some(sol);
            }
            Err(e) => mismatches.push(check("report-solution".into(), CheckStatus::Fail, None, e.to_string())),
        }
    }
    Ok((f, mismatches))
}

fn discrete_product(ctx: &DarbouxContext, pairs: &[DarbouxPair], alpha: &[Rational]) -> Option<RationalFunction> {
    let n = ctx.nvars();
    let mut acc = RationalFunction::constant(n, Rational::one());
    for (p, a) in pairs.iter().zip(alpha) {
        if a.is_zero() {
            continue;
        }
        if !a.is_integer() {
            return None;
        }
        let c = ctx.cofactor_function(&p.cofactor)?;
        let e: u32 = a.abs().to_integer().try_into().ok()?;
        let t = if a.is_positive() { c.pow(e) } else { c.inv().ok()?.pow(e) };
        acc = acc.mul(&t);
    }
    Some(acc)
}

/// Output formats of [`emit_report`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

pub fn emit_report(report: &StructureReport, format: Format) -> Vec<u8> {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s.into_bytes()
        }
        Format::Text => render_text(report).into_bytes(),
    }
}

pub fn read_report(bytes: &[u8]) -> Result<StructureReport> {
    serde_json::from_slice(bytes).map_err(|e| Error::Json(e.to_string()))
}

fn status_text(s: Status) -> &'static str {
    match s {
        Status::SymbolicallyVerified => "symbolically verified",
        Status::NumericallyVerified => "numerically verified",
        Status::Unverified => "unverified",
        Status::Failed => "FAILED",
    }
}

fn render_combination(out: &mut String, c: &CombinationEcho) {
    let _ = write!(out, "  [{}] {} = {} / {}", c.level, c.expression, c.numerator, c.denominator);
    if let Some(r) = &c.rate {
        let _ = write!(out, "  rate {r}");
    }
    let _ = writeln!(out, "  ({})", status_text(c.status));
}

pub fn render_text(r: &StructureReport) -> String {
    let mut out = String::new();
    let c = &r.config;
    let _ = writeln!(
        out,
        "config: max-degree {} max-exp {} cap {} prune {} seed {}",
        c.max_degree, c.max_exp, c.candidate_cap, c.prune, c.seed
    );
    if let Some(o) = &r.ode {
        let _ = writeln!(out, "\nODE");
        for (i, (name, rhs)) in o.names.iter().zip(&o.rhs).enumerate() {
            let _ = writeln!(out, "  x{} ({name})' = {rhs}", i + 1);
        }
        let _ = writeln!(out, "  div f = {}", o.divergence);
    }
    if let Some(k) = &r.kahan {
        let _ = writeln!(out, "\nKahan map  x' = N/D");
        for (i, nm) in k.numerators.iter().enumerate() {
            let _ = writeln!(out, "  N{} = {nm}", i + 1);
        }
        let _ = writeln!(out, "  D = {}", k.denominator);
        let _ = writeln!(out, "  J = ({}) / ({})", k.jacobian.numerator, k.jacobian.denominator);
        let _ = writeln!(out, "  time symmetry: {}", status_text(k.time_symmetry));
    }
    if let Some(fe) = &r.factors {
        let _ = writeln!(out, "\nFactors of J (unit {})", fe.unit);
        for e in fe.numerator.iter().chain(&fe.denominator) {
            let _ = writeln!(out, "  {} = {}  multiplicity {}", e.label, e.poly, e.multiplicity);
        }
        let _ = writeln!(out, "  reconstruction: {}", status_text(fe.reconstruction));
    }
    if let Some(d) = &r.darboux {
        let _ = writeln!(
            out,
            "\nDarboux pairs ({} candidates, {} tried, {} pruned{})",
            d.candidates_total,
            d.candidates_tried,
            d.candidates_pruned,
            if d.truncated { ", truncated" } else { "" }
        );
        for p in &d.pairs {
            let _ = writeln!(
                out,
                "  {} = {}  C = {}{}  ({})",
                p.label,
                p.p,
                p.cofactor,
                if p.reducible { "  reducible" } else { "" },
                status_text(p.status)
            );
        }
        for note in &d.notes {
            let _ = writeln!(out, "  note: {note}");
        }
    }
    if let Some(s) = &r.structure {
        let _ = writeln!(out, "\nContinuum limits");
        for c in &s.pairs {
            let _ = writeln!(out, "  {}: P̄ = {}  C̄ = {}  ({})", c.pair, c.p_bar, c.c_bar, status_text(c.status));
        }
        for e in &s.excluded {
            let _ = writeln!(out, "  {} excluded: {}", e.pair, e.reason);
        }
        let _ = writeln!(out, "\nFirst integrals");
        s.first_integrals.iter().for_each(|c| render_combination(&mut out, c));
        let _ = writeln!(out, "\nExponential relations");
        s.exponentials.iter().for_each(|c| render_combination(&mut out, c));
        let _ = writeln!(out, "\nMeasures (density 1 / product)");
        s.measures.iter().for_each(|c| render_combination(&mut out, c));
        if let Some(sol) = &s.solution {
            let _ = writeln!(out, "\nSolution");
            for k in &sol.constants {
                let _ = writeln!(
                    out,
                    "  {} = ({}) / ({}) at t = 0, rate {}",
                    k.symbol, k.numerator, k.denominator, k.rate
                );
            }
            for comp in &sol.components {
                let _ = writeln!(out, "  {}(t) = ({}) / ({})", comp.variable, comp.numerator, comp.denominator);
            }
        }
        if !s.notes.is_empty() {
            let _ = writeln!(out, "\nNotes");
        }
        for note in &s.notes {
            let _ = writeln!(out, "  {note}");
        }
    }
    if let Some(v) = &r.verification {
        let _ = writeln!(out, "\nVerification");
        for c in v {
            let status = match c.status {
                CheckStatus::Pass => "pass",
                CheckStatus::Fail => "FAIL",
                CheckStatus::Skipped => "skip",
            };
            match c.observed {
                Some(x) => {
                    let _ = writeln!(out, "  {status}  {}  observed {x:.3e}  {}", c.name, c.detail);
                }
                None => {
                    let _ = writeln!(out, "  {status}  {}  {}", c.name, c.detail);
                }
            }
        }
    }
    for e in &r.errors {
        let _ = writeln!(out, "\nerror in stage {}: {}", e.stage, e.message);
    }
    out
}
