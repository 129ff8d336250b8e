//! The thirteen acceptance criteria, run as one deterministic report.
//!
//! Each criterion draws from its own random stream (`seed`, `SUITE_STREAM + id`),
//! so criteria are independent of each other and of the order they run in.
//! The canonical JSON of a report is serialized with sorted keys and contains
//! no timing data, so two runs with the same configuration are byte-identical.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use super::checks::{correlation_bound_check, induction_step_check, interval_equivalence_holds};
use super::sampling::{
    random_block_sizes, random_correlation, random_partition, random_positive_definite, random_psd, stream_rng,
};
use super::{refute_scalar_outside_interval, verify_preservation, VerifyConfig, VerifyError};
use crate::function::{
    admissible_family, ratio_to_f64, Domain, DomainKind, HerzTerm, PreserverFunction, Rational, ScalarInterval,
};
use crate::matrix::{HermitianMatrix, C64};
use crate::operator::{apply_entrywise, OperatorSpec};
use crate::pattern::{BlockPattern, PatternRule, Regime};
use crate::witness::{albert_embed_auto, witness_allones, witness_aw, witness_br, Provenance, Witness};

/// Offset of the per-criterion random streams.
pub const SUITE_STREAM: u64 = 1 << 32;

/// Tolerance of the exact identities (decomposition, tensor, mask).
pub const IDENTITY_TOL: f64 = 1e-14;
/// Tolerance of eigenvalue and determinant formulas.
pub const FORMULA_TOL: f64 = 1e-10;
/// PSD tolerance of the Albert embedding check.
pub const ALBERT_TOL: f64 = 1e-10;

pub const CRITERIA: [(u32, &str); 13] = [
    (1, "Schur product closure"),
    (2, "all-ones eigenvalue law for f_*"),
    (3, "partition interval sufficiency and necessity"),
    (4, "overlap witness determinant"),
    (5, "A_w Schur complement determinant"),
    (6, "decomposition and tensor identities"),
    (7, "Hadamard mask factorization"),
    (8, "Albert embedding"),
    (9, "correlation bound"),
    (10, "regime classification table"),
    (11, "dominance necessity"),
    (12, "induction step"),
    (13, "determinism"),
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    pub measured: BTreeMap<String, Value>,
    pub detail: String,
}

impl CriterionResult {
    /// One line: `[PASS] 3 name: detail`.
    pub fn summary_line(&self) -> String {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        format!("[{tag}] {:>2} {}: {}", self.id, self.name, self.detail)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub max_n: usize,
    pub tol: f64,
    pub probe_n: usize,
    pub passed: bool,
    pub criteria: Vec<CriterionResult>,
}

impl SuiteReport {
    /// Sorted-key JSON; identical configurations give identical bytes.
    pub fn canonical_json(&self) -> String {
        let v = serde_json::to_value(self).expect("report is serializable");
        serde_json::to_string_pretty(&v).expect("value is serializable")
    }

    pub fn failures(&self) -> impl Iterator<Item = &CriterionResult> {
        self.criteria.iter().filter(|c| !c.passed)
    }
}

/// Key/value pairs recorded for one criterion.
#[derive(Default)]
struct Measured(BTreeMap<String, Value>);

impl Measured {
    fn put(&mut self, key: &str, value: impl Serialize) {
        self.0.insert(key.to_string(), serde_json::to_value(value).expect("serializable"));
    }
}

struct Outcome {
    passed: bool,
    measured: Measured,
    detail: String,
}

type CriterionFn = fn(&VerifyConfig, &mut ChaCha8Rng) -> Result<Outcome, VerifyError>;

fn criterion_fn(id: u32) -> CriterionFn {
    match id {
        1 => schur_closure,
        2 => allones_law,
        3 => partition_interval,
        4 => overlap_determinant,
        5 => aw_complement_determinant,
        6 => decomposition_identities,
        7 => mask_factorization,
        8 => albert_embedding,
        9 => correlation_bound,
        10 => classification_table,
        11 => dominance_necessity,
        12 => induction_step,
        _ => unreachable!("criterion {id} has no body"),
    }
}

fn run_one(id: u32, name: &str, cfg: &VerifyConfig) -> CriterionResult {
    let mut rng = stream_rng(cfg.seed, SUITE_STREAM + id as u64);
    let (passed, measured, detail) = match criterion_fn(id)(cfg, &mut rng) {
        Ok(o) => (o.passed, o.measured.0, o.detail),
        Err(e) => (false, BTreeMap::new(), format!("error: {e}")),
    };
    CriterionResult { id, name: name.to_string(), passed, measured, detail }
}

fn run_numbered(cfg: &VerifyConfig) -> Vec<CriterionResult> {
    CRITERIA.iter().filter(|(id, _)| *id <= 12).map(|&(id, name)| run_one(id, name, cfg)).collect()
}

fn canonical_criteria(results: &[CriterionResult]) -> String {
    serde_json::to_string(&serde_json::to_value(results).expect("serializable")).expect("serializable")
}

/// Runs every acceptance criterion. The last one reruns the first twelve and
/// compares the canonical JSON byte for byte.
pub fn run_theorem_suite(cfg: &VerifyConfig) -> Result<SuiteReport, VerifyError> {
    cfg.validate()?;
    let mut criteria = run_numbered(cfg);
    let first = canonical_criteria(&criteria);
    let second = canonical_criteria(&run_numbered(cfg));
    let identical = first == second;
    let mut measured = BTreeMap::new();
    measured.insert("bytes".to_string(), json!(first.len()));
    measured.insert("identical".to_string(), json!(identical));
    criteria.push(CriterionResult {
        id: 13,
        name: CRITERIA[12].1.to_string(),
        passed: identical,
        measured,
        detail: if identical {
            format!("rerun of criteria 1-12 is byte-identical ({} bytes)", first.len())
        } else {
            "rerun of criteria 1-12 differs".to_string()
        },
    });
    Ok(SuiteReport {
        seed: cfg.seed,
        max_n: cfg.max_n,
        tol: cfg.tol,
        probe_n: cfg.probe_n,
        passed: criteria.iter().all(|c| c.passed),
        criteria,
    })
}

fn unit_disc() -> Domain {
    Domain::unit_disc()
}

/// Largest dimension a criterion samples, given its own cap.
fn cap(cfg: &VerifyConfig, limit: usize) -> usize {
    cfg.max_n.min(limit)
}

fn random_point_in_disc(rng: &mut ChaCha8Rng, radius: f64) -> C64 {
    let r = radius * rng.random::<f64>().sqrt();
    C64::from_polar(r, rng.random_range(0.0..std::f64::consts::TAU))
}

fn random_herz_monomial(rng: &mut ChaCha8Rng) -> PreserverFunction {
    PreserverFunction::herz_monomial(rng.random_range(0.5..2.0), rng.random_range(0..=2), rng.random_range(0..=2))
        .expect("valid parameters")
}

/// A random built-in function of any variant except `Custom`.
fn random_builtin(rng: &mut ChaCha8Rng) -> PreserverFunction {
    match rng.random_range(0..6) {
        0 => random_herz_monomial(rng),
        1 => {
            let count = rng.random_range(1..=3);
            let terms = (0..count)
                .map(|_| HerzTerm { m: rng.random_range(0..=3), k: rng.random_range(0..=3), c: rng.random_range(0.0..1.0) })
                .collect();
            PreserverFunction::herz_series(terms, 6).expect("valid parameters")
        }
        2 => PreserverFunction::scalar(rng.random_range(-1.0..1.0), random_herz_monomial(rng)).expect("finite"),
        3 => PreserverFunction::Identity,
        4 => PreserverFunction::Zero,
        _ => PreserverFunction::linear(rng.random_range(-2.0..2.0)),
    }
}

/// Random pattern: either a subpartition, or a few arbitrary (possibly
/// intersecting) blocks.
fn random_pattern(rng: &mut ChaCha8Rng, n: usize) -> BlockPattern {
    let blocks: Vec<Vec<usize>> = if rng.random_bool(0.5) {
        let parts = rng.random_range(1..=n);
        random_partition(rng, n, parts).into_iter().filter(|_| rng.random_bool(0.7)).collect()
    } else {
        let count = rng.random_range(0..=3);
        (0..count).map(|_| (0..n).filter(|_| rng.random_bool(0.5)).collect()).collect()
    };
    BlockPattern::normalize(n, blocks).expect("indices in range")
}

fn relative_gap(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<f64, VerifyError> {
    Ok(a.max_abs_diff(b)? / a.max_abs_entry().max(b.max_abs_entry()).max(1.0))
}

fn schur_closure(cfg: &VerifyConfig, rng: &mut ChaCha8Rng) -> Result<Outcome, VerifyError> {
    let top = cap(cfg, 8);
    let d = unit_disc();
    let mut worst = f64::INFINITY;
    let mut failures = 0;
    for _ in 0..1000 {
        let n = rng.random_range(1..=top);
        let a = random_psd(rng, n, None, &d);
        let b = random_psd(rng, n, None, &d);
        let report = a.schur_product(&b)?.is_psd(cfg.tol)?;
        worst = worst.min(report.min_eig);
        failures += usize::from(!report.is_psd);
    }
    let mut m = Measured::default();
    m.put("pairs", 1000);
    m.put("worst_min_eig", worst);
    m.put("failures", failures);
    Ok(Outcome {
        passed: failures == 0,
        measured: m,
        detail: format!("1000 pairs, n <= {top}, worst min_eig {worst:.3e}, {failures} failures"),
    })
}

fn allones_law(cfg: &VerifyConfig, _rng: &mut ChaCha8Rng) -> Result<Outcome, VerifyError> {
    let d = unit_disc();
    let mut worst_eig_err = 0f64;
    let mut psd_mismatches = Vec::new();
    let mut cases = 0;
    for n in 2..=cap(cfg, 6) {
        let mut grid: Vec<Rational> = (0..=40).map(|i| Rational::new(3 * (i - 20), 50)).collect();
        grid.push(Rational::new(-1, n as i64 - 1));
        grid.push(Rational::from_integer(1));
        let interval = ScalarInterval::partition(n);
        for x in [0.1, 0.5, 0.9] {
            let input = witness_allones(x, n, &d)?;
            for &c in &grid {
                let cf = ratio_to_f64(c);
                let out = OperatorSpec::star(PreserverFunction::linear(cf), n, d).apply(&input.matrix)?;
                let eig = out.eigenvalues()?;
                let mut expected = vec![(1.0 - cf) * x; n - 1];
                expected.push((1.0 + (n as f64 - 1.0) * cf) * x);
                expected.sort_by(f64::total_cmp);
                for (got, want) in eig.iter().zip(&expected) {
                    worst_eig_err = worst_eig_err.max((got - want).abs());
                }
                if out.is_psd(cfg.tol)?.is_psd != interval.contains_exact(c) {
                    psd_mismatches.push(format!("n={n} x={x} c={c}"));
                }
                cases += 1;
            }
        }
    }
    let mut m = Measured::default();
    m.put("cases", cases);
    m.put("worst_eigenvalue_error", worst_eig_err);
    m.put("psd_mismatches", &psd_mismatches);
    let passed = cases > 0 && worst_eig_err <= FORMULA_TOL && psd_mismatches.is_empty();
    let mut detail = format!(
        "{cases} cases, eigenvalue error {worst_eig_err:.3e}, {} PSD/interval mismatches",
        psd_mismatches.len()
    );
    if let Some(first) = psd_mismatches.first() {
        detail.push_str(&format!(" (first: {first})"));
    }
    Ok(Outcome { passed, measured: m, detail })
}

fn partition_interval(cfg: &VerifyConfig, rng: &mut ChaCha8Rng) -> Result<Outcome, VerifyError> {
    let d = unit_disc();
    let top = cap(cfg, 8);
    let ks: Vec<usize> = [2, 3, 4].into_iter().filter(|&k| k <= top).collect();
    let mut m = Measured::default();
    let mut passed = !ks.is_empty();
    let mut notes = Vec::new();
    for &k in &ks {
        let boundary = Rational::new(-1, k as i64 - 1);
        let f = PreserverFunction::linear(ratio_to_f64(boundary));
        let mut worst = f64::INFINITY;
        let mut failures = 0;
        for _ in 0..500 {
            let n = rng.random_range(k..=top);
            let pattern = BlockPattern::normalize(n, random_partition(rng, n, k))?;
            let a = random_psd(rng, n, None, &d);
            let report = OperatorSpec::pattern_map(f.clone(), pattern, d).apply(&a)?.is_psd(cfg.tol)?;
            worst = worst.min(report.min_eig);
            failures += usize::from(!report.is_psd);
        }

        let outside = boundary - Rational::new(1, 20);
        let cf = ratio_to_f64(outside);
        let rule = PatternRule::contiguous_partition(k)?;
        let battery_cfg = VerifyConfig { samples_per_n: 0, max_n: top.max(3), ..cfg.clone() };
        let verdict = verify_preservation(&PreserverFunction::Identity, &PreserverFunction::linear(cf), &rule, &d, &battery_cfg)?;
        let mut necessity_err = f64::INFINITY;
        if let Some(cx) = &verdict.counterexample {
            if let (Provenance::AllOnes { x, .. }, Some(cert)) = (&cx.witness.provenance, &cx.certificate) {
                let expected = (1.0 + (k as f64 - 1.0) * cf) * x;
                necessity_err = (cert.min_eig - expected).abs();
            }
        }
        let direct = refute_scalar_outside_interval(&rule, cf, &d, &battery_cfg)?;
        let mut direct_err = f64::INFINITY;
        if let Some(cx) = &direct.counterexample {
            if let (Provenance::AllOnes { x, .. }, Some(cert)) = (&cx.witness.provenance, &cx.certificate) {
                direct_err = (cert.min_eig - (1.0 + (k as f64 - 1.0) * cf) * x).abs();
            }
        }
        let ok = failures == 0 && necessity_err <= FORMULA_TOL && direct_err <= FORMULA_TOL;
        passed &= ok;
        m.put(&format!("k{k}_worst_min_eig"), worst);
        m.put(&format!("k{k}_sufficiency_failures"), failures);
        m.put(&format!("k{k}_necessity_eigenvalue_error"), necessity_err);
        m.put(&format!("k{k}_direct_refutation_error"), direct_err);
        notes.push(format!("k={k}: {failures}/500 fail at c={boundary}, c={outside} refuted (err {necessity_err:.1e})"));
    }
    let skipped: Vec<usize> = [2, 3, 4].into_iter().filter(|k| !ks.contains(k)).collect();
    if !skipped.is_empty() {
        m.put("skipped_k", &skipped);
        notes.push(format!("k={skipped:?} skipped (max_n = {})", cfg.max_n));
    }
    Ok(Outcome { passed, measured: m, detail: notes.join("; ") })
}

fn overlap_determinant(_cfg: &VerifyConfig, rng: &mut ChaCha8Rng) -> Result<Outcome, VerifyError> {
    let d = unit_disc();
    let pattern = BlockPattern::normalize(3, [vec![0, 1], vec![1, 2]])?;
    let mut worst = 0f64;
    for _ in 0..200 {
        let g = random_herz_monomial(rng);
        let f = random_builtin(rng);
        let r = rng.random_range(0.05..0.95);
        let z = random_point_in_disc(rng, r);
        let b = witness_br(r, z, &d)?;
        let out = OperatorSpec::new(g.clone(), f.clone(), pattern.clone(), d).apply(&b.matrix)?;
        let expected = -g.eval(C64::new(r, 0.0)).re * (f.eval(z) - g.eval(z)).norm_sqr();
        let scale = out.max_abs_entry().powi(3).max(f64::MIN_POSITIVE);
        worst = worst.max((out.determinant() - expected).abs() / scale);
    }
    let mut m = Measured::default();
    m.put("cases", 200);
    m.put("worst_relative_error", worst);
    Ok(Outcome {
        passed: worst <= FORMULA_TOL,
        measured: m,
        detail: format!("200 cases, worst relative error {worst:.3e}"),
    })
}

fn aw_complement_determinant(_cfg: &VerifyConfig, rng: &mut ChaCha8Rng) -> Result<Outcome, VerifyError> {
    let d = unit_disc();
    let pattern = BlockPattern::normalize(3, [vec![0, 1], vec![2]])?;
    let mut worst_formula = 0f64;
    let mut worst_zero = 0f64;
    for _ in 0..200 {
        let g = random_herz_monomial(rng);
        let h = random_herz_monomial(rng);
        let wa = rng.random_range(0.2..0.95);
        let w = C64::from_polar(wa, rng.random_range(0.0..std::f64::consts::TAU));
        let z = random_point_in_disc(rng, wa);
        let c = rng.random_range(-1.0..=1.0);
        let input = witness_aw(w, z, &d)?;
        let z1 = z * (w.conj() / wa);
        let gw = g.eval(C64::new(wa, 0.0)).re;
        for (f, is_multiple) in [(PreserverFunction::scalar(c, g.clone())?, true), (PreserverFunction::scalar(c, h.clone())?, false)] {
            let out = OperatorSpec::new(g.clone(), f.clone(), pattern.clone(), d).apply(&input.matrix)?;
            let det = out.schur_complement(&[2])?.determinant();
            let fw = f.eval(C64::new(wa, 0.0)).re;
            let expected = -(fw * g.eval(z1) - gw * f.eval(z1)).norm_sqr() / (gw * gw);
            let top = out.max_abs_entry();
            let scale = (top + top * top / gw).powi(2);
            worst_formula = worst_formula.max((det - expected).abs() / scale);
            if is_multiple {
                worst_zero = worst_zero.max(det.abs() / scale);
            }
        }
    }
    let mut m = Measured::default();
    m.put("cases", 200);
    m.put("worst_formula_error", worst_formula);
    m.put("worst_multiple_determinant", worst_zero);
    Ok(Outcome {
        passed: worst_formula <= FORMULA_TOL && worst_zero <= FORMULA_TOL,
        measured: m,
        detail: format!("200 cases, formula error {worst_formula:.3e}, |det| for f = c·g at most {worst_zero:.3e}"),
    })
}

fn decomposition_identities(cfg: &VerifyConfig, rng: &mut ChaCha8Rng) -> Result<Outcome, VerifyError> {
    let d = unit_disc();
    let top = cap(cfg, 8);
    let mut worst_split = 0f64;
    for _ in 0..200 {
        let n = rng.random_range(1..=top);
        let pattern = random_pattern(rng, n);
        let spec = OperatorSpec::new(random_builtin(rng), random_builtin(rng), pattern, d);
        let a = random_psd(rng, n, None, &d);
        let (everywhere, masked) = spec.decompose(&a)?;
        worst_split = worst_split.max(relative_gap(&spec.apply(&a)?, &everywhere.add(&masked)?)?);
    }
    let mut worst_tensor = 0f64;
    for i in 0..40 {
        let m = 1 + i % 4;
        let n = rng.random_range(1..=3);
        let (g, f) = (random_builtin(rng), random_builtin(rng));
        let a = random_psd(rng, n, None, &d);
        let big = HermitianMatrix::ones(m).kron(&a);
        let direct = OperatorSpec::new(g.clone(), f.clone(), BlockPattern::singletons(m * n), d).apply(&big)?;
        let f_a = apply_entrywise(&f, &a, &d)?;
        let (_, diag_part) = OperatorSpec::new(g, f, BlockPattern::singletons(n), d).decompose(&a)?;
        let split = HermitianMatrix::ones(m).kron(&f_a).add(&HermitianMatrix::identity(m).kron(&diag_part))?;
        worst_tensor = worst_tensor.max(relative_gap(&direct, &split)?);
    }
    let mut m = Measured::default();
    m.put("decomposition_cases", 200);
    m.put("tensor_cases", 40);
    m.put("worst_decomposition_gap", worst_split);
    m.put("worst_tensor_gap", worst_tensor);
    Ok(Outcome {
        passed: worst_split <= IDENTITY_TOL && worst_tensor <= IDENTITY_TOL,
        measured: m,
        detail: format!("decomposition gap {worst_split:.3e} (200 cases), tensor gap {worst_tensor:.3e} (m = 1..4)"),
    })
}

fn mask_factorization(cfg: &VerifyConfig, rng: &mut ChaCha8Rng) -> Result<Outcome, VerifyError> {
    let d = unit_disc();
    let top = cap(cfg, 8);
    let mut worst = 0f64;
    for _ in 0..200 {
        let n = rng.random_range(1..=top);
        let pattern = random_pattern(rng, n);
        let spec = OperatorSpec::pattern_map(PreserverFunction::linear(rng.random_range(-1.5..1.5)), pattern, d);
        let a = random_psd(rng, n, None, &d);
        let factored = spec.mask_factorization(&a)?;
        worst = worst.max(relative_gap(&spec.apply(&a)?, &factored)?);
    }
    let mut m = Measured::default();
    m.put("cases", 200);
    m.put("worst_gap", worst);
    Ok(Outcome { passed: worst <= IDENTITY_TOL, measured: m, detail: format!("200 cases, worst gap {worst:.3e}") })
}

fn albert_embedding(cfg: &VerifyConfig, rng: &mut ChaCha8Rng) -> Result<Outcome, VerifyError> {
    let d = Domain::new(DomainKind::OpenPos, 1.0)?;
    let top = cap(cfg, 6);
    let mut failures = Vec::new();
    let mut worst = f64::INFINITY;
    let mut smallest_eps = 1f64;
    for index in 0..100 {
        let n = rng.random_range(1..=top);
        let a = random_psd(rng, n, None, &d);
        let input = Witness { provenance: Provenance::Sampled { family: "open_pos".into(), n, index }, matrix: a.clone() };
        let out = albert_embed_auto(&input, &d)?;
        if let Provenance::AlbertEmbed { eps, .. } = out.provenance {
            smallest_eps = smallest_eps.min(eps);
        }
        let report = out.matrix.is_psd(ALBERT_TOL)?;
        worst = worst.min(report.min_eig);
        let inside = (0..=n).all(|i| (0..=n).all(|j| d.contains(out.matrix.get(i, j))));
        let head: Vec<usize> = (0..n).collect();
        let leading_exact = out.matrix.principal_submatrix(&head)? == a;
        if !(report.is_psd && inside && leading_exact) {
            failures.push(index);
        }
    }
    let mut m = Measured::default();
    m.put("cases", 100);
    m.put("worst_min_eig", worst);
    m.put("smallest_eps", smallest_eps);
    m.put("failures", &failures);
    Ok(Outcome {
        passed: failures.is_empty(),
        measured: m,
        detail: format!("100 cases, n <= {top}, worst min_eig {worst:.3e}, smallest eps {smallest_eps}, {} failures", failures.len()),
    })
}

fn correlation_bound(cfg: &VerifyConfig, rng: &mut ChaCha8Rng) -> Result<Outcome, VerifyError> {
    let top = cap(cfg, 8);
    let mut by_n: BTreeMap<usize, Vec<HermitianMatrix>> = BTreeMap::new();
    for _ in 0..200 {
        let n = rng.random_range(1..=top);
        by_n.entry(n).or_default().push(random_correlation(rng, n));
    }
    let (mut min_eig, mut trace_excess, mut row_margin) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY);
    let mut passed = true;
    for (n, samples) in &by_n {
        let r = correlation_bound_check(*n, samples, cfg.tol)?;
        min_eig = min_eig.min(r.worst_min_eig);
        trace_excess = trace_excess.max(r.worst_trace_excess);
        row_margin = row_margin.min(r.worst_row_margin);
        passed &= r.passed;
    }
    let mut m = Measured::default();
    m.put("samples", 200);
    m.put("worst_min_eig", min_eig);
    m.put("worst_trace_excess", trace_excess);
    m.put("worst_row_margin", row_margin);
    Ok(Outcome {
        passed,
        measured: m,
        detail: format!(
            "200 samples, n <= {top}: min_eig {min_eig:.3e}, λ_max - n {trace_excess:.3e}, row margin {row_margin:.3e}"
        ),
    })
}

/// Table row, family, c-interval and constraint of one rule.
type TableRow = (&'static str, &'static str, Option<[&'static str; 2]>, Option<&'static str>);

fn classification_table(cfg: &VerifyConfig, _rng: &mut ChaCha8Rng) -> Result<Outcome, VerifyError> {
    // (row, family, c-interval, constraint) per built-in rule, in table order.
    let expected: [TableRow; 6] = [
        ("1", "Herz series", None, None),
        ("2", "Herz series", None, Some("f(x) ≤ x on I∩ℝ≥0")),
        ("3a", "scalar multiple c·z", Some(["-1/2", "1"]), None),
        ("3b", "scalar multiple c·z", Some(["0", "1"]), None),
        ("3b", "scalar multiple c·z", Some(["0", "1"]), None),
        ("4", "identity only", None, Some("f = id")),
    ];
    let mut rows = Vec::new();
    let mut mismatches = Vec::new();
    for ((name, rule), want) in PatternRule::table_rules().into_iter().zip(expected) {
        let regime = rule.classify(cfg.probe_n)?;
        let desc = admissible_family(regime, rule.flags().k);
        let got = (
            regime.table_row(),
            desc.family,
            desc.c_interval.map(|i| i.to_strings()),
            desc.constraint,
        );
        let want_interval = want.2.map(|[lo, hi]| [lo.to_string(), hi.to_string()]);
        if (got.0, got.1, &got.2, got.3) != (want.0, want.1, &want_interval, want.3) {
            mismatches.push(format!("{name}: got row {} {}", got.0, desc.to_json()));
        }
        if let Regime::PartitionAll { k } = regime {
            if k != 3 {
                mismatches.push(format!("{name}: K = {k}"));
            }
        }
        rows.push(regime.table_row());
    }
    let mut m = Measured::default();
    m.put("rows", &rows);
    m.put("mismatches", &mismatches);
    Ok(Outcome {
        passed: mismatches.is_empty(),
        measured: m,
        detail: format!("rows {rows:?}, {} mismatches", mismatches.len()),
    })
}

fn dominance_necessity(cfg: &VerifyConfig, _rng: &mut ChaCha8Rng) -> Result<Outcome, VerifyError> {
    let d = unit_disc();
    let f = PreserverFunction::linear(2.0);
    let battery_cfg = VerifyConfig { samples_per_n: 0, ..cfg.clone() };
    let verdict = verify_preservation(&PreserverFunction::Identity, &f, &PatternRule::all_singletons(), &d, &battery_cfg)?;
    let refuted_by = verdict.counterexample.as_ref().map(|cx| cx.witness.provenance.to_string());

    // T_2 = {{1}}: g only on the (1,1) entry, so x·𝟏_2 maps to [[x, 2x], [2x, 2x]].
    let first_only = BlockPattern::normalize(2, [vec![0]])?;
    // 𝟏_2 lies on the boundary of the unit disc; both maps are linear, so
    // evaluate at x = 1/2 and double (exact in binary).
    let out = OperatorSpec::pattern_map(f.clone(), first_only, d).apply(&HermitianMatrix::ones(2).scale(0.5))?.scale(2.0);
    let expected = HermitianMatrix::from_real_rows(&[vec![1.0, 2.0], vec![2.0, 2.0]])?;
    let det = out.determinant();
    // Independent 2x2 determinant: ad - |b|².
    let det_oracle = out.get(0, 0).re * out.get(1, 1).re - out.get(0, 1).norm_sqr();
    let matches = out == expected && det_oracle == -2.0 && (det - det_oracle).abs() <= FORMULA_TOL;
    // Both singletons: [[x, 2x], [2x, x]], determinant -3x².
    let star = OperatorSpec::star(f, 2, d).apply(&HermitianMatrix::ones(2).scale(0.5))?.scale(2.0);
    let star_det = star.determinant();
    let star_ok = (star_det + 3.0).abs() <= FORMULA_TOL;

    let mut m = Measured::default();
    m.put("refuted", verdict.is_refuted());
    m.put("refuted_by", &refuted_by);
    m.put("determinant_first_only", det);
    m.put("determinant_singletons", star_det);
    Ok(Outcome {
        passed: verdict.is_refuted() && matches && star_ok,
        measured: m,
        detail: format!(
            "f = 2·id refuted by {}; on 𝟏_2 the determinant is {det} for T_2 = {{{{1}}}} and {star_det} for singletons",
            refuted_by.as_deref().unwrap_or("nothing")
        ),
    })
}

fn induction_step(cfg: &VerifyConfig, rng: &mut ChaCha8Rng) -> Result<Outcome, VerifyError> {
    let top = cap(cfg, 8);
    let ks: Vec<usize> = [2, 3].into_iter().filter(|&k| k < top).collect();
    let mut m = Measured::default();
    let mut failures = Vec::new();
    let mut worst_residual = 0f64;
    let mut cases = 0;
    if !ks.is_empty() {
        for i in 0..100 {
            let k = ks[i % ks.len()];
            let n = rng.random_range(k + 1..=top);
            let sizes = random_block_sizes(rng, n, k + 1);
            let q = rng.random_range(1..=12i64);
            let c = Rational::new(-rng.random_range(1..=q), q * k as i64);
            let a = random_positive_definite(rng, n);
            let r = induction_step_check(c, &sizes, &a, cfg.tol)?;
            worst_residual = worst_residual.max(r.algebra_residual);
            if !r.passed {
                failures.push(format!("k={k} c={c} sizes={sizes:?}"));
            }
            cases += 1;
        }
    }
    let mut grid_points = 0;
    let mut grid_failures = 0;
    for k in 2..=8 {
        for q in 1..=30i64 {
            for p in -2 * q..=q {
                grid_points += 1;
                grid_failures += usize::from(!interval_equivalence_holds(Rational::new(p, q), k));
            }
        }
    }
    m.put("cases", cases);
    m.put("worst_algebra_residual", worst_residual);
    m.put("failures", &failures);
    m.put("equivalence_grid_points", grid_points);
    m.put("equivalence_failures", grid_failures);
    let skipped: Vec<usize> = [2, 3].into_iter().filter(|k| !ks.contains(k)).collect();
    if !skipped.is_empty() {
        m.put("skipped_k", &skipped);
    }
    Ok(Outcome {
        passed: failures.is_empty() && grid_failures == 0,
        measured: m,
        detail: format!(
            "{cases} block samples for k in {ks:?}, residual {worst_residual:.3e}, {} failures; \
             interval equivalence at {grid_points} rational points, {grid_failures} failures",
            failures.len()
        ),
    })
}
