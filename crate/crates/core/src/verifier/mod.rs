//! Bounded search for failures of positivity preservation.
//!
//! [`verify_preservation`] runs a fixed witness battery and then a seeded
//! random battery. The first operator output that fails the PSD test becomes
//! the counterexample, so the report depends only on the inputs and the seed.

pub mod checks;
pub mod sampling;
pub mod suite;

use std::collections::BTreeMap;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::function::{conjugate_equivariance_check, Domain, DomainKind, FunctionError, PreserverFunction, ScalarInterval};
use crate::matrix::{HermitianMatrix, MatrixError, C64, MAX_EIG_DIM};
use crate::operator::{OperatorError, OperatorSpec};
use crate::pattern::{BlockPattern, PatternError, PatternRule, Regime, DEFAULT_PROBE_N};
use crate::witness::{
    albert_embed_auto, check_domain, pad_embed, rank_one_gram, relabel, tensor_blowup, witness_allones, witness_aw, witness_br,
    witness_mat1_input, witness_scaled_identity, Provenance, Witness, WitnessError,
};

pub use checks::{correlation_bound_check, induction_step_check, CorrelationReport, InductionReport};

pub const DEFAULT_SEED: u64 = 20_240_917;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{which} is not conjugate-equivariant on the probe set")]
    NotEquivariant { which: &'static str },
    #[error("c = {c} lies inside the admissible interval")]
    CNotOutside { c: f64 },
    #[error("expected a partition rule with finite K, got {0}")]
    RegimeMismatch(String),
    #[error("no n <= {probe_n} has |T_n| = {k}")]
    NoRealizingDimension { k: usize, probe_n: usize },
    #[error(transparent)]
    Pattern(#[from] PatternError),
    #[error(transparent)]
    Function(#[from] FunctionError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Witness(#[from] WitnessError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyConfig {
    pub max_n: usize,
    pub samples_per_n: usize,
    pub seed: u64,
    pub tol: f64,
    pub probe_n: usize,
    /// Restrict the random battery to rank-one samples.
    pub rank_one_only: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { max_n: 8, samples_per_n: 500, seed: DEFAULT_SEED, tol: 1e-8, probe_n: DEFAULT_PROBE_N, rank_one_only: false }
    }
}

impl VerifyConfig {
    pub fn validate(&self) -> Result<(), VerifyError> {
        if self.max_n == 0 || self.max_n > MAX_EIG_DIM {
            return Err(VerifyError::Config(format!("max_n must be in 1..={MAX_EIG_DIM}, got {}", self.max_n)));
        }
        if !(self.tol >= 0.0 && self.tol.is_finite()) {
            return Err(VerifyError::Config(format!("tol must be finite and nonnegative, got {}", self.tol)));
        }
        if self.probe_n < 3 {
            return Err(VerifyError::Config(format!("probe_n must be at least 3, got {}", self.probe_n)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    PreservedWithinBudget,
    Refuted,
}

fn one_based<S: Serializer>(indices: &[usize], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(indices.iter().map(|i| i + 1))
}

/// A principal submatrix of the output that is itself not PSD.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    /// 0-based in Rust, 1-based in JSON.
    #[serde(serialize_with = "one_based")]
    pub indices: Vec<usize>,
    pub min_eig: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    #[serde(flatten)]
    pub witness: Witness,
    pub n: usize,
    pub pattern: BlockPattern,
    pub output: HermitianMatrix,
    pub min_eig: f64,
    pub max_eig: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Certificate>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct VerdictStats {
    pub per_family: BTreeMap<String, usize>,
    pub per_n: BTreeMap<usize, usize>,
    /// Parameter combinations whose witness does not exist in the domain.
    pub skipped: usize,
    pub total: usize,
    /// "For all n" was checked only up to this dimension.
    pub truncated_at: usize,
}

impl VerdictStats {
    fn record(&mut self, family: &str, n: usize) {
        *self.per_family.entry(family.to_string()).or_default() += 1;
        *self.per_n.entry(n).or_default() += 1;
        self.total += 1;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub outcome: Outcome,
    pub counterexample: Option<Counterexample>,
    pub stats: VerdictStats,
}

impl Verdict {
    pub fn is_refuted(&self) -> bool {
        self.outcome == Outcome::Refuted
    }
}

/// One index per block when the blocks are pairwise disjoint; the principal
/// submatrix on those indices sees `g` only on its diagonal.
fn block_representatives(p: &BlockPattern) -> Option<Vec<usize>> {
    let mut seen = vec![false; p.dim()];
    for b in p.blocks() {
        for &i in b {
            if std::mem::replace(&mut seen[i], true) {
                return None;
            }
        }
    }
    (p.len() >= 2).then(|| p.blocks().iter().map(|b| b[0]).collect())
}

fn certificate(output: &HermitianMatrix, pattern: &BlockPattern) -> Result<Option<Certificate>, VerifyError> {
    let Some(indices) = block_representatives(pattern) else { return Ok(None) };
    let (min_eig, _) = output.principal_submatrix(&indices)?.eig_extremes()?;
    Ok(Some(Certificate { indices, min_eig }))
}

/// Restricted three-index patterns at which the low-dimensional witnesses are
/// placed, each with the witness families that target it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    /// `{{1,2}}`, third index uncovered.
    PairAndFree,
    /// `{{1,2},{3}}`.
    PairAndSingleton,
    /// `{{1,2},{2,3}}`.
    Overlap,
}

impl Slot {
    const ALL: [Slot; 3] = [Slot::PairAndFree, Slot::PairAndSingleton, Slot::Overlap];

    fn target(self) -> BlockPattern {
        let blocks: &[&[usize]] = match self {
            Slot::PairAndFree => &[&[0, 1]],
            Slot::PairAndSingleton => &[&[0, 1], &[2]],
            Slot::Overlap => &[&[0, 1], &[1, 2]],
        };
        BlockPattern::normalize(3, blocks.iter().map(|b| b.to_vec())).expect("valid pattern")
    }
}

/// First ordered triple `(a, b, c)` whose restricted pattern is the slot's.
fn find_slot(pattern: &BlockPattern, slot: Slot) -> Option<[usize; 3]> {
    let n = pattern.dim();
    let target = slot.target();
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                if a != b && b != c && a != c && pattern.restrict(&[a, b, c]) == target {
                    return Some([a, b, c]);
                }
            }
        }
    }
    None
}

/// Unit scalars used as phases, chosen so real domains only see exact signs.
fn phases(kind: DomainKind) -> Vec<C64> {
    match kind {
        DomainKind::Disc => vec![
            C64::new(1.0, 0.0),
            C64::new(0.0, 1.0),
            C64::new(-0.5, 3f64.sqrt() / 2.0),
            C64::new(-1.0, 0.0),
        ],
        DomainKind::OpenSym => vec![C64::new(1.0, 0.0), C64::new(-1.0, 0.0)],
        DomainKind::HalfOpenNonneg | DomainKind::OpenPos => vec![C64::new(1.0, 0.0)],
    }
}

fn witness_scale(domain: &Domain) -> f64 {
    if domain.is_bounded() {
        domain.rho()
    } else {
        2.0
    }
}

/// Grid of `x` for the `x·𝟏_n` witnesses, ascending.
pub fn allones_grid(domain: &Domain) -> Vec<f64> {
    let raw: Vec<f64> = if domain.is_bounded() {
        [0.0, 0.1, 0.25, 0.5, 0.75, 0.95].iter().map(|t| t * domain.rho()).collect()
    } else {
        vec![0.0, 0.1, 0.5, 1.0, 2.0, 4.0]
    };
    raw.into_iter().filter(|&x| domain.contains(C64::new(x, 0.0))).collect()
}

/// Family ids used to split the random streams.
const FAMILY_RANK_ONE: u64 = 1;
const FAMILY_GRAM: u64 = 2;

struct Battery<'a> {
    g: &'a PreserverFunction,
    f: &'a PreserverFunction,
    domain: &'a Domain,
    cfg: &'a VerifyConfig,
    patterns: Vec<BlockPattern>,
    stats: VerdictStats,
}

impl Battery<'_> {
    fn pattern(&self, n: usize) -> &BlockPattern {
        &self.patterns[n - 1]
    }

    fn test(&mut self, witness: Witness) -> Result<Option<Counterexample>, VerifyError> {
        let n = witness.dim();
        self.stats.record(witness.provenance.family(), n);
        let pattern = self.pattern(n).clone();
        let spec = OperatorSpec::new(self.g.clone(), self.f.clone(), pattern.clone(), *self.domain);
        let output = spec.apply(&witness.matrix)?;
        let report = output.is_psd(self.cfg.tol)?;
        if report.is_psd {
            return Ok(None);
        }
        let certificate = match witness.provenance {
            Provenance::AllOnes { .. } => certificate(&output, &pattern)?,
            _ => None,
        };
        Ok(Some(Counterexample {
            witness,
            n,
            pattern,
            output,
            min_eig: report.min_eig,
            max_eig: report.max_eig,
            certificate,
        }))
    }

    /// Tests a witness that may not exist for these parameters.
    fn try_test(&mut self, built: Result<Witness, WitnessError>) -> Result<Option<Counterexample>, VerifyError> {
        match built {
            Ok(w) => self.test(w),
            Err(
                WitnessError::OutOfDomain { .. }
                | WitnessError::ZeroW
                | WitnessError::ZeroVector
                | WitnessError::ZBeyondW { .. }
                | WitnessError::ZBeyondR { .. }
                | WitnessError::WBeyondT { .. }
                | WitnessError::InvalidParameter(_)
                | WitnessError::NonPositiveEntries
                | WitnessError::EpsTooLarge { .. },
            ) => {
                self.stats.skipped += 1;
                Ok(None)
            }
            Err(e) => Err(e.into()),
        }
    }

    fn allones(&mut self) -> Result<Option<Counterexample>, VerifyError> {
        let grid = allones_grid(self.domain);
        for n in 1..=self.cfg.max_n {
            for &x in &grid {
                let w = witness_allones(x, n, self.domain);
                if let Some(cx) = self.try_test(w)? {
                    return Ok(Some(cx));
                }
            }
        }
        Ok(None)
    }

    /// Places a 3x3 witness on `triple` inside dimension `n`.
    fn embed(&self, w: Witness, n: usize, triple: [usize; 3]) -> Result<Witness, WitnessError> {
        let mut sigma = triple.to_vec();
        sigma.extend((0..n).filter(|i| !triple.contains(i)));
        if self.domain.contains_zero() {
            pad_embed(&w, n, &sigma, self.domain)
        } else {
            let mut grown = w;
            while grown.dim() < n {
                grown = albert_embed_auto(&grown, self.domain)?;
            }
            relabel(&grown, &sigma)
        }
    }

    fn slot_witnesses(&self, slot: Slot) -> Vec<Result<Witness, WitnessError>> {
        let s = witness_scale(self.domain);
        let mags = [0.9 * s, 0.5 * s];
        let fracs = [0.0, 0.3, 0.7, 1.0];
        let units = phases(self.domain.kind());
        let d = self.domain;
        let mut out = Vec::new();
        let aw = |out: &mut Vec<_>| {
            for &m in &mags {
                for &uw in &units {
                    for &fr in &fracs {
                        for &uz in &units {
                            out.push(witness_aw(uw * m, uz * (fr * m), d));
                        }
                    }
                }
            }
        };
        match slot {
            Slot::PairAndFree => {
                for &m in &[0.5 * s, 0.9 * s] {
                    for &u in &units {
                        for t in [m, 0.7 * s, 0.9 * s] {
                            if t >= m {
                                out.push(witness_mat1_input(u * m, t, d));
                            }
                        }
                    }
                }
                aw(&mut out);
            }
            Slot::PairAndSingleton => aw(&mut out),
            Slot::Overlap => {
                for &r in &mags {
                    for &fr in &fracs {
                        for &u in &units {
                            out.push(witness_br(r, u * (fr * r), d));
                        }
                    }
                }
            }
        }
        out
    }

    fn low_dimensional(&mut self) -> Result<Option<Counterexample>, VerifyError> {
        for n in 3..=self.cfg.max_n {
            for slot in Slot::ALL {
                let Some(triple) = find_slot(self.pattern(n), slot) else { continue };
                for built in self.slot_witnesses(slot) {
                    let embedded = built.and_then(|w| self.embed(w, n, triple));
                    if let Some(cx) = self.try_test(embedded)? {
                        return Ok(Some(cx));
                    }
                }
            }
        }
        Ok(None)
    }

    /// Fixed small inputs for the `𝟏_m ⊗ A` blowups.
    fn blowup_bases(&self, d: usize) -> Vec<Result<Witness, WitnessError>> {
        let s = witness_scale(self.domain);
        let mut out = Vec::new();
        if self.domain.contains_zero() {
            out.push(witness_scaled_identity(0.5 * s, d, self.domain));
        }
        let units = phases(self.domain.kind());
        let v: Vec<C64> = (0..d)
            .map(|j| units[j % units.len()] * ((0.9 * s).sqrt() * (j + 1) as f64 / d as f64))
            .collect();
        out.push(rank_one_gram(&v).and_then(|w| {
            check_domain(&w.matrix, self.domain)?;
            Ok(w)
        }));
        out
    }

    fn blowups(&mut self) -> Result<Option<Counterexample>, VerifyError> {
        for m in 2..=4usize {
            for d in 1..=self.cfg.max_n / m {
                for base in self.blowup_bases(d) {
                    let built = base.and_then(|b| tensor_blowup(m, &b));
                    if let Some(cx) = self.try_test(built)? {
                        return Ok(Some(cx));
                    }
                }
            }
        }
        Ok(None)
    }

    fn random(&mut self) -> Result<Option<Counterexample>, VerifyError> {
        let (seed, per_n, rank_one_only) = (self.cfg.seed, self.cfg.samples_per_n, self.cfg.rank_one_only);
        for n in 1..=self.cfg.max_n {
            let mut rank_one = sampling::stream_rng(seed, sampling::battery_stream(n, FAMILY_RANK_ONE));
            let mut gram = sampling::stream_rng(seed, sampling::battery_stream(n, FAMILY_GRAM));
            for index in 0..per_n {
                let use_rank_one = rank_one_only || index % 2 == 0;
                let (matrix, family) = if use_rank_one {
                    (sampling::random_psd(&mut rank_one, n, Some(1), self.domain), "rank_one")
                } else {
                    (sampling::random_psd(&mut gram, n, None, self.domain), "gram")
                };
                if !matrix.is_psd(crate::witness::WITNESS_PSD_TOL)?.is_psd {
                    self.stats.skipped += 1;
                    continue;
                }
                let w = Witness { provenance: Provenance::Sampled { family: family.to_string(), n, index }, matrix };
                if let Some(cx) = self.test(w)? {
                    return Ok(Some(cx));
                }
            }
        }
        Ok(None)
    }
}

fn check_function(f: &PreserverFunction, which: &'static str, domain: &Domain) -> Result<(), VerifyError> {
    f.validate()?;
    if !conjugate_equivariance_check(f, &domain.probe_points()) {
        return Err(VerifyError::NotEquivariant { which });
    }
    Ok(())
}

/// Searches for `A ∈ 𝒫_n(I)`, `n ≤ max_n`, with `(g,f)_{T_n}[A]` not PSD.
///
/// Order: `x·𝟏_n` over `n` then `x`; the 3x3 witnesses (`Mat1`, `A_w`,
/// `B_r`) placed at the first index triple of each matching shape, over `n`;
/// `𝟏_m ⊗ A` blowups for `m ≤ 4`; finally `samples_per_n` random inputs per
/// `n`, alternating rank-one and random-rank Gram samples.
pub fn verify_preservation(
    g: &PreserverFunction,
    f: &PreserverFunction,
    rule: &PatternRule,
    domain: &Domain,
    cfg: &VerifyConfig,
) -> Result<Verdict, VerifyError> {
    cfg.validate()?;
    check_function(g, "g", domain)?;
    check_function(f, "f", domain)?;
    rule.validate(cfg.probe_n)?;
    if rule.flags().has_block_ge2_at.is_some() && cfg.max_n < 3 {
        return Err(VerifyError::Config("max_n must be at least 3 for rules with blocks of size >= 2".into()));
    }
    let patterns = (1..=cfg.max_n).map(|n| rule.pattern(n)).collect::<Result<Vec<_>, _>>()?;
    let mut battery = Battery {
        g,
        f,
        domain,
        cfg,
        patterns,
        stats: VerdictStats { truncated_at: cfg.max_n, ..Default::default() },
    };
    let found = match battery.allones()? {
        Some(cx) => Some(cx),
        None => match battery.low_dimensional()? {
            Some(cx) => Some(cx),
            None => match battery.blowups()? {
                Some(cx) => Some(cx),
                None => battery.random()?,
            },
        },
    };
    Ok(Verdict {
        outcome: if found.is_some() { Outcome::Refuted } else { Outcome::PreservedWithinBudget },
        counterexample: found,
        stats: battery.stats,
    })
}

/// For a partition rule with finite `K` and `c` outside `[-1/(K-1), 1]`,
/// evaluates `(id, c·id)_{T_n}[x·𝟏_n]` at the first `n` with `|T_n| = K`.
/// The certificate is the `K x K` principal submatrix picking one index per
/// block, which equals `(id, c·id)_*[x·𝟏_K]`.
pub fn refute_scalar_outside_interval(
    rule: &PatternRule,
    c: f64,
    domain: &Domain,
    cfg: &VerifyConfig,
) -> Result<Verdict, VerifyError> {
    cfg.validate()?;
    let k = match rule.classify(cfg.probe_n)? {
        Regime::PartitionAll { k } => k,
        other => return Err(VerifyError::RegimeMismatch(other.tag().to_string())),
    };
    if ScalarInterval::partition(k).contains(c) {
        return Err(VerifyError::CNotOutside { c });
    }
    let n = rule
        .realizing_dimension(k, cfg.probe_n)?
        .ok_or(VerifyError::NoRealizingDimension { k, probe_n: cfg.probe_n })?;
    let x = if domain.is_bounded() { (domain.rho() / 2.0).min(1.0) } else { 1.0 };
    let witness = witness_allones(x, n, domain)?;
    let pattern = rule.pattern(n)?;
    let spec = OperatorSpec::pattern_map(PreserverFunction::linear(c), pattern.clone(), *domain);
    let output = spec.apply(&witness.matrix)?;
    let report = output.is_psd(cfg.tol)?;
    let certificate = certificate(&output, &pattern)?;
    let mut stats = VerdictStats { truncated_at: n, ..Default::default() };
    stats.record("allones", n);
    let cx = Counterexample {
        witness,
        n,
        pattern,
        output,
        min_eig: report.min_eig,
        max_eig: report.max_eig,
        certificate,
    };
    Ok(if report.is_psd {
        Verdict { outcome: Outcome::PreservedWithinBudget, counterexample: None, stats }
    } else {
        Verdict { outcome: Outcome::Refuted, counterexample: Some(cx), stats }
    })
}
