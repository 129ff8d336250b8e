//! Forbidden-block patterns `T_n ⊆ 2^[n]` and sequences of them.
//!
//! Indices are 0-based throughout the Rust API. The JSON forms use 1-based
//! indices, matching the usual `[n] = {1, ..., n}` convention.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

/// Probe depth used when none is given.
pub const DEFAULT_PROBE_N: usize = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PatternError {
    #[error("block index {index} is outside [{n}] (1-based)")]
    BlockOutOfRange { index: usize, n: usize },
    #[error("dimension must be positive")]
    ZeroDimension,
    #[error("T_{n} = {{[{n}]}} is excluded from dimension-free sequences")]
    RejectedFullBlock { n: usize },
    #[error("declared flag `{flag}` contradicts the materialized patterns: {detail}")]
    FlagMismatch { flag: &'static str, detail: String },
    #[error("probe depth must be at least 3, got {0}")]
    ProbeTooShallow(usize),
    #[error("invalid rule parameters: {0}")]
    InvalidRule(String),
    #[error("generator returned a pattern of dimension {got} for n = {n}")]
    GeneratorDimension { n: usize, got: usize },
}

/// A normalized family of pairwise incomparable, nonempty blocks of `[n]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BlockPattern {
    n: usize,
    blocks: Vec<Vec<usize>>,
}

impl BlockPattern {
    /// Normalizes raw 0-based blocks: drops empty sets and every block
    /// contained in another, then orders blocks by minimum element, then by
    /// size, then lexicographically.
    pub fn normalize<I, B>(n: usize, raw: I) -> Result<Self, PatternError>
    where
        I: IntoIterator<Item = B>,
        B: IntoIterator<Item = usize>,
    {
        if n == 0 {
            return Err(PatternError::ZeroDimension);
        }
        let mut sets: Vec<BTreeSet<usize>> = Vec::new();
        for block in raw {
            let set: BTreeSet<usize> = block.into_iter().collect();
            if let Some(&bad) = set.iter().find(|&&i| i >= n) {
                return Err(PatternError::BlockOutOfRange { index: bad + 1, n });
            }
            if !set.is_empty() && !sets.contains(&set) {
                sets.push(set);
            }
        }
        let kept: Vec<Vec<usize>> = sets
            .iter()
            .filter(|u| !sets.iter().any(|v| v != *u && u.is_subset(v)))
            .map(|u| u.iter().copied().collect())
            .collect();
        Ok(Self::from_sorted(n, kept))
    }

    /// Same as [`normalize`](Self::normalize) but with 1-based indices.
    pub fn from_one_based<I, B>(n: usize, raw: I) -> Result<Self, PatternError>
    where
        I: IntoIterator<Item = B>,
        B: IntoIterator<Item = usize>,
    {
        let mut shifted = Vec::new();
        for block in raw {
            let mut b = Vec::new();
            for i in block {
                if i == 0 || i > n {
                    return Err(PatternError::BlockOutOfRange { index: i, n });
                }
                b.push(i - 1);
            }
            shifted.push(b);
        }
        Self::normalize(n, shifted)
    }

    fn from_sorted(n: usize, mut blocks: Vec<Vec<usize>>) -> Self {
        blocks.sort_by(|a, b| a[0].cmp(&b[0]).then(a.len().cmp(&b.len())).then(a.cmp(b)));
        Self { n, blocks }
    }

    pub fn empty(n: usize) -> Self {
        assert!(n > 0, "dimension must be positive");
        Self { n, blocks: Vec::new() }
    }

    /// `{{1}, ..., {n}}`, the pattern behind `f_*[-]`.
    pub fn singletons(n: usize) -> Self {
        assert!(n > 0, "dimension must be positive");
        Self { n, blocks: (0..n).map(|i| vec![i]).collect() }
    }

    /// Contiguous partition of `[n]` with the given block sizes.
    pub fn contiguous(sizes: &[usize]) -> Self {
        let n: usize = sizes.iter().sum();
        let mut blocks = Vec::new();
        let mut start = 0;
        for &s in sizes.iter().filter(|&&s| s > 0) {
            blocks.push((start..start + s).collect());
            start += s;
        }
        Self::from_sorted(n, blocks)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Blocks as sorted 0-based index lists.
    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// True for `{[n]}` with `n >= 2`, the case excluded from
    /// dimension-free sequences.
    pub fn is_full_block(&self) -> bool {
        self.n >= 2 && self.blocks.len() == 1 && self.blocks[0].len() == self.n
    }

    pub fn to_one_based(&self) -> Vec<Vec<usize>> {
        self.blocks.iter().map(|b| b.iter().map(|i| i + 1).collect()).collect()
    }

    /// `mask[i][j]` is true when some block contains both `i` and `j`
    /// (the entry is handled by `g`), false where `f` acts.
    pub fn mask(&self) -> Mask {
        let n = self.n;
        let mut cells = vec![false; n * n];
        for b in &self.blocks {
            for &i in b {
                for &j in b {
                    cells[i * n + j] = true;
                }
            }
        }
        Mask { n, cells }
    }

    pub fn classify(&self) -> PatternClass {
        let block_count = self.blocks.len();
        let max_block_size = self.blocks.iter().map(Vec::len).max().unwrap_or(0);
        let mut counts = vec![0usize; self.n];
        for b in &self.blocks {
            for &i in b {
                counts[i] += 1;
            }
        }
        let covers_all = counts.iter().all(|&c| c >= 1);
        let overlapping = counts.iter().any(|&c| c >= 2);
        let kind = if block_count == 0 {
            PatternKind::Empty
        } else if max_block_size == 1 {
            PatternKind::SingletonsOnly
        } else if overlapping {
            PatternKind::Overlapping
        } else if covers_all {
            PatternKind::PartitionOfAll
        } else {
            PatternKind::SubpartitionWithBigBlock
        };
        PatternClass { kind, block_count, covers_all, max_block_size }
    }

    /// Image of the pattern under the index map `i -> sigma[i]`.
    pub fn permuted(&self, sigma: &[usize]) -> Result<Self, PatternError> {
        if sigma.len() != self.n {
            return Err(PatternError::InvalidRule(format!(
                "permutation of length {} for pattern of dimension {}",
                sigma.len(),
                self.n
            )));
        }
        Self::normalize(self.n, self.blocks.iter().map(|b| b.iter().map(|&i| sigma[i]).collect::<Vec<_>>()))
    }

    /// Pattern induced on the given (distinct) indices, re-indexed by position.
    pub fn restrict(&self, indices: &[usize]) -> Self {
        let restricted = self.blocks.iter().map(|b| {
            indices
                .iter()
                .enumerate()
                .filter(|(_, i)| b.contains(i))
                .map(|(pos, _)| pos)
                .collect::<Vec<_>>()
        });
        Self::normalize(indices.len(), restricted).expect("restriction stays in range")
    }
}

impl fmt::Display for BlockPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .to_one_based()
            .iter()
            .map(|b| format!("{{{}}}", b.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",")))
            .collect();
        write!(f, "T_{} = {{{}}}", self.n, parts.join(", "))
    }
}

#[derive(Serialize, Deserialize)]
struct PatternRepr {
    n: usize,
    blocks: Vec<Vec<usize>>,
}

impl Serialize for BlockPattern {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PatternRepr { n: self.n, blocks: self.to_one_based() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for BlockPattern {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = PatternRepr::deserialize(d)?;
        BlockPattern::from_one_based(repr.n, repr.blocks).map_err(serde::de::Error::custom)
    }
}

/// Boolean `g`/`f` territory grid of a pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    n: usize,
    cells: Vec<bool>,
}

impl Mask {
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.cells[i * self.n + j]
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn to_rows(&self) -> Vec<Vec<bool>> {
        self.cells.chunks(self.n).map(|r| r.to_vec()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PatternKind {
    Empty,
    SingletonsOnly,
    SubpartitionWithBigBlock,
    PartitionOfAll,
    Overlapping,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternClass {
    pub kind: PatternKind,
    pub block_count: usize,
    pub covers_all: bool,
    pub max_block_size: usize,
}

/// `max_n |T_n|`, possibly unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BlockCount {
    Finite(usize),
    Infinite,
}

impl BlockCount {
    pub fn finite(self) -> Option<usize> {
        match self {
            BlockCount::Finite(k) => Some(k),
            BlockCount::Infinite => None,
        }
    }
}

impl fmt::Display for BlockCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BlockCount::Finite(k) => write!(f, "{k}"),
            BlockCount::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for BlockCount {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            BlockCount::Finite(k) => s.serialize_u64(*k as u64),
            BlockCount::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for BlockCount {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match Value::deserialize(d)? {
            Value::Number(n) => n
                .as_u64()
                .map(|k| BlockCount::Finite(k as usize))
                .ok_or_else(|| serde::de::Error::custom("K must be a non-negative integer")),
            Value::String(s) if matches!(s.as_str(), "inf" | "infinity" | "∞") => Ok(BlockCount::Infinite),
            Value::Null => Ok(BlockCount::Infinite),
            other => Err(serde::de::Error::custom(format!("invalid K: {other}"))),
        }
    }
}

/// Global properties of a sequence `(T_n)`, declared by the rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequenceFlags {
    /// Some `T_n` with `n >= 2` is nonempty.
    pub eventually_nonempty: bool,
    /// Every block of every `T_n` is a singleton.
    pub all_singletons: bool,
    /// Some `n >= 3` whose `T_n` has a block of size at least two.
    #[serde(default)]
    pub has_block_ge2_at: Option<usize>,
    /// Some `n >= 3` whose `T_n` has two intersecting blocks.
    #[serde(default)]
    pub overlap_at: Option<usize>,
    /// `T_n` is a partition of `[n]` for every `n`.
    pub covers_all_n: bool,
    #[serde(rename = "K")]
    pub k: BlockCount,
}

/// Which row of the classification table a sequence falls into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// `T_n = ∅` for all `n`.
    Empty,
    /// Nonempty, singletons only.
    Singletons,
    /// Disjoint blocks, some of size ≥ 2, `T_n` a partition of `[n]` for all
    /// `n`, and `K = max |T_n|` finite.
    PartitionAll { k: usize },
    /// Disjoint blocks, some of size ≥ 2, and either some `T_n` leaves an
    /// index uncovered or `K` is unbounded.
    SubpartitionOther,
    /// Some `T_n` (n ≥ 3) has intersecting blocks.
    Overlapping,
}

impl Regime {
    pub fn tag(&self) -> &'static str {
        match self {
            Regime::Empty => "R1-Empty",
            Regime::Singletons => "R2-Singletons",
            Regime::PartitionAll { .. } => "R3a-PartitionAll-FiniteK",
            Regime::SubpartitionOther => "R3b-Subpartition-Other",
            Regime::Overlapping => "R4-Overlapping",
        }
    }

    /// Row label in the classification table.
    pub fn table_row(&self) -> &'static str {
        match self {
            Regime::Empty => "1",
            Regime::Singletons => "2",
            Regime::PartitionAll { .. } => "3a",
            Regime::SubpartitionOther => "3b",
            Regime::Overlapping => "4",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Regime::PartitionAll { k } => write!(f, "{} (K={k})", self.tag()),
            _ => f.write_str(self.tag()),
        }
    }
}

/// Generator signature of custom rules. Must be pure.
pub type PatternGenerator = Arc<dyn Fn(usize) -> BlockPattern + Send + Sync>;

#[derive(Clone)]
pub enum RuleKind {
    /// `T_n = ∅`.
    Empty,
    /// `T_n = {{1}, ..., {n}}`.
    AllSingletons,
    /// `T_n = {{j} : j ∈ S, j ≤ n}` for a fixed set `S` of 0-based indices.
    SingletonSubset(Vec<usize>),
    /// Partition of `[n]` into `min(n, k)` contiguous, near-equal blocks.
    ContiguousPartition(usize),
    /// Partition of `[n-1]` into `min(n-1, k)` contiguous blocks, leaving
    /// index `n` uncovered.
    ProperSubpartition(usize),
    /// `{{1,2},{3,4},...}` with a trailing singleton for odd `n`; `T_2` is
    /// `{{1},{2}}` to avoid the excluded `{[2]}`. Unbounded `K`.
    PairedPartition,
    /// `{{1,2},{2,3}}` for `n ≥ 3`, empty below.
    OverlappingChain,
    /// Explicit patterns for listed `n`; unlisted `n` get `∅`.
    Table(Vec<BlockPattern>),
    /// Arbitrary pure generator.
    Custom(PatternGenerator),
}

impl fmt::Debug for RuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleKind::Empty => f.write_str("Empty"),
            RuleKind::AllSingletons => f.write_str("AllSingletons"),
            RuleKind::SingletonSubset(s) => write!(f, "SingletonSubset({s:?})"),
            RuleKind::ContiguousPartition(k) => write!(f, "ContiguousPartition({k})"),
            RuleKind::ProperSubpartition(k) => write!(f, "ProperSubpartition({k})"),
            RuleKind::PairedPartition => f.write_str("PairedPartition"),
            RuleKind::OverlappingChain => f.write_str("OverlappingChain"),
            RuleKind::Table(t) => write!(f, "Table({} patterns)", t.len()),
            RuleKind::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// A sequence `(T_n)_{n≥1}`: a generator plus declared global flags.
#[derive(Debug, Clone)]
pub struct PatternRule {
    kind: RuleKind,
    flags: SequenceFlags,
}

fn near_equal_sizes(n: usize, parts: usize) -> Vec<usize> {
    let parts = parts.min(n).max(1);
    (0..parts).map(|i| n / parts + usize::from(i < n % parts)).collect()
}

impl PatternRule {
    pub fn empty() -> Self {
        Self::builtin(RuleKind::Empty)
    }

    pub fn all_singletons() -> Self {
        Self::builtin(RuleKind::AllSingletons)
    }

    /// `S` given as 0-based indices.
    pub fn singleton_subset(indices: &[usize]) -> Result<Self, PatternError> {
        if indices.is_empty() {
            return Err(PatternError::InvalidRule("singleton subset needs at least one index".into()));
        }
        let set: BTreeSet<usize> = indices.iter().copied().collect();
        Ok(Self::builtin(RuleKind::SingletonSubset(set.into_iter().collect())))
    }

    pub fn contiguous_partition(k: usize) -> Result<Self, PatternError> {
        if k < 2 {
            return Err(PatternError::InvalidRule(format!("contiguous partition needs k >= 2, got {k}")));
        }
        Ok(Self::builtin(RuleKind::ContiguousPartition(k)))
    }

    pub fn proper_subpartition(k: usize) -> Result<Self, PatternError> {
        if k < 1 {
            return Err(PatternError::InvalidRule("proper subpartition needs k >= 1".into()));
        }
        Ok(Self::builtin(RuleKind::ProperSubpartition(k)))
    }

    pub fn paired_partition() -> Self {
        Self::builtin(RuleKind::PairedPartition)
    }

    pub fn overlapping_chain() -> Self {
        Self::builtin(RuleKind::OverlappingChain)
    }

    /// Rule backed by explicit patterns; flags must be declared.
    pub fn table(patterns: Vec<BlockPattern>, flags: SequenceFlags) -> Result<Self, PatternError> {
        let mut seen = BTreeSet::new();
        for p in &patterns {
            if !seen.insert(p.dim()) {
                return Err(PatternError::InvalidRule(format!("n = {} listed twice", p.dim())));
            }
        }
        Ok(Self { kind: RuleKind::Table(patterns), flags })
    }

    pub fn custom(generator: PatternGenerator, flags: SequenceFlags) -> Self {
        Self { kind: RuleKind::Custom(generator), flags }
    }

    /// The six rules that cover the table rows 1, 2, 3a, 3b, 3b, 4.
    pub fn table_rules() -> Vec<(&'static str, PatternRule)> {
        vec![
            ("empty", Self::empty()),
            ("all_singletons", Self::all_singletons()),
            ("contiguous_partition(3)", Self::contiguous_partition(3).expect("k >= 2")),
            ("proper_subpartition(2)", Self::proper_subpartition(2).expect("k >= 1")),
            ("paired_partition", Self::paired_partition()),
            ("overlapping_chain", Self::overlapping_chain()),
        ]
    }

    fn builtin(kind: RuleKind) -> Self {
        let flags = Self::builtin_flags(&kind);
        Self { kind, flags }
    }

    fn builtin_flags(kind: &RuleKind) -> SequenceFlags {
        let none = SequenceFlags {
            eventually_nonempty: false,
            all_singletons: true,
            has_block_ge2_at: None,
            overlap_at: None,
            covers_all_n: false,
            k: BlockCount::Finite(0),
        };
        match kind {
            RuleKind::Empty => none,
            RuleKind::AllSingletons => SequenceFlags {
                eventually_nonempty: true,
                covers_all_n: true,
                k: BlockCount::Infinite,
                ..none
            },
            RuleKind::SingletonSubset(s) => SequenceFlags {
                // T_n is nonempty once n exceeds min(S); n = 1 may be the only
                // nonempty one if S = {0}, which does not count.
                eventually_nonempty: true,
                k: BlockCount::Finite(s.len()),
                ..none
            },
            RuleKind::ContiguousPartition(k) => SequenceFlags {
                eventually_nonempty: true,
                all_singletons: false,
                has_block_ge2_at: Some(k + 1),
                covers_all_n: true,
                k: BlockCount::Finite(*k),
                ..none
            },
            RuleKind::ProperSubpartition(k) => SequenceFlags {
                eventually_nonempty: true,
                all_singletons: false,
                has_block_ge2_at: Some((k + 2).max(3)),
                k: BlockCount::Finite(*k),
                ..none
            },
            RuleKind::PairedPartition => SequenceFlags {
                eventually_nonempty: true,
                all_singletons: false,
                has_block_ge2_at: Some(3),
                covers_all_n: true,
                k: BlockCount::Infinite,
                ..none
            },
            RuleKind::OverlappingChain => SequenceFlags {
                eventually_nonempty: true,
                all_singletons: false,
                has_block_ge2_at: Some(3),
                overlap_at: Some(3),
                k: BlockCount::Finite(2),
                ..none
            },
            RuleKind::Table(_) | RuleKind::Custom(_) => unreachable!("declared by caller"),
        }
    }

    pub fn kind(&self) -> &RuleKind {
        &self.kind
    }

    pub fn flags(&self) -> &SequenceFlags {
        &self.flags
    }

    pub fn is_builtin(&self) -> bool {
        !matches!(self.kind, RuleKind::Table(_) | RuleKind::Custom(_))
    }

    /// Replaces the declared flags. Built-in rules reject flags that differ
    /// from their exact ones.
    pub fn with_flags(mut self, flags: SequenceFlags) -> Result<Self, PatternError> {
        if self.is_builtin() && flags != self.flags {
            return Err(PatternError::FlagMismatch {
                flag: "flags",
                detail: format!("built-in rule {:?} has flags {:?}", self.kind, self.flags),
            });
        }
        self.flags = flags;
        Ok(self)
    }

    /// Materializes `T_n`.
    pub fn pattern(&self, n: usize) -> Result<BlockPattern, PatternError> {
        if n == 0 {
            return Err(PatternError::ZeroDimension);
        }
        let p = match &self.kind {
            RuleKind::Empty => BlockPattern::empty(n),
            RuleKind::AllSingletons => BlockPattern::singletons(n),
            RuleKind::SingletonSubset(s) => {
                BlockPattern::normalize(n, s.iter().filter(|&&j| j < n).map(|&j| vec![j]))?
            }
            RuleKind::ContiguousPartition(k) => BlockPattern::contiguous(&near_equal_sizes(n, *k)),
            RuleKind::ProperSubpartition(k) => {
                if n == 1 {
                    BlockPattern::empty(1)
                } else {
                    let mut sizes = near_equal_sizes(n - 1, *k);
                    sizes.push(0);
                    let p = BlockPattern::contiguous(&sizes);
                    BlockPattern { n, blocks: p.blocks }
                }
            }
            RuleKind::PairedPartition => {
                if n == 2 {
                    BlockPattern::singletons(2)
                } else {
                    let mut sizes = vec![2; n / 2];
                    if n % 2 == 1 {
                        sizes.push(1);
                    }
                    BlockPattern::contiguous(&sizes)
                }
            }
            RuleKind::OverlappingChain => {
                if n < 3 {
                    BlockPattern::empty(n)
                } else {
                    BlockPattern::normalize(n, [vec![0, 1], vec![1, 2]])?
                }
            }
            RuleKind::Table(t) => t.iter().find(|p| p.dim() == n).cloned().unwrap_or_else(|| BlockPattern::empty(n)),
            RuleKind::Custom(g) => {
                let p = g(n);
                if p.dim() != n {
                    return Err(PatternError::GeneratorDimension { n, got: p.dim() });
                }
                p
            }
        };
        if p.is_full_block() {
            return Err(PatternError::RejectedFullBlock { n });
        }
        Ok(p)
    }

    /// Checks the declared flags against `T_1, ..., T_probe` and returns the
    /// materialized patterns.
    pub fn validate(&self, probe_n: usize) -> Result<Vec<BlockPattern>, PatternError> {
        let patterns: Vec<BlockPattern> = (1..=probe_n).map(|n| self.pattern(n)).collect::<Result<_, _>>()?;
        let f = &self.flags;
        let mismatch = |flag: &'static str, detail: String| Err(PatternError::FlagMismatch { flag, detail });

        let first_nonempty = patterns.iter().find(|p| p.dim() >= 2 && !p.is_empty()).map(|p| p.dim());
        if !f.eventually_nonempty {
            if let Some(n) = first_nonempty {
                return mismatch("eventually_nonempty", format!("T_{n} is nonempty"));
            }
        }
        let first_big = patterns.iter().find(|p| p.classify().max_block_size >= 2).map(|p| p.dim());
        if f.all_singletons {
            if let Some(n) = first_big {
                return mismatch("all_singletons", format!("T_{n} has a block of size >= 2"));
            }
            if f.has_block_ge2_at.is_some() {
                return mismatch("has_block_ge2_at", "set while all_singletons is declared".into());
            }
        } else if f.has_block_ge2_at.is_none() {
            return mismatch("has_block_ge2_at", "all_singletons is false but no witness index is declared".into());
        }
        if let Some(n) = f.has_block_ge2_at {
            if n < 3 {
                return mismatch("has_block_ge2_at", format!("must be >= 3, got {n}"));
            }
            if n <= probe_n && patterns[n - 1].classify().max_block_size < 2 {
                return mismatch("has_block_ge2_at", format!("T_{n} has no block of size >= 2"));
            }
            if !f.eventually_nonempty {
                return mismatch("eventually_nonempty", format!("T_{n} has a block of size >= 2"));
            }
        }
        let first_overlap = patterns.iter().find(|p| p.classify().kind == PatternKind::Overlapping).map(|p| p.dim());
        match f.overlap_at {
            None => {
                if let Some(n) = first_overlap {
                    return mismatch("overlap_at", format!("T_{n} has intersecting blocks"));
                }
            }
            Some(n) => {
                if n < 3 {
                    return mismatch("overlap_at", format!("must be >= 3, got {n}"));
                }
                if n <= probe_n && patterns[n - 1].classify().kind != PatternKind::Overlapping {
                    return mismatch("overlap_at", format!("T_{n} has no intersecting blocks"));
                }
                if f.has_block_ge2_at.is_none() {
                    return mismatch("has_block_ge2_at", "overlapping blocks have size >= 2".into());
                }
            }
        }
        if f.covers_all_n {
            if let Some(p) = patterns.iter().find(|p| {
                let c = p.classify();
                !c.covers_all || c.kind == PatternKind::Overlapping
            }) {
                return mismatch("covers_all_n", format!("T_{} is not a partition of [{}]", p.dim(), p.dim()));
            }
        }
        let observed_k = patterns.iter().map(BlockPattern::len).max().unwrap_or(0);
        if let BlockCount::Finite(k) = f.k {
            if observed_k > k {
                return mismatch("K", format!("|T_n| reaches {observed_k} > declared {k}"));
            }
            if self.is_builtin() && probe_n >= 2 * k + 2 && observed_k != k {
                return mismatch("K", format!("max |T_n| is {observed_k}, declared {k}"));
            }
        }
        Ok(patterns)
    }

    /// Places the sequence in its table row. Overlap anywhere wins, then any
    /// block of size ≥ 2, then nonemptiness.
    pub fn classify(&self, probe_n: usize) -> Result<Regime, PatternError> {
        if probe_n < 3 {
            return Err(PatternError::ProbeTooShallow(probe_n));
        }
        self.validate(probe_n)?;
        let f = &self.flags;
        Ok(if f.overlap_at.is_some() {
            Regime::Overlapping
        } else if f.has_block_ge2_at.is_some() {
            match (f.covers_all_n, f.k) {
                (true, BlockCount::Finite(k)) if k >= 2 => Regime::PartitionAll { k },
                _ => Regime::SubpartitionOther,
            }
        } else if f.eventually_nonempty {
            Regime::Singletons
        } else {
            Regime::Empty
        })
    }

    /// Smallest `n ≤ probe_n` with `|T_n| = k`.
    pub fn realizing_dimension(&self, k: usize, probe_n: usize) -> Result<Option<usize>, PatternError> {
        for n in 1..=probe_n {
            if self.pattern(n)?.len() == k {
                return Ok(Some(n));
            }
        }
        Ok(None)
    }

    /// JSON form `{"kind": ..., "params": {...}, "flags": {...}}`. Custom
    /// generators have no JSON form.
    pub fn to_json(&self) -> Option<Value> {
        let (kind, params) = match &self.kind {
            RuleKind::Empty => ("empty", json!({})),
            RuleKind::AllSingletons => ("all_singletons", json!({})),
            RuleKind::SingletonSubset(s) => {
                ("singleton_subset", json!({ "indices": s.iter().map(|i| i + 1).collect::<Vec<_>>() }))
            }
            RuleKind::ContiguousPartition(k) => ("contiguous_partition", json!({ "k": k })),
            RuleKind::ProperSubpartition(k) => ("proper_subpartition", json!({ "k": k })),
            RuleKind::PairedPartition => ("paired_partition", json!({})),
            RuleKind::OverlappingChain => ("overlapping_chain", json!({})),
            RuleKind::Table(t) => ("table", json!({ "patterns": t })),
            RuleKind::Custom(_) => return None,
        };
        Some(json!({ "kind": kind, "params": params, "flags": self.flags }))
    }

    pub fn from_json(value: &Value) -> Result<Self, PatternError> {
        let bad = |m: String| PatternError::InvalidRule(m);
        let kind = value.get("kind").and_then(Value::as_str).ok_or_else(|| bad("missing \"kind\"".into()))?;
        let empty = json!({});
        let params = value.get("params").unwrap_or(&empty);
        let usize_param = |name: &str| -> Result<usize, PatternError> {
            params
                .get(name)
                .and_then(Value::as_u64)
                .map(|v| v as usize)
                .ok_or_else(|| bad(format!("rule \"{kind}\" needs integer param \"{name}\"")))
        };
        let flags: Option<SequenceFlags> = match value.get("flags") {
            None | Some(Value::Null) => None,
            Some(v) => Some(serde_json::from_value(v.clone()).map_err(|e| bad(format!("flags: {e}")))?),
        };
        let rule = match kind {
            "empty" => Self::empty(),
            "all_singletons" => Self::all_singletons(),
            "singleton_subset" => {
                let idx: Vec<usize> = params
                    .get("indices")
                    .and_then(Value::as_array)
                    .ok_or_else(|| bad("singleton_subset needs \"indices\"".into()))?
                    .iter()
                    .map(|v| v.as_u64().filter(|&i| i >= 1).map(|i| i as usize - 1))
                    .collect::<Option<_>>()
                    .ok_or_else(|| bad("indices must be 1-based positive integers".into()))?;
                Self::singleton_subset(&idx)?
            }
            "contiguous_partition" => Self::contiguous_partition(usize_param("k")?)?,
            "proper_subpartition" => Self::proper_subpartition(usize_param("k")?)?,
            "paired_partition" => Self::paired_partition(),
            "overlapping_chain" => Self::overlapping_chain(),
            "table" => {
                let patterns: Vec<BlockPattern> = serde_json::from_value(
                    params.get("patterns").cloned().ok_or_else(|| bad("table needs \"patterns\"".into()))?,
                )
                .map_err(|e| bad(format!("patterns: {e}")))?;
                let flags = flags.ok_or_else(|| bad("table rules must declare \"flags\"".into()))?;
                return Self::table(patterns, flags);
            }
            other => return Err(bad(format!("unknown rule kind \"{other}\""))),
        };
        match flags {
            Some(f) => rule.with_flags(f),
            None => Ok(rule),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pat1(n: usize, blocks: &[&[usize]]) -> BlockPattern {
        BlockPattern::from_one_based(n, blocks.iter().map(|b| b.to_vec())).unwrap()
    }

    #[test]
    fn normalize_drops_comparable_and_empty_blocks() {
        assert_eq!(pat1(3, &[&[1], &[1, 2]]), pat1(3, &[&[1, 2]]));
        assert_eq!(pat1(3, &[&[1], &[1, 2]]).blocks(), &[vec![0, 1]]);
        assert!(pat1(3, &[&[]]).is_empty());
        assert_eq!(pat1(3, &[&[2], &[3]]).blocks(), &[vec![1], vec![2]]);
        // ordering by min element then size
        assert_eq!(pat1(4, &[&[4], &[2, 3], &[1]]).blocks(), &[vec![0], vec![1, 2], vec![3]]);
    }

    #[test]
    fn normalize_rejects_out_of_range() {
        assert_eq!(
            BlockPattern::from_one_based(3, [vec![4]]).unwrap_err(),
            PatternError::BlockOutOfRange { index: 4, n: 3 }
        );
        assert!(BlockPattern::from_one_based(3, [vec![0]]).is_err());
        assert!(BlockPattern::normalize(2, [vec![2]]).is_err());
    }

    #[test]
    fn classify_three_index_patterns() {
        let c = pat1(3, &[&[1, 2], &[3]]).classify();
        assert_eq!(c.kind, PatternKind::PartitionOfAll);
        assert_eq!((c.block_count, c.max_block_size, c.covers_all), (2, 2, true));

        assert_eq!(pat1(3, &[&[1, 2], &[2, 3]]).classify().kind, PatternKind::Overlapping);

        let c = pat1(3, &[&[1, 2]]).classify();
        assert_eq!(c.kind, PatternKind::SubpartitionWithBigBlock);
        assert!(!c.covers_all);

        assert_eq!(BlockPattern::empty(4).classify().kind, PatternKind::Empty);
        assert_eq!(BlockPattern::singletons(4).classify().kind, PatternKind::SingletonsOnly);
    }

    #[test]
    fn masks() {
        let m = BlockPattern::empty(3).mask();
        assert!(m.to_rows().iter().flatten().all(|&b| !b));

        let m = pat1(3, &[&[1, 2], &[3]]).mask();
        let want = [[true, true, false], [true, true, false], [false, false, true]];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(m.get(i, j), want[i][j]);
            }
        }

        let m = pat1(3, &[&[1, 2], &[2, 3]]).mask();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(m.get(i, j), !((i, j) == (0, 2) || (i, j) == (2, 0)));
            }
        }
    }

    #[test]
    fn builtin_rules_materialize() {
        let r = PatternRule::contiguous_partition(2).unwrap();
        assert_eq!(r.pattern(3).unwrap(), pat1(3, &[&[1, 2], &[3]]));
        assert_eq!(r.pattern(2).unwrap(), BlockPattern::singletons(2));
        assert_eq!(r.pattern(1).unwrap(), BlockPattern::singletons(1));

        let r = PatternRule::proper_subpartition(1).unwrap();
        assert_eq!(r.pattern(3).unwrap(), pat1(3, &[&[1, 2]]));
        assert!(r.pattern(1).unwrap().is_empty());

        let r = PatternRule::paired_partition();
        assert_eq!(r.pattern(5).unwrap(), pat1(5, &[&[1, 2], &[3, 4], &[5]]));
        assert_eq!(r.pattern(2).unwrap(), BlockPattern::singletons(2));

        let r = PatternRule::overlapping_chain();
        assert_eq!(r.pattern(5).unwrap(), pat1(5, &[&[1, 2], &[2, 3]]));
        assert!(r.pattern(2).unwrap().is_empty());

        let r = PatternRule::singleton_subset(&[1, 3]).unwrap();
        assert_eq!(r.pattern(3).unwrap(), pat1(3, &[&[2]]));
    }

    #[test]
    fn builtin_flags_validate() {
        for (_, rule) in PatternRule::table_rules() {
            rule.validate(DEFAULT_PROBE_N).unwrap();
        }
        for k in 2..6 {
            PatternRule::contiguous_partition(k).unwrap().validate(20).unwrap();
            PatternRule::proper_subpartition(k).unwrap().validate(20).unwrap();
        }
        PatternRule::singleton_subset(&[0, 4]).unwrap().validate(20).unwrap();
    }

    #[test]
    fn classify_sequences() {
        let rows: Vec<_> = PatternRule::table_rules()
            .into_iter()
            .map(|(_, r)| r.classify(DEFAULT_PROBE_N).unwrap())
            .collect();
        assert_eq!(
            rows,
            vec![
                Regime::Empty,
                Regime::Singletons,
                Regime::PartitionAll { k: 3 },
                Regime::SubpartitionOther,
                Regime::SubpartitionOther,
                Regime::Overlapping
            ]
        );
        let r = PatternRule::singleton_subset(&[0]).unwrap();
        assert_eq!(r.classify(DEFAULT_PROBE_N).unwrap(), Regime::Singletons);
        assert!(matches!(PatternRule::empty().classify(2), Err(PatternError::ProbeTooShallow(2))));
    }

    #[test]
    fn full_block_is_rejected() {
        let flags = SequenceFlags {
            eventually_nonempty: true,
            all_singletons: false,
            has_block_ge2_at: Some(3),
            overlap_at: None,
            covers_all_n: true,
            k: BlockCount::Finite(1),
        };
        let rule = PatternRule::custom(Arc::new(|n| BlockPattern::normalize(n, [(0..n).collect::<Vec<_>>()]).unwrap()), flags);
        assert_eq!(rule.pattern(3).unwrap_err(), PatternError::RejectedFullBlock { n: 3 });
        assert!(rule.pattern(1).is_ok());
    }

    #[test]
    fn flag_mismatch_detected() {
        let wrong = SequenceFlags {
            eventually_nonempty: true,
            all_singletons: true,
            has_block_ge2_at: None,
            overlap_at: None,
            covers_all_n: true,
            k: BlockCount::Infinite,
        };
        let rule = PatternRule::table(vec![pat1(4, &[&[1, 2], &[3, 4]])], wrong).unwrap();
        assert!(matches!(
            rule.classify(DEFAULT_PROBE_N),
            Err(PatternError::FlagMismatch { flag: "all_singletons", .. })
        ));
        assert!(matches!(
            PatternRule::empty().with_flags(wrong),
            Err(PatternError::FlagMismatch { .. })
        ));
    }

    #[test]
    fn rule_json_roundtrip() {
        for (_, rule) in PatternRule::table_rules() {
            let v = rule.to_json().unwrap();
            let back = PatternRule::from_json(&v).unwrap();
            assert_eq!(back.flags(), rule.flags());
            for n in 1..8 {
                assert_eq!(back.pattern(n).unwrap(), rule.pattern(n).unwrap());
            }
        }
        let v = json!({"kind": "contiguous_partition", "params": {"k": 3}});
        let r = PatternRule::from_json(&v).unwrap();
        assert_eq!(r.classify(DEFAULT_PROBE_N).unwrap(), Regime::PartitionAll { k: 3 });
        assert!(PatternRule::from_json(&json!({"kind": "nope"})).is_err());
    }

    #[test]
    fn table_rule_from_json() {
        let v = json!({
            "kind": "table",
            "params": {"patterns": [{"n": 3, "blocks": [[1, 2], [3]]}, {"n": 4, "blocks": [[1, 2], [3, 4]]}]},
            "flags": {"eventually_nonempty": true, "all_singletons": false, "has_block_ge2_at": 3,
                      "overlap_at": null, "covers_all_n": false, "K": 2}
        });
        let r = PatternRule::from_json(&v).unwrap();
        assert_eq!(r.classify(DEFAULT_PROBE_N).unwrap(), Regime::SubpartitionOther);
    }
}
