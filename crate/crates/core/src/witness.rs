//! Explicit PSD test matrices and the embeddings that move them into larger
//! dimensions.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::function::{Domain, PreserverFunction};
use crate::matrix::{HermitianMatrix, MatrixError, C64};
use crate::operator::{OperatorError, OperatorSpec};
use crate::pattern::BlockPattern;

/// PSD tolerance every constructed witness must pass.
pub const WITNESS_PSD_TOL: f64 = 1e-10;
/// Candidate Albert parameters are `2^-1, ..., 2^-ALBERT_MAX_HALVINGS`.
pub const ALBERT_MAX_HALVINGS: i32 = 30;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WitnessError {
    #[error("rank-one Gram needs a nonzero vector")]
    ZeroVector,
    #[error("w must be nonzero")]
    ZeroW,
    #[error("need |z| <= |w|, got |z| = {z_abs}, |w| = {w_abs}")]
    ZBeyondW { z_abs: f64, w_abs: f64 },
    #[error("need |z| <= r, got |z| = {z_abs}, r = {r}")]
    ZBeyondR { z_abs: f64, r: f64 },
    #[error("need |w| <= t, got |w| = {w_abs}, t = {t}")]
    WBeyondT { w_abs: f64, t: f64 },
    #[error("entry ({}, {}) = {z} is outside the domain {domain}", .i + 1, .j + 1)]
    OutOfDomain { i: usize, j: usize, z: C64, domain: Domain },
    #[error("zero padding needs 0 in the domain, which {0} lacks")]
    DomainLacksZero(Domain),
    #[error("Albert embedding needs strictly positive real entries")]
    NonPositiveEntries,
    #[error("eps = {eps} is too large: the embedding is not PSD or leaves the domain")]
    EpsTooLarge { eps: f64 },
    #[error("constructed matrix is not PSD (min eigenvalue {min_eig:e})")]
    NotPsd { min_eig: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
}

/// How a witness was built, with its inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "provenance", content = "params", rename_all = "snake_case")]
pub enum Provenance {
    RankOneGram { vector: Vec<C64> },
    /// `A_w(z)`.
    Aw { w: C64, z: C64 },
    /// `B_r(z)`.
    Br { r: f64, z: C64 },
    /// Gram of `(w/√t, |w|/√t, √t)`, the input behind the `f(t) > 0` test.
    Mat1 { w: C64, t: f64 },
    /// `x · 𝟏_n`.
    AllOnes { x: f64, n: usize },
    /// `x · Id_n`.
    ScaledIdentity { x: f64, n: usize },
    /// `𝟏_m ⊗ A`.
    TensorBlowup { m: usize, inner: Box<Provenance> },
    /// Zero padding to `big_n`, then `i -> sigma[i]` (0-based).
    PadEmbed { big_n: usize, sigma: Vec<usize>, inner: Box<Provenance> },
    AlbertEmbed { eps: f64, inner: Box<Provenance> },
    /// Index `i` moved to `sigma[i]` (0-based).
    Relabel { sigma: Vec<usize>, inner: Box<Provenance> },
    /// Random PSD sample.
    Sampled { family: String, n: usize, index: usize },
    /// Matrix supplied by the caller.
    Provided { n: usize },
}

impl Provenance {
    /// Name of the outermost construction that is not an embedding.
    pub fn family(&self) -> &'static str {
        match self {
            Provenance::RankOneGram { .. } => "rank_one_gram",
            Provenance::Aw { .. } => "A_w",
            Provenance::Br { .. } => "B_r",
            Provenance::Mat1 { .. } => "mat1",
            Provenance::AllOnes { .. } => "allones",
            Provenance::ScaledIdentity { .. } => "scaled_identity",
            Provenance::TensorBlowup { .. } => "tensor_blowup",
            Provenance::PadEmbed { inner, .. }
            | Provenance::AlbertEmbed { inner, .. }
            | Provenance::Relabel { inner, .. } => inner.family(),
            Provenance::Sampled { .. } => "sampled",
            Provenance::Provided { .. } => "provided",
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::RankOneGram { vector } => write!(f, "vv* with v of length {}", vector.len()),
            Provenance::Aw { w, z } => write!(f, "A_w(z), w={w}, z={z}"),
            Provenance::Br { r, z } => write!(f, "B_r(z), r={r}, z={z}"),
            Provenance::Mat1 { w, t } => write!(f, "Gram(w/√t, |w|/√t, √t), w={w}, t={t}"),
            Provenance::AllOnes { x, n } => write!(f, "{x}·𝟏_{n}"),
            Provenance::ScaledIdentity { x, n } => write!(f, "{x}·Id_{n}"),
            Provenance::TensorBlowup { m, inner } => write!(f, "𝟏_{m} ⊗ [{inner}]"),
            Provenance::PadEmbed { big_n, sigma, inner } => {
                let s: Vec<usize> = sigma.iter().map(|i| i + 1).collect();
                write!(f, "[{inner}] padded to {big_n}, placed at {s:?}")
            }
            Provenance::AlbertEmbed { eps, inner } => write!(f, "Albert([{inner}], eps={eps})"),
            Provenance::Relabel { sigma, inner } => {
                let s: Vec<usize> = sigma.iter().map(|i| i + 1).collect();
                write!(f, "[{inner}] placed at {s:?}")
            }
            Provenance::Sampled { family, n, index } => write!(f, "sample #{index} ({family}, n={n})"),
            Provenance::Provided { n } => write!(f, "given {n}x{n} matrix"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    #[serde(flatten)]
    pub provenance: Provenance,
    pub matrix: HermitianMatrix,
}

impl Witness {
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
}

pub fn check_domain(m: &HermitianMatrix, domain: &Domain) -> Result<(), WitnessError> {
    let n = m.dim();
    for i in 0..n {
        for j in 0..n {
            let z = m.get(i, j);
            if !domain.contains(z) {
                return Err(WitnessError::OutOfDomain { i, j, z, domain: *domain });
            }
        }
    }
    Ok(())
}

fn check_psd(m: &HermitianMatrix) -> Result<(), WitnessError> {
    let report = m.is_psd(WITNESS_PSD_TOL)?;
    if report.is_psd {
        Ok(())
    } else {
        Err(WitnessError::NotPsd { min_eig: report.min_eig })
    }
}

fn finished(matrix: HermitianMatrix, provenance: Provenance, domain: Option<&Domain>) -> Result<Witness, WitnessError> {
    if let Some(d) = domain {
        check_domain(&matrix, d)?;
    }
    check_psd(&matrix)?;
    Ok(Witness { provenance, matrix })
}

/// `v v*`.
pub fn rank_one_gram(v: &[C64]) -> Result<Witness, WitnessError> {
    if v.iter().all(|z| *z == C64::new(0.0, 0.0)) {
        return Err(WitnessError::ZeroVector);
    }
    finished(HermitianMatrix::outer(v), Provenance::RankOneGram { vector: v.to_vec() }, None)
}

/// `A_w(z) = (z, w, w)(z, w, w)* / |w|`, written out as
/// `[[|z|²/|w|, z₁, z₁], [z̄₁, |w|, |w|], [z̄₁, |w|, |w|]]` with
/// `z₁ = z w̄ / |w|`.
pub fn witness_aw(w: C64, z: C64, domain: &Domain) -> Result<Witness, WitnessError> {
    let wa = w.norm();
    if wa == 0.0 {
        return Err(WitnessError::ZeroW);
    }
    let za = z.norm();
    if za > wa {
        return Err(WitnessError::ZBeyondW { z_abs: za, w_abs: wa });
    }
    let z1 = z * (w.conj() / wa);
    let top = C64::new(z.norm_sqr() / wa, 0.0);
    let wr = C64::new(wa, 0.0);
    let m = HermitianMatrix::from_upper(3, |i, j| match (i, j) {
        (0, 0) => top,
        (0, _) => z1,
        _ => wr,
    });
    finished(m, Provenance::Aw { w, z }, Some(domain))
}

/// `B_r(z) = [[r, z, z], [z̄, r, r], [z̄, r, r]]`.
pub fn witness_br(r: f64, z: C64, domain: &Domain) -> Result<Witness, WitnessError> {
    if !(r > 0.0) {
        return Err(WitnessError::InvalidParameter(format!("r must be positive, got {r}")));
    }
    if z.norm() > r {
        return Err(WitnessError::ZBeyondR { z_abs: z.norm(), r });
    }
    let rc = C64::new(r, 0.0);
    let m = HermitianMatrix::from_upper(3, |i, j| if i == 0 && j > 0 { z } else { rc });
    finished(m, Provenance::Br { r, z }, Some(domain))
}

/// Gram matrix of `(w/√t, |w|/√t, √t)`:
/// `[[|w|²/t, w|w|/t, w], [., |w|²/t, |w|], [., ., t]]`.
pub fn witness_mat1_input(w: C64, t: f64, domain: &Domain) -> Result<Witness, WitnessError> {
    let wa = w.norm();
    if wa == 0.0 {
        return Err(WitnessError::ZeroW);
    }
    if !(wa <= t) {
        return Err(WitnessError::WBeyondT { w_abs: wa, t });
    }
    let d = C64::new(wa * wa / t, 0.0);
    let m = HermitianMatrix::from_upper(3, |i, j| match (i, j) {
        (0, 0) | (1, 1) => d,
        (0, 1) => w * (wa / t),
        (0, 2) => w,
        (1, 2) => C64::new(wa, 0.0),
        _ => C64::new(t, 0.0),
    });
    finished(m, Provenance::Mat1 { w, t }, Some(domain))
}

/// `(g, f)_{{{1,2}}}` applied to [`witness_mat1_input`]:
/// `[[g(|w|²/t), g(w|w|/t), f(w)], [., g(|w|²/t), f(|w|)], [., ., f(t)]]`.
/// This is an operator image, so it is returned without a PSD check.
pub fn witness_mat1(
    w: C64,
    t: f64,
    g: &PreserverFunction,
    f: &PreserverFunction,
    domain: &Domain,
) -> Result<HermitianMatrix, WitnessError> {
    let input = witness_mat1_input(w, t, domain)?;
    let pattern = BlockPattern::normalize(3, [vec![0, 1]]).expect("valid pattern");
    Ok(OperatorSpec::new(g.clone(), f.clone(), pattern, *domain).apply(&input.matrix)?)
}

/// `x · 𝟏_n`.
pub fn witness_allones(x: f64, n: usize, domain: &Domain) -> Result<Witness, WitnessError> {
    if n == 0 {
        return Err(WitnessError::InvalidParameter("n must be positive".into()));
    }
    if !(x >= 0.0) {
        return Err(WitnessError::InvalidParameter(format!("x must be nonnegative, got {x}")));
    }
    finished(HermitianMatrix::ones(n).scale(x), Provenance::AllOnes { x, n }, Some(domain))
}

/// `x · Id_n`.
pub fn witness_scaled_identity(x: f64, n: usize, domain: &Domain) -> Result<Witness, WitnessError> {
    if n == 0 || !(x >= 0.0) {
        return Err(WitnessError::InvalidParameter(format!("need n >= 1 and x >= 0, got n = {n}, x = {x}")));
    }
    finished(HermitianMatrix::identity(n).scale(x), Provenance::ScaledIdentity { x, n }, Some(domain))
}

/// `𝟏_m ⊗ A`. Entries are those of `A`, so domain membership carries over.
pub fn tensor_blowup(m: usize, a: &Witness) -> Result<Witness, WitnessError> {
    if m == 0 {
        return Err(WitnessError::InvalidParameter("m must be positive".into()));
    }
    let out = HermitianMatrix::ones(m).kron(&a.matrix);
    Ok(Witness { provenance: Provenance::TensorBlowup { m, inner: Box::new(a.provenance.clone()) }, matrix: out })
}

/// Zero-pads `a` to `big_n` and moves index `i` to `sigma[i]`.
pub fn pad_embed(a: &Witness, big_n: usize, sigma: &[usize], domain: &Domain) -> Result<Witness, WitnessError> {
    if !domain.contains_zero() {
        return Err(WitnessError::DomainLacksZero(*domain));
    }
    let out = a.matrix.pad_zeros(big_n)?.permute_conjugate(sigma)?;
    Ok(Witness {
        provenance: Provenance::PadEmbed { big_n, sigma: sigma.to_vec(), inner: Box::new(a.provenance.clone()) },
        matrix: out,
    })
}

/// `[[A, εA𝟏], [ε(A𝟏)ᵀ, ε Σ a_ij]]`. The quadratic form equals
/// `(x + εy𝟏)* A (x + εy𝟏) + (ε - ε²) y² Σ a_ij`, so it is PSD for `ε ≤ 1`.
pub fn albert_embed(a: &Witness, eps: f64, domain: &Domain) -> Result<Witness, WitnessError> {
    if !(eps > 0.0) {
        return Err(WitnessError::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    let n = a.dim();
    let m = &a.matrix;
    if !m.is_real() || (0..n).any(|i| (0..n).any(|j| !(m.get(i, j).re > 0.0))) {
        return Err(WitnessError::NonPositiveEntries);
    }
    let row_sums: Vec<f64> = (0..n).map(|i| (0..n).map(|j| m.get(i, j).re).sum()).collect();
    let total: f64 = row_sums.iter().sum();
    let out = HermitianMatrix::from_upper(n + 1, |i, j| {
        if j < n {
            m.get(i, j)
        } else if i < n {
            C64::new(eps * row_sums[i], 0.0)
        } else {
            C64::new(eps * total, 0.0)
        }
    });
    let provenance = Provenance::AlbertEmbed { eps, inner: Box::new(a.provenance.clone()) };
    match finished(out, provenance, Some(domain)) {
        Err(WitnessError::OutOfDomain { .. } | WitnessError::NotPsd { .. }) => Err(WitnessError::EpsTooLarge { eps }),
        other => other,
    }
}

/// [`albert_embed`] with the largest `ε ∈ {2^-1, ..., 2^-30}` that passes.
pub fn albert_embed_auto(a: &Witness, domain: &Domain) -> Result<Witness, WitnessError> {
    let mut last = WitnessError::EpsTooLarge { eps: 0.5 };
    for h in 1..=ALBERT_MAX_HALVINGS {
        match albert_embed(a, 2f64.powi(-h), domain) {
            Ok(w) => return Ok(w),
            Err(e @ WitnessError::EpsTooLarge { .. }) => last = e,
            Err(e) => return Err(e),
        }
    }
    Err(last)
}

/// `P A Pᵀ` with `P e_i = e_{sigma[i]}`.
pub fn relabel(a: &Witness, sigma: &[usize]) -> Result<Witness, WitnessError> {
    Ok(Witness {
        provenance: Provenance::Relabel { sigma: sigma.to_vec(), inner: Box::new(a.provenance.clone()) },
        matrix: a.matrix.permute_conjugate(sigma)?,
    })
}

/// Wraps a caller-supplied matrix after checking it is PSD with entries in
/// the domain.
pub fn provided(matrix: HermitianMatrix, domain: &Domain) -> Result<Witness, WitnessError> {
    let n = matrix.dim();
    finished(matrix, Provenance::Provided { n }, Some(domain))
}
