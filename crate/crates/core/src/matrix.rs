//! Dense complex Hermitian matrices and the positive-semidefiniteness toolkit.
//!
//! Every matrix in this crate is small (the eigensolver is capped at
//! [`MAX_EIG_DIM`]) and stored densely in row-major order. A
//! [`HermitianMatrix`] always holds exactly conjugate-symmetric storage with a
//! real diagonal; raw input goes through [`HermitianMatrix::symmetrize`], which
//! rejects anything that is not Hermitian up to [`ASYMMETRY_TOL`].

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub type C64 = Complex64;

/// Default relative tolerance of [`HermitianMatrix::is_psd`].
pub const DEFAULT_PSD_TOL: f64 = 1e-9;
/// Relative tolerance on `|a_ij - conj(a_ji)|` accepted on ingestion.
pub const ASYMMETRY_TOL: f64 = 1e-8;
/// Largest dimension handed to the eigensolver.
pub const MAX_EIG_DIM: usize = 64;

const MAX_SWEEPS: usize = 80;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatrixError {
    #[error("matrix has no rows")]
    Empty,
    #[error("matrix is not square: row {row} has {len} entries, expected {n}")]
    NonSquare { row: usize, len: usize, n: usize },
    #[error("entry ({i}, {j}) is not finite")]
    NonFiniteEntry { i: usize, j: usize },
    #[error("input is not Hermitian: |a[{i}][{j}] - conj(a[{j}][{i}])| = {gap:e}")]
    AsymmetricInput { i: usize, j: usize, gap: f64 },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("dimension {n} exceeds the eigensolver cap of {MAX_EIG_DIM}")]
    TooLarge { n: usize },
    #[error("eigensolver did not converge within {sweeps} sweeps")]
    EigFailure { sweeps: usize },
    #[error("principal block is singular (smallest |eigenvalue| {min_abs:e})")]
    SingularBlock { min_abs: f64 },
    #[error("index {index} out of range for dimension {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("index {index} appears more than once")]
    DuplicateIndex { index: usize },
    #[error("Schur complement of the whole matrix is empty")]
    EmptyComplement,
    #[error("not a permutation of 0..{n}")]
    InvalidPermutation { n: usize },
    #[error("tolerance must be a non-negative number, got {tol}")]
    InvalidTolerance { tol: f64 },
}

/// Spectral summary returned by [`HermitianMatrix::is_psd`].
///
/// `is_psd` holds exactly when `min_eig >= -tol_used * max(1, |max_eig|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsdReport {
    pub min_eig: f64,
    pub max_eig: f64,
    pub is_psd: bool,
    pub tol_used: f64,
}

impl PsdReport {
    pub fn from_extremes(min_eig: f64, max_eig: f64, tol: f64) -> Self {
        let is_psd = min_eig >= -tol * max_eig.abs().max(1.0);
        Self { min_eig, max_eig, is_psd, tol_used: tol }
    }
}

/// Dense `n x n` complex Hermitian matrix.
#[derive(Clone, PartialEq)]
pub struct HermitianMatrix {
    n: usize,
    data: Vec<C64>,
}

impl fmt::Debug for HermitianMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "HermitianMatrix({}x{})", self.n, self.n)?;
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n)
                .map(|j| {
                    let z = self.get(i, j);
                    if z.im == 0.0 {
                        format!("{:.6}", z.re)
                    } else {
                        format!("{:.6}{:+.6}i", z.re, z.im)
                    }
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl HermitianMatrix {
    /// Returns `(raw + raw*) / 2`, rejecting input that is not square, not
    /// finite, or further from Hermitian than [`ASYMMETRY_TOL`] (relative to
    /// the largest entry modulus, floored at one).
    pub fn symmetrize(raw: &[Vec<C64>]) -> Result<Self, MatrixError> {
        let n = raw.len();
        if n == 0 {
            return Err(MatrixError::Empty);
        }
        for (row, r) in raw.iter().enumerate() {
            if r.len() != n {
                return Err(MatrixError::NonSquare { row, len: r.len(), n });
            }
        }
        let flat: Vec<C64> = raw.iter().flat_map(|r| r.iter().copied()).collect();
        Self::symmetrize_flat(n, &flat, ASYMMETRY_TOL)
    }

    /// Row-major variant of [`symmetrize`](Self::symmetrize) with an explicit
    /// asymmetry tolerance.
    pub fn symmetrize_flat(n: usize, raw: &[C64], asym_tol: f64) -> Result<Self, MatrixError> {
        if n == 0 {
            return Err(MatrixError::Empty);
        }
        if raw.len() != n * n {
            return Err(MatrixError::NonSquare { row: 0, len: raw.len() / n.max(1), n });
        }
        let mut scale: f64 = 1.0;
        for (idx, z) in raw.iter().enumerate() {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(MatrixError::NonFiniteEntry { i: idx / n, j: idx % n });
            }
            scale = scale.max(z.norm());
        }
        let bound = asym_tol * scale;
        for i in 0..n {
            for j in i..n {
                let gap = (raw[i * n + j] - raw[j * n + i].conj()).norm();
                if gap > bound {
                    return Err(MatrixError::AsymmetricInput { i, j, gap });
                }
            }
        }
        Ok(Self::project_flat(n, raw))
    }

    /// Hermitian projection without any tolerance check. Used on results of
    /// arithmetic that is Hermitian up to rounding.
    pub(crate) fn project_flat(n: usize, raw: &[C64]) -> Self {
        let mut data = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            data[i * n + i] = C64::new((raw[i * n + i].re + raw[i * n + i].re) / 2.0, 0.0);
            for j in (i + 1)..n {
                let v = (raw[i * n + j] + raw[j * n + i].conj()) / 2.0;
                data[i * n + j] = v;
                data[j * n + i] = v.conj();
            }
        }
        Self { n, data }
    }

    /// Builds a matrix from an entry function evaluated on the whole grid,
    /// then symmetrizes with the default asymmetry check.
    pub fn try_from_fn(n: usize, mut entry: impl FnMut(usize, usize) -> C64) -> Result<Self, MatrixError> {
        let mut raw = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                raw.push(entry(i, j));
            }
        }
        Self::symmetrize_flat(n, &raw, ASYMMETRY_TOL)
    }

    /// Builds a matrix from its upper triangle; the lower triangle is the
    /// conjugate mirror and the diagonal keeps only its real part.
    pub fn from_upper(n: usize, mut entry: impl FnMut(usize, usize) -> C64) -> Self {
        assert!(n > 0, "dimension must be positive");
        let mut data = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            data[i * n + i] = C64::new(entry(i, i).re, 0.0);
            for j in (i + 1)..n {
                let v = entry(i, j);
                data[i * n + j] = v;
                data[j * n + i] = v.conj();
            }
        }
        Self { n, data }
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self, MatrixError> {
        let raw: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::symmetrize(&raw)
    }

    pub fn zeros(n: usize) -> Self {
        assert!(n > 0, "dimension must be positive");
        Self { n, data: vec![C64::new(0.0, 0.0); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        Self::diag(&vec![1.0; n])
    }

    /// The all-ones matrix `1_n`.
    pub fn ones(n: usize) -> Self {
        assert!(n > 0, "dimension must be positive");
        Self { n, data: vec![C64::new(1.0, 0.0); n * n] }
    }

    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n);
        for (i, &v) in values.iter().enumerate() {
            m.data[i * n + i] = C64::new(v, 0.0);
        }
        m
    }

    /// Rank-one Gram matrix `v v*`.
    pub fn outer(v: &[C64]) -> Self {
        let n = v.len();
        Self::from_upper(n, |i, j| v[i] * v[j].conj())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.n + j]
    }

    /// Row-major entries.
    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<C64>> {
        self.data.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.data[i * self.n + i].re).collect()
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().iter().sum()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64, MatrixError> {
        self.check_same_dim(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// True when every entry is real.
    pub fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.im == 0.0)
    }

    fn check_same_dim(&self, other: &Self) -> Result<(), MatrixError> {
        if self.n != other.n {
            return Err(MatrixError::DimensionMismatch { left: self.n, right: other.n });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, MatrixError> {
        self.check_same_dim(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(Self { n: self.n, data })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, MatrixError> {
        self.check_same_dim(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(Self { n: self.n, data })
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { n: self.n, data: self.data.iter().map(|z| z * s).collect() }
    }

    /// Entrywise (Schur/Hadamard) product `A ∘ B`.
    pub fn schur_product(&self, other: &Self) -> Result<Self, MatrixError> {
        self.check_same_dim(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a * b).collect();
        Ok(Self { n: self.n, data })
    }

    /// Kronecker product `A ⊗ B`, of dimension `dim(A) * dim(B)`.
    pub fn kron(&self, other: &Self) -> Self {
        let (na, nb) = (self.n, other.n);
        let n = na * nb;
        let mut data = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..na {
            for j in 0..na {
                let a = self.get(i, j);
                for k in 0..nb {
                    for l in 0..nb {
                        data[(i * nb + k) * n + (j * nb + l)] = a * other.get(k, l);
                    }
                }
            }
        }
        Self { n, data }
    }

    fn check_indices(&self, indices: &[usize]) -> Result<(), MatrixError> {
        let mut seen = vec![false; self.n];
        for &index in indices {
            if index >= self.n {
                return Err(MatrixError::IndexOutOfRange { index, n: self.n });
            }
            if seen[index] {
                return Err(MatrixError::DuplicateIndex { index });
            }
            seen[index] = true;
        }
        Ok(())
    }

    /// Principal submatrix on the given (0-based, distinct) indices, in the
    /// order given.
    pub fn principal_submatrix(&self, indices: &[usize]) -> Result<Self, MatrixError> {
        if indices.is_empty() {
            return Err(MatrixError::Empty);
        }
        self.check_indices(indices)?;
        let k = indices.len();
        let mut data = Vec::with_capacity(k * k);
        for &i in indices {
            for &j in indices {
                data.push(self.get(i, j));
            }
        }
        Ok(Self { n: k, data })
    }

    /// `P M Pᵀ` where `P e_i = e_{sigma[i]}`, so that
    /// `out[sigma[i]][sigma[j]] = M[i][j]`.
    pub fn permute_conjugate(&self, sigma: &[usize]) -> Result<Self, MatrixError> {
        if sigma.len() != self.n {
            return Err(MatrixError::InvalidPermutation { n: self.n });
        }
        let mut seen = vec![false; self.n];
        for &s in sigma {
            if s >= self.n || seen[s] {
                return Err(MatrixError::InvalidPermutation { n: self.n });
            }
            seen[s] = true;
        }
        let n = self.n;
        let mut data = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                data[sigma[i] * n + sigma[j]] = self.get(i, j);
            }
        }
        Ok(Self { n, data })
    }

    /// Zero-pads to `big_n x big_n`, keeping `self` as the leading block.
    pub fn pad_zeros(&self, big_n: usize) -> Result<Self, MatrixError> {
        if big_n < self.n {
            return Err(MatrixError::DimensionMismatch { left: self.n, right: big_n });
        }
        let mut data = vec![C64::new(0.0, 0.0); big_n * big_n];
        for i in 0..self.n {
            for j in 0..self.n {
                data[i * big_n + j] = self.get(i, j);
            }
        }
        Ok(Self { n: big_n, data })
    }

    /// All eigenvalues in ascending order (cyclic complex Jacobi).
    pub fn eigenvalues(&self) -> Result<Vec<f64>, MatrixError> {
        if self.n > MAX_EIG_DIM {
            return Err(MatrixError::TooLarge { n: self.n });
        }
        let mut eig = jacobi_eigenvalues(self.n, &self.data)?;
        eig.sort_by(|a, b| a.total_cmp(b));
        Ok(eig)
    }

    /// Smallest and largest eigenvalue.
    pub fn eig_extremes(&self) -> Result<(f64, f64), MatrixError> {
        let eig = self.eigenvalues()?;
        Ok((eig[0], eig[eig.len() - 1]))
    }

    /// Relative PSD test: `min_eig >= -tol * max(1, |max_eig|)`.
    pub fn is_psd(&self, tol: f64) -> Result<PsdReport, MatrixError> {
        if !(tol >= 0.0) || !tol.is_finite() {
            return Err(MatrixError::InvalidTolerance { tol });
        }
        let (min_eig, max_eig) = self.eig_extremes()?;
        Ok(PsdReport::from_extremes(min_eig, max_eig, tol))
    }

    /// Determinant via LU with partial pivoting. Real for Hermitian input; the
    /// rounding residue in the imaginary part is dropped.
    pub fn determinant(&self) -> f64 {
        let mut a = self.data.clone();
        lu_in_place(self.n, &mut a).map_or(0.0, |lu| lu.det(&a).re)
    }

    /// `M[rest,rest] - M[rest,block] M[block,block]^{-1} M[block,rest]`, where
    /// `rest` lists the indices outside `block` in increasing order.
    pub fn schur_complement(&self, block: &[usize]) -> Result<Self, MatrixError> {
        self.check_indices(block)?;
        let n = self.n;
        let rest: Vec<usize> = (0..n).filter(|i| !block.contains(i)).collect();
        if rest.is_empty() {
            return Err(MatrixError::EmptyComplement);
        }
        if block.is_empty() {
            return self.principal_submatrix(&rest);
        }
        let bb = self.principal_submatrix(block)?;
        let block_eig = bb.eigenvalues()?;
        let min_abs = block_eig.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
        let (lo, hi) = self.eig_extremes()?;
        let spread = lo.abs().max(hi.abs());
        if !(min_abs > 1e-12 * spread) {
            return Err(MatrixError::SingularBlock { min_abs });
        }

        let kb = block.len();
        let kr = rest.len();
        let mut lu_data = bb.data.clone();
        let lu = lu_in_place(kb, &mut lu_data).ok_or(MatrixError::SingularBlock { min_abs })?;

        // X = M[block,block]^{-1} M[block,rest], column by column.
        let mut x = vec![C64::new(0.0, 0.0); kb * kr];
        let mut rhs = vec![C64::new(0.0, 0.0); kb];
        for (c, &r) in rest.iter().enumerate() {
            for (p, &b) in block.iter().enumerate() {
                rhs[p] = self.get(b, r);
            }
            let sol = lu.solve(&lu_data, &rhs);
            for p in 0..kb {
                x[p * kr + c] = sol[p];
            }
        }
        let mut out = vec![C64::new(0.0, 0.0); kr * kr];
        for (i, &ri) in rest.iter().enumerate() {
            for (j, &rj) in rest.iter().enumerate() {
                let mut acc = self.get(ri, rj);
                for (p, &b) in block.iter().enumerate() {
                    acc -= self.get(ri, b) * x[p * kr + j];
                }
                out[i * kr + j] = acc;
            }
        }
        Ok(Self::project_flat(kr, &out))
    }
}

struct Lu {
    perm: Vec<usize>,
    odd: bool,
    n: usize,
}

impl Lu {
    fn det(&self, lu: &[C64]) -> C64 {
        let mut d = if self.odd { C64::new(-1.0, 0.0) } else { C64::new(1.0, 0.0) };
        for i in 0..self.n {
            d *= lu[i * self.n + i];
        }
        d
    }

    fn solve(&self, lu: &[C64], b: &[C64]) -> Vec<C64> {
        let n = self.n;
        let mut y: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for k in 0..i {
                let l = lu[i * n + k];
                let yk = y[k];
                y[i] -= l * yk;
            }
        }
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                let u = lu[i * n + k];
                let yk = y[k];
                y[i] -= u * yk;
            }
            y[i] /= lu[i * n + i];
        }
        y
    }
}

/// Doolittle LU with partial pivoting; `None` when a zero pivot shows up.
fn lu_in_place(n: usize, a: &mut [C64]) -> Option<Lu> {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut odd = false;
    for col in 0..n {
        let (piv, best) = (col..n)
            .map(|r| (r, a[r * n + col].norm()))
            .max_by(|x, y| x.1.total_cmp(&y.1))?;
        if best == 0.0 {
            return None;
        }
        if piv != col {
            for k in 0..n {
                a.swap(col * n + k, piv * n + k);
            }
            perm.swap(col, piv);
            odd = !odd;
        }
        let p = a[col * n + col];
        for r in (col + 1)..n {
            let factor = a[r * n + col] / p;
            a[r * n + col] = factor;
            for k in (col + 1)..n {
                let v = a[col * n + k];
                a[r * n + k] -= factor * v;
            }
        }
    }
    Some(Lu { perm, odd, n })
}

/// Cyclic Jacobi for a Hermitian matrix. Each rotation first rotates the
/// phase of `a_pq` away, then applies the real Jacobi rotation that
/// annihilates it.
fn jacobi_eigenvalues(n: usize, data: &[C64]) -> Result<Vec<f64>, MatrixError> {
    let mut a = data.to_vec();
    let scale = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if scale == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let off_norm = |a: &[C64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[i * n + j].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        if off_norm(&a) <= 1e-15 * scale {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                let phase_conj = (apq / r).conj();
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                let tau = (aqq - app) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + tau.hypot(1.0))
                } else {
                    -1.0 / (-tau + tau.hypot(1.0))
                };
                let c = 1.0 / t.hypot(1.0);
                let s = t * c;
                let j_pp = C64::new(c, 0.0);
                let j_pq = C64::new(s, 0.0);
                let j_qp = phase_conj * (-s);
                let j_qq = phase_conj * c;

                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = akp * j_pp + akq * j_qp;
                    a[k * n + q] = akp * j_pq + akq * j_qq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = j_pp.conj() * apk + j_qp.conj() * aqk;
                    a[q * n + k] = j_pq.conj() * apk + j_qq.conj() * aqk;
                }
                a[p * n + q] = C64::new(0.0, 0.0);
                a[q * n + p] = C64::new(0.0, 0.0);
                a[p * n + p].im = 0.0;
                a[q * n + q].im = 0.0;
            }
        }
    }
    if !converged && off_norm(&a) > 1e-10 * scale {
        return Err(MatrixError::EigFailure { sweeps: MAX_SWEEPS });
    }
    Ok((0..n).map(|i| a[i * n + i].re).collect())
}

// JSON: {"n": int, "entries": [[[re, im], ...], ...]}; bare numbers accepted
// on input for real entries.

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum EntryRepr {
    Real(f64),
    Complex([f64; 2]),
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    n: usize,
    entries: Vec<Vec<EntryRepr>>,
}

impl Serialize for HermitianMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let entries = self
            .data
            .chunks(self.n)
            .map(|row| row.iter().map(|z| EntryRepr::Complex([z.re, z.im])).collect())
            .collect();
        MatrixRepr { n: self.n, entries }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for HermitianMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = MatrixRepr::deserialize(deserializer)?;
        if repr.entries.len() != repr.n {
            return Err(D::Error::custom(format!(
                "declared n = {} but {} rows given",
                repr.n,
                repr.entries.len()
            )));
        }
        let raw: Vec<Vec<C64>> = repr
            .entries
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|e| match e {
                        EntryRepr::Real(x) => C64::new(x, 0.0),
                        EntryRepr::Complex([re, im]) => C64::new(re, im),
                    })
                    .collect()
            })
            .collect();
        HermitianMatrix::symmetrize(&raw).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn symmetrize_keeps_hermitian_input() {
        let id = HermitianMatrix::symmetrize(&[vec![c(1., 0.), c(0., 0.)], vec![c(0., 0.), c(1., 0.)]]).unwrap();
        assert_eq!(id, HermitianMatrix::identity(2));

        let m = HermitianMatrix::symmetrize(&[vec![c(0., 0.), c(0., 1.)], vec![c(0., -1.), c(0., 0.)]]).unwrap();
        assert_eq!(m.get(0, 1), c(0., 1.));
        assert_eq!(m.get(1, 0), c(0., -1.));
    }

    #[test]
    fn symmetrize_rejects_bad_input() {
        let err = HermitianMatrix::from_real_rows(&[vec![1., 2.], vec![0., 1.]]).unwrap_err();
        assert!(matches!(err, MatrixError::AsymmetricInput { i: 0, j: 1, .. }));

        let err = HermitianMatrix::from_real_rows(&[vec![1., 2.], vec![2.]]).unwrap_err();
        assert!(matches!(err, MatrixError::NonSquare { .. }));

        let err = HermitianMatrix::from_real_rows(&[vec![f64::NAN]]).unwrap_err();
        assert!(matches!(err, MatrixError::NonFiniteEntry { i: 0, j: 0 }));

        // imaginary diagonal is not Hermitian
        let err = HermitianMatrix::symmetrize(&[vec![c(1., 0.5)]]).unwrap_err();
        assert!(matches!(err, MatrixError::AsymmetricInput { .. }));
    }

    #[test]
    fn symmetrize_tolerates_roundtrip_noise() {
        let m = HermitianMatrix::from_real_rows(&[vec![1., 0.5 + 1e-12], vec![0.5, 1.]]).unwrap();
        assert!((m.get(0, 1).re - 0.5).abs() < 1e-11);
        assert_eq!(m.get(0, 1), m.get(1, 0).conj());
    }

    #[test]
    fn eig_extremes_of_known_spectra() {
        let (lo, hi) = HermitianMatrix::ones(3).scale(2.0).eig_extremes().unwrap();
        assert!(lo.abs() < 1e-14 && (hi - 6.0).abs() < 1e-13);

        let m = HermitianMatrix::symmetrize(&[vec![c(1., 0.), c(0., 1.)], vec![c(0., -1.), c(1., 0.)]]).unwrap();
        let (lo, hi) = m.eig_extremes().unwrap();
        assert!(lo.abs() < 1e-14 && (hi - 2.0).abs() < 1e-14);

        // c x 1_n + (1-c) x Id_n has spectrum {(1-c)x, (1+(n-1)c)x}
        let (cc, x, n) = (0.3, 0.7, 5);
        let m = HermitianMatrix::ones(n)
            .scale(cc * x)
            .add(&HermitianMatrix::identity(n).scale((1.0 - cc) * x))
            .unwrap();
        let (lo, hi) = m.eig_extremes().unwrap();
        assert!((lo - (1.0 - cc) * x).abs() < 1e-13);
        assert!((hi - (1.0 + (n as f64 - 1.0) * cc) * x).abs() < 1e-13);
    }

    #[test]
    fn psd_reports() {
        let z = HermitianMatrix::zeros(3).is_psd(DEFAULT_PSD_TOL).unwrap();
        assert!(z.is_psd && z.min_eig == 0.0);

        let r = HermitianMatrix::from_real_rows(&[vec![1., 2.], vec![2., 1.]])
            .unwrap()
            .is_psd(DEFAULT_PSD_TOL)
            .unwrap();
        assert!(!r.is_psd);
        assert!((r.min_eig + 1.0).abs() < 1e-14 && (r.max_eig - 3.0).abs() < 1e-14);

        let v = [c(0.3, 0.1), c(-1.2, 0.4), c(0.0, 2.0)];
        assert!(HermitianMatrix::outer(&v).is_psd(DEFAULT_PSD_TOL).unwrap().is_psd);

        assert!(matches!(
            HermitianMatrix::identity(2).is_psd(-1.0),
            Err(MatrixError::InvalidTolerance { .. })
        ));
    }

    #[test]
    fn eigensolver_dimension_cap() {
        let big = HermitianMatrix::identity(MAX_EIG_DIM + 1);
        assert!(matches!(big.eigenvalues(), Err(MatrixError::TooLarge { .. })));
        assert!(HermitianMatrix::identity(MAX_EIG_DIM).eigenvalues().is_ok());
    }

    #[test]
    fn schur_product_identities() {
        let a = HermitianMatrix::outer(&[c(1., 0.), c(0.2, -0.7), c(-0.4, 0.1)]);
        assert_eq!(a.schur_product(&HermitianMatrix::ones(3)).unwrap(), a);
        let d = a.schur_product(&HermitianMatrix::identity(3)).unwrap();
        assert_eq!(d, HermitianMatrix::diag(&a.diagonal()));
        assert!(matches!(
            a.schur_product(&HermitianMatrix::ones(2)),
            Err(MatrixError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn kron_identities() {
        assert_eq!(HermitianMatrix::identity(2).kron(&HermitianMatrix::identity(3)), HermitianMatrix::identity(6));
        // spectrum of 1_2 ⊗ A is {0,...,0} ∪ 2·σ(A)
        let a = HermitianMatrix::diag(&[1.0, 3.0]);
        let eig = HermitianMatrix::ones(2).kron(&a).eigenvalues().unwrap();
        let want = [0.0, 0.0, 2.0, 6.0];
        for (g, w) in eig.iter().zip(want) {
            assert!((g - w).abs() < 1e-13, "{eig:?}");
        }
    }

    #[test]
    fn schur_complement_cases() {
        let s = HermitianMatrix::identity(3).schur_complement(&[2]).unwrap();
        assert_eq!(s, HermitianMatrix::identity(2));

        // [[2,1],[1,2]] with block {1}: 2 - 1/2
        let m = HermitianMatrix::from_real_rows(&[vec![2., 1.], vec![1., 2.]]).unwrap();
        let s = m.schur_complement(&[1]).unwrap();
        assert!((s.get(0, 0).re - 1.5).abs() < 1e-15);

        let sing = HermitianMatrix::diag(&[1.0, 0.0]);
        assert!(matches!(sing.schur_complement(&[1]), Err(MatrixError::SingularBlock { .. })));
        assert!(matches!(m.schur_complement(&[0, 1]), Err(MatrixError::EmptyComplement)));
        assert!(matches!(m.schur_complement(&[0, 0]), Err(MatrixError::DuplicateIndex { index: 0 })));
    }

    #[test]
    fn permute_conjugate_cases() {
        let d = HermitianMatrix::diag(&[1., 2., 3.]);
        assert_eq!(d.permute_conjugate(&[0, 1, 2]).unwrap(), d);
        assert_eq!(d.permute_conjugate(&[2, 1, 0]).unwrap(), HermitianMatrix::diag(&[3., 2., 1.]));
        assert!(matches!(d.permute_conjugate(&[0, 0, 1]), Err(MatrixError::InvalidPermutation { n: 3 })));
        assert!(matches!(d.permute_conjugate(&[0, 1]), Err(MatrixError::InvalidPermutation { n: 3 })));
    }

    #[test]
    fn determinant_small() {
        let m = HermitianMatrix::from_real_rows(&[vec![1., 2.], vec![2., 2.]]).unwrap();
        assert!((m.determinant() + 2.0).abs() < 1e-15);
        assert_eq!(HermitianMatrix::ones(3).determinant(), 0.0);
        let m = HermitianMatrix::diag(&[2., 3., 4.]);
        assert!((m.determinant() - 24.0).abs() < 1e-13);
    }

    #[test]
    fn json_accepts_bare_reals_and_roundtrips() {
        let m: HermitianMatrix =
            serde_json::from_str(r#"{"n":2,"entries":[[1,[0.5,0.25]],[[0.5,-0.25],2]]}"#).unwrap();
        assert_eq!(m.get(0, 1), c(0.5, 0.25));
        let s = serde_json::to_string(&m).unwrap();
        let back: HermitianMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);

        assert!(serde_json::from_str::<HermitianMatrix>(r#"{"n":3,"entries":[[1]]}"#).is_err());
        assert!(serde_json::from_str::<HermitianMatrix>(r#"{"n":2,"entries":[[1,2],[0,1]]}"#).is_err());
    }
}
