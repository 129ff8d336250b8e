//! The entrywise maps `f[A]`, `f_*[A]`, `f_{T_n}[A]` and `(g,f)_{T_n}[A]`.

use thiserror::Error;

use crate::function::{Domain, PreserverFunction};
use crate::matrix::{HermitianMatrix, MatrixError, ASYMMETRY_TOL, C64};
use crate::pattern::{BlockPattern, PatternError};

/// Entrywise tolerance of the mask factorization cross-check.
pub const FACTORIZATION_TOL: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OperatorError {
    #[error("entry ({}, {}) = {z} is outside the domain {domain}", .i + 1, .j + 1)]
    OutOfDomain { i: usize, j: usize, z: C64, domain: Domain },
    #[error("pattern has dimension {pattern} but the matrix is {matrix}x{matrix}")]
    DimensionMismatch { pattern: usize, matrix: usize },
    #[error("output is not Hermitian at ({}, {}) (gap {gap:e}); the functions are not conjugate-equivariant", .i + 1, .j + 1)]
    NonHermitianOutput { i: usize, j: usize, gap: f64 },
    #[error("output entry ({}, {}) is not finite", .i + 1, .j + 1)]
    NonFiniteOutput { i: usize, j: usize },
    #[error("mask factorization needs linear g and f")]
    NonLinearFunction,
    #[error("mask factorization disagrees with the direct map by {gap:e}")]
    FactorizationMismatch { gap: f64 },
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Pattern(#[from] PatternError),
}

/// `(g, f)_{T_n}[-]`: `g` on entries inside a common block of the pattern,
/// `f` everywhere else.
#[derive(Debug, Clone)]
pub struct OperatorSpec {
    pub g: PreserverFunction,
    pub f: PreserverFunction,
    pub pattern: BlockPattern,
    pub domain: Domain,
}

impl OperatorSpec {
    pub fn new(g: PreserverFunction, f: PreserverFunction, pattern: BlockPattern, domain: Domain) -> Self {
        Self { g, f, pattern, domain }
    }

    /// `f_{T_n}[-]`, i.e. `g = id`.
    pub fn pattern_map(f: PreserverFunction, pattern: BlockPattern, domain: Domain) -> Self {
        Self::new(PreserverFunction::Identity, f, pattern, domain)
    }

    /// `f_*[-]` in dimension `n`.
    pub fn star(f: PreserverFunction, n: usize, domain: Domain) -> Self {
        Self::pattern_map(f, BlockPattern::singletons(n), domain)
    }

    /// `f[-]` in dimension `n` (empty pattern).
    pub fn entrywise(f: PreserverFunction, n: usize, domain: Domain) -> Self {
        Self::pattern_map(f, BlockPattern::empty(n), domain)
    }

    /// Same operator with the pattern relabeled by `i -> sigma[i]`.
    pub fn permuted(&self, sigma: &[usize]) -> Result<Self, OperatorError> {
        Ok(Self { pattern: self.pattern.permuted(sigma)?, ..self.clone() })
    }

    fn check_input(&self, a: &HermitianMatrix) -> Result<(), OperatorError> {
        let n = a.dim();
        if self.pattern.dim() != n {
            return Err(OperatorError::DimensionMismatch { pattern: self.pattern.dim(), matrix: n });
        }
        for i in 0..n {
            for j in 0..n {
                let z = a.get(i, j);
                if !self.domain.contains(z) {
                    return Err(OperatorError::OutOfDomain { i, j, z, domain: self.domain });
                }
            }
        }
        Ok(())
    }

    /// `(g,f)_{T_n}[A]`. The whole grid is evaluated and then symmetrized, so
    /// a function that breaks `f(conj z) = conj f(z)` surfaces as
    /// [`OperatorError::NonHermitianOutput`].
    pub fn apply(&self, a: &HermitianMatrix) -> Result<HermitianMatrix, OperatorError> {
        self.check_input(a)?;
        self.apply_unchecked(a)
    }

    /// [`apply`](Self::apply) without the domain check.
    pub fn apply_unchecked(&self, a: &HermitianMatrix) -> Result<HermitianMatrix, OperatorError> {
        let mask = self.pattern.mask();
        let raw = grid(a.dim(), |i, j| {
            let z = a.get(i, j);
            if mask.get(i, j) {
                self.g.eval(z)
            } else {
                self.f.eval(z)
            }
        });
        hermitian_output(a.dim(), &raw)
    }

    /// `(f[A], (g - f, 0)_{T_n}[A])`, whose sum is `(g,f)_{T_n}[A]`.
    pub fn decompose(&self, a: &HermitianMatrix) -> Result<(HermitianMatrix, HermitianMatrix), OperatorError> {
        self.check_input(a)?;
        let n = a.dim();
        let mask = self.pattern.mask();
        let everywhere = grid(n, |i, j| self.f.eval(a.get(i, j)));
        let masked = grid(n, |i, j| {
            if mask.get(i, j) {
                let z = a.get(i, j);
                self.g.eval(z) - self.f.eval(z)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        Ok((hermitian_output(n, &everywhere)?, hermitian_output(n, &masked)?))
    }

    /// For linear `g = a·z` and `f = c·z`, returns `A ∘ (g,f)_{T_n}[𝟏]` after
    /// checking it against the direct map entrywise.
    pub fn mask_factorization(&self, a: &HermitianMatrix) -> Result<HermitianMatrix, OperatorError> {
        if self.g.linear_coefficient().is_none() || self.f.linear_coefficient().is_none() {
            return Err(OperatorError::NonLinearFunction);
        }
        let direct = self.apply(a)?;
        let ones_image = self.apply_unchecked(&HermitianMatrix::ones(a.dim()))?;
        let factored = a.schur_product(&ones_image)?;
        let gap = factored.max_abs_diff(&direct)?;
        if gap > FACTORIZATION_TOL * direct.max_abs_entry().max(1.0) {
            return Err(OperatorError::FactorizationMismatch { gap });
        }
        Ok(factored)
    }
}

/// `f_*[A]`.
pub fn apply_star(f: &PreserverFunction, a: &HermitianMatrix, domain: &Domain) -> Result<HermitianMatrix, OperatorError> {
    OperatorSpec::star(f.clone(), a.dim(), *domain).apply(a)
}

/// `f[A]`.
pub fn apply_entrywise(f: &PreserverFunction, a: &HermitianMatrix, domain: &Domain) -> Result<HermitianMatrix, OperatorError> {
    OperatorSpec::entrywise(f.clone(), a.dim(), *domain).apply(a)
}

fn grid(n: usize, mut entry: impl FnMut(usize, usize) -> C64) -> Vec<C64> {
    let mut raw = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            raw.push(entry(i, j));
        }
    }
    raw
}

fn hermitian_output(n: usize, raw: &[C64]) -> Result<HermitianMatrix, OperatorError> {
    HermitianMatrix::symmetrize_flat(n, raw, ASYMMETRY_TOL).map_err(|e| match e {
        MatrixError::AsymmetricInput { i, j, gap } => OperatorError::NonHermitianOutput { i, j, gap },
        MatrixError::NonFiniteEntry { i, j } => OperatorError::NonFiniteOutput { i, j },
        other => other.into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::DomainKind;

    fn real(rows: &[&[f64]]) -> HermitianMatrix {
        HermitianMatrix::from_real_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn sample() -> HermitianMatrix {
        HermitianMatrix::outer(&[C64::new(0.5, 0.1), C64::new(0.2, -0.4), C64::new(-0.3, 0.3)])
    }

    #[test]
    fn identity_pair_is_identity() {
        let a = sample();
        let p = BlockPattern::from_one_based(3, [vec![1, 2], vec![2, 3]]).unwrap();
        let op = OperatorSpec::new(PreserverFunction::Identity, PreserverFunction::Identity, p, Domain::unit_disc());
        assert_eq!(op.apply(&a).unwrap(), a);
    }

    #[test]
    fn zero_off_empty_pattern() {
        let a = sample();
        let op = OperatorSpec::entrywise(PreserverFunction::Zero, 3, Domain::unit_disc());
        assert_eq!(op.apply(&a).unwrap(), HermitianMatrix::zeros(3));
    }

    #[test]
    fn dominance_counterexample_in_two_dims() {
        let d = Domain::new(DomainKind::HalfOpenNonneg, f64::INFINITY).unwrap();
        let p = BlockPattern::from_one_based(2, [vec![1]]).unwrap();
        let op = OperatorSpec::pattern_map(PreserverFunction::linear(2.0), p, d);
        let out = op.apply(&HermitianMatrix::ones(2)).unwrap();
        assert_eq!(out, real(&[&[1.0, 2.0], &[2.0, 2.0]]));
        assert!((out.determinant() + 2.0).abs() < 1e-14);
        assert!(out.eig_extremes().unwrap().0 < 0.0);
    }

    #[test]
    fn star_examples() {
        let d = Domain::new(DomainKind::HalfOpenNonneg, 1.0).unwrap();
        let a = real(&[&[0.5, 0.2], &[0.2, 0.3]]);
        assert_eq!(apply_star(&PreserverFunction::Zero, &a, &d).unwrap(), HermitianMatrix::diag(&[0.5, 0.3]));
        assert_eq!(apply_star(&PreserverFunction::Identity, &a, &d).unwrap(), a);

        let (x, c, n) = (0.5, -0.25, 4);
        let out = apply_star(&PreserverFunction::linear(c), &HermitianMatrix::ones(n).scale(x), &d).unwrap();
        let want = HermitianMatrix::ones(n).scale(c * x).add(&HermitianMatrix::identity(n).scale((1.0 - c) * x)).unwrap();
        assert!(out.max_abs_diff(&want).unwrap() < 1e-15);
    }

    #[test]
    fn decompose_parts() {
        let a = sample();
        let d = Domain::unit_disc();
        let op = OperatorSpec::star(PreserverFunction::Zero, 3, d);
        let (p1, p2) = op.decompose(&a).unwrap();
        assert_eq!(p1, HermitianMatrix::zeros(3));
        assert_eq!(p2, HermitianMatrix::diag(&a.diagonal()));

        let f = PreserverFunction::herz_monomial(0.7, 2, 1).unwrap();
        let op = OperatorSpec::new(f.clone(), f, BlockPattern::singletons(3), d);
        assert_eq!(op.decompose(&a).unwrap().1, HermitianMatrix::zeros(3));
    }

    #[test]
    fn domain_and_dimension_errors() {
        let d = Domain::unit_disc();
        let op = OperatorSpec::star(PreserverFunction::Identity, 2, d);
        assert!(matches!(op.apply(&HermitianMatrix::ones(2)), Err(OperatorError::OutOfDomain { i: 0, j: 0, .. })));
        assert!(matches!(op.apply(&sample()), Err(OperatorError::DimensionMismatch { pattern: 2, matrix: 3 })));
    }

    #[test]
    fn non_equivariant_function_is_reported() {
        let op = OperatorSpec::entrywise(PreserverFunction::custom("const_i", true, |_| C64::new(0.0, 1.0)), 3, Domain::unit_disc());
        assert!(matches!(op.apply(&sample()), Err(OperatorError::NonHermitianOutput { .. })));
    }

    #[test]
    fn mask_factorization_cases() {
        let a = sample();
        let d = Domain::unit_disc();
        let op = OperatorSpec::pattern_map(PreserverFunction::Identity, BlockPattern::singletons(3), d);
        assert_eq!(op.mask_factorization(&a).unwrap(), a);

        let op = OperatorSpec::new(PreserverFunction::Zero, PreserverFunction::Zero, BlockPattern::empty(3), d);
        assert_eq!(op.mask_factorization(&a).unwrap(), HermitianMatrix::zeros(3));

        let op = OperatorSpec::pattern_map(PreserverFunction::linear(-0.5), BlockPattern::contiguous(&[2, 1]), d);
        op.mask_factorization(&a).unwrap();

        let sq = PreserverFunction::herz_monomial(1.0, 2, 0).unwrap();
        let op = OperatorSpec::pattern_map(sq, BlockPattern::empty(3), d);
        assert_eq!(op.mask_factorization(&a), Err(OperatorError::NonLinearFunction));
    }
}
