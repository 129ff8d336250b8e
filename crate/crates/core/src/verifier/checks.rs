//! Numerical checks of two facts behind the partition interval: the
//! correlation bound `n·Id - C ⪰ 0`, and the step `k -> k + 1` of the
//! induction on the number of blocks.

use serde::Serialize;

use super::VerifyError;
use crate::function::{PreserverFunction, Rational};
use crate::matrix::HermitianMatrix;
use crate::operator::OperatorSpec;
use crate::pattern::BlockPattern;
use crate::function::{Domain, DomainKind};

/// Entrywise tolerance of the induction algebra identity.
pub const ALGEBRA_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationReport {
    pub samples: usize,
    /// Smallest `λ_min(n·Id - C)` over the samples.
    pub worst_min_eig: f64,
    /// Largest `λ_max(C) - n`.
    pub worst_trace_excess: f64,
    /// Smallest `(n - 1) - Σ_{j≠i} |c_ij|` over all rows of all samples.
    pub worst_row_margin: f64,
    pub eig_route: bool,
    pub trace_route: bool,
    pub gershgorin_route: bool,
    pub passed: bool,
}

/// Checks `λ_min(n·Id - C) >= -tol` for correlation matrices `C`, together
/// with the two arguments for it: `λ_max(C) <= tr C = n`, and row diagonal
/// dominance of `n·Id - C` (Gershgorin).
pub fn correlation_bound_check(n: usize, samples: &[HermitianMatrix], tol: f64) -> Result<CorrelationReport, VerifyError> {
    let nf = n as f64;
    let mut worst_min_eig = f64::INFINITY;
    let mut worst_trace_excess = f64::NEG_INFINITY;
    let mut worst_row_margin = f64::INFINITY;
    for c in samples {
        if c.dim() != n {
            return Err(VerifyError::Config(format!("sample of dimension {} in a check for n = {n}", c.dim())));
        }
        let shifted = HermitianMatrix::identity(n).scale(nf).sub(c)?;
        worst_min_eig = worst_min_eig.min(shifted.eig_extremes()?.0);
        worst_trace_excess = worst_trace_excess.max(c.eig_extremes()?.1 - c.trace());
        for i in 0..n {
            let off: f64 = (0..n).filter(|&j| j != i).map(|j| shifted.get(i, j).norm()).sum();
            worst_row_margin = worst_row_margin.min(shifted.get(i, i).re - off);
        }
    }
    let eig_route = worst_min_eig >= -tol;
    let trace_route = worst_trace_excess <= tol;
    let gershgorin_route = worst_row_margin >= -tol;
    Ok(CorrelationReport {
        samples: samples.len(),
        worst_min_eig,
        worst_trace_excess,
        worst_row_margin,
        eig_route,
        trace_route,
        gershgorin_route,
        passed: eig_route && trace_route && gershgorin_route,
    })
}

/// `c / (1 + c)`.
pub fn induction_scalar(c: Rational) -> Rational {
    c / (Rational::from_integer(1) + c)
}

/// `c ∈ [-1/k, 0)`.
pub fn in_half_open_interval(c: Rational, k: usize) -> bool {
    c >= Rational::new(-1, k as i64) && c < Rational::from_integer(0)
}

/// `c ∈ [-1/k, 0)  ⇔  c/(1+c) ∈ [-1/(k-1), 0)`, in exact arithmetic.
/// `c = -1` is outside both sides by convention.
pub fn interval_equivalence_holds(c: Rational, k: usize) -> bool {
    assert!(k >= 2, "needs k >= 2");
    if c == Rational::from_integer(-1) {
        return !in_half_open_interval(c, k);
    }
    in_half_open_interval(c, k) == in_half_open_interval(induction_scalar(c), k - 1)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InductionReport {
    pub k: usize,
    pub c: String,
    pub c_prime: String,
    pub algebra_residual: f64,
    pub algebra_ok: bool,
    pub interval_equivalence: bool,
    /// `A' - B A_{k+1}^{-1} B*` is PSD.
    pub schur_complement_psd: bool,
    /// `[[c² A', cB], [cB*, A_{k+1}]]` is PSD.
    pub scaled_block_psd: bool,
    /// `h_{T_m}[A']` with `h = c'·id` is PSD.
    pub hypothesis_psd: bool,
    /// `f_{T_n}[A]` with `f = c·id` is PSD.
    pub conclusion_psd: bool,
    pub passed: bool,
}

fn ratio_f64(r: Rational) -> f64 {
    crate::function::ratio_to_f64(r)
}

/// Replays the step from `k` to `k + 1` blocks on a positive definite `A`
/// split into `k + 1` contiguous blocks of the given sizes:
/// `(f_{T_m}[A'] - c² A') / (1 - c²) = h_{T_m}[A']` with `h = c'·id`,
/// `c' = c/(1+c)`, plus the Schur complement steps and both PSD conclusions.
pub fn induction_step_check(
    c: Rational,
    block_sizes: &[usize],
    a: &HermitianMatrix,
    tol: f64,
) -> Result<InductionReport, VerifyError> {
    let k = block_sizes.len().checked_sub(1).filter(|&k| k >= 2).ok_or_else(|| {
        VerifyError::Config(format!("need at least 3 blocks, got {}", block_sizes.len()))
    })?;
    if block_sizes.contains(&0) || block_sizes.iter().sum::<usize>() != a.dim() {
        return Err(VerifyError::Config(format!("block sizes {block_sizes:?} do not partition {}", a.dim())));
    }
    if c == Rational::from_integer(-1) {
        return Err(VerifyError::Config("c = -1 has no image under c/(1+c)".into()));
    }
    let n = a.dim();
    let m: usize = block_sizes[..k].iter().sum();
    let head: Vec<usize> = (0..m).collect();
    let tail: Vec<usize> = (m..n).collect();
    let a_prime = a.principal_submatrix(&head)?;
    let t_m = BlockPattern::contiguous(&block_sizes[..k]);
    let t_n = BlockPattern::contiguous(block_sizes);
    let anywhere = Domain::new(DomainKind::Disc, f64::INFINITY)?;

    let cf = ratio_f64(c);
    let c_prime = induction_scalar(c);
    let cpf = ratio_f64(c_prime);
    let map = |scalar: f64, p: &BlockPattern, x: &HermitianMatrix| {
        OperatorSpec::pattern_map(PreserverFunction::linear(scalar), p.clone(), anywhere).apply_unchecked(x)
    };

    let f_tm = map(cf, &t_m, &a_prime)?;
    let lhs = f_tm.sub(&a_prime.scale(cf * cf))?.scale(1.0 / (1.0 - cf * cf));
    let rhs = map(cpf, &t_m, &a_prime)?;
    let algebra_residual = lhs.max_abs_diff(&rhs)?;
    let algebra_ok = algebra_residual <= ALGEBRA_TOL * a_prime.max_abs_entry().max(1.0);

    let schur = a.schur_complement(&tail)?;
    let schur_complement_psd = schur.is_psd(tol)?.is_psd;
    let scaled = HermitianMatrix::from_upper(n, |i, j| {
        let v = a.get(i, j);
        match (i < m, j < m) {
            (true, true) => v * (cf * cf),
            (false, false) => v,
            _ => v * cf,
        }
    });
    let scaled_block_psd = scaled.is_psd(tol)?.is_psd;
    let hypothesis_psd = rhs.is_psd(tol)?.is_psd;
    let conclusion_psd = map(cf, &t_n, a)?.is_psd(tol)?.is_psd;
    let interval_equivalence = interval_equivalence_holds(c, k);

    Ok(InductionReport {
        k,
        c: c.to_string(),
        c_prime: c_prime.to_string(),
        algebra_residual,
        algebra_ok,
        interval_equivalence,
        schur_complement_psd,
        scaled_block_psd,
        hypothesis_psd,
        conclusion_psd,
        passed: algebra_ok
            && interval_equivalence
            && schur_complement_psd
            && scaled_block_psd
            && hypothesis_psd
            && conclusion_psd,
    })
}
