//! Seeded random matrices.
//!
//! Every random stream is a `ChaCha8Rng` seeded with the master seed and then
//! switched to a stream number, so each `(dimension, family)` pair draws from
//! its own reproducible sequence regardless of what else ran before it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::function::{Domain, DomainKind};
use crate::matrix::{HermitianMatrix, C64};

/// Stream id of the random battery for dimension `n` and family `family`.
pub fn battery_stream(n: usize, family: u64) -> u64 {
    n as u64 * 16 + family
}

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Random vector whose entries fit the domain's sign structure: complex for
/// discs, signed reals for `(-ρ, ρ)`, positive reals otherwise.
pub fn random_vector<R: Rng>(rng: &mut R, n: usize, kind: DomainKind) -> Vec<C64> {
    (0..n)
        .map(|_| match kind {
            DomainKind::Disc => C64::new(gaussian(rng), gaussian(rng)),
            DomainKind::OpenSym => C64::new(gaussian(rng), 0.0),
            DomainKind::HalfOpenNonneg | DomainKind::OpenPos => C64::new(gaussian(rng).abs(), 0.0),
        })
        .collect()
}

/// `B B*` for an `n x rank` random `B` (rows from [`random_vector`]).
pub fn random_gram<R: Rng>(rng: &mut R, n: usize, rank: usize, kind: DomainKind) -> HermitianMatrix {
    let cols: Vec<Vec<C64>> = (0..rank).map(|_| random_vector(rng, n, kind)).collect();
    HermitianMatrix::from_upper(n, |i, j| cols.iter().map(|v| v[i] * v[j].conj()).sum())
}

/// Rescales a nonzero PSD matrix so that its largest entry is `0.95 ρ`, or a
/// uniform draw from `(0, 4]` when `ρ = ∞`.
pub fn scale_into_domain<R: Rng>(rng: &mut R, m: &HermitianMatrix, domain: &Domain) -> Option<HermitianMatrix> {
    let top = m.max_abs_entry();
    if !(top > 0.0) {
        return None;
    }
    let target = if domain.is_bounded() { 0.95 * domain.rho() } else { 4.0 - rng.random_range(0.0..4.0) };
    let out = m.scale(target / top);
    let n = out.dim();
    let inside = (0..n).all(|i| (0..n).all(|j| domain.contains(out.get(i, j))));
    inside.then_some(out)
}

/// Random PSD matrix with entries in the domain. `rank = None` draws the rank
/// uniformly from `1..=n`. Retries a few times when rounding pushes an entry
/// out (e.g. a zero entry for `(0, ρ)`).
pub fn random_psd<R: Rng>(rng: &mut R, n: usize, rank: Option<usize>, domain: &Domain) -> HermitianMatrix {
    loop {
        let r = rank.unwrap_or_else(|| rng.random_range(1..=n));
        let g = random_gram(rng, n, r, domain.kind());
        if let Some(m) = scale_into_domain(rng, &g, domain) {
            return m;
        }
    }
}

/// Random correlation matrix: Gram of `n` random unit vectors in `ℂ^r`.
pub fn random_correlation<R: Rng>(rng: &mut R, n: usize) -> HermitianMatrix {
    let r = rng.random_range(1..=n);
    let rows: Vec<Vec<C64>> = (0..n)
        .map(|_| loop {
            let v = random_vector(rng, r, DomainKind::Disc);
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-8 {
                break v.into_iter().map(|z| z / norm).collect();
            }
        })
        .collect();
    HermitianMatrix::from_upper(n, |i, j| {
        if i == j {
            C64::new(1.0, 0.0)
        } else {
            rows[i].iter().zip(&rows[j]).map(|(a, b)| a * b.conj()).sum()
        }
    })
}

/// Random positive definite matrix: Gram of `n + 2` complex Gaussian vectors
/// plus a small ridge, normalized to unit largest entry.
pub fn random_positive_definite<R: Rng>(rng: &mut R, n: usize) -> HermitianMatrix {
    let g = random_gram(rng, n, n + 2, DomainKind::Disc);
    let g = g.add(&HermitianMatrix::identity(n).scale(0.05 * g.max_abs_entry())).expect("same size");
    g.scale(1.0 / g.max_abs_entry())
}

/// Random composition of `n` into `parts` positive sizes.
pub fn random_block_sizes<R: Rng>(rng: &mut R, n: usize, parts: usize) -> Vec<usize> {
    assert!(parts >= 1 && parts <= n, "need 1 <= parts <= n");
    let mut sizes = vec![1; parts];
    for _ in parts..n {
        sizes[rng.random_range(0..parts)] += 1;
    }
    sizes
}

/// Random partition of `0..n` into exactly `parts` nonempty blocks.
pub fn random_partition<R: Rng>(rng: &mut R, n: usize, parts: usize) -> Vec<Vec<usize>> {
    assert!(parts >= 1 && parts <= n, "need 1 <= parts <= n");
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    let mut blocks: Vec<Vec<usize>> = order[..parts].iter().map(|&i| vec![i]).collect();
    for &i in &order[parts..] {
        blocks[rng.random_range(0..parts)].push(i);
    }
    blocks
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_independent_of_order() {
        let a: f64 = stream_rng(7, 3).random();
        let mut other = stream_rng(7, 4);
        let _: f64 = other.random();
        let b: f64 = stream_rng(7, 3).random();
        assert_eq!(a, b);
        assert_ne!(a, stream_rng(7, 4).random::<f64>());
    }

    #[test]
    fn sampled_matrices_lie_in_domain() {
        let mut rng = stream_rng(1, 0);
        for kind in [DomainKind::Disc, DomainKind::OpenSym, DomainKind::HalfOpenNonneg, DomainKind::OpenPos] {
            for rho in [1.0, f64::INFINITY] {
                let d = Domain::new(kind, rho).unwrap();
                for n in 1..6 {
                    let m = random_psd(&mut rng, n, None, &d);
                    for i in 0..n {
                        for j in 0..n {
                            assert!(d.contains(m.get(i, j)), "{kind:?} {rho}");
                        }
                    }
                    assert!(m.is_psd(1e-10).unwrap().is_psd);
                }
            }
        }
    }

    #[test]
    fn correlation_has_unit_diagonal() {
        let mut rng = stream_rng(2, 0);
        let c = random_correlation(&mut rng, 5);
        assert!(c.diagonal().iter().all(|&d| d == 1.0));
        assert!(c.is_psd(1e-10).unwrap().is_psd);
    }

    #[test]
    fn partitions_cover() {
        let mut rng = stream_rng(3, 0);
        for _ in 0..20 {
            let p = random_partition(&mut rng, 7, 3);
            assert_eq!(p.len(), 3);
            let mut all: Vec<usize> = p.concat();
            all.sort();
            assert_eq!(all, (0..7).collect::<Vec<_>>());
            let s = random_block_sizes(&mut rng, 7, 3);
            assert_eq!(s.iter().sum::<usize>(), 7);
            assert!(s.iter().all(|&x| x >= 1));
        }
    }
}
