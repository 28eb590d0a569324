#![allow(dead_code)]

use qsanov::operator::{c64, support_projector, DensityOperator, HermitianOperator, Projector};
use rand::Rng;
use rand_distr::StandardNormal;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

fn gaussian(r: &mut ChaCha8Rng) -> f64 {
    r.sample(StandardNormal)
}

/// `d × k` complex Gaussian matrix, column-major.
fn ginibre(r: &mut ChaCha8Rng, d: usize, k: usize) -> Vec<c64> {
    (0..d * k).map(|_| c64::new(gaussian(r), gaussian(r))).collect()
}

fn gram(g: &[c64], d: usize, k: usize) -> HermitianOperator {
    HermitianOperator::from_fn(d, |i, j| (0..k).map(|c| g[c * d + i] * g[c * d + j].conj()).sum()).unwrap()
}

/// Random state of dimension `d` and rank `rank` (Wishart, normalized).
pub fn random_state(r: &mut ChaCha8Rng, d: usize, rank: usize) -> DensityOperator {
    let g = ginibre(r, d, rank);
    let w = gram(&g, d, rank);
    let t = w.trace();
    DensityOperator::new(w.scale(1.0 / t)).unwrap()
}

/// Random state, full rank three times out of four.
pub fn random_state_any_rank(r: &mut ChaCha8Rng, d: usize) -> DensityOperator {
    let rank = if r.gen_bool(0.75) { d } else { r.gen_range(1..=d) };
    random_state(r, d, rank)
}

/// Projector onto a Haar-random `k`-dimensional subspace.
pub fn random_projector(r: &mut ChaCha8Rng, d: usize, k: usize) -> Projector {
    if k == 0 {
        return Projector::zero(d);
    }
    let g = ginibre(r, d, k);
    support_projector(&gram(&g, d, k), 1e-10).unwrap()
}
