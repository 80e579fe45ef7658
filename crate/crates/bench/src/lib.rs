//! Seeded inputs shared by the benchmarks.

use qrefine::linalg::{c, CVec};
use qrefine::{Subspace, Tolerances};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Span of `rank` Gaussian-ish random vectors in dimension `dim`.
pub fn random_subspace(rng: &mut impl Rng, dim: usize, rank: usize) -> Subspace {
    let vs: Vec<CVec> = (0..rank)
        .map(|_| CVec::from_fn(dim, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
        .collect();
    Subspace::from_spanning(&vs, Some(dim), &Tolerances::default()).expect("valid spanning set")
}

pub fn script(name: &str) -> std::path::PathBuf {
    std::path::PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scripts").join(name)
}
