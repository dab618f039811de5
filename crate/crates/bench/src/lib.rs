//! Shared inputs for the benchmarks.

use matchlab_core::{AgentOrder, Profile, ProfileSampler};

/// `count` uniform profiles of size `n`, fixed by `seed`.
pub fn profiles(n: usize, count: u64, seed: u64) -> Vec<Profile> {
    ProfileSampler::new(n, seed)
        .expect("n >= 1")
        .profiles(count)
}

/// Profile and order pairs for single-run benchmarks.
pub fn runs(n: usize, count: u64, seed: u64) -> Vec<(Profile, AgentOrder)> {
    let sampler = ProfileSampler::new(n, seed).expect("n >= 1");
    (0..count)
        .map(|k| (sampler.profile(k), sampler.orders(k, 1).remove(0)))
        .collect()
}
