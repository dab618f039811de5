//! Exhaustive enumeration of orders and profiles.

use itertools::Itertools;

use crate::model::{AgentOrder, PreferenceOrder, Profile};

pub fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> impl Iterator<Item = Vec<usize>> {
    (0..n).permutations(n)
}

pub fn all_orders(n: usize) -> impl Iterator<Item = AgentOrder> {
    permutations(n).map(AgentOrder::from_valid)
}

/// Every one-sided profile on `n` agents: `(n!)^n` of them, with agent 0's
/// order varying slowest.
pub fn all_profiles(n: usize) -> impl Iterator<Item = Profile> {
    let prefs: Vec<PreferenceOrder> = permutations(n).map(PreferenceOrder::from_valid).collect();
    (0..n)
        .map(|_| prefs.clone().into_iter())
        .multi_cartesian_product()
        .map(|agents| Profile::one_sided(agents).expect("generated orders are valid"))
}

/// Number of one-sided profiles on `n` agents, if it fits in a `u64`.
pub fn profile_count(n: usize) -> Option<u64> {
    factorial(n).checked_pow(n as u32)
}
