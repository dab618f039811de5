//! Borda welfare. An agent's `r`-th choice (0-based) is worth `n - 1 - r`,
//! so the top item scores `n - 1` and the last scores `0`.

use num_traits::Zero;

use crate::hungarian::max_weight_assignment;
use crate::model::{FractionalAssignment, Matching, Profile};
use crate::rational::Rational;

pub fn borda(profile: &Profile, agent: usize, item: usize) -> i64 {
    (profile.n() - 1 - profile.agent(agent).rank_of(item)) as i64
}

/// `u[a][o]` for every agent and item.
pub fn borda_matrix(profile: &Profile) -> Vec<Vec<i64>> {
    let n = profile.n();
    (0..n)
        .map(|a| (0..n).map(|o| borda(profile, a, o)).collect())
        .collect()
}

pub fn agent_utilities(m: &Matching, profile: &Profile) -> Vec<i64> {
    m.as_slice()
        .iter()
        .enumerate()
        .map(|(a, &o)| borda(profile, a, o))
        .collect()
}

pub fn matching_welfare(m: &Matching, profile: &Profile) -> i64 {
    agent_utilities(m, profile).iter().sum()
}

/// Expected Borda utility of each agent under `p`.
pub fn expected_utilities(p: &FractionalAssignment, profile: &Profile) -> Vec<Rational> {
    (0..profile.n())
        .map(|a| {
            p.row(a)
                .iter()
                .enumerate()
                .filter(|(_, x)| !x.is_zero())
                .fold(Rational::zero(), |acc, (o, x)| {
                    acc + x * Rational::from_integer(borda(profile, a, o).into())
                })
        })
        .collect()
}

/// Sum of (expected) Borda utilities.
pub fn utilitarian_welfare(p: &FractionalAssignment, profile: &Profile) -> Rational {
    expected_utilities(p, profile)
        .into_iter()
        .fold(Rational::zero(), |a, b| a + b)
}

/// Maximum utilitarian welfare and a matching that attains it.
pub fn optimal_utilitarian(profile: &Profile) -> (i64, Matching) {
    let (value, cols) = max_weight_assignment(&borda_matrix(profile));
    (
        value,
        Matching::new(cols).expect("assignment is a permutation"),
    )
}

/// Worst-off agent's (expected) utility divided by `n`.
pub fn egalitarian_welfare(p: &FractionalAssignment, profile: &Profile) -> Rational {
    let n = profile.n();
    let min = expected_utilities(p, profile)
        .into_iter()
        .min()
        .unwrap_or_else(Rational::zero);
    min / Rational::from_integer(n.into())
}

pub fn matching_egalitarian(m: &Matching, profile: &Profile) -> Rational {
    let min = agent_utilities(m, profile).into_iter().min().unwrap_or(0);
    Rational::new(min.into(), profile.n().into())
}

/// Mean and standard error of the mean.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

pub fn estimate(values: &[f64]) -> Estimate {
    let k = values.len();
    if k == 0 {
        return Estimate {
            mean: f64::NAN,
            stderr: f64::NAN,
        };
    }
    let mean = values.iter().sum::<f64>() / k as f64;
    if k == 1 {
        return Estimate { mean, stderr: 0.0 };
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
    Estimate {
        mean,
        stderr: (var / k as f64).sqrt(),
    }
}

/// Mean of `a - b` with its standard error, pairing values by index.
pub fn paired_difference(a: &[f64], b: &[f64]) -> Estimate {
    assert_eq!(a.len(), b.len(), "paired samples differ in length");
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    estimate(&d)
}
