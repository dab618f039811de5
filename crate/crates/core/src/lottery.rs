//! Randomized versions: the distribution of outcomes when the initial agent
//! order is drawn uniformly at random.

use std::collections::BTreeMap;

use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::enumerate::{factorial, permutations};
use crate::error::{Error, Result};
use crate::mechanism::{Mechanism, Output};
use crate::model::{AgentOrder, FractionalAssignment, Matching, Profile};
use crate::rational::Rational;

/// Largest `n` for which all `n!` orders are enumerated by default.
pub const DEFAULT_ENUMERATION_LIMIT: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LotteryResult {
    pub assignment: FractionalAssignment,
    /// Distinct matchings with their probabilities, in matching order.
    /// Empty for PS, whose single outcome is already fractional.
    pub support: Vec<(Matching, Rational)>,
    pub order_count: u64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct SampleConfig {
    pub sample_count: usize,
    pub seed: u64,
}

impl SampleConfig {
    pub fn new(sample_count: usize, seed: u64) -> Result<Self> {
        if sample_count == 0 {
            return Err(Error::Config("sample count must be at least 1".into()));
        }
        Ok(Self { sample_count, seed })
    }
}

pub fn exact_lottery(mech: Mechanism, profile: &Profile) -> Result<LotteryResult> {
    exact_lottery_with_limit(mech, profile, DEFAULT_ENUMERATION_LIMIT)
}

/// Runs the mechanism from every initial order (lexicographic enumeration)
/// and averages with weight `1/n!`.
pub fn exact_lottery_with_limit(
    mech: Mechanism,
    profile: &Profile,
    limit: usize,
) -> Result<LotteryResult> {
    let n = profile.n();
    mech.check_profile(profile)?;
    let mech = mech.deterministic();
    if !mech.is_discrete() {
        let p = match mech.run(profile, &AgentOrder::identity(n))? {
            Output::Fractional(p) => p,
            Output::Matching(m) => m.to_assignment(),
        };
        return Ok(LotteryResult {
            assignment: p,
            support: Vec::new(),
            order_count: 1,
        });
    }
    if !mech.base.uses_order() {
        let m = mech.run_matching(profile, &AgentOrder::identity(n))?;
        return Ok(LotteryResult {
            assignment: m.to_assignment(),
            support: vec![(m, Rational::from_integer(1.into()))],
            order_count: 1,
        });
    }
    if n > limit {
        return Err(Error::LimitExceeded { n, limit });
    }
    let orders: Vec<Vec<usize>> = permutations(n).collect();
    let outcomes = orders
        .into_par_iter()
        .map(|o| mech.run_matching(profile, &AgentOrder::from_valid(o)))
        .collect::<Result<Vec<Matching>>>()?;
    Ok(tally(n, outcomes, factorial(n)))
}

fn tally(n: usize, outcomes: Vec<Matching>, total: u64) -> LotteryResult {
    let mut counts = vec![0u64; n * n];
    let mut support: BTreeMap<Vec<usize>, u64> = BTreeMap::new();
    for m in &outcomes {
        for (a, &o) in m.as_slice().iter().enumerate() {
            counts[a * n + o] += 1;
        }
        *support.entry(m.as_slice().to_vec()).or_default() += 1;
    }
    LotteryResult {
        assignment: FractionalAssignment::from_counts(n, &counts, total),
        support: support
            .into_iter()
            .map(|(m, c)| {
                (
                    Matching::from_valid(m),
                    Rational::new(c.into(), total.into()),
                )
            })
            .collect(),
        order_count: total,
    }
}

/// Uniform random orders drawn from a seeded ChaCha8 stream.
pub fn sample_orders(n: usize, cfg: SampleConfig) -> Vec<AgentOrder> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    (0..cfg.sample_count)
        .map(|_| {
            let mut v: Vec<usize> = (0..n).collect();
            v.shuffle(&mut rng);
            AgentOrder::from_valid(v)
        })
        .collect()
}

/// Frequencies of each (agent, item) pair over `cfg.sample_count` sampled orders.
pub fn sampled_lottery(
    mech: Mechanism,
    profile: &Profile,
    cfg: SampleConfig,
) -> Result<LotteryResult> {
    let n = profile.n();
    mech.check_profile(profile)?;
    let mech = mech.deterministic();
    if !mech.is_discrete() || !mech.base.uses_order() {
        return exact_lottery(mech, profile);
    }
    let outcomes = sample_orders(n, cfg)
        .into_par_iter()
        .map(|o| mech.run_matching(profile, &o))
        .collect::<Result<Vec<Matching>>>()?;
    Ok(tally(n, outcomes, cfg.sample_count as u64))
}

/// Which initial orders `equivalent_on` runs.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum OrderSet {
    All,
    Sampled(SampleConfig),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Equal { cases: u64 },
    Differ(Counterexample),
}

impl Verdict {
    pub fn is_equal(&self) -> bool {
        matches!(self, Verdict::Equal { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub profile_index: usize,
    /// `None` when randomized versions were compared.
    pub order: Option<AgentOrder>,
    pub left: FractionalAssignment,
    pub right: FractionalAssignment,
}

/// Compares two mechanisms on each profile. Deterministic mechanisms are
/// compared order by order; if either is randomized, exact lotteries are
/// compared instead. Stops at the first difference (lowest profile index,
/// then first order).
pub fn equivalent_on(
    a: Mechanism,
    b: Mechanism,
    profiles: &[Profile],
    orders: OrderSet,
) -> Result<Verdict> {
    let randomized = a.randomized || b.randomized;
    let mut cases = 0u64;
    for (k, p) in profiles.iter().enumerate() {
        if randomized {
            let (pa, pb) = (
                exact_lottery(a, p)?.assignment,
                exact_lottery(b, p)?.assignment,
            );
            cases += 1;
            if pa != pb {
                return Ok(Verdict::Differ(Counterexample {
                    profile_index: k,
                    order: None,
                    left: pa,
                    right: pb,
                }));
            }
            continue;
        }
        let list: Vec<AgentOrder> = match orders {
            OrderSet::All => {
                if p.n() > DEFAULT_ENUMERATION_LIMIT {
                    return Err(Error::LimitExceeded {
                        n: p.n(),
                        limit: DEFAULT_ENUMERATION_LIMIT,
                    });
                }
                permutations(p.n()).map(AgentOrder::from_valid).collect()
            }
            OrderSet::Sampled(cfg) => sample_orders(p.n(), cfg),
        };
        for o in list {
            let (x, y) = (a.run(p, &o)?, b.run(p, &o)?);
            cases += 1;
            if x != y {
                return Ok(Verdict::Differ(Counterexample {
                    profile_index: k,
                    order: Some(o),
                    left: x.to_assignment(),
                    right: y.to_assignment(),
                }));
            }
        }
    }
    Ok(Verdict::Equal { cases })
}

/// Sum of weights in a support; exactly one for any lottery.
pub fn support_mass(support: &[(Matching, Rational)]) -> Rational {
    support.iter().fold(Rational::zero(), |acc, (_, w)| acc + w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn lottery_profile() -> Profile {
        Profile::from_rankings(vec![
            vec![0, 1, 2, 3],
            vec![0, 1, 2, 3],
            vec![0, 1, 2, 3],
            vec![0, 2, 3, 1],
        ])
        .unwrap()
    }

    fn row(v: [(i64, i64); 4]) -> Vec<Rational> {
        v.iter().map(|&(p, q)| ratio(p, q)).collect()
    }

    #[test]
    fn rsd_matrix() {
        let r = exact_lottery(Mechanism::parse("RSD").unwrap(), &lottery_profile()).unwrap();
        assert_eq!(r.order_count, 24);
        assert_eq!(
            r.assignment.row(0),
            row([(1, 4), (1, 3), (1, 6), (1, 4)]).as_slice()
        );
        assert_eq!(
            r.assignment.row(3),
            row([(1, 4), (0, 1), (1, 2), (1, 4)]).as_slice()
        );
        assert_eq!(support_mass(&r.support), ratio(1, 1));
    }

    #[test]
    fn distinct_tops_single_support() {
        let p = Profile::from_rankings(vec![vec![1, 0, 2], vec![2, 1, 0], vec![0, 1, 2]]).unwrap();
        for code in ["R-PFS", "R-TLQ", "R-PLS+G", "R-NB"] {
            let r = exact_lottery(Mechanism::parse(code).unwrap(), &p).unwrap();
            assert_eq!(r.support.len(), 1);
            assert_eq!(r.support[0].0.as_slice(), &[1, 2, 0]);
        }
    }

    #[test]
    fn limit_is_enforced() {
        let p = Profile::from_rankings((0..4).map(|_| vec![0, 1, 2, 3]).collect()).unwrap();
        let err = exact_lottery_with_limit(Mechanism::parse("R-TLS").unwrap(), &p, 3).unwrap_err();
        assert_eq!(err, Error::LimitExceeded { n: 4, limit: 3 });
    }

    #[test]
    fn sampling_is_deterministic() {
        let m = Mechanism::parse("R-TFQ").unwrap();
        let cfg = SampleConfig::new(200, 42).unwrap();
        let a = sampled_lottery(m, &lottery_profile(), cfg).unwrap();
        let b = sampled_lottery(m, &lottery_profile(), cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.assignment.is_doubly_stochastic());
        let one = Profile::from_rankings(vec![vec![0]]).unwrap();
        let r = sampled_lottery(m, &one, SampleConfig::new(5, 9).unwrap()).unwrap();
        assert_eq!(r.assignment, FractionalAssignment::proportional(1).unwrap());
    }

    #[test]
    fn sd_alias_equivalence_small() {
        let profiles: Vec<Profile> = crate::enumerate::all_profiles(3).collect();
        let v = equivalent_on(
            Mechanism::parse("PFS").unwrap(),
            Mechanism::parse("SD").unwrap(),
            &profiles,
            OrderSet::All,
        )
        .unwrap();
        assert_eq!(v, Verdict::Equal { cases: 216 * 6 });
    }
}
