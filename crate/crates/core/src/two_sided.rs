//! Mechanisms driven by fixed item-side preferences: agent-proposing
//! deferred acceptance and immediate-acceptance (Boston) in sequential and
//! simultaneous form. Items have capacity one.

use std::collections::VecDeque;

use crate::engine::{EngineResult, Outcome, TraceEvent};
use crate::error::{Error, Result};
use crate::model::{AgentOrder, Matching, PreferenceOrder, Profile};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum BostonMode {
    Sequential,
    Simultaneous,
}

fn item_prefs<'a>(profile: &'a Profile, name: &str) -> Result<&'a [PreferenceOrder]> {
    profile
        .item_prefs()
        .ok_or_else(|| Error::MissingItemPrefs(name.to_string()))
}

/// Agent-proposing Gale-Shapley. Free agents wait in a FIFO queue seeded
/// from `order`; each approaches items in preference order and an item keeps
/// whichever of holder and proposer it ranks higher.
pub fn run_gale_shapley(profile: &Profile, order: &AgentOrder) -> Result<EngineResult> {
    let items = item_prefs(profile, "Gale-Shapley")?;
    let n = profile.n();
    let mut next_choice = vec![0usize; n];
    let mut holder: Vec<Option<usize>> = vec![None; n];
    let mut item_of = vec![usize::MAX; n];
    let mut free: VecDeque<usize> = order.as_slice().iter().copied().collect();
    let mut trace = Vec::new();

    while let Some(j) = free.pop_front() {
        let o = profile.agent(j).as_slice()[next_choice[j]];
        next_choice[j] += 1;
        let outcome = match holder[o] {
            None => {
                holder[o] = Some(j);
                item_of[j] = o;
                Outcome::MatchedUnassigned
            }
            Some(h) if items[o].prefers(j, h) => {
                holder[o] = Some(j);
                item_of[j] = o;
                free.push_back(h);
                Outcome::DisplacedHolder(h)
            }
            Some(_) => {
                free.push_back(j);
                Outcome::Rejected
            }
        };
        trace.push(TraceEvent {
            proposer: j,
            item: o,
            outcome,
            reset_occurred: false,
        });
        debug_assert!(trace.len() <= n * n);
    }

    Ok(EngineResult {
        matching: Matching::from_valid(item_of),
        proposal_count: trace.len(),
        trace,
    })
}

/// Immediate acceptance: nothing held is ever given up.
///
/// `Sequential`: agents move one at a time in `order`, each proposing down
/// its list until it finds a free item. `Simultaneous`: in round `r` every
/// unmatched agent applies to its `r`-th choice; a free item takes the
/// applicant it ranks highest and everyone else moves to the next round.
pub fn run_boston_two_sided(
    profile: &Profile,
    order: &AgentOrder,
    mode: BostonMode,
) -> Result<Matching> {
    let items = item_prefs(profile, "two-sided Boston")?;
    Ok(match mode {
        BostonMode::Sequential => sequential_immediate(profile, order),
        BostonMode::Simultaneous => {
            simultaneous_immediate(profile, |o, a, b| items[o].prefers(a, b))
        }
    })
}

pub(crate) fn sequential_immediate(profile: &Profile, order: &AgentOrder) -> Matching {
    let n = profile.n();
    let mut taken = vec![false; n];
    let mut item_of = vec![0; n];
    for &j in order.as_slice() {
        let o = profile
            .agent(j)
            .iter()
            .find(|&o| !taken[o])
            .expect("an item is free for every agent");
        taken[o] = true;
        item_of[j] = o;
    }
    Matching::from_valid(item_of)
}

/// Round-based immediate acceptance. `prefers(item, a, b)` says whether
/// `item` ranks agent `a` above agent `b`.
pub(crate) fn simultaneous_immediate(
    profile: &Profile,
    prefers: impl Fn(usize, usize, usize) -> bool,
) -> Matching {
    let n = profile.n();
    let mut item_of: Vec<Option<usize>> = vec![None; n];
    let mut taken = vec![false; n];
    for round in 0..n {
        let mut winner: Vec<Option<usize>> = vec![None; n];
        for j in (0..n).filter(|&j| item_of[j].is_none()) {
            let o = profile.agent(j).as_slice()[round];
            if taken[o] {
                continue;
            }
            match winner[o] {
                Some(w) if !prefers(o, j, w) => {}
                _ => winner[o] = Some(j),
            }
        }
        for (o, w) in winner.into_iter().enumerate() {
            if let Some(w) = w {
                taken[o] = true;
                item_of[w] = Some(o);
            }
        }
    }
    Matching::from_valid(
        item_of
            .into_iter()
            .map(|o| o.expect("every agent is placed by the last round"))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Agents 1..4 and items a..d from the classic deferred-acceptance example.
    pub(crate) fn gs_example() -> Profile {
        let agents = [[0, 1, 2, 3], [0, 3, 2, 1], [1, 0, 2, 3], [3, 1, 2, 0]];
        let items = [[3, 2, 0, 1], [1, 3, 0, 2], [3, 0, 1, 2], [2, 1, 0, 3]];
        Profile::two_sided(
            agents
                .iter()
                .map(|r| PreferenceOrder::new(r.to_vec()).unwrap())
                .collect(),
            items
                .iter()
                .map(|r| PreferenceOrder::new(r.to_vec()).unwrap())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn gale_shapley_example() {
        let r = run_gale_shapley(&gs_example(), &AgentOrder::identity(4)).unwrap();
        assert_eq!(r.matching.as_slice(), &[2, 3, 0, 1]);
        assert_eq!(r.proposal_count, 9);
    }

    #[test]
    fn boston_example() {
        let p = gs_example();
        let seq =
            run_boston_two_sided(&p, &AgentOrder::identity(4), BostonMode::Sequential).unwrap();
        assert_eq!(seq.as_slice(), &[0, 3, 1, 2]);
        let sim =
            run_boston_two_sided(&p, &AgentOrder::identity(4), BostonMode::Simultaneous).unwrap();
        assert_eq!(sim.as_slice(), &[0, 2, 1, 3]);
    }

    #[test]
    fn mutual_firsts_take_n_proposals() {
        let n = 5;
        let agents = (0..n)
            .map(|k| PreferenceOrder::new((0..n).map(|x| (x + k) % n).collect()).unwrap())
            .collect();
        let items = (0..n)
            .map(|k| PreferenceOrder::new((0..n).map(|x| (x + k) % n).collect()).unwrap())
            .collect();
        let p = Profile::two_sided(agents, items).unwrap();
        let r = run_gale_shapley(&p, &AgentOrder::identity(n)).unwrap();
        assert_eq!(r.matching, Matching::identity(n));
        assert_eq!(r.proposal_count, n);
    }

    #[test]
    fn distinct_tops_in_one_round() {
        let agents: Vec<_> = [[1, 0, 2], [2, 1, 0], [0, 2, 1]]
            .iter()
            .map(|r| PreferenceOrder::new(r.to_vec()).unwrap())
            .collect();
        let items = vec![PreferenceOrder::identity(3); 3];
        let p = Profile::two_sided(agents, items).unwrap();
        for mode in [BostonMode::Sequential, BostonMode::Simultaneous] {
            let m =
                run_boston_two_sided(&p, &AgentOrder::new(vec![2, 1, 0]).unwrap(), mode).unwrap();
            assert_eq!(m.as_slice(), &[1, 2, 0]);
        }
    }

    #[test]
    fn one_sided_profile_is_a_mode_error() {
        let p = Profile::from_rankings(vec![vec![0, 1], vec![1, 0]]).unwrap();
        assert!(matches!(
            run_gale_shapley(&p, &AgentOrder::identity(2)),
            Err(Error::MissingItemPrefs(_))
        ));
        assert!(
            run_boston_two_sided(&p, &AgentOrder::identity(2), BostonMode::Simultaneous).is_err()
        );
    }
}
