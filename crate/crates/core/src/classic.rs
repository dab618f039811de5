//! Reference one-sided mechanisms: serial dictatorship, naive Boston,
//! probabilistic serial and top trading cycles.

use num_traits::{One, Zero};

use crate::model::{AgentOrder, Endowment, FractionalAssignment, Matching, Profile};
use crate::rational::Rational;
use crate::two_sided::{sequential_immediate, simultaneous_immediate};

/// Each agent in turn takes its favourite item among those still available.
pub fn serial_dictatorship(profile: &Profile, order: &AgentOrder) -> Matching {
    sequential_immediate(profile, order)
}

/// In round `r` every unmatched agent applies to its `r`-th choice; a free
/// item goes to the applicant earliest in `order`.
pub fn naive_boston_one_sided(profile: &Profile, order: &AgentOrder) -> Matching {
    let pos = order.positions();
    simultaneous_immediate(profile, |_, a, b| pos[a] < pos[b])
}

/// Simultaneous eating at unit speed, computed exactly between the moments
/// at which some item runs out.
pub fn probabilistic_serial(profile: &Profile) -> FractionalAssignment {
    let n = profile.n();
    let mut supply = vec![Rational::one(); n];
    let mut exhausted = vec![false; n];
    let mut eaten = vec![Rational::zero(); n * n];
    let mut clock = Rational::zero();

    while clock < Rational::one() {
        let target: Vec<usize> = (0..n)
            .map(|a| {
                profile
                    .agent(a)
                    .iter()
                    .find(|&o| !exhausted[o])
                    .expect("supply remains while time < 1")
            })
            .collect();
        let mut eaters = vec![0usize; n];
        for &o in &target {
            eaters[o] += 1;
        }
        let dt = (0..n)
            .filter(|&o| eaters[o] > 0)
            .map(|o| &supply[o] / Rational::from_integer(eaters[o].into()))
            .min()
            .expect("someone is eating");
        for (a, &o) in target.iter().enumerate() {
            eaten[a * n + o] += &dt;
        }
        for o in 0..n {
            if eaters[o] > 0 {
                supply[o] -= &dt * Rational::from_integer(eaters[o].into());
                if supply[o].is_zero() {
                    exhausted[o] = true;
                }
            }
        }
        clock += dt;
    }

    let out = FractionalAssignment::from_entries(n, eaten);
    debug_assert!(out.is_doubly_stochastic());
    out
}

/// Gale's top trading cycles from `endowment`. Every remaining agent points
/// at the owner of its best remaining item and all cycles trade at once.
pub fn top_trading_cycles(profile: &Profile, endowment: &Endowment) -> Matching {
    let n = profile.n();
    let mut owner = endowment.agent_of_items();
    let mut active = vec![true; n];
    let mut result = vec![usize::MAX; n];
    let mut left = n;

    while left > 0 {
        let points_to: Vec<usize> = (0..n)
            .map(|a| {
                if !active[a] {
                    return usize::MAX;
                }
                profile
                    .agent(a)
                    .iter()
                    .find(|&o| active[owner[o]])
                    .expect("an active agent still owns an item")
            })
            .collect();

        // Walk the functional graph agent -> owner(best item) to find cycles.
        let mut state = vec![0u8; n]; // 0 unseen, 1 on current path, 2 done
        let mut traded = Vec::new();
        for start in (0..n).filter(|&a| active[a]) {
            let mut path = Vec::new();
            let mut a = start;
            while state[a] == 0 {
                state[a] = 1;
                path.push(a);
                a = owner[points_to[a]];
            }
            if state[a] == 1 {
                let from = path.iter().position(|&x| x == a).unwrap();
                traded.extend_from_slice(&path[from..]);
            }
            for &x in &path {
                state[x] = 2;
            }
        }
        for &a in &traded {
            result[a] = points_to[a];
        }
        for &a in &traded {
            active[a] = false;
            owner[result[a]] = a;
        }
        left -= traded.len();
    }
    Matching::from_valid(result)
}
