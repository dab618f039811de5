mod common;

use common::{profile, random_profile, ENGINE_CODES};
use matchlab_core::axioms::{
    check_strategyproofness, feasible_top_k, sd_dominates, sweep, Axiom, DominanceVerdict,
    SPVerdict,
};
use matchlab_core::enumerate::{all_profiles, permutations};
use matchlab_core::io::parse_order;
use matchlab_core::rational::ratio;
use matchlab_core::{Mechanism, PreferenceOrder, Profile, Rational};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn mech(code: &str) -> Mechanism {
    Mechanism::parse(code).unwrap()
}

#[test]
fn rsd_is_strategyproof_at_three() {
    for p in all_profiles(3) {
        for a in 0..3 {
            let r = check_strategyproofness(mech("R-PFS"), &p, a).unwrap();
            assert_eq!(r.overall, SPVerdict::Strategyproof, "agent {a} on {p:?}");
            assert_eq!(r.entries.len(), 5);
        }
    }
}

#[test]
fn swapping_second_and_third_pays_under_identical_preferences() {
    let p = profile("1: a,b,c,d\n2: a,b,c,d\n3: a,b,c,d\n4: a,b,c,d\n");
    let lie = PreferenceOrder::new(vec![0, 2, 1, 3]).unwrap();
    for code in ["R-TLS", "R-PLS", "R-PLQ", "R-TLQ"] {
        let r = check_strategyproofness(mech(code), &p, 0).unwrap();
        assert_eq!(r.overall, SPVerdict::NotWeaklySP, "{code}");
        let e = r.entries.iter().find(|e| e.misreport == lie).unwrap();
        assert_eq!(e.verdict, DominanceVerdict::StrictlyDominates, "{code}");
    }
    for code in ["R-PFS", "R-PFQ", "R-TFS", "R-TFQ"] {
        let r = check_strategyproofness(mech(code), &p, 0).unwrap();
        assert_ne!(r.overall, SPVerdict::NotWeaklySP, "{code}");
    }
}

#[test]
fn naive_boston_is_manipulable() {
    // Agent 4 gains by ranking c last.
    let p = profile("1: b,d,c,a\n2: c,d,a,b\n3: b,c,a,d\n4: b,c,d,a\n");
    let lie = PreferenceOrder::new(vec![1, 3, 0, 2]).unwrap();
    for code in ["R-NB", "R-PFQ"] {
        let r = check_strategyproofness(mech(code), &p, 3).unwrap();
        let e = r.entries.iter().find(|e| e.misreport == lie).unwrap();
        assert_eq!(e.verdict, DominanceVerdict::StrictlyDominates, "{code}");
    }
}

/// Brute-force version of the top-k test.
fn top_k_brute(p: &Profile, k: usize) -> bool {
    permutations(p.n()).any(|m| (0..p.n()).all(|a| p.agent(a).rank_of(m[a]) < k))
}

#[test]
fn top_k_feasibility_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for n in 1..=6 {
        for _ in 0..40 {
            let p = random_profile(n, &mut rng);
            for k in 1..=n {
                assert_eq!(feasible_top_k(&p, k), top_k_brute(&p, k));
            }
        }
    }
}

#[test]
fn conditional_bound_at_three() {
    for code in ["TLS", "TLQ"] {
        let line = sweep(mech(code), Axiom::ConditionalBound(2), 3, all_profiles(3)).unwrap();
        assert!(line.passed(), "{line}");
        assert_eq!(line.profiles_checked, 216);
    }
    for code in ["PFS", "PFQ", "PLS", "PLQ", "TFS", "TFQ", "SD", "NB"] {
        let line = sweep(mech(code), Axiom::ConditionalBound(2), 3, all_profiles(3)).unwrap();
        assert!(!line.passed(), "{code}");
        let w = line.witness.unwrap();
        assert!(feasible_top_k(&w.profile, 2));
        let m = mech(code)
            .run_matching(&w.profile, w.order.as_ref().unwrap())
            .unwrap();
        assert!((0..3).any(|a| w.profile.agent(a).rank_of(m.as_slice()[a]) >= 2));
    }
}

#[test]
fn witness_lines_read_back() {
    let line = sweep(mech("PFS"), Axiom::ConditionalBound(2), 3, all_profiles(3)).unwrap();
    let text = line.to_string();
    let fields: Vec<&str> = text.split(", ").collect();
    assert_eq!(&fields[..4], ["bound-k2", "PFS", "3", "FAIL"]);
    let labels = matchlab_core::io::Labels::default_for(3);
    assert_eq!(
        &parse_order(fields[5], &labels).unwrap(),
        line.witness.unwrap().order.as_ref().unwrap()
    );
    assert_eq!(ENGINE_CODES.len(), 8);
}

fn random_row(n: usize, seed: u64) -> Vec<Rational> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w: Vec<i64> = (0..n)
        .map(|_| rand::Rng::gen_range(&mut rng, 0..4))
        .collect();
    let total: i64 = w.iter().sum::<i64>().max(1);
    if w.iter().all(|&x| x == 0) {
        let mut r = vec![ratio(0, 1); n];
        r[0] = ratio(1, 1);
        return r;
    }
    w.iter().map(|&x| ratio(x, total)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn dominance_is_a_partial_order(n in 1usize..=5, s in any::<[u64; 4]>()) {
        let pref = PreferenceOrder::new(random_profile(n, &mut ChaCha8Rng::seed_from_u64(s[0])).agent(0).as_slice().to_vec()).unwrap();
        let (p, q, r) = (random_row(n, s[1]), random_row(n, s[2]), random_row(n, s[3]));
        prop_assert_eq!(sd_dominates(&p, &p, &pref).unwrap(), DominanceVerdict::Equal);
        let pq = sd_dominates(&p, &q, &pref).unwrap();
        let qp = sd_dominates(&q, &p, &pref).unwrap();
        let flipped = match pq {
            DominanceVerdict::StrictlyDominates => DominanceVerdict::DominatedBy,
            DominanceVerdict::DominatedBy => DominanceVerdict::StrictlyDominates,
            v => v,
        };
        prop_assert_eq!(qp, flipped);
        if pq.weakly_dominates() && qp.weakly_dominates() {
            prop_assert_eq!(&p, &q);
        }
        let qr = sd_dominates(&q, &r, &pref).unwrap();
        if pq.weakly_dominates() && qr.weakly_dominates() {
            prop_assert!(sd_dominates(&p, &r, &pref).unwrap().weakly_dominates());
        }
    }

    /// Weak dominance means at least as much expected utility for every
    /// utility that is decreasing along the preference.
    #[test]
    fn dominance_implies_higher_expected_utility(n in 1usize..=5, s in any::<[u64; 3]>(), steps in proptest::collection::vec(1i64..10, 5)) {
        let pref = random_profile(n, &mut ChaCha8Rng::seed_from_u64(s[0])).agent(0).clone();
        let (p, q) = (random_row(n, s[1]), random_row(n, s[2]));
        let mut utility = vec![0i64; n];
        let mut level = 0;
        for (r, o) in pref.iter().collect::<Vec<_>>().into_iter().rev().enumerate() {
            level += steps[r];
            utility[o] = level;
        }
        let eu = |x: &[Rational]| x.iter().zip(&utility).fold(ratio(0, 1), |acc, (a, &u)| acc + a * ratio(u, 1));
        if sd_dominates(&p, &q, &pref).unwrap().weakly_dominates() {
            prop_assert!(eu(&p) >= eu(&q));
        }
    }
}
