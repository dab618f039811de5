mod common;

use common::{profile, random_order, random_profile, ENGINE_CODES};
use matchlab_core::axioms::{is_ordinally_efficient, is_pareto_efficient, tau_cycle};
use matchlab_core::classic::{probabilistic_serial, top_trading_cycles};
use matchlab_core::enumerate::{all_orders, all_profiles, permutations};
use matchlab_core::{
    exact_lottery, run_engine, EngineConfig, FractionalAssignment, Matching, Mechanism, Profile,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ACCEPT_FIRST: [&str; 4] = ["PFS", "PFQ", "TFS", "TFQ"];
const ACCEPT_LAST: [&str; 4] = ["PLS", "PLQ", "TLS", "TLQ"];

fn pareto_brute_force(m: &[usize], p: &Profile) -> bool {
    let n = p.n();
    !permutations(n).any(|q| {
        let weakly = (0..n).all(|a| p.agent(a).rank_of(q[a]) <= p.agent(a).rank_of(m[a]));
        weakly && q != m
    })
}

#[test]
fn pareto_check_agrees_with_brute_force() {
    for p in all_profiles(3) {
        for m in permutations(3) {
            let fast = is_pareto_efficient(&Matching::new(m.clone()).unwrap(), &p);
            assert_eq!(fast, pareto_brute_force(&m, &p), "{m:?} on {p:?}");
        }
    }
}

#[test]
fn accept_first_outputs_are_ttc_fixed_points() {
    for p in all_profiles(3) {
        for o in all_orders(3) {
            for code in ACCEPT_FIRST {
                let m = run_engine(&p, &o, EngineConfig::from_code(code).unwrap()).matching;
                assert_eq!(top_trading_cycles(&p, &m), m, "{code}");
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..4000 {
        let n = rng.gen_range(1..=8);
        let p = random_profile(n, &mut rng);
        let o = random_order(n, &mut rng);
        for code in ACCEPT_FIRST {
            let m = run_engine(&p, &o, EngineConfig::from_code(code).unwrap()).matching;
            assert!(is_pareto_efficient(&m, &p), "{code}");
        }
    }
}

#[test]
fn accept_last_can_be_inefficient() {
    let p = profile("1: a,b,c\n2: a,b,c\n3: b,a,c\n");
    for code in ACCEPT_LAST {
        let c = EngineConfig::from_code(code).unwrap();
        let bad = all_orders(3).find(|o| !is_pareto_efficient(&run_engine(&p, o, c).matching, &p));
        assert!(bad.is_some(), "{code} was efficient from every order");
    }
}

#[test]
fn composed_mechanisms_are_ex_post_efficient() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..300 {
        let n = rng.gen_range(1..=7);
        let p = random_profile(n, &mut rng);
        let o = random_order(n, &mut rng);
        for code in ENGINE_CODES {
            let m = Mechanism::parse(&format!("{code}+G"))
                .unwrap()
                .run_matching(&p, &o)
                .unwrap();
            assert!(is_pareto_efficient(&m, &p));
        }
    }
}

/// Searches the 3x3 doubly stochastic matrices with entries in twelfths for
/// one that every agent weakly prefers and someone strictly prefers.
fn dominated_on_grid(p: &FractionalAssignment, prof: &Profile) -> bool {
    let twelfths: Vec<Vec<i64>> = p
        .rows()
        .map(|r| {
            r.iter()
                .map(|x| {
                    let y = x * matchlab_core::rational::ratio(12, 1);
                    assert!(y.is_integer(), "entry off the grid");
                    y.to_integer().try_into().unwrap()
                })
                .collect()
        })
        .collect();
    let cumulative = |row: &[i64], a: usize| -> Vec<i64> {
        prof.agent(a)
            .iter()
            .scan(0, |s, o| {
                *s += row[o];
                Some(*s)
            })
            .collect()
    };
    for x00 in 0..=12 {
        for x01 in 0..=12 - x00 {
            for x10 in 0..=12 - x00 {
                for x11 in 0..=12 - x01 {
                    let x02 = 12 - x00 - x01;
                    let x12 = 12 - x10 - x11;
                    let x20 = 12 - x00 - x10;
                    let x21 = 12 - x01 - x11;
                    let x22 = 12 - x02 - x12;
                    if x12 < 0 || x20 < 0 || x21 < 0 || x22 < 0 || x20 + x21 + x22 != 12 {
                        continue;
                    }
                    let q = [[x00, x01, x02], [x10, x11, x12], [x20, x21, x22]];
                    let mut strict = false;
                    let ok = (0..3).all(|a| {
                        let (cq, cp) = (cumulative(&q[a], a), cumulative(&twelfths[a], a));
                        strict |= cq.iter().zip(&cp).any(|(u, v)| u > v);
                        cq.iter().zip(&cp).all(|(u, v)| u >= v)
                    });
                    if ok && strict {
                        return true;
                    }
                }
            }
        }
    }
    false
}

#[test]
fn tau_acyclicity_agrees_with_grid_search() {
    let mut inefficient = 0;
    for (k, p) in all_profiles(3).enumerate() {
        if k % 3 != 0 {
            continue;
        }
        for code in ["RSD", "R-PFQ", "R-PLQ", "R-TLS"] {
            let a = exact_lottery(Mechanism::parse(code).unwrap(), &p)
                .unwrap()
                .assignment;
            let efficient = is_ordinally_efficient(&a, &p);
            assert_eq!(efficient, !dominated_on_grid(&a, &p), "{code} on {p:?}");
            inefficient += usize::from(!efficient);
        }
    }
    assert!(inefficient > 0);
}

#[test]
fn probabilistic_serial_is_ordinally_efficient() {
    for p in all_profiles(3) {
        assert!(is_ordinally_efficient(&probabilistic_serial(&p), &p));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..1000 {
        let n = rng.gen_range(1..=5);
        let p = random_profile(n, &mut rng);
        assert!(tau_cycle(&probabilistic_serial(&p), &p).is_none());
    }
}

#[test]
fn accept_first_lotteries_have_tau_cycles() {
    let p = profile("1: a,b,c,d\n2: a,b,c,d\n3: a,b,d,c\n4: a,b,d,c\n");
    for code in ACCEPT_FIRST
        .iter()
        .map(|c| format!("R-{c}"))
        .chain(["R-PLS+G".into(), "R-PLQ+G".into()])
    {
        let a = exact_lottery(Mechanism::parse(&code).unwrap(), &p)
            .unwrap()
            .assignment;
        assert!(tau_cycle(&a, &p).is_some(), "{code}");
    }
}
