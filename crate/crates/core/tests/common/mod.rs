#![allow(dead_code)]

use matchlab_core::engine::replay;
use matchlab_core::io::parse_profile;
use matchlab_core::rational::ratio;
use matchlab_core::{
    AgentOrder, EngineConfig, FractionalAssignment, Outcome, Profile, Rational, TraceEvent,
};
use rand::seq::SliceRandom;
use rand::Rng;

/// 1,2,3: a>b>c>d and 4: b>a>c>d.
pub fn standard_profile() -> Profile {
    profile("1: a,b,c,d\n2: a,b,c,d\n3: a,b,c,d\n4: b,a,c,d\n")
}

pub fn profile(text: &str) -> Profile {
    parse_profile(text).unwrap().profile
}

pub fn rankings(rows: &[&[usize]]) -> Profile {
    Profile::from_rankings(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
}

/// Events written as `1a+` (took an unmatched item), `2a/1` (displaced
/// agent 1) or `3b-` (rejected). Agents are 1-based, items are letters.
pub fn events(text: &str, config: EngineConfig) -> Vec<TraceEvent> {
    text.split_whitespace()
        .map(|tok| {
            let b = tok.as_bytes();
            let proposer = (b[0] - b'1') as usize;
            let item = (b[1] - b'a') as usize;
            let outcome = match b[2] {
                b'+' => Outcome::MatchedUnassigned,
                b'-' => Outcome::Rejected,
                b'/' => Outcome::DisplacedHolder((b[3] - b'1') as usize),
                _ => panic!("bad token {tok}"),
            };
            TraceEvent {
                proposer,
                item,
                outcome,
                reset_occurred: outcome == Outcome::MatchedUnassigned
                    && config.memory == matchlab_core::Memory::Temporary,
            }
        })
        .collect()
}

pub fn assert_replays(order: &AgentOrder, config: EngineConfig, trace: &[TraceEvent]) {
    replay(order, config, trace).expect("transcribed trace is a legal run");
}

pub fn row(values: &[(i64, i64)]) -> Vec<Rational> {
    values.iter().map(|&(p, q)| ratio(p, q)).collect()
}

pub fn matrix(rows: &[&[(i64, i64)]]) -> FractionalAssignment {
    FractionalAssignment::new(rows.iter().map(|r| row(r)).collect()).unwrap()
}

pub fn random_profile<R: Rng>(n: usize, rng: &mut R) -> Profile {
    let rows = (0..n)
        .map(|_| {
            let mut r: Vec<usize> = (0..n).collect();
            r.shuffle(rng);
            r
        })
        .collect();
    Profile::from_rankings(rows).unwrap()
}

pub fn random_order<R: Rng>(n: usize, rng: &mut R) -> AgentOrder {
    let mut o: Vec<usize> = (0..n).collect();
    o.shuffle(rng);
    AgentOrder::new(o).unwrap()
}

pub const ENGINE_CODES: [&str; 8] = ["PFS", "PFQ", "PLS", "PLQ", "TFS", "TFQ", "TLS", "TLQ"];
