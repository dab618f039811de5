//! A deliberately plain re-implementation of the proposal rules, used as an
//! oracle for the engine on random inputs.

mod common;

use std::collections::{BTreeSet, VecDeque};

use common::{random_order, random_profile, ENGINE_CODES};
use matchlab_core::{
    run_engine, Acceptance, AgentOrder, Discipline, EngineConfig, Memory, Outcome, Profile,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct Reference {
    holder: Vec<Option<usize>>,
    memory: Vec<Vec<usize>>,
    blocked: BTreeSet<(usize, usize)>,
    queue: VecDeque<usize>,
}

fn reference_run(
    p: &Profile,
    order: &AgentOrder,
    c: EngineConfig,
) -> (Vec<(usize, usize, Outcome)>, Vec<usize>) {
    let n = p.n();
    let mut s = Reference {
        holder: vec![None; n],
        memory: vec![Vec::new(); n],
        blocked: BTreeSet::new(),
        queue: order.as_slice().iter().copied().collect(),
    };
    let mut log = Vec::new();
    while let Some(j) = s.queue.pop_front() {
        let o = p
            .agent(j)
            .iter()
            .find(|&o| !s.blocked.contains(&(j, o)))
            .unwrap();
        let loser = match s.holder[o] {
            None => {
                s.holder[o] = Some(j);
                if c.memory == Memory::Permanent {
                    s.memory[o] = vec![j];
                } else {
                    s.memory.iter_mut().for_each(Vec::clear);
                    s.blocked.clear();
                }
                log.push((j, o, Outcome::MatchedUnassigned));
                None
            }
            Some(h) if s.memory[o].is_empty() => {
                s.memory[o] = vec![j, h];
                s.holder[o] = Some(j);
                log.push((j, o, Outcome::DisplacedHolder(h)));
                Some(h)
            }
            Some(h) => {
                let seen = s.memory[o].contains(&j);
                if c.acceptance == Acceptance::AcceptLast && !seen {
                    s.memory[o].insert(0, j);
                    s.holder[o] = Some(j);
                    s.blocked.insert((h, o));
                    log.push((j, o, Outcome::DisplacedHolder(h)));
                    Some(h)
                } else {
                    if !seen {
                        s.memory[o].push(j);
                    }
                    s.blocked.insert((j, o));
                    log.push((j, o, Outcome::Rejected));
                    Some(j)
                }
            }
        };
        if let Some(a) = loser {
            match c.discipline {
                Discipline::Stack => s.queue.push_front(a),
                Discipline::Queue => s.queue.push_back(a),
            }
        }
    }
    let mut item_of = vec![usize::MAX; n];
    for (o, h) in s.holder.iter().enumerate() {
        item_of[h.unwrap()] = o;
    }
    (log, item_of)
}

#[test]
fn engine_matches_reference_on_random_inputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in 1..=7 {
        for _ in 0..150 {
            let p = random_profile(n, &mut rng);
            let order = random_order(n, &mut rng);
            for code in ENGINE_CODES {
                let c = EngineConfig::from_code(code).unwrap();
                let run = run_engine(&p, &order, c);
                let (log, item_of) = reference_run(&p, &order, c);
                let got: Vec<_> = run
                    .trace
                    .iter()
                    .map(|e| (e.proposer, e.item, e.outcome))
                    .collect();
                assert_eq!(got, log, "{code} on {p:?} order {order:?}");
                assert_eq!(run.matching.as_slice(), &item_of[..]);
            }
        }
    }
}
