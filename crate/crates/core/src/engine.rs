//! The unified proposal machine.
//!
//! Agents propose to items; items hold at most one agent and decide between
//! the proposer and their current holder using a *fictitious* preference
//! built from the proposals they have seen. Three switches select one of
//! eight algorithms, named by three-letter codes:
//!
//! | memory    | acceptance   | discipline | code |
//! |-----------|--------------|------------|------|
//! | Permanent | AcceptFirst  | Stack      | PFS  |
//! | Permanent | AcceptFirst  | Queue      | PFQ  |
//! | Permanent | AcceptLast   | Stack      | PLS  |
//! | Permanent | AcceptLast   | Queue      | PLQ  |
//! | Temporary | AcceptFirst  | Stack      | TFS  |
//! | Temporary | AcceptFirst  | Queue      | TFQ  |
//! | Temporary | AcceptLast   | Stack      | TLS  |
//! | Temporary | AcceptLast   | Queue      | TLQ  |
//!
//! One step, for the agent `j` at the front of the pending container:
//!
//! 1. `j` proposes to its best item `o` that is not in `blocked(j)`.
//! 2. `o` unmatched: `j` takes it. Permanent memory records `[j]`; temporary
//!    memory wipes every item memory and every blocked set (a *reset*).
//! 3. `o` held by `h` with empty memory (only after a reset): `h` is displaced
//!    and `o` remembers `[j, h]`.
//! 4. Accept-First with non-empty memory: `j` is rejected, appended to the
//!    memory if unseen, and `o` joins `blocked(j)`.
//! 5. Accept-Last with non-empty memory: if `j` is already remembered it is
//!    rejected as in 4; otherwise `h` is displaced, `j` goes on top of the
//!    memory and `o` joins `blocked(h)`.
//!
//! Rejected and displaced agents go back on top of a stack or to the back of
//! a queue. The run ends when nobody is pending.

use std::collections::VecDeque;
use std::fmt;

use crate::error::{Error, Result};
use crate::model::{AgentOrder, Matching, Profile};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Memory {
    Permanent,
    Temporary,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Acceptance {
    AcceptFirst,
    AcceptLast,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Discipline {
    Stack,
    Queue,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct EngineConfig {
    pub memory: Memory,
    pub acceptance: Acceptance,
    pub discipline: Discipline,
}

impl EngineConfig {
    pub const fn new(memory: Memory, acceptance: Acceptance, discipline: Discipline) -> Self {
        Self {
            memory,
            acceptance,
            discipline,
        }
    }

    pub const PFS: Self = Self::new(
        Memory::Permanent,
        Acceptance::AcceptFirst,
        Discipline::Stack,
    );
    pub const PFQ: Self = Self::new(
        Memory::Permanent,
        Acceptance::AcceptFirst,
        Discipline::Queue,
    );
    pub const PLS: Self = Self::new(Memory::Permanent, Acceptance::AcceptLast, Discipline::Stack);
    pub const PLQ: Self = Self::new(Memory::Permanent, Acceptance::AcceptLast, Discipline::Queue);
    pub const TFS: Self = Self::new(
        Memory::Temporary,
        Acceptance::AcceptFirst,
        Discipline::Stack,
    );
    pub const TFQ: Self = Self::new(
        Memory::Temporary,
        Acceptance::AcceptFirst,
        Discipline::Queue,
    );
    pub const TLS: Self = Self::new(Memory::Temporary, Acceptance::AcceptLast, Discipline::Stack);
    pub const TLQ: Self = Self::new(Memory::Temporary, Acceptance::AcceptLast, Discipline::Queue);

    pub const ALL: [Self; 8] = [
        Self::PFS,
        Self::PFQ,
        Self::PLS,
        Self::PLQ,
        Self::TFS,
        Self::TFQ,
        Self::TLS,
        Self::TLQ,
    ];

    pub fn code(&self) -> &'static str {
        use Acceptance::*;
        use Discipline::*;
        use Memory::*;
        match (self.memory, self.acceptance, self.discipline) {
            (Permanent, AcceptFirst, Stack) => "PFS",
            (Permanent, AcceptFirst, Queue) => "PFQ",
            (Permanent, AcceptLast, Stack) => "PLS",
            (Permanent, AcceptLast, Queue) => "PLQ",
            (Temporary, AcceptFirst, Stack) => "TFS",
            (Temporary, AcceptFirst, Queue) => "TFQ",
            (Temporary, AcceptLast, Stack) => "TLS",
            (Temporary, AcceptLast, Queue) => "TLQ",
        }
    }

    pub fn from_code(code: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.code() == code)
    }

    /// Worst-case proposal count: n² with permanent memory, n³ with temporary.
    pub fn proposal_bound(&self, n: usize) -> usize {
        match self.memory {
            Memory::Permanent => n * n,
            Memory::Temporary => n * n * n,
        }
    }
}

impl fmt::Display for EngineConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Outcome {
    /// The item was unmatched and the proposer took it.
    MatchedUnassigned,
    /// The proposer took the item from this agent.
    DisplacedHolder(usize),
    Rejected,
}

/// One proposal and what came of it.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct TraceEvent {
    pub proposer: usize,
    pub item: usize,
    pub outcome: Outcome,
    /// Set when a temporary-memory run wiped all item memories.
    pub reset_occurred: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EngineResult {
    pub matching: Matching,
    pub proposal_count: usize,
    pub trace: Vec<TraceEvent>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ItemState {
    pub holder: Option<usize>,
    /// Fictitious preference over agents, most preferred first.
    pub memory: Vec<usize>,
}

/// Full mutable state of one run.
#[derive(Clone, Debug)]
pub struct EngineState {
    config: EngineConfig,
    n: usize,
    pending: VecDeque<usize>,
    blocked: Vec<bool>,
    items: Vec<ItemState>,
    item_of: Vec<Option<usize>>,
    matched_count: usize,
    proposal_count: usize,
    reset_count: usize,
}

impl EngineState {
    pub fn new(order: &AgentOrder, config: EngineConfig) -> Self {
        let n = order.len();
        Self {
            config,
            n,
            pending: order.as_slice().iter().copied().collect(),
            blocked: vec![false; n * n],
            items: vec![ItemState::default(); n],
            item_of: vec![None; n],
            matched_count: 0,
            proposal_count: 0,
            reset_count: 0,
        }
    }

    pub fn config(&self) -> EngineConfig {
        self.config
    }

    /// Pending agents, next proposer first.
    pub fn pending(&self) -> impl Iterator<Item = usize> + '_ {
        self.pending.iter().copied()
    }

    pub fn is_done(&self) -> bool {
        self.pending.is_empty()
    }

    pub fn item(&self, item: usize) -> &ItemState {
        &self.items[item]
    }

    pub fn items(&self) -> &[ItemState] {
        &self.items
    }

    /// Item currently held by each agent.
    pub fn holdings(&self) -> &[Option<usize>] {
        &self.item_of
    }

    pub fn is_blocked(&self, agent: usize, item: usize) -> bool {
        self.blocked[agent * self.n + item]
    }

    pub fn matched_count(&self) -> usize {
        self.matched_count
    }

    pub fn proposal_count(&self) -> usize {
        self.proposal_count
    }

    pub fn reset_count(&self) -> usize {
        self.reset_count
    }

    fn requeue(&mut self, agent: usize) {
        match self.config.discipline {
            Discipline::Stack => self.pending.push_front(agent),
            Discipline::Queue => self.pending.push_back(agent),
        }
    }

    /// Decides the next proposal without changing the state.
    pub fn next_event(&self, profile: &Profile) -> Option<TraceEvent> {
        let &j = self.pending.front()?;
        let row = &self.blocked[j * self.n..(j + 1) * self.n];
        // An unmatched agent implies an unmatched item, and unmatched items
        // are never blocked, so this always finds something.
        let o = profile
            .agent(j)
            .iter()
            .find(|&o| !row[o])
            .expect("every agent has an unblocked item");
        let state = &self.items[o];
        let outcome = match state.holder {
            None => Outcome::MatchedUnassigned,
            Some(h) if state.memory.is_empty() => Outcome::DisplacedHolder(h),
            Some(h) => match self.config.acceptance {
                Acceptance::AcceptFirst => Outcome::Rejected,
                Acceptance::AcceptLast if state.memory.contains(&j) => Outcome::Rejected,
                Acceptance::AcceptLast => Outcome::DisplacedHolder(h),
            },
        };
        Some(TraceEvent {
            proposer: j,
            item: o,
            outcome,
            reset_occurred: outcome == Outcome::MatchedUnassigned
                && self.config.memory == Memory::Temporary,
        })
    }

    /// Applies one event, checking that it is a legal transition from the
    /// current state. Used both by the engine and by trace replay.
    pub fn apply(&mut self, ev: &TraceEvent) -> Result<()> {
        let index = self.proposal_count + 1;
        let fail = |message: String| Error::Replay { index, message };
        let n = self.n;
        if ev.proposer >= n || ev.item >= n {
            return Err(fail("agent or item out of range".into()));
        }
        if self.pending.front() != Some(&ev.proposer) {
            return Err(fail(format!(
                "agent {} is not next to propose (front is {:?})",
                ev.proposer,
                self.pending.front()
            )));
        }
        if self.is_blocked(ev.proposer, ev.item) {
            return Err(fail(format!(
                "item {} is blocked for agent {}",
                ev.item, ev.proposer
            )));
        }
        let expect_reset =
            ev.outcome == Outcome::MatchedUnassigned && self.config.memory == Memory::Temporary;
        if ev.reset_occurred != expect_reset {
            return Err(fail("reset flag inconsistent with outcome".into()));
        }
        let (j, o) = (ev.proposer, ev.item);
        let holder = self.items[o].holder;
        match ev.outcome {
            Outcome::MatchedUnassigned => {
                if holder.is_some() {
                    return Err(fail(format!("item {o} is not unmatched")));
                }
                self.pending.pop_front();
                self.items[o].holder = Some(j);
                self.item_of[j] = Some(o);
                self.matched_count += 1;
                match self.config.memory {
                    Memory::Permanent => self.items[o].memory = vec![j],
                    Memory::Temporary => {
                        for item in &mut self.items {
                            item.memory.clear();
                        }
                        self.blocked.iter_mut().for_each(|b| *b = false);
                        self.reset_count += 1;
                    }
                }
            }
            Outcome::DisplacedHolder(h) => {
                if holder != Some(h) {
                    return Err(fail(format!("item {o} is not held by agent {h}")));
                }
                let memory = &mut self.items[o].memory;
                if memory.is_empty() {
                    memory.extend([j, h]);
                } else {
                    if self.config.acceptance == Acceptance::AcceptFirst || memory.contains(&j) {
                        return Err(fail(format!("item {o} cannot prefer agent {j}")));
                    }
                    memory.insert(0, j);
                    self.blocked[h * n + o] = true;
                }
                self.pending.pop_front();
                self.items[o].holder = Some(j);
                self.item_of[j] = Some(o);
                self.item_of[h] = None;
                self.requeue(h);
            }
            Outcome::Rejected => {
                let memory = &mut self.items[o].memory;
                if holder.is_none() || memory.is_empty() {
                    return Err(fail(format!("item {o} cannot reject")));
                }
                if self.config.acceptance == Acceptance::AcceptLast && !memory.contains(&j) {
                    return Err(fail(format!("item {o} must accept unseen agent {j}")));
                }
                if !memory.contains(&j) {
                    memory.push(j);
                }
                self.blocked[j * n + o] = true;
                self.pending.pop_front();
                self.requeue(j);
            }
        }
        self.proposal_count += 1;
        Ok(())
    }

    /// Runs one proposal. Returns `None` once nobody is pending.
    pub fn step(&mut self, profile: &Profile) -> Option<TraceEvent> {
        let ev = self.next_event(profile)?;
        self.apply(&ev).expect("engine produced an illegal event");
        let bound = self.config.proposal_bound(self.n);
        assert!(
            self.proposal_count <= bound,
            "{} exceeded {bound} proposals at n = {}",
            self.config,
            self.n
        );
        Some(ev)
    }

    pub fn to_matching(&self) -> Option<Matching> {
        let items: Option<Vec<usize>> = self.item_of.iter().copied().collect();
        items.map(Matching::from_valid)
    }
}

fn check_order(profile: &Profile, order: &AgentOrder) {
    assert_eq!(
        profile.n(),
        order.len(),
        "agent order length does not match the profile"
    );
}

pub fn run_engine(profile: &Profile, order: &AgentOrder, config: EngineConfig) -> EngineResult {
    check_order(profile, order);
    let mut state = EngineState::new(order, config);
    let mut trace = Vec::new();
    while let Some(ev) = state.step(profile) {
        trace.push(ev);
    }
    EngineResult {
        matching: state.to_matching().expect("finished run is complete"),
        proposal_count: state.proposal_count(),
        trace,
    }
}

/// Same result as [`run_engine`] without recording the trace.
pub fn run_engine_matching(
    profile: &Profile,
    order: &AgentOrder,
    config: EngineConfig,
) -> Matching {
    check_order(profile, order);
    let mut state = EngineState::new(order, config);
    while state.step(profile).is_some() {}
    state.to_matching().expect("finished run is complete")
}

/// State after each event of a replayed trace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Snapshot {
    pub pending: Vec<usize>,
    pub holdings: Vec<Option<usize>>,
    pub memories: Vec<Vec<usize>>,
}

/// Applies `trace` to a fresh state, validating every transition.
pub fn replay(
    order: &AgentOrder,
    config: EngineConfig,
    trace: &[TraceEvent],
) -> Result<(Vec<Snapshot>, Option<Matching>)> {
    let mut state = EngineState::new(order, config);
    let mut snapshots = Vec::with_capacity(trace.len());
    for ev in trace {
        state.apply(ev)?;
        snapshots.push(Snapshot {
            pending: state.pending().collect(),
            holdings: state.holdings().to_vec(),
            memories: state.items().iter().map(|s| s.memory.clone()).collect(),
        });
    }
    if !state.is_done() {
        return Err(Error::Replay {
            index: trace.len(),
            message: "trace ends with agents still pending".into(),
        });
    }
    Ok((snapshots, state.to_matching()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn standard() -> Profile {
        Profile::from_rankings(vec![
            vec![0, 1, 2, 3],
            vec![0, 1, 2, 3],
            vec![0, 1, 2, 3],
            vec![1, 0, 2, 3],
        ])
        .unwrap()
    }

    #[test]
    fn codes_round_trip() {
        for c in EngineConfig::ALL {
            assert_eq!(EngineConfig::from_code(c.code()), Some(c));
        }
        assert_eq!(EngineConfig::from_code("XYZ"), None);
    }

    #[test]
    fn single_agent() {
        let p = Profile::from_rankings(vec![vec![0]]).unwrap();
        for c in EngineConfig::ALL {
            let r = run_engine(&p, &AgentOrder::identity(1), c);
            assert_eq!(r.matching.as_slice(), &[0]);
            assert_eq!(r.proposal_count, 1);
        }
    }

    #[test]
    fn pfs_standard_profile() {
        let r = run_engine(&standard(), &AgentOrder::identity(4), EngineConfig::PFS);
        assert_eq!(r.matching.as_slice(), &[0, 1, 2, 3]);
        assert_eq!(r.proposal_count, 10);
        assert_eq!(r.trace.len(), 10);
    }

    #[test]
    fn reset_flag_only_for_temporary_matches() {
        for c in EngineConfig::ALL {
            let r = run_engine(&standard(), &AgentOrder::identity(4), c);
            for ev in &r.trace {
                let expected =
                    ev.outcome == Outcome::MatchedUnassigned && c.memory == Memory::Temporary;
                assert_eq!(ev.reset_occurred, expected);
            }
        }
    }

    #[test]
    fn replay_reproduces_the_run() {
        for c in EngineConfig::ALL {
            let order = AgentOrder::new(vec![2, 0, 3, 1]).unwrap();
            let r = run_engine(&standard(), &order, c);
            let (snaps, m) = replay(&order, c, &r.trace).unwrap();
            assert_eq!(m.as_ref(), Some(&r.matching));
            assert_eq!(snaps.len(), r.proposal_count);
            assert_eq!(run_engine_matching(&standard(), &order, c), r.matching);
        }
    }

    #[test]
    fn replay_rejects_tampered_traces() {
        let order = AgentOrder::identity(4);
        let r = run_engine(&standard(), &order, EngineConfig::TLS);

        let mut wrong_proposer = r.trace.clone();
        wrong_proposer[1].proposer = 3;
        assert!(matches!(
            replay(&order, EngineConfig::TLS, &wrong_proposer),
            Err(Error::Replay { index: 2, .. })
        ));

        let mut wrong_outcome = r.trace.clone();
        wrong_outcome[0].outcome = Outcome::Rejected;
        wrong_outcome[0].reset_occurred = false;
        assert!(replay(&order, EngineConfig::TLS, &wrong_outcome).is_err());

        let truncated = &r.trace[..r.trace.len() - 1];
        assert!(replay(&order, EngineConfig::TLS, truncated).is_err());
    }
}
