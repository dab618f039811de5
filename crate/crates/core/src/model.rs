//! Domain vocabulary: agents, items, strict preference orders, profiles,
//! discrete matchings and exact random assignments.
//!
//! Agents and items are dense indices in `0..n`. Names such as `a, b, c` or
//! `1, 2, 3` only exist at the text boundary (see [`crate::io`]).

use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AgentId(pub usize);

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ItemId(pub usize);

fn check_permutation(values: &[usize], what: &str) -> Result<()> {
    let n = values.len();
    let mut seen = vec![false; n];
    for &v in values {
        if v >= n {
            return Err(Error::InvalidInstance(format!(
                "{what}: index {v} out of range 0..{n}"
            )));
        }
        if std::mem::replace(&mut seen[v], true) {
            return Err(Error::InvalidInstance(format!(
                "{what}: index {v} repeated"
            )));
        }
    }
    Ok(())
}

/// A strict linear order over `0..n`, most preferred first.
///
/// Used for agents ranking items and, in two-sided instances, for items
/// ranking agents.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PreferenceOrder {
    ranking: Vec<usize>,
    rank: Vec<usize>,
}

impl PreferenceOrder {
    pub fn new(ranking: Vec<usize>) -> Result<Self> {
        check_permutation(&ranking, "preference order")?;
        Ok(Self::from_valid(ranking))
    }

    pub(crate) fn from_valid(ranking: Vec<usize>) -> Self {
        let mut rank = vec![0; ranking.len()];
        for (r, &x) in ranking.iter().enumerate() {
            rank[x] = r;
        }
        Self { ranking, rank }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_valid((0..n).collect())
    }

    pub fn len(&self) -> usize {
        self.ranking.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranking.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.ranking
    }

    pub fn top(&self) -> usize {
        self.ranking[0]
    }

    /// Zero-based rank: 0 for the most preferred element.
    pub fn rank_of(&self, x: usize) -> usize {
        self.rank[x]
    }

    pub fn prefers(&self, x: usize, y: usize) -> bool {
        self.rank[x] < self.rank[y]
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.ranking.iter().copied()
    }
}

/// Agent-side preferences, plus item-side preferences for two-sided instances.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Profile {
    agent_prefs: Vec<PreferenceOrder>,
    item_prefs: Option<Vec<PreferenceOrder>>,
}

impl Profile {
    pub fn one_sided(agent_prefs: Vec<PreferenceOrder>) -> Result<Self> {
        let n = agent_prefs.len();
        if n == 0 {
            return Err(Error::InvalidInstance("profile has no agents".into()));
        }
        if let Some(bad) = agent_prefs.iter().position(|p| p.len() != n) {
            return Err(Error::InvalidInstance(format!(
                "agent {} ranks {} items, expected {n}",
                bad,
                agent_prefs[bad].len()
            )));
        }
        Ok(Self {
            agent_prefs,
            item_prefs: None,
        })
    }

    pub fn two_sided(
        agent_prefs: Vec<PreferenceOrder>,
        item_prefs: Vec<PreferenceOrder>,
    ) -> Result<Self> {
        let mut profile = Self::one_sided(agent_prefs)?;
        let n = profile.n();
        if item_prefs.len() != n {
            return Err(Error::InvalidInstance(format!(
                "{} item orders for {n} items",
                item_prefs.len()
            )));
        }
        if let Some(bad) = item_prefs.iter().position(|p| p.len() != n) {
            return Err(Error::InvalidInstance(format!(
                "item {bad} ranks {} agents, expected {n}",
                item_prefs[bad].len()
            )));
        }
        profile.item_prefs = Some(item_prefs);
        Ok(profile)
    }

    /// Builds a one-sided profile from raw rankings (item indices, best first).
    pub fn from_rankings(rankings: Vec<Vec<usize>>) -> Result<Self> {
        let prefs = rankings
            .into_iter()
            .map(PreferenceOrder::new)
            .collect::<Result<Vec<_>>>()?;
        Self::one_sided(prefs)
    }

    pub fn n(&self) -> usize {
        self.agent_prefs.len()
    }

    pub fn agent_prefs(&self) -> &[PreferenceOrder] {
        &self.agent_prefs
    }

    pub fn agent(&self, agent: usize) -> &PreferenceOrder {
        &self.agent_prefs[agent]
    }

    pub fn item_prefs(&self) -> Option<&[PreferenceOrder]> {
        self.item_prefs.as_deref()
    }

    pub fn is_two_sided(&self) -> bool {
        self.item_prefs.is_some()
    }

    /// Drops item-side preferences.
    pub fn agent_side(&self) -> Profile {
        Profile {
            agent_prefs: self.agent_prefs.clone(),
            item_prefs: None,
        }
    }

    /// The same profile with one agent's report replaced.
    pub fn with_report(&self, agent: usize, report: PreferenceOrder) -> Result<Profile> {
        if report.len() != self.n() {
            return Err(Error::LengthMismatch {
                left: report.len(),
                right: self.n(),
            });
        }
        let mut out = self.clone();
        out.agent_prefs[agent] = report;
        Ok(out)
    }

    /// Relabels agents: agent `i` of the result is agent `perm[i]` of `self`.
    /// Item-side orders are rewritten to refer to the new agent labels.
    pub fn relabel_agents(&self, perm: &[usize]) -> Result<Profile> {
        check_permutation(perm, "agent relabelling")?;
        if perm.len() != self.n() {
            return Err(Error::LengthMismatch {
                left: perm.len(),
                right: self.n(),
            });
        }
        let agent_prefs = perm.iter().map(|&i| self.agent_prefs[i].clone()).collect();
        let item_prefs = self.item_prefs.as_ref().map(|orders| {
            let mut new_label = vec![0; perm.len()];
            for (new, &old) in perm.iter().enumerate() {
                new_label[old] = new;
            }
            orders
                .iter()
                .map(|o| PreferenceOrder::from_valid(o.iter().map(|a| new_label[a]).collect()))
                .collect()
        });
        Ok(Profile {
            agent_prefs,
            item_prefs,
        })
    }
}

/// A discrete assignment: agent `i` receives `item_of[i]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Matching {
    item_of: Vec<usize>,
}

/// Initial ownership for top trading cycles. Same shape as a matching.
pub type Endowment = Matching;

impl Matching {
    pub fn new(item_of: Vec<usize>) -> Result<Self> {
        check_permutation(&item_of, "matching")?;
        Ok(Self { item_of })
    }

    pub(crate) fn from_valid(item_of: Vec<usize>) -> Self {
        debug_assert!(check_permutation(&item_of, "matching").is_ok());
        Self { item_of }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            item_of: (0..n).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.item_of.len()
    }

    pub fn item_of(&self, agent: AgentId) -> ItemId {
        ItemId(self.item_of[agent.0])
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.item_of
    }

    pub fn agent_of_items(&self) -> Vec<usize> {
        let mut owner = vec![0; self.n()];
        for (a, &o) in self.item_of.iter().enumerate() {
            owner[o] = a;
        }
        owner
    }

    pub fn to_assignment(&self) -> FractionalAssignment {
        FractionalAssignment::from_matching(self)
    }
}

/// The order in which agents initially queue up to propose; position 0 goes first.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AgentOrder(Vec<usize>);

impl AgentOrder {
    pub fn new(order: Vec<usize>) -> Result<Self> {
        check_permutation(&order, "agent order")?;
        Ok(Self(order))
    }

    pub(crate) fn from_valid(order: Vec<usize>) -> Self {
        Self(order)
    }

    pub fn identity(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// `positions()[agent]` is the agent's place in the order.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.0.len()];
        for (p, &a) in self.0.iter().enumerate() {
            pos[a] = p;
        }
        pos
    }
}

/// A random assignment: an n×n doubly stochastic matrix of exact rationals.
/// Rows are agents, column `j` is item `j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FractionalAssignment {
    n: usize,
    entries: Vec<Rational>,
}

impl FractionalAssignment {
    /// Validates that `rows` is square and doubly stochastic with entries in [0, 1].
    pub fn new(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidInstance("empty assignment matrix".into()));
        }
        if let Some(bad) = rows.iter().position(|r| r.len() != n) {
            return Err(Error::InvalidInstance(format!(
                "row {bad} has {} entries, expected {n}",
                rows[bad].len()
            )));
        }
        let out = Self {
            n,
            entries: rows.into_iter().flatten().collect(),
        };
        if out
            .entries
            .iter()
            .any(|p| p < &Rational::zero() || p > &Rational::one())
        {
            return Err(Error::InvalidInstance("entry outside [0, 1]".into()));
        }
        if !out.is_doubly_stochastic() {
            return Err(Error::InvalidInstance(
                "rows and columns must each sum to exactly 1".into(),
            ));
        }
        Ok(out)
    }

    pub fn proportional(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInstance("n must be at least 1".into()));
        }
        let share = Rational::new(1.into(), n.into());
        Ok(Self {
            n,
            entries: vec![share; n * n],
        })
    }

    pub fn from_matching(m: &Matching) -> Self {
        let n = m.n();
        let mut entries = vec![Rational::zero(); n * n];
        for (a, &o) in m.as_slice().iter().enumerate() {
            entries[a * n + o] = Rational::one();
        }
        Self { n, entries }
    }

    /// `counts[a * n + o] / total`, e.g. from enumerating or sampling orders.
    pub fn from_counts(n: usize, counts: &[u64], total: u64) -> Self {
        assert_eq!(counts.len(), n * n);
        assert!(total > 0);
        let entries = counts
            .iter()
            .map(|&c| Rational::new(c.into(), total.into()))
            .collect();
        let out = Self { n, entries };
        debug_assert!(out.is_doubly_stochastic());
        out
    }

    pub(crate) fn from_entries(n: usize, entries: Vec<Rational>) -> Self {
        Self { n, entries }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, agent: usize, item: usize) -> &Rational {
        &self.entries[agent * self.n + item]
    }

    pub fn row(&self, agent: usize) -> &[Rational] {
        &self.entries[agent * self.n..(agent + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Rational]> {
        self.entries.chunks(self.n)
    }

    pub fn is_doubly_stochastic(&self) -> bool {
        let one = Rational::one();
        let rows_ok = self.rows().all(|r| r.iter().sum::<Rational>() == one);
        let cols_ok =
            (0..self.n).all(|j| (0..self.n).map(|i| self.get(i, j)).sum::<Rational>() == one);
        rows_ok && cols_ok
    }

    /// True when every entry is 0 or 1.
    pub fn is_permutation_matrix(&self) -> bool {
        self.entries.iter().all(|p| p.is_zero() || p.is_one())
    }
}

impl fmt::Display for FractionalAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.rows() {
            let cells: Vec<String> = row.iter().map(|p| p.to_string()).collect();
            writeln!(f, "{}", cells.join(" "))?;
        }
        Ok(())
    }
}
