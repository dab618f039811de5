//! Checkers for efficiency, stochastic dominance, strategyproofness and the
//! conditional egalitarian bound, plus sweeps over profile sets.

use std::fmt;

use num_traits::Zero;

use crate::classic::top_trading_cycles;
use crate::enumerate::{all_orders, permutations};
use crate::error::{Error, Result};
use crate::io::{compact_pref, compact_profile, format_order, Labels};
use crate::lottery::{exact_lottery, DEFAULT_ENUMERATION_LIMIT};
use crate::mechanism::Mechanism;
use crate::model::{AgentOrder, FractionalAssignment, Matching, PreferenceOrder, Profile};
use crate::rational::Rational;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum DominanceVerdict {
    StrictlyDominates,
    /// Every prefix sum is equal, which for rows summing to one means `p = q`.
    Equal,
    DominatedBy,
    Incomparable,
}

impl DominanceVerdict {
    pub fn weakly_dominates(self) -> bool {
        matches!(self, Self::StrictlyDominates | Self::Equal)
    }
}

/// First-order stochastic dominance of `p` over `q` for an agent with `pref`.
pub fn sd_dominates(
    p: &[Rational],
    q: &[Rational],
    pref: &PreferenceOrder,
) -> Result<DominanceVerdict> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    if p.len() != pref.len() {
        return Err(Error::LengthMismatch {
            left: p.len(),
            right: pref.len(),
        });
    }
    let (mut sp, mut sq) = (Rational::zero(), Rational::zero());
    let (mut above, mut below) = (false, false);
    for o in pref.iter() {
        sp += &p[o];
        sq += &q[o];
        above |= sp > sq;
        below |= sp < sq;
    }
    Ok(match (above, below) {
        (false, false) => DominanceVerdict::Equal,
        (true, false) => DominanceVerdict::StrictlyDominates,
        (false, true) => DominanceVerdict::DominatedBy,
        (true, true) => DominanceVerdict::Incomparable,
    })
}

/// No trade cycle improves anyone: `m` is a fixed point of top trading cycles.
pub fn is_pareto_efficient(m: &Matching, profile: &Profile) -> bool {
    top_trading_cycles(profile, m) == *m
}

/// Acyclicity of `x τ y` (some agent with positive probability of `y` ranks
/// `x` above `y`), which characterizes ordinal efficiency.
pub fn is_ordinally_efficient(p: &FractionalAssignment, profile: &Profile) -> bool {
    tau_cycle(p, profile).is_none()
}

/// A cycle of items `x0 τ x1 τ ... τ x0`, if one exists.
pub fn tau_cycle(p: &FractionalAssignment, profile: &Profile) -> Option<Vec<usize>> {
    let n = profile.n();
    let mut edge = vec![vec![false; n]; n];
    for a in 0..n {
        let pref = profile.agent(a).as_slice();
        for (r, &y) in pref.iter().enumerate() {
            if !p.get(a, y).is_zero() {
                for &x in &pref[..r] {
                    edge[x][y] = true;
                }
            }
        }
    }
    // Iterative DFS with colours; returns the first back-edge cycle.
    let mut colour = vec![0u8; n];
    let mut parent = vec![usize::MAX; n];
    for root in 0..n {
        if colour[root] != 0 {
            continue;
        }
        let mut stack = vec![(root, 0usize)];
        colour[root] = 1;
        while let Some(&mut (u, ref mut next)) = stack.last_mut() {
            if let Some(v) = (*next..n).find(|&v| edge[u][v]) {
                *next = v + 1;
                match colour[v] {
                    0 => {
                        colour[v] = 1;
                        parent[v] = u;
                        stack.push((v, 0));
                    }
                    1 => {
                        let mut cycle = vec![u];
                        let mut w = u;
                        while w != v {
                            w = parent[w];
                            cycle.push(w);
                        }
                        cycle.reverse();
                        return Some(cycle);
                    }
                    _ => {}
                }
            } else {
                colour[u] = 2;
                stack.pop();
            }
        }
    }
    None
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum SPVerdict {
    /// The truthful row weakly dominates every misreport row.
    Strategyproof,
    /// No misreport row strictly dominates, but some is not dominated.
    WeaklySPOnly,
    NotWeaklySP,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SPEntry {
    pub misreport: PreferenceOrder,
    pub row: Vec<Rational>,
    /// Misreport row compared with the truthful one.
    pub verdict: DominanceVerdict,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SPReport {
    pub agent: usize,
    pub truthful_row: Vec<Rational>,
    pub entries: Vec<SPEntry>,
    pub overall: SPVerdict,
}

impl SPReport {
    /// The first misreport that strictly SD-dominates truthful reporting.
    pub fn dominating_misreport(&self) -> Option<&SPEntry> {
        self.entries
            .iter()
            .find(|e| e.verdict == DominanceVerdict::StrictlyDominates)
    }
}

/// The assignment a mechanism gives: the exact lottery for `R-` mechanisms,
/// otherwise the outcome from the identity order.
pub fn assignment_of(mech: Mechanism, profile: &Profile) -> Result<FractionalAssignment> {
    if mech.randomized {
        Ok(exact_lottery(mech, profile)?.assignment)
    } else {
        Ok(mech
            .run(profile, &AgentOrder::identity(profile.n()))?
            .to_assignment())
    }
}

/// Compares `agent`'s truthful row with its row under each of the other
/// `n! - 1` reports, everyone else reporting truthfully.
pub fn check_strategyproofness(
    mech: Mechanism,
    profile: &Profile,
    agent: usize,
) -> Result<SPReport> {
    let n = profile.n();
    if n > DEFAULT_ENUMERATION_LIMIT {
        return Err(Error::LimitExceeded {
            n,
            limit: DEFAULT_ENUMERATION_LIMIT,
        });
    }
    let truth = profile.agent(agent).clone();
    let truthful_row = assignment_of(mech, profile)?.row(agent).to_vec();
    let mut entries = Vec::new();
    for ranking in permutations(n) {
        if ranking == truth.as_slice() {
            continue;
        }
        let report = PreferenceOrder::new(ranking)?;
        let row = assignment_of(mech, &profile.with_report(agent, report.clone())?)?
            .row(agent)
            .to_vec();
        let verdict = sd_dominates(&row, &truthful_row, &truth)?;
        entries.push(SPEntry {
            misreport: report,
            row,
            verdict,
        });
    }
    let overall = if entries
        .iter()
        .any(|e| e.verdict == DominanceVerdict::StrictlyDominates)
    {
        SPVerdict::NotWeaklySP
    } else if entries.iter().all(|e| {
        matches!(
            e.verdict,
            DominanceVerdict::Equal | DominanceVerdict::DominatedBy
        )
    }) {
        SPVerdict::Strategyproof
    } else {
        SPVerdict::WeaklySPOnly
    };
    Ok(SPReport {
        agent,
        truthful_row,
        entries,
        overall,
    })
}

/// Whether some matching gives every agent one of its top `k` items
/// (augmenting-path bipartite matching).
pub fn feasible_top_k(profile: &Profile, k: usize) -> bool {
    let n = profile.n();
    let k = k.min(n);
    let mut owner: Vec<Option<usize>> = vec![None; n];
    fn augment(
        a: usize,
        profile: &Profile,
        k: usize,
        seen: &mut [bool],
        owner: &mut [Option<usize>],
    ) -> bool {
        for &o in &profile.agent(a).as_slice()[..k] {
            if seen[o] {
                continue;
            }
            seen[o] = true;
            if owner[o].is_none_or(|b| augment(b, profile, k, seen, owner)) {
                owner[o] = Some(a);
                return true;
            }
        }
        false
    }
    (0..n).all(|a| augment(a, profile, k, &mut vec![false; n], &mut owner))
}

/// An order from which the mechanism leaves some agent outside its top `k`
/// although a top-`k` matching exists.
pub fn conditional_bound_witness(
    mech: Mechanism,
    profile: &Profile,
    k: usize,
) -> Result<Option<AgentOrder>> {
    let n = profile.n();
    if !feasible_top_k(profile, k) {
        return Ok(None);
    }
    if n > DEFAULT_ENUMERATION_LIMIT {
        return Err(Error::LimitExceeded {
            n,
            limit: DEFAULT_ENUMERATION_LIMIT,
        });
    }
    let orders: Vec<AgentOrder> = if mech.base.uses_order() {
        all_orders(n).collect()
    } else {
        vec![AgentOrder::identity(n)]
    };
    for order in orders {
        let p = mech.run(profile, &order)?.to_assignment();
        let ok = (0..n).all(|a| {
            p.row(a)
                .iter()
                .enumerate()
                .all(|(o, x)| x.is_zero() || profile.agent(a).rank_of(o) < k)
        });
        if !ok {
            return Ok(Some(order));
        }
    }
    Ok(None)
}

/// Vacuously true when no top-`k` matching exists; otherwise every initial
/// order must give every agent a top-`k` item.
pub fn satisfies_conditional_bound(mech: Mechanism, profile: &Profile, k: usize) -> Result<bool> {
    Ok(conditional_bound_witness(mech, profile, k)?.is_none())
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Axiom {
    /// Every run, from every initial order, is Pareto efficient.
    ExPost,
    /// The exact lottery is ordinally efficient.
    Ordinal,
    /// No agent can SD-improve its exact lottery row by misreporting.
    WeakStrategyproof,
    ConditionalBound(usize),
}

impl Axiom {
    pub fn name(&self) -> String {
        match self {
            Axiom::ExPost => "ex-post".into(),
            Axiom::Ordinal => "ordinal".into(),
            Axiom::WeakStrategyproof => "strategyproof".into(),
            Axiom::ConditionalBound(k) => format!("bound-k{k}"),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim().to_ascii_lowercase();
        Ok(match t.as_str() {
            "ex-post" | "expost" | "pareto" => Axiom::ExPost,
            "ordinal" => Axiom::Ordinal,
            "strategyproof" | "sp" => Axiom::WeakStrategyproof,
            _ => match t.strip_prefix("bound-k").and_then(|k| k.parse().ok()) {
                Some(k) if k >= 1 => Axiom::ConditionalBound(k),
                _ => return Err(Error::Config(format!("unknown axiom `{text}`"))),
            },
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub profile: Profile,
    pub order: Option<AgentOrder>,
    pub misreport: Option<(usize, PreferenceOrder)>,
}

/// One line of an axiom report.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomLine {
    pub axiom: Axiom,
    pub mechanism: Mechanism,
    pub n: usize,
    pub profiles_checked: u64,
    pub witness: Option<Witness>,
}

impl AxiomLine {
    pub fn passed(&self) -> bool {
        self.witness.is_none()
    }
}

impl fmt::Display for AxiomLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        write!(
            f,
            "{}, {}, {}, {}",
            self.axiom.name(),
            self.mechanism,
            self.n,
            verdict
        )?;
        let Some(w) = &self.witness else {
            return write!(f, ", -, -, -");
        };
        let labels = Labels::default_for(self.n);
        let order = w
            .order
            .as_ref()
            .map_or("-".to_string(), |o| format_order(o, &labels));
        let mis = w.misreport.as_ref().map_or("-".to_string(), |(a, r)| {
            format!("{}={}", labels.agent(*a), compact_pref(r, &labels))
        });
        write!(
            f,
            ", {}, {}, {}",
            compact_profile(&w.profile, &labels),
            order,
            mis
        )
    }
}

/// The first violation of `axiom` on `profile`, if any.
pub fn find_violation(mech: Mechanism, axiom: Axiom, profile: &Profile) -> Result<Option<Witness>> {
    let n = profile.n();
    let wit = |order, misreport| {
        Some(Witness {
            profile: profile.clone(),
            order,
            misreport,
        })
    };
    Ok(match axiom {
        Axiom::ExPost => {
            if !mech.is_discrete() {
                return Err(Error::Config(format!(
                    "ex-post check needs a discrete mechanism, got {mech}"
                )));
            }
            let orders: Vec<AgentOrder> = if mech.base.uses_order() {
                if n > DEFAULT_ENUMERATION_LIMIT {
                    return Err(Error::LimitExceeded {
                        n,
                        limit: DEFAULT_ENUMERATION_LIMIT,
                    });
                }
                all_orders(n).collect()
            } else {
                vec![AgentOrder::identity(n)]
            };
            let mut found = None;
            for o in orders {
                if !is_pareto_efficient(&mech.run_matching(profile, &o)?, profile) {
                    found = wit(Some(o), None);
                    break;
                }
            }
            found
        }
        Axiom::Ordinal => {
            let p = exact_lottery(mech, profile)?.assignment;
            if is_ordinally_efficient(&p, profile) {
                None
            } else {
                wit(None, None)
            }
        }
        Axiom::WeakStrategyproof => {
            let mech = mech.randomize();
            let mut found = None;
            for a in 0..n {
                let report = check_strategyproofness(mech, profile, a)?;
                if let Some(e) = report.dominating_misreport() {
                    found = wit(None, Some((a, e.misreport.clone())));
                    break;
                }
            }
            found
        }
        Axiom::ConditionalBound(k) => {
            conditional_bound_witness(mech, profile, k)?.and_then(|o| wit(Some(o), None))
        }
    })
}

/// Checks `axiom` on each profile in turn and stops at the first violation.
pub fn sweep<I>(mech: Mechanism, axiom: Axiom, n: usize, profiles: I) -> Result<AxiomLine>
where
    I: IntoIterator<Item = Profile>,
{
    let mut checked = 0;
    for p in profiles {
        checked += 1;
        if let Some(w) = find_violation(mech, axiom, &p)? {
            return Ok(AxiomLine {
                axiom,
                mechanism: mech,
                n,
                profiles_checked: checked,
                witness: Some(w),
            });
        }
    }
    Ok(AxiomLine {
        axiom,
        mechanism: mech,
        n,
        profiles_checked: checked,
        witness: None,
    })
}
