//! Text formats: profile files, matchings, agent orders and exact matrices.
//!
//! Profile file:
//!
//! ```text
//! # comment
//! 1: a,b,c,d
//! 2: a,d,c,b
//! @items
//! a: 2,1
//! ```
//!
//! One agent per line, most preferred item first. The optional `@items`
//! section gives item-side orders over agents. Agent indices follow line
//! order; item indices follow the sorted item names (shorter names first,
//! then lexicographic), so `a..z` and `o1..o40` both index naturally.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::model::{AgentOrder, FractionalAssignment, Matching, PreferenceOrder, Profile};
use crate::rational::parse_rational;

/// Display names for agents and items.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Labels {
    pub agents: Vec<String>,
    pub items: Vec<String>,
}

impl Labels {
    /// Agents `1..=n`; items `a..z` when n ≤ 26, otherwise `o1..on`.
    pub fn default_for(n: usize) -> Self {
        let agents = (1..=n).map(|i| i.to_string()).collect();
        let items = if n <= 26 {
            (0..n)
                .map(|i| ((b'a' + i as u8) as char).to_string())
                .collect()
        } else {
            (1..=n).map(|i| format!("o{i}")).collect()
        };
        Self { agents, items }
    }

    pub fn agent(&self, i: usize) -> &str {
        &self.agents[i]
    }

    pub fn item(&self, j: usize) -> &str {
        &self.items[j]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledProfile {
    pub profile: Profile,
    pub labels: Labels,
}

impl LabeledProfile {
    pub fn with_default_labels(profile: Profile) -> Self {
        let labels = Labels::default_for(profile.n());
        Self { profile, labels }
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn valid_name(name: &str) -> bool {
    !name.is_empty() && !name.contains([',', ':']) && !name.contains(char::is_whitespace)
}

struct Entry<'a> {
    line: usize,
    name: &'a str,
    ranked: Vec<&'a str>,
}

fn split_entry(line: usize, text: &str) -> Result<Entry<'_>> {
    let (name, rest) = text
        .split_once(':')
        .ok_or_else(|| parse_err(line, "expected `<name>: <x>,<y>,...`"))?;
    let name = name.trim();
    if !valid_name(name) {
        return Err(parse_err(line, format!("invalid name `{name}`")));
    }
    let ranked: Vec<&str> = rest.split(',').map(str::trim).collect();
    if let Some(bad) = ranked.iter().find(|x| !valid_name(x)) {
        return Err(parse_err(line, format!("invalid entry `{bad}`")));
    }
    Ok(Entry { line, name, ranked })
}

fn resolve(
    entry: &Entry<'_>,
    index: &HashMap<&str, usize>,
    expected: usize,
    what: &str,
) -> Result<PreferenceOrder> {
    let mut seen = vec![false; index.len()];
    let mut ranking = Vec::with_capacity(entry.ranked.len());
    for &x in &entry.ranked {
        let &i = index
            .get(x)
            .ok_or_else(|| parse_err(entry.line, format!("unknown {what} `{x}`")))?;
        if std::mem::replace(&mut seen[i], true) {
            return Err(parse_err(entry.line, format!("duplicate {what} `{x}`")));
        }
        ranking.push(i);
    }
    if ranking.len() != expected {
        return Err(parse_err(
            entry.line,
            format!("ranks {} {what}s, expected {expected}", ranking.len()),
        ));
    }
    Ok(PreferenceOrder::from_valid(ranking))
}

/// Sort key giving `a < b < ... < z` and `o2 < o10`.
fn name_key(name: &str) -> (usize, &str) {
    (name.len(), name)
}

pub fn parse_profile(text: &str) -> Result<LabeledProfile> {
    let mut agent_entries = Vec::new();
    let mut item_entries = Vec::new();
    let mut items_header = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if body == "@items" {
            if items_header.is_some() {
                return Err(parse_err(line, "second `@items` section"));
            }
            items_header = Some(line);
            continue;
        }
        let entry = split_entry(line, body)?;
        if items_header.is_some() {
            item_entries.push(entry);
        } else {
            agent_entries.push(entry);
        }
    }
    let first = agent_entries
        .first()
        .ok_or_else(|| parse_err(text.lines().count().max(1), "no agent lines"))?;

    // Item universe comes from the first agent line; duplicates there are
    // reported by `resolve` below.
    let mut item_names: Vec<&str> = first.ranked.clone();
    item_names.sort_by_key(|s| name_key(s));
    item_names.dedup();
    let item_index: HashMap<&str, usize> = item_names
        .iter()
        .enumerate()
        .map(|(i, &s)| (s, i))
        .collect();

    let n = agent_entries.len();
    let mut agent_index = HashMap::new();
    for (i, e) in agent_entries.iter().enumerate() {
        if agent_index.insert(e.name, i).is_some() {
            return Err(parse_err(e.line, format!("duplicate agent `{}`", e.name)));
        }
    }
    let agent_prefs = agent_entries
        .iter()
        .map(|e| resolve(e, &item_index, n, "item"))
        .collect::<Result<Vec<_>>>()?;

    let labels = Labels {
        agents: agent_entries.iter().map(|e| e.name.to_string()).collect(),
        items: item_names.iter().map(|s| s.to_string()).collect(),
    };

    let profile = match items_header {
        None => Profile::one_sided(agent_prefs),
        Some(header) => {
            let mut slots: Vec<Option<PreferenceOrder>> = vec![None; n];
            for e in &item_entries {
                let &j = item_index
                    .get(e.name)
                    .ok_or_else(|| parse_err(e.line, format!("unknown item `{}`", e.name)))?;
                if slots[j].is_some() {
                    return Err(parse_err(e.line, format!("duplicate item `{}`", e.name)));
                }
                slots[j] = Some(resolve(e, &agent_index, n, "agent")?);
            }
            let item_prefs = slots
                .into_iter()
                .enumerate()
                .map(|(j, s)| {
                    s.ok_or_else(|| {
                        parse_err(
                            header,
                            format!("no order given for item `{}`", labels.items[j]),
                        )
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Profile::two_sided(agent_prefs, item_prefs)
        }
    }
    .map_err(|e| parse_err(first.line, e.to_string()))?;

    Ok(LabeledProfile { profile, labels })
}

pub fn format_profile(lp: &LabeledProfile) -> String {
    let l = &lp.labels;
    let mut out = String::new();
    for (a, pref) in lp.profile.agent_prefs().iter().enumerate() {
        let items: Vec<&str> = pref.iter().map(|o| l.item(o)).collect();
        out.push_str(&format!("{}: {}\n", l.agent(a), items.join(",")));
    }
    if let Some(item_prefs) = lp.profile.item_prefs() {
        out.push_str("@items\n");
        for (o, pref) in item_prefs.iter().enumerate() {
            let agents: Vec<&str> = pref.iter().map(|a| l.agent(a)).collect();
            out.push_str(&format!("{}: {}\n", l.item(o), agents.join(",")));
        }
    }
    out
}

/// `1:c 2:d 3:a 4:b`
pub fn format_matching(m: &Matching, labels: &Labels) -> String {
    m.as_slice()
        .iter()
        .enumerate()
        .map(|(a, &o)| format!("{}:{}", labels.agent(a), labels.item(o)))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Parses a comma- or space-separated list of agent names.
pub fn parse_order(text: &str, labels: &Labels) -> Result<AgentOrder> {
    let index: HashMap<&str, usize> = labels
        .agents
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();
    let order = text
        .split([',', ' '])
        .filter(|s| !s.is_empty())
        .map(|s| {
            index
                .get(s)
                .copied()
                .ok_or_else(|| parse_err(1, format!("unknown agent `{s}` in order")))
        })
        .collect::<Result<Vec<_>>>()?;
    if order.len() != labels.agents.len() {
        return Err(parse_err(
            1,
            format!(
                "order lists {} agents, expected {}",
                order.len(),
                labels.agents.len()
            ),
        ));
    }
    AgentOrder::new(order).map_err(|e| parse_err(1, e.to_string()))
}

pub fn format_order(order: &AgentOrder, labels: &Labels) -> String {
    order
        .as_slice()
        .iter()
        .map(|&a| labels.agent(a))
        .collect::<Vec<_>>()
        .join(",")
}

/// Compact one-line profile such as `a>b>c;a>b>c;b>a>c`, used in reports.
pub fn compact_profile(profile: &Profile, labels: &Labels) -> String {
    profile
        .agent_prefs()
        .iter()
        .map(|p| compact_pref(p, labels))
        .collect::<Vec<_>>()
        .join(";")
}

pub fn compact_pref(pref: &PreferenceOrder, labels: &Labels) -> String {
    pref.iter()
        .map(|o| labels.item(o))
        .collect::<Vec<_>>()
        .join(">")
}

/// One row per agent of space-separated fractions, columns in item order.
pub fn format_matrix(p: &FractionalAssignment, labels: Option<&Labels>) -> String {
    let mut out = String::new();
    if let Some(l) = labels {
        out.push_str(&format!("# {}\n", l.items.join(" ")));
    }
    out.push_str(&p.to_string());
    out
}

pub fn parse_matrix(text: &str) -> Result<FractionalAssignment> {
    let mut rows = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let row = body
            .split_whitespace()
            .map(|cell| {
                parse_rational(cell)
                    .ok_or_else(|| parse_err(i + 1, format!("not a fraction: `{cell}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    FractionalAssignment::new(rows).map_err(|e| parse_err(1, e.to_string()))
}

/// Profiles separated by `%%` lines.
pub fn format_corpus(profiles: &[Profile]) -> String {
    profiles
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let body = format_profile(&LabeledProfile::with_default_labels(p.clone()));
            format!("# profile {}\n{body}", k + 1)
        })
        .collect::<Vec<_>>()
        .join("%%\n")
}

pub fn parse_corpus(text: &str) -> Result<Vec<LabeledProfile>> {
    let mut out = Vec::new();
    let mut chunk = String::new();
    let mut offset = 0;
    let mut start = 0;
    for (i, line) in text.lines().enumerate() {
        if line.trim() == "%%" {
            out.push(parse_profile(&chunk).map_err(|e| shift(e, start))?);
            chunk.clear();
            start = i + 1;
            offset = 0;
            continue;
        }
        chunk.push_str(line);
        chunk.push('\n');
        offset += 1;
    }
    if offset > 0 {
        out.push(parse_profile(&chunk).map_err(|e| shift(e, start))?);
    }
    Ok(out)
}

fn shift(e: Error, by: usize) -> Error {
    match e {
        Error::Parse { line, message } => Error::Parse {
            line: line + by,
            message,
        },
        other => other,
    }
}
