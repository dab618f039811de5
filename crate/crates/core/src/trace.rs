//! Line-per-proposal trace text:
//!
//! ```text
//! 2 | 2 -> a | displaced 1 | 1 3 4 | 2:a | a:2>1
//! ```
//!
//! Columns: proposal index, proposal, outcome, pending agents after the step
//! (next proposer first), partial matching, and non-empty item memories
//! (`-` when a column is empty). Resets are marked `matched, reset`.

use crate::engine::{replay, EngineConfig, Outcome, Snapshot, TraceEvent};
use crate::error::Result;
use crate::io::Labels;
use crate::model::AgentOrder;

fn or_dash(parts: Vec<String>) -> String {
    if parts.is_empty() {
        "-".to_string()
    } else {
        parts.join(" ")
    }
}

pub fn format_outcome(ev: &TraceEvent, labels: &Labels) -> String {
    match ev.outcome {
        Outcome::MatchedUnassigned if ev.reset_occurred => "matched, reset".to_string(),
        Outcome::MatchedUnassigned => "matched".to_string(),
        Outcome::DisplacedHolder(h) => format!("displaced {}", labels.agent(h)),
        Outcome::Rejected => "rejected".to_string(),
    }
}

pub fn format_snapshot_columns(snap: &Snapshot, labels: &Labels) -> [String; 3] {
    let pending = or_dash(
        snap.pending
            .iter()
            .map(|&a| labels.agent(a).to_string())
            .collect(),
    );
    let matching = or_dash(
        snap.holdings
            .iter()
            .enumerate()
            .filter_map(|(a, o)| o.map(|o| format!("{}:{}", labels.agent(a), labels.item(o))))
            .collect(),
    );
    let memories = or_dash(
        snap.memories
            .iter()
            .enumerate()
            .filter(|(_, m)| !m.is_empty())
            .map(|(o, m)| {
                let agents: Vec<&str> = m.iter().map(|&a| labels.agent(a)).collect();
                format!("{}:{}", labels.item(o), agents.join(">"))
            })
            .collect(),
    );
    [pending, matching, memories]
}

/// Formats an engine trace by replaying it from `order`.
pub fn format_trace(
    trace: &[TraceEvent],
    order: &AgentOrder,
    config: EngineConfig,
    labels: &Labels,
) -> Result<String> {
    let (snapshots, _) = replay(order, config, trace)?;
    let mut out = String::new();
    for (k, (ev, snap)) in trace.iter().zip(&snapshots).enumerate() {
        let [pending, matching, memories] = format_snapshot_columns(snap, labels);
        out.push_str(&format!(
            "{} | {} -> {} | {} | {} | {} | {}\n",
            k + 1,
            labels.agent(ev.proposer),
            labels.item(ev.item),
            format_outcome(ev, labels),
            pending,
            matching,
            memories
        ));
    }
    Ok(out)
}
