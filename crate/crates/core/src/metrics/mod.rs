//! Per-episode diagnostics and grouped report tables.

mod report;

use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use report::{aggregate, GroupKey, Report, ReportRow};

use crate::environment::{EnvType, QueryKind, SessionStatus};
use crate::protocol::EpisodeRecord;
use crate::solver::Count;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("episode {0} has not terminated")]
    IncompleteRecord(String),
    #[error("no episodes")]
    NoEpisodes,
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: malformed record: {detail}")]
    MalformedRecord {
        path: String,
        line: usize,
        detail: String,
    },
    #[error("unknown group key {0:?} (expected model, size, n_missing, env_type or condition)")]
    UnknownGroupKey(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LogBase {
    #[default]
    E,
    Two,
}

impl LogBase {
    pub fn log(self, x: f64) -> f64 {
        match self {
            LogBase::E => x.ln(),
            LogBase::Two => x.log2(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeMetrics {
    pub puzzle_id: String,
    pub agent: String,
    pub size: String,
    pub n_missing: usize,
    pub env_type: EnvType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition: Option<String>,
    pub status: SessionStatus,
    pub accuracy: u8,
    pub steps: usize,
    pub tool_calls: usize,
    pub valid_calls: usize,
    pub fact_calls: usize,
    pub relation_calls: usize,
    pub effective_calls: usize,
    /// Valid calls whose effectiveness could not be decided (counts overflowed).
    pub undecidable_calls: usize,
    pub eff_rate: f64,
    /// Effective calls over valid calls.
    pub eff_rate_valid: f64,
    /// One entry per valid call; `None` where a count overflowed.
    pub ig_series: Vec<Option<f64>>,
    /// Mean over valid calls with a defined information gain.
    pub ig_mean: f64,
    /// Sum of defined gains over all tool calls, invalid calls contributing zero.
    pub ig_mean_all: f64,
    pub ir: f64,
    pub ir_eff: f64,
    pub insufficient: bool,
    pub k_star: usize,
    pub counts_trace: Vec<Count>,
    pub tool_tokens: u64,
    pub total_tokens: u64,
    pub log_base: LogBase,
}

fn ratio(num: f64, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num / den as f64
    }
}

/// Condition label for grouping: budget and pricing conditions joined with `+`.
pub fn condition_label(record: &EpisodeRecord) -> Option<String> {
    match (&record.budget_condition, &record.pricing_condition) {
        (None, None) => None,
        (Some(b), None) => Some(b.clone()),
        (None, Some(p)) => Some(p.clone()),
        (Some(b), Some(p)) => Some(format!("{b}+{p}")),
    }
}

pub fn score_episode(record: &EpisodeRecord) -> Result<EpisodeMetrics, MetricsError> {
    score_episode_with(record, LogBase::E)
}

/// Scores a terminated episode from its logged counts; nothing is recounted.
pub fn score_episode_with(
    record: &EpisodeRecord,
    base: LogBase,
) -> Result<EpisodeMetrics, MetricsError> {
    if record.status == SessionStatus::Running {
        return Err(MetricsError::IncompleteRecord(record.puzzle_id.clone()));
    }
    let tool_calls = record.queries.len();
    let mut valid_calls = 0;
    let mut effective = 0;
    let mut undecidable = 0;
    let mut ig_series = Vec::new();
    let (mut fact_calls, mut relation_calls) = (0, 0);
    for q in &record.queries {
        match q.kind {
            Some(QueryKind::Fact) => fact_calls += 1,
            Some(QueryKind::Relation) => relation_calls += 1,
            None => {}
        }
        if !q.verdict.valid {
            continue;
        }
        valid_calls += 1;
        match q.reduced {
            Some(true) => effective += 1,
            Some(false) => {}
            None => undecidable += 1,
        }
        ig_series.push(match (q.count_before, q.count_after) {
            (Count::Exact(b), Count::Exact(a)) if a > 0 => {
                Some(base.log(b as f64) - base.log(a as f64))
            }
            _ => None,
        });
    }
    let defined: Vec<f64> = ig_series.iter().flatten().copied().collect();
    let ig_sum: f64 = defined.iter().sum();
    let k = record.k_star;
    Ok(EpisodeMetrics {
        puzzle_id: record.puzzle_id.clone(),
        agent: record.agent.clone(),
        size: record.size.clone(),
        n_missing: record.k_star,
        env_type: record.env_type,
        condition: condition_label(record),
        status: record.status,
        accuracy: record.accuracy,
        steps: record.turns.len(),
        tool_calls,
        valid_calls,
        fact_calls,
        relation_calls,
        effective_calls: effective,
        undecidable_calls: undecidable,
        eff_rate: ratio(effective as f64, tool_calls),
        eff_rate_valid: ratio(effective as f64, valid_calls),
        ig_mean: ratio(ig_sum, defined.len()),
        ig_mean_all: ratio(ig_sum, tool_calls),
        ig_series,
        ir: ratio(tool_calls as f64, k),
        ir_eff: ratio(effective as f64, k),
        insufficient: valid_calls < k,
        k_star: k,
        counts_trace: record.counts_trace.clone(),
        tool_tokens: record.ledger.tool_tokens,
        total_tokens: record.ledger.total,
        log_base: base,
    })
}

/// Reads JSONL episode records; malformed lines are reported by 1-based number.
pub fn load_records(path: &Path) -> Result<Vec<EpisodeRecord>, MetricsError> {
    let io = |source| MetricsError::Io {
        path: path.display().to_string(),
        source,
    };
    let file = fs::File::open(path).map_err(io)?;
    let mut records = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| MetricsError::Io {
            path: path.display().to_string(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|e| MetricsError::MalformedRecord {
            path: path.display().to_string(),
            line: i + 1,
            detail: e.to_string(),
        })?;
        records.push(record);
    }
    if records.is_empty() {
        return Err(MetricsError::NoEpisodes);
    }
    Ok(records)
}
