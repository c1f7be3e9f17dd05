use std::cmp::Ordering;
use std::fmt;
use std::io;
use std::str::FromStr;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::{EpisodeMetrics, LogBase, MetricsError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupKey {
    Model,
    Size,
    NMissing,
    EnvType,
    Condition,
}

impl GroupKey {
    pub fn column(self) -> &'static str {
        match self {
            GroupKey::Model => "Model",
            GroupKey::Size => "Size",
            GroupKey::NMissing => "Miss",
            GroupKey::EnvType => "Type",
            GroupKey::Condition => "Condition",
        }
    }

    fn display(self, m: &EpisodeMetrics) -> String {
        match self {
            GroupKey::Model => m.agent.clone(),
            GroupKey::Size => {
                let mut chars = m.size.chars();
                match chars.next() {
                    Some(c) => c.to_uppercase().chain(chars).collect(),
                    None => String::new(),
                }
            }
            GroupKey::NMissing => format!("M{}", m.n_missing),
            GroupKey::EnvType => m.env_type.display_name().to_string(),
            GroupKey::Condition => m.condition.clone().unwrap_or_else(|| "none".into()),
        }
    }

    /// Sort key: sizes small < medium < large < other, missing counts numerically.
    fn sort_key(self, m: &EpisodeMetrics) -> (usize, String) {
        match self {
            GroupKey::Size => {
                let rank = ["small", "medium", "large"]
                    .iter()
                    .position(|s| *s == m.size)
                    .unwrap_or(3);
                (rank, m.size.clone())
            }
            GroupKey::NMissing => (m.n_missing, String::new()),
            GroupKey::EnvType => (m.env_type as usize, String::new()),
            _ => (0, self.display(m)),
        }
    }
}

impl FromStr for GroupKey {
    type Err = MetricsError;

    fn from_str(s: &str) -> Result<Self, MetricsError> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "model" | "agent" => Ok(GroupKey::Model),
            "size" => Ok(GroupKey::Size),
            "n_missing" | "miss" | "missing" => Ok(GroupKey::NMissing),
            "env_type" | "type" | "env" => Ok(GroupKey::EnvType),
            "condition" => Ok(GroupKey::Condition),
            other => Err(MetricsError::UnknownGroupKey(other.to_string())),
        }
    }
}

impl fmt::Display for GroupKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GroupKey::Model => "model",
            GroupKey::Size => "size",
            GroupKey::NMissing => "n_missing",
            GroupKey::EnvType => "env_type",
            GroupKey::Condition => "condition",
        })
    }
}

/// Per-cell means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub key: IndexMap<String, String>,
    pub episodes: usize,
    pub insuf_pct: f64,
    pub steps: f64,
    /// Percent.
    pub acc: f64,
    pub tc: f64,
    /// Mean tool calls over solved episodes; `None` when none solved.
    pub succ_tc: Option<f64>,
    pub eff_q: f64,
    pub eff_rate: f64,
    pub eff_rate_valid: f64,
    pub ig_mu: f64,
    pub ir: f64,
    pub ir_eff: f64,
    pub k_star: f64,
    /// Accuracy of sufficient minus insufficient episodes, in points; `None` when
    /// either subset is empty.
    pub delta_acc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub log_base: LogBase,
    pub group_by: Vec<GroupKey>,
    pub rows: Vec<ReportRow>,
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

fn row_for(key: IndexMap<String, String>, cell: &[&EpisodeMetrics]) -> ReportRow {
    let acc_of =
        |subset: &[&&EpisodeMetrics]| mean(subset.iter().map(|m| m.accuracy as f64)) * 100.0;
    let insufficient: Vec<&&EpisodeMetrics> = cell.iter().filter(|m| m.insufficient).collect();
    let sufficient: Vec<&&EpisodeMetrics> = cell.iter().filter(|m| !m.insufficient).collect();
    let solved: Vec<&&EpisodeMetrics> = cell.iter().filter(|m| m.accuracy == 1).collect();
    ReportRow {
        key,
        episodes: cell.len(),
        insuf_pct: 100.0 * insufficient.len() as f64 / cell.len() as f64,
        steps: mean(cell.iter().map(|m| m.steps as f64)),
        acc: mean(cell.iter().map(|m| m.accuracy as f64)) * 100.0,
        tc: mean(cell.iter().map(|m| m.tool_calls as f64)),
        succ_tc: (!solved.is_empty()).then(|| mean(solved.iter().map(|m| m.tool_calls as f64))),
        eff_q: mean(cell.iter().map(|m| m.effective_calls as f64)),
        eff_rate: mean(cell.iter().map(|m| m.eff_rate)),
        eff_rate_valid: mean(cell.iter().map(|m| m.eff_rate_valid)),
        ig_mu: mean(cell.iter().map(|m| m.ig_mean)),
        ir: mean(cell.iter().map(|m| m.ir)),
        ir_eff: mean(cell.iter().map(|m| m.ir_eff)),
        k_star: mean(cell.iter().map(|m| m.k_star as f64)),
        delta_acc: (!insufficient.is_empty() && !sufficient.is_empty())
            .then(|| acc_of(&sufficient) - acc_of(&insufficient)),
    }
}

/// Groups episodes by `keys` and averages every column per populated cell.
pub fn aggregate(
    metrics: &[EpisodeMetrics],
    keys: &[GroupKey],
    log_base: LogBase,
) -> Result<Report, MetricsError> {
    if metrics.is_empty() {
        return Err(MetricsError::NoEpisodes);
    }
    let mut order: Vec<&EpisodeMetrics> = metrics.iter().collect();
    let cmp = |a: &&EpisodeMetrics, b: &&EpisodeMetrics| -> Ordering {
        keys.iter()
            .map(|k| k.sort_key(a).cmp(&k.sort_key(b)))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    };
    order.sort_by(cmp);
    let mut rows = Vec::new();
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && cmp(&order[start], &order[end]).is_eq() {
            end += 1;
        }
        let key = keys
            .iter()
            .map(|k| (k.column().to_string(), k.display(order[start])))
            .collect();
        rows.push(row_for(key, &order[start..end]));
        start = end;
    }
    Ok(Report {
        log_base,
        group_by: keys.to_vec(),
        rows,
    })
}

pub const METRIC_COLUMNS: [&str; 12] = [
    "Insuf%", "Steps", "Acc", "TC", "SuccTC", "EffQ", "EffRate", "IG_μ", "IR", "IR_eff", "K*",
    "ΔAcc",
];

fn fmt_k(k: f64) -> String {
    if k.fract() == 0.0 {
        format!("{k:.0}")
    } else {
        format!("{k:.1}")
    }
}

impl ReportRow {
    /// Cells in `METRIC_COLUMNS` order, formatted as in the published tables.
    pub fn formatted(&self) -> Vec<String> {
        vec![
            format!("{:.1}", self.insuf_pct),
            format!("{:.1}", self.steps),
            format!("{:.1}", self.acc),
            format!("{:.1}", self.tc),
            self.succ_tc
                .map_or_else(|| "--".into(), |v| format!("{v:.1}")),
            format!("{:.1}", self.eff_q),
            format!("{:.2}", self.eff_rate),
            format!("{:.3}", self.ig_mu),
            format!("{:.2}", self.ir),
            format!("{:.2}", self.ir_eff),
            fmt_k(self.k_star),
            self.delta_acc
                .map_or_else(|| "--".into(), |v| format!("{v:+.1}")),
        ]
    }
}

impl Report {
    pub fn header(&self) -> Vec<String> {
        self.group_by
            .iter()
            .map(|k| k.column().to_string())
            .chain(METRIC_COLUMNS.iter().map(|s| s.to_string()))
            .collect()
    }

    pub fn table_rows(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| r.key.values().cloned().chain(r.formatted()).collect())
            .collect()
    }

    /// Delimiter-separated table.
    pub fn write_delimited<W: io::Write>(&self, w: W, delimiter: u8) -> Result<(), csv::Error> {
        let mut out = csv::WriterBuilder::new()
            .delimiter(delimiter)
            .from_writer(w);
        out.write_record(self.header())?;
        for row in self.table_rows() {
            out.write_record(row)?;
        }
        out.flush()?;
        Ok(())
    }

    /// Fixed-width text table for terminals.
    pub fn to_text(&self) -> String {
        let header = self.header();
        let rows = self.table_rows();
        let widths: Vec<usize> = (0..header.len())
            .map(|i| {
                rows.iter()
                    .map(|r| r[i].chars().count())
                    .chain([header[i].chars().count()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let line = |cells: &[String]| {
            cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:>w$}"))
                .collect::<Vec<_>>()
                .join("  ")
        };
        let mut out = line(&header);
        out.push('\n');
        for r in &rows {
            out.push_str(&line(r));
            out.push('\n');
        }
        out
    }
}
