use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::pricing::{BudgetLevel, PriceCatalog};
use super::query::QueryKind;
use crate::solver::DEFAULT_CAP;

pub const DEFAULT_MAX_TURNS: usize = 50;

/// Which query kinds an environment admits.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(rename_all = "snake_case")]
pub enum EnvType {
    #[default]
    Normal,
    OnlyFact,
    OnlyRelation,
}

impl EnvType {
    pub fn admits(self, kind: QueryKind) -> bool {
        match self {
            EnvType::Normal => true,
            EnvType::OnlyFact => kind == QueryKind::Fact,
            EnvType::OnlyRelation => kind == QueryKind::Relation,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EnvType::Normal => "normal",
            EnvType::OnlyFact => "only_fact",
            EnvType::OnlyRelation => "only_relation",
        }
    }

    /// Row label used in report tables.
    pub fn display_name(self) -> &'static str {
        match self {
            EnvType::Normal => "Normal",
            EnvType::OnlyFact => "Only Fact",
            EnvType::OnlyRelation => "Only Relation",
        }
    }
}

impl fmt::Display for EnvType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EnvType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s
            .trim()
            .to_ascii_lowercase()
            .replace(['-', ' '], "_")
            .as_str()
        {
            "normal" => Ok(EnvType::Normal),
            "only_fact" | "fact_only" => Ok(EnvType::OnlyFact),
            "only_relation" | "relation_only" => Ok(EnvType::OnlyRelation),
            other => Err(format!(
                "unknown env type {other:?} (expected normal, only_fact or only_relation)"
            )),
        }
    }
}

/// Advertised query allowance. Budgets are soft: sessions are never cut off by them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BudgetSpec {
    Limit(u32),
    /// Resolved per puzzle against the shipped budget table; `model` picks its column.
    Level {
        level: BudgetLevel,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        model: Option<String>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TokenCounter {
    /// Whitespace-delimited units of the agent's full message.
    #[default]
    Whitespace,
    /// Counts reported by the client, falling back to the whitespace estimate.
    ModelReported,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pricing {
    pub fact_price: u64,
    pub relation_price: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition: Option<String>,
    #[serde(default)]
    pub token_counter: TokenCounter,
}

impl Pricing {
    pub fn new(fact_price: u64, relation_price: u64) -> Self {
        Pricing {
            fact_price,
            relation_price,
            condition: None,
            token_counter: TokenCounter::default(),
        }
    }

    /// Looks up a named condition in the shipped catalog.
    pub fn from_catalog(condition: &str, scale: &str) -> Result<Self, super::EnvError> {
        let (fact_price, relation_price) = PriceCatalog::shipped().price_table(condition, scale)?;
        Ok(Pricing {
            fact_price,
            relation_price,
            condition: Some(PriceCatalog::canonical_condition(condition)),
            token_counter: TokenCounter::default(),
        })
    }

    pub fn price(&self, kind: QueryKind) -> u64 {
        match kind {
            QueryKind::Fact => self.fact_price,
            QueryKind::Relation => self.relation_price,
        }
    }

    pub fn cheaper(&self) -> u64 {
        self.fact_price.min(self.relation_price)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnvConfig {
    #[serde(default)]
    pub env_type: EnvType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<BudgetSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pricing: Option<Pricing>,
    #[serde(default = "default_max_turns")]
    pub max_turns: usize,
    #[serde(default = "default_cap")]
    pub count_cap: u64,
}

fn default_max_turns() -> usize {
    DEFAULT_MAX_TURNS
}

fn default_cap() -> u64 {
    DEFAULT_CAP
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig {
            env_type: EnvType::Normal,
            budget: None,
            pricing: None,
            max_turns: DEFAULT_MAX_TURNS,
            count_cap: DEFAULT_CAP,
        }
    }
}

impl EnvConfig {
    pub fn with_env_type(mut self, env_type: EnvType) -> Self {
        self.env_type = env_type;
        self
    }

    pub fn with_budget(mut self, budget: BudgetSpec) -> Self {
        self.budget = Some(budget);
        self
    }

    pub fn with_pricing(mut self, pricing: Pricing) -> Self {
        self.pricing = Some(pricing);
        self
    }

    pub fn with_max_turns(mut self, max_turns: usize) -> Self {
        self.max_turns = max_turns;
        self
    }
}
