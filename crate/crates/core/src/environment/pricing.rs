//! Shipped pricing conditions and budget levels.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::EnvError;

/// `(condition, fact_price, relation_price)`.
type PriceRow = (&'static str, u64, u64);

const GEMINI_FLASH: [PriceRow; 10] = [
    ("baseline", 500, 500),
    ("fact cheap", 250, 500),
    ("fact expensive", 1000, 500),
    ("relation cheap", 500, 250),
    ("relation expensive", 500, 1000),
    ("both cheap", 250, 250),
    ("both expensive", 1000, 1000),
    ("fact very cheap", 100, 2000),
    ("fact very expensive", 2000, 100),
    ("tool free", 0, 0),
];

const QWEN_235B: [PriceRow; 10] = [
    ("baseline", 250, 250),
    ("fact cheap", 125, 250),
    ("fact expensive", 500, 250),
    ("relation cheap", 250, 125),
    ("relation expensive", 250, 500),
    ("both cheap", 125, 125),
    ("both expensive", 500, 500),
    ("fact very cheap", 50, 1000),
    ("fact very expensive", 1000, 50),
    ("tool free", 0, 0),
];

/// Pricing conditions keyed by model scale.
#[derive(Debug, Clone)]
pub struct PriceCatalog {
    scales: Vec<(&'static str, &'static [PriceRow])>,
}

impl PriceCatalog {
    pub fn shipped() -> Self {
        PriceCatalog {
            scales: vec![
                ("gemini-2.5-flash", &GEMINI_FLASH),
                ("qwen3-235b", &QWEN_235B),
            ],
        }
    }

    /// `"Fact-Very-Cheap"`, `"fact_very_cheap"` and `"fact very cheap"` all map to the last form.
    pub fn canonical_condition(name: &str) -> String {
        name.replace(['-', '_'], " ")
            .split_whitespace()
            .map(str::to_lowercase)
            .collect::<Vec<_>>()
            .join(" ")
    }

    fn canonical_scale(scale: &str) -> Option<&'static str> {
        let s = scale.trim().to_ascii_lowercase();
        if s.starts_with("gemini") {
            Some("gemini-2.5-flash")
        } else if s.starts_with("qwen") {
            Some("qwen3-235b")
        } else {
            None
        }
    }

    pub fn scales(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.scales.iter().map(|(s, _)| *s)
    }

    pub fn conditions(&self) -> impl Iterator<Item = &'static str> {
        GEMINI_FLASH.iter().map(|(c, _, _)| *c)
    }

    /// `(fact_price, relation_price)` for a named condition at a model scale.
    pub fn price_table(&self, condition: &str, scale: &str) -> Result<(u64, u64), EnvError> {
        let cond = Self::canonical_condition(condition);
        let scale_key = Self::canonical_scale(scale)
            .ok_or_else(|| EnvError::UnknownCondition(format!("scale {scale:?}")))?;
        let rows = self
            .scales
            .iter()
            .find(|(s, _)| *s == scale_key)
            .map(|(_, rows)| *rows)
            .ok_or_else(|| EnvError::UnknownCondition(format!("scale {scale:?}")))?;
        rows.iter()
            .find(|(c, _, _)| *c == cond)
            .map(|&(_, f, r)| (f, r))
            .ok_or(EnvError::UnknownCondition(condition.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BudgetLevel {
    /// Budget equal to K*.
    Tight,
    Normal,
    Relaxed,
}

impl fmt::Display for BudgetLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BudgetLevel::Tight => "tight",
            BudgetLevel::Normal => "normal",
            BudgetLevel::Relaxed => "relaxed",
        })
    }
}

impl FromStr for BudgetLevel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "tight" => Ok(BudgetLevel::Tight),
            "normal" => Ok(BudgetLevel::Normal),
            "relaxed" => Ok(BudgetLevel::Relaxed),
            other => Err(format!("unknown budget level {other:?}")),
        }
    }
}

/// Medium-grid Normal/Relaxed budgets for K* = 1..=4, one column per evaluated model.
const MEDIUM_BUDGETS: [(&str, [(u32, u32); 4]); 7] = [
    ("gemini-2.5-flash", [(2, 3), (6, 8), (11, 14), (15, 19)]),
    ("gemini-2.5-pro", [(2, 3), (4, 6), (6, 9), (8, 12)]),
    ("gpt-5-mini", [(2, 3), (4, 6), (6, 9), (9, 14)]),
    ("gpt-5", [(2, 4), (6, 10), (11, 14), (15, 19)]),
    ("qwen3-235b", [(2, 4), (5, 8), (7, 11), (9, 14)]),
    ("llama-3.3-70b", [(5, 9), (6, 10), (7, 11), (8, 12)]),
    ("gpt-oss-120b", [(3, 5), (5, 8), (6, 9), (6, 11)]),
];

pub const DEFAULT_BUDGET_MODEL: &str = "gemini-2.5-flash";

/// Budget values per `(size, K*)` cell.
#[derive(Debug, Clone, Copy)]
pub struct BudgetTable;

impl BudgetTable {
    pub fn models() -> impl Iterator<Item = &'static str> {
        MEDIUM_BUDGETS.iter().map(|(m, _)| *m)
    }

    /// Resolves a level for a puzzle cell. Cells outside the shipped table use
    /// Normal = 2K* and Relaxed = 3K*.
    pub fn resolve(
        level: BudgetLevel,
        size: &str,
        k_star: usize,
        model: Option<&str>,
    ) -> Result<u32, EnvError> {
        let k = k_star as u32;
        if level == BudgetLevel::Tight {
            return Ok(k);
        }
        let model = model
            .unwrap_or(DEFAULT_BUDGET_MODEL)
            .trim()
            .to_ascii_lowercase();
        let column = MEDIUM_BUDGETS
            .iter()
            .find(|(m, _)| *m == model)
            .map(|(_, col)| col)
            .ok_or_else(|| EnvError::UnknownCondition(format!("budget model {model:?}")))?;
        let shipped = (size == "medium" && (1..=4).contains(&k_star)).then(|| column[k_star - 1]);
        let (normal, relaxed) = shipped.unwrap_or((2 * k, 3 * k));
        Ok(match level {
            BudgetLevel::Normal => normal,
            BudgetLevel::Relaxed => relaxed,
            BudgetLevel::Tight => unreachable!(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_reproduces_published_pairs() {
        let cat = PriceCatalog::shipped();
        assert_eq!(cat.price_table("fact cheap", "gemini").unwrap(), (250, 500));
        assert_eq!(
            cat.price_table("Fact-Very-Cheap", "qwen3-235b").unwrap(),
            (50, 1000)
        );
        assert_eq!(
            cat.price_table("tool free", "gemini-2.5-flash").unwrap(),
            (0, 0)
        );
        assert_eq!(cat.price_table("Tool-Free", "qwen").unwrap(), (0, 0));
        assert!(matches!(
            cat.price_table("free lunch", "qwen"),
            Err(EnvError::UnknownCondition(_))
        ));
        assert!(cat.price_table("baseline", "llama").is_err());
    }

    #[test]
    fn budget_levels() {
        assert_eq!(
            BudgetTable::resolve(BudgetLevel::Tight, "large", 5, None).unwrap(),
            5
        );
        assert_eq!(
            BudgetTable::resolve(BudgetLevel::Normal, "medium", 3, None).unwrap(),
            11
        );
        assert_eq!(
            BudgetTable::resolve(BudgetLevel::Relaxed, "medium", 4, None).unwrap(),
            19
        );
        assert_eq!(
            BudgetTable::resolve(BudgetLevel::Relaxed, "medium", 2, Some("Gemini-2.5-Pro"))
                .unwrap(),
            6
        );
        assert_eq!(
            BudgetTable::resolve(BudgetLevel::Normal, "small", 2, None).unwrap(),
            4
        );
        assert!(BudgetTable::resolve(BudgetLevel::Normal, "medium", 2, Some("nobody")).is_err());
    }
}
