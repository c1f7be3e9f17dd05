//! Parsing of the experiment knobs: env type, budget, pricing and agent.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::CliError;
use crate::agents::{AgentKind, AgentSpec};
use crate::environment::{BudgetLevel, BudgetSpec, EnvConfig, EnvType, PriceCatalog, Pricing};

/// Reads a TOML or JSON file, picked by extension (TOML otherwise).
pub fn read_config_file<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let is_json = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let parsed = if is_json {
        serde_json::from_str(&text).map_err(|e| e.to_string())
    } else {
        toml::from_str(&text).map_err(|e| e.to_string())
    };
    parsed.map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// `normal`, `only_fact`, `only_relation`, or a config file holding a full `EnvConfig`.
pub fn parse_env(raw: &str) -> Result<EnvConfig, CliError> {
    if let Ok(t) = raw.parse::<EnvType>() {
        return Ok(EnvConfig::default().with_env_type(t));
    }
    let path = Path::new(raw);
    if path.is_file() {
        return read_config_file(path);
    }
    Err(CliError::Config(format!(
        "--env {raw:?} is neither an env type (normal, only_fact, only_relation) nor a config file"
    )))
}

/// `tight`, `normal`, `relaxed` (optionally `@model` for the budget column), or a positive integer.
pub fn parse_budget(raw: &str) -> Result<BudgetSpec, CliError> {
    let raw = raw.trim();
    if let Ok(n) = raw.parse::<u32>() {
        if n == 0 {
            return Err(CliError::Config("--budget must be positive".into()));
        }
        return Ok(BudgetSpec::Limit(n));
    }
    let (level, model) = match raw.split_once('@') {
        Some((l, m)) => (l, Some(m.trim().to_string())),
        None => (raw, None),
    };
    let level: BudgetLevel = level
        .parse()
        .map_err(|e| CliError::Config(format!("--budget: {e}")))?;
    Ok(BudgetSpec::Level { level, model })
}

/// A catalog condition (`fact-cheap`, optionally `@qwen3-235b`) or explicit `FACT/RELATION` prices.
pub fn parse_pricing(raw: &str) -> Result<Pricing, CliError> {
    let raw = raw.trim();
    if let Some((f, r)) = raw.split_once('/') {
        if let (Ok(f), Ok(r)) = (f.trim().parse(), r.trim().parse()) {
            return Ok(Pricing::new(f, r));
        }
    }
    let (condition, scale) = raw.split_once('@').unwrap_or((raw, "gemini-2.5-flash"));
    Pricing::from_catalog(condition, scale).map_err(|e| {
        let known: Vec<&str> = PriceCatalog::shipped().conditions().collect();
        CliError::Config(format!(
            "--pricing: {e} (known conditions: {})",
            known.join(", ")
        ))
    })
}

/// Where episodes get their messages from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentSource {
    Scripted(AgentSpec),
    /// Serve each episode to a client connecting to this address.
    External {
        listen: String,
        accept_timeout_secs: u64,
    },
}

/// An agent name (`greedy_ig`), `external`, or a spec file.
pub fn parse_agent(raw: &str, seed: Option<u64>) -> Result<AgentSpec, CliError> {
    let mut spec = match raw.parse::<AgentKind>() {
        Ok(kind) => AgentSpec::new(kind),
        Err(name_err) => {
            let path = Path::new(raw);
            if !path.is_file() {
                return Err(CliError::Config(format!("--agent: {name_err}")));
            }
            read_config_file(path)?
        }
    };
    if let Some(seed) = seed {
        spec.seed = seed;
    }
    spec.validate().map_err(CliError::Config)?;
    Ok(spec)
}
