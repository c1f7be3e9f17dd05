//! Rule-based oracle and per-episode session state.

mod config;
mod pricing;
mod query;
mod response;
mod session;

use thiserror::Error;

pub use config::{BudgetSpec, EnvConfig, EnvType, Pricing, TokenCounter, DEFAULT_MAX_TURNS};
pub use pricing::{BudgetLevel, BudgetTable, PriceCatalog, DEFAULT_BUDGET_MODEL};
pub use query::{validate_query, Query, QueryKind, QueryVerdict, RejectReason, Rejection};
pub use response::{budget_trailer, usage_trailer, EnvResponse, ResponseKind, PROTOCOL_VERSION};
pub use session::{
    estimate_tokens, parse_solution, CostLedger, QueryLogEntry, Session, SessionStatus,
};

use crate::solver::SolverError;

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("session is not running")]
    SessionNotRunning,
    #[error("config mismatch: {0}")]
    ConfigMismatch(String),
    #[error("unknown condition: {0}")]
    UnknownCondition(String),
    #[error("invalid puzzle: {0}")]
    InvalidPuzzle(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
}
