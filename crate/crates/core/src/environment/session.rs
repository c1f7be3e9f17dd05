use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::config::{BudgetSpec, EnvConfig, TokenCounter};
use super::pricing::BudgetTable;
use super::query::{validate_query, QueryKind, QueryVerdict};
use super::response::{budget_trailer, usage_trailer, EnvResponse, ResponseKind};
use super::EnvError;
use crate::protocol::parse_agent_message;
use crate::puzzle::{Constraint, Puzzle, SolutionGrid};
use crate::solver::{self, ConstraintSet, Count, CountResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionStatus {
    Running,
    Solved,
    /// Incorrect or malformed solution, or an agent fault.
    Failed,
    /// Ran out of turns without a solution.
    Exhausted,
}

/// Token accounting; `total = reasoning_tokens + tool_tokens` after every turn.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostLedger {
    pub reasoning_tokens: u64,
    pub tool_tokens: u64,
    pub total: u64,
    pub token_counter: TokenCounter,
}

impl CostLedger {
    fn charge_reasoning(&mut self, n: u64) {
        self.reasoning_tokens += n;
        self.total = self.reasoning_tokens + self.tool_tokens;
    }

    fn charge_tool(&mut self, n: u64) {
        self.tool_tokens += n;
        self.total = self.reasoning_tokens + self.tool_tokens;
    }
}

/// One query that reached the oracle, valid or not.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryLogEntry {
    pub turn: usize,
    pub raw: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<QueryKind>,
    pub verdict: QueryVerdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub canonical: Option<String>,
    pub count_before: Count,
    pub count_after: Count,
    /// Whether the answer strictly shrank the feasible set; `None` when undecidable
    /// because both counts overflowed and no known solution was eliminated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reduced: Option<bool>,
    pub price: u64,
}

/// Whitespace-delimited units of a message.
pub fn estimate_tokens(text: &str) -> u64 {
    text.split_whitespace().count() as u64
}

/// State of one episode against the oracle. Strictly sequential.
#[derive(Debug, Clone)]
pub struct Session {
    puzzle: Arc<Puzzle>,
    config: EnvConfig,
    budget_limit: Option<u32>,
    turn: usize,
    constraints: ConstraintSet,
    current: CountResult,
    log: Vec<QueryLogEntry>,
    issued: usize,
    ledger: CostLedger,
    status: SessionStatus,
    detail: Option<String>,
}

impl Session {
    /// Opens a session whose constraint set starts as the puzzle's visible clues.
    pub fn new(puzzle: Arc<Puzzle>, config: EnvConfig) -> Result<Session, EnvError> {
        if config.max_turns == 0 {
            return Err(EnvError::ConfigMismatch(
                "max_turns must be positive".into(),
            ));
        }
        if config.count_cap < 2 {
            return Err(EnvError::ConfigMismatch(
                "count_cap must be at least 2".into(),
            ));
        }
        let budget_limit = match &config.budget {
            None => None,
            Some(BudgetSpec::Limit(n)) => Some(*n),
            Some(BudgetSpec::Level { level, model }) => Some(BudgetTable::resolve(
                *level,
                &puzzle.size_label(),
                puzzle.k_star,
                model.as_deref(),
            )?),
        };
        if budget_limit == Some(0) {
            return Err(EnvError::ConfigMismatch(
                "budget limit must be positive".into(),
            ));
        }
        let constraints: ConstraintSet = puzzle.visible_constraints().into_iter().collect();
        if constraints.len() != puzzle.visible.len() {
            return Err(EnvError::InvalidPuzzle(format!(
                "{}: visible clue ids do not resolve to distinct clues",
                puzzle.id
            )));
        }
        let current =
            solver::count_solutions(constraints.as_slice(), &puzzle.schema, config.count_cap)?;
        if current.count != Count::Exact(puzzle.initial_count) && !current.count.is_overflow() {
            return Err(EnvError::InvalidPuzzle(format!(
                "{}: stored initial_count {} but visible clues admit {}",
                puzzle.id, puzzle.initial_count, current.count
            )));
        }
        let ledger = CostLedger {
            token_counter: config
                .pricing
                .as_ref()
                .map(|p| p.token_counter)
                .unwrap_or_default(),
            ..CostLedger::default()
        };
        Ok(Session {
            puzzle,
            config,
            budget_limit,
            turn: 0,
            constraints,
            current,
            log: Vec::new(),
            issued: 0,
            ledger,
            status: SessionStatus::Running,
            detail: None,
        })
    }

    pub fn puzzle(&self) -> &Puzzle {
        &self.puzzle
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn turn(&self) -> usize {
        self.turn
    }

    pub fn status(&self) -> SessionStatus {
        self.status
    }

    /// Why the session ended, when it has.
    pub fn detail(&self) -> Option<&str> {
        self.detail.as_deref()
    }

    pub fn budget_limit(&self) -> Option<u32> {
        self.budget_limit
    }

    /// `limit - queries issued`; may go negative since budgets are soft.
    pub fn budget_remaining(&self) -> Option<i64> {
        self.budget_limit
            .map(|limit| limit as i64 - self.issued as i64)
    }

    pub fn ledger(&self) -> &CostLedger {
        &self.ledger
    }

    pub fn log(&self) -> &[QueryLogEntry] {
        &self.log
    }

    pub fn constraints(&self) -> &ConstraintSet {
        &self.constraints
    }

    pub fn current_count(&self) -> Count {
        self.current.count
    }

    pub fn queries_issued(&self) -> usize {
        self.issued
    }

    fn ensure_running(&self) -> Result<(), EnvError> {
        if self.status == SessionStatus::Running {
            Ok(())
        } else {
            Err(EnvError::SessionNotRunning)
        }
    }

    /// Validity part of a query verdict, without touching session state.
    pub fn validate_query(&self, raw: &Value) -> QueryVerdict {
        match validate_query(raw, &self.puzzle.schema, self.config.env_type) {
            Ok(_) => QueryVerdict {
                valid: true,
                reason: None,
                answer: None,
            },
            Err(rejection) => QueryVerdict {
                valid: false,
                reason: Some(rejection.reason),
                answer: None,
            },
        }
    }

    /// Answers a query record and appends budget/usage trailers.
    pub fn answer_query(&mut self, raw: &Value) -> Result<EnvResponse, EnvError> {
        self.ensure_running()?;
        let response = self.answer_inner(raw)?;
        Ok(self.finish(response))
    }

    /// Grades a `{header, rows}` solution record; the session ends either way.
    pub fn grade_solution(&mut self, raw: &Value) -> Result<EnvResponse, EnvError> {
        self.ensure_running()?;
        let response = self.grade_inner(raw);
        Ok(self.finish(response))
    }

    /// Processes one complete agent message: one turn.
    ///
    /// `reported_tokens` is used for the reasoning ledger when the pricing
    /// config asks for model-reported counts.
    pub fn handle_message(
        &mut self,
        text: &str,
        reported_tokens: Option<u64>,
    ) -> Result<EnvResponse, EnvError> {
        self.ensure_running()?;
        self.turn += 1;
        let estimate = estimate_tokens(text);
        let reasoning = match self.ledger.token_counter {
            TokenCounter::Whitespace => estimate,
            TokenCounter::ModelReported => reported_tokens.unwrap_or(estimate),
        };
        self.ledger.charge_reasoning(reasoning);

        let message = parse_agent_message(text);
        let mut response = if let Some(first) = message.violations.first() {
            let all: Vec<&str> = message.violations.iter().map(|v| v.code()).collect();
            EnvResponse::error(
                self.turn,
                first.code(),
                format!("protocol violation: {}", all.join(", ")),
            )
        } else if let Some(solution) = &message.solution_payload {
            self.grade_inner(solution)
        } else if let Some(query) = message.query_payloads.first() {
            self.answer_inner(query)?
        } else {
            EnvResponse {
                detail: Some("think-only turn".into()),
                ..EnvResponse::new(ResponseKind::Answer, self.turn)
            }
        };
        if self.status == SessionStatus::Running && self.turn >= self.config.max_turns {
            self.status = SessionStatus::Exhausted;
            self.detail = Some(format!(
                "max_turns {} reached without a solution",
                self.config.max_turns
            ));
            if response.kind != ResponseKind::Final {
                let note = self.detail.clone().unwrap_or_default();
                response.detail = Some(match response.detail.take() {
                    Some(d) => format!("{d}; {note}"),
                    None => note,
                });
            }
        }
        Ok(self.finish(response))
    }

    /// Ends the session as failed, e.g. when the agent raised.
    pub fn record_fault(&mut self, detail: impl Into<String>) {
        if self.status == SessionStatus::Running {
            self.status = SessionStatus::Failed;
            self.detail = Some(detail.into());
        }
    }

    fn finish(&self, mut response: EnvResponse) -> EnvResponse {
        response.turn = self.turn;
        if let (Some(limit), Some(remaining)) = (self.budget_limit, self.budget_remaining()) {
            response.budget = Some(budget_trailer(remaining, limit));
        }
        if self.config.pricing.is_some() {
            response.usage = Some(usage_trailer(
                self.ledger.reasoning_tokens,
                self.ledger.tool_tokens,
                self.ledger.total,
            ));
        }
        response
    }

    fn answer_inner(&mut self, raw: &Value) -> Result<EnvResponse, EnvError> {
        self.issued += 1;
        let validated = validate_query(raw, &self.puzzle.schema, self.config.env_type);
        let declared = match &validated {
            Ok(q) => Some(q.kind()),
            Err(r) => r.declared,
        };
        let price = match (&self.config.pricing, declared) {
            (None, _) => 0,
            (Some(p), Some(kind)) => p.price(kind),
            (Some(p), None) => p.cheaper(),
        };
        self.ledger.charge_tool(price);
        let before = self.current.count;

        let query = match validated {
            Ok(q) => q,
            Err(rejection) => {
                self.log.push(QueryLogEntry {
                    turn: self.turn,
                    raw: raw.clone(),
                    kind: declared,
                    verdict: QueryVerdict {
                        valid: false,
                        reason: Some(rejection.reason),
                        answer: None,
                    },
                    canonical: None,
                    count_before: before,
                    count_after: before,
                    reduced: Some(false),
                    price,
                });
                return Ok(EnvResponse::error(
                    self.turn,
                    rejection.reason.code(),
                    rejection.detail,
                ));
            }
        };

        let asserted = query.to_constraint();
        let answer = solver::holds(&asserted, &self.puzzle.solution)?;
        let implied = solver::implied_constraint(&query, answer).with_id(format!("q{}", self.turn));
        self.constraints.insert(implied.clone());
        let after = solver::count_solutions(
            self.constraints.as_slice(),
            &self.puzzle.schema,
            self.config.count_cap,
        )?;
        let reduced = reduction(&self.current, &after, &implied);
        self.log.push(QueryLogEntry {
            turn: self.turn,
            raw: raw.clone(),
            kind: declared,
            verdict: QueryVerdict {
                valid: true,
                reason: None,
                answer: Some(answer),
            },
            canonical: Some(query.serialized()),
            count_before: before,
            count_after: after.count,
            reduced,
            price,
        });
        self.current = after;
        Ok(EnvResponse {
            answer: Some(answer),
            ..EnvResponse::new(ResponseKind::Answer, self.turn)
        })
    }

    fn grade_inner(&mut self, raw: &Value) -> EnvResponse {
        let mut response = EnvResponse::new(ResponseKind::Final, self.turn);
        match parse_solution(raw, &self.puzzle) {
            Err(detail) => {
                self.status = SessionStatus::Failed;
                response.answer = Some(false);
                response.error_code = Some("MalformedSolution".into());
                response.detail = Some(format!("MalformedSolution: {detail}"));
            }
            Ok(grid) if grid == self.puzzle.solution => {
                self.status = SessionStatus::Solved;
                response.answer = Some(true);
                response.detail = Some("solved".into());
            }
            Ok(_) => {
                self.status = SessionStatus::Failed;
                response.answer = Some(false);
                response.error_code = Some("IncorrectSolution".into());
                response.detail = Some("incorrect solution".into());
            }
        }
        self.detail = response.detail.clone();
        response
    }
}

fn reduction(before: &CountResult, after: &CountResult, implied: &Constraint) -> Option<bool> {
    match (before.count, after.count) {
        (Count::Exact(b), Count::Exact(a)) => Some(a < b),
        (Count::Overflow, Count::Exact(_)) => Some(true),
        (Count::Exact(_), Count::Overflow) => Some(false),
        (Count::Overflow, Count::Overflow) => {
            let eliminated = before
                .witnesses
                .iter()
                .any(|w| matches!(solver::holds(implied, w), Ok(false)));
            eliminated.then_some(true)
        }
    }
}

/// Structural check then canonical decoding of a submitted solution.
pub fn parse_solution(raw: &Value, puzzle: &Puzzle) -> Result<SolutionGrid, String> {
    let schema = &puzzle.schema;
    let obj = raw.as_object().ok_or("solution must be a JSON object")?;
    if let Some(extra) = obj.keys().find(|k| *k != "header" && *k != "rows") {
        return Err(format!("unexpected field {extra:?}"));
    }
    let header = obj
        .get("header")
        .and_then(Value::as_array)
        .ok_or("missing header array")?;
    let expected = schema.header();
    let header_ok = header.len() == expected.len()
        && header.iter().zip(&expected).all(|(got, want)| {
            got.as_str()
                .and_then(|g| crate::token::canonicalize_token(g).ok())
                .zip(crate::token::canonicalize_token(want).ok())
                .is_some_and(|(g, w)| g == w)
        });
    if !header_ok {
        return Err(format!(
            "header must match the attribute list exactly: expected {expected:?}"
        ));
    }
    let rows = obj
        .get("rows")
        .and_then(Value::as_array)
        .ok_or("missing rows array")?;
    if rows.len() != schema.n_houses {
        return Err(format!(
            "expected {} rows, got {}",
            schema.n_houses,
            rows.len()
        ));
    }
    let mut grid_rows: Vec<Option<Vec<String>>> = vec![None; schema.n_houses];
    for row in rows {
        let cells = row.as_array().ok_or("each row must be an array")?;
        if cells.len() != expected.len() {
            return Err(format!("each row needs {} cells", expected.len()));
        }
        let cells: Vec<&str> = cells
            .iter()
            .map(|c| c.as_str().ok_or("cells must be strings"))
            .collect::<Result<_, _>>()?;
        let house = crate::token::parse_house(cells[0], schema.n_houses)
            .ok_or_else(|| format!("unknown house {:?}", cells[0]))?;
        let mut values = Vec::with_capacity(schema.n_attributes());
        for (a, raw_value) in cells[1..].iter().enumerate() {
            let v = schema.value_index(a, raw_value).ok_or_else(|| {
                format!(
                    "{raw_value:?} is not drawn from the {} domain",
                    schema.attributes[a]
                )
            })?;
            values.push(schema.domains[a][v].clone());
        }
        if grid_rows[house - 1].replace(values).is_some() {
            return Err(format!("house {house} listed twice"));
        }
    }
    Ok(SolutionGrid {
        n_houses: schema.n_houses,
        attributes: schema.attributes.clone(),
        rows: grid_rows
            .into_iter()
            .map(|r| r.expect("every house filled"))
            .collect(),
    })
}
