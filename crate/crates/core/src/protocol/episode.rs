use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::prompt::{render_puzzle_text, render_system_prompt};
use crate::environment::{
    BudgetSpec, CostLedger, EnvConfig, EnvError, EnvResponse, EnvType, QueryLogEntry, Session,
    SessionStatus, PROTOCOL_VERSION,
};
use crate::puzzle::{Constraint, Puzzle, Schema};
use crate::solver::Count;

/// Raised by an agent that cannot produce its next message.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("agent fault: {0}")]
pub struct AgentFault(pub String);

/// One agent message and the environment reply to it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TurnRecord {
    pub turn: usize,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reasoning_tokens: Option<u64>,
    pub response: EnvResponse,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentReply {
    pub text: String,
    /// Model-reported count, used only under `TokenCounter::ModelReported`.
    pub reasoning_tokens: Option<u64>,
}

impl AgentReply {
    pub fn text(text: impl Into<String>) -> Self {
        AgentReply {
            text: text.into(),
            reasoning_tokens: None,
        }
    }
}

/// What an agent may look at: the public side of the puzzle and the conversation so far.
#[derive(Debug, Clone, Copy)]
pub struct AgentView<'a> {
    pub puzzle_id: &'a str,
    pub schema: &'a Schema,
    pub visible: &'a [Constraint],
    pub env_type: EnvType,
    pub budget_limit: Option<u32>,
    pub system_prompt: &'a str,
    pub puzzle_text: &'a str,
    pub turns: &'a [TurnRecord],
}

impl AgentView<'_> {
    pub fn last_response(&self) -> Option<&EnvResponse> {
        self.turns.last().map(|t| &t.response)
    }
}

pub trait Agent {
    fn name(&self) -> String;
    fn step(&mut self, view: &AgentView<'_>) -> Result<AgentReply, AgentFault>;
}

/// Complete transcript of one episode plus everything the metrics need.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub protocol_version: u32,
    pub puzzle_id: String,
    pub size: String,
    pub n_houses: usize,
    pub n_attributes: usize,
    pub k_star: usize,
    pub initial_count: u64,
    pub env_type: EnvType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget_limit: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget_condition: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pricing_condition: Option<String>,
    pub agent: String,
    pub turns: Vec<TurnRecord>,
    pub queries: Vec<QueryLogEntry>,
    /// `S(C_0)` followed by the count after each valid query.
    pub counts_trace: Vec<Count>,
    pub status: SessionStatus,
    pub accuracy: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fault: Option<String>,
    pub ledger: CostLedger,
}

impl EpisodeRecord {
    pub fn from_session(
        session: &Session,
        agent: &str,
        turns: Vec<TurnRecord>,
        fault: Option<String>,
    ) -> Self {
        let puzzle = session.puzzle();
        let config = session.config();
        let mut counts_trace = vec![Count::Exact(puzzle.initial_count)];
        counts_trace.extend(
            session
                .log()
                .iter()
                .filter(|q| q.verdict.valid)
                .map(|q| q.count_after),
        );
        EpisodeRecord {
            protocol_version: PROTOCOL_VERSION,
            puzzle_id: puzzle.id.clone(),
            size: puzzle.size_label(),
            n_houses: puzzle.schema.n_houses,
            n_attributes: puzzle.schema.n_attributes(),
            k_star: puzzle.k_star,
            initial_count: puzzle.initial_count,
            env_type: config.env_type,
            budget_limit: session.budget_limit(),
            budget_condition: budget_condition(config),
            pricing_condition: config.pricing.as_ref().map(|p| {
                p.condition
                    .clone()
                    .unwrap_or_else(|| format!("custom:{}/{}", p.fact_price, p.relation_price))
            }),
            agent: agent.to_string(),
            turns,
            queries: session.log().to_vec(),
            counts_trace,
            status: session.status(),
            accuracy: u8::from(session.status() == SessionStatus::Solved),
            detail: session.detail().map(str::to_string),
            fault,
            ledger: session.ledger().clone(),
        }
    }

    pub fn steps(&self) -> usize {
        self.turns.len()
    }

    pub fn tool_calls(&self) -> usize {
        self.queries.len()
    }
}

fn budget_condition(config: &EnvConfig) -> Option<String> {
    match &config.budget {
        None => None,
        Some(BudgetSpec::Limit(n)) => Some(format!("limit:{n}")),
        Some(BudgetSpec::Level { level, .. }) => Some(level.to_string()),
    }
}

/// A live episode: session state plus the transcript built so far.
#[derive(Debug, Clone)]
pub struct Episode {
    session: Session,
    agent: String,
    turns: Vec<TurnRecord>,
    fault: Option<String>,
    system_prompt: String,
    puzzle_text: String,
    visible: Vec<Constraint>,
}

impl Episode {
    pub fn start(
        puzzle: Arc<Puzzle>,
        config: &EnvConfig,
        agent: impl Into<String>,
    ) -> Result<Episode, EnvError> {
        let session = Session::new(Arc::clone(&puzzle), config.clone())?;
        let system_prompt = render_system_prompt(
            &puzzle,
            config.env_type,
            session.budget_limit(),
            config.pricing.as_ref(),
        );
        Ok(Episode {
            agent: agent.into(),
            turns: Vec::new(),
            fault: None,
            system_prompt,
            puzzle_text: render_puzzle_text(&puzzle),
            visible: puzzle.visible_constraints(),
            session,
        })
    }

    pub fn session(&self) -> &Session {
        &self.session
    }

    pub fn turns(&self) -> &[TurnRecord] {
        &self.turns
    }

    pub fn system_prompt(&self) -> &str {
        &self.system_prompt
    }

    pub fn puzzle_text(&self) -> &str {
        &self.puzzle_text
    }

    pub fn is_running(&self) -> bool {
        self.session.status() == SessionStatus::Running
    }

    pub fn view(&self) -> AgentView<'_> {
        let puzzle = self.session.puzzle();
        AgentView {
            puzzle_id: &puzzle.id,
            schema: &puzzle.schema,
            visible: &self.visible,
            env_type: self.session.config().env_type,
            budget_limit: self.session.budget_limit(),
            system_prompt: &self.system_prompt,
            puzzle_text: &self.puzzle_text,
            turns: &self.turns,
        }
    }

    /// Feeds one agent message through the session and records the turn.
    pub fn submit(
        &mut self,
        text: &str,
        reasoning_tokens: Option<u64>,
    ) -> Result<&TurnRecord, EnvError> {
        let response = self.session.handle_message(text, reasoning_tokens)?;
        self.turns.push(TurnRecord {
            turn: response.turn,
            message: text.to_string(),
            reasoning_tokens,
            response,
        });
        Ok(self.turns.last().expect("turn just pushed"))
    }

    pub fn fault(&mut self, detail: impl Into<String>) {
        let detail = detail.into();
        self.session.record_fault(detail.clone());
        self.fault.get_or_insert(detail);
    }

    pub fn into_record(self) -> EpisodeRecord {
        EpisodeRecord::from_session(&self.session, &self.agent, self.turns, self.fault)
    }
}

/// Alternates agent messages and environment responses until the session ends.
pub fn run_episode(
    agent: &mut dyn Agent,
    puzzle: Arc<Puzzle>,
    config: &EnvConfig,
) -> Result<EpisodeRecord, EnvError> {
    let mut episode = Episode::start(puzzle, config, agent.name())?;
    while episode.is_running() {
        match agent.step(&episode.view()) {
            Ok(reply) => {
                episode.submit(&reply.text, reply.reasoning_tokens)?;
            }
            Err(fault) => episode.fault(fault.to_string()),
        }
    }
    Ok(episode.into_record())
}
