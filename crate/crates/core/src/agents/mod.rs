//! Scripted reference agents: optimality witness, greedy comparator, random floor, replay.

mod pool;
mod scripted;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use pool::{all_queries, CandidatePolicy, Mirror, ENUMERATION_CAP, MAX_CANDIDATES};
pub use scripted::{solution_message, CheatingOracle, GreedyIg, RandomAgent, ReplayAgent};

use crate::generator::derive_seed;
use crate::protocol::{Agent, AgentFault};
use crate::puzzle::Puzzle;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentKind {
    CheatingOracle,
    GreedyIg,
    Random,
    Replay,
}

impl AgentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AgentKind::CheatingOracle => "cheating_oracle",
            AgentKind::GreedyIg => "greedy_ig",
            AgentKind::Random => "random",
            AgentKind::Replay => "replay",
        }
    }
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AgentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "cheating_oracle" | "oracle" => Ok(AgentKind::CheatingOracle),
            "greedy_ig" | "greedy" => Ok(AgentKind::GreedyIg),
            "random" => Ok(AgentKind::Random),
            "replay" => Ok(AgentKind::Replay),
            other => Err(format!(
                "unknown agent {other:?} (expected cheating_oracle, greedy_ig, random or replay)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentSpec {
    pub kind: AgentKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub candidate_policy: CandidatePolicy,
    /// Messages for the replay kind.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transcript: Option<Vec<String>>,
}

impl AgentSpec {
    pub fn new(kind: AgentKind) -> Self {
        AgentSpec {
            kind,
            seed: 0,
            candidate_policy: CandidatePolicy::default(),
            transcript: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_policy(mut self, policy: CandidatePolicy) -> Self {
        self.candidate_policy = policy;
        self
    }

    pub fn validate(&self) -> Result<(), String> {
        match (self.kind, &self.transcript) {
            (AgentKind::Replay, None) => Err("replay agent needs a transcript".into()),
            (AgentKind::Replay, Some(_)) | (_, None) => Ok(()),
            (kind, Some(_)) => Err(format!("{kind} agent does not take a transcript")),
        }
    }

    /// Seed for one episode: the spec seed mixed with the puzzle id.
    pub fn episode_seed(&self, puzzle_id: &str) -> u64 {
        // FNV-1a keeps the mapping stable across platforms and releases.
        let hash = puzzle_id.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
            (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
        });
        derive_seed(self.seed, hash)
    }

    /// Instantiates the agent for one episode on `puzzle`.
    pub fn build(&self, puzzle: &Puzzle) -> Result<Box<dyn Agent + Send>, AgentFault> {
        self.validate().map_err(AgentFault)?;
        let seed = self.episode_seed(&puzzle.id);
        Ok(match self.kind {
            AgentKind::CheatingOracle => Box::new(CheatingOracle::new(puzzle)?),
            AgentKind::GreedyIg => Box::new(GreedyIg::new(self.candidate_policy, seed)),
            AgentKind::Random => Box::new(RandomAgent::new(self.candidate_policy, seed)),
            AgentKind::Replay => Box::new(ReplayAgent::from_texts(
                self.transcript.clone().unwrap_or_default(),
            )),
        })
    }
}
