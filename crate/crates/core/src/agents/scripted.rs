use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::pool::{CandidatePolicy, Mirror};
use crate::environment::Query;
use crate::protocol::{Agent, AgentFault, AgentMessage, AgentReply, AgentView};
use crate::puzzle::{Puzzle, SolutionGrid};
use crate::solver;

pub fn solution_message(think: &str, grid: &SolutionGrid) -> String {
    AgentMessage::solution(
        think,
        json!({ "header": grid.header(), "rows": grid.table_rows() }),
    )
}

fn query_message(think: &str, q: &Query) -> String {
    AgentMessage::query(think, q.to_json())
}

/// Test-harness agent with privileged access to the withheld clues: asks for
/// each in order, then submits the unique grid.
#[derive(Debug, Clone)]
pub struct CheatingOracle {
    queries: Vec<Query>,
    solution: SolutionGrid,
    next: usize,
}

impl CheatingOracle {
    pub fn new(puzzle: &Puzzle) -> Result<Self, AgentFault> {
        let queries = puzzle
            .missing_clues()
            .into_iter()
            .map(|c| {
                Query::from_constraint(&c.constraint).ok_or_else(|| {
                    AgentFault(format!(
                        "missing clue {} has no query form",
                        c.constraint.id
                    ))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let (unique, witness) = solver::is_unique(&puzzle.full_constraints(), &puzzle.schema)
            .map_err(|e| AgentFault(e.to_string()))?;
        let solution = witness
            .filter(|_| unique)
            .ok_or_else(|| AgentFault(format!("{}: full clue set is not unique", puzzle.id)))?;
        Ok(CheatingOracle {
            queries,
            solution,
            next: 0,
        })
    }
}

impl Agent for CheatingOracle {
    fn name(&self) -> String {
        "cheating_oracle".into()
    }

    fn step(&mut self, _view: &AgentView<'_>) -> Result<AgentReply, AgentFault> {
        let text = match self.queries.get(self.next) {
            Some(q) => query_message(&format!("recover withheld clue {}", self.next + 1), q),
            None => solution_message("all withheld clues recovered", &self.solution),
        };
        self.next += 1;
        Ok(AgentReply::text(text))
    }
}

/// Minimax information-gain agent over its own mirror of the feasible set.
#[derive(Debug, Clone)]
pub struct GreedyIg {
    policy: CandidatePolicy,
    rng: ChaCha8Rng,
    mirror: Option<Mirror>,
}

impl GreedyIg {
    pub fn new(policy: CandidatePolicy, seed: u64) -> Self {
        GreedyIg {
            policy,
            rng: ChaCha8Rng::seed_from_u64(seed),
            mirror: None,
        }
    }
}

fn mirror_for<'m>(
    slot: &'m mut Option<Mirror>,
    view: &AgentView<'_>,
) -> Result<&'m mut Mirror, AgentFault> {
    match slot {
        Some(m) => {
            m.observe(view)?;
            Ok(m)
        }
        None => Ok(slot.insert(Mirror::new(view)?)),
    }
}

impl Agent for GreedyIg {
    fn name(&self) -> String {
        "greedy_ig".into()
    }

    fn step(&mut self, view: &AgentView<'_>) -> Result<AgentReply, AgentFault> {
        let mirror = mirror_for(&mut self.mirror, view)?;
        if let Some(grid) = mirror.solved() {
            return Ok(AgentReply::text(solution_message(
                "one grid remains",
                &grid,
            )));
        }
        let chosen = match mirror.space() {
            Some(space) => {
                let n = space.len() as u64;
                mirror
                    .undecided(self.policy, view.env_type, &mut self.rng)?
                    .into_iter()
                    .map(|(q, sat)| (sat.max(n - sat), q.serialized(), q))
                    .min_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)))
                    .map(|(_, _, q)| q)
            }
            None => mirror.splitting_query(self.policy, view.env_type),
        };
        let q = chosen.ok_or_else(|| AgentFault("no informative query left".into()))?;
        let text = query_message("pick the query with the smallest worst-case remainder", &q);
        mirror.record_sent(q);
        Ok(AgentReply::text(text))
    }
}

/// Uniformly random informative query each turn; seeded.
#[derive(Debug, Clone)]
pub struct RandomAgent {
    policy: CandidatePolicy,
    rng: ChaCha8Rng,
    mirror: Option<Mirror>,
}

impl RandomAgent {
    pub fn new(policy: CandidatePolicy, seed: u64) -> Self {
        RandomAgent {
            policy,
            rng: ChaCha8Rng::seed_from_u64(seed),
            mirror: None,
        }
    }
}

impl Agent for RandomAgent {
    fn name(&self) -> String {
        "random".into()
    }

    fn step(&mut self, view: &AgentView<'_>) -> Result<AgentReply, AgentFault> {
        let mirror = mirror_for(&mut self.mirror, view)?;
        if let Some(grid) = mirror.solved() {
            return Ok(AgentReply::text(solution_message(
                "one grid remains",
                &grid,
            )));
        }
        let chosen = match mirror.space() {
            Some(_) => mirror
                .undecided(self.policy, view.env_type, &mut self.rng)?
                .choose(&mut self.rng)
                .map(|(q, _)| q.clone()),
            None => mirror.splitting_query(self.policy, view.env_type),
        };
        let q = chosen.ok_or_else(|| AgentFault("no informative query left".into()))?;
        let text = query_message("try a random open query", &q);
        mirror.record_sent(q);
        Ok(AgentReply::text(text))
    }
}

/// Replays a fixed list of messages; faults when they run out.
#[derive(Debug, Clone)]
pub struct ReplayAgent {
    messages: Vec<AgentReply>,
    next: usize,
}

impl ReplayAgent {
    pub fn new(messages: Vec<AgentReply>) -> Self {
        ReplayAgent { messages, next: 0 }
    }

    pub fn from_texts<S: Into<String>>(texts: impl IntoIterator<Item = S>) -> Self {
        Self::new(texts.into_iter().map(AgentReply::text).collect())
    }
}

impl Agent for ReplayAgent {
    fn name(&self) -> String {
        "replay".into()
    }

    fn step(&mut self, _view: &AgentView<'_>) -> Result<AgentReply, AgentFault> {
        let reply = self.messages.get(self.next).cloned().ok_or_else(|| {
            AgentFault(format!("transcript exhausted after {} messages", self.next))
        })?;
        self.next += 1;
        Ok(reply)
    }
}
