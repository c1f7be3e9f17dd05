//! The scripted agents' own view of the feasible set and their query pools.

use std::collections::BTreeSet;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::environment::{EnvType, Query, QueryKind, ResponseKind};
use crate::protocol::{AgentFault, AgentView};
use crate::puzzle::{ClueKind, Schema, SolutionGrid};
use crate::solver::{self, ConstraintSet, SolutionSpace};

/// Largest pool scored per step; bigger pools are subsampled by seed.
pub const MAX_CANDIDATES: usize = 5000;
/// Above this many feasible grids the agents stop enumerating and fall back
/// to a witness-splitting query.
pub const ENUMERATION_CAP: u64 = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CandidatePolicy {
    FactsOnly,
    RelationsOnly,
    #[default]
    Mixed,
}

impl CandidatePolicy {
    pub fn allows(self, kind: QueryKind, env: EnvType) -> bool {
        let policy = match self {
            CandidatePolicy::FactsOnly => kind == QueryKind::Fact,
            CandidatePolicy::RelationsOnly => kind == QueryKind::Relation,
            CandidatePolicy::Mixed => true,
        };
        policy && env.admits(kind)
    }
}

fn symmetric(kind: ClueKind) -> bool {
    matches!(
        kind,
        ClueKind::SameHouse
            | ClueKind::NotAt
            | ClueKind::SideBySide
            | ClueKind::OneBetween
            | ClueKind::TwoBetween
    )
}

/// Every syntactically valid query for a schema, facts first. Symmetric
/// relations are listed once per unordered pair.
pub fn all_queries(schema: &Schema, policy: CandidatePolicy, env: EnvType) -> Vec<Query> {
    let mut entities = Vec::new();
    for a in 0..schema.n_attributes() {
        for v in 0..schema.n_houses {
            entities.push(schema.entity(a, v));
        }
    }
    let mut out = Vec::new();
    if policy.allows(QueryKind::Fact, env) {
        for e in &entities {
            for house in 1..=schema.n_houses {
                out.push(Query::Fact {
                    house,
                    entity: e.clone(),
                });
            }
        }
    }
    if policy.allows(QueryKind::Relation, env) {
        for rel in ClueKind::RELATIONS {
            for (i, lhs) in entities.iter().enumerate() {
                for (j, rhs) in entities.iter().enumerate() {
                    if i == j || (symmetric(rel) && j < i) {
                        continue;
                    }
                    out.push(Query::Relation {
                        rel,
                        lhs: lhs.clone(),
                        rhs: rhs.clone(),
                    });
                }
            }
        }
    }
    out
}

/// The agent-side constraint set, mirroring what the oracle has revealed.
#[derive(Debug, Clone)]
pub struct Mirror {
    schema: Schema,
    constraints: ConstraintSet,
    space: Option<SolutionSpace>,
    witnesses: Vec<SolutionGrid>,
    pending: Option<Query>,
    asked: BTreeSet<String>,
}

impl Mirror {
    pub fn new(view: &AgentView<'_>) -> Result<Mirror, AgentFault> {
        let mut m = Mirror {
            schema: view.schema.clone(),
            constraints: view.visible.iter().cloned().collect(),
            space: None,
            witnesses: Vec::new(),
            pending: None,
            asked: BTreeSet::new(),
        };
        m.refresh()?;
        Ok(m)
    }

    fn refresh(&mut self) -> Result<(), AgentFault> {
        let fault = |e: solver::SolverError| AgentFault(e.to_string());
        self.space =
            solver::enumerate_solutions(self.constraints.as_slice(), &self.schema, ENUMERATION_CAP)
                .map_err(fault)?;
        self.witnesses = match &self.space {
            Some(_) => Vec::new(),
            None => {
                solver::count_solutions(self.constraints.as_slice(), &self.schema, 2)
                    .map_err(fault)?
                    .witnesses
            }
        };
        Ok(())
    }

    /// Folds the answer to the previously sent query into the mirror.
    pub fn observe(&mut self, view: &AgentView<'_>) -> Result<(), AgentFault> {
        let Some(q) = self.pending.take() else {
            return Ok(());
        };
        let Some(response) = view.last_response() else {
            return Ok(());
        };
        if let (ResponseKind::Answer, Some(answer)) = (response.kind, response.answer) {
            let implied = solver::implied_constraint(&q, answer);
            if let Some(space) = &mut self.space {
                space
                    .restrict(&implied)
                    .map_err(|e| AgentFault(e.to_string()))?;
                self.constraints.insert(implied);
            } else {
                self.constraints.insert(implied);
                self.refresh()?;
            }
        }
        Ok(())
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn space(&self) -> Option<&SolutionSpace> {
        self.space.as_ref()
    }

    /// The single remaining grid, when the feasible set is a singleton.
    pub fn solved(&self) -> Option<SolutionGrid> {
        match &self.space {
            Some(space) if space.len() == 1 => space.grid(0),
            _ => None,
        }
    }

    pub fn was_asked(&self, q: &Query) -> bool {
        self.asked.contains(&q.serialized())
    }

    pub fn record_sent(&mut self, q: Query) {
        self.asked.insert(q.serialized());
        self.pending = Some(q);
    }

    /// Queries whose answer is not yet implied, subsampled to `MAX_CANDIDATES`.
    ///
    /// Each entry carries how many feasible grids satisfy it.
    pub fn undecided(
        &self,
        policy: CandidatePolicy,
        env: EnvType,
        rng: &mut impl Rng,
    ) -> Result<Vec<(Query, u64)>, AgentFault> {
        let Some(space) = &self.space else {
            return Ok(Vec::new());
        };
        let n = space.len() as u64;
        let mut pool = Vec::new();
        for q in all_queries(&self.schema, policy, env) {
            if self.was_asked(&q) {
                continue;
            }
            let sat = space
                .count_satisfying(&q.to_constraint())
                .map_err(|e| AgentFault(e.to_string()))?;
            if sat > 0 && sat < n {
                pool.push((q, sat));
            }
        }
        if pool.len() > MAX_CANDIDATES {
            let mut keep = index::sample(rng, pool.len(), MAX_CANDIDATES).into_vec();
            keep.sort_unstable();
            let mut slots: Vec<Option<(Query, u64)>> = pool.into_iter().map(Some).collect();
            pool = keep
                .into_iter()
                .map(|i| slots[i].take().expect("distinct indices"))
                .collect();
        }
        Ok(pool)
    }

    /// When the feasible set is too large to enumerate: the first unasked
    /// query on which the two known witnesses disagree, so either answer
    /// removes one of them.
    pub fn splitting_query(&self, policy: CandidatePolicy, env: EnvType) -> Option<Query> {
        let [a, b] = self.witnesses.as_slice() else {
            return None;
        };
        all_queries(&self.schema, policy, env)
            .into_iter()
            .find(|q| {
                let c = q.to_constraint();
                !self.was_asked(q) && solver::holds(&c, a).ok() != solver::holds(&c, b).ok()
            })
    }
}
