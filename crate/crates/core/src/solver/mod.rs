//! Exact constraint semantics and feasible-solution counting.

mod search;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::environment::Query;
use crate::puzzle::{Constraint, ConstraintKey, Puzzle, Schema, SolutionGrid};
use search::{Compiled, Network};

/// Default enumeration cap for solution counts.
pub const DEFAULT_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolverError {
    #[error("unknown entity {entity} in constraint {constraint}")]
    UnknownEntity { entity: String, constraint: String },
    #[error("malformed constraint {0}")]
    Malformed(String),
    #[error("unsupported grid: {0}")]
    UnsupportedGrid(String),
    #[error("enumeration cap must be at least 2, got {0}")]
    InvalidCap(u64),
}

/// A solution count, or a marker that it exceeded the enumeration cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Count {
    Exact(u64),
    Overflow,
}

impl Count {
    pub fn exact(self) -> Option<u64> {
        match self {
            Count::Exact(n) => Some(n),
            Count::Overflow => None,
        }
    }

    pub fn is_overflow(self) -> bool {
        matches!(self, Count::Overflow)
    }
}

impl fmt::Display for Count {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Count::Exact(n) => write!(f, "{n}"),
            Count::Overflow => f.write_str("overflow"),
        }
    }
}

impl Serialize for Count {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Count::Exact(n) => s.serialize_u64(*n),
            Count::Overflow => s.serialize_str("overflow"),
        }
    }
}

impl<'de> Deserialize<'de> for Count {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            N(u64),
            S(String),
        }
        match Raw::deserialize(d)? {
            Raw::N(n) => Ok(Count::Exact(n)),
            Raw::S(s) if s == "overflow" => Ok(Count::Overflow),
            Raw::S(s) => Err(serde::de::Error::custom(format!("bad count {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountResult {
    pub count: Count,
    pub cap: u64,
    /// Up to two feasible grids, in search order.
    pub witnesses: Vec<SolutionGrid>,
}

/// An accumulated constraint set with content-level deduplication and a cached count.
#[derive(Debug, Clone, Default)]
pub struct ConstraintSet {
    constraints: Vec<Constraint>,
    keys: BTreeSet<ConstraintKey>,
    cached: Option<CountResult>,
}

impl ConstraintSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `c` unless an identical constraint (ignoring id) is present.
    pub fn insert(&mut self, c: Constraint) -> bool {
        if !self.keys.insert(c.key()) {
            return false;
        }
        self.constraints.push(c);
        self.cached = None;
        true
    }

    pub fn contains(&self, c: &Constraint) -> bool {
        self.keys.contains(&c.key())
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn as_slice(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn iter(&self) -> impl Iterator<Item = &Constraint> {
        self.constraints.iter()
    }

    /// Count under this set, reusing the cached result when the cap matches.
    pub fn count(&mut self, schema: &Schema, cap: u64) -> Result<&CountResult, SolverError> {
        let stale = self.cached.as_ref().is_none_or(|c| c.cap != cap);
        if stale {
            self.cached = Some(count_solutions(&self.constraints, schema, cap)?);
        }
        Ok(self.cached.as_ref().expect("count cached above"))
    }

    pub fn cached_count(&self) -> Option<&CountResult> {
        self.cached.as_ref()
    }
}

impl FromIterator<Constraint> for ConstraintSet {
    fn from_iter<I: IntoIterator<Item = Constraint>>(iter: I) -> Self {
        let mut set = ConstraintSet::new();
        for c in iter {
            set.insert(c);
        }
        set
    }
}

/// Truth value of `c` on `grid`; negated constraints flip the asserted result.
pub fn holds(c: &Constraint, grid: &SolutionGrid) -> Result<bool, SolverError> {
    if !c.is_well_shaped() {
        return Err(SolverError::Malformed(c.to_string()));
    }
    let locate = |e: &crate::puzzle::Entity| {
        grid.attr_index(&e.attr)
            .and_then(|a| grid.house_of(a, &e.value))
            .ok_or_else(|| SolverError::UnknownEntity {
                entity: e.to_string(),
                constraint: c.id.clone(),
            })
    };
    let lhs = locate(&c.lhs)?;
    let rhs = match (&c.rhs, c.house) {
        (Some(rhs), _) => locate(rhs)?,
        (None, Some(h)) => h,
        (None, None) => return Err(SolverError::Malformed(c.to_string())),
    };
    Ok(c.kind.holds_between(lhs, rhs) != c.is_negated())
}

/// The constraint implied by answering `q` with `answer`.
pub fn implied_constraint(q: &Query, answer: bool) -> Constraint {
    let asserted = q.to_constraint();
    if answer {
        asserted
    } else {
        asserted.negated()
    }
}

fn check_cap(cap: u64) -> Result<(), SolverError> {
    if cap < 2 {
        Err(SolverError::InvalidCap(cap))
    } else {
        Ok(())
    }
}

fn grid_from_houses(schema: &Schema, houses: &[u8]) -> SolutionGrid {
    let n = schema.n_houses;
    let positions: Vec<Vec<usize>> = houses
        .chunks(n)
        .map(|col| col.iter().map(|&h| h as usize).collect())
        .collect();
    SolutionGrid::from_positions(schema, &positions)
}

/// Counts grids satisfying every constraint; reports `Overflow` beyond `cap`.
pub fn count_solutions(
    cs: &[Constraint],
    schema: &Schema,
    cap: u64,
) -> Result<CountResult, SolverError> {
    check_cap(cap)?;
    let network = Network::build(schema, cs)?;
    let mut found: u64 = 0;
    let mut witnesses = Vec::new();
    network.for_each_solution(|houses| {
        found += 1;
        if witnesses.len() < 2 {
            witnesses.push(grid_from_houses(schema, houses));
        }
        if found > cap {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    });
    let count = if found > cap {
        Count::Overflow
    } else {
        Count::Exact(found)
    };
    Ok(CountResult {
        count,
        cap,
        witnesses,
    })
}

/// Whether `cs` admits exactly one grid, with that grid as witness.
pub fn is_unique(
    cs: &[Constraint],
    schema: &Schema,
) -> Result<(bool, Option<SolutionGrid>), SolverError> {
    let result = count_solutions(cs, schema, 2)?;
    if result.count == Count::Exact(1) {
        Ok((true, result.witnesses.into_iter().next()))
    } else {
        Ok((false, None))
    }
}

/// For each missing clue, whether dropping it from the full set breaks uniqueness.
pub fn check_necessity(p: &Puzzle) -> Result<BTreeMap<String, bool>, SolverError> {
    let full = p.full_constraints();
    let mut out = BTreeMap::new();
    for id in &p.missing {
        let rest: Vec<Constraint> = full.iter().filter(|c| &c.id != id).cloned().collect();
        let result = count_solutions(&rest, &p.schema, 2)?;
        let necessary = result.count != Count::Exact(1) && result.count != Count::Exact(0);
        out.insert(id.clone(), necessary);
    }
    Ok(out)
}

/// All feasible grids of a constraint set, in compact form for repeated scoring.
#[derive(Debug, Clone)]
pub struct SolutionSpace {
    schema: Schema,
    /// Row-major: `houses[s * vars + var]` is the 0-based house of `var` in solution `s`.
    houses: Vec<u8>,
    vars: usize,
}

impl SolutionSpace {
    pub fn len(&self) -> usize {
        if self.vars == 0 {
            0
        } else {
            self.houses.len() / self.vars
        }
    }

    pub fn is_empty(&self) -> bool {
        self.houses.is_empty()
    }

    fn rows(&self) -> impl Iterator<Item = &[u8]> {
        self.houses.chunks(self.vars)
    }

    /// Number of solutions on which `c` holds.
    pub fn count_satisfying(&self, c: &Constraint) -> Result<u64, SolverError> {
        let compiled = Compiled::compile(c, &self.schema)?;
        Ok(self.rows().filter(|h| compiled.eval(h)).count() as u64)
    }

    /// Keeps only the solutions on which `c` holds.
    pub fn restrict(&mut self, c: &Constraint) -> Result<(), SolverError> {
        let compiled = Compiled::compile(c, &self.schema)?;
        let vars = self.vars;
        let kept: Vec<u8> = self
            .houses
            .chunks(vars)
            .filter(|h| compiled.eval(h))
            .flatten()
            .copied()
            .collect();
        self.houses = kept;
        Ok(())
    }

    pub fn grid(&self, index: usize) -> Option<SolutionGrid> {
        self.rows()
            .nth(index)
            .map(|h| grid_from_houses(&self.schema, h))
    }

    /// 1-based house of `(attr, value)` in solution `index`.
    pub fn house(&self, index: usize, attr: usize, value: usize) -> usize {
        self.houses[index * self.vars + attr * self.schema.n_houses + value] as usize + 1
    }
}

/// Enumerates all solutions, or `None` when there are more than `cap`.
pub fn enumerate_solutions(
    cs: &[Constraint],
    schema: &Schema,
    cap: u64,
) -> Result<Option<SolutionSpace>, SolverError> {
    check_cap(cap)?;
    let network = Network::build(schema, cs)?;
    let vars = network.n_vars();
    let mut houses = Vec::new();
    let mut found: u64 = 0;
    network.for_each_solution(|h| {
        found += 1;
        if found > cap {
            return ControlFlow::Break(());
        }
        houses.extend_from_slice(h);
        ControlFlow::Continue(())
    });
    if found > cap {
        return Ok(None);
    }
    Ok(Some(SolutionSpace {
        schema: schema.clone(),
        houses,
        vars,
    }))
}

#[cfg(test)]
mod tests;
