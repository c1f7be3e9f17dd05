//! Backtracking search over house domains with singleton propagation.
//!
//! Every `(attribute, value)` pair is a variable whose domain is a bitmask of
//! the houses it may still occupy. Assigning a variable removes its house from
//! the other values of the same attribute and filters the domains of every
//! variable it shares a binary constraint with. A house that only one value of
//! an attribute can still take is forced onto that value.

use std::ops::ControlFlow;

use super::SolverError;
use crate::puzzle::{ClueKind, Constraint, Polarity, Schema, MAX_HOUSES};

pub(crate) const MAX_VARS: usize = 64;

/// House masks indexed by variable `attr * n + value`.
pub(crate) type Domains = [u8; MAX_VARS];

/// A constraint resolved to variable indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Compiled {
    /// The variable must lie in `mask`.
    Unary { var: usize, mask: u8 },
    /// `allowed[i]` is the mask of houses for `rhs` when `lhs` sits in house `i`.
    Binary {
        lhs: usize,
        rhs: usize,
        kind: ClueKind,
        negated: bool,
    },
}

impl Compiled {
    pub(crate) fn compile(c: &Constraint, schema: &Schema) -> Result<Compiled, SolverError> {
        if !c.is_well_shaped() {
            return Err(SolverError::Malformed(c.to_string()));
        }
        let n = schema.n_houses;
        let var_of = |e: &crate::puzzle::Entity| {
            schema
                .entity_index(e)
                .map(|(a, v)| a * n + v)
                .ok_or_else(|| SolverError::UnknownEntity {
                    entity: e.to_string(),
                    constraint: c.id.clone(),
                })
        };
        let lhs = var_of(&c.lhs)?;
        let negated = c.polarity == Polarity::Negated;
        let full = full_mask(n);
        match (&c.rhs, c.house) {
            (None, Some(house)) => {
                if house == 0 || house > n {
                    return Err(SolverError::Malformed(c.to_string()));
                }
                let bit = 1u8 << (house - 1);
                let mask = if negated { full & !bit } else { bit };
                Ok(Compiled::Unary { var: lhs, mask })
            }
            (Some(rhs), None) => {
                let rhs = var_of(rhs)?;
                if lhs == rhs {
                    let mask = (0..n)
                        .filter(|&h| c.kind.holds_between(h + 1, h + 1) != negated)
                        .fold(0u8, |m, h| m | (1 << h));
                    Ok(Compiled::Unary { var: lhs, mask })
                } else {
                    Ok(Compiled::Binary {
                        lhs,
                        rhs,
                        kind: c.kind,
                        negated,
                    })
                }
            }
            _ => Err(SolverError::Malformed(c.to_string())),
        }
    }

    /// Truth value on a complete assignment of 0-based houses.
    pub(crate) fn eval(&self, houses: &[u8]) -> bool {
        match *self {
            Compiled::Unary { var, mask } => mask & (1 << houses[var]) != 0,
            Compiled::Binary {
                lhs,
                rhs,
                kind,
                negated,
            } => kind.holds_between(houses[lhs] as usize + 1, houses[rhs] as usize + 1) != negated,
        }
    }
}

pub(crate) fn full_mask(n: usize) -> u8 {
    if n >= 8 {
        u8::MAX
    } else {
        (1u8 << n) - 1
    }
}

#[derive(Debug, Clone)]
struct Edge {
    other: usize,
    /// `allowed[h]` = houses permitted for `other` when this variable sits in `h`.
    allowed: [u8; MAX_HOUSES],
}

/// A constraint network ready for search.
pub(crate) struct Network {
    n: usize,
    m: usize,
    initial: Domains,
    edges: Vec<Vec<Edge>>,
    infeasible: bool,
}

impl Network {
    pub(crate) fn build(
        schema: &Schema,
        constraints: &[Constraint],
    ) -> Result<Network, SolverError> {
        let n = schema.n_houses;
        let m = schema.n_attributes();
        if n == 0 || n > MAX_HOUSES || n * m > MAX_VARS {
            return Err(SolverError::UnsupportedGrid(format!(
                "{n} houses x {m} attributes"
            )));
        }
        if schema.domains.len() != m || schema.domains.iter().any(|d| d.len() != n) {
            return Err(SolverError::UnsupportedGrid(
                "every attribute needs exactly one value per house".into(),
            ));
        }
        let full = full_mask(n);
        let mut initial = [0u8; MAX_VARS];
        initial[..n * m].fill(full);
        let mut edges = vec![Vec::new(); n * m];
        for c in constraints {
            match Compiled::compile(c, schema)? {
                Compiled::Unary { var, mask } => initial[var] &= mask,
                Compiled::Binary {
                    lhs,
                    rhs,
                    kind,
                    negated,
                } => {
                    let mut forward = [0u8; MAX_HOUSES];
                    let mut backward = [0u8; MAX_HOUSES];
                    for i in 0..n {
                        for j in 0..n {
                            if kind.holds_between(i + 1, j + 1) != negated {
                                forward[i] |= 1 << j;
                                backward[j] |= 1 << i;
                            }
                        }
                    }
                    edges[lhs].push(Edge {
                        other: rhs,
                        allowed: forward,
                    });
                    edges[rhs].push(Edge {
                        other: lhs,
                        allowed: backward,
                    });
                }
            }
        }
        let infeasible = initial[..n * m].contains(&0);
        Ok(Network {
            n,
            m,
            initial,
            edges,
            infeasible,
        })
    }

    pub(crate) fn n_vars(&self) -> usize {
        self.n * self.m
    }

    /// Visits every solution in deterministic order until `visit` breaks.
    ///
    /// Solutions are passed as 0-based houses per variable.
    pub(crate) fn for_each_solution<F>(&self, mut visit: F)
    where
        F: FnMut(&[u8]) -> ControlFlow<()>,
    {
        if self.infeasible {
            return;
        }
        let mut doms = self.initial;
        let mut queue: Vec<usize> = (0..self.n_vars())
            .filter(|&v| doms[v].count_ones() == 1)
            .collect();
        if !self.propagate(&mut doms, &mut queue) {
            return;
        }
        let mut houses = vec![0u8; self.n_vars()];
        let _ = self.descend(&doms, &mut houses, &mut visit);
    }

    fn descend<F>(&self, doms: &Domains, houses: &mut [u8], visit: &mut F) -> ControlFlow<()>
    where
        F: FnMut(&[u8]) -> ControlFlow<()>,
    {
        // Most constrained open variable, lowest index on ties.
        let mut pick = None;
        let mut best = u32::MAX;
        for (v, d) in doms[..self.n_vars()].iter().enumerate() {
            let size = d.count_ones();
            if size > 1 && size < best {
                best = size;
                pick = Some(v);
                if size == 2 {
                    break;
                }
            }
        }
        let Some(var) = pick else {
            for (v, h) in houses.iter_mut().enumerate() {
                *h = doms[v].trailing_zeros() as u8;
            }
            return visit(houses);
        };
        let mut remaining = doms[var];
        let mut queue = Vec::with_capacity(16);
        while remaining != 0 {
            let bit = remaining & remaining.wrapping_neg();
            remaining &= !bit;
            let mut child = *doms;
            child[var] = bit;
            queue.clear();
            queue.push(var);
            if self.propagate(&mut child, &mut queue) {
                self.descend(&child, houses, visit)?;
            }
        }
        ControlFlow::Continue(())
    }

    /// Drains `queue` of newly fixed variables; false on a wipe-out.
    fn propagate(&self, doms: &mut Domains, queue: &mut Vec<usize>) -> bool {
        let n = self.n;
        loop {
            while let Some(var) = queue.pop() {
                let bit = doms[var];
                let house = bit.trailing_zeros() as usize;
                let attr = var / n;
                for sib in attr * n..(attr + 1) * n {
                    if sib != var && doms[sib] & bit != 0 {
                        doms[sib] &= !bit;
                        match doms[sib].count_ones() {
                            0 => return false,
                            1 => queue.push(sib),
                            _ => {}
                        }
                    }
                }
                for edge in &self.edges[var] {
                    let before = doms[edge.other];
                    let after = before & edge.allowed[house];
                    if after != before {
                        doms[edge.other] = after;
                        match after.count_ones() {
                            0 => return false,
                            1 => queue.push(edge.other),
                            _ => {}
                        }
                    }
                }
            }
            // Hidden singles: a house only one value can still take.
            for attr in 0..self.m {
                let vars = attr * n..(attr + 1) * n;
                let mut seen_once = 0u8;
                let mut seen_twice = 0u8;
                for v in vars.clone() {
                    seen_twice |= seen_once & doms[v];
                    seen_once |= doms[v];
                }
                if seen_once != full_mask(n) {
                    return false;
                }
                let unique = seen_once & !seen_twice;
                if unique == 0 {
                    continue;
                }
                for v in vars {
                    let forced = doms[v] & unique;
                    if forced != 0 && doms[v].count_ones() > 1 {
                        if forced.count_ones() > 1 {
                            return false;
                        }
                        doms[v] = forced;
                        queue.push(v);
                    }
                }
            }
            if queue.is_empty() {
                return true;
            }
        }
    }
}
