use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use super::Puzzle;
use crate::solver::{self, Count};

/// A broken puzzle invariant. Violations are data: validation never fails outright.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "violation")]
pub enum Violation {
    /// A clue id is listed both visible and missing.
    OverlapViolation {
        ids: Vec<String>,
    },
    /// visible ∪ missing differs from the full clue set, or ids repeat.
    CoverageViolation {
        ids: Vec<String>,
    },
    /// |missing| outside [1, floor(|full|/2)].
    MaskBoundViolation {
        missing: usize,
        full: usize,
    },
    KStarViolation {
        k_star: usize,
        missing: usize,
    },
    /// The full clue set does not have exactly one solution.
    UniquenessViolation {
        count: String,
    },
    /// The unique solution of the full set is not the stored solution.
    SolutionMismatch,
    /// The visible clues already determine the solution.
    SufficiencyViolation {
        initial_count: String,
    },
    InitialCountMismatch {
        stored: u64,
        recount: String,
    },
    /// A source clue is negated or malformed.
    ClueViolation {
        id: String,
        detail: String,
    },
    /// A clue does not hold on the stored solution.
    UnsoundClue {
        id: String,
    },
    GridViolation {
        detail: String,
    },
    /// Necessity was promised but a missing clue is redundant.
    NecessityViolation {
        ids: Vec<String>,
    },
}

impl Violation {
    pub fn name(&self) -> &'static str {
        match self {
            Violation::OverlapViolation { .. } => "OverlapViolation",
            Violation::CoverageViolation { .. } => "CoverageViolation",
            Violation::MaskBoundViolation { .. } => "MaskBoundViolation",
            Violation::KStarViolation { .. } => "KStarViolation",
            Violation::UniquenessViolation { .. } => "UniquenessViolation",
            Violation::SolutionMismatch => "SolutionMismatch",
            Violation::SufficiencyViolation { .. } => "SufficiencyViolation",
            Violation::InitialCountMismatch { .. } => "InitialCountMismatch",
            Violation::ClueViolation { .. } => "ClueViolation",
            Violation::UnsoundClue { .. } => "UnsoundClue",
            Violation::GridViolation { .. } => "GridViolation",
            Violation::NecessityViolation { .. } => "NecessityViolation",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())?;
        match self {
            Violation::OverlapViolation { ids }
            | Violation::CoverageViolation { ids }
            | Violation::NecessityViolation { ids } => write!(f, " {ids:?}"),
            Violation::MaskBoundViolation { missing, full } => {
                write!(f, " missing={missing} full={full}")
            }
            Violation::KStarViolation { k_star, missing } => {
                write!(f, " k_star={k_star} missing={missing}")
            }
            Violation::UniquenessViolation { count } => write!(f, " count={count}"),
            Violation::SolutionMismatch => Ok(()),
            Violation::SufficiencyViolation { initial_count } => {
                write!(f, " initial_count={initial_count}")
            }
            Violation::InitialCountMismatch { stored, recount } => {
                write!(f, " stored={stored} recount={recount}")
            }
            Violation::ClueViolation { id, detail } => write!(f, " {id}: {detail}"),
            Violation::UnsoundClue { id } => write!(f, " {id}"),
            Violation::GridViolation { detail } => write!(f, " {detail}"),
        }
    }
}

/// Checks every puzzle invariant, recounting solution spaces with the solver.
pub fn validate_puzzle(p: &Puzzle) -> Vec<Violation> {
    let mut out = Vec::new();

    if let Err(detail) = p.solution.conforms_to(&p.schema) {
        out.push(Violation::GridViolation { detail });
        // Counting against a broken schema is meaningless.
        return out;
    }

    let mut all_ids = BTreeSet::new();
    let mut repeated = Vec::new();
    for clue in &p.full_clues {
        let c = &clue.constraint;
        if !all_ids.insert(c.id.clone()) {
            repeated.push(c.id.clone());
        }
        if c.is_negated() {
            out.push(Violation::ClueViolation {
                id: c.id.clone(),
                detail: "source clue is negated".into(),
            });
        }
        match solver::holds(c, &p.solution) {
            Ok(true) => {}
            Ok(false) => out.push(Violation::UnsoundClue { id: c.id.clone() }),
            Err(e) => out.push(Violation::ClueViolation {
                id: c.id.clone(),
                detail: e.to_string(),
            }),
        }
    }

    let visible: BTreeSet<&String> = p.visible.iter().collect();
    let missing: BTreeSet<&String> = p.missing.iter().collect();
    let overlap: Vec<String> = visible
        .intersection(&missing)
        .map(|s| s.to_string())
        .collect();
    if !overlap.is_empty() {
        out.push(Violation::OverlapViolation { ids: overlap });
    }
    let listed: BTreeSet<&String> = visible.union(&missing).copied().collect();
    let mut coverage: Vec<String> = all_ids
        .iter()
        .filter(|id| !listed.contains(id))
        .chain(listed.iter().copied().filter(|id| !all_ids.contains(*id)))
        .cloned()
        .collect();
    coverage.extend(repeated);
    if visible.len() != p.visible.len() || missing.len() != p.missing.len() {
        coverage.push("<repeated mask entry>".into());
    }
    if !coverage.is_empty() {
        out.push(Violation::CoverageViolation { ids: coverage });
    }

    let full_len = p.full_clues.len();
    if p.missing.is_empty() || p.missing.len() > full_len / 2 {
        out.push(Violation::MaskBoundViolation {
            missing: p.missing.len(),
            full: full_len,
        });
    }
    if p.k_star != p.missing.len() {
        out.push(Violation::KStarViolation {
            k_star: p.k_star,
            missing: p.missing.len(),
        });
    }
    if out
        .iter()
        .any(|v| matches!(v, Violation::ClueViolation { .. }))
    {
        return out;
    }

    let full = p.full_constraints();
    match solver::count_solutions(&full, &p.schema, 2) {
        Ok(result) if result.count == Count::Exact(1) => {
            if result.witnesses.first() != Some(&p.solution) {
                out.push(Violation::SolutionMismatch);
            }
        }
        Ok(result) => out.push(Violation::UniquenessViolation {
            count: result.count.to_string(),
        }),
        Err(e) => out.push(Violation::ClueViolation {
            id: "<full>".into(),
            detail: e.to_string(),
        }),
    }

    let visible_set: Vec<_> = full
        .iter()
        .filter(|c| visible.contains(&c.id))
        .cloned()
        .collect();
    if p.initial_count <= 1 {
        out.push(Violation::SufficiencyViolation {
            initial_count: p.initial_count.to_string(),
        });
    }
    match solver::count_solutions(&visible_set, &p.schema, solver::DEFAULT_CAP) {
        Ok(result) => {
            if result.count != Count::Exact(p.initial_count) {
                out.push(Violation::InitialCountMismatch {
                    stored: p.initial_count,
                    recount: result.count.to_string(),
                });
            }
            if p.initial_count > 1 && matches!(result.count, Count::Exact(n) if n <= 1) {
                out.push(Violation::SufficiencyViolation {
                    initial_count: result.count.to_string(),
                });
            }
        }
        Err(e) => out.push(Violation::ClueViolation {
            id: "<visible>".into(),
            detail: e.to_string(),
        }),
    }

    if p.necessity_enforced {
        if let Ok(necessity) = solver::check_necessity(p) {
            let redundant: Vec<String> = necessity
                .into_iter()
                .filter(|(_, needed)| !needed)
                .map(|(id, _)| id)
                .collect();
            if !redundant.is_empty() {
                out.push(Violation::NecessityViolation { ids: redundant });
            }
        }
    }
    out
}
