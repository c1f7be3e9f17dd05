//! Puzzle data model: entities, typed constraints, solution grids and puzzles.

mod validate;
mod wire;

use std::collections::BTreeMap;
use std::fmt;

use crate::token::{canonicalize_token, house_label};

pub use validate::{validate_puzzle, Violation};
pub use wire::{
    ConstraintRecord, DatasetRecord, EntityRecord, GeneratorInfo, ParsedRecord, SolutionRecord,
    WireError,
};

/// Largest supported house count; domains are tracked as 8-bit house masks.
pub const MAX_HOUSES: usize = 8;

/// Clue and query kinds. `FoundAt` is the fact kind, the other nine are relations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ClueKind {
    FoundAt,
    SameHouse,
    NotAt,
    DirectLeft,
    DirectRight,
    SideBySide,
    LeftOf,
    RightOf,
    OneBetween,
    TwoBetween,
}

impl ClueKind {
    pub const ALL: [ClueKind; 10] = [
        ClueKind::FoundAt,
        ClueKind::SameHouse,
        ClueKind::NotAt,
        ClueKind::DirectLeft,
        ClueKind::DirectRight,
        ClueKind::SideBySide,
        ClueKind::LeftOf,
        ClueKind::RightOf,
        ClueKind::OneBetween,
        ClueKind::TwoBetween,
    ];

    /// The nine relations admissible in relation queries.
    pub const RELATIONS: [ClueKind; 9] = [
        ClueKind::SameHouse,
        ClueKind::NotAt,
        ClueKind::DirectLeft,
        ClueKind::DirectRight,
        ClueKind::SideBySide,
        ClueKind::LeftOf,
        ClueKind::RightOf,
        ClueKind::OneBetween,
        ClueKind::TwoBetween,
    ];

    pub fn rel_name(self) -> &'static str {
        match self {
            ClueKind::FoundAt => "found_at",
            ClueKind::SameHouse => "same_house",
            ClueKind::NotAt => "not_at",
            ClueKind::DirectLeft => "direct_left",
            ClueKind::DirectRight => "direct_right",
            ClueKind::SideBySide => "side_by_side",
            ClueKind::LeftOf => "left_of",
            ClueKind::RightOf => "right_of",
            ClueKind::OneBetween => "one_between",
            ClueKind::TwoBetween => "two_between",
        }
    }

    /// Upper-case clue-type label (`FOUND_AT`, `SAME_HOUSE`, ...).
    pub fn label(self) -> String {
        self.rel_name().to_ascii_uppercase()
    }

    pub fn from_rel_name(name: &str) -> Option<ClueKind> {
        let canon = canonicalize_token(name).ok()?;
        ClueKind::ALL.into_iter().find(|k| k.rel_name() == canon)
    }

    pub fn is_fact(self) -> bool {
        self == ClueKind::FoundAt
    }

    /// Asserted truth of a relation given 1-based houses of its operands.
    ///
    /// For `FoundAt` the arguments are the entity's house and the target house.
    pub fn holds_between(self, lhs: usize, rhs: usize) -> bool {
        let diff = lhs.abs_diff(rhs);
        match self {
            ClueKind::FoundAt | ClueKind::SameHouse => lhs == rhs,
            ClueKind::NotAt => lhs != rhs,
            ClueKind::DirectLeft => lhs + 1 == rhs,
            ClueKind::DirectRight => lhs == rhs + 1,
            ClueKind::SideBySide => diff == 1,
            ClueKind::LeftOf => lhs < rhs,
            ClueKind::RightOf => lhs > rhs,
            ClueKind::OneBetween => diff == 2,
            ClueKind::TwoBetween => diff == 3,
        }
    }
}

impl fmt::Display for ClueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.rel_name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum Polarity {
    #[default]
    Asserted,
    Negated,
}

impl Polarity {
    pub fn flip(self) -> Polarity {
        match self {
            Polarity::Asserted => Polarity::Negated,
            Polarity::Negated => Polarity::Asserted,
        }
    }
}

/// An attribute/value pair such as `Name = eric`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Entity {
    pub attr: String,
    pub value: String,
}

impl Entity {
    pub fn new(attr: impl Into<String>, value: impl Into<String>) -> Self {
        Entity {
            attr: attr.into(),
            value: value.into(),
        }
    }

    fn canonical(&self) -> (String, String) {
        (
            canonicalize_token(&self.attr).unwrap_or_default(),
            canonicalize_token(&self.value).unwrap_or_default(),
        )
    }
}

impl fmt::Display for Entity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}", self.attr, self.value)
    }
}

/// A typed symbolic clue, or the constraint implied by a query answer.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Constraint {
    pub id: String,
    pub kind: ClueKind,
    pub lhs: Entity,
    pub rhs: Option<Entity>,
    /// 1-based; only present for `FoundAt`.
    pub house: Option<usize>,
    pub polarity: Polarity,
}

/// Identity of a constraint's content, ignoring its id.
pub type ConstraintKey = (
    ClueKind,
    (String, String),
    Option<(String, String)>,
    Option<usize>,
    Polarity,
);

impl Constraint {
    pub fn found_at(id: impl Into<String>, house: usize, entity: Entity) -> Self {
        Constraint {
            id: id.into(),
            kind: ClueKind::FoundAt,
            lhs: entity,
            rhs: None,
            house: Some(house),
            polarity: Polarity::Asserted,
        }
    }

    /// Builds a two-entity constraint. `kind` must not be `FoundAt`.
    pub fn relation(id: impl Into<String>, kind: ClueKind, lhs: Entity, rhs: Entity) -> Self {
        assert!(
            !kind.is_fact(),
            "found_at takes a house, not a second entity"
        );
        Constraint {
            id: id.into(),
            kind,
            lhs,
            rhs: Some(rhs),
            house: None,
            polarity: Polarity::Asserted,
        }
    }

    pub fn negated(&self) -> Self {
        Constraint {
            polarity: self.polarity.flip(),
            ..self.clone()
        }
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn is_negated(&self) -> bool {
        self.polarity == Polarity::Negated
    }

    /// FOUND_AT carries a house and no rhs; every other kind carries an rhs and no house.
    pub fn is_well_shaped(&self) -> bool {
        if self.kind.is_fact() {
            self.rhs.is_none() && self.house.is_some()
        } else {
            self.rhs.is_some() && self.house.is_none()
        }
    }

    pub fn key(&self) -> ConstraintKey {
        (
            self.kind,
            self.lhs.canonical(),
            self.rhs.as_ref().map(Entity::canonical),
            self.house,
            self.polarity,
        )
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_negated() {
            f.write_str("NOT ")?;
        }
        match (&self.rhs, self.house) {
            (Some(rhs), _) => write!(f, "{}({}, {})", self.kind.label(), self.lhs, rhs),
            (None, Some(h)) => write!(f, "{}({}, {})", self.kind.label(), house_label(h), self.lhs),
            (None, None) => write!(f, "{}({})", self.kind.label(), self.lhs),
        }
    }
}

/// Grid dimensions and attribute domains, plus per-puzzle value aliases.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    pub n_houses: usize,
    pub attributes: Vec<String>,
    /// `domains[a]` lists the canonical values of `attributes[a]` in domain order.
    pub domains: Vec<Vec<String>>,
    /// Canonical alias -> canonical value.
    pub aliases: BTreeMap<String, String>,
}

impl Schema {
    pub fn new(n_houses: usize, attributes: Vec<String>, domains: Vec<Vec<String>>) -> Self {
        Schema {
            n_houses,
            attributes,
            domains,
            aliases: BTreeMap::new(),
        }
    }

    pub fn n_attributes(&self) -> usize {
        self.attributes.len()
    }

    pub fn attr_index(&self, raw: &str) -> Option<usize> {
        let canon = canonicalize_token(raw).ok()?;
        self.attributes
            .iter()
            .position(|a| canonicalize_token(a).ok().as_deref() == Some(canon.as_str()))
    }

    /// Resolves a raw value (after normalization and alias mapping) within one attribute.
    pub fn value_index(&self, attr: usize, raw: &str) -> Option<usize> {
        let canon = canonicalize_token(raw).ok()?;
        let domain = self.domains.get(attr)?;
        let direct = domain.iter().position(|v| *v == canon);
        direct.or_else(|| {
            let target = self.aliases.get(&canon)?;
            domain.iter().position(|v| v == target)
        })
    }

    pub fn entity_index(&self, e: &Entity) -> Option<(usize, usize)> {
        let a = self.attr_index(&e.attr)?;
        let v = self.value_index(a, &e.value)?;
        Some((a, v))
    }

    pub fn entity(&self, attr: usize, value: usize) -> Entity {
        Entity::new(
            self.attributes[attr].clone(),
            self.domains[attr][value].clone(),
        )
    }

    /// Header row of the solution format: `["House", attr1, ...]`.
    pub fn header(&self) -> Vec<String> {
        std::iter::once("House".to_string())
            .chain(self.attributes.iter().cloned())
            .collect()
    }

    /// Number of grids with no clues at all: `(N!)^M`, or `None` on u64 overflow.
    pub fn unconstrained_count(&self) -> Option<u64> {
        let fact: u64 = (1..=self.n_houses as u64).product();
        let mut total: u64 = 1;
        for _ in 0..self.n_attributes() {
            total = total.checked_mul(fact)?;
        }
        Some(total)
    }
}

/// A fully filled, all-different assignment of values to houses.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SolutionGrid {
    pub n_houses: usize,
    pub attributes: Vec<String>,
    /// `rows[h][a]` is the canonical value of attribute `a` in house `h + 1`.
    pub rows: Vec<Vec<String>>,
}

impl SolutionGrid {
    /// Builds a grid from `positions[a][v]` = 0-based house of value `v` of attribute `a`.
    pub fn from_positions(schema: &Schema, positions: &[Vec<usize>]) -> Self {
        let mut rows = vec![vec![String::new(); schema.n_attributes()]; schema.n_houses];
        for (a, column) in positions.iter().enumerate() {
            for (v, &h) in column.iter().enumerate() {
                rows[h][a] = schema.domains[a][v].clone();
            }
        }
        SolutionGrid {
            n_houses: schema.n_houses,
            attributes: schema.attributes.clone(),
            rows,
        }
    }

    /// Value of attribute index `attr` in 1-based `house`.
    pub fn value(&self, house: usize, attr: usize) -> Option<&str> {
        self.rows
            .get(house.checked_sub(1)?)?
            .get(attr)
            .map(String::as_str)
    }

    pub fn attr_index(&self, raw: &str) -> Option<usize> {
        let canon = canonicalize_token(raw).ok()?;
        self.attributes
            .iter()
            .position(|a| canonicalize_token(a).ok().as_deref() == Some(canon.as_str()))
    }

    /// 1-based house holding `value` for attribute index `attr`.
    pub fn house_of(&self, attr: usize, value: &str) -> Option<usize> {
        let canon = canonicalize_token(value).ok()?;
        self.rows
            .iter()
            .position(|row| row.get(attr).map(String::as_str) == Some(canon.as_str()))
            .map(|h| h + 1)
    }

    pub fn header(&self) -> Vec<String> {
        std::iter::once("House".to_string())
            .chain(self.attributes.iter().cloned())
            .collect()
    }

    /// Rows in the submission format: house number first, then values.
    pub fn table_rows(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .enumerate()
            .map(|(h, row)| {
                std::iter::once((h + 1).to_string())
                    .chain(row.iter().cloned())
                    .collect()
            })
            .collect()
    }

    /// Checks dimensions and the all-different property against `schema`.
    pub fn conforms_to(&self, schema: &Schema) -> Result<(), String> {
        if self.n_houses != schema.n_houses || self.rows.len() != schema.n_houses {
            return Err(format!(
                "grid has {} rows, expected {}",
                self.rows.len(),
                schema.n_houses
            ));
        }
        if self.attributes != schema.attributes {
            return Err("grid attributes differ from puzzle attributes".into());
        }
        for (a, domain) in schema.domains.iter().enumerate() {
            let mut seen = vec![false; domain.len()];
            for (h, row) in self.rows.iter().enumerate() {
                let Some(raw) = row.get(a) else {
                    return Err(format!(
                        "house {} is missing attribute {}",
                        h + 1,
                        schema.attributes[a]
                    ));
                };
                let Some(v) = schema.value_index(a, raw) else {
                    return Err(format!(
                        "value {raw:?} is not in the {} domain",
                        schema.attributes[a]
                    ));
                };
                if std::mem::replace(&mut seen[v], true) {
                    return Err(format!(
                        "value {raw:?} of {} appears twice",
                        schema.attributes[a]
                    ));
                }
            }
        }
        Ok(())
    }
}

/// A clue together with its templated English rendering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clue {
    pub constraint: Constraint,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Puzzle {
    pub id: String,
    pub schema: Schema,
    pub full_clues: Vec<Clue>,
    pub visible: Vec<String>,
    pub missing: Vec<String>,
    pub solution: SolutionGrid,
    pub k_star: usize,
    pub initial_count: u64,
    pub necessity_enforced: bool,
    pub generator: Option<GeneratorInfo>,
}

impl Puzzle {
    pub fn n_houses(&self) -> usize {
        self.schema.n_houses
    }

    pub fn clue(&self, id: &str) -> Option<&Clue> {
        self.full_clues.iter().find(|c| c.constraint.id == id)
    }

    pub fn full_constraints(&self) -> Vec<Constraint> {
        self.full_clues
            .iter()
            .map(|c| c.constraint.clone())
            .collect()
    }

    pub fn visible_clues(&self) -> Vec<&Clue> {
        self.visible.iter().filter_map(|id| self.clue(id)).collect()
    }

    pub fn missing_clues(&self) -> Vec<&Clue> {
        self.missing.iter().filter_map(|id| self.clue(id)).collect()
    }

    pub fn visible_constraints(&self) -> Vec<Constraint> {
        self.visible_clues()
            .into_iter()
            .map(|c| c.constraint.clone())
            .collect()
    }

    /// Size label used for grouping: the generator preset when known, else `NxM`.
    pub fn size_label(&self) -> String {
        match &self.generator {
            Some(info) => info.preset.clone(),
            None => format!("{}x{}", self.schema.n_houses, self.schema.n_attributes()),
        }
    }
}
