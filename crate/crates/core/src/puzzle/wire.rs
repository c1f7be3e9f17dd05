//! Serialized forms of constraints and dataset records.

use std::collections::BTreeMap;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Clue, ClueKind, Constraint, Entity, Polarity, Puzzle, Schema, SolutionGrid};
use crate::token::{canonicalize_token, house_label, parse_house};

#[derive(Debug, Error)]
pub enum WireError {
    #[error("unknown relation {0:?}")]
    UnknownRelation(String),
    #[error("bad house {0:?}")]
    BadHouse(String),
    #[error("constraint {id}: {detail}")]
    Shape { id: String, detail: String },
    #[error("record {id}: {detail}")]
    Record { id: String, detail: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntityRecord {
    pub attr: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParsedRecord {
    Relation {
        lhs: EntityRecord,
        rel: String,
        rhs: EntityRecord,
    },
    Fact {
        rel: String,
        house: String,
        attr: String,
        value: String,
    },
}

/// `{"id": "c1", "parsed": {...}, "type": "relation"}`; `negated` only appears when set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintRecord {
    pub id: String,
    pub parsed: ParsedRecord,
    #[serde(rename = "type")]
    pub kind_type: String,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub negated: bool,
}

impl From<&Entity> for EntityRecord {
    fn from(e: &Entity) -> Self {
        EntityRecord {
            attr: e.attr.clone(),
            value: e.value.clone(),
        }
    }
}

impl From<&EntityRecord> for Entity {
    fn from(e: &EntityRecord) -> Self {
        Entity::new(e.attr.clone(), e.value.clone())
    }
}

impl From<&Constraint> for ConstraintRecord {
    fn from(c: &Constraint) -> Self {
        let parsed = match (&c.rhs, c.house) {
            (Some(rhs), _) => ParsedRecord::Relation {
                lhs: (&c.lhs).into(),
                rel: c.kind.rel_name().to_string(),
                rhs: rhs.into(),
            },
            (None, house) => ParsedRecord::Fact {
                rel: c.kind.rel_name().to_string(),
                house: house_label(house.unwrap_or(0)),
                attr: c.lhs.attr.clone(),
                value: c.lhs.value.clone(),
            },
        };
        ConstraintRecord {
            id: c.id.clone(),
            parsed,
            kind_type: if c.kind.is_fact() { "fact" } else { "relation" }.to_string(),
            negated: c.is_negated(),
        }
    }
}

impl TryFrom<&ConstraintRecord> for Constraint {
    type Error = WireError;

    fn try_from(r: &ConstraintRecord) -> Result<Self, WireError> {
        let polarity = if r.negated {
            Polarity::Negated
        } else {
            Polarity::Asserted
        };
        let constraint = match &r.parsed {
            ParsedRecord::Relation { lhs, rel, rhs } => {
                let kind = ClueKind::from_rel_name(rel)
                    .filter(|k| !k.is_fact())
                    .ok_or_else(|| WireError::UnknownRelation(rel.clone()))?;
                Constraint::relation(r.id.clone(), kind, lhs.into(), rhs.into())
            }
            ParsedRecord::Fact {
                rel,
                house,
                attr,
                value,
            } => {
                if ClueKind::from_rel_name(rel) != Some(ClueKind::FoundAt) {
                    return Err(WireError::UnknownRelation(rel.clone()));
                }
                let h = parse_house(house, usize::MAX)
                    .ok_or_else(|| WireError::BadHouse(house.clone()))?;
                Constraint::found_at(r.id.clone(), h, Entity::new(attr.clone(), value.clone()))
            }
        };
        let expected = if constraint.kind.is_fact() {
            "fact"
        } else {
            "relation"
        };
        if canonicalize_token(&r.kind_type).ok().as_deref() != Some(expected) {
            return Err(WireError::Shape {
                id: r.id.clone(),
                detail: format!(
                    "type {:?} does not match rel {}",
                    r.kind_type, constraint.kind
                ),
            });
        }
        Ok(Constraint {
            polarity,
            ..constraint
        })
    }
}

impl Serialize for Constraint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        ConstraintRecord::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Constraint {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let record = ConstraintRecord::deserialize(d)?;
        Constraint::try_from(&record).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorInfo {
    pub seed: u64,
    pub preset: String,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl From<&SolutionGrid> for SolutionRecord {
    fn from(g: &SolutionGrid) -> Self {
        SolutionRecord {
            header: g.header(),
            rows: g.table_rows(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClueRecord {
    pub id: String,
    pub text: String,
    pub parsed: ParsedRecord,
    #[serde(rename = "type")]
    pub kind_type: String,
    pub visible: bool,
}

/// One dataset line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub id: String,
    pub n_houses: usize,
    pub attributes: Vec<String>,
    pub domains: IndexMap<String, Vec<String>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub aliases: BTreeMap<String, String>,
    pub clues: Vec<ClueRecord>,
    pub solution: SolutionRecord,
    pub k_star: usize,
    pub initial_count: u64,
    pub necessity_enforced: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorInfo>,
}

impl From<&Puzzle> for DatasetRecord {
    fn from(p: &Puzzle) -> Self {
        let clues = p
            .full_clues
            .iter()
            .map(|clue| {
                let rec = ConstraintRecord::from(&clue.constraint);
                ClueRecord {
                    id: rec.id,
                    text: clue.text.clone(),
                    parsed: rec.parsed,
                    kind_type: rec.kind_type,
                    visible: p.visible.contains(&clue.constraint.id),
                }
            })
            .collect();
        DatasetRecord {
            id: p.id.clone(),
            n_houses: p.schema.n_houses,
            attributes: p.schema.attributes.clone(),
            domains: p
                .schema
                .attributes
                .iter()
                .cloned()
                .zip(p.schema.domains.iter().cloned())
                .collect(),
            aliases: p.schema.aliases.clone(),
            clues,
            solution: (&p.solution).into(),
            k_star: p.k_star,
            initial_count: p.initial_count,
            necessity_enforced: p.necessity_enforced,
            generator: p.generator.clone(),
        }
    }
}

impl TryFrom<&DatasetRecord> for Puzzle {
    type Error = WireError;

    fn try_from(r: &DatasetRecord) -> Result<Self, WireError> {
        let bad = |detail: String| WireError::Record {
            id: r.id.clone(),
            detail,
        };
        let mut domains = Vec::with_capacity(r.attributes.len());
        for attr in &r.attributes {
            let values = r
                .domains
                .get(attr)
                .ok_or_else(|| bad(format!("no domain for attribute {attr:?}")))?;
            domains.push(values.clone());
        }
        let mut schema = Schema::new(r.n_houses, r.attributes.clone(), domains);
        schema.aliases = r.aliases.clone();

        let mut full_clues = Vec::with_capacity(r.clues.len());
        let mut visible = Vec::new();
        let mut missing = Vec::new();
        for clue in &r.clues {
            let record = ConstraintRecord {
                id: clue.id.clone(),
                parsed: clue.parsed.clone(),
                kind_type: clue.kind_type.clone(),
                negated: false,
            };
            let constraint = Constraint::try_from(&record)?;
            if clue.visible {
                visible.push(clue.id.clone());
            } else {
                missing.push(clue.id.clone());
            }
            full_clues.push(Clue {
                constraint,
                text: clue.text.clone(),
            });
        }

        let expected_header = schema.header();
        if r.solution.header != expected_header {
            return Err(bad(format!(
                "solution header {:?} differs from {:?}",
                r.solution.header, expected_header
            )));
        }
        let mut rows = Vec::with_capacity(r.solution.rows.len());
        for (h, row) in r.solution.rows.iter().enumerate() {
            if row.first().map(String::as_str) != Some((h + 1).to_string().as_str()) {
                return Err(bad(format!("solution row {} has wrong house label", h + 1)));
            }
            rows.push(row[1..].to_vec());
        }
        let solution = SolutionGrid {
            n_houses: r.n_houses,
            attributes: r.attributes.clone(),
            rows,
        };

        Ok(Puzzle {
            id: r.id.clone(),
            schema,
            full_clues,
            visible,
            missing,
            solution,
            k_star: r.k_star,
            initial_count: r.initial_count,
            necessity_enforced: r.necessity_enforced,
            generator: r.generator.clone(),
        })
    }
}

impl Serialize for Puzzle {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        DatasetRecord::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Puzzle {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let record = DatasetRecord::deserialize(d)?;
        Puzzle::try_from(&record).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relation_record_matches_reference_layout() {
        let c = Constraint::relation(
            "c1",
            ClueKind::SameHouse,
            Entity::new("Smoothie", "dragonfruit"),
            Entity::new("Name", "eric"),
        );
        let json = serde_json::to_string(&c).unwrap();
        assert_eq!(
            json,
            r#"{"id":"c1","parsed":{"lhs":{"attr":"Smoothie","value":"dragonfruit"},"rel":"same_house","rhs":{"attr":"Name","value":"eric"}},"type":"relation"}"#
        );
        let back: Constraint = serde_json::from_str(&json).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn fact_record_layout_and_negation() {
        let c = Constraint::found_at("c2", 2, Entity::new("Color", "red"));
        let json = serde_json::to_string(&c).unwrap();
        assert_eq!(
            json,
            r#"{"id":"c2","parsed":{"rel":"found_at","house":"house2","attr":"Color","value":"red"},"type":"fact"}"#
        );
        let neg = c.negated();
        let json = serde_json::to_string(&neg).unwrap();
        assert!(json.ends_with(r#""type":"fact","negated":true}"#));
        let back: Constraint = serde_json::from_str(&json).unwrap();
        assert_eq!(back, neg);
    }

    #[test]
    fn type_mismatch_is_rejected() {
        let json = r#"{"id":"c2","parsed":{"rel":"found_at","house":"house2","attr":"Color","value":"red"},"type":"relation"}"#;
        assert!(serde_json::from_str::<Constraint>(json).is_err());
        let json = r#"{"id":"c2","parsed":{"lhs":{"attr":"A","value":"x"},"rel":"adjacent","rhs":{"attr":"B","value":"y"}},"type":"relation"}"#;
        assert!(serde_json::from_str::<Constraint>(json).is_err());
    }
}
