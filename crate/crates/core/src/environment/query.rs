//! Query schema validation and canonicalization.

use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::EnvType;
use crate::puzzle::{ClueKind, Constraint, Entity, Schema};
use crate::token::{canonicalize_token, house_label, parse_house};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryKind {
    Fact,
    Relation,
}

impl fmt::Display for QueryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QueryKind::Fact => "fact",
            QueryKind::Relation => "relation",
        })
    }
}

/// A validated, canonicalized query against the oracle.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Query {
    Fact {
        house: usize,
        entity: Entity,
    },
    Relation {
        rel: ClueKind,
        lhs: Entity,
        rhs: Entity,
    },
}

#[derive(Serialize)]
struct FactWire<'a> {
    #[serde(rename = "type")]
    ty: &'static str,
    rel: &'static str,
    house: String,
    attr: &'a str,
    value: &'a str,
}

#[derive(Serialize)]
struct EntityWire<'a> {
    attr: &'a str,
    value: &'a str,
}

#[derive(Serialize)]
struct RelationWire<'a> {
    #[serde(rename = "type")]
    ty: &'static str,
    rel: &'static str,
    lhs: EntityWire<'a>,
    rhs: EntityWire<'a>,
}

impl Query {
    pub fn kind(&self) -> QueryKind {
        match self {
            Query::Fact { .. } => QueryKind::Fact,
            Query::Relation { .. } => QueryKind::Relation,
        }
    }

    /// The asserted constraint this query tests.
    pub fn to_constraint(&self) -> Constraint {
        match self {
            Query::Fact { house, entity } => Constraint::found_at("q", *house, entity.clone()),
            Query::Relation { rel, lhs, rhs } => {
                Constraint::relation("q", *rel, lhs.clone(), rhs.clone())
            }
        }
    }

    /// The query that tests exactly `c` (polarity ignored).
    pub fn from_constraint(c: &Constraint) -> Option<Query> {
        match (&c.rhs, c.house) {
            (None, Some(house)) => Some(Query::Fact {
                house,
                entity: c.lhs.clone(),
            }),
            (Some(rhs), None) => Some(Query::Relation {
                rel: c.kind,
                lhs: c.lhs.clone(),
                rhs: rhs.clone(),
            }),
            _ => None,
        }
    }

    /// Wire record in the protocol's field order.
    pub fn to_json(&self) -> Value {
        let value = match self {
            Query::Fact { house, entity } => serde_json::to_value(FactWire {
                ty: "fact",
                rel: "found_at",
                house: house_label(*house),
                attr: &entity.attr,
                value: &entity.value,
            }),
            Query::Relation { rel, lhs, rhs } => serde_json::to_value(RelationWire {
                ty: "relation",
                rel: rel.rel_name(),
                lhs: EntityWire {
                    attr: &lhs.attr,
                    value: &lhs.value,
                },
                rhs: EntityWire {
                    attr: &rhs.attr,
                    value: &rhs.value,
                },
            }),
        };
        value.expect("query wire structs serialize")
    }

    /// Compact JSON; also the lexicographic tie-break key for scripted agents.
    pub fn serialized(&self) -> String {
        match self {
            Query::Fact { house, entity } => serde_json::to_string(&FactWire {
                ty: "fact",
                rel: "found_at",
                house: house_label(*house),
                attr: &entity.attr,
                value: &entity.value,
            }),
            Query::Relation { rel, lhs, rhs } => serde_json::to_string(&RelationWire {
                ty: "relation",
                rel: rel.rel_name(),
                lhs: EntityWire {
                    attr: &lhs.attr,
                    value: &lhs.value,
                },
                rhs: EntityWire {
                    attr: &rhs.attr,
                    value: &rhs.value,
                },
            }),
        }
        .expect("query wire structs serialize")
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.serialized())
    }
}

/// Why a query was rejected; checks run in this order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RejectReason {
    MalformedRecord,
    KindForbidden,
    UnknownHouse,
    UnknownAttribute,
    UnknownValue,
    UnknownRelation,
}

impl RejectReason {
    pub fn code(self) -> &'static str {
        match self {
            RejectReason::MalformedRecord => "MalformedRecord",
            RejectReason::KindForbidden => "KindForbidden",
            RejectReason::UnknownHouse => "UnknownHouse",
            RejectReason::UnknownAttribute => "UnknownAttribute",
            RejectReason::UnknownValue => "UnknownValue",
            RejectReason::UnknownRelation => "UnknownRelation",
        }
    }
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rejection {
    pub reason: RejectReason,
    /// Kind named by the record's `type` field, when it could be read.
    pub declared: Option<QueryKind>,
    pub detail: String,
}

/// Outcome of validating and answering one query.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryVerdict {
    pub valid: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<RejectReason>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub answer: Option<bool>,
}

fn reject(
    reason: RejectReason,
    declared: Option<QueryKind>,
    detail: impl Into<String>,
) -> Rejection {
    Rejection {
        reason,
        declared,
        detail: detail.into(),
    }
}

fn string_field<'a>(
    obj: &'a Map<String, Value>,
    key: &str,
    declared: QueryKind,
) -> Result<&'a str, Rejection> {
    match obj.get(key) {
        Some(Value::String(s)) => Ok(s),
        Some(_) => Err(reject(
            RejectReason::MalformedRecord,
            Some(declared),
            format!("field {key:?} must be a string"),
        )),
        None => Err(reject(
            RejectReason::MalformedRecord,
            Some(declared),
            format!("missing field {key:?}"),
        )),
    }
}

fn check_keys(
    obj: &Map<String, Value>,
    allowed: &[&str],
    declared: Option<QueryKind>,
    what: &str,
) -> Result<(), Rejection> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(extra) => Err(reject(
            RejectReason::MalformedRecord,
            declared,
            format!("unexpected field {extra:?} in {what}"),
        )),
        None => Ok(()),
    }
}

struct RawEntity<'a> {
    attr: &'a str,
    value: &'a str,
}

fn entity_field<'a>(obj: &'a Map<String, Value>, key: &str) -> Result<RawEntity<'a>, Rejection> {
    let declared = Some(QueryKind::Relation);
    let Some(Value::Object(inner)) = obj.get(key) else {
        return Err(reject(
            RejectReason::MalformedRecord,
            declared,
            format!("field {key:?} must be an entity object"),
        ));
    };
    check_keys(inner, &["attr", "value"], declared, key)?;
    Ok(RawEntity {
        attr: string_field(inner, "attr", QueryKind::Relation)?,
        value: string_field(inner, "value", QueryKind::Relation)?,
    })
}

fn resolve_entity(
    schema: &Schema,
    raw: &RawEntity<'_>,
    declared: QueryKind,
) -> Result<Entity, Rejection> {
    let attr = schema.attr_index(raw.attr).ok_or_else(|| {
        reject(
            RejectReason::UnknownAttribute,
            Some(declared),
            format!("unknown attribute {:?}", raw.attr),
        )
    })?;
    let value = schema.value_index(attr, raw.value).ok_or_else(|| {
        reject(
            RejectReason::UnknownValue,
            Some(declared),
            format!(
                "{:?} is not a value of {}",
                raw.value, schema.attributes[attr]
            ),
        )
    })?;
    Ok(schema.entity(attr, value))
}

/// Structural schema, kind admissibility, then house/attribute/value/relation membership.
pub fn validate_query(raw: &Value, schema: &Schema, env_type: EnvType) -> Result<Query, Rejection> {
    let Value::Object(obj) = raw else {
        return Err(reject(
            RejectReason::MalformedRecord,
            None,
            "query must be a JSON object",
        ));
    };
    let declared = match obj.get("type") {
        Some(Value::String(t)) => match canonicalize_token(t).as_deref() {
            Ok("fact") => QueryKind::Fact,
            Ok("relation") => QueryKind::Relation,
            _ => {
                return Err(reject(
                    RejectReason::MalformedRecord,
                    None,
                    format!("type must be \"fact\" or \"relation\", got {t:?}"),
                ))
            }
        },
        _ => {
            return Err(reject(
                RejectReason::MalformedRecord,
                None,
                "missing string field \"type\"",
            ))
        }
    };

    match declared {
        QueryKind::Fact => {
            check_keys(
                obj,
                &["type", "rel", "house", "attr", "value"],
                Some(declared),
                "fact query",
            )?;
            let rel = match obj.get("rel") {
                None => None,
                Some(_) => Some(string_field(obj, "rel", declared)?),
            };
            let house = string_field(obj, "house", declared)?;
            let attr = string_field(obj, "attr", declared)?;
            let value = string_field(obj, "value", declared)?;
            if !env_type.admits(declared) {
                return Err(reject(
                    RejectReason::KindForbidden,
                    Some(declared),
                    format!("fact queries are not allowed in the {env_type} environment"),
                ));
            }
            let house = parse_house(house, schema.n_houses).ok_or_else(|| {
                reject(
                    RejectReason::UnknownHouse,
                    Some(declared),
                    format!("unknown house {house:?}"),
                )
            })?;
            let entity = resolve_entity(schema, &RawEntity { attr, value }, declared)?;
            if let Some(rel) = rel {
                if ClueKind::from_rel_name(rel) != Some(ClueKind::FoundAt) {
                    return Err(reject(
                        RejectReason::UnknownRelation,
                        Some(declared),
                        format!("fact queries use rel \"found_at\", got {rel:?}"),
                    ));
                }
            }
            Ok(Query::Fact { house, entity })
        }
        QueryKind::Relation => {
            check_keys(
                obj,
                &["type", "rel", "lhs", "rhs"],
                Some(declared),
                "relation query",
            )?;
            let rel = string_field(obj, "rel", declared)?;
            let lhs = entity_field(obj, "lhs")?;
            let rhs = entity_field(obj, "rhs")?;
            if !env_type.admits(declared) {
                return Err(reject(
                    RejectReason::KindForbidden,
                    Some(declared),
                    format!("relation queries are not allowed in the {env_type} environment"),
                ));
            }
            let lhs = resolve_entity(schema, &lhs, declared)?;
            let rhs = resolve_entity(schema, &rhs, declared)?;
            let kind = ClueKind::from_rel_name(rel)
                .filter(|k| ClueKind::RELATIONS.contains(k))
                .ok_or_else(|| {
                    reject(
                        RejectReason::UnknownRelation,
                        Some(declared),
                        format!("unknown relation {rel:?}"),
                    )
                })?;
            if lhs == rhs {
                return Err(reject(
                    RejectReason::MalformedRecord,
                    Some(declared),
                    "lhs and rhs name the same entity",
                ));
            }
            Ok(Query::Relation {
                rel: kind,
                lhs,
                rhs,
            })
        }
    }
}
