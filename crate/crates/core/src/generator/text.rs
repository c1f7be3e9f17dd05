//! Templated English renderings of clues and their inverse.

use std::collections::HashMap;

use thiserror::Error;

use super::catalog::DomainCatalog;
use crate::puzzle::{ClueKind, Constraint, Entity, Schema};
use crate::token::canonicalize_token;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TextError {
    #[error("negated constraints have no clue text: {0}")]
    Negated(String),
    #[error("clue text {text:?} matches no template")]
    NoMatch { text: String },
    #[error("clue text {text:?} is ambiguous ({matches} readings)")]
    Ambiguous { text: String, matches: usize },
}

fn template(kind: ClueKind) -> &'static str {
    match kind {
        ClueKind::FoundAt => "{L} is house{R}",
        ClueKind::SameHouse => "{L} is {R}",
        ClueKind::NotAt => "{L} is not {R}",
        ClueKind::DirectLeft => "{L} is directly left of {R}",
        ClueKind::DirectRight => "{L} is directly right of {R}",
        ClueKind::SideBySide => "{L} and {R} are next to each other",
        ClueKind::LeftOf => "{L} is somewhere to the left of {R}",
        ClueKind::RightOf => "{L} is somewhere to the right of {R}",
        ClueKind::OneBetween => "There is one house between {L} and {R}",
        ClueKind::TwoBetween => "There are two houses between {L} and {R}",
    }
}

fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// Renders an asserted clue, e.g. `The dragonfruit smoothie lover is eric.`
pub fn render_clue_text(c: &Constraint, catalog: &DomainCatalog) -> Result<String, TextError> {
    if c.is_negated() {
        return Err(TextError::Negated(c.to_string()));
    }
    let lhs = catalog.phrase(&c.lhs.attr, &c.lhs.value);
    let rhs = match (&c.rhs, c.house) {
        (Some(r), _) => catalog.phrase(&r.attr, &r.value),
        (None, Some(h)) => h.to_string(),
        (None, None) => String::new(),
    };
    let body = template(c.kind).replace("{L}", &lhs).replace("{R}", &rhs);
    Ok(format!("{}.", capitalize(&body)))
}

/// Phrase -> entity lookup for one puzzle.
struct PhraseIndex {
    phrases: HashMap<String, Vec<Entity>>,
}

impl PhraseIndex {
    fn new(schema: &Schema, catalog: &DomainCatalog) -> Self {
        let mut phrases: HashMap<String, Vec<Entity>> = HashMap::new();
        for (a, attr) in schema.attributes.iter().enumerate() {
            for value in &schema.domains[a] {
                let key = canonicalize_token(&catalog.phrase(attr, value)).unwrap_or_default();
                phrases
                    .entry(key)
                    .or_default()
                    .push(Entity::new(attr.clone(), value.clone()));
            }
        }
        PhraseIndex { phrases }
    }

    fn lookup(&self, phrase: &str) -> &[Entity] {
        self.phrases.get(phrase).map(Vec::as_slice).unwrap_or(&[])
    }
}

/// Splits `text` against a two-slot template, yielding every `(L, R)` reading.
fn split_template<'t>(text: &'t str, template: &str) -> Vec<(&'t str, &'t str)> {
    let template = template.to_lowercase();
    let (prefix, rest) = template.split_once("{l}").expect("template has {L}");
    let (sep, suffix) = rest.split_once("{r}").expect("template has {R}");
    let Some(body) = text
        .strip_prefix(prefix)
        .and_then(|t| t.strip_suffix(suffix))
    else {
        return Vec::new();
    };
    body.match_indices(sep)
        .map(|(i, _)| (&body[..i], &body[i + sep.len()..]))
        .filter(|(l, r)| !l.is_empty() && !r.is_empty())
        .collect()
}

/// Recovers the constraint behind a rendered clue. Exactly one reading must exist.
pub fn parse_clue_text(
    text: &str,
    id: &str,
    schema: &Schema,
    catalog: &DomainCatalog,
) -> Result<Constraint, TextError> {
    let normalized =
        canonicalize_token(text).map_err(|_| TextError::NoMatch { text: text.into() })?;
    let normalized = normalized.strip_suffix('.').unwrap_or(&normalized);
    let index = PhraseIndex::new(schema, catalog);
    let mut readings = Vec::new();
    for kind in ClueKind::ALL {
        for (l, r) in split_template(normalized, template(kind)) {
            for lhs in index.lookup(l) {
                if kind == ClueKind::FoundAt {
                    if r.bytes().all(|b| b.is_ascii_digit()) {
                        if let Ok(h) = r.parse::<usize>() {
                            if (1..=schema.n_houses).contains(&h) {
                                readings.push(Constraint::found_at(id, h, lhs.clone()));
                            }
                        }
                    }
                    continue;
                }
                for rhs in index.lookup(r) {
                    readings.push(Constraint::relation(id, kind, lhs.clone(), rhs.clone()));
                }
            }
        }
    }
    match readings.len() {
        0 => Err(TextError::NoMatch { text: text.into() }),
        1 => Ok(readings.pop().expect("one reading")),
        n => Err(TextError::Ambiguous {
            text: text.into(),
            matches: n,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::figure_puzzle;

    #[test]
    fn reference_renderings() {
        let catalog = DomainCatalog::shipped();
        let same = Constraint::relation(
            "c1",
            ClueKind::SameHouse,
            Entity::new("Smoothie", "dragonfruit"),
            Entity::new("Name", "eric"),
        );
        assert_eq!(
            render_clue_text(&same, &catalog).unwrap(),
            "The dragonfruit smoothie lover is eric."
        );
        let found = Constraint::found_at("c2", 2, Entity::new("Color", "red"));
        assert_eq!(
            render_clue_text(&found, &catalog).unwrap(),
            "The red house is house2."
        );
        let between = Constraint::relation(
            "c3",
            ClueKind::TwoBetween,
            Entity::new("Name", "arnold"),
            Entity::new("Color", "blue"),
        );
        assert_eq!(
            render_clue_text(&between, &catalog).unwrap(),
            "There are two houses between arnold and the blue house."
        );
    }

    #[test]
    fn negated_has_no_text() {
        let c = Constraint::found_at("q1", 1, Entity::new("Name", "eric")).negated();
        assert!(matches!(
            render_clue_text(&c, &DomainCatalog::shipped()),
            Err(TextError::Negated(_))
        ));
    }

    #[test]
    fn fixture_clues_round_trip() {
        let p = figure_puzzle();
        let catalog = DomainCatalog::shipped();
        for clue in &p.full_clues {
            let back =
                parse_clue_text(&clue.text, &clue.constraint.id, &p.schema, &catalog).unwrap();
            assert_eq!(back, clue.constraint);
        }
    }

    #[test]
    fn garbage_is_rejected() {
        let p = figure_puzzle();
        let err = parse_clue_text(
            "Eric owns a zebra.",
            "c9",
            &p.schema,
            &DomainCatalog::shipped(),
        );
        assert!(matches!(err, Err(TextError::NoMatch { .. })));
    }
}
