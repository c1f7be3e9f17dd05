//! Attribute themes: value pools, noun phrases and aliases.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Theme {
    /// Display name, e.g. `Smoothie`.
    pub attr: String,
    /// Candidate values, canonical tokens.
    pub pool: Vec<String>,
    /// Noun phrase with a `{v}` slot, e.g. `the {v} smoothie lover`.
    pub phrase: String,
    /// Whether a plural `-s` alias is registered for each value.
    #[serde(default)]
    pub plural_aliases: bool,
}

impl Theme {
    fn new(attr: &str, phrase: &str, pool: &[&str]) -> Self {
        Theme {
            attr: attr.to_string(),
            pool: pool.iter().map(|s| s.to_string()).collect(),
            phrase: phrase.to_string(),
            plural_aliases: false,
        }
    }

    pub fn render(&self, value: &str) -> String {
        self.phrase.replace("{v}", value)
    }

    /// Plural-form aliases for the chosen values, alias -> canonical value.
    pub fn aliases(&self, values: &[String]) -> BTreeMap<String, String> {
        if !self.plural_aliases {
            return BTreeMap::new();
        }
        values
            .iter()
            .filter(|v| !v.ends_with('s'))
            .map(|v| (format!("{v}s"), v.clone()))
            .collect()
    }
}

/// Named value pools; attribute `i` of an M-attribute puzzle uses theme `i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainCatalog {
    pub themes: Vec<Theme>,
}

impl DomainCatalog {
    pub fn shipped() -> Self {
        let mut pet = Theme::new(
            "Pet",
            "the {v} owner",
            &[
                "cat", "dog", "bird", "fish", "horse", "rabbit", "hamster", "turtle",
            ],
        );
        pet.plural_aliases = true;
        DomainCatalog {
            themes: vec![
                Theme::new(
                    "Name",
                    "{v}",
                    &[
                        "eric", "arnold", "peter", "alice", "bob", "carol", "david", "fiona",
                    ],
                ),
                Theme::new(
                    "Smoothie",
                    "the {v} smoothie lover",
                    &[
                        "dragonfruit",
                        "lime",
                        "cherry",
                        "mango",
                        "banana",
                        "kiwi",
                        "peach",
                        "blueberry",
                    ],
                ),
                Theme::new(
                    "Color",
                    "the {v} house",
                    &[
                        "red", "green", "blue", "yellow", "white", "purple", "orange", "black",
                    ],
                ),
                pet,
                Theme::new(
                    "Drink",
                    "the {v} drinker",
                    &[
                        "tea", "coffee", "milk", "water", "juice", "soda", "cocoa", "lemonade",
                    ],
                ),
                Theme::new(
                    "Hobby",
                    "the person who likes {v}",
                    &[
                        "painting",
                        "hiking",
                        "chess",
                        "gardening",
                        "cooking",
                        "reading",
                        "knitting",
                        "dancing",
                    ],
                ),
            ],
        }
    }

    pub fn theme(&self, attr: &str) -> Option<&Theme> {
        self.themes
            .iter()
            .find(|t| t.attr.eq_ignore_ascii_case(attr))
    }

    /// Phrase for a value of an attribute, with a generic fallback for
    /// attributes outside the catalog.
    pub fn phrase(&self, attr: &str, value: &str) -> String {
        match self.theme(attr) {
            Some(t) => t.render(value),
            None => format!("the person whose {} is {}", attr.to_lowercase(), value),
        }
    }
}

impl Default for DomainCatalog {
    fn default() -> Self {
        Self::shipped()
    }
}
