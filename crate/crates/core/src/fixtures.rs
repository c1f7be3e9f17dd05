//! Small hand-built puzzles for tests, examples and documentation.

use crate::generator::{render_clue_text, DomainCatalog};
use crate::puzzle::{Clue, ClueKind, Constraint, Entity, Puzzle, Schema, SolutionGrid};

fn strings(values: &[&str]) -> Vec<String> {
    values.iter().map(|s| s.to_string()).collect()
}

/// The 3x3 reference puzzle: five clues, `c3` withheld, four grids consistent
/// with the visible clues.
///
/// | House | Name   | Smoothie    | Color |
/// |-------|--------|-------------|-------|
/// | 1     | eric   | dragonfruit | red   |
/// | 2     | arnold | lime        | green |
/// | 3     | peter  | cherry      | blue  |
pub fn figure_puzzle() -> Puzzle {
    let schema = Schema::new(
        3,
        strings(&["Name", "Smoothie", "Color"]),
        vec![
            strings(&["eric", "arnold", "peter"]),
            strings(&["dragonfruit", "lime", "cherry"]),
            strings(&["red", "green", "blue"]),
        ],
    );
    let solution = SolutionGrid {
        n_houses: 3,
        attributes: schema.attributes.clone(),
        rows: vec![
            strings(&["eric", "dragonfruit", "red"]),
            strings(&["arnold", "lime", "green"]),
            strings(&["peter", "cherry", "blue"]),
        ],
    };
    let e = Entity::new;
    let constraints = vec![
        Constraint::relation(
            "c1",
            ClueKind::SameHouse,
            e("Smoothie", "dragonfruit"),
            e("Name", "eric"),
        ),
        Constraint::found_at("c2", 2, e("Color", "green")),
        Constraint::relation(
            "c3",
            ClueKind::DirectLeft,
            e("Name", "arnold"),
            e("Name", "peter"),
        ),
        Constraint::relation(
            "c4",
            ClueKind::NotAt,
            e("Smoothie", "cherry"),
            e("Color", "green"),
        ),
        Constraint::relation(
            "c5",
            ClueKind::LeftOf,
            e("Color", "red"),
            e("Smoothie", "cherry"),
        ),
    ];
    let catalog = DomainCatalog::shipped();
    let full_clues = constraints
        .into_iter()
        .map(|c| Clue {
            text: render_clue_text(&c, &catalog).expect("asserted clue renders"),
            constraint: c,
        })
        .collect();
    Puzzle {
        id: "figure-3x3".into(),
        schema,
        full_clues,
        visible: strings(&["c1", "c2", "c4", "c5"]),
        missing: strings(&["c3"]),
        solution,
        k_star: 1,
        initial_count: 4,
        necessity_enforced: true,
        generator: None,
    }
}
