//! System prompt rendering from the shipped templates.

use serde_json::{json, Map, Value};

use crate::environment::{EnvType, Pricing};
use crate::puzzle::Puzzle;
use crate::token::house_label;

pub const BASE_NORMAL: &str = include_str!("../../prompts/base_normal.txt");
pub const BASE_ONLY_FACT: &str = include_str!("../../prompts/base_only_fact.txt");
pub const BASE_ONLY_RELATION: &str = include_str!("../../prompts/base_only_relation.txt");
pub const BUDGET_SECTION: &str = include_str!("../../prompts/budget_section.txt");
pub const PRICING_SECTION: &str = include_str!("../../prompts/pricing_section.txt");

pub fn base_template(env_type: EnvType) -> &'static str {
    match env_type {
        EnvType::Normal => BASE_NORMAL,
        EnvType::OnlyFact => BASE_ONLY_FACT,
        EnvType::OnlyRelation => BASE_ONLY_RELATION,
    }
}

/// Renders the system prompt: base template, then the budget and pricing
/// sections when those regimes are active.
pub fn render_system_prompt(
    puzzle: &Puzzle,
    env_type: EnvType,
    budget: Option<u32>,
    pricing: Option<&Pricing>,
) -> String {
    let schema = &puzzle.schema;
    let houses: Vec<String> = (1..=schema.n_houses).map(house_label).collect();
    let mut domain = Map::new();
    for (a, attr) in schema.attributes.iter().enumerate() {
        domain.insert(attr.clone(), json!(schema.domains[a]));
    }
    let mut out = base_template(env_type)
        .replace("{houses}", &json!(houses).to_string())
        .replace("{attrs}", &json!(schema.attributes).to_string())
        .replace("{domain}", &Value::Object(domain).to_string())
        .replace("{header}", &json!(schema.header()).to_string());
    if let Some(b) = budget {
        out.push_str(&BUDGET_SECTION.replace("{budget}", &b.to_string()));
    }
    if let Some(p) = pricing {
        out.push_str(
            &PRICING_SECTION
                .replace("{fact_price}", &p.fact_price.to_string())
                .replace("{relation_price}", &p.relation_price.to_string()),
        );
    }
    out
}

/// The opening user turn: background and the visible clues, numbered.
pub fn render_puzzle_text(puzzle: &Puzzle) -> String {
    let schema = &puzzle.schema;
    let mut out = format!(
        "There are {} houses, numbered 1 to {} from left to right. Each house has a different value for each attribute.\n",
        schema.n_houses, schema.n_houses
    );
    for (a, attr) in schema.attributes.iter().enumerate() {
        out.push_str(&format!("- {}: {}\n", attr, schema.domains[a].join(", ")));
    }
    out.push_str("\nClues:\n");
    for (i, clue) in puzzle.visible_clues().iter().enumerate() {
        out.push_str(&format!("{}. {}\n", i + 1, clue.text));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::figure_puzzle;

    #[test]
    fn placeholders_are_filled() {
        let p = figure_puzzle();
        let text =
            render_system_prompt(&p, EnvType::Normal, Some(3), Some(&Pricing::new(500, 250)));
        assert!(text.contains(
            r#"HOUSES = ["house1","house2","house3"],  ATTRS = ["Name","Smoothie","Color"]"#
        ));
        assert!(text.contains(r#""header": ["House","Name","Smoothie","Color"],"#));
        assert!(text.contains("You have a budget of **3** tool calls"));
        assert!(text.contains("- Fact query: 500 tokens\n- Relation query: 250 tokens"));
        for placeholder in [
            "{houses}",
            "{attrs}",
            "{domain}",
            "{header}",
            "{budget}",
            "{fact_price}",
        ] {
            assert!(!text.contains(placeholder), "{placeholder} left in prompt");
        }
    }

    #[test]
    fn env_variants_restrict_the_query_types() {
        let p = figure_puzzle();
        let fact = render_system_prompt(&p, EnvType::OnlyFact, None, None);
        assert!(fact.contains(r#"type ∈ {"fact"}"#));
        assert!(!fact.contains("Relation queries"));
        let rel = render_system_prompt(&p, EnvType::OnlyRelation, None, None);
        assert!(!rel.contains("Fact queries"));
        assert!(!rel.contains("Budget Constraint"));
    }

    #[test]
    fn puzzle_text_lists_only_visible_clues() {
        let p = figure_puzzle();
        let text = render_puzzle_text(&p);
        for clue in p.visible_clues() {
            assert!(text.contains(&clue.text));
        }
        for clue in p.missing_clues() {
            assert!(!text.contains(&clue.text));
        }
    }
}
