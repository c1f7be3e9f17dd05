//! Driving a session by hand under a query budget and a price table.

use std::sync::Arc;

use serde_json::json;
use zebra_arena::environment::{BudgetSpec, EnvConfig, Pricing, Session};
use zebra_arena::fixtures::figure_puzzle;

fn query(q: serde_json::Value) -> String {
    format!("<think>probe</think><query>{q}</query>")
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let env = EnvConfig::default()
        .with_budget(BudgetSpec::Limit(2))
        .with_pricing(Pricing::from_catalog("fact cheap", "gemini-2.5-flash")?);
    let mut session = Session::new(Arc::new(figure_puzzle()), env)?;
    println!("S(C) = {}", session.current_count());

    let turns = [
        query(json!({"type": "fact", "house": "house1", "attr": "Name", "value": "peter"})),
        query(json!({"type": "relation", "rel": "direct_left",
                     "lhs": {"attr": "Name", "value": "arnold"},
                     "rhs": {"attr": "Name", "value": "peter"}})),
        // Over budget: still answered, the remaining count goes negative.
        query(json!({"type": "fact", "house": "house3", "attr": "Color", "value": "blue"})),
    ];
    for text in &turns {
        let response = session.handle_message(text, None)?;
        println!("\n> {text}\n< {}", response.render_text());
        println!("  S(C) = {}", session.current_count());
    }

    let ledger = session.ledger();
    println!(
        "\nreasoning tokens {}, tool tokens {}, total {}",
        ledger.reasoning_tokens, ledger.tool_tokens, ledger.total
    );
    Ok(())
}
