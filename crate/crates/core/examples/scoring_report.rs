//! Per-episode metrics and the aggregated report, from a records file or
//! from a fresh run.
//!
//!     cargo run --example scoring_report -- path/to/records.jsonl

use std::path::Path;
use std::sync::Arc;

use zebra_arena::agents::{AgentKind, AgentSpec};
use zebra_arena::environment::{BudgetLevel, BudgetSpec, EnvConfig};
use zebra_arena::generator::{generate_puzzle, GeneratorConfig, SizePreset};
use zebra_arena::metrics::{aggregate, load_records, score_episode_with, GroupKey, LogBase};
use zebra_arena::protocol::{run_episode, EpisodeRecord};

fn fresh_records() -> Result<Vec<EpisodeRecord>, Box<dyn std::error::Error>> {
    let env = EnvConfig::default().with_budget(BudgetSpec::Level {
        level: BudgetLevel::Tight,
        model: None,
    });
    let mut records = Vec::new();
    for seed in 0..6 {
        let cfg = GeneratorConfig::preset(SizePreset::Small, 1 + (seed as usize % 2), seed);
        let puzzle = Arc::new(generate_puzzle(&cfg, format!("small-{seed}"))?);
        for kind in [AgentKind::GreedyIg, AgentKind::Random] {
            let mut agent = AgentSpec::new(kind).build(&puzzle)?;
            records.push(run_episode(agent.as_mut(), Arc::clone(&puzzle), &env)?);
        }
    }
    Ok(records)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let records = match std::env::args().nth(1) {
        Some(path) => load_records(Path::new(&path))?,
        None => fresh_records()?,
    };
    let metrics = records
        .iter()
        .map(|r| score_episode_with(r, LogBase::Two))
        .collect::<Result<Vec<_>, _>>()?;

    println!(
        "{:<12} {:<16} {:>3} {:>3} {:>7} {:>5}  trace",
        "puzzle", "agent", "acc", "TC", "IG bits", "IR"
    );
    for m in &metrics {
        let trace: Vec<String> = m.counts_trace.iter().map(|c| c.to_string()).collect();
        println!(
            "{:<12} {:<16} {:>3} {:>3} {:>7.2} {:>5.2}  {}",
            m.puzzle_id,
            m.agent,
            m.accuracy,
            m.tool_calls,
            m.ig_mean,
            m.ir,
            trace.join(" -> ")
        );
    }

    let report = aggregate(
        &metrics,
        &[GroupKey::Model, GroupKey::Condition],
        LogBase::Two,
    )?;
    print!("\n{}", report.to_text());
    println!();
    report.write_delimited(std::io::stdout(), b',')?;
    Ok(())
}
