//! The oracle agent asks exactly the withheld clues and submits the ground
//! truth, so its efficiency ratios are 1 by construction.

use std::sync::Arc;

use zebra_arena::agents::{AgentKind, AgentSpec};
use zebra_arena::environment::EnvConfig;
use zebra_arena::generator::{generate_puzzle, GeneratorConfig, SizePreset};
use zebra_arena::metrics::{aggregate, score_episode, GroupKey, LogBase};
use zebra_arena::protocol::run_episode;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let env = EnvConfig::default();
    let spec = AgentSpec::new(AgentKind::CheatingOracle);
    let mut metrics = Vec::new();
    for n_missing in 1..=4 {
        for seed in 0..5 {
            let cfg = GeneratorConfig::preset(
                SizePreset::Medium,
                n_missing,
                100 * n_missing as u64 + seed,
            );
            let puzzle = Arc::new(generate_puzzle(
                &cfg,
                format!("medium-m{n_missing}-{seed}"),
            )?);
            let mut agent = spec.build(&puzzle)?;
            let record = run_episode(agent.as_mut(), puzzle, &env)?;
            if seed == 0 {
                println!("{} transcript:", record.puzzle_id);
                for t in &record.turns {
                    println!("  > {}", t.message);
                    println!("  < {}", t.response.render_text().replace('\n', " "));
                }
            }
            metrics.push(score_episode(&record)?);
        }
    }
    let report = aggregate(&metrics, &[GroupKey::NMissing], LogBase::E)?;
    print!("\n{}", report.to_text());
    Ok(())
}
