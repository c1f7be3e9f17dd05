//! Information-gain greedy agent against the random baseline on each
//! environment type.

use std::sync::Arc;

use zebra_arena::agents::{AgentKind, AgentSpec};
use zebra_arena::environment::{EnvConfig, EnvType};
use zebra_arena::generator::{generate_puzzle, GeneratorConfig, SizePreset};
use zebra_arena::metrics::{aggregate, score_episode, GroupKey, LogBase};
use zebra_arena::protocol::run_episode;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let puzzles = (0..12)
        .map(|i| {
            let cfg = GeneratorConfig::preset(SizePreset::Medium, 1 + i % 4, 500 + i as u64);
            generate_puzzle(&cfg, format!("medium-{i}")).map(Arc::new)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut metrics = Vec::new();
    for env_type in [EnvType::Normal, EnvType::OnlyFact, EnvType::OnlyRelation] {
        let env = EnvConfig::default().with_env_type(env_type);
        for kind in [AgentKind::GreedyIg, AgentKind::Random] {
            let spec = AgentSpec::new(kind).with_seed(17);
            for p in &puzzles {
                let mut agent = spec.build(p)?;
                let record = run_episode(agent.as_mut(), Arc::clone(p), &env)?;
                metrics.push(score_episode(&record)?);
            }
        }
    }
    let report = aggregate(&metrics, &[GroupKey::EnvType, GroupKey::Model], LogBase::E)?;
    print!("{}", report.to_text());
    Ok(())
}
