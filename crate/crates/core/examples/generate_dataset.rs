//! Generates a small mixed dataset, writes it to a directory and prints one
//! line per puzzle.
//!
//!     cargo run --example generate_dataset -- /tmp/zebra-data

use std::path::PathBuf;

use zebra_arena::generator::{emit_dataset, DatasetConfig};

const CONFIG: &str = r#"
seed = 7

[[cells]]
preset = "small"
count = 3

[[cells]]
preset = "medium"
n_missing = [1, 4]
count = 2
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out: PathBuf = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("zebra-arena-example"));
    let config = DatasetConfig::from_toml(CONFIG)?;
    let puzzles = config.generate()?;
    for p in &puzzles {
        println!(
            "{:<24} {}x{}  clues {:>2}  withheld {}  S(C0) = {:>3}  K* = {}",
            p.id,
            p.schema.n_houses,
            p.schema.n_attributes(),
            p.full_clues.len(),
            p.missing.len(),
            p.initial_count,
            p.k_star
        );
    }
    let manifest = emit_dataset(&puzzles, &out, Some(config.seed))?;
    println!("wrote {} puzzles to {}", manifest.total, out.display());

    let first = &puzzles[0];
    println!("\n{} visible clues:", first.id);
    for c in first.visible_clues() {
        println!("  {}", c.text);
    }
    Ok(())
}
