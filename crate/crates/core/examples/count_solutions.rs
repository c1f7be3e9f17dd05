//! Exact model counting on the 3x3 reference puzzle.

use zebra_arena::fixtures::figure_puzzle;
use zebra_arena::solver::{check_necessity, count_solutions, enumerate_solutions, DEFAULT_CAP};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = figure_puzzle();
    let visible = p.visible_constraints();
    let full = p.full_constraints();

    println!("unconstrained: {:?}", p.schema.unconstrained_count());
    println!(
        "visible clues: {}",
        count_solutions(&visible, &p.schema, DEFAULT_CAP)?.count
    );
    println!(
        "all clues:     {}",
        count_solutions(&full, &p.schema, DEFAULT_CAP)?.count
    );

    // How every full clue splits the visible-clue space.
    if let Some(space) = enumerate_solutions(&visible, &p.schema, DEFAULT_CAP)? {
        println!("\nsplit of {} visible-consistent grids:", space.len());
        for c in &full {
            let yes = space.count_satisfying(c)?;
            println!(
                "  {:<40} holds in {yes}, fails in {}",
                c.to_string(),
                space.len() as u64 - yes
            );
        }
    }

    println!("\nnecessary clues:");
    for (id, needed) in check_necessity(&p)? {
        println!("  {id}: {needed}");
    }
    Ok(())
}
