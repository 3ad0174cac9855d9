//! Streams a hand-made trajectory through the Bayesian monitor.

use intent_monitor::inference::{
    init_monitor, posterior_snapshot, update_posterior, CostTables, InferenceConfig,
};
use intent_monitor::intents::enumerate_hypotheses;
use intent_monitor::workspace::{Cell, Connectivity, GridMap, Region, WeightConfig};

fn main() -> intent_monitor::Result<()> {
    let map = GridMap::new(
        15,
        15,
        vec![
            Region::new("p0", [6, 6, 8, 8]),
            Region::new("p1", [0, 12, 2, 14]),
            Region::new("p2", [12, 12, 14, 14]),
        ],
        Connectivity::Eight,
        WeightConfig::default(),
    )?;
    let hypotheses = enumerate_hypotheses(&["p0", "p1", "p2"])?;
    let tables = CostTables::build(&map, &hypotheses)?;
    let config = InferenceConfig::new(1.0, 0.3, hypotheses)?;

    // Heads diagonally toward p2 while skirting p0.
    let path = [
        (1, 1),
        (2, 2),
        (3, 3),
        (4, 4),
        (5, 5),
        (5, 6),
        (5, 7),
        (5, 8),
        (5, 9),
        (6, 10),
        (7, 11),
        (8, 12),
    ];
    let mut state = init_monitor(&config, &tables, Cell::new(0, 0))?;
    for (x, y) in path {
        state = update_posterior(&state, Cell::new(x, y), &config, &tables)?;
    }
    let mut ranked = posterior_snapshot(&state, &config);
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
    println!("posterior after {} steps:", state.t);
    for (formula, p) in ranked {
        println!("  {p:.4}  {formula}");
    }
    Ok(())
}
