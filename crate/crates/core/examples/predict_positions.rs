//! Forecasts the agent's position a few steps ahead and renders it as text.

use intent_monitor::inference::{init_monitor, update_posterior, CostTables, InferenceConfig};
use intent_monitor::intents::enumerate_hypotheses;
use intent_monitor::predictor::{predict_occupancy, PredictionConfig};
use intent_monitor::workspace::{Cell, Connectivity, GridMap, Region, WeightConfig};

fn main() -> intent_monitor::Result<()> {
    let map = GridMap::new(
        16,
        10,
        vec![
            Region::new("left", [0, 4, 1, 5]),
            Region::new("right", [14, 4, 15, 5]),
        ],
        Connectivity::Eight,
        WeightConfig::default().without_stay(),
    )?;
    let hypotheses = enumerate_hypotheses(&["left", "right"])?;
    let tables = CostTables::build(&map, &hypotheses)?;
    let config = InferenceConfig::new(2.0, 0.3, hypotheses)?;

    let mut state = init_monitor(&config, &tables, Cell::new(7, 0))?;
    for (x, y) in [(8, 1), (9, 2)] {
        state = update_posterior(&state, Cell::new(x, y), &config, &tables)?;
    }

    let prediction = PredictionConfig::new(vec![3, 6], 300, 7)?;
    for dist in predict_occupancy(&state, &prediction, &config, &tables)? {
        println!(
            "h = {} ({} cells with mass)",
            dist.horizon,
            dist.cells.len()
        );
        for y in 0..map.height() {
            let row: String = (0..map.width())
                .map(|x| match dist.prob(Cell::new(x, y)) {
                    p if p >= 0.2 => '#',
                    p if p >= 0.05 => '+',
                    p if p >= 0.01 => '.',
                    _ if Cell::new(x, y) == state.cell => '@',
                    _ => ' ',
                })
                .collect();
            println!("  |{row}|");
        }
    }
    Ok(())
}
