//! Builds a small map, parses an intent and walks its automaton along a path.
//!
//! ```text
//! cargo run -p intent-monitor --example map_and_automata
//! ```

use intent_monitor::intents::{
    build_automaton, enumerate_hypotheses, evaluate_prefix, parse_formula,
};
use intent_monitor::workspace::{Cell, Connectivity, GridMap, Region, WeightConfig};

fn main() -> intent_monitor::Result<()> {
    let map = GridMap::new(
        6,
        4,
        vec![
            Region::new("dock", [5, 0, 5, 1]),
            Region::new("spill", [2, 1, 3, 2]),
        ],
        Connectivity::Eight,
        WeightConfig::default(),
    )?;
    println!(
        "{}x{} map, {} moves",
        map.width(),
        map.height(),
        map.edge_count()
    );

    let intent = parse_formula("F dock & G !spill")?;
    let automaton = build_automaton(&intent)?;
    println!("`{intent}` -> {} automaton states", automaton.state_count());

    let path = [(0, 3), (1, 3), (2, 3), (3, 3), (4, 2), (5, 1)].map(|(x, y)| Cell::new(x, y));
    let labels = path
        .iter()
        .map(|&c| map.label_of(c))
        .collect::<Result<Vec<_>, _>>()?;
    let q = automaton.run(labels.iter().map(|l| l.iter().map(String::as_str)));
    println!(
        "after the path: state {q}, {:?}",
        evaluate_prefix(&intent, &labels)
    );

    for h in enumerate_hypotheses(&["dock", "spill"])? {
        println!("  hypothesis {h}");
    }
    Ok(())
}
