//! One shared product answers every hypothesis by moving its accepting set.

use intent_monitor::intents::{build_automaton, build_shared_automaton, enumerate_hypotheses};
use intent_monitor::product::{build_product, cost_to_accept, hypothesis_cost_table};
use intent_monitor::workspace::{Cell, Connectivity, GridMap, Region, WeightConfig};

fn main() -> intent_monitor::Result<()> {
    let map = GridMap::new(
        12,
        12,
        vec![
            Region::new("a", [1, 1, 2, 2]),
            Region::new("b", [9, 1, 10, 2]),
            Region::new("c", [5, 8, 6, 9]),
        ],
        Connectivity::Eight,
        WeightConfig::default().without_stay(),
    )?;
    let props = ["a", "b", "c"];
    let shared = build_product(&map, &build_shared_automaton(&props)?)?;
    println!(
        "shared product: {} states, {} transitions",
        shared.state_count(),
        shared.transition_count()
    );

    let start = map.index_of(Cell::new(0, 11))?;
    let q0 = shared.enter(shared.automaton().initial(), start);
    for h in enumerate_hypotheses(&props)? {
        let fast = hypothesis_cost_table(&shared, &h)?;
        let naive = cost_to_accept(&build_product(&map, &build_automaton(&h)?)?)?;
        let q = build_automaton(&h)?;
        let naive_q = q.step(
            q.initial(),
            q.label_mask(map.label_of(Cell::new(0, 11))?.iter().map(String::as_str)),
        );
        let show = |c: Option<f64>| c.map_or("inf".to_string(), |v| format!("{v:.3}"));
        println!(
            "{:<28} shared {:>7}  naive {:>7}",
            h.canonical(),
            show(fast.get(start, q0)),
            show(naive.get(start, naive_q))
        );
    }
    Ok(())
}
