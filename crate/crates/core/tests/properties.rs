use intent_monitor::harness::discretize_trajectory;
use intent_monitor::inference::{init_monitor, update_posterior, CostTables, InferenceConfig};
use intent_monitor::intents::{
    build_automaton, enumerate_hypotheses, parse_formula, IntentFormula,
};
use intent_monitor::product::{build_product, cost_to_accept};
use intent_monitor::workspace::{
    parse_map_file, Cell, Connectivity, GridMap, Region, WeightConfig,
};
use proptest::prelude::*;

fn arb_map() -> impl Strategy<Value = GridMap> {
    (
        1usize..9,
        1usize..9,
        prop::collection::vec((0usize..8, 0usize..8, 0usize..3, 0usize..3), 0..4),
        any::<bool>(),
        prop::option::of(0.5f64..2.0),
    )
        .prop_map(|(w, h, rects, eight, stay)| {
            let mut regions: Vec<Region> = Vec::new();
            for (x, y, dw, dh) in rects {
                let (x0, y0) = (x.min(w - 1) as i64, y.min(h - 1) as i64);
                let rect = [
                    x0,
                    y0,
                    (x0 + dw as i64).min(w as i64 - 1),
                    (y0 + dh as i64).min(h as i64 - 1),
                ];
                let overlaps = regions.iter().any(|r| {
                    rect[0] <= r.rect[2]
                        && r.rect[0] <= rect[2]
                        && rect[1] <= r.rect[3]
                        && r.rect[1] <= rect[3]
                });
                if !overlaps {
                    regions.push(Region::new(format!("r{}", regions.len()), rect));
                }
            }
            let connectivity = if eight {
                Connectivity::Eight
            } else {
                Connectivity::Four
            };
            let weights = WeightConfig {
                stay,
                ..WeightConfig::default()
            };
            GridMap::new(w, h, regions, connectivity, weights).unwrap()
        })
}

fn arb_formula() -> impl Strategy<Value = IntentFormula> {
    prop::collection::vec(0u8..3, 4).prop_map(|roles| {
        let names = ["a", "b", "c", "d"];
        let pick = |role| {
            names
                .iter()
                .zip(&roles)
                .filter(move |(_, &r)| r == role)
                .map(|(n, _)| *n)
        };
        IntentFormula::new(pick(2), pick(1)).unwrap()
    })
}

proptest! {
    #[test]
    fn map_json_round_trips(map in arb_map()) {
        prop_assert_eq!(parse_map_file(&map.to_json()).unwrap(), map);
    }

    #[test]
    fn moves_are_symmetric(map in arb_map()) {
        for from in 0..map.cell_count() {
            for m in map.moves(from) {
                prop_assert_eq!(map.move_weight(m.to, from), Some(m.weight));
            }
        }
    }

    #[test]
    fn formula_canonical_form_round_trips(f in arb_formula()) {
        prop_assert_eq!(parse_formula(&f.canonical()).unwrap(), f);
    }

    #[test]
    fn cost_tables_are_bellman_optimal(map in arb_map(), pick in any::<prop::sample::Index>()) {
        let names: Vec<&str> = map.propositions().collect();
        prop_assume!(!names.is_empty());
        let hyps = enumerate_hypotheses(&names).unwrap();
        let formula = pick.get(&hyps);
        let automaton = build_automaton(formula).unwrap();
        let product = build_product(&map, &automaton).unwrap();
        let table = cost_to_accept(&product).unwrap();
        for i in 0..product.state_count() {
            let (cell, q) = product.state(i);
            let got = table.get(cell, q);
            if automaton.is_accepting(q) {
                prop_assert_eq!(got, Some(0.0));
                continue;
            }
            let best = product
                .successors((cell, q))
                .filter_map(|((c, nq), w)| table.get(c, nq).map(|v| w + v))
                .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.min(v))));
            match (got, best) {
                (None, None) => {}
                (Some(a), Some(b)) => prop_assert!((a - b).abs() <= 1e-9, "{} vs {}", a, b),
                other => prop_assert!(false, "mismatch {:?}", other),
            }
        }
    }

    #[test]
    fn posterior_stays_normalized_above_floor(
        map in arb_map(),
        beta in 0.0f64..20.0,
        epsilon in 0.0f64..1.0,
        walk in prop::collection::vec(any::<prop::sample::Index>(), 1..20),
    ) {
        let names: Vec<&str> = map.propositions().collect();
        prop_assume!(!names.is_empty());
        let hyps = enumerate_hypotheses(&names).unwrap();
        let floor = epsilon / hyps.len() as f64;
        let tables = CostTables::build(&map, &hyps).unwrap();
        let config = InferenceConfig::new(beta, epsilon, hyps).unwrap();
        let mut state = init_monitor(&config, &tables, Cell::new(0, 0)).unwrap();
        for step in walk {
            let moves = map.moves(map.index_of(state.cell).unwrap());
            if moves.is_empty() {
                break;
            }
            let next = map.cell_at(step.get(moves).to);
            state = update_posterior(&state, next, &config, &tables).unwrap();
            let total: f64 = state.posterior.iter().sum();
            prop_assert!((total - 1.0).abs() <= 1e-9);
            prop_assert!(state.posterior.iter().all(|&p| p >= floor - 1e-12));
        }
    }

    #[test]
    fn discretized_trajectories_are_connected(
        points in prop::collection::vec((-1.0f64..10.0, -1.0f64..20.0), 1..30),
        n in 1usize..60,
    ) {
        let traj = discretize_trajectory(&points, (8.4, 18.8), n).unwrap();
        prop_assert_eq!(traj.first_gap(Connectivity::Eight), None);
        prop_assert!(traj.cells.windows(2).all(|w| w[0] != w[1]));
        prop_assert!(traj.cells.iter().all(|c| c.x < n && c.y < n));
    }
}
