//! Products of the workspace with intent automata and their cost-to-acceptance tables.
//!
//! A product state `(cell, q)` has index `cell * |Q| + q`. The automaton consumes the label of
//! the cell being entered, so the move `(c, q) -> (c', q')` exists iff `c -> c'` is a grid
//! move and `q' = step(q, L(c'))`. Costs are single-destination shortest paths to the accepting
//! set, found by one Dijkstra run over the reversed product from a virtual sink.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::io::Write;

use crate::error::{Error, Result};
use crate::intents::{AutomatonKind, IntentFormula, LabelMask, SafetyGuaranteeAutomaton, StateId};
use crate::workspace::{Cell, GridMap};

/// A product state as `(cell index, automaton state)`.
pub type ProductState = (usize, StateId);

#[derive(Debug, Clone, Copy, PartialEq)]
struct ReverseEdge {
    from: u32,
    weight: f64,
}

#[derive(Debug, Clone)]
pub struct ProductAutomaton {
    map: GridMap,
    automaton: SafetyGuaranteeAutomaton,
    cell_labels: Vec<LabelMask>,
    accepting: Vec<bool>,
    reverse_offsets: Vec<usize>,
    reverse_edges: Vec<ReverseEdge>,
}

impl ProductAutomaton {
    pub fn new(map: &GridMap, automaton: &SafetyGuaranteeAutomaton) -> Result<Self> {
        let map_props: Vec<&str> = map.propositions().collect();
        if let Some(missing) = automaton
            .propositions()
            .iter()
            .find(|p| !map_props.contains(&p.as_str()))
        {
            return Err(Error::UnboundProposition(missing.clone()));
        }
        let region_masks: Vec<LabelMask> = map_props
            .iter()
            .map(|name| automaton.label_mask([*name]))
            .collect();
        let cell_labels: Vec<LabelMask> = (0..map.cell_count())
            .map(|c| map.label_index(c).map_or(0, |r| region_masks[r]))
            .collect();

        let nq = automaton.state_count();
        let n = map.cell_count() * nq;
        if n > u32::MAX as usize {
            return Err(Error::InvalidConfig(format!(
                "product with {n} states is too large"
            )));
        }

        let mut accepting = vec![false; n];
        for c in 0..map.cell_count() {
            for q in automaton.accepting_states() {
                accepting[c * nq + q] = true;
            }
        }

        // Counting sort of all edges by target gives the reversed graph in CSR form.
        let mut in_degree = vec![0usize; n + 1];
        for c in 0..map.cell_count() {
            for m in map.moves(c) {
                for q in 0..nq {
                    let q2 = automaton.step(q, cell_labels[m.to]);
                    in_degree[m.to * nq + q2 + 1] += 1;
                }
            }
        }
        for i in 0..n {
            in_degree[i + 1] += in_degree[i];
        }
        let reverse_offsets = in_degree;
        let mut fill = reverse_offsets.clone();
        let mut reverse_edges = vec![
            ReverseEdge {
                from: 0,
                weight: 0.0
            };
            reverse_offsets[n]
        ];
        for c in 0..map.cell_count() {
            for m in map.moves(c) {
                for q in 0..nq {
                    let q2 = automaton.step(q, cell_labels[m.to]);
                    let target = m.to * nq + q2;
                    reverse_edges[fill[target]] = ReverseEdge {
                        from: (c * nq + q) as u32,
                        weight: m.weight,
                    };
                    fill[target] += 1;
                }
            }
        }

        Ok(ProductAutomaton {
            map: map.clone(),
            automaton: automaton.clone(),
            cell_labels,
            accepting,
            reverse_offsets,
            reverse_edges,
        })
    }

    pub fn map(&self) -> &GridMap {
        &self.map
    }

    pub fn automaton(&self) -> &SafetyGuaranteeAutomaton {
        &self.automaton
    }

    pub fn state_count(&self) -> usize {
        self.accepting.len()
    }

    pub fn transition_count(&self) -> usize {
        self.reverse_edges.len()
    }

    pub fn index(&self, (cell, q): ProductState) -> usize {
        cell * self.automaton.state_count() + q
    }

    pub fn state(&self, index: usize) -> ProductState {
        let nq = self.automaton.state_count();
        (index / nq, index % nq)
    }

    pub fn is_accepting(&self, s: ProductState) -> bool {
        self.accepting[self.index(s)]
    }

    /// Label of a cell as a mask over the automaton's propositions.
    pub fn cell_label(&self, cell: usize) -> LabelMask {
        self.cell_labels[cell]
    }

    /// Automaton state after entering `cell` from `q`.
    pub fn enter(&self, q: StateId, cell: usize) -> StateId {
        self.automaton.step(q, self.cell_labels[cell])
    }

    /// Outgoing product transitions with their weights, in grid-move order.
    pub fn successors(
        &self,
        (cell, q): ProductState,
    ) -> impl Iterator<Item = (ProductState, f64)> + '_ {
        self.map
            .moves(cell)
            .iter()
            .map(move |m| ((m.to, self.enter(q, m.to)), m.weight))
    }

    fn predecessors(&self, index: usize) -> &[ReverseEdge] {
        &self.reverse_edges[self.reverse_offsets[index]..self.reverse_offsets[index + 1]]
    }

    /// Moves the product run to `next`, which must be a configured move from the current cell.
    pub fn advance(&self, (cell, q): ProductState, next: usize) -> Result<ProductState> {
        if self.map.move_weight(cell, next).is_none() {
            return Err(Error::IllegalTransition {
                from: self.map.cell_at(cell),
                to: self.map.cell_at(next),
            });
        }
        Ok((next, self.enter(q, next)))
    }

    /// Reverse Dijkstra from a virtual sink joined to `targets` with zero-cost edges.
    fn distances_to(&self, targets: impl Iterator<Item = usize>) -> Vec<Option<f64>> {
        let mut dist: Vec<Option<f64>> = vec![None; self.state_count()];
        let mut done = vec![false; self.state_count()];
        let mut heap = BinaryHeap::new();
        for t in targets {
            dist[t] = Some(0.0);
            heap.push(Frontier {
                cost: 0.0,
                index: t,
            });
        }
        while let Some(Frontier { cost, index }) = heap.pop() {
            if done[index] {
                continue;
            }
            done[index] = true;
            for e in self.predecessors(index) {
                let from = e.from as usize;
                if done[from] {
                    continue;
                }
                let candidate = e.weight + cost;
                if dist[from].is_none_or(|d| candidate < d) {
                    dist[from] = Some(candidate);
                    heap.push(Frontier {
                        cost: candidate,
                        index: from,
                    });
                }
            }
        }
        dist
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Frontier {
    cost: f64,
    index: usize,
}

impl Eq for Frontier {}

impl Ord for Frontier {
    // Min-heap on cost, ties broken by the smaller state index.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.index.cmp(&self.index))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Optimal remaining cost to acceptance for every product state of one hypothesis.
///
/// `None` marks states from which no accepting state is reachable.
#[derive(Debug, Clone, PartialEq)]
pub struct CostTable {
    hypothesis: IntentFormula,
    automaton_states: usize,
    costs: Vec<Option<f64>>,
}

impl CostTable {
    pub fn hypothesis(&self) -> &IntentFormula {
        &self.hypothesis
    }

    pub fn automaton_states(&self) -> usize {
        self.automaton_states
    }

    pub fn get(&self, cell: usize, q: StateId) -> Option<f64> {
        self.costs[cell * self.automaton_states + q]
    }

    pub fn costs(&self) -> &[Option<f64>] {
        &self.costs
    }

    /// Writes `x,y,automaton_state,cost` rows, with `inf` for unreachable states.
    pub fn write_csv<W: Write>(&self, map: &GridMap, out: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(["x", "y", "automaton_state", "cost"])?;
        for (i, cost) in self.costs.iter().enumerate() {
            let cell = map.cell_at(i / self.automaton_states);
            let q = i % self.automaton_states;
            let cost = cost.map_or_else(|| "inf".to_string(), |c| c.to_string());
            writer.write_record([cell.x.to_string(), cell.y.to_string(), q.to_string(), cost])?;
        }
        writer.flush()?;
        Ok(())
    }
}

pub fn build_product(
    map: &GridMap,
    automaton: &SafetyGuaranteeAutomaton,
) -> Result<ProductAutomaton> {
    ProductAutomaton::new(map, automaton)
}

/// Cost table of a per-hypothesis product.
pub fn cost_to_accept(product: &ProductAutomaton) -> Result<CostTable> {
    let hypothesis = product
        .automaton
        .formula()
        .ok_or(Error::NoAcceptingStates)?;
    let targets: Vec<usize> = (0..product.state_count())
        .filter(|&i| product.accepting[i])
        .collect();
    if targets.is_empty() {
        return Err(Error::NoAcceptingStates);
    }
    Ok(CostTable {
        hypothesis,
        automaton_states: product.automaton.state_count(),
        costs: product.distances_to(targets.into_iter()),
    })
}

/// Cost table of one hypothesis read off the shared product by moving its accepting set.
///
/// Accepting states become `(c, reach)`. States whose visited subset leaves `reach` have
/// entered an avoided region and stay infinite; the search only ever explores subsets of
/// `reach` because subsets grow along every transition.
pub fn hypothesis_cost_table(
    shared: &ProductAutomaton,
    hypothesis: &IntentFormula,
) -> Result<CostTable> {
    let automaton = &shared.automaton;
    let mismatch = || Error::HypothesisMismatch(hypothesis.canonical());
    if automaton.kind() != AutomatonKind::Shared {
        return Err(mismatch());
    }
    let mentioned = hypothesis.propositions();
    if mentioned.len() != automaton.propositions().len()
        || automaton
            .propositions()
            .iter()
            .any(|p| !mentioned.contains(p.as_str()))
    {
        return Err(mismatch());
    }
    let reach = automaton.label_mask(hypothesis.reach().iter().map(String::as_str)) as usize;
    let nq = automaton.state_count();
    let mut costs = shared.distances_to((0..shared.map.cell_count()).map(|c| c * nq + reach));
    for (i, cost) in costs.iter_mut().enumerate() {
        if (i % nq) & !reach != 0 {
            debug_assert!(cost.is_none());
            *cost = None;
        }
    }
    Ok(CostTable {
        hypothesis: hypothesis.clone(),
        automaton_states: nq,
        costs,
    })
}

/// Moves `(cell, q)` into `next_cell`, consuming its label.
pub fn advance_product_state(
    product: &ProductAutomaton,
    state: (Cell, StateId),
    next_cell: Cell,
) -> Result<(Cell, StateId)> {
    let map = &product.map;
    let from = map.index_of(state.0)?;
    let to = map.index_of(next_cell)?;
    let (cell, q) = product.advance((from, state.1), to)?;
    Ok((map.cell_at(cell), q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intents::{
        build_automaton, build_shared_automaton, enumerate_hypotheses, parse_formula,
    };
    use crate::workspace::{Connectivity, Region, WeightConfig};

    fn corridor() -> GridMap {
        GridMap::new(
            3,
            1,
            vec![Region::new("b", [2, 0, 2, 0])],
            Connectivity::Four,
            WeightConfig::default().without_stay(),
        )
        .unwrap()
    }

    // Shortest simple-path cost by exhaustive DFS on the explicit product graph.
    fn brute_force(product: &ProductAutomaton, start: ProductState) -> Option<f64> {
        fn go(
            p: &ProductAutomaton,
            s: ProductState,
            seen: &mut Vec<ProductState>,
            acc: f64,
            best: &mut Option<f64>,
        ) {
            if p.is_accepting(s) {
                if best.is_none_or(|b| acc < b) {
                    *best = Some(acc);
                }
                return;
            }
            for (next, w) in p.successors(s).collect::<Vec<_>>() {
                if !seen.contains(&next) {
                    seen.push(next);
                    go(p, next, seen, acc + w, best);
                    seen.pop();
                }
            }
        }
        let mut best = None;
        go(product, start, &mut vec![start], 0.0, &mut best);
        best
    }

    #[test]
    fn corridor_product() {
        let map = corridor();
        let aut = build_automaton(&parse_formula("F b").unwrap()).unwrap();
        let product = build_product(&map, &aut).unwrap();
        assert!(product.state_count() <= 3 * 3);
        assert!(product.is_accepting((2, 1)));
        assert!(!product.is_accepting((2, 0)));

        let table = cost_to_accept(&product).unwrap();
        assert_eq!(table.get(0, 0), Some(2.0));
        assert_eq!(table.get(1, 0), Some(1.0));
        assert_eq!(table.get(2, 1), Some(0.0));
        for s in [(0, 0), (1, 0)] {
            assert_eq!(table.get(s.0, s.1), brute_force(&product, s));
        }
        assert_eq!(table.get(0, aut.reject().unwrap()), None);
    }

    #[test]
    fn reject_absorbs_in_product() {
        let map = corridor();
        let aut = build_automaton(&parse_formula("G !b").unwrap()).unwrap();
        let product = build_product(&map, &aut).unwrap();
        let r = aut.reject().unwrap();
        for (next, _) in product.successors((1, r)) {
            assert_eq!(next.1, r);
        }
        let table = cost_to_accept(&product).unwrap();
        for c in 0..3 {
            assert_eq!(table.get(c, r), None);
        }
        assert_eq!(table.get(0, 0), Some(0.0));
    }

    #[test]
    fn unbound_proposition() {
        let aut = build_automaton(&parse_formula("F zz").unwrap()).unwrap();
        assert!(
            matches!(build_product(&corridor(), &aut), Err(Error::UnboundProposition(p)) if p == "zz")
        );
    }

    #[test]
    fn shared_product_has_no_accepting_states() {
        let map = corridor();
        let shared = build_product(&map, &build_shared_automaton(&["b"]).unwrap()).unwrap();
        assert!(cost_to_accept(&shared)
            .unwrap_err()
            .to_string()
            .contains("no accepting states"));
    }

    #[test]
    fn size_bound_on_twenty_by_twenty() {
        let regions = (0..5)
            .map(|i| Region::new(format!("p{i}"), [i * 4, 0, i * 4 + 1, 1]))
            .collect();
        let map = GridMap::new(
            20,
            20,
            regions,
            Connectivity::Eight,
            WeightConfig::default(),
        )
        .unwrap();
        let aut = build_shared_automaton(&["p0", "p1", "p2", "p3", "p4"]).unwrap();
        let product = build_product(&map, &aut).unwrap();
        assert!(product.state_count() <= 12800);
    }

    #[test]
    fn hypothesis_tables_edge_cases() {
        let regions = vec![
            Region::new("a", [0, 0, 0, 0]),
            Region::new("b", [3, 3, 3, 3]),
        ];
        let map =
            GridMap::new(4, 4, regions, Connectivity::Eight, WeightConfig::default()).unwrap();
        let shared = build_product(&map, &build_shared_automaton(&["a", "b"]).unwrap()).unwrap();

        let nothing =
            hypothesis_cost_table(&shared, &parse_formula("G !a & G !b").unwrap()).unwrap();
        for c in 0..16 {
            assert_eq!(nothing.get(c, 0), Some(0.0));
            for s in 1..4 {
                assert_eq!(nothing.get(c, s), None);
            }
        }

        let all = hypothesis_cost_table(&shared, &parse_formula("F a & F b").unwrap()).unwrap();
        assert_eq!(all.get(5, 0b11), Some(0.0));
        assert!(all.get(5, 0).unwrap() > 0.0);

        assert!(matches!(
            hypothesis_cost_table(&shared, &parse_formula("F a").unwrap()),
            Err(Error::HypothesisMismatch(_))
        ));
        let naive = build_product(
            &map,
            &build_automaton(&parse_formula("F a").unwrap()).unwrap(),
        )
        .unwrap();
        assert!(hypothesis_cost_table(&naive, &parse_formula("F a & G !b").unwrap()).is_err());
    }

    #[test]
    fn shared_matches_naive_small() {
        let regions = vec![
            Region::new("p0", [0, 0, 1, 0]),
            Region::new("p1", [4, 1, 4, 3]),
            Region::new("p2", [2, 4, 3, 5]),
        ];
        let map =
            GridMap::new(6, 6, regions, Connectivity::Eight, WeightConfig::default()).unwrap();
        let props = ["p0", "p1", "p2"];
        let shared = build_product(&map, &build_shared_automaton(&props).unwrap()).unwrap();
        for h in enumerate_hypotheses(&props).unwrap() {
            let fast = hypothesis_cost_table(&shared, &h).unwrap();
            let aut = build_automaton(&h).unwrap();
            let naive = cost_to_accept(&build_product(&map, &aut).unwrap()).unwrap();
            let reach = shared
                .automaton()
                .label_mask(h.reach().iter().map(String::as_str));
            for c in 0..map.cell_count() {
                for s in 0..8u64 {
                    let expected = if s & !reach != 0 {
                        None
                    } else {
                        // Subset over shared bits to per-hypothesis bits (reach listed first).
                        let local = aut.label_mask(
                            props
                                .iter()
                                .enumerate()
                                .filter(|(i, _)| s >> i & 1 == 1)
                                .map(|(_, p)| *p),
                        );
                        naive.get(c, local as usize)
                    };
                    assert_eq!(fast.get(c, s as usize), expected, "{h} cell {c} subset {s}");
                }
            }
        }
    }

    #[test]
    fn advance_examples() {
        let map = corridor();
        let aut = build_automaton(&parse_formula("F b").unwrap()).unwrap();
        let product = build_product(&map, &aut).unwrap();
        assert_eq!(
            advance_product_state(&product, (Cell::new(1, 0), 0), Cell::new(2, 0)).unwrap(),
            (Cell::new(2, 0), 1)
        );
        let err =
            advance_product_state(&product, (Cell::new(0, 0), 0), Cell::new(2, 0)).unwrap_err();
        assert!(err.to_string().contains("illegal transition"));
        // Without a configured self-loop staying is illegal too.
        assert!(advance_product_state(&product, (Cell::new(0, 0), 0), Cell::new(0, 0)).is_err());

        let regions = vec![
            Region::new("a", [2, 0, 2, 0]),
            Region::new("b", [0, 0, 0, 0]),
        ];
        let map = GridMap::new(3, 1, regions, Connectivity::Four, WeightConfig::default()).unwrap();
        let aut = build_automaton(&parse_formula("F b & G !a").unwrap()).unwrap();
        let product = build_product(&map, &aut).unwrap();
        let r = aut.reject().unwrap();
        assert_eq!(
            advance_product_state(&product, (Cell::new(1, 0), 1), Cell::new(2, 0))
                .unwrap()
                .1,
            r
        );
        assert_eq!(
            advance_product_state(&product, (Cell::new(2, 0), r), Cell::new(1, 0))
                .unwrap()
                .1,
            r
        );
        assert_eq!(
            advance_product_state(&product, (Cell::new(1, 0), r), Cell::new(1, 0))
                .unwrap()
                .1,
            r
        );
    }

    #[test]
    fn csv_dump_uses_inf() {
        let map = corridor();
        let aut = build_automaton(&parse_formula("F b").unwrap()).unwrap();
        let table = cost_to_accept(&build_product(&map, &aut).unwrap()).unwrap();
        let mut out = Vec::new();
        table.write_csv(&map, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("x,y,automaton_state,cost\n0,0,0,2\n"));
        assert!(text.contains("0,0,2,inf"));
    }
}
