use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::intents::{build_automaton, IntentFormula};
use crate::product::{build_product, cost_to_accept};
use crate::workspace::{Cell, Connectivity, GridMap, Region, WeightConfig};

const PLACEMENT_ATTEMPTS: usize = 1000;
const INTENT_DRAWS: usize = 100;

/// A synthetic episode: random regions, a ground-truth intent and a start cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub map: GridMap,
    pub true_intent: IntentFormula,
    pub start: Cell,
    pub seed: u64,
}

/// Side length of square regions: 2 cells at N = 20, scaled linearly with N.
pub fn default_region_size(n: usize) -> usize {
    (n / 10).max(1)
}

/// Places `k` disjoint square regions `p0..p(k-1)` and draws an avoid/reach split and start.
///
/// The avoid set is a uniformly random nonempty proper subset, so `k >= 2` is required.
pub fn generate_scenario(
    n: usize,
    k: usize,
    region_size: Option<usize>,
    seed: u64,
) -> Result<Scenario> {
    if n == 0 {
        return Err(Error::InvalidDimensions {
            width: n,
            height: n,
        });
    }
    if k < 2 {
        return Err(Error::InvalidConfig(
            "scenarios need at least two regions (one obstacle and one target)".into(),
        ));
    }
    if k > 16 {
        return Err(Error::InvalidConfig(
            "at most 16 regions are supported".into(),
        ));
    }
    let size = region_size.unwrap_or_else(|| default_region_size(n));
    if size == 0 {
        return Err(Error::InvalidConfig("region size must be positive".into()));
    }
    let placement_error = || Error::RegionPlacement {
        n,
        regions: k,
        size,
        attempts: PLACEMENT_ATTEMPTS,
    };
    if size > n {
        return Err(placement_error());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut regions: Vec<Region> = Vec::with_capacity(k);
    let mut attempts = 0;
    while regions.len() < k {
        if attempts == PLACEMENT_ATTEMPTS {
            return Err(placement_error());
        }
        attempts += 1;
        let x0 = rng.gen_range(0..=n - size) as i64;
        let y0 = rng.gen_range(0..=n - size) as i64;
        let s = size as i64;
        let candidate = Region::new(
            format!("p{}", regions.len()),
            [x0, y0, x0 + s - 1, y0 + s - 1],
        );
        let clear = regions.iter().all(|r| {
            let [ax0, ay0, ax1, ay1] = r.rect;
            let [bx0, by0, bx1, by1] = candidate.rect;
            ax1 < bx0 || bx1 < ax0 || ay1 < by0 || by1 < ay0
        });
        if clear {
            regions.push(candidate);
        }
    }

    let map = GridMap::new(
        n,
        n,
        regions,
        Connectivity::Eight,
        WeightConfig::default().without_stay(),
    )?;
    let free: Vec<Cell> = map
        .cells()
        .filter(|&c| map.label_of(c).unwrap().is_empty())
        .collect();
    if free.is_empty() {
        return Err(placement_error());
    }
    let names: Vec<String> = map.propositions().map(str::to_string).collect();
    for _ in 0..INTENT_DRAWS {
        let avoid_bits = rng.gen_range(1..(1usize << k) - 1);
        let (avoid, reach): (Vec<_>, Vec<_>) = names
            .iter()
            .enumerate()
            .partition(|(i, _)| avoid_bits >> i & 1 == 1);
        let intent = IntentFormula::new(
            avoid.into_iter().map(|(_, p)| p.clone()),
            reach.into_iter().map(|(_, p)| p.clone()),
        )?;
        let start = free[rng.gen_range(0..free.len())];
        let automaton = build_automaton(&intent)?;
        let product = build_product(&map, &automaton)?;
        let table = cost_to_accept(&product)?;
        let q0 = product.enter(automaton.initial(), map.index_of(start)?);
        if table.get(map.index_of(start)?, q0).is_some() {
            return Ok(Scenario {
                map,
                true_intent: intent,
                start,
                seed,
            });
        }
    }
    Err(Error::Unsatisfiable(INTENT_DRAWS))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproducible_and_disjoint() {
        let a = generate_scenario(20, 3, None, 42).unwrap();
        let b = generate_scenario(20, 3, None, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.map.regions().len(), 3);
        assert!(a.map.regions().iter().all(|r| r.rect[2] - r.rect[0] == 1));
        assert!(!a.true_intent.avoid().is_empty());
        assert!(!a.true_intent.reach().is_empty());
        assert!(a.map.label_of(a.start).unwrap().is_empty());
        assert_ne!(generate_scenario(20, 3, None, 43).unwrap(), a);
    }

    #[test]
    fn large_map_with_five_regions() {
        let s = generate_scenario(100, 5, None, 9).unwrap();
        assert_eq!(s.map.cell_count(), 10_000);
        assert_eq!(s.map.regions().len(), 5);
        assert_eq!(s.true_intent.propositions().len(), 5);
    }

    #[test]
    fn infeasible_placement() {
        assert!(matches!(
            generate_scenario(2, 5, Some(1), 0),
            Err(Error::RegionPlacement { .. })
        ));
        assert!(matches!(
            generate_scenario(3, 2, Some(4), 0),
            Err(Error::RegionPlacement { .. })
        ));
        assert!(generate_scenario(10, 1, None, 0).is_err());
    }
}
