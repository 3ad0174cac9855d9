//! Posterior-predictive Monte-Carlo forecasts of future positions.
//!
//! Every rollout starts from the monitor's cell, run state and belief. Each simulated step
//! mixes the working intent distribution with the uniform one, draws an intent, draws a move
//! from the Boltzmann model under that intent, and advances the simulated run state.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::inference::{
    boltzmann_distribution, epsilon_mix, CostTables, InferenceConfig, MonitorState,
};
use crate::workspace::Cell;

pub const DEFAULT_SIMULATIONS: usize = 300;
pub const DEFAULT_THRESHOLD: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OccupancyMode {
    /// Position exactly `h` steps ahead.
    ExactTime,
    /// Whether the cell is visited at any of the next `h` steps.
    Cumulative,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictionConfig {
    pub horizons: Vec<usize>,
    pub n_sims: usize,
    pub seed: u64,
    pub mode: OccupancyMode,
}

impl PredictionConfig {
    pub fn new(horizons: Vec<usize>, n_sims: usize, seed: u64) -> Result<Self> {
        let config = PredictionConfig {
            horizons,
            n_sims,
            seed,
            mode: OccupancyMode::ExactTime,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn cumulative(mut self) -> Self {
        self.mode = OccupancyMode::Cumulative;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizons.is_empty() || self.horizons.contains(&0) {
            return Err(Error::InvalidConfig(
                "horizons must be a nonempty list of positive steps".into(),
            ));
        }
        if self.n_sims == 0 {
            return Err(Error::InvalidConfig(
                "at least one simulation is required".into(),
            ));
        }
        Ok(())
    }

    pub fn max_horizon(&self) -> usize {
        self.horizons.iter().copied().max().unwrap_or(0)
    }
}

/// Empirical distribution over cells at one horizon; cells with zero probability are omitted.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OccupancyDistribution {
    pub horizon: usize,
    /// `(cell, probability)` in row-major cell order.
    pub cells: Vec<(Cell, f64)>,
}

impl OccupancyDistribution {
    pub fn prob(&self, cell: Cell) -> f64 {
        self.cells
            .binary_search_by_key(&(cell.y, cell.x), |(c, _)| (c.y, c.x))
            .map_or(0.0, |i| self.cells[i].1)
    }

    pub fn total(&self) -> f64 {
        self.cells.iter().map(|(_, p)| p).sum()
    }
}

/// SplitMix64 finalizer.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of stream `index`: `splitmix64(splitmix64(seed) ^ index)`.
///
/// The inner scramble keeps nearby base seeds from yielding permutations of one stream set.
pub fn sub_seed(seed: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ index)
}

/// Inverse-CDF draw from a discrete distribution.
pub(crate) fn sample_index<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        acc += w;
        last = i;
        if u < acc {
            return i;
        }
    }
    last
}

/// One simulated future of `horizon` cells after the current one.
pub fn sample_trajectory<R: Rng + ?Sized>(
    state: &MonitorState,
    horizon: usize,
    config: &InferenceConfig,
    tables: &CostTables,
    rng: &mut R,
) -> Result<Vec<Cell>> {
    let map = tables.map();
    let product = tables.product();
    let ordered: Vec<_> = config
        .hypotheses()
        .iter()
        .map(|h| {
            tables
                .table_for(h)
                .ok_or_else(|| Error::MissingCostTable(h.canonical()))
        })
        .collect::<Result<_>>()?;

    let mut belief = state.posterior.clone();
    let mut cell = map.index_of(state.cell)?;
    let mut q = state.run_state;
    let mut probs = Vec::new();
    let mut out = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        epsilon_mix(&mut belief, config.epsilon());
        let table = ordered[sample_index(&belief, rng)];
        let moves = map.moves(cell);
        if !moves.is_empty() {
            boltzmann_distribution(
                moves,
                config.beta(),
                |to| table.get(to, product.enter(q, to)),
                &mut probs,
            );
            cell = moves[sample_index(&probs, rng)].to;
            q = product.enter(q, cell);
        }
        out.push(map.cell_at(cell));
    }
    Ok(out)
}

/// Occupancy distributions for every configured horizon from one set of rollouts.
pub fn predict_occupancy(
    state: &MonitorState,
    prediction: &PredictionConfig,
    config: &InferenceConfig,
    tables: &CostTables,
) -> Result<Vec<OccupancyDistribution>> {
    prediction.validate()?;
    let map = tables.map();
    let longest = prediction.max_horizon();
    let rollouts = (0..prediction.n_sims as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(prediction.seed, i));
            sample_trajectory(state, longest, config, tables, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;

    let n = prediction.n_sims as f64;
    let mut counts = vec![0u32; map.cell_count()];
    let mut seen = vec![usize::MAX; map.cell_count()];
    let distributions = prediction
        .horizons
        .iter()
        .map(|&h| {
            counts.iter_mut().for_each(|c| *c = 0);
            for (sim, rollout) in rollouts.iter().enumerate() {
                match prediction.mode {
                    OccupancyMode::ExactTime => counts[map.index_of(rollout[h - 1]).unwrap()] += 1,
                    OccupancyMode::Cumulative => {
                        for &c in &rollout[..h] {
                            let i = map.index_of(c).unwrap();
                            if seen[i] != sim {
                                seen[i] = sim;
                                counts[i] += 1;
                            }
                        }
                    }
                }
            }
            seen.iter_mut().for_each(|s| *s = usize::MAX);
            OccupancyDistribution {
                horizon: h,
                cells: counts
                    .iter()
                    .enumerate()
                    .filter(|(_, &c)| c > 0)
                    .map(|(i, &c)| (map.cell_at(i), c as f64 / n))
                    .collect(),
            }
        })
        .collect();
    Ok(distributions)
}

/// True when the predicted probability of `truth` reaches `threshold`.
pub fn prediction_correct(dist: &OccupancyDistribution, truth: Cell, threshold: f64) -> bool {
    dist.prob(truth) >= threshold
}
