use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::scenario::Scenario;
use crate::error::{Error, Result};
use crate::inference::boltzmann_distribution;
use crate::intents::build_automaton;
use crate::predictor::{sample_index, splitmix64};
use crate::product::{build_product, cost_to_accept};
use crate::workspace::{Cell, Connectivity, GridMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectorySource {
    Synthetic,
    Ingested,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    pub cells: Vec<Cell>,
    pub source: TrajectorySource,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Index of the first step that is neither a map move nor a stay, if any.
    pub fn first_gap(&self, connectivity: Connectivity) -> Option<usize> {
        self.cells
            .windows(2)
            .position(|w| connectivity.hop_distance(w[0], w[1]) > 1)
            .map(|i| i + 1)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(["step", "x", "y"])?;
        for (step, c) in self.cells.iter().enumerate() {
            writer.write_record([step.to_string(), c.x.to_string(), c.y.to_string()])?;
        }
        writer.flush()?;
        Ok(())
    }

    /// Reads a `step,x,y` file; rows are taken in file order.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            #[allow(dead_code)]
            step: usize,
            x: usize,
            y: usize,
        }
        let mut reader = csv::Reader::from_reader(input);
        let headers = reader.headers()?.clone();
        if headers.iter().map(str::trim).collect::<Vec<_>>() != ["step", "x", "y"] {
            return Err(Error::Malformed(format!(
                "trajectory header must be `step,x,y`, got `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let cells = reader
            .deserialize::<Row>()
            .map(|row| row.map(|r| Cell::new(r.x, r.y)))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        if cells.is_empty() {
            return Err(Error::EmptyInput);
        }
        Ok(Trajectory {
            cells,
            source: TrajectorySource::Ingested,
        })
    }
}

/// Random stream driving the ground-truth agent for a given seed.
pub fn agent_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed ^ 0xA6E7_0000))
}

/// Rolls out a Boltzmann-rational agent pursuing the scenario's true intent.
///
/// The agent never stays in place. It stops on reaching an accepting product state or after
/// `max_steps` moves; the returned trajectory includes the start cell.
pub fn simulate_agent<R: Rng + ?Sized>(
    scenario: &Scenario,
    beta_agent: f64,
    max_steps: usize,
    rng: &mut R,
) -> Result<Trajectory> {
    if !(beta_agent >= 0.0 && beta_agent.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "agent beta must be finite and >= 0, got {beta_agent}"
        )));
    }
    let map = scenario.map.without_stay();
    let automaton = build_automaton(&scenario.true_intent)?;
    let product = build_product(&map, &automaton)?;
    let table = cost_to_accept(&product)?;

    let mut cell = map.index_of(scenario.start)?;
    let mut q = product.enter(automaton.initial(), cell);
    let mut cells = vec![scenario.start];
    let mut probs = Vec::new();
    for _ in 0..max_steps {
        if automaton.is_accepting(q) {
            break;
        }
        let moves = map.moves(cell);
        if moves.is_empty() {
            break;
        }
        boltzmann_distribution(
            moves,
            beta_agent,
            |to| table.get(to, product.enter(q, to)),
            &mut probs,
        );
        cell = moves[sample_index(&probs, rng)].to;
        q = product.enter(q, cell);
        cells.push(map.cell_at(cell));
    }
    Ok(Trajectory {
        cells,
        source: TrajectorySource::Synthetic,
    })
}

/// Total move weight along a trajectory, `None` if some step is not a move of `map`.
pub fn path_weight(map: &GridMap, cells: &[Cell]) -> Option<f64> {
    cells.windows(2).try_fold(0.0, |acc, w| {
        let from = map.index_of(w[0]).ok()?;
        let to = map.index_of(w[1]).ok()?;
        map.move_weight(from, to).map(|weight| acc + weight)
    })
}

/// Maps metric points to grid cells of an `n x n` discretization of the room.
///
/// Consecutive duplicates collapse and jumps are bridged by straight-line interpolation so that
/// every step moves to an 8-neighbour.
pub fn discretize_trajectory(
    points: &[(f64, f64)],
    room: (f64, f64),
    n: usize,
) -> Result<Trajectory> {
    if points.is_empty() {
        return Err(Error::EmptyInput);
    }
    let (width, height) = room;
    if !(width > 0.0 && height > 0.0) || n == 0 {
        return Err(Error::InvalidConfig(format!(
            "invalid room {width}x{height} or grid size {n}"
        )));
    }
    let to_index = |v: f64, extent: f64| -> usize {
        let raw = (v / extent * n as f64).floor();
        raw.clamp(0.0, (n - 1) as f64) as usize
    };

    let mut cells: Vec<Cell> = Vec::with_capacity(points.len());
    for &(x, y) in points {
        if !(0.0..=width).contains(&x) || !(0.0..=height).contains(&y) {
            log::warn!("point ({x}, {y}) lies outside the {width} x {height} room; clamping");
        }
        let cell = Cell::new(to_index(x, width), to_index(y, height));
        let Some(&last) = cells.last() else {
            cells.push(cell);
            continue;
        };
        if last == cell {
            continue;
        }
        let dx = cell.x as f64 - last.x as f64;
        let dy = cell.y as f64 - last.y as f64;
        let steps = Connectivity::Eight.hop_distance(last, cell);
        for i in 1..=steps {
            let t = i as f64 / steps as f64;
            let bridged = Cell::new(
                (last.x as f64 + dx * t).round() as usize,
                (last.y as f64 + dy * t).round() as usize,
            );
            if cells.last() != Some(&bridged) {
                cells.push(bridged);
            }
        }
    }
    Ok(Trajectory {
        cells,
        source: TrajectorySource::Ingested,
    })
}

/// Reads metric points from a CSV with a `t,x,y` header.
pub fn read_points_csv<R: Read>(input: R) -> Result<Vec<(f64, f64)>> {
    #[derive(Deserialize)]
    struct Row {
        #[allow(dead_code)]
        t: f64,
        x: f64,
        y: f64,
    }
    let mut reader = csv::Reader::from_reader(input);
    let headers = reader.headers()?.clone();
    if headers.iter().map(str::trim).collect::<Vec<_>>() != ["t", "x", "y"] {
        return Err(Error::Malformed("point file header must be `t,x,y`".into()));
    }
    let points = reader
        .deserialize::<Row>()
        .map(|row| row.map(|r| (r.x, r.y)))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(points)
}
