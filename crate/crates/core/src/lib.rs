//! Predictive runtime monitoring of mobile agents on grid maps.
//!
//! The pipeline guesses what an agent is trying to do and where it will be next:
//!
//! 1. [`workspace`] models the map as a weighted transition system with labeled regions.
//! 2. [`intents`] enumerates candidate intents of the form "reach these regions, avoid those"
//!    and builds their deterministic automata.
//! 3. [`product`] composes map and automaton and computes, with one reverse Dijkstra, the
//!    optimal remaining cost from every product state. A single shared product serves all
//!    `2^K` hypotheses by moving its accepting set.
//! 4. [`inference`] scores each observed move with a Boltzmann noisy-rationality model and
//!    updates a posterior over intents.
//! 5. [`predictor`] samples future trajectories from the posterior predictive process and
//!    turns them into occupancy distributions.
//! 6. [`harness`] ties everything together for synthetic experiments, benchmarks and the CLI.
//!
//! ```
//! use intent_monitor::inference::{init_monitor, update_posterior, CostTables, InferenceConfig};
//! use intent_monitor::intents::enumerate_hypotheses;
//! use intent_monitor::workspace::{Cell, Connectivity, GridMap, Region, WeightConfig};
//!
//! let map = GridMap::new(
//!     10,
//!     10,
//!     vec![Region::new("a", [0, 0, 1, 1]), Region::new("b", [8, 8, 9, 9])],
//!     Connectivity::Eight,
//!     WeightConfig::default(),
//! )?;
//! let hypotheses = enumerate_hypotheses(&["a", "b"])?;
//! let tables = CostTables::build(&map, &hypotheses)?;
//! let config = InferenceConfig::with_defaults(hypotheses)?;
//!
//! let mut state = init_monitor(&config, &tables, Cell::new(5, 5))?;
//! for next in [Cell::new(6, 6), Cell::new(7, 7)] {
//!     state = update_posterior(&state, next, &config, &tables)?;
//! }
//! let total: f64 = state.posterior.iter().sum();
//! assert!((total - 1.0).abs() < 1e-9);
//! # Ok::<(), intent_monitor::Error>(())
//! ```

pub mod error;
pub mod harness;
pub mod inference;
pub mod intents;
pub mod predictor;
pub mod product;
pub mod workspace;

pub use error::{Error, Result};
