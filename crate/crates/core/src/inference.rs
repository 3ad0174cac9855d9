//! Bayesian intent inference under Boltzmann noisy rationality.
//!
//! Each observed move `x_t -> x_(t+1)` is scored per hypothesis by the softmax of
//! `-beta * (move weight + remaining cost)` over all available moves, multiplied into the
//! current belief, normalized, and finally mixed with the uniform distribution by `epsilon`.
//! The monitor keeps a single shared-automaton run state for the observed prefix, so regions
//! already visited no longer need to be reached again.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::intents::{build_shared_automaton, IntentFormula, StateId};
use crate::product::{build_product, hypothesis_cost_table, CostTable, ProductAutomaton};
use crate::workspace::{Cell, GridMap, Move};

pub const DEFAULT_BETA: f64 = 1.0;
pub const DEFAULT_EPSILON: f64 = 0.3;

#[derive(Debug, Clone, PartialEq)]
pub struct InferenceConfig {
    beta: f64,
    epsilon: f64,
    hypotheses: Vec<IntentFormula>,
}

impl InferenceConfig {
    pub fn new(beta: f64, epsilon: f64, hypotheses: Vec<IntentFormula>) -> Result<Self> {
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "beta must be finite and >= 0, got {beta}"
            )));
        }
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::InvalidConfig(format!(
                "epsilon must lie in [0, 1], got {epsilon}"
            )));
        }
        if hypotheses.is_empty() {
            return Err(Error::EmptyHypotheses);
        }
        let mut seen = HashSet::new();
        for h in &hypotheses {
            if !seen.insert(h) {
                return Err(Error::DuplicateHypothesis(h.canonical()));
            }
        }
        Ok(InferenceConfig {
            beta,
            epsilon,
            hypotheses,
        })
    }

    pub fn with_defaults(hypotheses: Vec<IntentFormula>) -> Result<Self> {
        Self::new(DEFAULT_BETA, DEFAULT_EPSILON, hypotheses)
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn hypotheses(&self) -> &[IntentFormula] {
        &self.hypotheses
    }
}

/// Shared product plus one cost table per hypothesis, all indexed by shared subset states.
#[derive(Debug, Clone)]
pub struct CostTables {
    product: ProductAutomaton,
    tables: Vec<CostTable>,
}

impl CostTables {
    /// Builds the shared product over every proposition the hypotheses mention (in map order)
    /// and extracts all tables from it.
    pub fn build(map: &GridMap, hypotheses: &[IntentFormula]) -> Result<Self> {
        let mentioned: HashSet<&str> = hypotheses.iter().flat_map(|h| h.propositions()).collect();
        for name in &mentioned {
            if !map.propositions().any(|p| p == *name) {
                return Err(Error::UnboundProposition(name.to_string()));
            }
        }
        let props: Vec<&str> = map
            .propositions()
            .filter(|p| mentioned.contains(p))
            .collect();
        let shared = build_shared_automaton(&props)?;
        let product = build_product(map, &shared)?;
        Self::from_shared(product, hypotheses)
    }

    /// Extracts tables from an existing shared product; tables are computed in parallel.
    pub fn from_shared(product: ProductAutomaton, hypotheses: &[IntentFormula]) -> Result<Self> {
        let tables = hypotheses
            .par_iter()
            .map(|h| hypothesis_cost_table(&product, h))
            .collect::<Result<Vec<_>>>()?;
        Ok(CostTables { product, tables })
    }

    pub fn product(&self) -> &ProductAutomaton {
        &self.product
    }

    pub fn map(&self) -> &GridMap {
        self.product.map()
    }

    pub fn tables(&self) -> &[CostTable] {
        &self.tables
    }

    pub fn table_for(&self, hypothesis: &IntentFormula) -> Option<&CostTable> {
        self.tables.iter().find(|t| t.hypothesis() == hypothesis)
    }
}

/// Why an update could not use the evidence normally.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Anomaly {
    /// Every hypothesis assigned the observed move zero probability.
    AllHypothesesImpossible,
    /// The observed move is not a transition of the map; the monitor restarted.
    TrajectoryGap,
}

impl Anomaly {
    pub fn as_str(self) -> &'static str {
        match self {
            Anomaly::AllHypothesesImpossible => "all hypotheses impossible",
            Anomaly::TrajectoryGap => "trajectory gap",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonitorState {
    pub cell: Cell,
    /// Shared-automaton subset reached by the observed prefix.
    pub run_state: StateId,
    pub posterior: Vec<f64>,
    pub t: usize,
    /// Set when the most recent update hit an anomaly.
    pub anomaly: Option<Anomaly>,
}

/// Neumaier-compensated sum.
pub(crate) fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut carry = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

/// Boltzmann distribution over `moves`, written into `out` in move order.
///
/// `cost_after(to)` is the remaining cost after taking the move into cell `to`. With
/// `beta == 0`, or when no move has a finite cost, the distribution is uniform.
pub fn boltzmann_distribution(
    moves: &[Move],
    beta: f64,
    cost_after: impl Fn(usize) -> Option<f64>,
    out: &mut Vec<f64>,
) {
    out.clear();
    if moves.is_empty() {
        return;
    }
    let uniform = 1.0 / moves.len() as f64;
    if beta == 0.0 {
        out.resize(moves.len(), uniform);
        return;
    }
    out.extend(
        moves
            .iter()
            .map(|m| cost_after(m.to).map_or(f64::INFINITY, |c| m.weight + c)),
    );
    let best = out.iter().copied().fold(f64::INFINITY, f64::min);
    if best.is_infinite() {
        out.iter_mut().for_each(|p| *p = uniform);
        return;
    }
    for p in out.iter_mut() {
        *p = if p.is_finite() {
            (-beta * (*p - best)).exp()
        } else {
            0.0
        };
    }
    let total = compensated_sum(out.iter().copied());
    out.iter_mut().for_each(|p| *p /= total);
}

fn move_position(map: &GridMap, from: usize, to: usize) -> Option<usize> {
    map.moves(from).iter().position(|m| m.to == to)
}

fn likelihood_at(
    product: &ProductAutomaton,
    table: &CostTable,
    run_state: StateId,
    from: usize,
    slot: usize,
    beta: f64,
    scratch: &mut Vec<f64>,
) -> f64 {
    let moves = product.map().moves(from);
    boltzmann_distribution(
        moves,
        beta,
        |to| table.get(to, product.enter(run_state, to)),
        scratch,
    );
    scratch[slot]
}

/// Probability of the move `x_t -> x_next` under one hypothesis.
pub fn transition_likelihood(
    tables: &CostTables,
    table: &CostTable,
    run_state: StateId,
    x_t: Cell,
    x_next: Cell,
    beta: f64,
) -> Result<f64> {
    let map = tables.map();
    let from = map.index_of(x_t)?;
    let to = map.index_of(x_next)?;
    let slot = move_position(map, from, to).ok_or(Error::IllegalTransition {
        from: x_t,
        to: x_next,
    })?;
    Ok(likelihood_at(
        tables.product(),
        table,
        run_state,
        from,
        slot,
        beta,
        &mut Vec::new(),
    ))
}

fn tables_in_order<'a>(
    config: &InferenceConfig,
    tables: &'a CostTables,
) -> Result<Vec<&'a CostTable>> {
    config
        .hypotheses()
        .iter()
        .map(|h| {
            tables
                .table_for(h)
                .ok_or_else(|| Error::MissingCostTable(h.canonical()))
        })
        .collect()
}

/// Fresh monitor at `x0` with a uniform belief.
pub fn init_monitor(
    config: &InferenceConfig,
    tables: &CostTables,
    x0: Cell,
) -> Result<MonitorState> {
    tables_in_order(config, tables)?;
    let cell = tables.map().index_of(x0)?;
    let run_state = tables
        .product()
        .enter(tables.product().automaton().initial(), cell);
    let n = config.hypotheses().len();
    Ok(MonitorState {
        cell: x0,
        run_state,
        posterior: vec![1.0 / n as f64; n],
        t: 0,
        anomaly: None,
    })
}

/// Applies `(1 - epsilon) * p + epsilon / n` in place.
pub(crate) fn epsilon_mix(dist: &mut [f64], epsilon: f64) {
    let floor = epsilon / dist.len() as f64;
    dist.iter_mut()
        .for_each(|p| *p = (1.0 - epsilon) * *p + floor);
}

/// Bayes rule followed by epsilon mixing.
///
/// When every product `likelihood * prior` vanishes the normalized belief falls back to uniform
/// and the anomaly is reported.
pub fn bayes_update(
    prior: &[f64],
    likelihoods: &[f64],
    epsilon: f64,
) -> (Vec<f64>, Option<Anomaly>) {
    let unnormalized: Vec<f64> = likelihoods.iter().zip(prior).map(|(l, p)| l * p).collect();
    let total = compensated_sum(unnormalized.iter().copied());
    let n = unnormalized.len();
    let (mut posterior, anomaly) = if total > 0.0 {
        (
            unnormalized.iter().map(|u| u / total).collect::<Vec<_>>(),
            None,
        )
    } else {
        (
            vec![1.0 / n as f64; n],
            Some(Anomaly::AllHypothesesImpossible),
        )
    };
    epsilon_mix(&mut posterior, epsilon);
    (posterior, anomaly)
}

/// One Bayesian update for the observed move into `x_next`.
pub fn update_posterior(
    state: &MonitorState,
    x_next: Cell,
    config: &InferenceConfig,
    tables: &CostTables,
) -> Result<MonitorState> {
    let ordered = tables_in_order(config, tables)?;
    let map = tables.map();
    let product = tables.product();
    let from = map.index_of(state.cell)?;
    let to = map.index_of(x_next)?;
    let slot = move_position(map, from, to).ok_or(Error::TrajectoryGap {
        from: state.cell,
        to: x_next,
    })?;

    let mut scratch = Vec::new();
    let likelihoods: Vec<f64> = ordered
        .iter()
        .map(|table| {
            likelihood_at(
                product,
                table,
                state.run_state,
                from,
                slot,
                config.beta(),
                &mut scratch,
            )
        })
        .collect();
    let (posterior, anomaly) = bayes_update(&state.posterior, &likelihoods, config.epsilon());
    if anomaly.is_some() {
        log::warn!(
            "step {}: move {} -> {} is impossible under every hypothesis",
            state.t + 1,
            state.cell,
            x_next
        );
    }

    Ok(MonitorState {
        cell: x_next,
        run_state: product.enter(state.run_state, to),
        posterior,
        t: state.t + 1,
        anomaly,
    })
}

/// `(canonical formula, probability)` pairs in hypothesis order.
pub fn posterior_snapshot(state: &MonitorState, config: &InferenceConfig) -> Vec<(String, f64)> {
    config
        .hypotheses()
        .iter()
        .map(IntentFormula::canonical)
        .zip(state.posterior.iter().copied())
        .collect()
}
