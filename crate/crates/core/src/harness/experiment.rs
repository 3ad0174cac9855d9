use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use super::monitor::{run_monitor_filtered, MonitorConfig};
use super::scenario::{generate_scenario, Scenario};
use super::trajectory::{agent_rng, simulate_agent};
use crate::error::{Error, Result};
use crate::inference::{init_monitor, update_posterior, CostTables, InferenceConfig};
use crate::intents::{
    build_shared_automaton, enumerate_hypotheses, evaluate_prefix, PrefixVerdict,
};
use crate::predictor::{
    predict_occupancy, prediction_correct, splitmix64, sub_seed, PredictionConfig,
};
use crate::product::build_product;

const SCENARIO_REDRAWS: u64 = 100;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AccuracyParams {
    pub n: usize,
    pub k: usize,
    pub episodes: usize,
    pub beta_agent: f64,
    pub beta: f64,
    pub epsilon: f64,
    pub horizons: Vec<usize>,
    pub sims: usize,
    pub seed: u64,
    pub region_size: Option<usize>,
    /// Defaults to `4 * n`.
    pub max_steps: Option<usize>,
    pub threshold: f64,
}

impl AccuracyParams {
    pub fn new(n: usize, k: usize, episodes: usize, seed: u64) -> Self {
        AccuracyParams {
            n,
            k,
            episodes,
            beta_agent: 1.0,
            beta: 1.0,
            epsilon: 0.3,
            horizons: vec![5, 10, 15],
            sims: 300,
            seed,
            region_size: None,
            max_steps: None,
            threshold: crate::predictor::DEFAULT_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HorizonAccuracy {
    pub h: usize,
    pub correct: usize,
    pub scored: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct TimingSummary {
    pub product_build_s: f64,
    pub per_step_inference_s: f64,
    pub mc_prediction_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hardware {
    pub cpu: String,
    pub threads: usize,
    pub os: String,
}

impl Hardware {
    pub fn detect() -> Self {
        let cpu = std::fs::read_to_string("/proc/cpuinfo")
            .ok()
            .and_then(|info| {
                info.lines()
                    .find(|l| l.starts_with("model name"))
                    .and_then(|l| l.split(':').nth(1))
                    .map(|s| s.trim().to_string())
            })
            .unwrap_or_else(|| "unknown".into());
        Hardware {
            cpu,
            threads: std::thread::available_parallelism().map_or(1, |n| n.get()),
            os: std::env::consts::OS.to_string(),
        }
    }
}

/// Accuracy of the predictive monitor on synthetic episodes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub params: AccuracyParams,
    pub episodes: usize,
    /// Scenario draws that failed and were replaced.
    pub regenerated: usize,
    pub accuracy: Vec<HorizonAccuracy>,
    /// Episodes whose final posterior on the true intent exceeds `1/|H|`.
    pub true_intent_above_uniform: f64,
    /// Episodes whose trajectory ends satisfying the true intent.
    pub satisfied: f64,
    pub timings: TimingSummary,
    pub hardware: Hardware,
}

impl EvalReport {
    pub fn accuracy_at(&self, h: usize) -> Option<f64> {
        self.accuracy.iter().find(|a| a.h == h).map(|a| a.accuracy)
    }
}

struct EpisodeOutcome {
    correct: Vec<usize>,
    scored: Vec<usize>,
    redraws: usize,
    above_uniform: bool,
    satisfied: bool,
    timings: TimingSummary,
}

fn draw_scenario(params: &AccuracyParams, episode_seed: u64) -> Result<(Scenario, usize)> {
    let mut last_err = None;
    for attempt in 0..SCENARIO_REDRAWS {
        match generate_scenario(
            params.n,
            params.k,
            params.region_size,
            sub_seed(episode_seed, attempt),
        ) {
            Ok(s) => return Ok((s, attempt as usize)),
            Err(e @ (Error::Unsatisfiable(_) | Error::RegionPlacement { .. })) => {
                last_err = Some(e)
            }
            Err(e) => return Err(e),
        }
    }
    Err(last_err.expect("at least one attempt was made"))
}

fn run_episode(params: &AccuracyParams, episode: usize) -> Result<EpisodeOutcome> {
    let episode_seed = sub_seed(params.seed, episode as u64);
    let (scenario, redraws) = draw_scenario(params, episode_seed)?;
    let mut agent_rng = agent_rng(scenario.seed);
    let max_steps = params.max_steps.unwrap_or(4 * params.n);
    let trajectory = simulate_agent(&scenario, params.beta_agent, max_steps, &mut agent_rng)?;

    let props: Vec<&str> = scenario.map.propositions().collect();
    let hypotheses = enumerate_hypotheses(&props)?;
    let config = MonitorConfig {
        beta: params.beta,
        epsilon: params.epsilon,
        prediction: Some(PredictionConfig::new(
            params.horizons.clone(),
            params.sims,
            splitmix64(episode_seed),
        )?),
    };
    let last = trajectory.len() - 1;
    let shortest = params.horizons.iter().copied().min().unwrap_or(1);
    let run = run_monitor_filtered(&scenario.map, &hypotheses, &trajectory, &config, &|t| {
        t + shortest <= last
    })?;

    let mut correct = vec![0; params.horizons.len()];
    let mut scored = vec![0; params.horizons.len()];
    for step in &run.steps {
        let Some(prediction) = &step.prediction else {
            continue;
        };
        for (i, dist) in prediction.iter().enumerate() {
            let target = step.t + dist.horizon;
            if target <= last {
                scored[i] += 1;
                if prediction_correct(dist, trajectory.cells[target], params.threshold) {
                    correct[i] += 1;
                }
            }
        }
    }

    let truth = hypotheses
        .iter()
        .position(|h| *h == scenario.true_intent)
        .expect("the true intent is one of the enumerated hypotheses");
    let final_posterior = run.steps.last().expect("nonempty run").posterior[truth].1;
    let labels: Vec<_> = trajectory
        .cells
        .iter()
        .map(|&c| scenario.map.label_of(c))
        .collect::<Result<_>>()?;

    Ok(EpisodeOutcome {
        correct,
        scored,
        redraws,
        above_uniform: final_posterior > 1.0 / hypotheses.len() as f64,
        satisfied: evaluate_prefix(&scenario.true_intent, &labels) == PrefixVerdict::Satisfied,
        timings: TimingSummary {
            product_build_s: run.timings.product_build.as_secs_f64(),
            per_step_inference_s: run.timings.mean_update().as_secs_f64(),
            mc_prediction_s: run.timings.mean_prediction().as_secs_f64(),
        },
    })
}

/// Generates episodes, simulates the agent, replays it through the monitor and scores every
/// prediction whose target time lies inside the trajectory. Episodes run in parallel.
pub fn run_accuracy_experiment(params: &AccuracyParams) -> Result<EvalReport> {
    if params.episodes == 0 {
        return Err(Error::InvalidConfig(
            "at least one episode is required".into(),
        ));
    }
    PredictionConfig::new(params.horizons.clone(), params.sims, params.seed)?;
    let outcomes = (0..params.episodes)
        .into_par_iter()
        .map(|e| run_episode(params, e))
        .collect::<Result<Vec<_>>>()?;

    let episodes = outcomes.len() as f64;
    let accuracy = params
        .horizons
        .iter()
        .enumerate()
        .map(|(i, &h)| {
            let correct: usize = outcomes.iter().map(|o| o.correct[i]).sum();
            let scored: usize = outcomes.iter().map(|o| o.scored[i]).sum();
            HorizonAccuracy {
                h,
                correct,
                scored,
                accuracy: if scored == 0 {
                    0.0
                } else {
                    correct as f64 / scored as f64
                },
            }
        })
        .collect();
    let mean = |f: fn(&TimingSummary) -> f64| {
        outcomes.iter().map(|o| f(&o.timings)).sum::<f64>() / episodes
    };

    Ok(EvalReport {
        params: params.clone(),
        episodes: outcomes.len(),
        regenerated: outcomes.iter().map(|o| o.redraws).sum(),
        accuracy,
        true_intent_above_uniform: outcomes.iter().filter(|o| o.above_uniform).count() as f64
            / episodes,
        satisfied: outcomes.iter().filter(|o| o.satisfied).count() as f64 / episodes,
        timings: TimingSummary {
            product_build_s: mean(|t| t.product_build_s),
            per_step_inference_s: mean(|t| t.per_step_inference_s),
            mc_prediction_s: mean(|t| t.mc_prediction_s),
        },
        hardware: Hardware::detect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McTiming {
    pub steps: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub n: usize,
    pub automaton_states: usize,
    pub product_states: usize,
    pub hypotheses: usize,
    /// Shared automaton and product construction.
    pub product_build_s: f64,
    /// All cost tables plus one posterior update.
    pub inference_s: f64,
    /// One posterior update with tables already built.
    pub update_s: f64,
    /// `sims` rollouts per horizon.
    pub monte_carlo: Vec<McTiming>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub k: usize,
    pub reps: usize,
    pub sims: usize,
    pub seed: u64,
    pub method: String,
    pub rows: Vec<BenchRow>,
    pub hardware: Hardware,
}

impl BenchReport {
    pub fn row(&self, n: usize) -> Option<&BenchRow> {
        self.rows.iter().find(|r| r.n == n)
    }
}

fn median_time<T>(reps: usize, mut f: impl FnMut() -> Result<T>) -> Result<(f64, T)> {
    // Warm-up run, discarded.
    let mut last = f()?;
    let mut samples = Vec::with_capacity(reps);
    for _ in 0..reps {
        let started = Instant::now();
        last = f()?;
        samples.push(started.elapsed());
    }
    samples.sort();
    let mid = samples.len() / 2;
    let median = if samples.len() % 2 == 1 {
        samples[mid]
    } else {
        (samples[mid - 1] + samples[mid]) / 2
    };
    Ok((median.max(Duration::from_nanos(1)).as_secs_f64(), last))
}

/// Times the pipeline phases on one worker thread, reporting the median of `reps` runs.
pub fn run_benchmark(sizes: &[usize], k: usize, reps: usize, seed: u64) -> Result<BenchReport> {
    if sizes.is_empty() || reps == 0 {
        return Err(Error::InvalidConfig(
            "benchmark needs at least one size and one repetition".into(),
        ));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let sims = crate::predictor::DEFAULT_SIMULATIONS;
    let horizons = [5, 10, 15];

    let rows = pool.install(|| {
        sizes
            .iter()
            .map(|&n| -> Result<BenchRow> {
                let scenario = generate_scenario(n, k, None, seed)?;
                let map = &scenario.map;
                let props: Vec<&str> = map.propositions().collect();
                let hypotheses = enumerate_hypotheses(&props)?;
                let config = InferenceConfig::with_defaults(hypotheses.clone())?;

                let (product_build_s, product) = median_time(reps, || {
                    let shared = build_shared_automaton(&props)?;
                    build_product(map, &shared)
                })?;
                let automaton_states = product.automaton().state_count();
                let product_states = product.state_count();

                let first_move = map.moves(map.index_of(scenario.start)?)[0].to;
                let next = map.cell_at(first_move);
                let (inference_s, tables) = median_time(reps, || {
                    let tables = CostTables::from_shared(product.clone(), &hypotheses)?;
                    let state = init_monitor(&config, &tables, scenario.start)?;
                    update_posterior(&state, next, &config, &tables)?;
                    Ok(tables)
                })?;
                let state = init_monitor(&config, &tables, scenario.start)?;
                let (update_s, _) =
                    median_time(reps, || update_posterior(&state, next, &config, &tables))?;

                let monte_carlo = horizons
                    .iter()
                    .map(|&h| {
                        let pc = PredictionConfig::new(vec![h], sims, seed)?;
                        let (seconds, _) =
                            median_time(reps, || predict_occupancy(&state, &pc, &config, &tables))?;
                        Ok(McTiming { steps: h, seconds })
                    })
                    .collect::<Result<Vec<_>>>()?;

                Ok(BenchRow {
                    n,
                    automaton_states,
                    product_states,
                    hypotheses: hypotheses.len(),
                    product_build_s,
                    inference_s,
                    update_s,
                    monte_carlo,
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;

    Ok(BenchReport {
        k,
        reps,
        sims,
        seed,
        method: "monotonic clock, one warm-up run discarded, median of reps, single worker thread"
            .into(),
        rows,
        hardware: Hardware::detect(),
    })
}
