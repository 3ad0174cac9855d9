use std::io::Write;
use std::path::Path;
use std::time::{Duration, Instant};

use serde_json::{json, Map, Value};

use super::trajectory::Trajectory;
use crate::error::{Error, Result};
use crate::inference::{
    init_monitor, posterior_snapshot, update_posterior, Anomaly, CostTables, InferenceConfig,
    MonitorState,
};
use crate::intents::IntentFormula;
use crate::predictor::{predict_occupancy, sub_seed, OccupancyDistribution, PredictionConfig};
use crate::workspace::{Cell, GridMap};

#[derive(Debug, Clone)]
pub struct MonitorConfig {
    pub beta: f64,
    pub epsilon: f64,
    /// Predictions are skipped when `None`.
    pub prediction: Option<PredictionConfig>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub t: usize,
    pub cell: Cell,
    pub posterior: Vec<(String, f64)>,
    pub anomaly: Option<Anomaly>,
    pub prediction: Option<Vec<OccupancyDistribution>>,
}

impl StepRecord {
    pub fn to_json(&self) -> Value {
        let posterior: Map<String, Value> = self
            .posterior
            .iter()
            .map(|(name, p)| (name.clone(), json!(p)))
            .collect();
        let mut obj = Map::new();
        obj.insert("t".into(), json!(self.t));
        obj.insert("cell".into(), json!([self.cell.x, self.cell.y]));
        obj.insert("posterior".into(), Value::Object(posterior));
        if let Some(anomaly) = self.anomaly {
            obj.insert("anomaly".into(), json!(anomaly.as_str()));
        }
        if let Some(prediction) = &self.prediction {
            let dists: Vec<Value> = prediction
                .iter()
                .map(|d| {
                    let cells: Vec<Value> =
                        d.cells.iter().map(|(c, p)| json!([c.x, c.y, p])).collect();
                    json!({ "h": d.horizon, "cells": cells })
                })
                .collect();
            obj.insert("prediction".into(), Value::Array(dists));
        }
        Value::Object(obj)
    }
}

/// Wall-clock time spent per pipeline phase.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PhaseTimings {
    pub product_build: Duration,
    pub inference: Duration,
    pub prediction: Duration,
    pub updates: usize,
    pub predictions: usize,
}

impl PhaseTimings {
    pub fn mean_update(&self) -> Duration {
        self.inference
            .checked_div(self.updates.max(1) as u32)
            .unwrap_or_default()
    }

    pub fn mean_prediction(&self) -> Duration {
        self.prediction
            .checked_div(self.predictions.max(1) as u32)
            .unwrap_or_default()
    }
}

#[derive(Debug, Clone)]
pub struct MonitorRun {
    pub steps: Vec<StepRecord>,
    pub timings: PhaseTimings,
    pub config: InferenceConfig,
}

impl MonitorRun {
    pub fn anomalies(&self) -> usize {
        self.steps.iter().filter(|s| s.anomaly.is_some()).count()
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for step in &self.steps {
            serde_json::to_writer(&mut out, &step.to_json())?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    /// Posterior of one hypothesis over time.
    pub fn posterior_of(&self, hypothesis: &IntentFormula) -> Option<Vec<f64>> {
        let i = self
            .config
            .hypotheses()
            .iter()
            .position(|h| h == hypothesis)?;
        Some(self.steps.iter().map(|s| s.posterior[i].1).collect())
    }
}

/// Which steps get a prediction.
pub type PredictFilter<'a> = &'a dyn Fn(usize) -> bool;

/// Replays a trajectory through the monitor, predicting at every step.
pub fn run_monitor(
    map: &GridMap,
    hypotheses: &[IntentFormula],
    trajectory: &Trajectory,
    config: &MonitorConfig,
) -> Result<MonitorRun> {
    run_monitor_filtered(map, hypotheses, trajectory, config, &|_| true)
}

/// Like [`run_monitor`], predicting only at steps where `predict_at(t)` holds.
pub fn run_monitor_filtered(
    map: &GridMap,
    hypotheses: &[IntentFormula],
    trajectory: &Trajectory,
    config: &MonitorConfig,
    predict_at: PredictFilter<'_>,
) -> Result<MonitorRun> {
    if trajectory.is_empty() {
        return Err(Error::EmptyInput);
    }
    let inference = InferenceConfig::new(config.beta, config.epsilon, hypotheses.to_vec())?;
    let mut timings = PhaseTimings::default();

    let started = Instant::now();
    let tables = CostTables::build(map, hypotheses)?;
    timings.product_build = started.elapsed();

    let mut state = init_monitor(&inference, &tables, trajectory.cells[0])?;
    let mut steps = Vec::with_capacity(trajectory.len());
    steps.push(record(
        &state,
        &inference,
        &tables,
        config,
        predict_at,
        &mut timings,
    )?);

    for &next in &trajectory.cells[1..] {
        let started = Instant::now();
        state = match update_posterior(&state, next, &inference, &tables) {
            Ok(updated) => updated,
            Err(Error::TrajectoryGap { from, to }) => {
                log::warn!("trajectory gap between {from} and {to}; restarting the monitor");
                let t = state.t + 1;
                MonitorState {
                    t,
                    anomaly: Some(Anomaly::TrajectoryGap),
                    ..init_monitor(&inference, &tables, next)?
                }
            }
            Err(e) => return Err(e),
        };
        timings.inference += started.elapsed();
        timings.updates += 1;
        steps.push(record(
            &state,
            &inference,
            &tables,
            config,
            predict_at,
            &mut timings,
        )?);
    }

    Ok(MonitorRun {
        steps,
        timings,
        config: inference,
    })
}

fn record(
    state: &MonitorState,
    inference: &InferenceConfig,
    tables: &CostTables,
    config: &MonitorConfig,
    predict_at: PredictFilter<'_>,
    timings: &mut PhaseTimings,
) -> Result<StepRecord> {
    let prediction = match &config.prediction {
        Some(pc) if predict_at(state.t) => {
            let started = Instant::now();
            let step_config = PredictionConfig {
                seed: sub_seed(pc.seed, state.t as u64),
                ..pc.clone()
            };
            let dists = predict_occupancy(state, &step_config, inference, tables)?;
            timings.prediction += started.elapsed();
            timings.predictions += 1;
            Some(dists)
        }
        _ => None,
    };
    Ok(StepRecord {
        t: state.t,
        cell: state.cell,
        posterior: posterior_snapshot(state, inference),
        anomaly: state.anomaly,
        prediction,
    })
}

/// Writes `h,x,y,prob` rows for every horizon.
pub fn write_prediction_csv<W: Write>(dists: &[OccupancyDistribution], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(["h", "x", "y", "prob"])?;
    for d in dists {
        for (c, p) in &d.cells {
            writer.write_record([
                d.horizon.to_string(),
                c.x.to_string(),
                c.y.to_string(),
                p.to_string(),
            ])?;
        }
    }
    writer.flush()?;
    Ok(())
}

/// Binary PGM with the most probable cell white; row `y = 0` is the top of the image.
pub fn write_pgm<W: Write>(
    dist: &OccupancyDistribution,
    width: usize,
    height: usize,
    mut out: W,
) -> Result<()> {
    let max = dist.cells.iter().map(|(_, p)| *p).fold(0.0, f64::max);
    let mut pixels = vec![0u8; width * height];
    if max > 0.0 {
        for (c, p) in &dist.cells {
            pixels[c.y * width + c.x] = (p / max * 255.0).round() as u8;
        }
    }
    write!(out, "P5\n{width} {height}\n255\n")?;
    out.write_all(&pixels)?;
    Ok(())
}

/// Per-step heatmaps: `step_TTTT.csv` with all horizons and `step_TTTT_hH.pgm` per horizon.
pub fn write_heatmaps(run: &MonitorRun, map: &GridMap, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for step in &run.steps {
        let Some(prediction) = &step.prediction else {
            continue;
        };
        let csv = std::fs::File::create(dir.join(format!("step_{:04}.csv", step.t)))?;
        write_prediction_csv(prediction, csv)?;
        for d in prediction {
            let pgm =
                std::fs::File::create(dir.join(format!("step_{:04}_h{}.pgm", step.t, d.horizon)))?;
            write_pgm(d, map.width(), map.height(), std::io::BufWriter::new(pgm))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::trajectory::TrajectorySource;
    use crate::intents::enumerate_hypotheses;
    use crate::workspace::{Connectivity, Region, WeightConfig};

    fn map() -> GridMap {
        let regions = vec![
            Region::new("p0", [0, 0, 1, 1]),
            Region::new("p1", [6, 0, 7, 1]),
            Region::new("p2", [3, 6, 4, 7]),
        ];
        GridMap::new(8, 8, regions, Connectivity::Eight, WeightConfig::default()).unwrap()
    }

    fn traj(cells: &[(usize, usize)]) -> Trajectory {
        Trajectory {
            cells: cells.iter().map(|&(x, y)| Cell::new(x, y)).collect(),
            source: TrajectorySource::Ingested,
        }
    }

    fn config() -> MonitorConfig {
        MonitorConfig {
            beta: 1.0,
            epsilon: 0.3,
            prediction: Some(PredictionConfig::new(vec![1, 2], 50, 3).unwrap()),
        }
    }

    #[test]
    fn entering_p0_floors_its_avoiders() {
        let hyps = enumerate_hypotheses(&["p0", "p1", "p2"]).unwrap();
        let run = run_monitor(&map(), &hyps, &traj(&[(3, 3), (2, 2), (1, 1)]), &config()).unwrap();
        assert_eq!(run.steps.len(), 3);
        let last = &run.steps[2];
        for (h, (name, p)) in hyps.iter().zip(&last.posterior) {
            assert_eq!(&h.canonical(), name);
            if h.avoid().contains("p0") {
                assert_eq!(*p, 0.3 / 8.0);
            }
        }
        assert!(run
            .steps
            .iter()
            .all(|s| s.prediction.as_ref().is_some_and(|p| p.len() == 2)));
    }

    #[test]
    fn gaps_restart_the_monitor() {
        let hyps = enumerate_hypotheses(&["p0", "p1", "p2"]).unwrap();
        let run = run_monitor(
            &map(),
            &hyps,
            &traj(&[(3, 3), (3, 4), (6, 6), (6, 5)]),
            &config(),
        )
        .unwrap();
        assert_eq!(run.steps[2].anomaly, Some(Anomaly::TrajectoryGap));
        assert_eq!(run.steps[2].t, 2);
        assert!(run.steps[2].posterior.iter().all(|(_, p)| *p == 0.125));
        assert_eq!(run.steps[3].anomaly, None);
        assert_eq!(run.anomalies(), 1);
    }

    #[test]
    fn empty_trajectory_is_rejected() {
        let hyps = enumerate_hypotheses(&["p0"]).unwrap();
        assert!(matches!(
            run_monitor(&map(), &hyps, &traj(&[]), &config()),
            Err(Error::EmptyInput)
        ));
    }

    #[test]
    fn jsonl_shape() {
        let hyps = enumerate_hypotheses(&["p0", "p1"]).unwrap();
        let run = run_monitor(&map(), &hyps, &traj(&[(3, 3), (3, 4)]), &config()).unwrap();
        let mut out = Vec::new();
        run.write_jsonl(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[0].starts_with(r#"{"t":0,"cell":[3,3],"posterior":{"G !p0 & G !p1":0.25,"#));
        let v: Value = serde_json::from_str(lines[1]).unwrap();
        assert_eq!(v["prediction"][0]["h"], 1);
        assert!(v.get("anomaly").is_none());
    }

    #[test]
    fn pgm_header_and_scaling() {
        let d = OccupancyDistribution {
            horizon: 1,
            cells: vec![(Cell::new(0, 0), 0.25), (Cell::new(1, 1), 0.5)],
        };
        let mut out = Vec::new();
        write_pgm(&d, 2, 2, &mut out).unwrap();
        assert_eq!(&out[..11], b"P5\n2 2\n255\n");
        assert_eq!(&out[11..], &[128, 0, 0, 255]);
    }
}
