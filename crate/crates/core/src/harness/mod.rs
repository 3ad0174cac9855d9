//! Synthetic scenarios, the ground-truth agent, trajectory ingestion, the end-to-end monitor
//! pipeline, and the evaluation experiments built on top of it.

mod experiment;
mod monitor;
mod scenario;
mod trajectory;

pub use experiment::{
    run_accuracy_experiment, run_benchmark, AccuracyParams, BenchReport, BenchRow, EvalReport,
    Hardware, HorizonAccuracy, McTiming, TimingSummary,
};
pub use monitor::{
    run_monitor, run_monitor_filtered, write_heatmaps, write_pgm, write_prediction_csv,
    MonitorConfig, MonitorRun, PhaseTimings, StepRecord,
};
pub use scenario::{default_region_size, generate_scenario, Scenario};
pub use trajectory::{
    agent_rng, discretize_trajectory, path_weight, read_points_csv, simulate_agent, Trajectory,
    TrajectorySource,
};
