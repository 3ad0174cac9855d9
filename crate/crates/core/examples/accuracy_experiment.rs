//! Synthetic accuracy experiment: how often the true future cell gets at least 1% mass.
//!
//! ```text
//! cargo run --release -p intent-monitor --example accuracy_experiment -- 20 3 50
//! ```

use intent_monitor::harness::{run_accuracy_experiment, AccuracyParams};

fn main() -> intent_monitor::Result<()> {
    let args: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let (n, k, episodes) = match args[..] {
        [n, k, e, ..] => (n, k, e),
        _ => (20, 3, 20),
    };
    let report = run_accuracy_experiment(&AccuracyParams::new(n, k, episodes, 0))?;
    println!(
        "N = {n}, K = {k}, {} episodes ({} re-drawn)",
        report.episodes, report.regenerated
    );
    for a in &report.accuracy {
        println!(
            "  h = {:>2}: {:.3} ({} / {})",
            a.h, a.accuracy, a.correct, a.scored
        );
    }
    println!(
        "true intent above uniform at the end: {:.2}",
        report.true_intent_above_uniform
    );
    println!(
        "trajectories satisfying their intent: {:.2}",
        report.satisfied
    );
    Ok(())
}
