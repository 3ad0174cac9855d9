//! Median phase timings on one worker thread.
//!
//! ```text
//! cargo run --release -p intent-monitor --example benchmark -- 20 50 100
//! ```

use intent_monitor::harness::run_benchmark;

fn main() -> intent_monitor::Result<()> {
    let mut sizes: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    if sizes.is_empty() {
        sizes = vec![20, 50];
    }
    let report = run_benchmark(&sizes, 5, 3, 0)?;
    println!(
        "{} ({} threads available)",
        report.hardware.cpu, report.hardware.threads
    );
    println!(
        "{:>5} {:>10} {:>12} {:>12} {:>12}",
        "N", "product", "inference", "update", "mc@15"
    );
    for row in &report.rows {
        let mc = row.monte_carlo.last().map_or(0.0, |m| m.seconds);
        println!(
            "{:>5} {:>9.4}s {:>11.4}s {:>11.6}s {:>11.4}s",
            row.n, row.product_build_s, row.inference_s, row.update_s, mc
        );
    }
    Ok(())
}
