//! CLI invocations whose outputs are compared against checked-in golden files.
//!
//! Setting `UPDATE_GOLDEN=1` rewrites the expected files instead of comparing.

#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const MASK: &str = "<machine-dependent>";

/// Golden file name and the bytes the CLI produced for it.
pub type Artifact = (&'static str, Vec<u8>);

pub type Case = (&'static str, fn() -> Vec<Artifact>);

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

pub fn intentmon(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_intentmon"))
        .args(args)
        .env("RUST_LOG", "off")
        .output()
        .expect("binary runs")
}

fn succeed(args: &[&str]) -> Output {
    let out = intentmon(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// Compares one artifact with its golden file, or blesses it.
pub fn check((name, actual): &Artifact) -> Result<(), String> {
    let path = golden_dir().join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).map_err(|e| e.to_string())?;
        return Ok(());
    }
    let expected = std::fs::read(&path)
        .map_err(|e| format!("{}: {e}; bless with UPDATE_GOLDEN=1", path.display()))?;
    if expected == *actual {
        Ok(())
    } else {
        Err(format!(
            "{name} differs from golden\n--- expected\n{}\n--- actual\n{}",
            String::from_utf8_lossy(&expected),
            String::from_utf8_lossy(actual)
        ))
    }
}

pub fn assert_golden(artifacts: &[Artifact]) {
    for a in artifacts {
        if let Err(e) = check(a) {
            panic!("{e}");
        }
    }
}

/// Replaces wall-clock and hardware fields, which cannot be reproduced across runs.
fn mask(value: &mut Value) {
    match value {
        Value::Object(map) => {
            for (key, v) in map.iter_mut() {
                if key == "hardware" || key == "timings" || key == "seconds" || key.ends_with("_s")
                {
                    *v = Value::String(MASK.into());
                } else {
                    mask(v);
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(mask),
        _ => {}
    }
}

fn masked_json(path: &Path) -> Vec<u8> {
    let mut value: Value = serde_json::from_slice(&read(path)).unwrap();
    mask(&mut value);
    let mut bytes = serde_json::to_vec_pretty(&value).unwrap();
    bytes.push(b'\n');
    bytes
}

pub fn gen_map() -> Vec<Artifact> {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("map.json");
    let run = succeed(&[
        "gen-map",
        "--n",
        "12",
        "--k",
        "3",
        "--seed",
        "7",
        "--out",
        path_str(&out),
    ]);
    vec![("gen_map.json", read(&out)), ("gen_map.stdout", run.stdout)]
}

pub fn simulate() -> Vec<Artifact> {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("traj.csv");
    let map = golden_dir().join("gen_map.json");
    #[rustfmt::skip]
    succeed(&[
        "simulate", "--map", path_str(&map), "--intent", "F p1 & G !p0", "--start", "6,6",
        "--beta", "2", "--max-steps", "40", "--seed", "3", "--out", path_str(&out),
    ]);
    vec![("simulate.csv", read(&out))]
}

pub fn monitor() -> Vec<Artifact> {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("stream.jsonl");
    let heatmaps = dir.path().join("heat");
    let map = golden_dir().join("gen_map.json");
    let traj = golden_dir().join("simulate.csv");
    #[rustfmt::skip]
    succeed(&[
        "monitor", "--map", path_str(&map), "--props", "p0,p1,p2", "--traj", path_str(&traj),
        "--beta", "1", "--horizons", "2,4", "--sims", "50", "--seed", "11",
        "--out", path_str(&out), "--heatmap-dir", path_str(&heatmaps),
    ]);
    vec![
        ("monitor.jsonl", read(&out)),
        (
            "monitor_step_0001.csv",
            read(&heatmaps.join("step_0001.csv")),
        ),
        (
            "monitor_step_0001_h4.pgm",
            read(&heatmaps.join("step_0001_h4.pgm")),
        ),
    ]
}

/// A trajectory with a jump: the stream flags it and the process exits with code 3.
pub fn monitor_gap() -> Vec<Artifact> {
    let dir = tempfile::tempdir().unwrap();
    let traj = dir.path().join("gap.csv");
    std::fs::write(&traj, "step,x,y\n0,6,6\n1,7,7\n2,10,10\n3,11,11\n").unwrap();
    let map = golden_dir().join("gen_map.json");
    #[rustfmt::skip]
    let run = intentmon(&[
        "monitor", "--map", path_str(&map), "--props", "p0,p1", "--traj", path_str(&traj),
        "--beta", "1", "--horizons", "1", "--sims", "20", "--seed", "1",
    ]);
    assert_eq!(
        run.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    vec![("monitor_gap.jsonl", run.stdout)]
}

pub fn discretize() -> Vec<Artifact> {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("traj.csv");
    let input = golden_dir().join("points.csv");
    #[rustfmt::skip]
    succeed(&[
        "discretize", "--in", path_str(&input), "--room", "8.4x18.8", "--n", "50", "--out", path_str(&out),
    ]);
    vec![("discretize.csv", read(&out))]
}

pub fn eval() -> Vec<Artifact> {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    #[rustfmt::skip]
    let run = succeed(&[
        "eval", "--n", "10", "--k", "2", "--episodes", "4", "--beta-agent", "2", "--beta", "2",
        "--horizons", "2,4", "--seed", "5", "--out", path_str(&out),
    ]);
    vec![
        ("eval.json", masked_json(&out)),
        ("eval.stdout", run.stdout),
    ]
}

pub fn bench() -> Vec<Artifact> {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bench.json");
    succeed(&[
        "bench",
        "--sizes",
        "8,10",
        "--k",
        "2",
        "--reps",
        "1",
        "--out",
        path_str(&out),
    ]);
    vec![("bench.json", masked_json(&out))]
}

/// Every case, inputs before the cases that read them.
pub fn all_cases() -> Vec<Case> {
    vec![
        ("gen-map", gen_map as fn() -> Vec<Artifact>),
        ("simulate", simulate),
        ("monitor", monitor),
        ("monitor (gap)", monitor_gap),
        ("discretize", discretize),
        ("eval", eval),
        ("bench", bench),
    ]
}
