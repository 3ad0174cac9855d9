use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use intent_monitor::harness::{
    agent_rng, discretize_trajectory, generate_scenario, read_points_csv, run_accuracy_experiment,
    run_benchmark, run_monitor, simulate_agent, write_heatmaps, AccuracyParams, MonitorConfig,
    Scenario, Trajectory,
};
use intent_monitor::intents::{enumerate_hypotheses, parse_formula};
use intent_monitor::predictor::PredictionConfig;
use intent_monitor::workspace::{parse_map_file, Cell, GridMap};
use intent_monitor::Error;

#[derive(Parser)]
#[command(
    name = "intentmon",
    version,
    about = "Infer an agent's intent from its grid trajectory and predict where it goes next"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random N x N map with K square regions.
    GenMap {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        region_size: Option<usize>,
    },
    /// Simulate a noisy-rational agent pursuing an intent.
    Simulate {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        intent: String,
        #[arg(long, value_parser = parse_cell)]
        start: Cell,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        max_steps: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Replay a trajectory through the monitor and emit the posterior stream.
    Monitor {
        #[arg(long)]
        map: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        props: Vec<String>,
        #[arg(long)]
        traj: PathBuf,
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value_t = 0.3)]
        epsilon: f64,
        #[arg(long, value_delimiter = ',', required = true)]
        horizons: Vec<usize>,
        #[arg(long, default_value_t = 300)]
        sims: usize,
        #[arg(long)]
        seed: u64,
        /// JSON-lines output; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        heatmap_dir: Option<PathBuf>,
    },
    /// Measure prediction accuracy on synthetic episodes.
    Eval {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        episodes: usize,
        #[arg(long)]
        beta_agent: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long, value_delimiter = ',', required = true)]
        horizons: Vec<usize>,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Time product construction, inference and prediction.
    Bench {
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Convert a metric `t,x,y` point file into a grid trajectory.
    Discretize {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_parser = parse_room)]
        room: (f64, f64),
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_cell(s: &str) -> Result<Cell, String> {
    let (x, y) = s.split_once(',').ok_or("expected `x,y`")?;
    let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("`{v}`: {e}"));
    Ok(Cell::new(parse(x)?, parse(y)?))
}

fn parse_room(s: &str) -> Result<(f64, f64), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or("expected `<width>x<height>`")?;
    let parse = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}"));
    Ok((parse(w)?, parse(h)?))
}

fn read_map(path: &Path) -> intent_monitor::Result<GridMap> {
    parse_map_file(&std::fs::read_to_string(path)?)
}

fn create(path: &Path) -> intent_monitor::Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> intent_monitor::Result<()> {
    let mut out = create(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

enum Outcome {
    Done,
    Anomalies(usize),
}

fn run(command: Command) -> intent_monitor::Result<Outcome> {
    match command {
        Command::GenMap {
            n,
            k,
            seed,
            out,
            region_size,
        } => {
            let scenario = generate_scenario(n, k, region_size, seed)?;
            let mut file = create(&out)?;
            writeln!(file, "{}", scenario.map.to_json())?;
            file.flush()?;
            println!("start {} intent {}", scenario.start, scenario.true_intent);
        }
        Command::Simulate {
            map,
            intent,
            start,
            beta,
            max_steps,
            seed,
            out,
        } => {
            let map = read_map(&map)?;
            map.index_of(start)?;
            let scenario = Scenario {
                map,
                true_intent: parse_formula(&intent)?,
                start,
                seed,
            };
            let trajectory = simulate_agent(&scenario, beta, max_steps, &mut agent_rng(seed))?;
            let mut file = create(&out)?;
            trajectory.write_csv(&mut file)?;
            file.flush()?;
        }
        Command::Monitor {
            map,
            props,
            traj,
            beta,
            epsilon,
            horizons,
            sims,
            seed,
            out,
            heatmap_dir,
        } => {
            let map = read_map(&map)?;
            let trajectory = Trajectory::read_csv(File::open(&traj)?)?;
            let hypotheses = enumerate_hypotheses(&props)?;
            let config = MonitorConfig {
                beta,
                epsilon,
                prediction: Some(PredictionConfig::new(horizons, sims, seed)?),
            };
            let run = run_monitor(&map, &hypotheses, &trajectory, &config)?;
            match out {
                Some(path) => {
                    let mut file = create(&path)?;
                    run.write_jsonl(&mut file)?;
                    file.flush()?;
                }
                None => {
                    let mut stdout = io::stdout().lock();
                    run.write_jsonl(&mut stdout)?;
                    stdout.flush()?;
                }
            }
            if let Some(dir) = heatmap_dir {
                write_heatmaps(&run, &map, &dir)?;
            }
            let anomalies = run.anomalies();
            if anomalies > 0 {
                return Ok(Outcome::Anomalies(anomalies));
            }
        }
        Command::Eval {
            n,
            k,
            episodes,
            beta_agent,
            beta,
            horizons,
            seed,
            out,
        } => {
            let mut params = AccuracyParams::new(n, k, episodes, seed);
            params.beta_agent = beta_agent;
            params.beta = beta;
            params.horizons = horizons;
            let report = run_accuracy_experiment(&params)?;
            write_json(&out, &report)?;
            for a in &report.accuracy {
                println!(
                    "h={} accuracy={:.4} ({}/{})",
                    a.h, a.accuracy, a.correct, a.scored
                );
            }
        }
        Command::Bench {
            sizes,
            k,
            reps,
            seed,
            out,
        } => {
            let report = run_benchmark(&sizes, k, reps, seed)?;
            write_json(&out, &report)?;
        }
        Command::Discretize {
            input,
            room,
            n,
            out,
        } => {
            let points = read_points_csv(File::open(&input)?)?;
            let trajectory = discretize_trajectory(&points, room, n)?;
            let mut file = create(&out)?;
            trajectory.write_csv(&mut file)?;
            file.flush()?;
        }
    }
    Ok(Outcome::Done)
}

fn exit_code(err: &Error) -> u8 {
    if err.is_validation() {
        2
    } else {
        3
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Anomalies(n)) => {
            eprintln!("intentmon: {n} anomalous step(s) in the monitor stream");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("intentmon: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
