use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use fifo_backlog::harness::{self, report, ExperimentConfig, OracleConfig};
use fifo_backlog::io::{scenario_from_json, scenario_to_json};
use fifo_backlog::{
    disco_theta_opt, exact_theta_opt, generate_scenario, heuristic_theta_opt, Error, Scenario, ScenarioConfig,
};
use serde_json::{json, Value};

/// Per-flow backlog bounds at a FIFO server.
#[derive(Parser)]
#[command(name = "fifo-backlog", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Exact,
    Heuristic,
    Disco,
    All,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one scenario file; prints one JSON object per method.
    Solve {
        scenario: PathBuf,
        #[arg(long, value_enum, default_value = "all")]
        method: MethodArg,
    },
    /// Run the sweep over iterations and cross-flow counts and write the rows as CSV.
    Experiment {
        #[arg(long, default_value_t = 500)]
        iterations: usize,
        #[arg(long, default_value_t = 2)]
        cross_min: usize,
        #[arg(long, default_value_t = 10)]
        cross_max: usize,
        #[arg(long, default_value_t = 2)]
        foi_segments: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, alias = "out-csv")]
        out: PathBuf,
        /// Also write per-flow bound sums and aggregate bounds to this CSV.
        #[arg(long)]
        segregation: Option<PathBuf>,
        /// Timed solver calls per row (after one untimed call).
        #[arg(long, default_value_t = 1)]
        timing_repeats: usize,
    },
    /// Summarize an experiment CSV per number of cross flows.
    Report {
        rows: PathBuf,
        #[arg(long)]
        segregation: Option<PathBuf>,
        /// Write the summary table as CSV as well.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Grid-search theta by brute force.
    Oracle {
        scenario: PathBuf,
        #[arg(long, default_value_t = 1e-3)]
        theta_step: f64,
        #[arg(long, default_value_t = 2.0)]
        t_horizon_factor: f64,
        #[arg(long, default_value_t = 512)]
        t_samples: usize,
    },
    /// Generate a scenario and print it as JSON.
    Gen {
        #[arg(long)]
        n_cross: usize,
        #[arg(long, default_value_t = 2)]
        foi_segments: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    Ok(scenario_from_json(&text)?)
}

fn with_time(mut v: Value, cpu: std::time::Duration) -> Value {
    v["cpu_time_us"] = json!(cpu.as_secs_f64() * 1e6);
    v
}

fn solve(path: &Path, method: MethodArg) -> Result<()> {
    let scenario = load_scenario(path)?;
    let input = scenario.input()?;
    let mut out = io::stdout().lock();
    if matches!(method, MethodArg::Exact | MethodArg::All) {
        let r = exact_theta_opt(&input)?;
        writeln!(out, "{}", with_time(serde_json::to_value(&r)?, r.cpu_time))?;
    }
    if matches!(method, MethodArg::Heuristic | MethodArg::All) {
        let (r, trace) = heuristic_theta_opt(&input)?;
        let mut v = with_time(serde_json::to_value(&r)?, r.cpu_time);
        v["trace"] = serde_json::to_value(&trace)?;
        writeln!(out, "{v}")?;
    }
    if matches!(method, MethodArg::Disco | MethodArg::All) {
        let r = disco_theta_opt(&input, &scenario.cross_first_bursts())?;
        writeln!(out, "{}", with_time(serde_json::to_value(&r)?, r.cpu_time))?;
    }
    Ok(())
}

/// Writes `text` and a newline to stdout.
fn emit(text: &str) -> Result<()> {
    let mut out = io::stdout().lock();
    writeln!(out, "{text}")?;
    out.flush()?;
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("cannot write {}", path.display()))?))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Solve { scenario, method } => solve(&scenario, method),
        Command::Experiment {
            iterations,
            cross_min,
            cross_max,
            foi_segments,
            seed,
            out,
            segregation,
            timing_repeats,
        } => {
            let cfg = ExperimentConfig {
                iterations,
                cross_min,
                cross_max,
                foi_segments,
                seed,
                workers: harness::workers_from_env()?,
                segregation: segregation.is_some(),
                timing_repeats,
            };
            let mut rows_out = create(&out)?;
            let experiment = harness::run_experiment(&cfg)?;
            harness::write_rows(&mut rows_out, &experiment.rows)?;
            if let Some(path) = segregation {
                harness::write_segregation(create(&path)?, &experiment.segregation)?;
            }
            eprintln!("wrote {} rows to {}", experiment.rows.len(), out.display());
            Ok(())
        }
        Command::Report { rows, segregation, csv } => {
            let file = File::open(&rows).with_context(|| format!("cannot read {}", rows.display()))?;
            let summary = harness::summarize(&harness::read_rows(file)?)?;
            let mut text = report::format_summary(&summary);
            if let Some(path) = csv {
                report::write_csv(create(&path)?, &summary)?;
            }
            if let Some(path) = segregation {
                let file = File::open(&path).with_context(|| format!("cannot read {}", path.display()))?;
                let seg = harness::summarize_segregation(&harness::read_segregation(file)?)?;
                text.push('\n');
                text.push_str(&report::format_segregation(&seg));
            }
            emit(text.trim_end())
        }
        Command::Oracle { scenario, theta_step, t_horizon_factor, t_samples } => {
            let input = load_scenario(&scenario)?.input()?;
            let cfg = OracleConfig { theta_step, horizon_factor: t_horizon_factor, t_samples };
            let result = harness::run_oracle(&input, &cfg)?;
            emit(&serde_json::to_string(&result)?)
        }
        Command::Gen { n_cross, foi_segments, seed, out } => {
            let scenario = generate_scenario(&ScenarioConfig::new(n_cross, foi_segments, seed))?;
            let text = scenario_to_json(&scenario);
            match out {
                Some(path) => {
                    fs::write(&path, text + "\n").with_context(|| format!("cannot write {}", path.display()))?
                }
                None => emit(&text)?,
            }
            Ok(())
        }
    }
}

fn is_broken_pipe(err: &anyhow::Error) -> bool {
    err.chain().any(|e| e.downcast_ref::<io::Error>().is_some_and(|e| e.kind() == io::ErrorKind::BrokenPipe))
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Parse { .. } | Error::Argument(_)) => 2,
        Some(Error::Instability { .. }) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) if is_broken_pipe(&err) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
