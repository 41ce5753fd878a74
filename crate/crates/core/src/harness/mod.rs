//! Experiment sweeps, summaries and the brute-force oracle.

pub mod oracle;
pub mod report;

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use std::time::Duration;

use crate::exact::{exact_theta_opt, Method, SolveResult};
use crate::heuristic::heuristic_theta_opt;
use crate::scenario::{
    aggregate_backlog, disco_theta_opt, generate_scenario, per_flow_bounds, Scenario, ScenarioConfig,
};

pub use oracle::{oracle_backlog, run_oracle, OracleConfig, OraclePoint, OracleResult};
pub use report::{summarize, summarize_segregation, SegregationSummary, SummaryRow};

/// Column order of the experiment CSV.
pub const CSV_HEADER: &str = "iteration,n_cross,foi_segments,method,theta,backlog,cpu_time_us";

/// Environment variable holding the worker count.
pub const WORKERS_ENV: &str = "FIFO_BACKLOG_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub iteration: usize,
    pub n_cross: usize,
    pub foi_segments: usize,
    pub method: Method,
    pub theta: f64,
    pub backlog: f64,
    pub cpu_time_us: f64,
}

/// Per-flow bound sums of one scenario next to its aggregate bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegregationRow {
    pub iteration: usize,
    pub n_cross: usize,
    pub q_agg: f64,
    pub sum_exact: f64,
    pub sum_heuristic: f64,
    pub sum_disco: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentConfig {
    pub iterations: usize,
    pub cross_min: usize,
    pub cross_max: usize,
    pub foi_segments: usize,
    pub seed: u64,
    pub workers: usize,
    /// Also compute every flow's bound and the aggregate bound.
    pub segregation: bool,
    /// Solver calls per timing sample; the row stores the mean per call.
    pub timing_repeats: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            iterations: 500,
            cross_min: 2,
            cross_max: 10,
            foi_segments: 2,
            seed: 1,
            workers: 1,
            segregation: false,
            timing_repeats: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Experiment {
    pub rows: Vec<ExperimentRow>,
    pub segregation: Vec<SegregationRow>,
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Scenario seed of one sweep cell.
pub fn derive_seed(master: u64, iteration: usize, n_cross: usize) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ iteration as u64) ^ n_cross as u64)
}

/// Reads the worker count from [`WORKERS_ENV`]; 1 when unset.
pub fn workers_from_env() -> Result<usize> {
    match std::env::var(WORKERS_ENV) {
        Err(_) => Ok(1),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(Error::Argument(format!("{WORKERS_ENV}={v:?} must be a positive integer"))),
        },
    }
}

pub fn scenario_for(cfg: &ExperimentConfig, iteration: usize, n_cross: usize) -> Result<Scenario> {
    generate_scenario(&ScenarioConfig::new(n_cross, cfg.foi_segments, derive_seed(cfg.seed, iteration, n_cross)))
}

fn run_cell(
    cfg: &ExperimentConfig,
    iteration: usize,
    n_cross: usize,
) -> Result<(Vec<ExperimentRow>, Option<SegregationRow>)> {
    let scenario = scenario_for(cfg, iteration, n_cross)?;
    let input = scenario.input()?;
    let bursts = scenario.cross_first_bursts();
    let timed = |method: Method| -> Result<SolveResult> {
        let mut total = Duration::ZERO;
        let mut last = None;
        // One untimed call first so freshly generated data is not charged to the solver.
        for k in 0..=cfg.timing_repeats {
            let r = match method {
                Method::Exact => exact_theta_opt(&input)?,
                Method::Heuristic => heuristic_theta_opt(&input)?.0,
                Method::Disco => disco_theta_opt(&input, &bursts)?,
            };
            if k > 0 {
                total += r.cpu_time;
            }
            last = Some(r);
        }
        let r = last.expect("timing_repeats >= 1");
        Ok(SolveResult { cpu_time: total / cfg.timing_repeats as u32, ..r })
    };
    let results = [timed(Method::Exact)?, timed(Method::Heuristic)?, timed(Method::Disco)?];
    let rows = results
        .iter()
        .map(|r| ExperimentRow {
            iteration,
            n_cross,
            foi_segments: cfg.foi_segments,
            method: r.method,
            theta: r.theta,
            backlog: r.backlog,
            cpu_time_us: r.cpu_time.as_secs_f64() * 1e6,
        })
        .collect();
    let segregation = if cfg.segregation {
        let sum = |m| per_flow_bounds(&scenario, m).map(|b| b.iter().sum::<f64>());
        Some(SegregationRow {
            iteration,
            n_cross,
            q_agg: aggregate_backlog(&scenario)?,
            sum_exact: sum(Method::Exact)?,
            sum_heuristic: sum(Method::Heuristic)?,
            sum_disco: sum(Method::Disco)?,
        })
    } else {
        None
    };
    Ok((rows, segregation))
}

/// Runs every `(iteration, n_cross)` cell with all three methods. Output
/// order does not depend on the worker count.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Experiment> {
    if cfg.iterations == 0 || cfg.cross_min > cfg.cross_max || cfg.workers == 0 || cfg.timing_repeats == 0 {
        return Err(Error::Argument(
            "need iterations >= 1, cross_min <= cross_max, workers >= 1 and timing_repeats >= 1".into(),
        ));
    }
    let cells: Vec<(usize, usize)> =
        (0..cfg.iterations).flat_map(|i| (cfg.cross_min..=cfg.cross_max).map(move |n| (i, n))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Argument(format!("cannot start workers: {e}")))?;
    let results: Vec<_> =
        pool.install(|| cells.par_iter().map(|&(i, n)| run_cell(cfg, i, n)).collect::<Result<_>>())?;
    let mut out = Experiment::default();
    for (rows, seg) in results {
        out.rows.extend(rows);
        out.segregation.extend(seg);
    }
    Ok(out)
}

fn csv_error(e: csv::Error) -> Error {
    Error::Argument(format!("csv: {e}"))
}

pub fn write_rows<W: Write>(w: W, rows: &[ExperimentRow]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    if rows.is_empty() {
        wtr.write_record(CSV_HEADER.split(',')).map_err(csv_error)?;
    }
    for r in rows {
        wtr.serialize(r).map_err(csv_error)?;
    }
    wtr.flush().map_err(|e| Error::Argument(format!("csv: {e}")))
}

pub fn read_rows<R: Read>(r: R) -> Result<Vec<ExperimentRow>> {
    let mut rdr = csv::Reader::from_reader(r);
    let header = rdr.headers().map_err(csv_error)?.iter().collect::<Vec<_>>().join(",");
    if header != CSV_HEADER {
        return Err(Error::Argument(format!("unexpected csv header {header:?}")));
    }
    rdr.deserialize().map(|r| r.map_err(csv_error)).collect()
}

pub fn write_segregation<W: Write>(w: W, rows: &[SegregationRow]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for r in rows {
        wtr.serialize(r).map_err(csv_error)?;
    }
    wtr.flush().map_err(|e| Error::Argument(format!("csv: {e}")))
}

pub fn read_segregation<R: Read>(r: R) -> Result<Vec<SegregationRow>> {
    csv::Reader::from_reader(r).deserialize().map(|r| r.map_err(csv_error)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_differ_per_cell() {
        let a = derive_seed(1, 0, 2);
        assert_ne!(a, derive_seed(1, 0, 3));
        assert_ne!(a, derive_seed(1, 1, 2));
        assert_ne!(a, derive_seed(2, 0, 2));
        assert_eq!(a, derive_seed(1, 0, 2));
    }

    #[test]
    fn small_sweep_counts_and_order() {
        let cfg = ExperimentConfig { iterations: 2, cross_min: 2, cross_max: 4, ..Default::default() };
        let e = run_experiment(&cfg).unwrap();
        assert_eq!(e.rows.len(), 2 * 3 * 3);
        assert_eq!(e.rows[0].method, Method::Exact);
        assert_eq!(e.rows[4].method, Method::Heuristic);
        assert_eq!((e.rows[17].iteration, e.rows[17].n_cross), (1, 4));
        let parallel = run_experiment(&ExperimentConfig { workers: 3, ..cfg }).unwrap();
        let strip = |rows: &[ExperimentRow]| {
            rows.iter().map(|r| (r.iteration, r.n_cross, r.method, r.theta, r.backlog)).collect::<Vec<_>>()
        };
        assert_eq!(strip(&e.rows), strip(&parallel.rows));
    }

    #[test]
    fn csv_round_trip() {
        let cfg =
            ExperimentConfig { iterations: 1, cross_min: 2, cross_max: 3, segregation: true, ..Default::default() };
        let e = run_experiment(&cfg).unwrap();
        let mut buf = Vec::new();
        write_rows(&mut buf, &e.rows).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with(CSV_HEADER));
        assert_eq!(read_rows(&buf[..]).unwrap(), e.rows);
        let mut buf = Vec::new();
        write_segregation(&mut buf, &e.segregation).unwrap();
        assert_eq!(read_segregation(&buf[..]).unwrap(), e.segregation);
        assert!(read_rows("a,b\n1,2\n".as_bytes()).is_err());
    }
}
