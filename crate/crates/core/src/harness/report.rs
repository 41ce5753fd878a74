//! Per-`n_cross` statistics: means, confidence intervals, accuracy and speedup.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;

use serde::Serialize;

use super::{ExperimentRow, SegregationRow};
use crate::error::{Error, Result};
use crate::exact::Method;
use crate::scenario::segregation_penalty;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SummaryRow {
    pub n_cross: usize,
    pub iterations: usize,
    pub mean_exact: f64,
    pub ci95_exact: f64,
    pub mean_heur: f64,
    pub ci95_heur: f64,
    pub mean_disco: Option<f64>,
    pub ci95_disco: Option<f64>,
    pub accuracy_pct: f64,
    pub increase_pct: f64,
    pub ci95_increase: f64,
    /// Summed solver CPU time in milliseconds.
    pub t_exact_ms: f64,
    pub t_heur_ms: f64,
    pub mean_t_exact_us: f64,
    pub mean_t_heur_us: f64,
    pub speedup: f64,
    pub disco_ratio: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SegregationSummary {
    pub n_cross: usize,
    pub penalty_exact: f64,
    pub ci95_exact: f64,
    pub penalty_heur: f64,
    pub ci95_heur: f64,
    pub penalty_disco: f64,
    pub ci95_disco: f64,
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

/// Half-width `1.96·σ/√N` of the normal-approximation 95% interval.
pub fn ci95(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
    1.96 * var.sqrt() / (xs.len() as f64).sqrt()
}

/// Whether two bounds count as identical for the accuracy column.
pub fn same_bound(heur: f64, exact: f64) -> bool {
    (heur - exact).abs() <= 1e-9 * exact.abs().max(1.0)
}

#[derive(Default)]
struct Cell {
    exact: Option<ExperimentRow>,
    heur: Option<ExperimentRow>,
    disco: Option<ExperimentRow>,
}

pub fn summarize(rows: &[ExperimentRow]) -> Result<Vec<SummaryRow>> {
    if rows.is_empty() {
        return Err(Error::Argument("no experiment rows".into()));
    }
    let mut cells: BTreeMap<usize, BTreeMap<usize, Cell>> = BTreeMap::new();
    for r in rows {
        let cell = cells.entry(r.n_cross).or_default().entry(r.iteration).or_default();
        let slot = match r.method {
            Method::Exact => &mut cell.exact,
            Method::Heuristic => &mut cell.heur,
            Method::Disco => &mut cell.disco,
        };
        if slot.replace(*r).is_some() {
            return Err(Error::Argument(format!(
                "duplicate row for iteration {} n_cross {} method {}",
                r.iteration, r.n_cross, r.method
            )));
        }
    }
    cells
        .into_iter()
        .map(|(n_cross, by_iter)| {
            let mut exact = Vec::new();
            let mut heur = Vec::new();
            let mut disco = Vec::new();
            let (mut t_exact, mut t_heur) = (Vec::new(), Vec::new());
            let mut increases = Vec::new();
            let mut identical = 0usize;
            for (iteration, cell) in &by_iter {
                let (Some(e), Some(h)) = (cell.exact, cell.heur) else {
                    return Err(Error::Argument(format!(
                        "iteration {iteration} n_cross {n_cross} lacks an exact or heuristic row"
                    )));
                };
                exact.push(e.backlog);
                heur.push(h.backlog);
                t_exact.push(e.cpu_time_us);
                t_heur.push(h.cpu_time_us);
                if same_bound(h.backlog, e.backlog) {
                    identical += 1;
                } else {
                    increases.push((h.backlog - e.backlog) / e.backlog * 100.0);
                }
                if let Some(d) = cell.disco {
                    disco.push(d.backlog);
                }
            }
            let n = exact.len();
            let has_disco = disco.len() == n;
            let t_exact_ms = t_exact.iter().sum::<f64>() / 1e3;
            let t_heur_ms = t_heur.iter().sum::<f64>() / 1e3;
            let mean_exact = mean(&exact);
            Ok(SummaryRow {
                n_cross,
                iterations: n,
                mean_exact,
                ci95_exact: ci95(&exact),
                mean_heur: mean(&heur),
                ci95_heur: ci95(&heur),
                mean_disco: has_disco.then(|| mean(&disco)),
                ci95_disco: has_disco.then(|| ci95(&disco)),
                accuracy_pct: identical as f64 / n as f64 * 100.0,
                increase_pct: mean(&increases),
                ci95_increase: ci95(&increases),
                t_exact_ms,
                t_heur_ms,
                mean_t_exact_us: mean(&t_exact),
                mean_t_heur_us: mean(&t_heur),
                speedup: if t_heur_ms > 0.0 { t_exact_ms / t_heur_ms } else { f64::INFINITY },
                disco_ratio: has_disco.then(|| mean(&disco) / mean_exact),
            })
        })
        .collect()
}

pub fn summarize_segregation(rows: &[SegregationRow]) -> Result<Vec<SegregationSummary>> {
    if rows.is_empty() {
        return Err(Error::Argument("no segregation rows".into()));
    }
    let mut by_n: BTreeMap<usize, Vec<&SegregationRow>> = BTreeMap::new();
    for r in rows {
        by_n.entry(r.n_cross).or_default().push(r);
    }
    by_n.into_iter()
        .map(|(n_cross, rs)| {
            let series = |f: fn(&SegregationRow) -> f64| {
                rs.iter().map(|r| segregation_penalty(&[f(r)], r.q_agg)).collect::<Result<Vec<f64>>>()
            };
            let exact = series(|r| r.sum_exact)?;
            let heur = series(|r| r.sum_heuristic)?;
            let disco = series(|r| r.sum_disco)?;
            Ok(SegregationSummary {
                n_cross,
                penalty_exact: mean(&exact),
                ci95_exact: ci95(&exact),
                penalty_heur: mean(&heur),
                ci95_heur: ci95(&heur),
                penalty_disco: mean(&disco),
                ci95_disco: ci95(&disco),
            })
        })
        .collect()
}

fn opt(x: Option<f64>, width: usize, prec: usize) -> String {
    match x {
        Some(v) => format!("{v:>width$.prec$}"),
        None => format!("{:>width$}", "-"),
    }
}

/// Aligned text table, one line per `n_cross`.
pub fn format_summary(rows: &[SummaryRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:>3} {:>5} {:>9} {:>7} {:>9} {:>7} {:>9} {:>7} {:>7} {:>8} {:>10} {:>10} {:>8} {:>6}",
        "n",
        "N",
        "mu_ex",
        "ci",
        "mu_heur",
        "ci",
        "acc[%]",
        "inc[%]",
        "ci",
        "mu_disco",
        "t_ex[ms]",
        "t_heur[ms]",
        "speedup",
        "disco"
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{:>3} {:>5} {:>9.3} {:>7.3} {:>9.3} {:>7.3} {:>9.1} {:>7.2} {:>7.2} {:>8} {:>10.2} {:>10.2} {:>8.2} {}",
            r.n_cross,
            r.iterations,
            r.mean_exact,
            r.ci95_exact,
            r.mean_heur,
            r.ci95_heur,
            r.accuracy_pct,
            r.increase_pct,
            r.ci95_increase,
            opt(r.mean_disco, 8, 2),
            r.t_exact_ms,
            r.t_heur_ms,
            r.speedup,
            opt(r.disco_ratio, 6, 2),
        );
    }
    s
}

pub fn format_segregation(rows: &[SegregationSummary]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:>3} {:>12} {:>8} {:>12} {:>8} {:>12} {:>8}",
        "n", "pen_ex[%]", "ci", "pen_heur[%]", "ci", "pen_disco[%]", "ci"
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{:>3} {:>12.2} {:>8.2} {:>12.2} {:>8.2} {:>12.2} {:>8.2}",
            r.n_cross, r.penalty_exact, r.ci95_exact, r.penalty_heur, r.ci95_heur, r.penalty_disco, r.ci95_disco
        );
    }
    s
}

pub fn write_csv<W: Write, T: Serialize>(w: W, rows: &[T]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for r in rows {
        wtr.serialize(r).map_err(|e| Error::Argument(format!("csv: {e}")))?;
    }
    wtr.flush().map_err(|e| Error::Argument(format!("csv: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(iteration: usize, method: Method, backlog: f64) -> ExperimentRow {
        ExperimentRow { iteration, n_cross: 3, foi_segments: 2, method, theta: 0.0, backlog, cpu_time_us: 10.0 }
    }

    #[test]
    fn identical_methods() {
        let rows: Vec<_> = (0..4)
            .flat_map(|i| [row(i, Method::Exact, 5.0 + i as f64), row(i, Method::Heuristic, 5.0 + i as f64)])
            .collect();
        let s = summarize(&rows).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].accuracy_pct, 100.0);
        assert_eq!(s[0].increase_pct, 0.0);
        assert_eq!(s[0].mean_disco, None);
    }

    #[test]
    fn half_increased() {
        let rows: Vec<_> = (0..10)
            .flat_map(|i| {
                [row(i, Method::Exact, 10.0), row(i, Method::Heuristic, if i % 2 == 0 { 11.0 } else { 10.0 })]
            })
            .collect();
        let s = summarize(&rows).unwrap()[0];
        assert_eq!(s.accuracy_pct, 50.0);
        assert!((s.increase_pct - 10.0).abs() < 1e-12);
        assert_eq!(s.ci95_exact, 0.0);
        assert!((s.speedup - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ci_formula() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let sd = (5.0f64 / 3.0).sqrt();
        assert!((ci95(&xs) - 1.96 * sd / 2.0).abs() < 1e-12);
        assert_eq!(ci95(&[3.0]), 0.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(summarize(&[]).is_err());
        assert!(summarize(&[row(0, Method::Exact, 1.0)]).is_err());
        assert!(summarize(&[row(0, Method::Exact, 1.0), row(0, Method::Exact, 1.0)]).is_err());
    }

    #[test]
    fn segregation_means() {
        let rows = [
            SegregationRow { iteration: 0, n_cross: 2, q_agg: 4.0, sum_exact: 6.0, sum_heuristic: 6.0, sum_disco: 8.0 },
            SegregationRow { iteration: 1, n_cross: 2, q_agg: 4.0, sum_exact: 4.0, sum_heuristic: 4.0, sum_disco: 8.0 },
        ];
        let s = summarize_segregation(&rows).unwrap()[0];
        assert_eq!(s.penalty_exact, 25.0);
        assert_eq!(s.penalty_disco, 100.0);
    }
}
