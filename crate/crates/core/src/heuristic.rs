//! Decomposition heuristic: one closed-form `θ` per foi token bucket, an
//! interval check, and a fallback restricted to the foi's breakpoints.

use std::time::Duration;

use serde::Serialize;

use crate::curve::{horizontal_deviation_tilted, ConcaveCurve, ConvexCurve, TokenBucket};
use crate::error::{Error, Result};
use crate::exact::{intersect_with, Candidate, CandidateSource, Method, SolveResult};
use crate::residual::{backlog_bound, ResidualInput};
use crate::timing::measure;
use crate::EPS;

/// Optimal `θ` if the foi were the single token bucket `segment`:
/// `h(α₂ + γ_{r,0}, β)`. Infinite when that sum outruns `β`.
pub fn segment_theta(segment: TokenBucket, cross: &ConcaveCurve, beta: &ConvexCurve) -> f64 {
    horizontal_deviation_tilted(cross, segment.rate, beta)
}

/// A `θ` moved into its segment interval `[lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdjustedTheta {
    pub value: f64,
    /// Set when `value` is the open upper end `hi`, standing for `hi − ε`.
    pub open: bool,
}

/// Moves `theta` into `[lo, hi)`; values past `hi` (including `+∞`) map to
/// the open boundary `hi`.
pub fn adjust_theta(theta: f64, lo: f64, hi: f64) -> AdjustedTheta {
    if theta < lo {
        AdjustedTheta { value: lo, open: false }
    } else if theta >= hi {
        AdjustedTheta { value: hi, open: true }
    } else {
        AdjustedTheta { value: theta, open: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeuristicTrace {
    pub theta_vec: Vec<f64>,
    pub theta_adj: Vec<AdjustedTheta>,
    pub diff: Vec<f64>,
    pub matched_index: Option<usize>,
    pub fallback_used: bool,
}

impl HeuristicTrace {
    pub fn zero_count(&self) -> usize {
        self.theta_adj.iter().zip(&self.diff).filter(|(a, d)| !a.open && d.abs() <= EPS).count()
    }
}

pub(crate) fn solve_heuristic(input: &ResidualInput) -> Result<(SolveResult, HeuristicTrace)> {
    let h = input.h_lower();
    if !h.is_finite() {
        return Err(Error::Instability {
            arrival: input.foi.sustained_rate() + input.cross.sustained_rate(),
            service: input.beta.top_rate(),
        });
    }
    let segments = input.foi.segments();
    let n = segments.len();
    let mut theta_vec = Vec::with_capacity(n);
    let mut theta_adj = Vec::with_capacity(n);
    let mut diff = Vec::with_capacity(n);
    for (i, seg) in segments.iter().enumerate() {
        let theta = segment_theta(*seg, &input.cross, &input.beta);
        let lo = input.foi.segment_start(i);
        let hi = input.foi.segment_end(i);
        let adjusted = adjust_theta(theta, lo, hi);
        theta_vec.push(theta);
        theta_adj.push(adjusted);
        diff.push(theta - adjusted.value);
    }
    let matched_index = (0..n).find(|&i| !theta_adj[i].open && diff[i].abs() <= EPS);

    let mut candidates = Vec::new();
    let theta = match matched_index {
        Some(i) => theta_vec[i],
        None => {
            let foi = crate::exact::foi_right(input);
            for t in input.foi.breakpoint_set() {
                if let Some(theta) = intersect_with(input, &foi, t, h) {
                    candidates.push(Candidate { source: t, theta, origin: CandidateSource::Foi });
                }
            }
            candidates.iter().map(|c| c.theta).fold(h, f64::max)
        }
    };
    let backlog = backlog_bound(input, theta)?;
    let trace = HeuristicTrace { theta_vec, theta_adj, diff, matched_index, fallback_used: matched_index.is_none() };
    let result =
        SolveResult { method: Method::Heuristic, theta, backlog, h_lower: h, candidates, cpu_time: Duration::ZERO };
    Ok((result, trace))
}

/// Runs the three steps: per-segment `θ`, the zero-difference test, and the
/// fallback over `A₁`. The result is never below the exact bound.
pub fn heuristic_theta_opt(input: &ResidualInput) -> Result<(SolveResult, HeuristicTrace)> {
    let (result, spent) = measure(|| solve_heuristic(input));
    result.map(|(r, trace)| (SolveResult { cpu_time: spent, ..r }, trace))
}
