//! Brute-force grid search over `θ`, evaluated pointwise from the segment
//! lists without going through the piecewise curve algebra.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::residual::{build_time_sets, ResidualInput};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleConfig {
    pub theta_step: f64,
    /// Dense `t` samples reach `horizon_factor · t_max`.
    pub horizon_factor: f64,
    pub t_samples: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { theta_step: 1e-3, horizon_factor: 2.0, t_samples: 512 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OraclePoint {
    pub theta: f64,
    pub backlog: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    pub best_theta: f64,
    pub best_backlog: f64,
    pub h_lower: f64,
    pub t_max: f64,
    pub profile: Vec<OraclePoint>,
}

struct Pointwise<'a> {
    foi: &'a [crate::curve::TokenBucket],
    cross: &'a [crate::curve::TokenBucket],
    beta: &'a [crate::curve::RateLatency],
}

impl Pointwise<'_> {
    /// `min_i b_i + r_i·t`: the foi for `t > 0` and its right limit at 0.
    fn foi_line(&self, t: f64) -> f64 {
        self.foi.iter().map(|s| s.burst + s.rate * t).fold(f64::INFINITY, f64::min)
    }

    fn cross_line(&self, u: f64) -> f64 {
        self.cross.iter().map(|s| s.burst + s.rate * u).fold(f64::INFINITY, f64::min)
    }

    fn beta(&self, t: f64) -> f64 {
        self.beta.iter().map(|s| s.rate * (t - s.latency).max(0.0)).fold(0.0, f64::max)
    }

    /// `β(t) − α₂(t − θ)` just after `t`, valid for `t >= θ`.
    fn gap(&self, t: f64, theta: f64) -> f64 {
        self.beta(t) - self.cross_line(t - theta)
    }

    /// Largest of `α₁ − β¹_θ` at `t`, just before and just after `t`.
    fn distance(&self, t: f64, theta: f64) -> f64 {
        let foi = self.foi_line(t);
        let residual = |after: bool| if t > theta || (after && t >= theta) { self.gap(t, theta).max(0.0) } else { 0.0 };
        let at = if t > 0.0 { foi } else { 0.0 } - residual(false);
        let right = foi - residual(true);
        let left = if t > 0.0 { foi - residual(false) } else { at };
        at.max(right).max(left)
    }
}

/// `v(α₁, β¹_θ)` from dense samples, every breakpoint and every zero of
/// `β(t) − α₂(t − θ)` found by bisection between samples.
pub fn oracle_backlog(input: &ResidualInput, theta: f64, horizon: f64, samples: usize) -> f64 {
    let pw = Pointwise { foi: input.foi.segments(), cross: input.cross.segments(), beta: input.beta.segments() };
    let mut points: Vec<f64> = (0..=samples).map(|k| horizon * k as f64 / samples as f64).collect();
    points.extend(input.foi.breakpoints());
    points.extend(input.beta.breakpoint_set());
    points.push(theta);
    points.extend(input.cross.breakpoints().iter().map(|a| theta + a));
    points.sort_by(|a, b| a.partial_cmp(b).expect("finite points"));
    points.dedup();

    let mut roots = Vec::new();
    for w in points.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if lo < theta {
            continue;
        }
        let (mut a, mut b) = (lo, hi);
        let (ga, gb) = (pw.gap(a, theta), pw.gap(b, theta));
        if (ga < 0.0) == (gb < 0.0) {
            continue;
        }
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if (pw.gap(m, theta) < 0.0) == (ga < 0.0) {
                a = m;
            } else {
                b = m;
            }
        }
        roots.push(a);
        roots.push(b);
    }
    points.iter().chain(&roots).map(|&t| pw.distance(t, theta)).fold(f64::NEG_INFINITY, f64::max)
}

/// Grid search of `θ ∈ [h, t_max]`.
pub fn run_oracle(input: &ResidualInput, cfg: &OracleConfig) -> Result<OracleResult> {
    if !(cfg.theta_step > 0.0 && cfg.horizon_factor >= 1.0 && cfg.t_samples > 0) {
        return Err(Error::Argument("oracle needs theta_step > 0, horizon_factor >= 1 and t_samples > 0".into()));
    }
    let sets = build_time_sets(input)?;
    let h = sets.h_lower;
    let t_max = sets.t_max.max(h);
    let horizon = cfg.horizon_factor * t_max.max(f64::MIN_POSITIVE);
    let steps = ((t_max - h) / cfg.theta_step + 1e-9).floor() as usize;
    let profile: Vec<OraclePoint> = (0..=steps)
        .map(|k| {
            let theta = h + k as f64 * cfg.theta_step;
            OraclePoint { theta, backlog: oracle_backlog(input, theta, horizon, cfg.t_samples) }
        })
        .collect();
    let best = profile
        .iter()
        .copied()
        .reduce(|best, p| if p.backlog < best.backlog { p } else { best })
        .expect("at least one grid point");
    Ok(OracleResult { best_theta: best.theta, best_backlog: best.backlog, h_lower: h, t_max, profile })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{normalize_concave, ConcaveCurve, ConvexCurve, TokenBucket};

    fn e(foi: ConcaveCurve) -> ResidualInput {
        ResidualInput::new(
            foi,
            ConcaveCurve::token_bucket(1.0, 1.0).unwrap(),
            ConvexCurve::rate_latency(3.0, 0.0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn oracle_e1_e2() {
        let r = run_oracle(&e(ConcaveCurve::token_bucket(1.0, 1.0).unwrap()), &OracleConfig::default()).unwrap();
        assert!((r.best_backlog - 4.0 / 3.0).abs() < 2e-3);
        assert!((r.best_theta - 1.0 / 3.0).abs() < 2e-3);

        let foi =
            normalize_concave(&[TokenBucket { rate: 4.0, burst: 1.0 }, TokenBucket { rate: 1.0, burst: 4.0 }]).unwrap();
        let r = run_oracle(&e(foi), &OracleConfig::default()).unwrap();
        assert!((r.best_backlog - 3.4).abs() < 5e-3);
        assert!((r.best_theta - 0.6).abs() < 2e-3);
    }

    #[test]
    fn oracle_pointwise_matches_formula() {
        let foi =
            normalize_concave(&[TokenBucket { rate: 4.0, burst: 1.0 }, TokenBucket { rate: 1.0, burst: 4.0 }]).unwrap();
        let input = e(foi);
        assert!((oracle_backlog(&input, 0.6, 2.0, 64) - 3.4).abs() < 1e-12);
        assert!((oracle_backlog(&input, 4.0 / 3.0, 3.0, 64) - 16.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn coarse_step_gives_single_sample() {
        let cfg = OracleConfig { theta_step: 10.0, ..OracleConfig::default() };
        let r = run_oracle(&e(ConcaveCurve::token_bucket(1.0, 1.0).unwrap()), &cfg).unwrap();
        assert_eq!(r.profile.len(), 1);
        assert_eq!(r.best_theta, r.h_lower);
        assert!(r.best_backlog.is_finite());
    }
}
