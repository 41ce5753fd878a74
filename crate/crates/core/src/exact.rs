//! Exact backlog-minimizing `θ`: the first intersection of `max_t v_t` with
//! the foi's arrival curve.

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::curve::{Curve, PiecewiseCurve};
use crate::error::{Error, Result};
use crate::residual::{backlog_bound, build_time_sets_with, vt_curve, ResidualInput};
use crate::timing::measure;
use crate::EPS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Heuristic,
    Disco,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Exact, Method::Heuristic, Method::Disco];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Heuristic => "heuristic",
            Method::Disco => "disco",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Method::Exact),
            "heuristic" => Ok(Method::Heuristic),
            "disco" => Ok(Method::Disco),
            other => Err(Error::Argument(format!("unknown method {other:?}"))),
        }
    }
}

/// Where a candidate intersection came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CandidateSource {
    /// Breakpoint of the foi's arrival curve.
    Foi,
    /// `t + θ_t` for a cross or service breakpoint `t`; `θ_t` is reused.
    Shifted { relative: f64 },
    /// Service curve breakpoint taken as an absolute time.
    Service,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Candidate {
    /// Absolute time `t` of the `v_t` curve.
    #[serde(rename = "t")]
    pub source: f64,
    pub theta: f64,
    #[serde(flatten)]
    pub origin: CandidateSource,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveResult {
    pub method: Method,
    pub theta: f64,
    pub backlog: f64,
    pub h_lower: f64,
    pub candidates: Vec<Candidate>,
    #[serde(skip)]
    pub cpu_time: Duration,
}

/// Right-continuous copy of the foi curve, i.e. `α₁(θ⁺)` at every `θ`.
pub(crate) fn foi_right(input: &ResidualInput) -> PiecewiseCurve {
    let pieces = input.foi.to_piecewise().pieces().iter().map(|p| crate::curve::Piece { at: p.right, ..*p }).collect();
    PiecewiseCurve::new(pieces).expect("valid foi")
}

pub(crate) fn intersect_with(input: &ResidualInput, foi: &PiecewiseCurve, t: f64, h: f64) -> Option<f64> {
    if t.is_nan() || t <= h {
        return None;
    }
    let vt = vt_curve(input, t, h, t);
    // D = α₁ − v_t is increasing on [h, t) and identically 0 from t on.
    let d = PiecewiseCurve::lin_comb(1.0, foi, -1.0, &vt.curve);
    if d.right_limit(h) > EPS {
        return None;
    }
    let x = d.first_reach(0.0, h);
    Some(x.min(t))
}

/// First `θ ∈ [h(α₂, β), t)` where `v_t` meets `α₁`.
///
/// Returns `t` when `v_t` stays above `α₁` on the whole range, since `v_t`
/// drops onto `α₁` at `θ = t`, and nothing when `α₁` is already above `v_t`
/// at `h` or the range is empty.
pub fn intersect_vt_with_alpha1(input: &ResidualInput, t_abs: f64) -> Option<f64> {
    intersect_with(input, &foi_right(input), t_abs, input.h_lower())
}

/// Solves without timing; shared with the heuristic and the test oracles.
pub(crate) fn solve_exact(input: &ResidualInput) -> Result<SolveResult> {
    let h = input.h_lower();
    if !h.is_finite() {
        return Err(Error::Instability {
            arrival: input.foi.sustained_rate() + input.cross.sustained_rate(),
            service: input.beta.top_rate(),
        });
    }
    let sets = build_time_sets_with(input, h)?;
    let foi = foi_right(input);
    let mut candidates: Vec<Candidate> = sets
        .shifts
        .iter()
        .map(|s| Candidate {
            source: s.t_abs(),
            theta: s.theta,
            origin: CandidateSource::Shifted { relative: s.t_rel },
        })
        .collect();
    for &t in &sets.a1 {
        if let Some(theta) = intersect_with(input, &foi, t, h) {
            candidates.push(Candidate { source: t, theta, origin: CandidateSource::Foi });
        }
    }
    for &t in &sets.b {
        if let Some(theta) = intersect_with(input, &foi, t, h) {
            candidates.push(Candidate { source: t, theta, origin: CandidateSource::Service });
        }
    }
    let theta = candidates.iter().map(|c| c.theta).fold(h, f64::max);
    let backlog = backlog_bound(input, theta)?;
    Ok(SolveResult { method: Method::Exact, theta, backlog, h_lower: h, candidates, cpu_time: Duration::ZERO })
}

/// Exact method: `φ = max(candidates ∪ {h})`, backlog `v(α₁, β¹_φ)`.
pub fn exact_theta_opt(input: &ResidualInput) -> Result<SolveResult> {
    let (result, spent) = measure(|| solve_exact(input));
    result.map(|r| SolveResult { cpu_time: spent, ..r })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{normalize_concave, ConcaveCurve, ConvexCurve, TokenBucket};
    use crate::residual::theta_for_relative_time;

    fn e1() -> ResidualInput {
        ResidualInput::new(
            ConcaveCurve::token_bucket(1.0, 1.0).unwrap(),
            ConcaveCurve::token_bucket(1.0, 1.0).unwrap(),
            ConvexCurve::rate_latency(3.0, 0.0).unwrap(),
        )
        .unwrap()
    }

    fn e2() -> ResidualInput {
        let foi =
            normalize_concave(&[TokenBucket { rate: 4.0, burst: 1.0 }, TokenBucket { rate: 1.0, burst: 4.0 }]).unwrap();
        ResidualInput::new(
            foi,
            ConcaveCurve::token_bucket(1.0, 1.0).unwrap(),
            ConvexCurve::rate_latency(3.0, 0.0).unwrap(),
        )
        .unwrap()
    }

    fn grid_min(input: &ResidualInput, hi: f64) -> f64 {
        let h = input.h_lower();
        let n = ((hi - h) / 1e-3).ceil() as usize;
        (0..=n).map(|k| backlog_bound(input, h + k as f64 * 1e-3).unwrap()).fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn intersections_e2() {
        let input = e2();
        assert!((intersect_vt_with_alpha1(&input, 1.0).unwrap() - 0.6).abs() < 1e-12);
        // t_abs = θ_0 = h here, an empty range.
        let theta0 = theta_for_relative_time(&input, 0.0).unwrap();
        assert_eq!(intersect_vt_with_alpha1(&input, theta0), None);
        assert_eq!(intersect_vt_with_alpha1(&input, 0.0), None);
        assert_eq!(intersect_vt_with_alpha1(&input, 0.2), None);
    }

    #[test]
    fn shifted_points_reproduce_theta_t() {
        let cross =
            normalize_concave(&[TokenBucket { rate: 2.0, burst: 0.5 }, TokenBucket { rate: 1.0, burst: 1.0 }]).unwrap();
        let input = ResidualInput::new(e2().foi, cross, ConvexCurve::rate_latency(3.0, 0.2).unwrap()).unwrap();
        let h = input.h_lower();
        let sets = crate::residual::build_time_sets(&input).unwrap();
        let mut checked = 0;
        for s in sets.shifts.iter().filter(|s| !s.clamped && s.t_abs() > h + EPS) {
            let x = intersect_vt_with_alpha1(&input, s.t_abs()).unwrap();
            assert!((x - s.theta).abs() < 1e-9, "{s:?} vs {x}");
            checked += 1;
        }
        assert!(checked >= 2);
    }

    #[test]
    fn exact_e1() {
        let r = exact_theta_opt(&e1()).unwrap();
        assert!((r.theta - 1.0 / 3.0).abs() < 1e-9);
        assert!((r.backlog - 4.0 / 3.0).abs() < 1e-9);
        assert!(r.backlog <= grid_min(&e1(), 2.0) + 1e-9);
    }

    #[test]
    fn exact_e2() {
        let r = exact_theta_opt(&e2()).unwrap();
        assert!((r.theta - 0.6).abs() < 1e-9);
        assert!((r.backlog - 3.4).abs() < 1e-9);
        assert!(r.backlog <= grid_min(&e2(), 2.0) + 1e-9);
        assert!(r.candidates.iter().any(|c| (c.theta - 1.0 / 3.0).abs() < 1e-9));
    }

    #[test]
    fn exact_without_cross_traffic() {
        let input = ResidualInput::new(
            normalize_concave(&[TokenBucket { rate: 4.0, burst: 1.0 }, TokenBucket { rate: 1.0, burst: 4.0 }]).unwrap(),
            ConcaveCurve::zero(),
            ConvexCurve::rate_latency(3.0, 0.5).unwrap(),
        )
        .unwrap();
        // Without cross traffic the bound is flat on [0, φ]; φ is its right end.
        let r = exact_theta_opt(&input).unwrap();
        assert!((r.theta - 0.625).abs() < 1e-12);
        assert!((backlog_bound(&input, 0.0).unwrap() - r.backlog).abs() < 1e-9);
        let direct = crate::curve::vertical_deviation(&input.foi, &input.beta).unwrap();
        assert!((r.backlog - direct).abs() < 1e-9);
    }

    #[test]
    fn method_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
        }
        assert!("fast".parse::<Method>().is_err());
    }
}
