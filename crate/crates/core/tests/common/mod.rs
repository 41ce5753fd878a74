//! Strategies and property checks shared by the property and acceptance suites.
#![allow(dead_code)]

use fifo_backlog::{
    backlog_bound, build_time_sets, heuristic_theta_opt, lower_nondecreasing_closure, max_gap, normalize_concave,
    normalize_convex, residual_curve, vertical_deviation, vt_eval, ConcaveCurve, ConvexCurve, Curve, RateLatency,
    ResidualInput, TokenBucket,
};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

pub type Check = Result<(), TestCaseError>;

/// Integration tests have no `lib.rs` next to them, so failures are not persisted.
pub fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}

pub fn bucket() -> impl Strategy<Value = TokenBucket> {
    (0.1f64..20.0, 0.0f64..5.0).prop_map(|(rate, burst)| TokenBucket { rate, burst })
}

pub fn raw_concave(max: usize) -> impl Strategy<Value = Vec<TokenBucket>> {
    prop::collection::vec(bucket(), 1..=max)
}

pub fn concave(max: usize) -> impl Strategy<Value = ConcaveCurve> {
    raw_concave(max).prop_map(|raw| normalize_concave(&raw).unwrap())
}

pub fn raw_convex(max: usize) -> impl Strategy<Value = Vec<RateLatency>> {
    prop::collection::vec(
        (0.1f64..30.0, 0.0f64..3.0).prop_map(|(rate, latency)| RateLatency { rate, latency }),
        1..=max,
    )
}

/// Stable input: the service curve's top rate is the total sustained rate
/// divided by a utilization below one.
pub fn stable_input(foi_max: usize) -> impl Strategy<Value = ResidualInput> {
    (
        concave(foi_max),
        prop::collection::vec(concave(3), 1..=3),
        prop::collection::vec((0.1f64..1.0, 0.0f64..2.0), 0..=2),
        0.0f64..1.0,
        0.3f64..0.95,
    )
        .prop_map(|(foi, cross, slow, top_latency, utilization)| {
            let total = foi.sustained_rate() + cross.iter().map(ConcaveCurve::sustained_rate).sum::<f64>();
            let top = total / utilization;
            let mut raw = vec![RateLatency { rate: top, latency: top_latency }];
            raw.extend(slow.iter().map(|&(frac, latency)| RateLatency { rate: top * frac, latency }));
            ResidualInput::from_flows(foi, &cross, normalize_convex(&raw).unwrap()).unwrap()
        })
}

pub fn grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..=n).map(move |k| lo + (hi - lo) * k as f64 / n as f64)
}

pub fn normal_form_idempotent(raw: &[TokenBucket], raw_b: &[RateLatency]) -> Check {
    let f = normalize_concave(raw).unwrap();
    prop_assert_eq!(normalize_concave(f.segments()).unwrap(), f);
    let g = normalize_convex(raw_b).unwrap();
    prop_assert_eq!(normalize_convex(g.segments()).unwrap(), g);
    Ok(())
}

/// Normalized curves equal the min (concave) or max (convex) of their raw
/// segments at 100 time points.
pub fn normal_form_pointwise(raw: &[TokenBucket], raw_b: &[RateLatency]) -> Check {
    let f = normalize_concave(raw).unwrap();
    let g = normalize_convex(raw_b).unwrap();
    prop_assert_eq!(f.at(0.0), 0.0);
    for k in 1..=100 {
        let t = k as f64 * 0.05;
        let min = raw.iter().map(|s| s.line(t)).fold(f64::INFINITY, f64::min);
        let max = raw_b.iter().map(|s| s.value(t)).fold(0.0, f64::max);
        prop_assert!((f.at(t) - min).abs() <= 1e-9, "t {}: {} vs {}", t, f.at(t), min);
        prop_assert!((g.at(t) - max).abs() <= 1e-9, "t {}: {} vs {}", t, g.at(t), max);
    }
    Ok(())
}

pub fn closure_keeps_deviation(input: &ResidualInput, f: &ConcaveCurve, frac: f64) -> Check {
    let theta = frac * (input.h_lower() + 1.0);
    let g = residual_curve(input, theta).unwrap();
    let direct = max_gap(&f.to_piecewise(), &g);
    let closed = max_gap(&f.to_piecewise(), &lower_nondecreasing_closure(&g).unwrap());
    prop_assert!(direct == closed || (direct - closed).abs() <= 1e-9, "direct {} closed {}", direct, closed);
    Ok(())
}

fn last_breakpoint(f: &ConcaveCurve, g: &ConvexCurve) -> f64 {
    f.breakpoints().iter().chain(g.breakpoints()).copied().fold(g.latency(), f64::max)
}

/// The breakpoint scan agrees with a 1e-3 grid over `[0, 2·t_last]`.
pub fn breakpoint_attainment(f: &ConcaveCurve, raw_g: &[RateLatency], margin: f64) -> Check {
    let g = normalize_convex(raw_g).unwrap();
    prop_assume!(f.sustained_rate() + margin <= g.top_rate());
    let v = vertical_deviation(f, &g).unwrap();
    let horizon = 2.0 * last_breakpoint(f, &g).max(0.5);
    let n = (horizon / 1e-3).ceil() as usize;
    let dense = grid(0.0, horizon, n).map(|t| f.at(t) - g.at(t)).fold(f64::NEG_INFINITY, f64::max);
    let max_slope = f.segments()[0].rate + g.top_rate();
    prop_assert!(v >= dense - 1e-9, "scan {} below grid {}", v, dense);
    prop_assert!(v - dense <= 1e-2 * max_slope, "scan {} grid {}", v, dense);
    Ok(())
}

/// Shrinking `θ` below `h(α₂, β)` never improves the bound.
pub fn monotone_below_h(input: &ResidualInput, fracs: &[f64]) -> Check {
    let h = input.h_lower();
    let at_h = backlog_bound(input, h).unwrap();
    for &frac in fracs {
        prop_assert!(backlog_bound(input, frac * h).unwrap() >= at_h - 1e-9);
    }
    Ok(())
}

/// At `h` the `v_t` envelope is at least `α₁`; at `t_max` they coincide.
pub fn envelope_endpoints(input: &ResidualInput) -> Check {
    let sets = build_time_sets(input).unwrap();
    let h = sets.h_lower;
    let envelope =
        |theta: f64| sets.t.iter().map(|&t| vt_eval(input, t, theta).unwrap()).fold(f64::NEG_INFINITY, f64::max);
    prop_assert!(input.foi.right_limit(h) <= envelope(h) + 1e-9);
    let top = sets.t_max.max(h);
    prop_assert!((input.foi.right_limit(top) - envelope(top)).abs() <= 1e-9);
    Ok(())
}

/// Every unclamped `θ_t` solves `α₁(θ) = α₁(t + θ) − β(t + θ) + α₂(t)`.
pub fn theta_t_balance(input: &ResidualInput) -> Check {
    let sets = build_time_sets(input).unwrap();
    for s in sets.shifts.iter().filter(|s| !s.clamped) {
        let theta = s.theta;
        let lhs = input.foi.right_limit(theta);
        let rhs =
            input.foi.right_limit(s.t_rel + theta) - input.beta.at(s.t_rel + theta) + input.cross.right_limit(s.t_rel);
        prop_assert!((lhs - rhs).abs() <= 1e-9, "t {} theta {}: {} vs {}", s.t_rel, theta, lhs, rhs);
    }
    Ok(())
}

/// Per-segment `θ` values never increase and at most one matches its interval.
pub fn heuristic_trace_shape(input: &ResidualInput) -> Check {
    let (_, trace) = heuristic_theta_opt(input).unwrap();
    prop_assert!(trace.theta_vec.windows(2).all(|w| w[0] >= w[1]), "{:?}", trace.theta_vec);
    prop_assert!(trace.zero_count() <= 1, "{:?}", trace);
    Ok(())
}
