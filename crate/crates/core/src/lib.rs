//! Per-flow backlog bounds at an aggregate FIFO server.
//!
//! A flow of interest (foi) shares a FIFO server with a set of cross flows.
//! The server guarantees a piecewise-linear convex service curve to the
//! aggregate, every flow is constrained by a piecewise-linear concave arrival
//! curve. Per-flow backlog bounds come from the FIFO residual service curve
//! family `β¹_θ(t) = [β(t) − α₂(t − θ)]⁺ ∧ δ_θ(t)`, and this crate finds the
//! `θ` that minimizes the resulting bound:
//!
//! * [`exact`] locates the first intersection of the `v_t` distance curves
//!   with the foi's arrival curve, which is the optimum.
//! * [`heuristic`] decomposes the foi into token buckets, solves each one in
//!   closed form and only falls back to intersections at the foi breakpoints.
//! * [`scenario`] generates random benchmark scenarios and the `θ_disco`
//!   baseline, [`harness`] runs the sweeps and summarizes them.
//!
//! All arithmetic is `f64`, comparisons use the absolute tolerance [`EPS`],
//! and `f64::INFINITY` marks unbounded deviations.

pub mod curve;
pub mod error;
pub mod exact;
pub mod harness;
pub mod heuristic;
pub mod io;
pub mod residual;
pub mod scenario;
pub mod timing;

pub use curve::{
    a_star, add_concave, horizontal_deviation, lower_nondecreasing_closure, max_gap, normalize_concave,
    normalize_convex, pseudo_inverse, shift_by_impulse, vertical_deviation, ConcaveCurve, ConvexCurve, Curve, Piece,
    PiecewiseCurve, RateLatency, TokenBucket,
};
pub use error::{Error, Result};
pub use exact::{exact_theta_opt, intersect_vt_with_alpha1, Candidate, CandidateSource, Method, SolveResult};
pub use heuristic::{adjust_theta, heuristic_theta_opt, segment_theta, AdjustedTheta, HeuristicTrace};
pub use residual::{
    backlog_bound, build_time_sets, residual_curve, theta_for_relative_time, vt_curve, vt_eval, RelativeShift,
    ResidualInput, TimeSets, VtCurve,
};
pub use scenario::{
    aggregate_backlog, disco_theta_opt, generate_scenario, per_flow_bounds, segregation_penalty, solve, theta_disco,
    Scenario, ScenarioConfig,
};

/// Absolute tolerance for every equality and ordering test on times and data.
pub const EPS: f64 = 1e-9;
