//! FIFO residual service curves `β¹_θ`, the `v_t` distance curves and the
//! breakpoint time sets they induce.

use crate::curve::{
    add_concave, horizontal_deviation, shift_by_impulse, vertical_deviation, ConcaveCurve, ConvexCurve, Curve, Piece,
    PiecewiseCurve,
};
use crate::error::{Error, Result};
use crate::EPS;

/// Flow of interest, aggregated cross traffic and the aggregate service curve.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualInput {
    pub foi: ConcaveCurve,
    pub cross: ConcaveCurve,
    pub beta: ConvexCurve,
}

impl ResidualInput {
    /// Fails with [`Error::Instability`] unless the long-term rates of foi and
    /// cross traffic together stay strictly below the top service rate.
    pub fn new(foi: ConcaveCurve, cross: ConcaveCurve, beta: ConvexCurve) -> Result<Self> {
        let arrival = foi.sustained_rate() + cross.sustained_rate();
        let service = beta.top_rate();
        if arrival >= service - EPS {
            return Err(Error::Instability { arrival, service });
        }
        Ok(ResidualInput { foi, cross, beta })
    }

    /// Aggregates the cross flows with [`add_concave`] before validating.
    pub fn from_flows(foi: ConcaveCurve, cross: &[ConcaveCurve], beta: ConvexCurve) -> Result<Self> {
        let aggregate = cross.iter().fold(ConcaveCurve::zero(), |acc, c| add_concave(&acc, c));
        ResidualInput::new(foi, aggregate, beta)
    }

    /// `h(α₂, β)`, the lower end of the useful `θ` range.
    pub fn h_lower(&self) -> f64 {
        horizontal_deviation(&self.cross, &self.beta)
    }

    fn unstable(&self) -> Error {
        Error::Instability {
            arrival: self.foi.sustained_rate() + self.cross.sustained_rate(),
            service: self.beta.top_rate(),
        }
    }
}

/// `β¹_θ(t) = [β(t) − α₂(t − θ)]⁺ ∧ δ_θ(t)`.
///
/// Zero on `[0, θ]`; right after `θ` the cross burst is already subtracted.
/// The result may decrease on some intervals.
pub fn residual_curve(input: &ResidualInput, theta: f64) -> Result<PiecewiseCurve> {
    if !(theta.is_finite() && theta >= 0.0) {
        return Err(Error::Argument(format!("theta {theta} must be finite and >= 0")));
    }
    let shifted = shift_by_impulse(&input.cross, theta)?;
    let diff = PiecewiseCurve::lin_comb(1.0, &input.beta.to_piecewise(), -1.0, &shifted);
    Ok(diff.positive_part().zero_until(theta))
}

/// Backlog bound `v(α₁, β¹_θ)` of the flow of interest for a given `θ`.
pub fn backlog_bound(input: &ResidualInput, theta: f64) -> Result<f64> {
    let residual = residual_curve(input, theta)?;
    let bound = vertical_deviation(&input.foi, &residual).map_err(|_| input.unstable())?;
    if bound.is_finite() {
        Ok(bound)
    } else {
        Err(input.unstable())
    }
}

/// The balance shift `θ_t` computed for one relative breakpoint `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativeShift {
    pub t_rel: f64,
    /// Root of the balance equation before clamping; may be negative.
    pub raw_theta: f64,
    /// `max(raw_theta, h(α₂, β))`.
    pub theta: f64,
    pub clamped: bool,
    /// Whether `θ_t < t_rel`; the balance equation is only derived for that case.
    pub below_t: bool,
}

impl RelativeShift {
    pub fn t_abs(&self) -> f64 {
        self.t_rel + self.theta
    }
}

/// Copy of `f` where the value at every start equals the right limit.
fn right_continuous(f: &PiecewiseCurve) -> PiecewiseCurve {
    let pieces = f.pieces().iter().map(|p| Piece { at: p.right, ..*p }).collect();
    PiecewiseCurve::new(pieces).expect("same grid")
}

pub(crate) fn balance_point(input: &ResidualInput, t: f64, h: f64) -> Result<RelativeShift> {
    // G(x) = [β(x) − α₁(x) + (α₁ ⊗ δ_t)(x)]⁺ is non-decreasing; solve G(x) = α₂(t⁺).
    let foi = input.foi.to_piecewise();
    let shifted = shift_by_impulse(&input.foi, t)?;
    let g =
        PiecewiseCurve::combine(&[(1.0, &input.beta.to_piecewise()), (-1.0, &foi), (1.0, &shifted)]).positive_part();
    let x = g.first_reach(input.cross.right_limit(t), 0.0);
    if !x.is_finite() {
        return Err(input.unstable());
    }
    let raw_theta = x - t;
    let clamped = raw_theta < h;
    let theta = raw_theta.max(h);
    Ok(RelativeShift { t_rel: t, raw_theta, theta, clamped, below_t: theta < t })
}

/// `θ_t` for a relative time `t`: the root of
/// `α₁(θ) = α₁(t + θ) − β(t + θ) + α₂(t)`, clamped to `h(α₂, β)` from below.
pub fn theta_for_relative_time(input: &ResidualInput, t: f64) -> Result<f64> {
    crate::error::check_time(t)?;
    Ok(balance_point(input, t, input.h_lower())?.theta)
}

/// Breakpoint sets used by the exact method.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSets {
    pub a1: Vec<f64>,
    pub a2: Vec<f64>,
    pub b: Vec<f64>,
    /// `A₂ ∪ B`.
    pub t_rel: Vec<f64>,
    /// `t + θ_t` for every `t` in `t_rel`, same order.
    pub t_abs: Vec<f64>,
    /// `A₁ ∪ t_abs`, sorted and deduplicated.
    pub t: Vec<f64>,
    pub t_max: f64,
    pub h_lower: f64,
    pub shifts: Vec<RelativeShift>,
}

pub(crate) fn sorted_unique(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite times"));
    v.dedup_by(|a, b| (*a - *b).abs() <= EPS);
    v
}

pub fn build_time_sets(input: &ResidualInput) -> Result<TimeSets> {
    build_time_sets_with(input, input.h_lower())
}

pub(crate) fn build_time_sets_with(input: &ResidualInput, h: f64) -> Result<TimeSets> {
    let a1 = input.foi.breakpoint_set();
    let a2 = input.cross.breakpoint_set();
    let b = input.beta.breakpoint_set();
    let t_rel = sorted_unique(a2.iter().chain(b.iter()).copied().collect());
    let shifts = t_rel.iter().map(|&t| balance_point(input, t, h)).collect::<Result<Vec<_>>>()?;
    let t_abs: Vec<f64> = shifts.iter().map(RelativeShift::t_abs).collect();
    let t = sorted_unique(a1.iter().chain(t_abs.iter()).copied().collect());
    let t_max = t.iter().copied().fold(0.0, f64::max);
    Ok(TimeSets { a1, a2, b, t_rel, t_abs, t, t_max, h_lower: h, shifts })
}

/// `v_t(θ)`: `α₁(t) − β(t) + α₂(t − θ)` for `θ < t`, `α₁(θ)` otherwise.
pub fn vt_eval(input: &ResidualInput, t_abs: f64, theta: f64) -> Result<f64> {
    crate::error::check_time(t_abs)?;
    let h = input.h_lower();
    if theta.is_nan() || theta < h - EPS {
        return Err(Error::Domain(theta));
    }
    Ok(vt_value(input, t_abs, theta))
}

pub(crate) fn vt_value(input: &ResidualInput, t: f64, theta: f64) -> f64 {
    if theta < t {
        input.foi.right_limit(t) - input.beta.at(t) + input.cross.right_limit(t - theta)
    } else {
        input.foi.right_limit(theta)
    }
}

/// A `v_t` curve as a function of `θ`, meaningful on `[lower, upper]`.
#[derive(Debug, Clone, PartialEq)]
pub struct VtCurve {
    pub t: f64,
    pub lower: f64,
    pub upper: f64,
    /// Defined for all `θ >= 0`; only `[lower, upper]` is meaningful.
    pub curve: PiecewiseCurve,
}

impl VtCurve {
    pub fn value(&self, theta: f64) -> f64 {
        self.curve.at(theta)
    }
}

/// Builds `v_t` over `θ >= 0` by reflecting the cross curve's grid at `t`.
pub fn vt_curve(input: &ResidualInput, t: f64, lower: f64, upper: f64) -> VtCurve {
    let foi = right_continuous(&input.foi.to_piecewise());
    let mut pieces = Vec::new();
    if t > 0.0 {
        let offset = input.foi.right_limit(t) - input.beta.at(t);
        let mut knots = vec![0.0];
        knots.extend(input.cross.breakpoints().iter().rev().filter(|&&a| a < t).map(|&a| t - a));
        for (k, &theta) in knots.iter().enumerate() {
            let next = knots.get(k + 1).copied().unwrap_or(t);
            let value = offset + input.cross.right_limit(t - theta);
            let left_next = offset + input.cross.right_limit(t - next);
            let slope = (left_next - value) / (next - theta);
            pieces.push(Piece { start: theta, at: value, right: value, slope });
        }
    }
    let tail_from = pieces.len();
    let fp = foi.pieces();
    let i = fp.partition_point(|p| p.start <= t).saturating_sub(1);
    let v = input.foi.right_limit(t);
    pieces.push(Piece { start: t, at: v, right: v, slope: fp[i].slope });
    pieces.extend(fp[i + 1..].iter().copied());
    debug_assert!(tail_from == 0 || pieces[0].start == 0.0);
    VtCurve { t, lower, upper, curve: PiecewiseCurve::new(pieces).expect("increasing knots") }
}
