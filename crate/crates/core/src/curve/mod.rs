//! Piecewise-linear curves and the min-plus primitives built on them.

mod concave;
mod convex;
mod deviation;
mod envelope;
mod piecewise;
mod segment;

pub use concave::{add_concave, normalize_concave, ConcaveCurve};
pub use convex::{normalize_convex, ConvexCurve};
pub use deviation::{a_star, horizontal_deviation, horizontal_deviation_tilted, max_gap, vertical_deviation};
pub use piecewise::{Piece, PiecewiseCurve};
pub use segment::{RateLatency, TokenBucket};

use crate::error::{check_time, Result};

/// Common evaluation interface of the three curve representations.
///
/// `at`, `right_limit` and `left_limit` assume `t >= 0`; the `eval_*`
/// variants check the domain.
pub trait Curve {
    /// Exact function value.
    fn at(&self, t: f64) -> f64;
    /// `lim_{s→t⁺} f(s)`.
    fn right_limit(&self, t: f64) -> f64;
    /// `lim_{s→t⁻} f(s)`; equals `at(0)` for `t = 0`.
    fn left_limit(&self, t: f64) -> f64;
    fn to_piecewise(&self) -> PiecewiseCurve;

    fn eval_at(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        Ok(self.at(t))
    }

    fn eval_right(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        Ok(self.right_limit(t))
    }
}

/// `f ⊗ δ_T`: `f(t − T)` for `t >= T`, 0 before.
pub fn shift_by_impulse(f: &ConcaveCurve, shift: f64) -> Result<PiecewiseCurve> {
    check_time(shift)?;
    let mut pieces = Vec::with_capacity(f.segments().len() + 1);
    if shift > 0.0 {
        pieces.push(Piece { start: 0.0, at: 0.0, right: 0.0, slope: 0.0 });
    }
    pieces.extend(f.to_piecewise().pieces().iter().map(|p| Piece { start: p.start + shift, ..*p }));
    Ok(PiecewiseCurve::from_pieces_unchecked(pieces))
}

/// `g ⊘ 0`, the largest non-decreasing function below `g`.
pub fn lower_nondecreasing_closure(g: &PiecewiseCurve) -> Result<PiecewiseCurve> {
    g.lower_nondecreasing_closure()
}

/// `inf{t >= 0 | f(t) >= x}` for a non-decreasing curve.
pub fn pseudo_inverse<C: Curve + ?Sized>(f: &C, x: f64) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return Err(crate::Error::Argument(format!("pseudo-inverse argument {x} must be >= 0")));
    }
    f.to_piecewise().pseudo_inverse(x)
}
