use super::{ConcaveCurve, ConvexCurve, Curve, PiecewiseCurve};
use crate::error::Result;
use crate::EPS;

/// `sup_t {f(t) − g(t)}` by direct scan of both breakpoint grids.
///
/// Between breakpoints the difference is affine, so the supremum is one of
/// the left limits, values or right limits at a breakpoint, or `+∞` when the
/// tail slope of `f − g` is positive.
pub fn max_gap(f: &PiecewiseCurve, g: &PiecewiseCurve) -> f64 {
    if f.tail_slope() - g.tail_slope() > EPS {
        return f64::INFINITY;
    }
    f.walk_with(g)
        .map(|(t, a, b)| {
            let best = (a[0] - b[0]).max(a[1] - b[1]);
            if t > 0.0 {
                best.max(a[2] - b[2])
            } else {
                best
            }
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Vertical deviation `v(f, g) = sup_{t>=0} {f(t) − g(t)}`.
///
/// `g` is replaced by its lower non-decreasing closure first, which leaves
/// the deviation unchanged. Fails if `g` has no non-decreasing tail.
pub fn vertical_deviation<G: Curve + ?Sized>(f: &ConcaveCurve, g: &G) -> Result<f64> {
    let closure = g.to_piecewise().lower_nondecreasing_closure()?;
    Ok(max_gap(&f.to_piecewise(), &closure))
}

/// `f + γ_{extra,0}` evaluated on the fly, without building the sum.
#[derive(Clone, Copy)]
struct Tilted<'a> {
    f: &'a ConcaveCurve,
    extra: f64,
}

impl Tilted<'_> {
    fn right_limit(&self, t: f64) -> f64 {
        self.f.right_limit(t) + self.extra * t
    }

    fn rate_right(&self, t: f64) -> f64 {
        self.f.rate_right(t) + self.extra
    }

    fn pseudo_inverse(&self, x: f64) -> f64 {
        if x <= self.f.burst() {
            return 0.0;
        }
        for (i, seg) in self.f.segments().iter().enumerate() {
            let rate = seg.rate + self.extra;
            let end = self.f.segment_end(i);
            let reach = if end.is_finite() {
                seg.line(end) + self.extra * end
            } else if rate > 0.0 {
                f64::INFINITY
            } else {
                seg.burst
            };
            if reach >= x {
                return ((x - seg.burst) / rate).max(self.f.segment_start(i));
            }
        }
        f64::INFINITY
    }

    /// Delay `inf{d >= 0 | f(t⁺) <= g(t + d)}` seen right after `t`.
    fn delay_right(&self, g: &ConvexCurve, t: f64) -> f64 {
        let x = self.right_limit(t);
        let reach =
            if x <= 0.0 && self.rate_right(t) > 0.0 { g.upper_pseudo_inverse(0.0) } else { g.pseudo_inverse(x) };
        (reach - t).max(0.0)
    }

    /// Candidate set `I_A ∪ {0}`: breakpoints of `f` and `f⁻¹(g(s))` for the
    /// breakpoints `s` of `g`.
    fn mapped_breakpoints<'b>(&'b self, g: &'b ConvexCurve) -> impl Iterator<Item = f64> + 'b {
        let own = std::iter::once(0.0).chain(self.f.breakpoints().iter().copied());
        let latency = g.latency();
        let service = std::iter::once(0.0)
            .chain((latency > 0.0).then_some(latency))
            .chain(g.breakpoints().iter().copied())
            .map(move |s| self.pseudo_inverse(g.at(s)))
            .filter(|t| t.is_finite());
        own.chain(service)
    }
}

/// Horizontal deviation `h(f, g)` of a concave arrival and a convex service curve.
///
/// `t ↦ g⁻¹(f(t)) − t` is concave on `(0, ∞)` with kinks only in the mapped
/// breakpoint set, so scanning that set is exact. Returns `+∞` when the
/// long-term arrival rate exceeds the service rate.
pub fn horizontal_deviation(f: &ConcaveCurve, g: &ConvexCurve) -> f64 {
    horizontal_deviation_tilted(f, 0.0, g)
}

/// `h(f + γ_{extra,0}, g)` without materializing the sum.
pub fn horizontal_deviation_tilted(f: &ConcaveCurve, extra: f64, g: &ConvexCurve) -> f64 {
    if f.sustained_rate() + extra > g.top_rate() + EPS {
        return f64::INFINITY;
    }
    let tilted = Tilted { f, extra };
    tilted.mapped_breakpoints(g).map(|t| tilted.delay_right(g, t)).fold(0.0, f64::max)
}

/// First mapped breakpoint where the arrival rate drops to or below the
/// service rate it is matched with; `+∞` if that never happens.
pub fn a_star(f: &ConcaveCurve, g: &ConvexCurve) -> f64 {
    let tilted = Tilted { f, extra: 0.0 };
    let mut points: Vec<f64> = tilted.mapped_breakpoints(g).collect();
    points.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
    for t in points {
        let x = f.right_limit(t);
        let matched = if x <= 0.0 && f.rate_right(t) > 0.0 { g.upper_pseudo_inverse(0.0) } else { g.pseudo_inverse(x) };
        if !matched.is_finite() {
            return f64::INFINITY;
        }
        if f.rate_right(t) <= g.rate_right(matched) + EPS {
            return t;
        }
    }
    f64::INFINITY
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{normalize_concave, TokenBucket};

    fn tb(r: f64, b: f64) -> ConcaveCurve {
        ConcaveCurve::token_bucket(r, b).unwrap()
    }

    fn rl(r: f64, t: f64) -> ConvexCurve {
        ConvexCurve::rate_latency(r, t).unwrap()
    }

    fn two(r1: f64, b1: f64, r2: f64, b2: f64) -> ConcaveCurve {
        normalize_concave(&[TokenBucket { rate: r1, burst: b1 }, TokenBucket { rate: r2, burst: b2 }]).unwrap()
    }

    /// Brute-force `h` by scanning `t` and searching `d` on fine grids.
    fn grid_h(f: &ConcaveCurve, g: &ConvexCurve, horizon: f64) -> f64 {
        let mut best: f64 = 0.0;
        let n = 4000;
        for k in 1..=n {
            let t = horizon * k as f64 / n as f64;
            let target = f.at(t);
            let mut d = 0.0;
            while g.at(t + d) < target - 1e-12 {
                d += 1e-4;
            }
            best = best.max(d);
        }
        best
    }

    #[test]
    fn horizontal_examples() {
        assert!((horizontal_deviation(&tb(1.0, 1.0), &rl(3.0, 0.0)) - 1.0 / 3.0).abs() < 1e-12);
        assert!((horizontal_deviation(&tb(2.0, 1.0), &rl(3.0, 0.0)) - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(horizontal_deviation(&tb(5.0, 1.0), &rl(3.0, 0.0)), f64::INFINITY);
        assert!((grid_h(&tb(1.0, 1.0), &rl(3.0, 0.0), 3.0) - 1.0 / 3.0).abs() < 1e-3);
    }

    #[test]
    fn horizontal_zero_burst_sees_latency() {
        assert!((horizontal_deviation(&tb(1.0, 0.0), &rl(3.0, 0.5)) - 0.5).abs() < 1e-12);
        assert_eq!(horizontal_deviation(&ConcaveCurve::zero(), &rl(3.0, 0.5)), 0.0);
    }

    #[test]
    fn horizontal_attained_at_a_star() {
        let f = two(5.0, 1.0, 1.0, 5.0);
        let g = rl(3.0, 0.0);
        let h = horizontal_deviation(&f, &g);
        // delay at t = 1: g⁻¹(6) − 1 = 1.
        assert!((h - 1.0).abs() < 1e-12);
        assert!((grid_h(&f, &g, 4.0) - h).abs() < 1e-3);
        assert_eq!(a_star(&f, &g), 1.0);
    }

    #[test]
    fn tilted_matches_materialized_sum() {
        let f = two(5.0, 1.0, 1.0, 5.0);
        for (extra, g) in [(0.5, rl(3.0, 0.2)), (1.5, rl(2.6, 0.0)), (4.5, rl(3.0, 0.0))] {
            let sum = crate::curve::add_concave(&f, &tb(extra, 0.0));
            assert_eq!(horizontal_deviation_tilted(&f, extra, &g), horizontal_deviation(&sum, &g));
        }
    }

    #[test]
    fn a_star_examples() {
        assert_eq!(a_star(&tb(2.0, 1.0), &rl(3.0, 0.0)), 0.0);
        assert_eq!(a_star(&tb(5.0, 1.0), &rl(3.0, 0.0)), f64::INFINITY);
    }

    #[test]
    fn vertical_examples() {
        assert!((vertical_deviation(&tb(1.0, 1.0), &rl(2.0, 1.0)).unwrap() - 2.0).abs() < 1e-12);
        let f = tb(1.0, 0.0);
        assert_eq!(max_gap(&f.to_piecewise(), &f.to_piecewise()), 0.0);
        assert_eq!(vertical_deviation(&tb(4.0, 1.0), &rl(3.0, 0.0)).unwrap(), f64::INFINITY);
    }
}
