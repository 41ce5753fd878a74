use super::envelope::{lower_envelope, Line};
use super::piecewise::{Piece, PiecewiseCurve};
use super::segment::RateLatency;
use super::Curve;
use crate::error::{Error, Result};

/// Piecewise-linear convex service curve in normal form, `max_i β_{R_i,T_i}`.
///
/// Segments are sorted by strictly increasing rate. The curve is zero up to
/// the first latency, which therefore acts as an extra breakpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexCurve {
    segments: Vec<RateLatency>,
    /// `breakpoints[i]` separates `segments[i]` and `segments[i + 1]`.
    breakpoints: Vec<f64>,
}

/// Builds the normal form of `max` over the given rate-latency curves.
pub fn normalize_convex(raw: &[RateLatency]) -> Result<ConvexCurve> {
    if raw.is_empty() {
        return Err(Error::Argument("convex curve needs at least one segment".into()));
    }
    for rl in raw {
        rl.validate()?;
    }
    // max(0, max_i R_i (t − T_i)) as a lower envelope of negated lines; the
    // zero line (last index) models the flat part before the first latency.
    let mut lines: Vec<Line> = raw.iter().map(|rl| Line { slope: -rl.rate, intercept: rl.rate * rl.latency }).collect();
    let zero_idx = lines.len();
    lines.push(Line { slope: 0.0, intercept: 0.0 });
    let hull = lower_envelope(&lines);

    let kept: Vec<(usize, f64)> = hull.into_iter().filter(|&(i, _)| i != zero_idx && raw[i].rate > 0.0).collect();
    if kept.is_empty() {
        // Every input has rate 0: the curve is identically zero.
        return Ok(ConvexCurve { segments: vec![RateLatency { rate: 0.0, latency: 0.0 }], breakpoints: vec![] });
    }
    let segments = kept.iter().map(|&(i, _)| raw[i]).collect();
    let breakpoints = kept.iter().skip(1).map(|&(_, x)| x).collect();
    Ok(ConvexCurve { segments, breakpoints })
}

impl ConvexCurve {
    pub fn rate_latency(rate: f64, latency: f64) -> Result<Self> {
        normalize_convex(&[RateLatency::new(rate, latency)?])
    }

    pub fn segments(&self) -> &[RateLatency] {
        &self.segments
    }

    /// Inter-segment intersections `s_1 < … < s_{m−1}`.
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// Time after which the curve is positive.
    pub fn latency(&self) -> f64 {
        if self.segments[0].rate > 0.0 {
            self.segments[0].latency
        } else {
            0.0
        }
    }

    /// Breakpoints including 0 and, when positive, the first latency.
    pub fn breakpoint_set(&self) -> Vec<f64> {
        let mut set = vec![0.0];
        if self.latency() > 0.0 {
            set.push(self.latency());
        }
        set.extend(self.breakpoints.iter().copied());
        set
    }

    /// Largest (long-term) rate.
    pub fn top_rate(&self) -> f64 {
        self.segments[self.segments.len() - 1].rate
    }

    /// Segment active right after `t`, or `None` on the flat part before the latency.
    pub fn segment_right(&self, t: f64) -> Option<RateLatency> {
        if t < self.latency() || self.segments[0].rate == 0.0 {
            return None;
        }
        Some(self.segments[self.breakpoints.partition_point(|&s| s <= t)])
    }

    pub fn rate_right(&self, t: f64) -> f64 {
        self.segment_right(t).map_or(0.0, |s| s.rate)
    }

    /// `inf{t >= 0 | β(t) >= x}`; `∞` if the curve never reaches `x`.
    pub fn pseudo_inverse(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        for (i, seg) in self.segments.iter().enumerate() {
            if seg.rate <= 0.0 {
                continue;
            }
            match self.breakpoints.get(i) {
                Some(&end) if seg.line(end) < x => continue,
                _ => return seg.latency + x / seg.rate,
            }
        }
        f64::INFINITY
    }

    /// `inf{t >= 0 | β(t) > x}`: differs from [`Self::pseudo_inverse`] only at
    /// `x = 0`, where it returns the latency.
    pub fn upper_pseudo_inverse(&self, x: f64) -> f64 {
        if x <= 0.0 {
            if self.segments[0].rate > 0.0 {
                self.latency()
            } else {
                f64::INFINITY
            }
        } else {
            self.pseudo_inverse(x)
        }
    }
}

impl Curve for ConvexCurve {
    fn at(&self, t: f64) -> f64 {
        self.segment_right(t).map_or(0.0, |s| s.value(t))
    }

    fn right_limit(&self, t: f64) -> f64 {
        self.at(t)
    }

    fn left_limit(&self, t: f64) -> f64 {
        self.at(t)
    }

    fn to_piecewise(&self) -> PiecewiseCurve {
        let mut pieces = Vec::with_capacity(self.segments.len() + 1);
        let first = self.segments[0];
        if self.latency() > 0.0 {
            pieces.push(Piece { start: 0.0, at: 0.0, right: 0.0, slope: 0.0 });
            pieces.push(Piece { start: first.latency, at: 0.0, right: 0.0, slope: first.rate });
        } else {
            pieces.push(Piece { start: 0.0, at: 0.0, right: 0.0, slope: first.rate });
        }
        for (i, &s) in self.breakpoints.iter().enumerate() {
            let seg = self.segments[i + 1];
            let v = seg.line(s);
            pieces.push(Piece { start: s, at: v, right: v, slope: seg.rate });
        }
        PiecewiseCurve::from_pieces_unchecked(pieces)
    }
}
