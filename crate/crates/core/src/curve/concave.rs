use super::envelope::{lower_envelope, Line};
use super::piecewise::{Piece, PiecewiseCurve};
use super::segment::TokenBucket;
use super::Curve;
use crate::error::{Error, Result};
use crate::EPS;

/// Piecewise-linear concave arrival curve in normal form, `min_i γ_{r_i,b_i}`.
///
/// Segments are sorted by strictly decreasing rate (hence strictly increasing
/// burst) and every segment is the unique minimum on some interval. The
/// curve is 0 at `t = 0` and jumps to the first burst right after.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcaveCurve {
    segments: Vec<TokenBucket>,
    /// `breakpoints[i]` separates `segments[i]` and `segments[i + 1]`.
    breakpoints: Vec<f64>,
}

/// Builds the normal form of `min` over the given token buckets.
pub fn normalize_concave(raw: &[TokenBucket]) -> Result<ConcaveCurve> {
    if raw.is_empty() {
        return Err(Error::Argument("concave curve needs at least one segment".into()));
    }
    for tb in raw {
        tb.validate()?;
    }
    let lines: Vec<Line> = raw.iter().map(|tb| Line { slope: tb.rate, intercept: tb.burst }).collect();
    let hull = lower_envelope(&lines);
    let segments = hull.iter().map(|&(i, _)| raw[i]).collect();
    let breakpoints = hull.iter().skip(1).map(|&(_, x)| x).collect();
    Ok(ConcaveCurve { segments, breakpoints })
}

impl ConcaveCurve {
    /// Single token bucket `γ_{rate,burst}`.
    pub fn token_bucket(rate: f64, burst: f64) -> Result<Self> {
        normalize_concave(&[TokenBucket::new(rate, burst)?])
    }

    /// The zero curve `γ_{0,0}`, neutral for [`add_concave`].
    pub fn zero() -> Self {
        ConcaveCurve { segments: vec![TokenBucket { rate: 0.0, burst: 0.0 }], breakpoints: vec![] }
    }

    pub fn segments(&self) -> &[TokenBucket] {
        &self.segments
    }

    /// Inter-segment intersections `a_1 < … < a_{n−1}` (excluding 0).
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// Breakpoints including the burst at `t = 0`.
    pub fn breakpoint_set(&self) -> Vec<f64> {
        std::iter::once(0.0).chain(self.breakpoints.iter().copied()).collect()
    }

    /// Right limit at 0.
    pub fn burst(&self) -> f64 {
        self.segments[0].burst
    }

    /// Long-term (smallest) rate.
    pub fn sustained_rate(&self) -> f64 {
        self.segments[self.segments.len() - 1].rate
    }

    /// Start of the validity interval of segment `i`.
    pub fn segment_start(&self, i: usize) -> f64 {
        if i == 0 {
            0.0
        } else {
            self.breakpoints[i - 1]
        }
    }

    /// End of the validity interval of segment `i` (`∞` for the last one).
    pub fn segment_end(&self, i: usize) -> f64 {
        self.breakpoints.get(i).copied().unwrap_or(f64::INFINITY)
    }

    /// Index of the segment active right after `t`.
    pub fn segment_index_right(&self, t: f64) -> usize {
        self.breakpoints.partition_point(|&a| a <= t)
    }

    /// Segment `f^t` active right after `t`.
    pub fn segment_right(&self, t: f64) -> TokenBucket {
        self.segments[self.segment_index_right(t)]
    }

    pub fn rate_right(&self, t: f64) -> f64 {
        self.segment_right(t).rate
    }

    /// `inf{t >= 0 | f(t) >= x}`, with the jump at 0 counted from the right.
    pub fn pseudo_inverse(&self, x: f64) -> f64 {
        if x <= self.burst() {
            return 0.0;
        }
        for (i, seg) in self.segments.iter().enumerate() {
            let end = self.segment_end(i);
            let reach = if end.is_finite() {
                seg.line(end)
            } else if seg.rate > 0.0 {
                f64::INFINITY
            } else {
                seg.burst
            };
            if reach >= x {
                return ((x - seg.burst) / seg.rate).max(self.segment_start(i));
            }
        }
        f64::INFINITY
    }

    /// Checks that consecutive segments meet continuously at their breakpoint.
    pub fn is_continuous(&self, tol: f64) -> bool {
        self.breakpoints
            .iter()
            .enumerate()
            .all(|(i, &a)| (self.segments[i].line(a) - self.segments[i + 1].line(a)).abs() <= tol)
    }
}

impl Curve for ConcaveCurve {
    fn at(&self, t: f64) -> f64 {
        if t <= 0.0 {
            0.0
        } else {
            self.right_limit(t)
        }
    }

    fn right_limit(&self, t: f64) -> f64 {
        self.segment_right(t).line(t)
    }

    fn left_limit(&self, t: f64) -> f64 {
        self.at(t)
    }

    fn to_piecewise(&self) -> PiecewiseCurve {
        let mut pieces = Vec::with_capacity(self.segments.len());
        pieces.push(Piece { start: 0.0, at: 0.0, right: self.burst(), slope: self.segments[0].rate });
        for (i, &a) in self.breakpoints.iter().enumerate() {
            let seg = self.segments[i + 1];
            let v = seg.line(a);
            pieces.push(Piece { start: a, at: v, right: v, slope: seg.rate });
        }
        PiecewiseCurve::from_pieces_unchecked(pieces)
    }
}

/// Pointwise sum of two concave curves, in normal form.
pub fn add_concave(f: &ConcaveCurve, g: &ConcaveCurve) -> ConcaveCurve {
    let mut cuts: Vec<f64> = f.breakpoints.iter().chain(g.breakpoints.iter()).copied().collect();
    cuts.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
    cuts.dedup_by(|a, b| (*a - *b).abs() <= EPS);

    let mut sums = Vec::with_capacity(cuts.len() + 1);
    let mut starts = vec![0.0];
    starts.extend(cuts.iter().copied());
    for &s in &starts {
        let (sf, sg) = (f.segment_right(s), g.segment_right(s));
        sums.push(TokenBucket { rate: sf.rate + sg.rate, burst: sf.burst + sg.burst });
    }
    normalize_concave(&sums).expect("sum of valid token buckets is valid")
}
