use super::Curve;
use crate::error::{Error, Result};
use crate::EPS;

/// One linear piece of a [`PiecewiseCurve`], valid on `[start, next start)`.
///
/// `at` is the function value exactly at `start`, `right` the limit from the
/// right. The two differ where the curve jumps, e.g. `δ_θ`-masked residual
/// curves are 0 at `θ` but positive right after it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece {
    pub start: f64,
    pub at: f64,
    pub right: f64,
    pub slope: f64,
}

impl Piece {
    #[inline]
    fn line(&self, t: f64) -> f64 {
        self.right + self.slope * (t - self.start)
    }
}

/// General finite piecewise-linear function on `[0, ∞)`, possibly
/// discontinuous and non-monotone. The last piece extends to infinity.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseCurve {
    pieces: Vec<Piece>,
}

impl PiecewiseCurve {
    pub fn new(pieces: Vec<Piece>) -> Result<Self> {
        let Some(first) = pieces.first() else {
            return Err(Error::Argument("piecewise curve needs at least one piece".into()));
        };
        if first.start != 0.0 {
            return Err(Error::Argument(format!("first piece must start at 0, got {}", first.start)));
        }
        for p in &pieces {
            if !(p.start.is_finite() && p.at.is_finite() && p.right.is_finite() && p.slope.is_finite()) {
                return Err(Error::Argument(format!("non-finite piece {p:?}")));
            }
        }
        if pieces.windows(2).any(|w| w[1].start <= w[0].start) {
            return Err(Error::Argument("piece start times must be strictly increasing".into()));
        }
        Ok(PiecewiseCurve { pieces })
    }

    pub(crate) fn from_pieces_unchecked(pieces: Vec<Piece>) -> Self {
        debug_assert!(PiecewiseCurve::new(pieces.clone()).is_ok(), "{pieces:?}");
        PiecewiseCurve { pieces }
    }

    /// Constant zero function.
    pub fn zero() -> Self {
        PiecewiseCurve { pieces: vec![Piece { start: 0.0, at: 0.0, right: 0.0, slope: 0.0 }] }
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// Piece start times, i.e. every point where the slope or value may change.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.pieces.iter().map(|p| p.start).collect()
    }

    pub fn tail_slope(&self) -> f64 {
        self.pieces[self.pieces.len() - 1].slope
    }

    /// End of piece `i`.
    fn end(&self, i: usize) -> f64 {
        self.pieces.get(i + 1).map_or(f64::INFINITY, |p| p.start)
    }

    /// Index of the last piece starting at or before `t`.
    fn index_at(&self, t: f64) -> usize {
        self.pieces.partition_point(|p| p.start <= t).saturating_sub(1)
    }

    /// Index of the piece covering `(t − ε, t)`.
    fn index_left(&self, t: f64) -> usize {
        self.pieces.partition_point(|p| p.start < t).saturating_sub(1)
    }

    /// Pointwise `a·f + b·g` over the merged breakpoint grid.
    pub fn lin_comb(a: f64, f: &PiecewiseCurve, b: f64, g: &PiecewiseCurve) -> PiecewiseCurve {
        PiecewiseCurve::combine(&[(a, f), (b, g)])
    }

    /// Pointwise `Σ w_k·f_k`.
    pub fn combine(terms: &[(f64, &PiecewiseCurve)]) -> PiecewiseCurve {
        let mut cursor = vec![0usize; terms.len()];
        let mut pieces = Vec::with_capacity(terms.iter().map(|(_, f)| f.pieces.len()).sum());
        let mut s = 0.0;
        loop {
            let mut piece = Piece { start: s, at: 0.0, right: 0.0, slope: 0.0 };
            let mut next = f64::INFINITY;
            for (&(w, f), i) in terms.iter().zip(cursor.iter_mut()) {
                while *i + 1 < f.pieces.len() && f.pieces[*i + 1].start <= s {
                    *i += 1;
                }
                let p = f.pieces[*i];
                let (at, right) = if p.start == s { (p.at, p.right) } else { (p.line(s), p.line(s)) };
                piece.at += w * at;
                piece.right += w * right;
                piece.slope += w * p.slope;
                if let Some(q) = f.pieces.get(*i + 1) {
                    next = next.min(q.start);
                }
            }
            pieces.push(piece);
            if !next.is_finite() {
                break;
            }
            s = next;
        }
        PiecewiseCurve { pieces }.compacted()
    }

    /// Value, right limit and left limit at every piece start of `self` or
    /// `other`, in increasing order of time.
    pub(crate) fn walk_with<'a>(
        &'a self,
        other: &'a PiecewiseCurve,
    ) -> impl Iterator<Item = (f64, [f64; 3], [f64; 3])> + 'a {
        let (mut i, mut j) = (0usize, 0usize);
        let mut t = Some(0.0);
        std::iter::from_fn(move || {
            let s = t?;
            let sample = |f: &PiecewiseCurve, k: &mut usize| {
                while *k + 1 < f.pieces.len() && f.pieces[*k + 1].start <= s {
                    *k += 1;
                }
                let p = f.pieces[*k];
                if p.start == s {
                    let left = if *k > 0 { f.pieces[*k - 1].line(s) } else { p.at };
                    [p.at, p.right, left]
                } else {
                    let v = p.line(s);
                    [v, v, v]
                }
            };
            let a = sample(self, &mut i);
            let b = sample(other, &mut j);
            let next = [self.pieces.get(i + 1), other.pieces.get(j + 1)]
                .into_iter()
                .flatten()
                .map(|p| p.start)
                .fold(f64::INFINITY, f64::min);
            t = next.is_finite().then_some(next);
            Some((s, a, b))
        })
    }

    /// `[f]⁺`, splitting pieces where they cross zero.
    pub fn positive_part(&self) -> PiecewiseCurve {
        let mut out = Vec::with_capacity(self.pieces.len() + 2);
        for (i, p) in self.pieces.iter().enumerate() {
            let end = self.end(i);
            let at = p.at.max(0.0);
            let end_value = if end.is_finite() {
                p.line(end)
            } else if p.slope > 0.0 {
                f64::INFINITY
            } else if p.slope < 0.0 {
                f64::NEG_INFINITY
            } else {
                p.right
            };
            if p.right >= 0.0 && end_value >= 0.0 {
                out.push(Piece { at, ..*p });
            } else if p.right <= 0.0 && end_value <= 0.0 {
                out.push(Piece { start: p.start, at, right: 0.0, slope: 0.0 });
            } else {
                // Rounding can put the zero crossing onto the piece start.
                let cross = p.start - p.right / p.slope;
                if p.right < 0.0 {
                    if cross > p.start {
                        out.push(Piece { start: p.start, at, right: 0.0, slope: 0.0 });
                        out.push(Piece { start: cross, at: 0.0, right: 0.0, slope: p.slope });
                    } else {
                        out.push(Piece { start: p.start, at, right: 0.0, slope: p.slope });
                    }
                } else if cross > p.start {
                    out.push(Piece { at, ..*p });
                    if cross < end {
                        out.push(Piece { start: cross, at: 0.0, right: 0.0, slope: 0.0 });
                    }
                } else {
                    out.push(Piece { start: p.start, at, right: 0.0, slope: 0.0 });
                }
            }
        }
        PiecewiseCurve { pieces: out }.compacted()
    }

    /// Forces the curve to 0 on `[0, θ]`, keeping it unchanged after `θ`.
    pub fn zero_until(&self, theta: f64) -> PiecewiseCurve {
        let mut out = Vec::with_capacity(self.pieces.len() + 2);
        if theta > 0.0 {
            out.push(Piece { start: 0.0, at: 0.0, right: 0.0, slope: 0.0 });
        }
        let i = self.index_at(theta);
        let p = self.pieces[i];
        out.push(Piece { start: theta, at: 0.0, right: self.right_limit(theta), slope: p.slope });
        out.extend(self.pieces[i + 1..].iter().copied());
        PiecewiseCurve { pieces: out }.compacted()
    }

    /// Merges neighbours that describe the same line without a jump.
    fn compacted(mut self) -> PiecewiseCurve {
        let mut out: Vec<Piece> = Vec::with_capacity(self.pieces.len());
        for p in self.pieces.drain(..) {
            if let Some(last) = out.last() {
                let continues = last.line(p.start);
                if (p.at - continues).abs() <= EPS * 1e-3
                    && (p.right - continues).abs() <= EPS * 1e-3
                    && (p.slope - last.slope).abs() <= EPS * 1e-3
                {
                    continue;
                }
            }
            out.push(p);
        }
        PiecewiseCurve { pieces: out }
    }

    /// Checks that the function never decreases, within `tol` per jump and slope.
    pub fn is_non_decreasing(&self, tol: f64) -> bool {
        let mut prev_left: Option<f64> = None;
        for (i, p) in self.pieces.iter().enumerate() {
            if let Some(left) = prev_left {
                if p.at < left - tol {
                    return false;
                }
            }
            if p.right < p.at - tol || p.slope < -tol {
                return false;
            }
            let end = self.end(i);
            prev_left = end.is_finite().then(|| p.line(end));
        }
        true
    }

    /// `inf{t >= from | f(t) >= y}` assuming `f` is non-decreasing on the scanned
    /// range. Right limits count, so a jump over `y` at `s` yields `s`.
    pub(crate) fn first_reach(&self, y: f64, from: f64) -> f64 {
        let first = self.index_at(from);
        for i in first..self.pieces.len() {
            let p = self.pieces[i];
            let start = p.start.max(from);
            let (value_at_start, right_at_start) =
                if p.start >= from { (p.at, p.right) } else { (p.line(from), p.line(from)) };
            if value_at_start >= y || right_at_start >= y {
                return start;
            }
            if p.slope > 0.0 {
                let x = p.start + (y - p.right) / p.slope;
                if x < self.end(i) {
                    return x.max(start);
                }
            }
        }
        f64::INFINITY
    }

    /// Largest non-decreasing function below `self`: `inf_{s >= t} f(s)`.
    pub fn lower_nondecreasing_closure(&self) -> Result<PiecewiseCurve> {
        let n = self.pieces.len();
        let tail = self.pieces[n - 1];
        if tail.slope < -EPS {
            return Err(Error::Contract(format!(
                "closure needs an eventually non-decreasing curve, tail slope is {}",
                tail.slope
            )));
        }
        let mut rev: Vec<Piece> = Vec::with_capacity(n + 4);
        let tail_slope = tail.slope.max(0.0);
        rev.push(Piece { start: tail.start, at: tail.at.min(tail.right), right: tail.right, slope: tail_slope });
        let mut running = tail.at.min(tail.right);

        for i in (0..n - 1).rev() {
            let p = self.pieces[i];
            let end = self.pieces[i + 1].start;
            let left_end = p.line(end);
            // Sub-pieces of (start, end), in reverse order.
            let right_value = if p.slope >= 0.0 {
                if p.right >= running {
                    rev.push(Piece { start: p.start, at: 0.0, right: running, slope: 0.0 });
                    running
                } else if left_end <= running {
                    rev.push(Piece { start: p.start, at: 0.0, right: p.right, slope: p.slope });
                    p.right
                } else {
                    let x = p.start + (running - p.right) / p.slope;
                    rev.push(Piece { start: x, at: running, right: running, slope: 0.0 });
                    rev.push(Piece { start: p.start, at: 0.0, right: p.right, slope: p.slope });
                    p.right
                }
            } else {
                let v = left_end.min(running);
                rev.push(Piece { start: p.start, at: 0.0, right: v, slope: 0.0 });
                v
            };
            let at = p.at.min(right_value);
            rev.last_mut().expect("just pushed").at = at;
            running = at;
        }
        rev.reverse();
        Ok(PiecewiseCurve { pieces: rev }.compacted())
    }

    /// `inf{t >= 0 | f(t) >= x}` for a non-decreasing curve.
    pub fn pseudo_inverse(&self, x: f64) -> Result<f64> {
        let scale = self.pieces.iter().fold(1.0_f64, |m, p| m.max(p.at.abs()).max(p.right.abs()));
        if !self.is_non_decreasing(EPS * scale) {
            return Err(Error::Contract("pseudo-inverse needs a non-decreasing curve".into()));
        }
        Ok(self.first_reach(x, 0.0))
    }
}

impl Curve for PiecewiseCurve {
    fn at(&self, t: f64) -> f64 {
        let p = self.pieces[self.index_at(t)];
        if p.start == t {
            p.at
        } else {
            p.line(t)
        }
    }

    fn right_limit(&self, t: f64) -> f64 {
        self.pieces[self.index_at(t)].line(t)
    }

    fn left_limit(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return self.at(0.0);
        }
        self.pieces[self.index_left(t)].line(t)
    }

    fn to_piecewise(&self) -> PiecewiseCurve {
        self.clone()
    }
}
