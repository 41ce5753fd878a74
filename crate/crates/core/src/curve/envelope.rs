//! Lower envelope of affine functions over `[0, ∞)`.

use std::cmp::Ordering;

use crate::EPS;

/// An affine function `intercept + slope·t`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Line {
    pub slope: f64,
    pub intercept: f64,
}

impl Line {
    /// Abscissa where `self` and `other` meet. Requires different slopes.
    fn meet(&self, other: &Line) -> f64 {
        (other.intercept - self.intercept) / (self.slope - other.slope)
    }
}

/// Computes the lower envelope `min_i lines[i]` over `t >= 0`.
///
/// Returns the indices of the lines that are the strict unique minimum on an
/// interval of positive length, ordered by decreasing slope, together with the
/// start of each such interval (the first start is always 0).
pub(crate) fn lower_envelope(lines: &[Line]) -> Vec<(usize, f64)> {
    let mut order: Vec<usize> = (0..lines.len()).collect();
    order.sort_by(|&a, &b| {
        let (la, lb) = (&lines[a], &lines[b]);
        lb.slope
            .partial_cmp(&la.slope)
            .unwrap_or(Ordering::Equal)
            .then(la.intercept.partial_cmp(&lb.intercept).unwrap_or(Ordering::Equal))
    });

    let mut hull: Vec<(usize, f64)> = Vec::with_capacity(lines.len());
    for idx in order {
        let line = lines[idx];
        loop {
            let Some(&(top_idx, top_start)) = hull.last() else {
                hull.push((idx, 0.0));
                break;
            };
            let top = lines[top_idx];
            if (top.slope - line.slope).abs() <= EPS {
                // Parallel: only the lower one can ever be minimal.
                if line.intercept >= top.intercept - EPS {
                    break;
                }
                hull.pop();
                continue;
            }
            // `line` has the smaller slope, so it is below `top` right of `x`.
            let x = top.meet(&line);
            if x <= top_start + EPS {
                hull.pop();
                continue;
            }
            hull.push((idx, x));
            break;
        }
    }
    hull
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l(slope: f64, intercept: f64) -> Line {
        Line { slope, intercept }
    }

    #[test]
    fn keeps_both_crossing_lines() {
        let hull = lower_envelope(&[l(1.0, 4.0), l(4.0, 1.0)]);
        assert_eq!(hull.len(), 2);
        assert_eq!(hull[0].0, 1);
        assert!((hull[1].1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn drops_line_that_only_touches_at_origin() {
        // 1 + 4t and 1 + 3t meet at t = 0; the steeper one is never minimal for t > 0.
        let hull = lower_envelope(&[l(4.0, 1.0), l(3.0, 1.0), l(1.0, 4.0)]);
        let kept: Vec<usize> = hull.iter().map(|h| h.0).collect();
        assert_eq!(kept, vec![1, 2]);
        assert!((hull[1].1 - 1.5).abs() < 1e-12);
    }

    #[test]
    fn drops_line_above_envelope() {
        // 2 + 2t lies above min(4t, 3 + t) everywhere except where it touches.
        let hull = lower_envelope(&[l(4.0, 0.0), l(2.0, 2.0), l(1.0, 3.0)]);
        let kept: Vec<usize> = hull.iter().map(|h| h.0).collect();
        assert_eq!(kept, vec![0, 2]);
    }
}
