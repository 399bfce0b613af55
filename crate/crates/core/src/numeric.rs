//! Scalar root finding and maximisation helpers shared by the solvers.
//!
//! Every solve in this crate reduces to a one-dimensional monotone root find,
//! so bisection is the only root finder. The brackets it returns are kept so
//! that callers can pick the endpoint that lies on the feasible side.

/// Hard cap on bisection steps; 200 halvings exhaust any f64 bracket.
const MAX_BISECTION_STEPS: usize = 200;

/// Final bracket of a bisection run. `lo` and `hi` straddle the root:
/// `f(lo)` and `f(hi)` have the signs they had at the start.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
}

impl Bracket {
    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Bisection on `[lo, hi]` for a function with `f(lo)` and `f(hi)` of
/// opposite sign (either orientation). Stops once the bracket is no wider
/// than `width` or the midpoint no longer moves in floating point.
pub fn bisect<F>(mut f: F, lo: f64, hi: f64, width: f64) -> Bracket
where
    F: FnMut(f64) -> f64,
{
    let (mut lo, mut hi) = (lo, hi);
    let lo_positive = f(lo) > 0.0;
    for _ in 0..MAX_BISECTION_STEPS {
        if hi - lo <= width {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let value = f(mid);
        if value == 0.0 {
            return Bracket { lo: mid, hi: mid };
        }
        if (value > 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Bracket { lo, hi }
}

/// Golden-section search for a maximum of a unimodal function on `[lo, hi]`.
/// Returns `(argmax, max)`.
pub fn golden_max<F>(mut f: F, lo: f64, hi: f64, width: f64) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..MAX_BISECTION_STEPS {
        if b - a <= width {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    let candidates = [(a, f(a)), (c, fc), (d, fd), (b, f(b))];
    candidates
        .into_iter()
        .fold((lo, f64::NEG_INFINITY), |best, cand| {
            if cand.1 > best.1 {
                cand
            } else {
                best
            }
        })
}

/// Relative-or-absolute closeness used for tie detection.
pub fn nearly_equal(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
