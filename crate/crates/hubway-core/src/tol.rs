//! Tolerant floating-point comparisons.
//!
//! All threshold tests against scale windows (`r`, `cr/2`, `2r`, ...) go
//! through these helpers so that the inclusive side of every interval gets
//! the same relative slack.

/// Relative tolerance applied on the inclusive side of threshold comparisons.
pub const REL_TOL: f64 = 1e-9;

/// `a <= b` with relative slack on the inclusive side.
#[inline]
pub fn le(a: f64, b: f64) -> bool {
    a <= b + REL_TOL * a.abs().max(b.abs())
}

/// Strict `a > b`, the complement of [`le`].
#[inline]
pub fn gt(a: f64, b: f64) -> bool {
    !le(a, b)
}

/// `a >= b` with the slack on the inclusive side.
#[inline]
pub fn ge(a: f64, b: f64) -> bool {
    le(b, a)
}

/// Strict `a < b`, the complement of [`ge`].
#[inline]
pub fn lt(a: f64, b: f64) -> bool {
    !ge(a, b)
}

/// Relative equality at [`REL_TOL`] (absolute near zero).
#[inline]
pub fn approx_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= REL_TOL * a.abs().max(b.abs()).max(1.0)
}

/// Membership in the half-open interval `(lo, hi]`.
#[inline]
pub fn in_window(x: f64, lo: f64, hi: f64) -> bool {
    gt(x, lo) && le(x, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inclusive_side_gets_slack() {
        assert!(le(1.0 + 1e-12, 1.0));
        assert!(!le(1.0 + 1e-6, 1.0));
        assert!(gt(1.0 + 1e-6, 1.0));
        assert!(!gt(1.0, 1.0));
    }

    #[test]
    fn window_is_half_open() {
        assert!(!in_window(1.0, 1.0, 2.0));
        assert!(in_window(2.0, 1.0, 2.0));
        assert!(in_window(1.0 + 1e-6, 1.0, 2.0));
        assert!(!in_window(2.0 + 1e-6, 1.0, 2.0));
    }
}
