//! Root finding for monotone scalar maps.

use crate::error::{Error, Result};

/// Zero of an increasing function on `[lo, hi]` with `h(lo) <= 0 <= h(hi)`.
///
/// Illinois false position with a bisection step whenever two consecutive
/// iterations fail to halve the bracket. Iterates until the bracket is a
/// few ulps wide, so the result is as smooth in the data as the arithmetic
/// allows. Returns the root and the residual `h(root)`.
pub fn solve_increasing<F>(mut h: F, lo: f64, hi: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut a, mut b) = (lo, hi);
    let mut fa = h(a)?;
    let mut fb = h(b)?;
    if fa == 0.0 {
        return Ok((a, 0.0));
    }
    if fb == 0.0 {
        return Ok((b, 0.0));
    }
    if fa > 0.0 || fb < 0.0 {
        return Err(Error::Precondition(format!(
            "interval [{lo}, {hi}] does not bracket a root (h = {fa:e}, {fb:e})"
        )));
    }
    // which endpoint was retained last: -1 = a, +1 = b
    let mut retained = 0i8;
    let mut width = b - a;
    let mut slow = 0u8;
    for _ in 0..400 {
        let scale = a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
        if b - a <= 4.0 * f64::EPSILON * scale {
            break;
        }
        let mut c = if slow >= 2 {
            slow = 0;
            0.5 * (a + b)
        } else {
            (a * fb - b * fa) / (fb - fa)
        };
        if !(c > a && c < b) {
            c = 0.5 * (a + b);
        }
        let fc = h(c)?;
        if fc == 0.0 {
            return Ok((c, 0.0));
        }
        if fc < 0.0 {
            a = c;
            fa = fc;
            if retained == 1 {
                fb *= 0.5;
            }
            retained = 1;
        } else {
            b = c;
            fb = fc;
            if retained == -1 {
                fa *= 0.5;
            }
            retained = -1;
        }
        if b - a > 0.5 * width {
            slow += 1;
        } else {
            slow = 0;
        }
        width = b - a;
    }
    // report the better endpoint with its true residual
    let ra = h(a)?;
    let rb = h(b)?;
    Ok(if ra.abs() <= rb.abs() { (a, ra) } else { (b, rb) })
}

/// Expands `[lo, hi]` to the right until the increasing `h` is nonnegative
/// at `hi`. Fails once `hi` passes `limit`.
pub fn bracket_increasing<F>(mut h: F, lo: f64, hi: f64, limit: f64) -> Result<Option<(f64, f64)>>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut a, mut b) = (lo, hi.max(lo + f64::EPSILON));
    loop {
        if h(b)? >= 0.0 {
            return Ok(Some((a, b)));
        }
        if b >= limit {
            return Ok(None);
        }
        a = b;
        b = (lo + 2.0 * (b - lo)).min(limit);
    }
}
