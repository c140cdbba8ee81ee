//! Bessel functions of the first kind and integer order.

use crate::error::{Error, Result};

pub const MAX_ORDER: i32 = 200;
pub const MAX_ARGUMENT: f64 = 1.0e3;

const RESCALE_ABOVE: f64 = 1.0e200;
const RESCALE_BY: f64 = 1.0e-200;

/// `J_n(x)` for `|n| ≤ 200`, `|x| ≤ 1000`, absolute error below 10⁻¹².
pub fn bessel_j(n: i32, x: f64) -> Result<f64> {
    if n.abs() > MAX_ORDER {
        return Err(Error::domain(
            "n",
            format!("|n| must be <= {MAX_ORDER}, got {n}"),
        ));
    }
    if !x.is_finite() || x.abs() > MAX_ARGUMENT {
        return Err(Error::domain(
            "x",
            format!("|x| must be <= {MAX_ARGUMENT}, got {x}"),
        ));
    }
    let m = n.unsigned_abs();
    // J_{-m} = (-1)^m J_m and J_m(-x) = (-1)^m J_m(x)
    let odd = m % 2 == 1;
    let flip = odd && ((n < 0) != (x < 0.0));
    let value = bessel_j_nonneg(m, x.abs());
    Ok(if flip { -value } else { value })
}

fn bessel_j_nonneg(m: u32, x: f64) -> f64 {
    if x == 0.0 {
        return if m == 0 { 1.0 } else { 0.0 };
    }
    if x * x <= 4.0 * (m as f64 + 1.0) {
        power_series(m, x)
    } else {
        miller(m, x)
    }
}

/// `Σ_k (−1)^k (x/2)^{2k+m} / (k!(k+m)!)`; only used where the terms do
/// not grow, so there is no cancellation to speak of.
fn power_series(m: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut lead = 1.0;
    for k in 1..=m {
        lead *= half / k as f64;
    }
    if lead == 0.0 {
        return 0.0;
    }
    let q = -half * half;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200u32 {
        term *= q / (k as f64 * (k + m) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    lead * sum
}

/// Downward recurrence from a high starting order, normalized with
/// `J_0 + 2·Σ J_{2k} = 1`.
fn miller(m: u32, x: f64) -> f64 {
    let top = (m as f64).max(x);
    let start = (top + 30.0 + 12.0 * x.cbrt()).ceil() as u32;
    let start = start + start % 2;

    let mut j_above = 0.0; // J_{k+1}
    let mut j_here = 1.0e-280; // J_k, arbitrary scale
    let mut target = 0.0;
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        if k == m {
            target = j_here;
        }
        if k % 2 == 0 {
            norm += 2.0 * j_here;
        }
        let j_below = (2.0 * k as f64 / x) * j_here - j_above;
        j_above = j_here;
        j_here = j_below;
        if j_here.abs() > RESCALE_ABOVE {
            j_here *= RESCALE_BY;
            j_above *= RESCALE_BY;
            norm *= RESCALE_BY;
            target *= RESCALE_BY;
        }
    }
    if m == 0 {
        target = j_here;
    }
    norm += j_here;
    target / norm
}
