use super::{SeriesResult, TERM_CAP};
use crate::error::{Error, Result};

fn is_nonpositive_integer(b: f64) -> bool {
    b <= 0.0 && b == b.floor()
}

/// `2F2(a1, a2; b1, b2; x)` summed until `|term| < tol |partial sum|`.
///
/// The truncation estimate bounds the tail by a geometric series built
/// from the largest term ratio seen over a look-ahead window.
pub fn hyp2f2(a1: f64, a2: f64, b1: f64, b2: f64, x: f64, tol: f64) -> Result<SeriesResult> {
    if is_nonpositive_integer(b1) || is_nonpositive_integer(b2) {
        return Err(Error::InvalidArgument(format!(
            "2F2 lower parameters must not be non-positive integers ({b1}, {b2})"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tol must be > 0, got {tol}")));
    }
    let ratio = |k: usize| -> f64 {
        let k = k as f64;
        (a1 + k) * (a2 + k) / ((b1 + k) * (b2 + k) * (k + 1.0)) * x
    };
    let mut sum = 1.0;
    let mut term = 1.0;
    for k in 0..TERM_CAP {
        let next = term * ratio(k);
        if next == 0.0 {
            return Ok(SeriesResult { value: sum, terms_used: k + 1, truncation_estimate: 0.0 });
        }
        if next.abs() < tol * sum.abs() {
            let rho = (k + 1..k + 65).map(|j| ratio(j).abs()).fold(0.0, f64::max);
            if rho < 1.0 {
                return Ok(SeriesResult {
                    value: sum,
                    terms_used: k + 1,
                    truncation_estimate: next.abs() / (1.0 - rho),
                });
            }
        }
        sum += next;
        term = next;
        if !sum.is_finite() {
            break;
        }
    }
    Err(Error::ConvergenceFailure { terms: TERM_CAP, partial_sum: sum })
}
