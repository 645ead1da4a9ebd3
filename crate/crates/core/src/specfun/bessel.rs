use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{ensure_finite, Error, Result};

/// `J_order(x)` for `order >= 0`, `x >= 0`.
///
/// Negative orders follow from `J_{-m} = (-1)^m J_m`; use [`bessel_j_int`]
/// for the signed-order convenience form.
pub fn bessel_j(order: u32, x: f64) -> Result<f64> {
    ensure_finite("x", x)?;
    if x < 0.0 {
        return Err(Error::InvalidArgument(format!("x must be >= 0, got {x}")));
    }
    Ok(bessel_j_int(order as i32, x))
}

/// `J_n(x)` for any integer order and any real argument.
///
/// Three regimes:
/// * ascending series while `x <= 2 sqrt(n + 1)` (no cancellation),
/// * Hankel asymptotic expansion once `x >= max(25, n^2)`,
/// * Miller backward recurrence normalised by `J_0 + 2 sum J_2k = 1` otherwise.
pub fn bessel_j_int(order: i32, x: f64) -> f64 {
    let n = order.unsigned_abs();
    let mut sign = if order < 0 && n % 2 == 1 { -1.0 } else { 1.0 };
    let mut x = x;
    if x < 0.0 {
        x = -x;
        if n % 2 == 1 {
            sign = -sign;
        }
    }
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    if !x.is_finite() {
        return if x.is_nan() { f64::NAN } else { 0.0 };
    }
    let nf = n as f64;
    let value = if x <= 2.0 * (nf + 1.0).sqrt() {
        ascending_series(n, x)
    } else if x >= 25.0_f64.max(nf * nf) {
        hankel_asymptotic(n, x)
    } else {
        miller(n, x)
    };
    sign * value
}

/// `J_{nu}(x) / x^power` with `power <= nu`, finite at `x = 0`.
pub fn bessel_ratio(nu: u32, x: f64, power: u32) -> f64 {
    debug_assert!(power <= nu);
    let x = x.abs();
    if x < 2.0 {
        // (x/2)^{nu-power} 2^{-power} / nu!, then the alternating series in (x/2)^2.
        let mut lead = 0.5_f64.powi(power as i32);
        for j in 1..=(nu - power) {
            lead *= 0.5 * x / j as f64;
        }
        for j in (nu - power + 1)..=nu {
            lead /= j as f64;
        }
        let q = -0.25 * x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        for t in 1..200u32 {
            term *= q / (t as f64 * (nu + t) as f64);
            sum += term;
            if term.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        lead * sum
    } else {
        bessel_j_int(nu as i32, x) / x.powi(power as i32)
    }
}

fn ascending_series(n: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut lead = 1.0;
    for j in 1..=n {
        lead *= half / j as f64;
    }
    if lead == 0.0 {
        return 0.0;
    }
    let q = -half * half;
    let mut term = 1.0;
    let mut sum = 1.0;
    for t in 1..500u32 {
        term *= q / (t as f64 * (n + t) as f64);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    lead * sum
}

fn hankel_asymptotic(n: u32, x: f64) -> f64 {
    let mu = 4.0 * (n as f64) * (n as f64);
    let mut p = 1.0;
    let mut q = 0.0;
    let mut a = 1.0_f64;
    let mut prev = f64::INFINITY;
    for k in 1..200u32 {
        let odd = (2 * k - 1) as f64;
        a *= (mu - odd * odd) / (k as f64 * 8.0 * x);
        if a.abs() > prev && k > 2 {
            break;
        }
        prev = a.abs();
        match k % 4 {
            1 => q += a,
            2 => p -= a,
            3 => q -= a,
            _ => p += a,
        }
        if a.abs() < 1e-17 {
            break;
        }
    }
    // chi = x - (2n + 1) pi / 4; reduce the phase offset exactly.
    let (cphi, sphi) = match (2 * n + 1) % 8 {
        1 => (FRAC_1_SQRT_2, FRAC_1_SQRT_2),
        3 => (-FRAC_1_SQRT_2, FRAC_1_SQRT_2),
        5 => (-FRAC_1_SQRT_2, -FRAC_1_SQRT_2),
        _ => (FRAC_1_SQRT_2, -FRAC_1_SQRT_2),
    };
    let (sx, cx) = x.sin_cos();
    let cos_chi = cx * cphi + sx * sphi;
    let sin_chi = sx * cphi - cx * sphi;
    (2.0 / (PI * x)).sqrt() * (p * cos_chi - q * sin_chi)
}

fn miller(n: u32, x: f64) -> f64 {
    let top = (n as f64).max(x.ceil());
    let mut start = (top + 20.0 + (40.0 * top).sqrt()) as u32;
    if start % 2 == 1 {
        start += 1;
    }
    let two_over_x = 2.0 / x;
    let mut b_next = 0.0_f64;
    let mut b = 1e-30_f64;
    let mut sum = 0.0;
    let mut result = 0.0;
    for k in (1..=start).rev() {
        if k == n {
            result = b;
        }
        if k % 2 == 0 {
            sum += 2.0 * b;
        }
        let b_prev = k as f64 * two_over_x * b - b_next;
        b_next = b;
        b = b_prev;
        if b.abs() > 1e250 {
            b *= 1e-250;
            b_next *= 1e-250;
            sum *= 1e-250;
            result *= 1e-250;
        }
    }
    sum += b;
    if n == 0 {
        result = b;
    }
    result / sum
}
