use std::f64::consts::PI;

use serde::Serialize;

use super::finite::{adaptive, gk15_apply, gk15_nodes, QuadOptions};
use super::QuadResult;
use crate::error::{Error, Result};
use crate::specfun::bessel_j_int;

/// Asymptotic oscillation data of an integrand built from Bessel factors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Oscillation {
    /// Order of the factor whose zeros define the partition cells.
    pub fast_order: i32,
    /// Wavenumber of that factor (the largest one present).
    pub fast_wavenumber: f64,
    /// Smallest non-zero beat frequency in the large-argument expansion.
    pub slowest_frequency: f64,
    /// Largest beat frequency, used to size fixed panels.
    pub fastest_frequency: f64,
    /// A zero beat frequency is present (non-oscillating tail component).
    pub has_static_component: bool,
    /// Equal sub-cells per zero spacing, chosen so that no non-zero beat
    /// advances by nearly a whole period from one cell to the next.
    pub cell_parts: usize,
}

impl Oscillation {
    pub fn single(order: i32, wavenumber: f64) -> Self {
        Self::bessel_product(&[(order, wavenumber)])
    }

    /// Beat structure of `prod_i J_{order_i}(k_i x)`.
    pub fn bessel_product(factors: &[(i32, f64)]) -> Self {
        assert!(!factors.is_empty(), "at least one Bessel factor is required");
        let (fast_order, fast_wavenumber) =
            factors.iter().copied().max_by(|a, b| a.1.abs().total_cmp(&b.1.abs())).map(|(o, k)| (o, k.abs())).unwrap();
        let total: f64 = factors.iter().map(|f| f.1.abs()).sum();
        let floor = 1e-12 * total.max(f64::MIN_POSITIVE);
        let mut slowest = f64::INFINITY;
        let mut has_static = false;
        let mut beats = Vec::new();
        for mask in 0u32..(1 << factors.len()) {
            let beat = factors
                .iter()
                .enumerate()
                .map(|(i, f)| if mask >> i & 1 == 1 { -f.1.abs() } else { f.1.abs() })
                .sum::<f64>()
                .abs();
            if beat <= floor {
                has_static = true;
            } else {
                slowest = slowest.min(beat);
                beats.push(beat);
            }
        }
        let cell_parts = (1..=8)
            .find(|&parts| {
                beats.iter().all(|&beat| {
                    let turns = 0.5 * beat / (fast_wavenumber * parts as f64);
                    (turns - turns.round()).abs() >= 0.125 || turns.round() == 0.0
                })
            })
            .unwrap_or(8);
        Oscillation {
            fast_order,
            fast_wavenumber,
            slowest_frequency: slowest,
            fastest_frequency: total,
            has_static_component: has_static,
            cell_parts,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SemiInfiniteMethod {
    ZeroPartitionAccel,
    EpsRegularized,
}

/// Outcome of running both semi-infinite methods on the same integrand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrossValidated {
    pub value: f64,
    pub uncertainty: f64,
    pub zero_partition: QuadResult,
    pub eps_regularized: QuadResult,
    /// Largest magnitude reached by the partial integrals over the cells.
    pub partial_scale: f64,
}

const MIN_CELLS: usize = 12;
const MAX_CELLS: usize = 1200;
const EPS_WINDOW: usize = 48;
const LADDER_LEVELS: usize = 8;

/// McMahon's large-zero expansion for the `s`-th positive zero of `J_nu`.
fn mcmahon_zero(nu: f64, s: usize) -> f64 {
    let mu = 4.0 * nu * nu;
    let beta = (s as f64 + 0.5 * nu - 0.25) * PI;
    let b8 = 8.0 * beta;
    beta - (mu - 1.0) / b8 - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * b8.powi(3))
}

/// Zero of `J_order` near the asymptotic estimate, after one secant step.
fn refined_zero(order: i32, s: usize) -> f64 {
    let x0 = mcmahon_zero(order.unsigned_abs() as f64, s);
    let x1 = x0 + 1e-3;
    let g0 = bessel_j_int(order, x0);
    let g1 = bessel_j_int(order, x1);
    let denom = g1 - g0;
    if denom == 0.0 {
        return x0;
    }
    let x2 = x1 - g1 * (x1 - x0) / denom;
    if x2.is_finite() && (x2 - x0).abs() < 0.3 {
        x2
    } else {
        x0
    }
}

/// Cell boundaries in the integration variable: the first entry closes the
/// initial finite segment, later entries are consecutive zeros.
struct ZeroCells {
    order: i32,
    wavenumber: f64,
    next_index: usize,
    parts: usize,
    previous: Option<f64>,
    upcoming: f64,
    part: usize,
}

impl ZeroCells {
    fn new(osc: &Oscillation) -> Self {
        let nu = osc.fast_order.unsigned_abs() as f64;
        // Start where the asymptotic zero formula is reliable.
        let mut s = 1;
        while (s as f64 + 0.5 * nu - 0.25) * PI < 1.5 * nu + 3.0 {
            s += 1;
        }
        ZeroCells {
            order: osc.fast_order,
            wavenumber: osc.fast_wavenumber,
            next_index: s,
            parts: osc.cell_parts.max(1),
            previous: None,
            upcoming: 0.0,
            part: 0,
        }
    }

    fn zero(&mut self) -> f64 {
        let z = refined_zero(self.order, self.next_index) / self.wavenumber;
        self.next_index += 1;
        z
    }
}

impl Iterator for ZeroCells {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let Some(previous) = self.previous else {
            let z = self.zero();
            self.previous = Some(z);
            return Some(z);
        };
        if self.part == 0 {
            self.upcoming = self.zero();
        }
        self.part += 1;
        if self.part == self.parts {
            self.part = 0;
            self.previous = Some(self.upcoming);
            return Some(self.upcoming);
        }
        Some(previous + (self.upcoming - previous) * self.part as f64 / self.parts as f64)
    }
}

/// Wynn's epsilon algorithm over `seq`; returns the estimate from the even
/// column with the smallest internal spread and that spread as error.
pub fn wynn_epsilon(seq: &[f64]) -> (f64, f64) {
    let n = seq.len();
    match n {
        0 => return (0.0, f64::INFINITY),
        1 => return (seq[0], f64::INFINITY),
        2 => return (seq[1], (seq[1] - seq[0]).abs()),
        _ => {}
    }
    let mut best = (seq[n - 1], (seq[n - 1] - seq[n - 2]).abs() + (seq[n - 1] - seq[n - 3]).abs());
    let mut prev: Vec<f64> = vec![0.0; n + 1];
    let mut cur: Vec<f64> = seq.to_vec();
    let mut col = 0;
    while cur.len() >= 2 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for i in 0..cur.len() - 1 {
            let diff = cur[i + 1] - cur[i];
            let inv = if diff == 0.0 || !diff.is_finite() { f64::MAX.sqrt() } else { 1.0 / diff };
            next.push(prev[i + 1] + inv);
        }
        col += 1;
        prev = cur;
        cur = next;
        if col % 2 == 0 && cur.len() >= 3 {
            let m = cur.len();
            let last = cur[m - 1];
            let err = (last - cur[m - 2]).abs() + (last - cur[m - 3]).abs();
            if err.is_finite() && last.is_finite() && err < best.1 {
                best = (last, err);
            }
        }
    }
    best
}

fn zero_partition<F: Fn(f64) -> f64>(f: &F, osc: &Oscillation, tol: f64) -> (QuadResult, f64) {
    let cell_opts = QuadOptions { abs_tol: (1e-3 * tol).max(1e-17), rel_tol: 1e-14, max_evaluations: 200_000 };
    // A slow beat modulates the partial sums over many cells; estimates are
    // also compared half a beat period apart.
    let parts = osc.cell_parts.max(1);
    let lag = ((parts as f64 * osc.fast_wavenumber / osc.slowest_frequency).ceil() as usize).clamp(3, 200 * parts);
    let mut cells = ZeroCells::new(osc);
    let first = cells.next().unwrap();
    let head = adaptive(f, 0.0, first, &QuadOptions { max_evaluations: 400_000, ..cell_opts });
    let mut evaluations = head.evaluations;
    let mut quad_err = head.abs_error_estimate;
    let mut partial = head.value;
    let mut scale = partial.abs();
    let mut sums = vec![partial];
    let mut left = first;
    let mut history: Vec<f64> = Vec::new();
    let mut result = QuadResult { value: partial, abs_error_estimate: f64::INFINITY, evaluations, converged: false };
    for right in cells.take(MAX_CELLS * parts) {
        let cell = adaptive(f, left, right, &cell_opts);
        evaluations += cell.evaluations;
        quad_err += cell.abs_error_estimate;
        partial += cell.value;
        scale = scale.max(partial.abs());
        sums.push(partial);
        left = right;
        if sums.len() < MIN_CELLS {
            continue;
        }
        let window = &sums[sums.len().saturating_sub(EPS_WINDOW)..];
        let (estimate, accel_err) = wynn_epsilon(window);
        history.push(estimate);
        let h = history.len();
        let drift = if h > lag {
            [2, 3, 4, lag + 1].iter().map(|&back| (estimate - history[h - back]).abs()).fold(0.0, f64::max)
        } else {
            f64::INFINITY
        };
        let err = 2.0 * accel_err.max(drift) + quad_err;
        if err < result.abs_error_estimate {
            result.value = estimate;
            result.abs_error_estimate = err;
        }
        result.evaluations = evaluations;
        if result.abs_error_estimate <= tol && h > lag {
            result.converged = true;
            break;
        }
    }
    (result, scale.max(result.value.abs()))
}

/// Neville evaluation at zero of the interpolant through `(xs, ys)`.
fn neville_at_zero(xs: &[f64], ys: &[f64]) -> f64 {
    let mut p = ys.to_vec();
    let n = xs.len();
    for level in 1..n {
        for i in 0..n - level {
            let (xi, xj) = (xs[i], xs[i + level]);
            p[i] = (xj * p[i] - xi * p[i + 1]) / (xj - xi);
        }
    }
    p[0]
}

fn eps_regularized<F: Fn(f64) -> f64>(f: &F, osc: &Oscillation, tol: f64) -> Result<QuadResult> {
    if osc.has_static_component || !osc.slowest_frequency.is_finite() {
        return Err(Error::NonConvergent("regularized extrapolation needs every tail component to oscillate".into()));
    }
    let eps0 = 0.25 * osc.slowest_frequency;
    let ladder: Vec<f64> = (0..LADDER_LEVELS).map(|j| eps0 / f64::powi(2.0, j as i32)).collect();
    let eps_min = ladder[LADDER_LEVELS - 1];
    let x_end = 40.0 / eps_min;
    let head_end = ZeroCells::new(osc).next().unwrap().min(x_end);
    let head_opts = QuadOptions { abs_tol: (1e-3 * tol).max(1e-17), rel_tol: 1e-14, max_evaluations: 400_000 };
    let mut values = vec![0.0; LADDER_LEVELS];
    let mut quad_err = 0.0;
    let mut evaluations = 0;
    for (j, &eps) in ladder.iter().enumerate() {
        let head = adaptive(&|x: f64| f(x) * (-eps * x).exp(), 0.0, head_end, &head_opts);
        values[j] = head.value;
        quad_err = f64::max(quad_err, head.abs_error_estimate);
        evaluations += head.evaluations;
    }
    // One sweep of fixed Kronrod panels serves every ladder level.
    let width = (0.5 * PI / osc.fastest_frequency).min(0.5 / eps0);
    let panels = ((x_end - head_end) / width).ceil().max(1.0) as usize;
    let width = (x_end - head_end) / panels as f64;
    let mut tail_err = [0.0; LADDER_LEVELS];
    for p in 0..panels {
        let a = head_end + p as f64 * width;
        let b = a + width;
        let nodes = gk15_nodes(a, b);
        let fx = nodes.map(f);
        evaluations += 15;
        for (j, &eps) in ladder.iter().enumerate() {
            let mut weighted = fx;
            for (w, &x) in weighted.iter_mut().zip(nodes.iter()) {
                *w *= (-eps * x).exp();
            }
            let (v, e) = gk15_apply(a, b, &weighted);
            values[j] += v;
            tail_err[j] += e;
        }
    }
    let tail_err_max = tail_err.iter().cloned().fold(0.0, f64::max);
    let full = neville_at_zero(&ladder, &values);
    let reduced = neville_at_zero(&ladder[1..], &values[1..]);
    let reduced_fine = neville_at_zero(&ladder[..LADDER_LEVELS - 1], &values[..LADDER_LEVELS - 1]);
    let extrap_err = (full - reduced).abs().max((full - reduced_fine).abs());
    // Lebesgue-type amplification of per-level errors through extrapolation.
    let amplification = 4.0;
    let err = extrap_err + amplification * (quad_err + tail_err_max);

    Ok(QuadResult { value: full, abs_error_estimate: err, evaluations, converged: err <= tol })
}

/// `int_0^inf f` for a Bessel-type integrand with the given oscillation data.
pub fn integrate_bessel_semiinfinite<F: Fn(f64) -> f64>(
    f: F,
    osc: &Oscillation,
    tol: f64,
    method: SemiInfiniteMethod,
) -> Result<QuadResult> {
    validate(osc, tol)?;
    match method {
        SemiInfiniteMethod::ZeroPartitionAccel => Ok(zero_partition(&f, osc, tol).0),
        SemiInfiniteMethod::EpsRegularized => eps_regularized(&f, osc, tol),
    }
}

fn validate(osc: &Oscillation, tol: f64) -> Result<()> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be > 0, got {tol}")));
    }
    if !(osc.fast_wavenumber > 0.0) || !osc.fast_wavenumber.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "fastest wavenumber must be finite and > 0, got {}",
            osc.fast_wavenumber
        )));
    }
    Ok(())
}

/// Runs both methods and insists they agree within three times their
/// combined error estimates plus the requested absolute tolerance.
///
/// Each method only promises its result to within `tol`; their error
/// estimates can undershoot that, so a gap below `tol` is not a conflict.
pub fn cross_validated<F: Fn(f64) -> f64>(f: F, osc: &Oscillation, tol: f64) -> Result<CrossValidated> {
    validate(osc, tol)?;
    let (zp, scale) = zero_partition(&f, osc, tol);
    let er = eps_regularized(&f, osc, tol)?;
    let diff = (zp.value - er.value).abs();
    let floor = (64.0 * f64::EPSILON * scale.max(zp.value.abs())).max(tol);
    let allowed = 3.0 * (zp.abs_error_estimate + er.abs_error_estimate) + floor;
    if !(diff <= allowed) {
        return Err(Error::OracleInconsistency { first: zp.value, second: er.value, allowed });
    }
    let best = if zp.abs_error_estimate <= er.abs_error_estimate { zp } else { er };
    Ok(CrossValidated {
        value: best.value,
        uncertainty: best.abs_error_estimate.max(diff),
        zero_partition: zp,
        eps_regularized: er,
        partial_scale: scale,
    })
}
