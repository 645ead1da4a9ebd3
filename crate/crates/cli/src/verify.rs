//! Invariant batteries behind `twistkit verify`.
//!
//! Every check draws its random inputs from a ChaCha stream keyed by the
//! seed and the check's position in the battery, so any subset selected
//! with `--only` reproduces bit for bit.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use twistkit::expansion::{phase_expand, psi_shifted};
use twistkit::fields::{lr_cross_overlap, magnetic_field, normalization_e0, psi, vector_potential};
use twistkit::matrix_elements::oracle::{dipole_spectrum, first_order_spectrum, spin_spectrum, ChannelKey};
use twistkit::matrix_elements::{
    carrier_order, dipole_absorption_amplitude, dipole_amplitude, ho_vortex_integral, icm0, symbolic_channels,
    triple_bessel, DipoleCoupling, TRIPLE_TOL,
};
use twistkit::quadrature::{cross_validated, fd_curl, fd_divergence, fd_laplacian, Oscillation};
use twistkit::specfun::bessel_j_int;
use twistkit::{
    CenterOfMassState, ChannelOrder, Complex64, CylPoint, Interaction, InternalState, ModeKind, ModeSpec, PlanarVec,
    Result,
};

use crate::error::{CliError, CliResult};
use crate::table::format_real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    AtMost,
    AtLeast,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Measure {
    pub measured: f64,
    pub limit: f64,
    pub sense: Sense,
    pub detail: String,
}

impl Measure {
    fn at_most(measured: f64, limit: f64, detail: impl Into<String>) -> Self {
        Measure { measured, limit, sense: Sense::AtMost, detail: detail.into() }
    }

    fn at_least(measured: f64, limit: f64, detail: impl Into<String>) -> Self {
        Measure { measured, limit, sense: Sense::AtLeast, detail: detail.into() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub name: String,
    pub result: std::result::Result<Measure, String>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        match &self.result {
            Ok(m) => match m.sense {
                Sense::AtMost => m.measured <= m.limit,
                Sense::AtLeast => m.measured >= m.limit,
            },
            Err(_) => false,
        }
    }

    pub fn line(&self) -> String {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        match &self.result {
            Ok(m) => {
                let (op, margin) = match m.sense {
                    Sense::AtMost => ("<=", m.limit / m.measured),
                    Sense::AtLeast => (">=", m.measured / m.limit),
                };
                let margin = if margin.is_finite() { format!("{margin:.3e}") } else { "inf".into() };
                format!(
                    "{status} {}: measured {:.3e} {op} limit {:.3e}, margin {margin} ({})",
                    self.name, m.measured, m.limit, m.detail
                )
            }
            Err(e) => format!("{status} {}: error: {e}", self.name),
        }
    }
}

type CheckFn = fn(&mut ChaCha8Rng) -> Result<Measure>;

fn random_mode(rng: &mut ChaCha8Rng, kind: ModeKind) -> Result<ModeSpec> {
    ModeSpec::new(kind, rng.gen_range(-4..=4), rng.gen_range(0.2..3.0), rng.gen_range(0.2..3.0))
}

fn random_point(rng: &mut ChaCha8Rng) -> Result<CylPoint> {
    CylPoint::new(rng.gen_range(0.0..4.0), rng.gen_range(-PI..PI), rng.gen_range(-2.0..2.0), 0.0)
}

fn potential(mode: &ModeSpec) -> impl Fn([f64; 3]) -> [Complex64; 3] + '_ {
    move |x: [f64; 3]| {
        vector_potential(mode, &CylPoint::from_cartesian(x[0], x[1], x[2]))
            .map(|s| s.to_array())
            .unwrap_or([Complex64::new(f64::NAN, 0.0); 3])
    }
}

fn first_step(mode: &ModeSpec) -> f64 {
    1e-4 * (1.0 / mode.k_perp).min(1.0 / mode.k_z.abs())
}

fn second_step(mode: &ModeSpec) -> f64 {
    1e-2 * (1.0 / mode.k_perp).min(1.0 / mode.k_z.abs())
}

/// Largest `|A|` on the divergence stencil.
fn stencil_max(mode: &ModeSpec, p: &CylPoint, h: f64) -> f64 {
    let x = p.to_cartesian();
    let f = potential(mode);
    let mut amax: f64 = 0.0;
    for axis in 0..3 {
        for s in [-h, -0.5 * h, 0.5 * h, h] {
            let mut y = x;
            y[axis] += s;
            amax = amax.max(f(y).iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt());
        }
    }
    amax
}

pub fn divergence_ratio(mode: &ModeSpec, p: &CylPoint) -> f64 {
    let h = first_step(mode);
    let div = fd_divergence(potential(mode), p, h);
    div.norm() / (mode.omega() * stencil_max(mode, p, h).max(f64::MIN_POSITIVE))
}

pub fn curl_ratio(mode: &ModeSpec, p: &CylPoint) -> Result<f64> {
    let curl = fd_curl(potential(mode), p, first_step(mode));
    let b = magnetic_field(mode, p)?.to_array();
    let a = vector_potential(mode, p)?;
    let scale = b.iter().map(|v| v.norm()).fold(mode.omega() * a.norm(), f64::max).max(f64::MIN_POSITIVE);
    Ok((0..3).map(|i| (curl[i] - b[i]).norm()).fold(0.0, f64::max) / scale)
}

pub fn helmholtz_ratio(mode: &ModeSpec, p: &CylPoint) -> Result<f64> {
    let lap = fd_laplacian(potential(mode), p, second_step(mode));
    let a = vector_potential(mode, p)?;
    let w2 = mode.omega().powi(2);
    let scale = w2 * a.norm().max(1e-3 * normalization_e0(mode.k_perp, mode.k_z.abs().max(0.2)));
    Ok(a.to_array().iter().zip(lap).map(|(ai, li)| (li + ai * w2).norm()).fold(0.0, f64::max) / scale)
}

fn field_battery(
    rng: &mut ChaCha8Rng,
    kinds: &[ModeKind],
    modes: usize,
    points: usize,
    f: impl Fn(&ModeSpec, &CylPoint) -> Result<f64>,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &kind in kinds {
        for _ in 0..modes {
            let mode = random_mode(rng, kind)?;
            for _ in 0..points {
                let p = random_point(rng)?;
                worst = worst.max(f(&mode, &p)?);
            }
        }
    }
    Ok(worst)
}

const TE: &[ModeKind] = &[ModeKind::TE];
const TM: &[ModeKind] = &[ModeKind::TM];
const LR: &[ModeKind] = &[ModeKind::L, ModeKind::R];

fn gauge_te(rng: &mut ChaCha8Rng) -> Result<Measure> {
    let w = field_battery(rng, TE, 20, 10, |m, p| Ok(divergence_ratio(m, p)))?;
    Ok(Measure::at_most(w, 1e-6, "max |div A| / (omega |A|), 200 points"))
}

fn gauge_tm(rng: &mut ChaCha8Rng) -> Result<Measure> {
    let w = field_battery(rng, TM, 20, 10, |m, p| Ok(divergence_ratio(m, p)))?;
    Ok(Measure::at_most(w, 1e-6, "max |div A| / (omega |A|), 200 points"))
}

fn gauge_lr(rng: &mut ChaCha8Rng) -> Result<Measure> {
    let w = field_battery(rng, LR, 10, 10, |m, p| Ok(divergence_ratio(m, p)))?;
    Ok(Measure::at_most(w, 1e-6, "max |div A| / (omega |A|), 200 points"))
}

fn curl_te(rng: &mut ChaCha8Rng) -> Result<Measure> {
    let w = field_battery(rng, TE, 20, 10, curl_ratio)?;
    Ok(Measure::at_most(w, 1e-5, "max |curl A - B| / |B|, 200 points"))
}

fn curl_tm(rng: &mut ChaCha8Rng) -> Result<Measure> {
    let w = field_battery(rng, TM, 20, 10, curl_ratio)?;
    Ok(Measure::at_most(w, 1e-5, "max |curl A - B| / |B|, 200 points"))
}

fn curl_lr(rng: &mut ChaCha8Rng) -> Result<Measure> {
    let w = field_battery(rng, LR, 10, 10, curl_ratio)?;
    Ok(Measure::at_most(w, 1e-5, "max |curl A - B| / |B|, 200 points"))
}

fn helmholtz_te(rng: &mut ChaCha8Rng) -> Result<Measure> {
    let w = field_battery(rng, TE, 20, 10, helmholtz_ratio)?;
    Ok(Measure::at_most(w, 1e-4, "max |lap A + omega^2 A| / (omega^2 |A|), 200 points"))
}

fn helmholtz_tm(rng: &mut ChaCha8Rng) -> Result<Measure> {
    let w = field_battery(rng, TM, 20, 10, helmholtz_ratio)?;
    Ok(Measure::at_most(w, 1e-4, "max |lap A + omega^2 A| / (omega^2 |A|), 200 points"))
}

fn transversality(rng: &mut ChaCha8Rng) -> Result<Measure> {
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let te = random_mode(rng, ModeKind::TE)?;
        let tm = random_mode(rng, ModeKind::TM)?;
        let p = random_point(rng)?;
        worst = worst.max(vector_potential(&te, &p)?.z.norm());
        worst = worst.max(magnetic_field(&tm, &p)?.z.norm());
    }
    Ok(Measure::at_most(worst, 0.0, "TE A_z and TM B_z, 100 points"))
}

fn lr_overlap(_: &mut ChaCha8Rng) -> Result<Measure> {
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        for j in 0..20 {
            let k = 0.1 + 2.9 * i as f64 / 19.0;
            let kz = -3.0 + 6.0 * j as f64 / 19.0;
            let x2 = kz * kz / (k * k + kz * kz);
            let expected = (1.0 - x2) / (1.0 + x2);
            for m in [-2, 0, 3] {
                worst = worst.max((lr_cross_overlap(m, k, kz)? - expected).abs());
            }
        }
    }
    Ok(Measure::at_most(worst, 1e-14, "20x20 (k_perp, k_z) grid"))
}

fn lr_limits(_: &mut ChaCha8Rng) -> Result<Measure> {
    let a = (lr_cross_overlap(1, 1.3, 0.0)? - 1.0).abs();
    let b = lr_cross_overlap(1, 1e-9, 1.0)?.abs();
    Ok(Measure::at_most(a.max(b), 1e-14, "k_z = 0 gives 1, k_perp -> 0 gives 0"))
}

fn shifted_error(rng: &mut ChaCha8Rng, m: i32) -> Result<f64> {
    let k = rng.gen_range(0.3..2.0);
    let q = rng.gen_range(0.0..3.0) / k;
    let big = PlanarVec::new(rng.gen_range(0.2..6.0) / k, rng.gen_range(-PI..PI))?;
    let small = PlanarVec::new(q, rng.gen_range(-PI..PI))?;
    let rel = big - small;
    let direct = psi(m, k, rel.r, rel.phi);
    let series = psi_shifted(m, k, big, small, None)?.series.value;
    Ok((series - direct).norm() / direct.norm().max(f64::MIN_POSITIVE))
}

fn addition_general(rng: &mut ChaCha8Rng) -> Result<Measure> {
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let m = rng.gen_range(1..=6) * if rng.gen_bool(0.5) { 1 } else { -1 };
        worst = worst.max(shifted_error(rng, m)?);
    }
    Ok(Measure::at_most(worst, 1e-8, "0 < |m| <= 6, k q <= 3, 100 configurations"))
}

fn addition_m0(rng: &mut ChaCha8Rng) -> Result<Measure> {
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        worst = worst.max(shifted_error(rng, 0)?);
    }
    Ok(Measure::at_most(worst, 1e-8, "m = 0, k q <= 3, 100 configurations"))
}

fn addition_phase(rng: &mut ChaCha8Rng) -> Result<Measure> {
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let m = rng.gen_range(0..=6u32);
        let big = PlanarVec::new(rng.gen_range(0.1..5.0), rng.gen_range(-PI..PI))?;
        let small = PlanarVec::new(rng.gen_range(0.0..5.0), rng.gen_range(-PI..PI))?;
        let rel = big - small;
        let direct = Complex64::from_polar(1.0, m as f64 * rel.phi);
        worst = worst.max((phase_expand(m, 1.0, big, small)? - direct).norm());
    }
    Ok(Measure::at_most(worst, 1e-12, "binomial phase expansion, 200 configurations"))
}

fn key_set(m: i32, kind: ModeKind, interaction: Interaction, order: Option<u32>) -> Result<BTreeSet<ChannelKey>> {
    let max = order.unwrap_or(0);
    Ok(symbolic_channels(m, kind, interaction, max)?
        .iter()
        .filter(|c| match order {
            Some(o) => c.order == ChannelOrder::Multipole { order: o },
            None => true,
        })
        .map(|c| (c.delta_m_cm, c.delta_m_r, c.delta_spin_e))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionFamily {
    Dipole,
    FirstOrder,
    Spin,
}

/// (largest spurious coefficient, smallest expected coefficient) over the
/// exhaustive `|m| <= 5` x {TE, TM} matrix.
pub fn selection_extremes(rng: &mut ChaCha8Rng, which: SelectionFamily) -> Result<(f64, f64)> {
    let (mut spurious, mut smallest): (f64, f64) = (0.0, f64::INFINITY);
    for m in -5..=5 {
        for kind in [ModeKind::TE, ModeKind::TM] {
            let k = rng.gen_range(0.5..2.0);
            let kz = rng.gen_range(0.5..2.0);
            let mode = ModeSpec::new(kind, m, k, kz)?;
            let rho = rng.gen_range(0.6..2.5);
            let theta = rng.gen_range(0.4..2.7);
            let (spectrum, expected) = match which {
                SelectionFamily::Dipole => {
                    (dipole_spectrum(&mode, rho, theta, 10)?, key_set(m, kind, Interaction::Dipole, None)?)
                }
                SelectionFamily::FirstOrder => (
                    first_order_spectrum(&mode, rho, theta, 1e-2, 10)?,
                    key_set(m, kind, Interaction::Dipole, Some(1))?,
                ),
                SelectionFamily::Spin => (spin_spectrum(&mode, rho, 10)?, key_set(m, kind, Interaction::Spin, None)?),
            };
            spurious = spurious.max(spectrum.largest_outside(&expected));
            smallest = smallest.min(spectrum.smallest_inside(&expected));
        }
    }
    Ok((spurious, smallest))
}

fn selection_dipole_spurious(rng: &mut ChaCha8Rng) -> Result<Measure> {
    Ok(Measure::at_most(
        selection_extremes(rng, SelectionFamily::Dipole)?.0,
        1e-10,
        "largest coefficient outside the symbolic set",
    ))
}

fn selection_dipole_missing(rng: &mut ChaCha8Rng) -> Result<Measure> {
    Ok(Measure::at_least(
        selection_extremes(rng, SelectionFamily::Dipole)?.1,
        1e-6,
        "smallest coefficient inside the symbolic set",
    ))
}

/// Finite-difference floor for first-order coefficients at a step of 1e-2;
/// coefficients below it classify as zero, above it as present.
const QUADRUPOLE_SPURIOUS: f64 = 1e-6;

fn selection_quadrupole_spurious(rng: &mut ChaCha8Rng) -> Result<Measure> {
    Ok(Measure::at_most(
        selection_extremes(rng, SelectionFamily::FirstOrder)?.0,
        QUADRUPOLE_SPURIOUS,
        "first Taylor order, outside the symbolic set",
    ))
}

fn selection_quadrupole_missing(rng: &mut ChaCha8Rng) -> Result<Measure> {
    Ok(Measure::at_least(
        selection_extremes(rng, SelectionFamily::FirstOrder)?.1,
        QUADRUPOLE_SPURIOUS,
        "first Taylor order, inside the symbolic set",
    ))
}

fn selection_spin_spurious(rng: &mut ChaCha8Rng) -> Result<Measure> {
    Ok(Measure::at_most(
        selection_extremes(rng, SelectionFamily::Spin)?.0,
        1e-10,
        "largest coefficient outside the symbolic set",
    ))
}

fn selection_spin_missing(rng: &mut ChaCha8Rng) -> Result<Measure> {
    Ok(Measure::at_least(
        selection_extremes(rng, SelectionFamily::Spin)?.1,
        1e-6,
        "smallest coefficient inside the symbolic set",
    ))
}

fn selection_conservation(_: &mut ChaCha8Rng) -> Result<Measure> {
    let mut violations = 0usize;
    let mut rows = 0usize;
    let mut interactions = vec![Interaction::Dipole, Interaction::Spin];
    for n in 0..=2 {
        for v in 0..=2 {
            for s in 0..=v {
                interactions.push(Interaction::General { n, v, s });
                interactions.push(Interaction::CenterOfMass { n, v, s });
            }
        }
    }
    for m in -5..=5 {
        for kind in [ModeKind::TE, ModeKind::TM, ModeKind::L, ModeKind::R] {
            for &inter in &interactions {
                let Ok(channels) = symbolic_channels(m, kind, inter, 3) else { continue };
                for c in channels {
                    rows += 1;
                    if c.total_change() != -carrier_order(kind, m) {
                        violations += 1;
                    }
                }
            }
        }
    }
    Ok(Measure::at_most(violations as f64, 0.0, format!("{rows} channels, sum of changes equals -m")))
}

fn cutoff_outside(rng: &mut ChaCha8Rng) -> Result<Measure> {
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let k = rng.gen_range(0.3..2.0);
        let k_r = rng.gen_range(0.3..2.0);
        let k_out = (k + k_r) * rng.gen_range(1.06..2.0);
        let m = rng.gen_range(0..=3);
        let m_r = rng.gen_range(0..=3);
        let n = rng.gen_range(0..=(m + m_r) as u32);
        let r = triple_bessel(k, k_r, k_out, m, m_r, n)?;
        worst = worst.max(r.value.abs() / r.partial_scale);
    }
    Ok(Measure::at_most(worst, 1e-6, "|value| / partial scale, 10 sets outside the cone"))
}

const INSIDE: [(f64, f64, f64, i32, i32, u32); 10] = [
    (1.0, 0.8, 1.2, 0, 0, 0),
    (1.0, 1.0, 1.0, 1, 0, 0),
    (1.3, 0.9, 1.1, 1, 1, 0),
    (0.9, 1.4, 1.1, 2, 0, 0),
    (1.2, 0.7, 1.0, 1, 2, 1),
    (1.0, 1.0, 1.5, 2, 1, 1),
    (1.5, 1.2, 0.8, 0, 1, 0),
    (0.8, 0.9, 1.3, 3, 0, 1),
    (1.1, 1.3, 0.7, 2, 2, 2),
    (1.4, 1.0, 2.0, 1, 1, 0),
];

fn cutoff_inside(_: &mut ChaCha8Rng) -> Result<Measure> {
    let mut smallest = f64::INFINITY;
    for &(k, k_r, k_out, m, m_r, n) in &INSIDE[..5] {
        let r = triple_bessel(k, k_r, k_out, m, m_r, n)?;
        smallest = smallest.min(r.value.abs() / r.partial_scale);
    }
    Ok(Measure::at_least(smallest, 1e-3, "|value| / partial scale, 5 sets inside the cone"))
}

fn benchmark(order: i32) -> Result<Measure> {
    let cv = cross_validated(|x| bessel_j_int(order, x), &Oscillation::single(order, 1.0), 1e-10)?;
    let zp = cv.zero_partition.value;
    let er = cv.eps_regularized.value;
    let worst = (zp - er).abs().max((zp - 1.0).abs()).max((er - 1.0).abs());
    Ok(Measure::at_most(worst, 1e-8, format!("int J_{order} = 1 by both methods")))
}

fn benchmark_j0(_: &mut ChaCha8Rng) -> Result<Measure> {
    benchmark(0)
}

fn benchmark_j1(_: &mut ChaCha8Rng) -> Result<Measure> {
    benchmark(1)
}

/// Least-squares slope of `ln |icm0|` against `k^2` for the trapped ground state.
pub fn gaussian_slope(alpha: f64, points: usize) -> Result<f64> {
    let g = CenterOfMassState::trapped(0, 0, alpha, 0.0)?;
    let mut xs = Vec::with_capacity(points);
    let mut ys = Vec::with_capacity(points);
    for i in 0..points {
        let k = (0.5 + 2.5 * i as f64 / (points - 1) as f64) / alpha;
        let out = CenterOfMassState::trapped(0, 0, alpha, -0.3)?;
        let c = icm0(&g, &out, k, 0.3, 0)?;
        xs.push(k * k);
        ys.push(c.value.norm().ln());
    }
    let n = points as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

fn gaussian_suppression(_: &mut ChaCha8Rng) -> Result<Measure> {
    let alpha = 1.3;
    let slope = gaussian_slope(alpha, 26)?;
    let expected = -alpha * alpha / 4.0;
    Ok(Measure::at_most(((slope - expected) / expected).abs(), 1e-2, "relative slope error, k alpha in [0.5, 3]"))
}

fn vortex_convergence(_: &mut ChaCha8Rng) -> Result<Measure> {
    let mut worst: f64 = 0.0;
    for x in [0.5, 1.0, 2.0f64] {
        let alpha = 1.0;
        let k = 2.0 * x.sqrt() / alpha;
        for (n_bar, m, n) in [(0, 0, 0), (1, 1, 0), (2, 2, 1), (1, 3, 2), (3, 2, 2)] {
            let r = ho_vortex_integral(n_bar, alpha, k, m, n)?;
            let q = r.quadrature.value;
            worst = worst.max((r.series.value - q).abs() / q.abs().max(f64::MIN_POSITIVE));
        }
    }
    Ok(Measure::at_most(worst, 1e-8, "series vs quadrature at k^2 alpha^2 / 4 in {0.5, 1, 2}"))
}

fn hermitian(_: &mut ChaCha8Rng) -> Result<Measure> {
    let (k, kz) = (0.7, 0.5);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for kind in [ModeKind::TE, ModeKind::TM] {
        for m in [-2, 0, 1, 3] {
            let mode = ModeSpec::new(kind, m, k, kz)?;
            for p_in in -1..=1 {
                let int_in = InternalState::hydrogen_2p(p_in)?;
                let int_out = InternalState::hydrogen_1s();
                let l = m - p_in;
                let cm_in = CenterOfMassState::trapped(1, 1, 1.3, 0.4)?;
                let cm_out = CenterOfMassState::trapped(1 - l, 0, 1.3, 0.4 - kz)?;
                let fwd = DipoleCoupling { charge: -1.0, energy_gap: 0.375 };
                let back = DipoleCoupling { charge: -1.0, energy_gap: -0.375 };
                let em = dipole_amplitude(&mode, &cm_in, &cm_out, &int_in, &int_out, &fwd)?;
                let ab = dipole_absorption_amplitude(&mode, &cm_out, &cm_in, &int_out, &int_in, &back)?;
                if em.len() != ab.len() {
                    return Ok(Measure::at_most(f64::INFINITY, 1e-12, "channel sets differ"));
                }
                for (e, a) in em.iter().zip(&ab) {
                    count += 1;
                    worst = worst.max((e.amplitude - a.amplitude.conj()).norm() / e.amplitude.norm());
                }
            }
        }
    }
    Ok(Measure::at_most(worst, 1e-12, format!("emission vs conjugate absorption, {count} channels")))
}

fn bessel_recurrence(rng: &mut ChaCha8Rng) -> Result<Measure> {
    let mut worst: f64 = 0.0;
    for _ in 0..500 {
        let n = rng.gen_range(1..=20);
        let x = rng.gen_range(0.1..60.0);
        let (a, b, c) = (bessel_j_int(n - 1, x), bessel_j_int(n + 1, x), 2.0 * n as f64 / x * bessel_j_int(n, x));
        let scale = a.abs().max(b.abs()).max(c.abs());
        worst = worst.max((a + b - c).abs() / scale);
    }
    Ok(Measure::at_most(worst, 1e-12, "J_{n-1} + J_{n+1} = 2n/x J_n, 500 samples"))
}

const BATTERY: &[(&str, CheckFn)] = &[
    ("gauge.divergence_te", gauge_te),
    ("gauge.divergence_tm", gauge_tm),
    ("gauge.divergence_lr", gauge_lr),
    ("curl.te", curl_te),
    ("curl.tm", curl_tm),
    ("curl.lr", curl_lr),
    ("helmholtz.te", helmholtz_te),
    ("helmholtz.tm", helmholtz_tm),
    ("fields.transversality", transversality),
    ("lr.cross_overlap", lr_overlap),
    ("lr.limits", lr_limits),
    ("addition.gegenbauer", addition_general),
    ("addition.m0", addition_m0),
    ("addition.phase_expand", addition_phase),
    ("selection.dipole_spurious", selection_dipole_spurious),
    ("selection.dipole_missing", selection_dipole_missing),
    ("selection.quadrupole_spurious", selection_quadrupole_spurious),
    ("selection.quadrupole_missing", selection_quadrupole_missing),
    ("selection.spin_spurious", selection_spin_spurious),
    ("selection.spin_missing", selection_spin_missing),
    ("selection.conservation", selection_conservation),
    ("cutoff.outside_cone", cutoff_outside),
    ("cutoff.inside_cone", cutoff_inside),
    ("quadrature.benchmark_j0", benchmark_j0),
    ("quadrature.benchmark_j1", benchmark_j1),
    ("gaussian.slope", gaussian_suppression),
    ("vortex.series_convergence", vortex_convergence),
    ("amplitude.hermitian", hermitian),
    ("specfun.bessel_recurrence", bessel_recurrence),
];

/// One row of the closed-form discrepancy report.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateRow {
    pub form: &'static str,
    pub point: String,
    pub candidate: f64,
    pub oracle: f64,
    /// Independent second evaluation backing the oracle value.
    pub second: f64,
    /// `|first - second|` divided by the allowance it must stay within.
    pub agreement: f64,
}

impl CandidateRow {
    pub fn discrepancy(&self) -> f64 {
        (self.candidate - self.oracle).abs() / self.oracle.abs().max(f64::MIN_POSITIVE)
    }
}

const LAGUERRE_POINTS: [(i32, u32, i32, u32, f64, f64); 10] = [
    (1, 0, -1, 1, 1.1, 0.9),
    (2, 1, 0, 0, 1.1, 0.9),
    (0, 2, -2, 1, 1.0, 1.5),
    (1, 1, -2, 0, 0.8, 2.0),
    (0, 0, 0, 0, 1.0, 1.0),
    (0, 1, 0, 0, 1.2, 0.7),
    (3, 0, -1, 0, 1.0, 1.2),
    (-1, 1, 2, 1, 0.9, 1.1),
    (2, 2, -1, 1, 1.3, 0.6),
    (0, 0, -3, 2, 1.0, 2.5),
];

const VORTEX_POINTS: [(u32, f64, f64, u32, u32); 10] = [
    (0, 1.0, 1.0, 0, 0),
    (1, 1.0, 1.2, 1, 0),
    (0, 1.0, 2.0, 2, 1),
    (2, 0.8, 1.5, 2, 2),
    (1, 1.2, 2.0, 3, 1),
    (0, 1.0, 2.83, 1, 1),
    (3, 0.9, 1.0, 2, 0),
    (1, 1.0, 2.0, 0, 0),
    (2, 1.1, 2.5, 3, 2),
    (0, 1.0, 1.41, 4, 2),
];

fn inside_cone_row(p: (f64, f64, f64, i32, i32, u32)) -> Result<CandidateRow> {
    let (k, k_r, k_out, m, m_r, n) = p;
    let r = triple_bessel(k, k_r, k_out, m, m_r, n)?;
    let er = r.eps_regularized.expect("inside the cone both methods run");
    let zp = r.zero_partition;
    let floor = (64.0 * f64::EPSILON * r.partial_scale).max(TRIPLE_TOL);
    let allowed = 3.0 * (zp.abs_error_estimate + er.abs_error_estimate) + floor;
    Ok(CandidateRow {
        form: "inside_cone_series",
        point: format!("k={k} k_R={k_r} k_R'={k_out} m={m} m_R={m_r} n={n}"),
        candidate: r.candidate.unwrap_or(f64::NAN),
        oracle: r.value,
        second: er.value,
        agreement: (zp.value - er.value).abs() / allowed,
    })
}

fn laguerre_row(p: (i32, u32, i32, u32, f64, f64)) -> Result<CandidateRow> {
    let (m_in, nb_in, m_out, nb_out, alpha, k) = p;
    let a = CenterOfMassState::trapped(m_in, nb_in, alpha, 0.0)?;
    let b = CenterOfMassState::trapped(m_out, nb_out, alpha, 0.0)?;
    let c = icm0(&a, &b, k, 0.0, m_in - m_out)?;
    let closed = c.closed_form.unwrap_or(f64::NAN);
    let allowed = 1e-10 * c.value.re.abs().max(1e-12);
    Ok(CandidateRow {
        form: "laguerre_gauss",
        point: format!("m={m_in} n={nb_in} -> m'={m_out} n'={nb_out} alpha={alpha} k={k}"),
        candidate: c.candidate.unwrap_or(f64::NAN),
        oracle: c.value.re,
        second: closed,
        agreement: (c.value.re - closed).abs() / allowed,
    })
}

fn vortex_row(p: (u32, f64, f64, u32, u32)) -> Result<CandidateRow> {
    let (n_bar, alpha, k, m, n) = p;
    let r = ho_vortex_integral(n_bar, alpha, k, m, n)?;
    let allowed = 1e-8 * r.quadrature.value.abs().max(1e-12);
    Ok(CandidateRow {
        form: "vortex_series",
        point: format!("n_bar={n_bar} alpha={alpha} k={k} m={m} n={n}"),
        candidate: r.candidate,
        oracle: r.series.value,
        second: r.quadrature.value,
        agreement: (r.series.value - r.quadrature.value).abs() / allowed,
    })
}

pub fn candidate_report() -> Vec<Result<CandidateRow>> {
    let mut jobs: Vec<Box<dyn Fn() -> Result<CandidateRow> + Send + Sync>> = Vec::new();
    for p in INSIDE {
        jobs.push(Box::new(move || inside_cone_row(p)));
    }
    for p in LAGUERRE_POINTS {
        jobs.push(Box::new(move || laguerre_row(p)));
    }
    for p in VORTEX_POINTS {
        jobs.push(Box::new(move || vortex_row(p)));
    }
    jobs.par_iter().map(|j| j()).collect()
}

fn candidate_outcomes(rows: &[Result<CandidateRow>]) -> Vec<Outcome> {
    let errors: Vec<String> = rows.iter().filter_map(|r| r.as_ref().err().map(|e| e.to_string())).collect();
    let generated = rows.len() - errors.len();
    let report = Outcome {
        name: "candidates.report".into(),
        result: Ok(Measure::at_least(generated as f64, 30.0, "rows evaluated, 10 per closed form")),
    };
    let consistency = Outcome {
        name: "candidates.oracle_consistency".into(),
        result: if let Some(e) = errors.first() {
            Err(e.clone())
        } else {
            let worst = rows.iter().flatten().map(|r| r.agreement).fold(0.0, f64::max);
            Ok(Measure::at_most(worst, 1.0, "dual-method difference over its allowance"))
        },
    };
    vec![report, consistency]
}

pub fn write_candidate_table<W: Write>(rows: &[Result<CandidateRow>], mut out: W) -> std::io::Result<()> {
    writeln!(out, "candidate discrepancy table (candidate closed form vs oracle)")?;
    writeln!(out, "form,point,candidate,oracle,second_method,rel_discrepancy,method_agreement")?;
    for r in rows {
        match r {
            Ok(r) => writeln!(
                out,
                "{},\"{}\",{},{},{},{},{}",
                r.form,
                r.point,
                format_real(r.candidate),
                format_real(r.oracle),
                format_real(r.second),
                format_real(r.discrepancy()),
                format_real(r.agreement)
            )?,
            Err(e) => writeln!(out, "error,\"{e}\",NaN,NaN,NaN,NaN,NaN")?,
        }
    }
    Ok(())
}

fn selected(name: &str, only: Option<&str>) -> bool {
    only.is_none_or(|f| name.contains(f))
}

/// Runs the battery and writes the report; returns the outcomes in order.
pub fn run<W: Write>(only: Option<&str>, seed: u64, jobs: usize, mut out: W) -> CliResult<Vec<Outcome>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {jobs} workers: {e}")))?;
    let chosen: Vec<(usize, &(&str, CheckFn))> =
        BATTERY.iter().enumerate().filter(|(_, (name, _))| selected(name, only)).collect();
    let wants_candidates = selected("candidates.report", only) || selected("candidates.oracle_consistency", only);
    if chosen.is_empty() && !wants_candidates {
        return Err(CliError::Usage(format!("no invariant matches {:?}", only.unwrap_or(""))));
    }
    let (mut outcomes, candidates) = pool.install(|| {
        let outcomes: Vec<Outcome> = chosen
            .par_iter()
            .map(|&(index, &(name, check))| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(index as u64);
                log::debug!("running {name}");
                Outcome { name: name.to_string(), result: check(&mut rng).map_err(|e| e.to_string()) }
            })
            .collect();
        let candidates = wants_candidates.then(candidate_report);
        (outcomes, candidates)
    });
    if let Some(rows) = &candidates {
        outcomes.extend(candidate_outcomes(rows).into_iter().filter(|o| selected(&o.name, only)));
    }
    let io = |e| CliError::io("stdout", e);
    for o in &outcomes {
        writeln!(out, "{}", o.line()).map_err(io)?;
    }
    if let Some(rows) = &candidates {
        writeln!(out).map_err(io)?;
        write_candidate_table(rows, &mut out).map_err(io)?;
    }
    let failed = outcomes.iter().filter(|o| !o.passed()).count();
    writeln!(out, "\n{} invariants, {} passed, {} failed", outcomes.len(), outcomes.len() - failed, failed)
        .map_err(io)?;
    Ok(outcomes)
}
