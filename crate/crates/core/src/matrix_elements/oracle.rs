//! Brute-force azimuthal Fourier analysis of emission integrands.
//!
//! The integrands are sampled from the field module on a periodic
//! trapezoid grid in `phi_R` (and `phi_r`), with no use of the selection
//! bookkeeping, so the non-vanishing Fourier coefficients give an
//! independent check of [`symbolic_channels`](super::symbolic_channels).

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fields::{magnetic_field, vector_potential, CylPoint, FieldSample, ModeSpec};

/// Trapezoid points per azimuthal angle.
pub const GRID: usize = 256;

/// `(delta_m_cm, delta_m_r, delta_spin_e)` channel key.
pub type ChannelKey = (i32, i32, i32);

#[derive(Debug, Clone)]
pub struct AzimuthalSpectrum {
    pub coefficients: BTreeMap<ChannelKey, Complex64>,
    pub scale: f64,
}

impl AzimuthalSpectrum {
    fn from_map(coefficients: BTreeMap<ChannelKey, Complex64>) -> Self {
        let scale = coefficients.values().map(|c| c.norm()).fold(0.0, f64::max);
        AzimuthalSpectrum { coefficients, scale }
    }

    /// Keys whose coefficient exceeds `rel_threshold * scale`.
    pub fn nonzero(&self, rel_threshold: f64) -> BTreeSet<ChannelKey> {
        self.coefficients.iter().filter(|(_, c)| c.norm() > rel_threshold * self.scale).map(|(k, _)| *k).collect()
    }

    /// Largest coefficient magnitude outside `keys`, relative to the scale.
    pub fn largest_outside(&self, keys: &BTreeSet<ChannelKey>) -> f64 {
        let worst =
            self.coefficients.iter().filter(|(k, _)| !keys.contains(k)).map(|(_, c)| c.norm()).fold(0.0, f64::max);
        if self.scale > 0.0 {
            worst / self.scale
        } else {
            0.0
        }
    }

    /// Smallest coefficient magnitude inside `keys`, relative to the scale.
    pub fn smallest_inside(&self, keys: &BTreeSet<ChannelKey>) -> f64 {
        let best =
            keys.iter().map(|k| self.coefficients.get(k).map_or(0.0, |c| c.norm())).fold(f64::INFINITY, f64::min);
        if self.scale > 0.0 {
            best / self.scale
        } else {
            0.0
        }
    }
}

fn angle(j: usize) -> f64 {
    2.0 * PI * j as f64 / GRID as f64
}

fn conj_sample(s: FieldSample) -> [Complex64; 3] {
    [s.x.conj(), s.y.conj(), s.z.conj()]
}

fn unit_r(theta: f64, phi: f64) -> [f64; 3] {
    [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
}

fn check_window(window: i32) -> Result<()> {
    if !(0..=(GRID as i32 / 4)).contains(&window) {
        return Err(Error::InvalidArgument(format!("window must lie in 0..={}", GRID / 4)));
    }
    Ok(())
}

/// Double trapezoid transform of `g[i][j]` sampled at `(phi_R_i, phi_r_j)`.
fn transform(g: &[Vec<Complex64>], window: i32) -> BTreeMap<ChannelKey, Complex64> {
    let n = GRID as f64;
    let mut out = BTreeMap::new();
    for dr in -window..=window {
        // inner sum over phi_r for every phi_R row
        let rows: Vec<Complex64> = g
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .map(|(j, v)| v * Complex64::from_polar(1.0, -(dr as f64) * angle(j)))
                    .sum::<Complex64>()
            })
            .collect();
        for dm in -window..=window {
            let c: Complex64 =
                rows.iter().enumerate().map(|(i, v)| v * Complex64::from_polar(1.0, -(dm as f64) * angle(i))).sum();
            out.insert((dm, dr, 0), c / (n * n));
        }
    }
    out
}

/// Fourier coefficients of `A*(R) . r_hat` on the ring `|R| = rho`, with the
/// internal coordinate direction at polar angle `theta`.
pub fn dipole_spectrum(mode: &ModeSpec, rho: f64, theta: f64, window: i32) -> Result<AzimuthalSpectrum> {
    check_window(window)?;
    let a: Vec<[Complex64; 3]> = (0..GRID)
        .map(|i| vector_potential(mode, &CylPoint::new(rho, angle(i), 0.0, 0.0)?).map(conj_sample))
        .collect::<Result<_>>()?;
    let g: Vec<Vec<Complex64>> = a
        .iter()
        .map(|ai| {
            (0..GRID)
                .map(|j| {
                    let u = unit_r(theta, angle(j));
                    ai[0] * u[0] + ai[1] * u[1] + ai[2] * u[2]
                })
                .collect()
        })
        .collect();
    Ok(AzimuthalSpectrum::from_map(transform(&g, window)))
}

/// Fourier coefficients of the first-order term in `lambda` of
/// `A*(R + lambda r_perp) . r_hat`, obtained by Richardson-extrapolated
/// central differences with step `h`.
pub fn first_order_spectrum(mode: &ModeSpec, rho: f64, theta: f64, h: f64, window: i32) -> Result<AzimuthalSpectrum> {
    check_window(window)?;
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("step must be > 0, got {h}")));
    }
    let st = theta.sin();
    let eval = |phi_big: f64, phi_small: f64, lambda: f64| -> Result<Complex64> {
        let x = rho * phi_big.cos() + lambda * st * phi_small.cos();
        let y = rho * phi_big.sin() + lambda * st * phi_small.sin();
        let a = conj_sample(vector_potential(mode, &CylPoint::from_cartesian(x, y, 0.0))?);
        let u = unit_r(theta, phi_small);
        Ok(a[0] * u[0] + a[1] * u[1] + a[2] * u[2])
    };
    let mut g = vec![vec![Complex64::new(0.0, 0.0); GRID]; GRID];
    for (i, row) in g.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            let (pb, ps) = (angle(i), angle(j));
            let d1 = (eval(pb, ps, h)? - eval(pb, ps, -h)?) / (2.0 * h);
            let d2 = (eval(pb, ps, 0.5 * h)? - eval(pb, ps, -0.5 * h)?) / h;
            *cell = (4.0 * d2 - d1) / 3.0;
        }
    }
    Ok(AzimuthalSpectrum::from_map(transform(&g, window)))
}

/// Fourier coefficients in `phi_R` of the spin-operator weights of
/// `S . B*(R) = (S_+ (B*_x - i B*_y) + S_- (B*_x + i B*_y)) / 2 + S_z B*_z`.
pub fn spin_spectrum(mode: &ModeSpec, rho: f64, window: i32) -> Result<AzimuthalSpectrum> {
    check_window(window)?;
    let b: Vec<[Complex64; 3]> = (0..GRID)
        .map(|i| magnetic_field(mode, &CylPoint::new(rho, angle(i), 0.0, 0.0)?).map(conj_sample))
        .collect::<Result<_>>()?;
    let i = Complex64::new(0.0, 1.0);
    let mut out = BTreeMap::new();
    for delta_spin in [-1, 0, 1] {
        let weight = |v: &[Complex64; 3]| match delta_spin {
            1 => 0.5 * (v[0] - i * v[1]),
            -1 => 0.5 * (v[0] + i * v[1]),
            _ => v[2],
        };
        for dm in -window..=window {
            let c: Complex64 = b
                .iter()
                .enumerate()
                .map(|(j, v)| weight(v) * Complex64::from_polar(1.0, -(dm as f64) * angle(j)))
                .sum();
            out.insert((dm, 0, delta_spin), c / GRID as f64);
        }
    }
    Ok(AzimuthalSpectrum::from_map(out))
}
