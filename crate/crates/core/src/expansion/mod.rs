//! Cylindrical addition theorems for `psi_m` evaluated at a displaced
//! transverse point `rho = R - q`.
//!
//! `psi_shifted` combines the Gegenbauer expansion of `J_m(k rho)/(k rho)^m`
//! with the exact binomial expansion of `e^{i m phi_rho}`; the truncated
//! forms used by the multipole analysis live next to it.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::{bessel_j_int, bessel_ratio, binomial, factorial, gegenbauer_weights, SeriesResult, TERM_CAP};


/// A transverse vector in polar form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanarVec {
    pub r: f64,
    pub phi: f64,
}

impl std::ops::Sub for PlanarVec {
    type Output = PlanarVec;

    fn sub(self, other: PlanarVec) -> PlanarVec {
        let (ax, ay) = self.to_xy();
        let (bx, by) = other.to_xy();
        PlanarVec::from_xy(ax - bx, ay - by)
    }
}

impl PlanarVec {
    pub fn new(r: f64, phi: f64) -> Result<Self> {
        if !(r >= 0.0) || !r.is_finite() || !phi.is_finite() {
            return Err(Error::InvalidArgument(format!("planar vector needs finite r >= 0, got ({r}, {phi})")));
        }
        Ok(PlanarVec { r, phi })
    }

    pub fn from_xy(x: f64, y: f64) -> Self {
        PlanarVec { r: x.hypot(y), phi: y.atan2(x) }
    }

    pub fn to_xy(self) -> (f64, f64) {
        (self.r * self.phi.cos(), self.r * self.phi.sin())
    }

    pub fn scale(self, factor: f64) -> PlanarVec {
        if factor >= 0.0 {
            PlanarVec { r: self.r * factor, phi: self.phi }
        } else {
            PlanarVec { r: -self.r * factor, phi: self.phi + std::f64::consts::PI }
        }
    }

    fn check(&self, name: &str) -> Result<()> {
        PlanarVec::new(self.r, self.phi).map(|_| ()).map_err(|e| Error::InvalidArgument(format!("{name}: {e}")))
    }
}

/// One `(n, v, s)` contribution to the shifted-`psi_m` series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpansionTerm {
    pub n: u32,
    pub v: u32,
    pub s: u32,
    pub value: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShiftedPsi {
    pub series: SeriesResult<Complex64>,
    pub terms: Vec<ExpansionTerm>,
}

/// Truncation order beyond which `J_{l+v}` of the smaller argument decays
/// exponentially.
pub fn default_v_max(k_perp: f64, big: PlanarVec, small: PlanarVec) -> usize {
    (k_perp * big.r.min(small.r)).ceil() as usize + 40
}

fn check_k(k_perp: f64) -> Result<()> {
    if !(k_perp > 0.0) || !k_perp.is_finite() {
        return Err(Error::InvalidArgument(format!("k_perp must be finite and > 0, got {k_perp}")));
    }
    Ok(())
}

fn check_v_max(v_max: usize) -> Result<()> {
    if v_max >= TERM_CAP {
        return Err(Error::InvalidArgument(format!("v_max {v_max} exceeds the term cap {TERM_CAP}")));
    }
    Ok(())
}

/// `2^l (l-1)! (l+v) [J_{l+v}(kR)/(kR)^l] [J_{l+v}(kq)/(kq)^l]`.
fn radial_weight(l: u32, v: u32, kr: f64, kq: f64) -> f64 {
    let pref = 2f64.powi(l as i32) * factorial(l - 1) * (l + v) as f64;
    pref * (bessel_ratio(l + v, kr, l) * bessel_ratio(l + v, kq, l))
}

/// Upper bound on the magnitude of the `v` term, all `s` together.
fn gegenbauer_bound(l: u32, v: u32, kr: f64, kq: f64) -> f64 {
    // C_v^l(1) = (2l)_v / v!
    let mut c1 = 1.0;
    for j in 0..v {
        c1 *= (2.0 * l as f64 + j as f64) / (j as f64 + 1.0);
    }
    radial_weight(l, v, kr, kq).abs() * c1
}

/// Partial Gegenbauer sum for `J_l(k rho)/(k rho)^l`, `rho = |R - q|`.
pub fn gegenbauer_expand(l: u32, k_perp: f64, big: PlanarVec, small: PlanarVec, v_max: usize) -> Result<SeriesResult> {
    if l == 0 {
        return Err(Error::InvalidArgument("gegenbauer expansion needs l >= 1".into()));
    }
    check_k(k_perp)?;
    check_v_max(v_max)?;
    big.check("R")?;
    small.check("q")?;
    if big.r == 0.0 || small.r == 0.0 {
        return Err(Error::InvalidArgument("gegenbauer expansion needs R > 0 and q > 0".into()));
    }
    let (kr, kq) = (k_perp * big.r, k_perp * small.r);
    let dphi = big.phi - small.phi;
    let mut sum = 0.0;
    for v in 0..=v_max as u32 {
        let weight = radial_weight(l, v, kr, kq);
        let c: f64 = gegenbauer_weights(l, v)?
            .iter()
            .enumerate()
            .map(|(s, w)| w * ((v as f64 - 2.0 * s as f64) * dphi).cos())
            .sum();
        sum += weight * c;
    }
    Ok(SeriesResult {
        value: sum,
        terms_used: v_max + 1,
        truncation_estimate: 2.0 * gegenbauer_bound(l, v_max as u32 + 1, kr, kq),
    })
}

/// `(-1)^n C(m,n) (kR)^{m-n} (kq)^n e^{i((m-n) phi_R + n phi_q)}`.
fn binomial_phase(m: u32, n: u32, kr: f64, kq: f64, phi_r: f64, phi_q: f64) -> Complex64 {
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let mag = sign * binomial(m, n) * kr.powi((m - n) as i32) * kq.powi(n as i32);
    Complex64::from_polar(1.0, (m - n) as f64 * phi_r + n as f64 * phi_q) * mag
}

/// Exact binomial expansion of `e^{i m phi_rho}` for `rho = R - q`.
pub fn phase_expand(m: u32, k_perp: f64, big: PlanarVec, small: PlanarVec) -> Result<Complex64> {
    check_k(k_perp)?;
    big.check("R")?;
    small.check("q")?;
    let rho = (big - small).r;
    if !(rho > 1e-14 * big.r.max(small.r)) || rho == 0.0 {
        return Err(Error::SingularConfiguration("R - q vanishes; the phase is undefined".into()));
    }
    // The finite sum is the binomial expansion of ((Z_R - Z_q) / rho)^m with
    // Z the complex transverse positions; evaluating it in factored form
    // avoids the cancellation between terms of size ((R + q)/rho)^m.
    let (ax, ay) = big.to_xy();
    let (bx, by) = small.to_xy();
    let unit = Complex64::new(ax - bx, ay - by) / rho;
    Ok(unit.powu(m))
}

fn reflect(m: i32, value: Complex64) -> Complex64 {
    // psi_{-L} = (-1)^L conj(psi_L)
    let c = value.conj();
    if m.unsigned_abs() % 2 == 1 {
        -c
    } else {
        c
    }
}

/// `psi_m(R - q) = J_m(k rho) e^{i m phi_rho}` through the addition theorem.
/// `v_max = None` selects [`default_v_max`].
pub fn psi_shifted(m: i32, k_perp: f64, big: PlanarVec, small: PlanarVec, v_max: Option<usize>) -> Result<ShiftedPsi> {
    check_k(k_perp)?;
    big.check("R")?;
    small.check("q")?;
    let v_max = v_max.unwrap_or_else(|| default_v_max(k_perp, big, small));
    check_v_max(v_max)?;
    let l = m.unsigned_abs();
    let (kr, kq) = (k_perp * big.r, k_perp * small.r);
    let dphi = big.phi - small.phi;
    let mut terms = Vec::new();
    let truncation_estimate = if l == 0 {
        for v in 0..=v_max as u32 {
            let mult = if v == 0 { 1.0 } else { 2.0 };
            let val = mult * bessel_j_int(v as i32, kr) * bessel_j_int(v as i32, kq) * (v as f64 * dphi).cos();
            terms.push(ExpansionTerm { n: 0, v, s: 0, value: Complex64::new(val, 0.0) });
        }
        let next = v_max as i32 + 1;
        4.0 * (bessel_j_int(next, kr) * bessel_j_int(next, kq)).abs()
    } else {
        let phases: Vec<Complex64> = (0..=l).map(|n| binomial_phase(l, n, kr, kq, big.phi, small.phi)).collect();
        for v in 0..=v_max as u32 {
            let weight = radial_weight(l, v, kr, kq);
            for (s, w) in gegenbauer_weights(l, v)?.iter().enumerate() {
                let gv = weight * w * ((v as f64 - 2.0 * s as f64) * dphi).cos();
                for (n, ph) in phases.iter().enumerate() {
                    terms.push(ExpansionTerm { n: n as u32, v, s: s as u32, value: ph * gv });
                }
            }
        }
        2.0 * gegenbauer_bound(l, v_max as u32 + 1, kr, kq) * (kr + kq).powi(l as i32)
    };
    if m < 0 {
        for t in terms.iter_mut() {
            t.value = reflect(m, t.value);
        }
    }
    let value: Complex64 = terms.iter().map(|t| t.value).sum();
    Ok(ShiftedPsi { series: SeriesResult { value, terms_used: v_max + 1, truncation_estimate }, terms })
}

/// Leading `v = 0` truncation of [`psi_shifted`] (spatial part only).
pub fn centered_cm_approx(m: i32, k_perp: f64, big: PlanarVec, small: PlanarVec) -> Result<Complex64> {
    check_k(k_perp)?;
    big.check("R")?;
    small.check("q")?;
    let l = m.unsigned_abs();
    if l == 0 {
        return Ok(Complex64::new(bessel_j_int(0, k_perp * big.r), 0.0));
    }
    if big.r == 0.0 {
        if small.r == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        return Err(Error::SingularConfiguration("(q/R)^n with R = 0 and n >= 1".into()));
    }
    let ratio = small.r / big.r;
    let sum: Complex64 = (0..=l).map(|n| binomial_phase(l, n, 1.0, ratio, big.phi, small.phi)).sum();
    let value = sum * bessel_j_int(l as i32, k_perp * big.r);
    Ok(if m < 0 { reflect(m, value) } else { value })
}

/// `J_{m+v}(x)/x^m = (x/2)^v 2^{-m} sum_t (-1)^t (x/2)^{2t} / (t! (m+v+t)!)`.
pub fn small_arg_ratio(m: u32, v: u32, x: f64, tol: f64) -> Result<SeriesResult> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::InvalidArgument(format!("argument must be finite and >= 0, got {x}")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be > 0, got {tol}")));
    }
    let half = 0.5 * x;
    let mut lead = 0.5f64.powi(m as i32);
    for j in 1..=v {
        lead *= half / j as f64;
    }
    for j in (v + 1)..=(m + v) {
        lead /= j as f64;
    }
    let q = -half * half;
    let mut term = lead;
    let mut sum = lead;
    let monotone_from = 0.25 * x * x;
    for t in 1..TERM_CAP {
        term *= q / (t as f64 * (m + v + t as u32) as f64);
        sum += term;
        let next = term.abs() * half * half / ((t + 1) as f64 * (m + v + t as u32 + 1) as f64);
        if (t as f64) > monotone_from && next <= tol * sum.abs() {
            return Ok(SeriesResult { value: sum, terms_used: t + 1, truncation_estimate: next });
        }
        if term == 0.0 {
            return Ok(SeriesResult { value: sum, terms_used: t + 1, truncation_estimate: 0.0 });
        }
    }
    Err(Error::ConvergenceFailure { terms: TERM_CAP, partial_sum: sum })
}

/// First-order expansion in `k_perp r` of the two-particle bracket
/// `(mu/M_e) psi_m(R + (mu/M_e) r) - (mu/M_N) psi_m(R - (mu/M_N) r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadrupoleExpansion {
    /// `n = 0`, zeroth order in `k_perp r`.
    pub dipole: Complex64,
    /// `n = 0`, first order in `k_perp r` (the `J_{m+1}` gradient term).
    pub gradient: Complex64,
    /// All `n >= 1` terms of the binomial phase series.
    pub vortex: Complex64,
}

impl QuadrupoleExpansion {
    pub fn total(&self) -> Complex64 {
        self.dipole + self.gradient + self.vortex
    }
}

fn check_mass_ratios(mass_ratio_e: f64, mass_ratio_n: f64) -> Result<()> {
    if !(mass_ratio_e > 0.0 && mass_ratio_e <= 1.0) {
        return Err(Error::InvalidArgument(format!("mu/M_e must lie in (0, 1], got {mass_ratio_e}")));
    }
    if !(0.0..1.0).contains(&mass_ratio_n) {
        return Err(Error::InvalidArgument(format!("mu/M_N must lie in [0, 1), got {mass_ratio_n}")));
    }
    Ok(())
}

pub fn quadrupole_expand(
    m: i32,
    k_perp: f64,
    big: PlanarVec,
    rel: PlanarVec,
    mass_ratio_e: f64,
    mass_ratio_n: f64,
) -> Result<QuadrupoleExpansion> {
    check_k(k_perp)?;
    big.check("R")?;
    rel.check("r")?;
    check_mass_ratios(mass_ratio_e, mass_ratio_n)?;
    let l = m.unsigned_abs();
    let zero = Complex64::new(0.0, 0.0);
    if big.r == 0.0 && l > 0 {
        if rel.r == 0.0 {
            return Ok(QuadrupoleExpansion { dipole: zero, gradient: zero, vortex: zero });
        }
        return Err(Error::SingularConfiguration("(r/R)^n with R = 0 and n >= 1".into()));
    }
    let kr = k_perp * big.r;
    let j_m = bessel_j_int(l as i32, kr);
    let j_m1 = bessel_j_int(l as i32 + 1, kr);
    let kx = k_perp * rel.r * (big.phi - rel.phi).cos();
    let mut out = QuadrupoleExpansion { dipole: zero, gradient: zero, vortex: zero };
    // (weight, displacement factor): R + eps r
    for (w, eps) in [(mass_ratio_e, mass_ratio_e), (-mass_ratio_n, -mass_ratio_n)] {
        if w == 0.0 {
            continue;
        }
        let radial = [j_m, -eps * kx * j_m1];
        for n in 0..=l {
            let mag = if n == 0 { 1.0 } else { binomial(l, n) * (eps * rel.r / big.r).powi(n as i32) };
            let phase = Complex64::from_polar(mag, (l - n) as f64 * big.phi + n as f64 * rel.phi);
            if n == 0 {
                out.dipole += phase * (w * radial[0]);
                out.gradient += phase * (w * radial[1]);
            } else {
                out.vortex += phase * (w * (radial[0] + radial[1]));
            }
        }
    }
    if m < 0 {
        out.dipole = reflect(m, out.dipole);
        out.gradient = reflect(m, out.gradient);
        out.vortex = reflect(m, out.vortex);
    }
    Ok(out)
}

/// The bracket expansion in the form printed alongside the quadrupole
/// analysis, kept as a candidate for comparison with [`quadrupole_expand`].
pub fn quadrupole_expand_printed(
    m: i32,
    k_perp: f64,
    big: PlanarVec,
    rel: PlanarVec,
    mass_ratio_e: f64,
    mass_ratio_n: f64,
) -> Result<Complex64> {
    check_k(k_perp)?;
    check_mass_ratios(mass_ratio_e, mass_ratio_n)?;
    let l = m.unsigned_abs();
    if big.r == 0.0 && l > 0 && rel.r > 0.0 {
        return Err(Error::SingularConfiguration("(r/R)^n with R = 0 and n >= 1".into()));
    }
    let kr = k_perp * big.r;
    let j_m = bessel_j_int(l as i32, kr);
    let j_m1 = bessel_j_int(l as i32 + 1, kr);
    let kx = k_perp * rel.r * (big.phi - rel.phi).cos();
    let lead = Complex64::from_polar(1.0, l as f64 * big.phi);
    let mut value = lead * (j_m + mass_ratio_e * mass_ratio_e * kx * j_m1);
    if l > 0 && big.r > 0.0 {
        let vortex: Complex64 = (1..=l)
            .map(|n| {
                Complex64::from_polar(
                    binomial(l, n) * (rel.r / big.r).powi(n as i32),
                    (l - n) as f64 * big.phi + n as f64 * rel.phi,
                )
            })
            .sum();
        value += vortex * mass_ratio_e * (j_m + mass_ratio_e * j_m1 * kx);
    }
    Ok(if m < 0 { reflect(m, value) } else { value })
}

/// Double-binomial truncation of `psi_{m1}(k1; R + eps r) psi_{m2}(k2; R + eps r)`
/// (spatial part), where `eps = mass_ratio`.
pub fn product_expand(
    m1: i32,
    m2: i32,
    k1: f64,
    k2: f64,
    big: PlanarVec,
    rel: PlanarVec,
    mass_ratio: f64,
) -> Result<Complex64> {
    check_k(k1)?;
    check_k(k2)?;
    big.check("R")?;
    rel.check("r")?;
    if !mass_ratio.is_finite() {
        return Err(Error::InvalidArgument(format!("mass ratio must be finite, got {mass_ratio}")));
    }
    let (l1, l2) = (m1.unsigned_abs(), m2.unsigned_abs());
    let displaced = rel.r * mass_ratio != 0.0;
    if big.r == 0.0 && displaced && l1 + l2 > 0 {
        return Err(Error::SingularConfiguration("(r/R)^(n+n') with R = 0 and n + n' >= 1".into()));
    }
    let lead = bessel_j_int(l1 as i32, k1 * big.r) * bessel_j_int(l2 as i32, k2 * big.r);
    let ratio = if big.r == 0.0 { 0.0 } else { mass_ratio * rel.r / big.r };
    // Each factor is sum_n C(l, n) (eps r/R)^n e^{i((l-n) phi_R + n phi_r)}.
    let mut double = Complex64::new(0.0, 0.0);
    let f1: Vec<Complex64> = (0..=l1).map(|n| term_of(l1, m1, n, ratio, big.phi, rel.phi)).collect();
    let f2: Vec<Complex64> = (0..=l2).map(|n| term_of(l2, m2, n, ratio, big.phi, rel.phi)).collect();
    for a in &f1 {
        for b in &f2 {
            double += a * b;
        }
    }
    Ok(double * lead)
}

/// Single `n` term of one binomial factor in [`product_expand`].
fn term_of(l: u32, m: i32, n: u32, ratio: f64, phi_r: f64, phi_rel: f64) -> Complex64 {
    let mag = if n == 0 { 1.0 } else { binomial(l, n) * ratio.powi(n as i32) };
    let t = Complex64::from_polar(mag, (l - n) as f64 * phi_r + n as f64 * phi_rel);
    if m < 0 {
        reflect(m, t)
    } else {
        t
    }
}
