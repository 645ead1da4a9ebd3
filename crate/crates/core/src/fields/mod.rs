//! TE/TM Bessel modes of the free electromagnetic field and their left and
//! right circularly polarized combinations.
//!
//! Units: `hbar = c = 1`. Cartesian components are returned throughout, with
//! the helical basis vectors `e_plus = e_x + i e_y` and `e_minus = e_x - i e_y`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::bessel_j_int;


const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModeKind {
    TE,
    TM,
    L,
    R,
}

impl std::str::FromStr for ModeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "TE" => Ok(ModeKind::TE),
            "TM" => Ok(ModeKind::TM),
            "L" => Ok(ModeKind::L),
            "R" => Ok(ModeKind::R),
            _ => Err(Error::InvalidArgument(format!("unknown mode kind {s:?}"))),
        }
    }
}

impl std::fmt::Display for ModeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ModeKind::TE => "TE",
            ModeKind::TM => "TM",
            ModeKind::L => "L",
            ModeKind::R => "R",
        };
        f.write_str(s)
    }
}

/// A Bessel mode `{k_perp, k_z, m}` of a given kind. For `L` and `R` the
/// order is the index of the circular mode, not of its TE/TM constituents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeSpec {
    pub kind: ModeKind,
    pub m: i32,
    pub k_perp: f64,
    pub k_z: f64,
}

impl ModeSpec {
    pub fn new(kind: ModeKind, m: i32, k_perp: f64, k_z: f64) -> Result<Self> {
        if !(k_perp > 0.0) || !k_perp.is_finite() {
            return Err(Error::InvalidArgument(format!("k_perp must be finite and > 0, got {k_perp}")));
        }
        if !k_z.is_finite() {
            return Err(Error::InvalidArgument(format!("k_z must be finite, got {k_z}")));
        }
        Ok(ModeSpec { kind, m, k_perp, k_z })
    }

    /// Dispersion relation of the free field.
    pub fn omega(&self) -> f64 {
        self.k_perp.hypot(self.k_z)
    }

    pub fn check(&self) -> Result<()> {
        ModeSpec::new(self.kind, self.m, self.k_perp, self.k_z).map(|_| ())?;
        if matches!(self.kind, ModeKind::TE | ModeKind::TM) && self.k_z == 0.0 {
            return Err(Error::SingularNormalization(format!(
                "{} mode with k_z = 0: E0 vanishes while k_perp/k_z diverges",
                self.kind
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CylPoint {
    pub rho: f64,
    pub phi: f64,
    pub z: f64,
    pub t: f64,
}

impl CylPoint {
    pub fn new(rho: f64, phi: f64, z: f64, t: f64) -> Result<Self> {
        if !(rho >= 0.0) || ![rho, phi, z, t].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "point needs finite coordinates and rho >= 0, got ({rho}, {phi}, {z}, {t})"
            )));
        }
        Ok(CylPoint { rho, phi, z, t })
    }

    pub fn from_cartesian(x: f64, y: f64, z: f64) -> Self {
        CylPoint { rho: x.hypot(y), phi: y.atan2(x), z, t: 0.0 }
    }

    pub fn to_cartesian(&self) -> [f64; 3] {
        [self.rho * self.phi.cos(), self.rho * self.phi.sin(), self.z]
    }

    pub fn with_time(self, t: f64) -> Self {
        CylPoint { t, ..self }
    }
}

/// Cartesian components of a complex vector field value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldSample {
    pub x: Complex64,
    pub y: Complex64,
    pub z: Complex64,
}

impl FieldSample {
    pub fn to_array(self) -> [Complex64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_array(v: [Complex64; 3]) -> Self {
        FieldSample { x: v[0], y: v[1], z: v[2] }
    }

    pub fn norm(&self) -> f64 {
        (self.x.norm_sqr() + self.y.norm_sqr() + self.z.norm_sqr()).sqrt()
    }

    fn scale(self, c: Complex64) -> Self {
        FieldSample { x: self.x * c, y: self.y * c, z: self.z * c }
    }

    fn add(self, o: Self) -> Self {
        FieldSample { x: self.x + o.x, y: self.y + o.y, z: self.z + o.z }
    }
}

/// Circular mode written as `c_tm A^TM_{base_m} + c_te A^TE_{base_m}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TmTeDecomposition {
    pub c_tm: Complex64,
    pub c_te: Complex64,
    pub base_m: i32,
}

/// `J_m(k_perp rho) e^{i m phi}`.
pub fn psi(m: i32, k_perp: f64, rho: f64, phi: f64) -> Complex64 {
    let j = bessel_j_int(m, k_perp * rho);
    Complex64::from_polar(1.0, m as f64 * phi) * j
}

/// `sqrt(k_perp / 2 pi) |k_z| / omega`; zero for `k_z = 0`.
pub fn normalization_e0(k_perp: f64, k_z: f64) -> f64 {
    let omega = k_perp.hypot(k_z);
    if omega == 0.0 {
        return 0.0;
    }
    (k_perp / (2.0 * PI)).sqrt() * k_z.abs() / omega
}

/// `E0 / k_z`, finite at `k_z = 0` where the sign is taken as positive.
fn e0_over_kz(k_perp: f64, k_z: f64) -> f64 {
    let sign = if k_z < 0.0 { -1.0 } else { 1.0 };
    (k_perp / (2.0 * PI)).sqrt() * sign / k_perp.hypot(k_z)
}

/// `c_plus psi_{m-1} e_plus + c_minus psi_{m+1} e_minus + c_z psi_m e_z`
/// times the travelling phase.
struct Helical {
    c_plus: Complex64,
    c_minus: Complex64,
    c_z: Complex64,
}

impl Helical {
    fn evaluate(&self, m: i32, k_perp: f64, k_z: f64, p: &CylPoint) -> FieldSample {
        let omega = k_perp.hypot(k_z);
        let phase = Complex64::from_polar(1.0, k_z * p.z - omega * p.t);
        let lower = self.c_plus * psi(m - 1, k_perp, p.rho, p.phi);
        let upper = self.c_minus * psi(m + 1, k_perp, p.rho, p.phi);
        let axial = if self.c_z == Complex64::new(0.0, 0.0) {
            Complex64::new(0.0, 0.0)
        } else {
            self.c_z * psi(m, k_perp, p.rho, p.phi)
        };
        FieldSample { x: (lower + upper) * phase, y: I * (lower - upper) * phase, z: axial * phase }
    }
}

fn potential_coefficients(kind: ModeKind, k_perp: f64, k_z: f64) -> Helical {
    let omega = k_perp.hypot(k_z);
    let e0 = normalization_e0(k_perp, k_z);
    let ek = e0_over_kz(k_perp, k_z);
    match kind {
        ModeKind::TM => Helical {
            c_plus: Complex64::new(e0 / (2.0 * omega), 0.0),
            c_minus: Complex64::new(-e0 / (2.0 * omega), 0.0),
            c_z: Complex64::new(0.0, -k_perp * ek / omega),
        },
        ModeKind::TE => Helical {
            c_plus: Complex64::new(0.0, 0.5 * ek),
            c_minus: Complex64::new(0.0, 0.5 * ek),
            c_z: Complex64::new(0.0, 0.0),
        },
        ModeKind::L | ModeKind::R => unreachable!("circular modes are composed from TE and TM"),
    }
}

/// Magnetic coefficients obtained as the curl of the potential coefficients.
fn magnetic_coefficients(kind: ModeKind, k_perp: f64, k_z: f64) -> Helical {
    let omega = k_perp.hypot(k_z);
    let e0 = normalization_e0(k_perp, k_z);
    let ek = e0_over_kz(k_perp, k_z);
    match kind {
        ModeKind::TM => Helical {
            c_plus: Complex64::new(0.5 * omega * ek, 0.0),
            c_minus: Complex64::new(0.5 * omega * ek, 0.0),
            c_z: Complex64::new(0.0, 0.0),
        },
        ModeKind::TE => Helical {
            c_plus: Complex64::new(0.0, 0.5 * e0),
            c_minus: Complex64::new(0.0, -0.5 * e0),
            c_z: Complex64::new(k_perp * ek, 0.0),
        },
        ModeKind::L | ModeKind::R => unreachable!("circular modes are composed from TE and TM"),
    }
}

fn evaluate(mode: &ModeSpec, p: &CylPoint, coefficients: fn(ModeKind, f64, f64) -> Helical) -> Result<FieldSample> {
    mode.check()?;
    CylPoint::new(p.rho, p.phi, p.z, p.t)?;
    let sample = match mode.kind {
        ModeKind::TE | ModeKind::TM => {
            coefficients(mode.kind, mode.k_perp, mode.k_z).evaluate(mode.m, mode.k_perp, mode.k_z, p)
        }
        ModeKind::L | ModeKind::R => {
            let d = lr_decomposition(mode.kind, mode.m, mode.k_perp, mode.k_z)?;
            let tm = coefficients(ModeKind::TM, mode.k_perp, mode.k_z).evaluate(d.base_m, mode.k_perp, mode.k_z, p);
            let te = coefficients(ModeKind::TE, mode.k_perp, mode.k_z).evaluate(d.base_m, mode.k_perp, mode.k_z, p);
            tm.scale(d.c_tm).add(te.scale(d.c_te))
        }
    };
    for (name, v) in [("x", sample.x), ("y", sample.y), ("z", sample.z)] {
        crate::error::ensure_finite(name, v.re)?;
        crate::error::ensure_finite(name, v.im)?;
    }
    Ok(sample)
}

/// Helical content of a mode field about its carrier order `base_m`:
/// `plus psi_{base_m-1} e_plus + minus psi_{base_m+1} e_minus + axial psi_{base_m} e_z`,
/// times `e^{i(k_z z - omega t)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HelicalCoefficients {
    pub base_m: i32,
    pub plus: Complex64,
    pub minus: Complex64,
    pub axial: Complex64,
}

fn helical(mode: &ModeSpec, coefficients: fn(ModeKind, f64, f64) -> Helical) -> Result<HelicalCoefficients> {
    mode.check()?;
    match mode.kind {
        ModeKind::TE | ModeKind::TM => {
            let h = coefficients(mode.kind, mode.k_perp, mode.k_z);
            Ok(HelicalCoefficients { base_m: mode.m, plus: h.c_plus, minus: h.c_minus, axial: h.c_z })
        }
        ModeKind::L | ModeKind::R => {
            let d = lr_decomposition(mode.kind, mode.m, mode.k_perp, mode.k_z)?;
            let tm = coefficients(ModeKind::TM, mode.k_perp, mode.k_z);
            let te = coefficients(ModeKind::TE, mode.k_perp, mode.k_z);
            let mix = |a: Complex64, b: Complex64| {
                let v = d.c_tm * a + d.c_te * b;
                // the cancelling component leaves rounding residue only
                if v.norm() <= 1e-14 * (a.norm() + b.norm()) {
                    Complex64::new(0.0, 0.0)
                } else {
                    v
                }
            };
            Ok(HelicalCoefficients {
                base_m: d.base_m,
                plus: mix(tm.c_plus, te.c_plus),
                minus: mix(tm.c_minus, te.c_minus),
                axial: mix(tm.c_z, te.c_z),
            })
        }
    }
}

pub fn potential_helical(mode: &ModeSpec) -> Result<HelicalCoefficients> {
    helical(mode, potential_coefficients)
}

pub fn magnetic_helical(mode: &ModeSpec) -> Result<HelicalCoefficients> {
    helical(mode, magnetic_coefficients)
}

pub fn vector_potential(mode: &ModeSpec, p: &CylPoint) -> Result<FieldSample> {
    evaluate(mode, p, potential_coefficients)
}

/// `E = i omega A`.
pub fn electric_field(mode: &ModeSpec, p: &CylPoint) -> Result<FieldSample> {
    let a = vector_potential(mode, p)?;
    Ok(a.scale(Complex64::new(0.0, mode.omega())))
}

/// `B = curl A`, evaluated in closed form.
pub fn magnetic_field(mode: &ModeSpec, p: &CylPoint) -> Result<FieldSample> {
    evaluate(mode, p, magnetic_coefficients)
}

/// TE/TM content of an `L` or `R` mode of index `m`.
pub fn lr_decomposition(kind: ModeKind, m: i32, k_perp: f64, k_z: f64) -> Result<TmTeDecomposition> {
    ModeSpec::new(kind, m, k_perp, k_z)?;
    let x = k_z / k_perp.hypot(k_z);
    let a0 = (1.0 + x * x).sqrt() / 2.0;
    let c_tm = Complex64::new(a0, 0.0);
    match kind {
        ModeKind::L => Ok(TmTeDecomposition { c_tm, c_te: Complex64::new(0.0, -x * a0), base_m: m + 1 }),
        ModeKind::R => Ok(TmTeDecomposition { c_tm, c_te: Complex64::new(0.0, x * a0), base_m: m - 1 }),
        _ => Err(Error::InvalidArgument(format!("{kind} is not a circular mode"))),
    }
}

/// Inner product of two decompositions in the orthonormal TE/TM basis.
pub fn decomposition_inner(a: &TmTeDecomposition, b: &TmTeDecomposition) -> Complex64 {
    if a.base_m != b.base_m {
        return Complex64::new(0.0, 0.0);
    }
    a.c_tm * b.c_tm.conj() + a.c_te * b.c_te.conj()
}

/// Normalized overlap `<L_m, R_{m+2}> / (|L_m| |R_{m+2}|)`.
pub fn lr_cross_overlap(m: i32, k_perp: f64, k_z: f64) -> Result<f64> {
    let l = lr_decomposition(ModeKind::L, m, k_perp, k_z)?;
    let r = lr_decomposition(ModeKind::R, m + 2, k_perp, k_z)?;
    let overlap = decomposition_inner(&l, &r);
    let norm = (decomposition_inner(&l, &l).re * decomposition_inner(&r, &r).re).sqrt();
    Ok(overlap.re / norm)
}
