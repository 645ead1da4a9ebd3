use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::ModeKind;
use crate::quadrature::{integrate_semi_infinite, QuadOptions};
use crate::specfun::{factorial, laguerre};

/// Transverse part of a centre-of-mass state; the axial part is a plane
/// wave `e^{i k_z_cm z}` in both cases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant")]
pub enum CmProfile {
    /// `J_{m}(k_perp_cm R)`, delta-normalized.
    FreeBessel { k_perp_cm: f64 },
    /// Two-dimensional oscillator eigenstate with radial quantum number
    /// `n_bar` and oscillator length `alpha`.
    TrappedHO { n_bar: u32, alpha: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CenterOfMassState {
    pub m_cm: i32,
    pub k_z_cm: f64,
    pub profile: CmProfile,
}

impl CenterOfMassState {
    pub fn free(m_cm: i32, k_perp_cm: f64, k_z_cm: f64) -> Result<Self> {
        if !(k_perp_cm > 0.0) || !k_perp_cm.is_finite() {
            return Err(Error::InvalidArgument(format!("k_perp of a free state must be > 0, got {k_perp_cm}")));
        }
        if !k_z_cm.is_finite() {
            return Err(Error::InvalidArgument(format!("k_z must be finite, got {k_z_cm}")));
        }
        Ok(CenterOfMassState { m_cm, k_z_cm, profile: CmProfile::FreeBessel { k_perp_cm } })
    }

    pub fn trapped(m_cm: i32, n_bar: u32, alpha: f64, k_z_cm: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidArgument(format!("oscillator length must be > 0, got {alpha}")));
        }
        if !k_z_cm.is_finite() {
            return Err(Error::InvalidArgument(format!("k_z must be finite, got {k_z_cm}")));
        }
        Ok(CenterOfMassState { m_cm, k_z_cm, profile: CmProfile::TrappedHO { n_bar, alpha } })
    }

    pub fn validate(&self) -> Result<()> {
        match self.profile {
            CmProfile::FreeBessel { k_perp_cm } => Self::free(self.m_cm, k_perp_cm, self.k_z_cm).map(|_| ()),
            CmProfile::TrappedHO { n_bar, alpha } => Self::trapped(self.m_cm, n_bar, alpha, self.k_z_cm).map(|_| ()),
        }
    }

    /// Transverse radial profile, normalized over `R dR` for trapped states.
    pub fn radial(&self, r: f64) -> f64 {
        match self.profile {
            CmProfile::FreeBessel { k_perp_cm } => crate::specfun::bessel_j_int(self.m_cm, k_perp_cm * r),
            CmProfile::TrappedHO { n_bar, alpha } => {
                let am = self.m_cm.unsigned_abs();
                let x = r / alpha;
                ho_normalization(n_bar, am, alpha)
                    * (-0.5 * x * x).exp()
                    * x.powi(am as i32)
                    * laguerre(n_bar, am as f64, x * x)
            }
        }
    }
}

/// `N` with `N^2 = 2 n! / (alpha^2 (n + |m|)!)`.
pub fn ho_normalization(n_bar: u32, abs_m: u32, alpha: f64) -> f64 {
    (2.0 * factorial(n_bar) / (alpha * alpha * factorial(n_bar + abs_m))).sqrt()
}

pub type RadialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Internal (relative-coordinate) state `Theta(r) Y_{l m}`.
#[derive(Clone)]
pub struct InternalState {
    pub l_r: u32,
    pub m_r: i32,
    pub radial: RadialFn,
    /// Decay length of `radial`, used to scale the radial quadrature.
    pub length_scale: f64,
    pub label: String,
}

impl fmt::Debug for InternalState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InternalState")
            .field("label", &self.label)
            .field("l_r", &self.l_r)
            .field("m_r", &self.m_r)
            .field("length_scale", &self.length_scale)
            .finish()
    }
}

impl InternalState {
    pub fn new(l_r: u32, m_r: i32, radial: RadialFn, length_scale: f64, label: impl Into<String>) -> Result<Self> {
        let st = InternalState { l_r, m_r, radial, length_scale, label: label.into() };
        st.validate()?;
        Ok(st)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m_r.unsigned_abs() > self.l_r {
            return Err(Error::InvalidArgument(format!("|m_r| = {} exceeds l_r = {}", self.m_r.abs(), self.l_r)));
        }
        if !(self.length_scale > 0.0) {
            return Err(Error::InvalidArgument("radial length scale must be > 0".into()));
        }
        Ok(())
    }

    /// Hydrogenic `R_{nl}` in units of the Bohr radius.
    pub fn hydrogen(n: u32, l: u32, m: i32) -> Result<Self> {
        if n == 0 || l >= n {
            return Err(Error::InvalidArgument(format!("hydrogen state needs 0 <= l < n, got n={n}, l={l}")));
        }
        let nf = n as f64;
        let norm = ((2.0 / nf).powi(3) * factorial(n - l - 1) / (2.0 * nf * factorial(n + l))).sqrt();
        let radial: RadialFn = Arc::new(move |r: f64| {
            let x = 2.0 * r / nf;
            norm * (-0.5 * x).exp() * x.powi(l as i32) * laguerre(n - l - 1, (2 * l + 1) as f64, x)
        });
        InternalState::new(l, m, radial, nf, format!("hydrogen n={n} l={l} m={m}"))
    }

    /// `R_10 = 2 e^{-r}`.
    pub fn hydrogen_1s() -> Self {
        InternalState::new(0, 0, Arc::new(|r: f64| 2.0 * (-r).exp()), 1.0, "1s").expect("valid state")
    }

    /// `R_21 = r e^{-r/2} / sqrt(24)`.
    pub fn hydrogen_2p(m: i32) -> Result<Self> {
        InternalState::new(1, m, Arc::new(|r: f64| r * (-0.5 * r).exp() / 24f64.sqrt()), 2.0, format!("2p m={m}"))
    }

    pub fn with_m(&self, m_r: i32) -> Result<Self> {
        let mut s = self.clone();
        s.m_r = m_r;
        s.validate()?;
        Ok(s)
    }

    /// `int_0^inf r^power Theta_a Theta_b dr`.
    pub fn radial_moment(a: &InternalState, b: &InternalState, power: i32) -> Result<f64> {
        let (fa, fb) = (a.radial.clone(), b.radial.clone());
        let scale = a.length_scale.max(b.length_scale);
        let r = integrate_semi_infinite(
            move |r: f64| r.powi(power) * fa(r) * fb(r),
            0.0,
            scale,
            &QuadOptions { abs_tol: 1e-13, rel_tol: 1e-12, max_evaluations: 200_000 },
        )?;
        Ok(r.value)
    }

    /// `int r^2 Theta^2 dr`, which must equal one.
    pub fn norm_squared(&self) -> Result<f64> {
        InternalState::radial_moment(self, self, 2)
    }
}

/// Coupling structure of the interaction term producing the channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Interaction {
    /// `r . A*` with the field at the centre of mass plus, up to the
    /// requested multipole order, the displaced-field expansion terms.
    Dipole,
    /// A single `(n, v, s)` term of the relative-energy coupling `r . A*`.
    General { n: u32, v: u32, s: u32 },
    /// A single `(n, v, s)` term of the centre-of-mass coupling `R . A*`.
    CenterOfMass { n: u32, v: u32, s: u32 },
    /// Electron spin coupling `S . B*`.
    Spin,
}

/// Which component of the helical decomposition produced a channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    /// `e_plus`, carrying `psi_{m-1}`.
    Plus,
    /// `e_minus`, carrying `psi_{m+1}`.
    Minus,
    /// `e_z`, carrying `psi_m`.
    Axial,
}

impl Component {
    pub const ALL: [Component; 3] = [Component::Plus, Component::Minus, Component::Axial];

    /// Helicity index `p` with `psi_{m-p}` as the carried scalar.
    pub fn helicity(self) -> i32 {
        match self {
            Component::Plus => 1,
            Component::Minus => -1,
            Component::Axial => 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ChannelOrder {
    Dipole,
    /// Order of the transverse Taylor expansion of the displaced field.
    Multipole {
        order: u32,
    },
    /// One term of the addition-theorem expansion.
    Term {
        n: u32,
        v: u32,
        s: u32,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Channel {
    pub delta_m_cm: i32,
    pub delta_m_r: i32,
    pub delta_spin_e: i32,
    pub mode_kind: ModeKind,
    pub order: ChannelOrder,
    pub component: Component,
    /// Order of the Bessel factor `J_l` entering the centre-of-mass integral.
    pub bessel_order: i32,
}

impl Channel {
    pub fn total_change(&self) -> i32 {
        self.delta_m_cm + self.delta_m_r + self.delta_spin_e
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AmplitudeFactors {
    pub cm_integral: Complex64,
    pub rel_integral: f64,
    pub coupling: Complex64,
}

/// Axial momentum conservation between plane-wave centre-of-mass parts,
/// `k_z_out = k_z_in - k_z` for emission. Carried symbolically.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AxialConstraint {
    pub required_k_z_out: f64,
    pub k_z_out: f64,
    pub satisfied: bool,
}

impl AxialConstraint {
    pub(crate) fn new(required: f64, actual: f64) -> Self {
        let scale = required.abs().max(actual.abs()).max(1.0);
        AxialConstraint {
            required_k_z_out: required,
            k_z_out: actual,
            satisfied: (required - actual).abs() <= 1e-12 * scale,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelAmplitude {
    pub channel: Channel,
    pub amplitude: Complex64,
    pub factors: AmplitudeFactors,
    pub axial: AxialConstraint,
}

impl ChannelAmplitude {
    pub(crate) fn new(channel: Channel, factors: AmplitudeFactors, axial: AxialConstraint) -> Self {
        let amplitude = factors.coupling * factors.cm_integral * factors.rel_integral;
        ChannelAmplitude { channel, amplitude, factors, axial }
    }
}

/// Charge and internal-energy gap `E_initial - E_final` entering the
/// relative-coordinate coupling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DipoleCoupling {
    pub charge: f64,
    pub energy_gap: f64,
}

/// Gyromagnetic factor, charge and mass of the particle whose spin couples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinParticle {
    pub g: f64,
    pub charge: f64,
    pub mass: f64,
}
