use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fields::{potential_helical, ModeKind, ModeSpec};

use super::cm::{icm0, radial_cm_integral};
use super::types::{
    AmplitudeFactors, AxialConstraint, CenterOfMassState, Channel, ChannelAmplitude, ChannelOrder, Component,
    DipoleCoupling, InternalState,
};

fn ratio_sqrt(num: i64, den: i64) -> f64 {
    if num <= 0 || den <= 0 {
        0.0
    } else {
        (num as f64 / den as f64).sqrt()
    }
}

/// `<Y_{l_out m_out}| u_j |Y_{l_in m_in}>` with `u_{+1} = sin(theta) e^{-i phi}`,
/// `u_{-1} = sin(theta) e^{i phi}` and `u_0 = cos(theta)`
/// (Condon-Shortley phases).
pub fn angular_factor(l_in: u32, m_in: i32, l_out: u32, m_out: i32, j: i32) -> f64 {
    if m_out != m_in - j || m_in.unsigned_abs() > l_in || m_out.unsigned_abs() > l_out {
        return 0.0;
    }
    let (l, m) = (l_in as i64, m_in as i64);
    let up = l_out as i64 == l + 1;
    let down = l_out as i64 == l - 1;
    if !up && !down {
        return 0.0;
    }
    match j {
        0 => {
            if up {
                ratio_sqrt((l + 1) * (l + 1) - m * m, (2 * l + 1) * (2 * l + 3))
            } else {
                ratio_sqrt(l * l - m * m, (2 * l - 1) * (2 * l + 1))
            }
        }
        -1 => {
            if up {
                -ratio_sqrt((l + m + 1) * (l + m + 2), (2 * l + 1) * (2 * l + 3))
            } else {
                ratio_sqrt((l - m) * (l - m - 1), (2 * l - 1) * (2 * l + 1))
            }
        }
        1 => {
            if up {
                ratio_sqrt((l - m + 1) * (l - m + 2), (2 * l + 1) * (2 * l + 3))
            } else {
                -ratio_sqrt((l + m) * (l + m - 1), (2 * l - 1) * (2 * l + 1))
            }
        }
        _ => 0.0,
    }
}

/// `<out| r u_j |in>`: the angular factor times `int r^3 Theta_out Theta_in dr`.
///
/// `j = m_in - m_out`, so `j = +1` lowers the magnetic quantum number.
pub fn i_rel(int_in: &InternalState, int_out: &InternalState, j: i32) -> Result<f64> {
    int_in.validate()?;
    int_out.validate()?;
    if !(-1..=1).contains(&j) {
        return Err(Error::InvalidArgument(format!("j must be -1, 0 or +1, got {j}")));
    }
    let ang = angular_factor(int_in.l_r, int_in.m_r, int_out.l_r, int_out.m_r, j);
    if ang == 0.0 {
        return Ok(0.0);
    }
    Ok(ang * InternalState::radial_moment(int_out, int_in, 3)?)
}

fn check_mode(mode: &ModeSpec) -> Result<()> {
    match mode.kind {
        ModeKind::TE | ModeKind::TM => mode.check(),
        k => Err(Error::InvalidArgument(format!("dipole amplitudes take TE or TM modes, got {k}"))),
    }
}

fn coefficient(h: &crate::fields::HelicalCoefficients, c: Component) -> Complex64 {
    match c {
        Component::Plus => h.plus,
        Component::Minus => h.minus,
        Component::Axial => h.axial,
    }
}

/// Leading-order emission amplitudes `<out| (q/i) dE r . A*(R) |in>`,
/// one entry per non-vanishing channel.
///
/// The helical component carrying `psi_{m-p}` couples through `u_p`, so the
/// channel has `delta_m_r = -p` and `delta_m_cm = -(m - p)`. Channels whose
/// axial plane-wave constraint fails are absent.
pub fn dipole_amplitude(
    mode: &ModeSpec,
    cm_in: &CenterOfMassState,
    cm_out: &CenterOfMassState,
    int_in: &InternalState,
    int_out: &InternalState,
    coupling: &DipoleCoupling,
) -> Result<Vec<ChannelAmplitude>> {
    check_mode(mode)?;
    check_variants(cm_in, cm_out)?;
    int_in.validate()?;
    int_out.validate()?;
    let h = potential_helical(mode)?;
    let mut out = Vec::new();
    for c in Component::ALL {
        let coef = coefficient(&h, c);
        if coef == Complex64::new(0.0, 0.0) {
            continue;
        }
        let p = c.helicity();
        let l = h.base_m - p;
        if int_out.m_r != int_in.m_r - p || cm_out.m_cm != cm_in.m_cm - l {
            continue;
        }
        let rel = i_rel(int_in, int_out, p)?;
        if rel == 0.0 {
            continue;
        }
        let cm = icm0(cm_in, cm_out, mode.k_perp, mode.k_z, l)?;
        if !cm.axial.satisfied || cm.value == Complex64::new(0.0, 0.0) {
            continue;
        }
        let factors = AmplitudeFactors {
            cm_integral: cm.value,
            rel_integral: rel,
            coupling: Complex64::new(0.0, -coupling.charge * coupling.energy_gap) * coef.conj(),
        };
        let channel = Channel {
            delta_m_cm: -l,
            delta_m_r: -p,
            delta_spin_e: 0,
            mode_kind: mode.kind,
            order: ChannelOrder::Dipole,
            component: c,
            bessel_order: l,
        };
        out.push(ChannelAmplitude::new(channel, factors, cm.axial));
    }
    Ok(out)
}

/// Leading-order absorption amplitudes `<out| (q/i) dE r . A(R) |in>`, the
/// Hermitian partner of [`dipole_amplitude`]: the emission amplitude
/// `in -> out` equals the conjugate of the absorption amplitude `out -> in`
/// when the energy gap changes sign with the direction.
pub fn dipole_absorption_amplitude(
    mode: &ModeSpec,
    cm_in: &CenterOfMassState,
    cm_out: &CenterOfMassState,
    int_in: &InternalState,
    int_out: &InternalState,
    coupling: &DipoleCoupling,
) -> Result<Vec<ChannelAmplitude>> {
    check_mode(mode)?;
    check_variants(cm_in, cm_out)?;
    int_in.validate()?;
    int_out.validate()?;
    let h = potential_helical(mode)?;
    let mut out = Vec::new();
    for c in Component::ALL {
        let coef = coefficient(&h, c);
        if coef == Complex64::new(0.0, 0.0) {
            continue;
        }
        let p = c.helicity();
        let l = h.base_m - p;
        if int_out.m_r != int_in.m_r + p || cm_out.m_cm != cm_in.m_cm + l {
            continue;
        }
        let rel = i_rel(int_in, int_out, -p)?;
        if rel == 0.0 {
            continue;
        }
        let axial = AxialConstraint::new(cm_in.k_z_cm + mode.k_z, cm_out.k_z_cm);
        if !axial.satisfied {
            continue;
        }
        let value = radial_cm_integral(cm_in, cm_out, mode.k_perp, l)?.value;
        if value == 0.0 {
            continue;
        }
        let factors = AmplitudeFactors {
            cm_integral: Complex64::new(value, 0.0),
            rel_integral: rel,
            coupling: Complex64::new(0.0, -coupling.charge * coupling.energy_gap) * coef,
        };
        let channel = Channel {
            delta_m_cm: l,
            delta_m_r: p,
            delta_spin_e: 0,
            mode_kind: mode.kind,
            order: ChannelOrder::Dipole,
            component: c,
            bessel_order: l,
        };
        out.push(ChannelAmplitude::new(channel, factors, axial));
    }
    Ok(out)
}

pub(crate) fn check_variants(a: &CenterOfMassState, b: &CenterOfMassState) -> Result<()> {
    a.validate()?;
    b.validate()?;
    if std::mem::discriminant(&a.profile) != std::mem::discriminant(&b.profile) {
        return Err(Error::VariantMismatch);
    }
    Ok(())
}
