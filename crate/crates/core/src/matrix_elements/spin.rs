use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fields::{magnetic_helical, ModeKind, ModeSpec};

use super::cm::icm0;
use super::dipole::check_variants;
use super::types::{
    AmplitudeFactors, CenterOfMassState, Channel, ChannelAmplitude, ChannelOrder, Component, InternalState,
    SpinParticle,
};

/// `<s_out| S_op |s_in>` for a spin-1/2 particle, `S_op` being `S_+`, `S_-`
/// or `S_z` according to `s_out - s_in`.
fn spin_half_element(s_in: f64, s_out: f64) -> f64 {
    if s_out == s_in {
        s_in
    } else {
        1.0
    }
}

fn check_projection(s: f64) -> Result<()> {
    if s != 0.5 && s != -0.5 {
        return Err(Error::InvalidArgument(format!("spin projection must be +-1/2, got {s}")));
    }
    Ok(())
}

/// Leading-order emission amplitude of the spin coupling
/// `<out| (g q / 2M) S . B*(R) |in>`.
///
/// A change `delta_spin = s_out - s_in` selects the magnetic component
/// `e_minus` (`psi_{m+1}`, `S_+`), `e_plus` (`psi_{m-1}`, `S_-`) or the axial
/// one (`psi_m`, `S_z`); the centre of mass then changes by
/// `-(m + delta_spin)`. The internal spatial state enters only through its
/// overlap. Returns `None` when the channel is absent.
#[allow(clippy::too_many_arguments)]
pub fn spin_matrix_element(
    mode: &ModeSpec,
    particle: &SpinParticle,
    spin_in: f64,
    spin_out: f64,
    cm_in: &CenterOfMassState,
    cm_out: &CenterOfMassState,
    int_in: &InternalState,
    int_out: &InternalState,
) -> Result<Option<ChannelAmplitude>> {
    match mode.kind {
        ModeKind::TE | ModeKind::TM => mode.check()?,
        k => return Err(Error::InvalidArgument(format!("spin amplitudes take TE or TM modes, got {k}"))),
    }
    check_projection(spin_in)?;
    check_projection(spin_out)?;
    check_variants(cm_in, cm_out)?;
    let delta = (spin_out - spin_in).round() as i32;
    let component = match delta {
        1 => Component::Minus,
        -1 => Component::Plus,
        0 => Component::Axial,
        _ => return Ok(None),
    };
    let h = magnetic_helical(mode)?;
    let coef = match component {
        Component::Plus => h.plus,
        Component::Minus => h.minus,
        Component::Axial => h.axial,
    };
    if coef == Complex64::new(0.0, 0.0) {
        return Ok(None);
    }
    if int_in.l_r != int_out.l_r || int_in.m_r != int_out.m_r {
        return Ok(None);
    }
    let overlap = InternalState::radial_moment(int_out, int_in, 2)?;
    let l = h.base_m + delta;
    if cm_out.m_cm != cm_in.m_cm - l {
        return Ok(None);
    }
    let cm = icm0(cm_in, cm_out, mode.k_perp, mode.k_z, l)?;
    if !cm.axial.satisfied || cm.value == Complex64::new(0.0, 0.0) {
        return Ok(None);
    }
    let factors = AmplitudeFactors {
        cm_integral: cm.value,
        rel_integral: overlap * spin_half_element(spin_in, spin_out),
        coupling: coef.conj() * (particle.g * particle.charge / (2.0 * particle.mass)),
    };
    let channel = Channel {
        delta_m_cm: -l,
        delta_m_r: 0,
        delta_spin_e: delta,
        mode_kind: mode.kind,
        order: ChannelOrder::Dipole,
        component,
        bessel_order: l,
    };
    Ok(Some(ChannelAmplitude::new(channel, factors, cm.axial)))
}
