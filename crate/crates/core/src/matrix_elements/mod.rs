//! Atom-photon emission matrix elements in a Bessel mode.
//!
//! States factor into a centre-of-mass part ([`CenterOfMassState`]) and an
//! internal part ([`InternalState`]). Selection rules are exact integer
//! bookkeeping over azimuthal exponents ([`symbolic_channels`]); amplitudes
//! combine a coupling constant, a centre-of-mass integral ([`icm0`]) and an
//! internal integral ([`i_rel`]).
//!
//! Emission couples to the conjugate field, so a mode of carrier order `m`
//! removes `m` units of angular momentum from the atom: every channel has
//! `delta_m_cm + delta_m_r + delta_spin_e = -m`.

mod cm;
mod dipole;
pub mod oracle;
mod selection;
mod spin;
mod types;

#[cfg(test)]
mod tests;

pub use cm::{
    ho_vortex_integral, icm0, laguerre_gauss_candidate, laguerre_gauss_closed_form, suppression_factor, triple_bessel,
    triple_bessel_candidate, CmIntegral, ConeRegime, HoVortexReport, TripleBesselReport, TRIPLE_TOL,
};
pub use dipole::{angular_factor, dipole_absorption_amplitude, dipole_amplitude, i_rel};
pub use selection::{
    carrier_order, dipole_pairs, magnetic_components, potential_components, symbolic_channels, term_exponents,
};
pub use spin::spin_matrix_element;
pub use types::{
    ho_normalization, AmplitudeFactors, AxialConstraint, CenterOfMassState, Channel, ChannelAmplitude, ChannelOrder,
    CmProfile, Component, DipoleCoupling, Interaction, InternalState, RadialFn, SpinParticle,
};
