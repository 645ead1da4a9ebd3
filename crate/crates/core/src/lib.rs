//! Nonparaxial Bessel electromagnetic modes and the atom-photon matrix
//! elements they induce.
//!
//! The crate is organised bottom-up:
//!
//! * [`specfun`]: Bessel J of integer order, Laguerre and Gegenbauer
//!   polynomials, Gamma/Pochhammer and the `2F2` series.
//! * [`quadrature`]: finite adaptive quadrature, semi-infinite oscillatory
//!   Bessel-product integration (two independent methods) and
//!   finite-difference vector operators.
//! * [`fields`]: TE/TM and L/R Bessel mode potentials and fields.
//! * [`expansion`]: cylindrical addition theorems for displaced `psi_m`.
//! * [`matrix_elements`]: selection rules, dipole and spin amplitudes,
//!   centre-of-mass integrals for free and trapped atoms.
//!
//! Units are natural: `hbar = c = 1`.

// Domain guards are written `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod expansion;
pub mod fields;
pub mod matrix_elements;
pub mod quadrature;
pub mod specfun;

pub use error::{Error, Result};
pub use expansion::{ExpansionTerm, PlanarVec};
pub use fields::{CylPoint, FieldSample, ModeKind, ModeSpec, TmTeDecomposition};
pub use matrix_elements::{CenterOfMassState, Channel, ChannelAmplitude, ChannelOrder, Interaction, InternalState};
pub use num_complex::Complex64;
pub use quadrature::QuadResult;
pub use specfun::SeriesResult;
