//! Shared fixtures for the criterion benchmarks.

use twistkit::{CenterOfMassState, ModeKind, ModeSpec, PlanarVec};

/// A moderately nonparaxial TM mode with a vortex of charge 2.
pub fn tm_mode() -> ModeSpec {
    ModeSpec::new(ModeKind::TM, 2, 1.2, 0.9).expect("valid mode")
}

/// Beam-centre offset and small displacement with `k q` of order one.
pub fn displacement() -> (PlanarVec, PlanarVec) {
    (PlanarVec::new(2.0, 0.3).expect("valid"), PlanarVec::new(0.8, 1.1).expect("valid"))
}

/// Trapped initial and final centre-of-mass states for the recoil integral.
pub fn trapped_pair() -> (CenterOfMassState, CenterOfMassState) {
    (
        CenterOfMassState::trapped(1, 1, 1.3, 0.4).expect("valid"),
        CenterOfMassState::trapped(-1, 0, 1.3, -0.5).expect("valid"),
    )
}
