use crate::error::{Error, Result};
use crate::fields::ModeKind;

use super::types::{Channel, ChannelOrder, Component, Interaction};

/// Order of the scalar carried by each field component, relative to the
/// mode index: TE/TM carry `m`, `L` carries `m + 1`, `R` carries `m - 1`.
pub fn carrier_order(kind: ModeKind, m: i32) -> i32 {
    match kind {
        ModeKind::TE | ModeKind::TM => m,
        ModeKind::L => m + 1,
        ModeKind::R => m - 1,
    }
}

/// Non-vanishing helical components of the vector potential.
pub fn potential_components(kind: ModeKind) -> &'static [Component] {
    match kind {
        ModeKind::TE => &[Component::Plus, Component::Minus],
        ModeKind::TM => &[Component::Plus, Component::Minus, Component::Axial],
        ModeKind::L => &[Component::Plus, Component::Axial],
        ModeKind::R => &[Component::Minus, Component::Axial],
    }
}

/// Non-vanishing helical components of the magnetic field.
pub fn magnetic_components(kind: ModeKind) -> &'static [Component] {
    match kind {
        ModeKind::TM => &[Component::Plus, Component::Minus],
        ModeKind::TE | ModeKind::L | ModeKind::R => &[Component::Plus, Component::Minus, Component::Axial],
    }
}

/// Azimuthal exponents `(a, b)` of `e^{i a phi_R} e^{i b phi_q}` contributed
/// by the `(n, v, s)` term of the displaced `psi_l(R - q)`.
///
/// Returns an empty list when the term does not occur for this `l`.
pub fn term_exponents(l: i32, n: u32, v: u32, s: u32) -> Vec<(i32, i32)> {
    let (n, v, s) = (n as i32, v as i32, s as i32);
    let mut out = Vec::with_capacity(2);
    if l == 0 {
        if n == 0 && s == 0 {
            out.push((v, -v));
            if v != 0 {
                out.push((-v, v));
            }
        }
        return out;
    }
    let al = l.abs();
    if n > al || s > v {
        return out;
    }
    let d = v - 2 * s;
    out.push((al - n + d, n - d));
    if d != 0 {
        out.push((al - n - d, n + d));
    }
    if l < 0 {
        for e in &mut out {
            *e = (-e.0, -e.1);
        }
    }
    out
}

fn order_label(n: u32, v: u32, s: u32) -> ChannelOrder {
    if n == 0 && v == 0 {
        ChannelOrder::Dipole
    } else {
        ChannelOrder::Term { n, v, s }
    }
}

#[derive(Clone, Copy)]
enum Coupling {
    Relative,
    CenterOfMass,
    Spin,
}

fn push_term(
    out: &mut Vec<Channel>,
    kind: ModeKind,
    base: i32,
    comps: &[Component],
    coupling: Coupling,
    (n, v, s): (u32, u32, u32),
) {
    for &c in comps {
        let p = c.helicity();
        let l = base - p;
        for (a, b) in term_exponents(l, n, v, s) {
            let (dm_cm, dm_r, dspin) = match coupling {
                Coupling::Relative => (-a, -(b + p), 0),
                Coupling::CenterOfMass => (-(a + p), -b, 0),
                Coupling::Spin => (-a, -b, -p),
            };
            let ch = Channel {
                delta_m_cm: dm_cm,
                delta_m_r: dm_r,
                delta_spin_e: dspin,
                mode_kind: kind,
                order: order_label(n, v, s),
                component: c,
                bessel_order: l,
            };
            if !out.contains(&ch) {
                out.push(ch);
            }
        }
    }
}

/// Ratio of the `e_minus` to the `e_plus` coefficient of the vector
/// potential, as an exact integer (zero when one of them is absent).
fn potential_helicity_ratio(kind: ModeKind) -> (i64, i64) {
    match kind {
        ModeKind::TE => (1, 1),
        ModeKind::TM => (1, -1),
        ModeKind::L => (1, 0),
        ModeKind::R => (0, 1),
    }
}

fn binomial_i64(n: u32, k: i64) -> i64 {
    if k < 0 || k > n as i64 {
        return 0;
    }
    let k = k as u64;
    (0..k).fold(1u64, |acc, i| acc * (n as u64 - i) / (i + 1)) as i64
}

/// Channels of the order-`big_n` term of the transverse Taylor expansion of
/// the displaced field.
///
/// `(q . grad)^N psi_l` with `q . grad = (q_- d_+ + q_+ d_-) / 2` and
/// `d_(+/-) psi_l` proportional to `psi_(l +/- 1)` gives, for every
/// `a = 0..=N`, the scalar `psi_{l+2a-N}` with weight `C(N, a) (-1)^a` and
/// azimuthal factor `e^{i(N-2a) phi_q}`. Contributions reaching the same
/// channel share the same Bessel order and are summed exactly, so a channel
/// is kept only when the combined integer weight is non-zero.
fn push_taylor(out: &mut Vec<Channel>, kind: ModeKind, base: i32, coupling: Coupling, big_n: u32) {
    let comps = match coupling {
        Coupling::Spin => magnetic_components(kind),
        _ => potential_components(kind),
    };
    let (w_plus, w_minus) = potential_helicity_ratio(kind);
    let order = if big_n == 0 { ChannelOrder::Dipole } else { ChannelOrder::Multipole { order: big_n } };
    let mut acc: Vec<(Channel, i64)> = Vec::new();
    for &c in comps {
        let p = c.helicity();
        let l = base - p;
        for a in 0..=big_n as i32 {
            let shift = 2 * a - big_n as i32;
            let (dm_cm, dm_r, dspin) = match coupling {
                Coupling::Relative => (-(l + shift), -(-shift + p), 0),
                Coupling::Spin => (-(l + shift), shift, -p),
                Coupling::CenterOfMass => unreachable!("centre-of-mass coupling uses single terms"),
            };
            let sign = if a % 2 == 0 { 1 } else { -1 };
            let helicity_weight = match (coupling, c) {
                (Coupling::Relative, Component::Plus) => w_plus,
                (Coupling::Relative, Component::Minus) => w_minus,
                _ => 1,
            };
            let weight = sign * binomial_i64(big_n, a as i64) * helicity_weight;
            let ch = Channel {
                delta_m_cm: dm_cm,
                delta_m_r: dm_r,
                delta_spin_e: dspin,
                mode_kind: kind,
                order,
                component: c,
                bessel_order: l + shift,
            };
            // plus and minus reach a common channel with the same radial factor
            let key = |x: &Channel| (x.delta_m_cm, x.delta_m_r, x.delta_spin_e);
            match acc
                .iter_mut()
                .find(|(x, _)| key(x) == key(&ch) && x.component != Component::Axial && c != Component::Axial)
            {
                Some(entry) => entry.1 += weight,
                None => acc.push((ch, weight)),
            }
        }
    }
    for (ch, w) in acc {
        if w != 0 && !out.contains(&ch) {
            out.push(ch);
        }
    }
}

/// Emission channels allowed by azimuthal symmetry.
///
/// For [`Interaction::Dipole`] and [`Interaction::Spin`] the field is
/// displaced transversely and expanded up to Taylor order `max_multipole`
/// (order 1 is the quadrupole order); the single-term variants enumerate the
/// exponents of one `(n, v, s)` addition-theorem term and ignore
/// `max_multipole`. Every channel satisfies
/// `delta_m_cm + delta_m_r + delta_spin_e = -carrier_order(kind, m)`.
pub fn symbolic_channels(m: i32, kind: ModeKind, interaction: Interaction, max_multipole: u32) -> Result<Vec<Channel>> {
    if max_multipole > 64 {
        return Err(Error::InvalidArgument(format!("multipole order {max_multipole} exceeds 64")));
    }
    let base = carrier_order(kind, m);
    let mut out = Vec::new();
    match interaction {
        Interaction::Dipole => {
            for order in 0..=max_multipole {
                push_taylor(&mut out, kind, base, Coupling::Relative, order);
            }
        }
        Interaction::Spin => {
            for order in 0..=max_multipole {
                push_taylor(&mut out, kind, base, Coupling::Spin, order);
            }
        }
        Interaction::General { n, v, s } => {
            push_term(&mut out, kind, base, potential_components(kind), Coupling::Relative, (n, v, s));
        }
        Interaction::CenterOfMass { n, v, s } => {
            push_term(&mut out, kind, base, potential_components(kind), Coupling::CenterOfMass, (n, v, s));
        }
    }
    Ok(out)
}

/// `(delta_m_r, delta_m_cm)` pairs of the leading-order relative coupling.
pub fn dipole_pairs(m: i32, kind: ModeKind) -> Vec<(i32, i32)> {
    let base = carrier_order(kind, m);
    potential_components(kind)
        .iter()
        .map(|c| {
            let j = c.helicity();
            (-j, -base + j)
        })
        .collect()
}
