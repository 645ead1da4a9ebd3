use std::collections::BTreeSet;
use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;

use super::oracle::{dipole_spectrum, first_order_spectrum, spin_spectrum, ChannelKey};
use super::*;
use crate::fields::{ModeKind, ModeSpec};
use crate::quadrature::integrate_finite;
use crate::specfun::{bessel_j_int, factorial, laguerre};

fn keys(chs: &[Channel]) -> BTreeSet<ChannelKey> {
    chs.iter().map(|c| (c.delta_m_cm, c.delta_m_r, c.delta_spin_e)).collect()
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

// ---------------------------------------------------------------- selection

#[test]
fn te_dipole_m1_channels() {
    let chs = symbolic_channels(1, ModeKind::TE, Interaction::Dipole, 0).unwrap();
    let got: BTreeSet<_> = chs.iter().map(|c| (c.delta_m_r, c.delta_m_cm)).collect();
    assert_eq!(got, BTreeSet::from([(1, -2), (-1, 0)]));
    assert!(chs.iter().all(|c| c.order == ChannelOrder::Dipole));
}

#[test]
fn tm_dipole_m2_adds_axial_channel() {
    let te: BTreeSet<_> = symbolic_channels(2, ModeKind::TE, Interaction::Dipole, 0)
        .unwrap()
        .iter()
        .map(|c| (c.delta_m_r, c.delta_m_cm))
        .collect();
    let tm: BTreeSet<_> = symbolic_channels(2, ModeKind::TM, Interaction::Dipole, 0)
        .unwrap()
        .iter()
        .map(|c| (c.delta_m_r, c.delta_m_cm))
        .collect();
    let extra: BTreeSet<_> = tm.difference(&te).copied().collect();
    assert_eq!(extra, BTreeSet::from([(0, -2)]));
    assert!(te.is_subset(&tm));
}

#[test]
fn tm_dipole_m0_keeps_internal_state() {
    let chs = symbolic_channels(0, ModeKind::TM, Interaction::Dipole, 0).unwrap();
    assert!(chs.iter().any(|c| c.delta_m_r == 0 && c.delta_m_cm == 0));
}

#[test]
fn spin_m1_flips_with_shifted_orbital_change() {
    for kind in [ModeKind::TE, ModeKind::TM] {
        let chs = symbolic_channels(1, kind, Interaction::Spin, 0).unwrap();
        let flips: BTreeSet<_> =
            chs.iter().filter(|c| c.delta_spin_e != 0).map(|c| (c.delta_spin_e, c.delta_m_cm)).collect();
        assert_eq!(flips, BTreeSet::from([(1, -2), (-1, 0)]), "{kind}");
        assert!(chs.iter().all(|c| c.delta_m_r == 0));
    }
    let te = symbolic_channels(3, ModeKind::TE, Interaction::Spin, 0).unwrap();
    assert!(te.iter().any(|c| c.delta_spin_e == 0 && c.delta_m_cm == -3));
    let tm = symbolic_channels(3, ModeKind::TM, Interaction::Spin, 0).unwrap();
    assert!(tm.iter().all(|c| c.delta_spin_e != 0));
}

#[test]
fn conservation_exhaustive() {
    let kinds = [ModeKind::TE, ModeKind::TM, ModeKind::L, ModeKind::R];
    for m in -5..=5 {
        for kind in kinds {
            let target = -carrier_order(kind, m);
            let mut interactions = vec![Interaction::Dipole, Interaction::Spin];
            for n in 0..=3 {
                for v in 0..=3 {
                    for s in 0..=v {
                        interactions.push(Interaction::General { n, v, s });
                        interactions.push(Interaction::CenterOfMass { n, v, s });
                    }
                }
            }
            for inter in interactions {
                for order in 0..=3 {
                    for ch in symbolic_channels(m, kind, inter, order).unwrap() {
                        assert_eq!(ch.total_change(), target, "{m} {kind} {inter:?} {ch:?}");
                    }
                }
            }
        }
    }
}

#[test]
fn term_exponents_sum_to_order() {
    for l in -6..=6 {
        for n in 0..=6 {
            for v in 0..=4 {
                for s in 0..=v {
                    for (a, b) in term_exponents(l, n, v, s) {
                        assert_eq!(a + b, l);
                    }
                }
            }
        }
    }
    assert!(term_exponents(2, 3, 0, 0).is_empty());
    assert!(term_exponents(0, 1, 0, 0).is_empty());
    assert_eq!(term_exponents(0, 0, 2, 0), vec![(2, -2), (-2, 2)]);
}

#[test]
fn multipole_terms_are_labelled() {
    let chs = symbolic_channels(2, ModeKind::TE, Interaction::Dipole, 1).unwrap();
    assert!(chs.iter().any(|c| c.order == ChannelOrder::Multipole { order: 1 }));
    let single = symbolic_channels(2, ModeKind::TE, Interaction::General { n: 1, v: 0, s: 0 }, 0).unwrap();
    assert!(single.iter().all(|c| c.order == ChannelOrder::Term { n: 1, v: 0, s: 0 }));
    assert!(symbolic_channels(1, ModeKind::TE, Interaction::Dipole, 65).is_err());
}

fn check_dipole_oracle(m: i32, kind: ModeKind, k: f64, kz: f64, rho: f64, theta: f64) {
    let mode = ModeSpec::new(kind, m, k, kz).unwrap();
    let spectrum = dipole_spectrum(&mode, rho, theta, 10).unwrap();
    let expected = keys(&symbolic_channels(m, kind, Interaction::Dipole, 0).unwrap());
    assert!(
        spectrum.largest_outside(&expected) < 1e-10,
        "{m} {kind}: spurious {:e}",
        spectrum.largest_outside(&expected)
    );
    assert!(
        spectrum.smallest_inside(&expected) > 1e-6,
        "{m} {kind}: missing {:e}",
        spectrum.smallest_inside(&expected)
    );
}

#[test]
fn te_transversality_removes_odd_order_internal_channel() {
    for order in [1, 3] {
        let te = symbolic_channels(2, ModeKind::TE, Interaction::Dipole, order).unwrap();
        assert!(!te.iter().any(|c| c.order == ChannelOrder::Multipole { order } && c.delta_m_r == 0));
        let tm = symbolic_channels(2, ModeKind::TM, Interaction::Dipole, order).unwrap();
        assert!(tm.iter().any(|c| c.order == ChannelOrder::Multipole { order } && c.delta_m_r == 0));
    }
    let te2 = symbolic_channels(2, ModeKind::TE, Interaction::Dipole, 2).unwrap();
    assert!(te2.iter().any(|c| c.order == ChannelOrder::Multipole { order: 2 } && c.delta_m_r == 1));
}

#[test]
fn dipole_selection_matches_azimuthal_oracle() {
    for m in -5..=5 {
        for kind in [ModeKind::TE, ModeKind::TM] {
            check_dipole_oracle(m, kind, 1.1, 0.7, 1.3, 1.0);
        }
    }
    // mixed modes carry a shifted order
    for kind in [ModeKind::L, ModeKind::R] {
        check_dipole_oracle(2, kind, 0.9, 1.2, 1.7, 0.8);
    }
}

#[test]
fn spin_selection_matches_azimuthal_oracle() {
    for m in -5..=5 {
        for kind in [ModeKind::TE, ModeKind::TM] {
            let mode = ModeSpec::new(kind, m, 0.8, 1.3).unwrap();
            let spectrum = spin_spectrum(&mode, 1.9, 10).unwrap();
            let expected = keys(&symbolic_channels(m, kind, Interaction::Spin, 0).unwrap());
            assert!(spectrum.largest_outside(&expected) < 1e-10);
            assert!(spectrum.smallest_inside(&expected) > 1e-6);
        }
    }
}

#[test]
fn first_order_selection_matches_taylor_oracle() {
    for m in [-3, 0, 1, 4] {
        for kind in [ModeKind::TE, ModeKind::TM] {
            let mode = ModeSpec::new(kind, m, 1.2, 0.9).unwrap();
            let spectrum = first_order_spectrum(&mode, 1.4, 1.1, 1e-2, 10).unwrap();
            let expected: BTreeSet<_> = symbolic_channels(m, kind, Interaction::Dipole, 1)
                .unwrap()
                .iter()
                .filter(|c| c.order == ChannelOrder::Multipole { order: 1 })
                .map(|c| (c.delta_m_cm, c.delta_m_r, c.delta_spin_e))
                .collect();
            assert!(
                spectrum.largest_outside(&expected) < 1e-6,
                "{m} {kind}: {:e}",
                spectrum.largest_outside(&expected)
            );
            assert!(
                spectrum.smallest_inside(&expected) > 1e-4,
                "{m} {kind}: {:e}",
                spectrum.smallest_inside(&expected)
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn dipole_oracle_random(m in -5i32..=5, tm in any::<bool>(), k in 0.3f64..2.5, kz in 0.3f64..2.5,
                            rho in 0.4f64..3.0, theta in 0.3f64..2.8) {
        let kind = if tm { ModeKind::TM } else { ModeKind::TE };
        check_dipole_oracle(m, kind, k, kz, rho, theta);
    }
}

// ---------------------------------------------------------------- angular and radial

fn assoc_legendre(l: u32, m: u32, x: f64) -> f64 {
    let mut pmm = 1.0;
    let s = (1.0 - x * x).max(0.0).sqrt();
    for i in 0..m {
        pmm *= -((2 * i + 1) as f64) * s;
    }
    if l == m {
        return pmm;
    }
    let mut pm1 = x * (2 * m + 1) as f64 * pmm;
    if l == m + 1 {
        return pm1;
    }
    let mut cur = 0.0;
    for ll in m + 2..=l {
        cur = (x * (2 * ll - 1) as f64 * pm1 - (ll + m - 1) as f64 * pmm) / (ll - m) as f64;
        pmm = pm1;
        pm1 = cur;
    }
    cur
}

/// theta part of Y_lm with Condon-Shortley phase, Y_{l,-m} = (-1)^m conj(Y_lm).
fn ylm_theta(l: u32, m: i32, theta: f64) -> f64 {
    let am = m.unsigned_abs();
    let norm = ((2 * l + 1) as f64 / (4.0 * PI) * factorial(l - am) / factorial(l + am)).sqrt();
    let v = norm * assoc_legendre(l, am, theta.cos());
    if m < 0 && am % 2 == 1 {
        -v
    } else {
        v
    }
}

#[test]
fn angular_factor_matches_quadrature() {
    for l in 0..=3u32 {
        for m in -(l as i32)..=(l as i32) {
            for lo in 0..=4u32 {
                for j in -1..=1 {
                    let mo = m - j;
                    if mo.unsigned_abs() > lo {
                        continue;
                    }
                    let f = |t: f64| {
                        let op = if j == 0 { t.cos() } else { t.sin() };
                        ylm_theta(lo, mo, t) * op * ylm_theta(l, m, t) * t.sin()
                    };
                    let num = 2.0 * PI * integrate_finite(f, 0.0, PI, 1e-13).unwrap().value;
                    let exact = angular_factor(l, m, lo, mo, j);
                    assert!((num - exact).abs() < 1e-11, "l={l} m={m} lo={lo} j={j}: {num} vs {exact}");
                }
            }
        }
    }
}

#[test]
fn hydrogen_radial_dipole_moment() {
    let s = InternalState::hydrogen_1s();
    let p = InternalState::hydrogen_2p(0).unwrap();
    let r = InternalState::radial_moment(&s, &p, 3).unwrap();
    let exact = 2.0 / 24f64.sqrt() * 24.0 / 1.5f64.powi(5);
    assert!((r - exact).abs() < 1e-10);
    assert!((r - 1.29027).abs() < 1e-5);
    let v = i_rel(&p, &s, 0).unwrap();
    assert!((v - exact / 3f64.sqrt()).abs() < 1e-10);
}

#[test]
fn hydrogen_states_are_normalized() {
    for n in 1..=4 {
        for l in 0..n {
            let st = InternalState::hydrogen(n, l, 0).unwrap();
            assert!((st.norm_squared().unwrap() - 1.0).abs() < 1e-10, "n={n} l={l}");
        }
    }
    let generic = InternalState::hydrogen(2, 1, 1).unwrap();
    let builtin = InternalState::hydrogen_2p(1).unwrap();
    for r in [0.1, 1.0, 3.7, 9.0] {
        assert!(((generic.radial)(r) - (builtin.radial)(r)).abs() < 1e-14);
    }
    let s1 = InternalState::hydrogen(1, 0, 0).unwrap();
    assert!(((s1.radial)(0.7) - (InternalState::hydrogen_1s().radial)(0.7)).abs() < 1e-14);
    assert!(InternalState::hydrogen(2, 2, 0).is_err());
    assert!(InternalState::hydrogen_2p(2).is_err());
}

#[test]
fn i_rel_selection_zeros() {
    let s = InternalState::hydrogen_1s();
    let s2 = InternalState::hydrogen(2, 0, 0).unwrap();
    for j in -1..=1 {
        assert_eq!(i_rel(&s, &s2, j).unwrap(), 0.0);
    }
    let d = InternalState::hydrogen(3, 2, 2).unwrap();
    let p = InternalState::hydrogen_2p(0).unwrap();
    // |m_out| = |m_in| + 2 has no matching ladder term
    assert_eq!(i_rel(&p, &d, 1).unwrap(), 0.0);
    assert_eq!(i_rel(&p, &d, -1).unwrap(), 0.0);
    assert!(i_rel(&p, &s, 2).is_err());
    let mut bad = p.clone();
    bad.m_r = 3;
    assert!(i_rel(&bad, &s, 0).is_err());
}

// ---------------------------------------------------------------- triple Bessel

#[test]
fn triple_bessel_outside_cone_vanishes() {
    for (m, mr, n) in [(1, 0, 0), (0, 0, 0), (2, 1, 1), (1, 1, 2), (3, 0, 3)] {
        let r = triple_bessel(1.0, 1.0, 3.0, m, mr, n).unwrap();
        assert_eq!(r.regime, ConeRegime::Outside);
        assert!(r.value.abs() < 1e-12, "{m} {mr} {n}: {}", r.value);
        assert!(r.value.abs() < 1e-6 * r.partial_scale);
    }
}

#[test]
fn triple_bessel_outside_cone_with_negative_third_order_does_not_vanish() {
    // third order m_R + m - n = -1 at the convergence edge
    let r = triple_bessel(1.0, 1.0, 3.0, 1, 0, 2).unwrap();
    assert!((r.value + 1.0 / 6.0).abs() < 1e-9, "{}", r.value);
}

#[test]
fn triple_bessel_inside_cone_matches_triangle_area() {
    let r = triple_bessel(1.0, 1.0, 1.5, 0, 0, 0).unwrap();
    let s: f64 = 1.75;
    let area = (s * (s - 1.0) * (s - 1.0) * (s - 1.5)).sqrt();
    assert!((r.value - 1.0 / (2.0 * PI * area)).abs() < 1e-9);
    assert_eq!(r.regime, ConeRegime::Inside);
    let r = triple_bessel(1.0, 1.0, 1.5, 1, 0, 0).unwrap();
    assert!(r.value.abs() > 1e-2);
    assert!(r.candidate.is_some() && r.discrepancy.is_some());
}

#[test]
fn triple_bessel_equal_order_pair_matches_closed_form() {
    // int J_nu(a t) J_nu(b t) J_0(c t) t dt = cos(nu phi) / (pi a b sin phi)
    for (a, b, c, nu) in [(1.3f64, 1.0f64, 0.4f64, 3), (0.9, 1.4, 1.1, 2), (1.0, 1.0, 1.2, 1)] {
        let phi = ((a * a + b * b - c * c) / (2.0 * a * b)).acos();
        let exact = (nu as f64 * phi).cos() / (PI * a * b * phi.sin());
        // J_nu(a) R J_0(c) J_nu(b)
        let r = triple_bessel(a, c, b, nu, 0, 0).unwrap();
        assert!((r.value - exact).abs() < 1e-9, "{a} {b} {c} {nu}: {} vs {exact}", r.value);
        assert!((r.value - exact).abs() <= r.uncertainty.max(1e-12) * 3.0);
    }
}

#[test]
fn triple_bessel_boundary_cases() {
    assert!(matches!(triple_bessel(1.0, 1.0, 2.0, 1, 1, 0), Err(crate::Error::NonConvergent(_))));
    let r = triple_bessel(1.0, 1.0, 2.0, 1, 1, 1).unwrap();
    assert_eq!(r.regime, ConeRegime::Boundary);
    assert!(r.eps_regularized.is_some());
    assert!(r.uncertainty >= 1e-6 * r.value.abs());
    // Independent estimate: J_1(R) J_1(R) J_1(2R) integrated to X plus the
    // non-oscillating tail c0 X^{-3/2} + c1 X^{-5/2}, averaged over a period
    // to suppress the oscillating remainder. c1 / c0 = -9/16 from the
    // first Hankel correction of each factor.
    let f = |x: f64| bessel_j_int(1, x) * bessel_j_int(1, x) * bessel_j_int(1, 2.0 * x);
    let c0 = -(2.0 / PI).powf(1.5) / 8.0;
    let c1 = -9.0 / 16.0 * c0;
    let samples = 16;
    let x0: f64 = 2000.0;
    let panel = PI / 4.0;
    let panels = (x0 / panel) as usize;
    let mut base = 0.0;
    for i in 0..panels {
        base += integrate_finite(f, i as f64 * panel, (i + 1) as f64 * panel, 1e-14).unwrap().value;
    }
    let x0 = panels as f64 * panel;
    let mut acc = 0.0;
    let mut running = base;
    let mut last = x0;
    for i in 0..samples {
        let x = x0 + i as f64 * 2.0 * PI / samples as f64;
        if x > last {
            running += integrate_finite(f, last, x, 1e-14).unwrap().value;
            last = x;
        }
        acc += running + 2.0 * c0 / x.sqrt() + 2.0 / 3.0 * c1 / x.powf(1.5);
    }
    let estimate = acc / samples as f64;
    assert!((estimate - r.value).abs() < 1e-8 + r.uncertainty, "{estimate} vs {} ± {}", r.value, r.uncertainty);
}

#[test]
fn triple_bessel_rejects_bad_input() {
    assert!(triple_bessel(0.0, 1.0, 1.0, 0, 0, 0).is_err());
    assert!(triple_bessel(1.0, -1.0, 1.0, 0, 0, 0).is_err());
    assert!(triple_bessel(1.0, 1.0, f64::NAN, 0, 0, 0).is_err());
    assert!(matches!(triple_bessel(0.5, 1.5, 1.0, 0, 0, 0), Err(crate::Error::NonConvergent(_))));
}

#[test]
fn triple_bessel_large_n_is_regular_at_origin() {
    // the third order becomes negative, J_{-3} ~ R^3 keeps the integrand finite
    let r = triple_bessel(1.0, 1.0, 1.5, 0, 0, 3).unwrap();
    assert!(r.value.is_finite());
    let alt = triple_bessel(1.0, 1.0, 1.5, 0, 0, 3).unwrap();
    assert_eq!(r.value, alt.value);
}

#[test]
fn triple_bessel_printed_series_disagrees_with_oracle() {
    let r = triple_bessel(1.0, 0.8, 1.2, 2, 1, 0).unwrap();
    let c = r.candidate.unwrap();
    assert!((c - r.value).abs() > 1.0, "candidate {c} oracle {}", r.value);
}

#[test]
fn monotone_n_suppression_is_scale_dependent() {
    // I scales as lambda^{n-2} under k -> lambda k, so the ordering in n
    // reverses for large enough wavenumbers.
    let base: Vec<f64> = (0..3).map(|n| triple_bessel(1.0, 0.8, 1.2, 2, 1, n).unwrap().value.abs()).collect();
    assert!(base[0] >= base[1] && base[1] >= base[2]);
    let big: Vec<f64> = (0..3).map(|n| triple_bessel(10.0, 8.0, 12.0, 2, 1, n).unwrap().value.abs()).collect();
    for n in 0..3 {
        assert!(close(big[n], base[n] * 10f64.powi(n as i32 - 2), 1e-7), "{n}: {} vs {}", big[n], base[n]);
    }
    assert!(big[2] > big[1] && big[1] > big[0]);
}

#[test]
fn monotone_n_suppression_fails_at_unit_scale() {
    let k_out = 0.637_137_537_619_024_5 + 0.3 * 2.0;
    let v: Vec<f64> =
        (0..3).map(|n| triple_bessel(1.0, 1.637_137_537_619_024_5, k_out, 1, 1, n).unwrap().value.abs()).collect();
    assert!(v[0] < v[1] && v[1] < v[2], "{v:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]
    #[test]
    fn triple_bessel_vanishes_outside(k in 0.3f64..2.0, kr in 0.3f64..2.0, margin in 1.05f64..2.0,
                                      m in 0i32..=3, mr in 0i32..=3, n_raw in 0u32..=2) {
        let n = n_raw.min((m + mr) as u32);
        let r = triple_bessel(k, kr, margin * (k + kr), m, mr, n).unwrap();
        prop_assert!(r.value.abs() < 1e-6 * r.partial_scale);
    }

    #[test]
    fn triple_bessel_scaling_law(k in 0.5f64..1.5, kr in 0.5f64..1.5, frac in 0.2f64..0.9,
                                 lambda in 0.3f64..3.0, m in 0i32..=2, mr in 0i32..=2, n in 0u32..=2) {
        let ko = (k - kr).abs() + frac * (k + kr - (k - kr).abs());
        let a = triple_bessel(k, kr, ko, m, mr, n).unwrap();
        let b = triple_bessel(lambda * k, lambda * kr, lambda * ko, m, mr, n).unwrap();
        let expect = a.value * lambda.powi(n as i32 - 2);
        prop_assert!((b.value - expect).abs() <= 1e-8 * a.partial_scale.max(b.partial_scale) * lambda.powi(n as i32 - 2).max(1.0));
    }
}

// ---------------------------------------------------------------- centre of mass

#[test]
fn trapped_ground_state_gaussian() {
    let alpha = 1.3;
    let g = CenterOfMassState::trapped(0, 0, alpha, 0.4).unwrap();
    let out = CenterOfMassState::trapped(0, 0, alpha, 0.4 - 0.7).unwrap();
    for k in [0.2, 0.9, 2.0] {
        let c = icm0(&g, &out, k, 0.7, 0).unwrap();
        let x = alpha * alpha * k * k / 4.0;
        assert!((c.unnormalized - 0.5 * alpha * alpha * (-x).exp()).abs() < 1e-13);
        assert!((c.value.re - suppression_factor(k, alpha)).abs() < 1e-13);
        assert_eq!(c.gaussian_factor, Some(suppression_factor(k, alpha)));
        assert!(c.axial.satisfied);
        let cand = c.candidate.unwrap();
        assert!((cand - c.value.re).abs() > 1e-3 || alpha.sqrt() == 1.0);
    }
    let near = icm0(&g, &out, 1e-8, 0.7, 0).unwrap();
    assert!((near.value.re - 1.0).abs() < 1e-12);
}

#[test]
fn trapped_states_are_orthonormal() {
    let alpha = 0.8;
    for m in -2..=2 {
        for n1 in 0..3 {
            for n2 in 0..3 {
                let a = CenterOfMassState::trapped(m, n1, alpha, 0.0).unwrap();
                let b = CenterOfMassState::trapped(m, n2, alpha, 0.0).unwrap();
                let c = icm0(&a, &b, 1e-9, 0.0, 0).unwrap();
                let expect = if n1 == n2 { 1.0 } else { 0.0 };
                assert!((c.value.re - expect).abs() < 1e-10, "{m} {n1} {n2}: {}", c.value.re);
            }
        }
    }
}

/// Laguerre-Gauss-Bessel integral in the closed form obtained by matching the
/// generating-function derivation (beta = 1/alpha^2).
fn laguerre_gauss_reference(nu: u32, sigma: u32, lambda: u32, eta: u32, alpha: f64, k: f64) -> f64 {
    let beta = 1.0 / (alpha * alpha);
    let y = k * k / (4.0 * beta);
    let (mi, ni) = (lambda as f64, eta as f64);
    let sign = if (lambda + eta).is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * (2.0 * beta).powf(-(nu as f64) - 1.0)
        * k.powi(nu as i32)
        * (-y).exp()
        * laguerre(lambda, sigma as f64 - mi + ni, y)
        * laguerre(eta, nu as f64 - sigma as f64 + mi - ni, y)
}

#[test]
fn trapped_integral_matches_laguerre_gauss_reference() {
    let alpha = 1.1;
    let k = 0.9;
    for (m_in, nb_in, m_out, nb_out) in [(1, 0, -1, 1), (2, 1, 0, 0), (0, 2, -2, 1), (1, 1, -2, 0)] {
        let a = CenterOfMassState::trapped(m_in, nb_in, alpha, 0.0).unwrap();
        let b = CenterOfMassState::trapped(m_out, nb_out, alpha, 0.0).unwrap();
        let order = m_in - m_out;
        let c = icm0(&a, &b, k, 0.0, order).unwrap();
        let nu = order.unsigned_abs();
        let sigma = m_in.unsigned_abs();
        let reference = ho_normalization(nb_in, sigma, alpha)
            * ho_normalization(nb_out, m_out.unsigned_abs(), alpha)
            * alpha.powi(-(nu as i32))
            * laguerre_gauss_reference(nu, sigma, nb_out, nb_in, alpha, k)
            * if order < 0 && nu % 2 == 1 { -1.0 } else { 1.0 };
        assert!(
            (c.value.re - reference).abs() < 1e-12,
            "{m_in} {nb_in} {m_out} {nb_out}: {} vs {reference}",
            c.value.re
        );
        assert!(c.candidate.is_some());
        assert!((c.closed_form.unwrap() - reference).abs() < 1e-14 * reference.abs().max(1.0));
    }
}

#[test]
fn icm0_selection_and_errors() {
    let a = CenterOfMassState::trapped(1, 0, 1.0, 0.0).unwrap();
    let b = CenterOfMassState::trapped(1, 0, 1.0, 0.0).unwrap();
    let c = icm0(&a, &b, 0.5, 0.0, 1).unwrap();
    assert_eq!(c.value, Complex64::new(0.0, 0.0));
    let f = CenterOfMassState::free(1, 1.0, 0.0).unwrap();
    assert!(matches!(icm0(&a, &f, 0.5, 0.0, 1), Err(crate::Error::VariantMismatch)));
    assert!(CenterOfMassState::free(0, 0.0, 0.0).is_err());
    assert!(CenterOfMassState::trapped(0, 0, -1.0, 0.0).is_err());
}

#[test]
fn free_cm_integral_uses_triple_bessel() {
    let a = CenterOfMassState::free(1, 1.0, 0.5).unwrap();
    let b = CenterOfMassState::free(0, 3.0, 0.2).unwrap();
    let c = icm0(&a, &b, 1.0, 0.3, 1).unwrap();
    assert!(c.value.norm() < 1e-12);
    assert!(c.axial.satisfied);
    assert_eq!(c.regime, Some(ConeRegime::Outside));
    let b = CenterOfMassState::free(0, 1.5, 0.1).unwrap();
    let c = icm0(&a, &b, 1.0, 0.3, 1).unwrap();
    assert!(!c.axial.satisfied);
    // J_1(kR) with m_out - m_in = -1 picks up the reflection sign
    let t = triple_bessel(1.0, 1.0, 1.5, -1, 1, 0).unwrap();
    assert!((c.value.re + t.value).abs() < 1e-12);
    let direct = triple_bessel(1.0, 1.0, 1.5, 1, 1, 0).unwrap();
    assert!(direct.value.abs() > 1e-3);
}

#[test]
fn suppression_examples() {
    assert_eq!(suppression_factor(0.0, 2.0), 1.0);
    assert!((suppression_factor(2.0, 1.0) - (-1.0f64).exp()).abs() < 1e-15);
    assert!((suppression_factor(1.0, 2.0) - 0.36787944117144233).abs() < 1e-15);
}

#[test]
fn ho_vortex_examples() {
    let alpha = 1.7;
    for k in [0.3, 1.0, 2.0] {
        let r = ho_vortex_integral(0, alpha, k, 0, 0).unwrap();
        let exact = 0.5 * alpha * alpha * (-(alpha * alpha * k * k) / 4.0).exp();
        assert!((r.value - exact).abs() < 1e-13);
        assert!((r.quadrature.value - exact).abs() < 1e-12);
    }
    let tiny = ho_vortex_integral(1, 1e-3, 1.0, 2, 1).unwrap();
    assert!(tiny.value.abs() < 1e-9);
    assert!(ho_vortex_integral(0, 1.0, 1.0, 1, 2).is_err());
    // m = n = 2 is integrable although R^{m-2n+1} = R^{-1}
    let r = ho_vortex_integral(1, 1.0, 1.0, 2, 2).unwrap();
    assert!(close(r.value, r.quadrature.value, 1e-10));
    assert!(ho_vortex_integral(0, 0.0, 1.0, 1, 0).is_err());
}

#[test]
fn ho_vortex_series_matches_quadrature() {
    for x in [0.5f64, 1.0, 2.0, 4.0] {
        for (nb, m, n) in [(0, 0, 0), (1, 0, 0), (2, 3, 1), (3, 2, 2), (1, 4, 0), (4, 5, 3)] {
            let alpha = 1.3;
            let k = 2.0 * x.sqrt() / alpha;
            let r = ho_vortex_integral(nb, alpha, k, m, n).unwrap();
            assert!(
                close(r.value, r.quadrature.value, 1e-8),
                "x={x} {nb} {m} {n}: {} vs {}",
                r.value,
                r.quadrature.value
            );
            // Kummer transformation: 1F1(A+1; B+1; -X) = e^{-X} 1F1(n; B+1; X), a positive series
            let (a, b) = ((m + nb - n) as f64, (m + nb) as f64);
            let mut term = 1.0;
            let mut kummer = 1.0;
            for j in 0..200 {
                term *= (n as f64 + j as f64) / (b + 1.0 + j as f64) * x / (j as f64 + 1.0);
                kummer += term;
            }
            let pref = (0.5 * k).powi((m + 2 * nb) as i32) * alpha.powf(2.0 * (a + 1.0)) / (2.0 * factorial(nb))
                * factorial(m + nb - n)
                / factorial(m + nb);
            let _ = b;
            assert!(close(r.value, pref * (-x).exp() * kummer, 1e-12));
        }
    }
}

#[test]
fn ho_vortex_printed_candidate_is_reported() {
    let r = ho_vortex_integral(1, 1.4, 1.1, 2, 1).unwrap();
    assert!(r.candidate.is_finite());
    assert!((r.discrepancy - (r.candidate - r.value)).abs() < 1e-15);
    assert!(!close(r.candidate, r.value, 1e-3));
}

// ---------------------------------------------------------------- amplitudes

fn coupling() -> DipoleCoupling {
    DipoleCoupling { charge: -1.0, energy_gap: 0.375 }
}

#[test]
fn te_has_no_axial_dipole_channel() {
    let mode = ModeSpec::new(ModeKind::TE, 1, 0.6, 0.8).unwrap();
    let cm_in = CenterOfMassState::trapped(1, 0, 1.2, 0.5).unwrap();
    let cm_out = CenterOfMassState::trapped(0, 0, 1.2, 0.5 - 0.8).unwrap();
    let p = InternalState::hydrogen_2p(0).unwrap();
    let s = InternalState::hydrogen_1s();
    let amps = dipole_amplitude(&mode, &cm_in, &cm_out, &p, &s, &coupling()).unwrap();
    assert!(amps.is_empty());
    let tm = ModeSpec::new(ModeKind::TM, 1, 0.6, 0.8).unwrap();
    let amps = dipole_amplitude(&tm, &cm_in, &cm_out, &p, &s, &coupling()).unwrap();
    assert_eq!(amps.len(), 1);
    assert_eq!(amps[0].channel.delta_m_r, 0);
    assert_eq!(amps[0].channel.delta_m_cm, -1);
}

#[test]
fn tm_axial_amplitude_structure() {
    let (k, kz) = (0.6, 0.8);
    let mode = ModeSpec::new(ModeKind::TM, 0, k, kz).unwrap();
    let cm_in = CenterOfMassState::trapped(0, 0, 1.0, 0.0).unwrap();
    let cm_out = CenterOfMassState::trapped(0, 0, 1.0, -kz).unwrap();
    let p = InternalState::hydrogen_2p(0).unwrap();
    let s = InternalState::hydrogen_1s();
    let amps = dipole_amplitude(&mode, &cm_in, &cm_out, &p, &s, &coupling()).unwrap();
    assert_eq!(amps.len(), 1);
    let a = amps[0];
    let icm = icm0(&cm_in, &cm_out, k, kz, 0).unwrap().value;
    let irel = i_rel(&p, &s, 0).unwrap();
    let e0 = crate::fields::normalization_e0(k, kz);
    let omega = k.hypot(kz);
    // conj(-i k E0 / (kz omega)) times (q / i) dE
    let c =
        Complex64::new(0.0, -coupling().charge * coupling().energy_gap) * Complex64::new(0.0, k * e0 / (kz * omega));
    let expect = c * icm * irel;
    assert!((a.amplitude - expect).norm() < 1e-14);
    assert!((a.amplitude - a.factors.coupling * a.factors.cm_integral * a.factors.rel_integral).norm() < 1e-16);
    // ratio to the transverse scale E0 / (2 omega) is 2 k / k_z
    let ratio = c.norm() / (coupling().energy_gap * e0 / (2.0 * omega));
    assert!((ratio - 2.0 * k / kz).abs() < 1e-12);
}

#[test]
fn nonconserving_configuration_has_no_channel() {
    let mode = ModeSpec::new(ModeKind::TM, 2, 0.6, 0.8).unwrap();
    let cm_in = CenterOfMassState::trapped(1, 0, 1.0, 0.0).unwrap();
    let cm_out = CenterOfMassState::trapped(1, 0, 1.0, -0.8).unwrap();
    let p = InternalState::hydrogen_2p(1).unwrap();
    let s = InternalState::hydrogen_1s();
    assert!(dipole_amplitude(&mode, &cm_in, &cm_out, &p, &s, &coupling()).unwrap().is_empty());
}

#[test]
fn amplitude_errors() {
    let mode = ModeSpec::new(ModeKind::TM, 2, 0.6, 0.8).unwrap();
    let t = CenterOfMassState::trapped(1, 0, 1.0, 0.0).unwrap();
    let f = CenterOfMassState::free(1, 1.0, 0.0).unwrap();
    let p = InternalState::hydrogen_2p(1).unwrap();
    let s = InternalState::hydrogen_1s();
    assert!(matches!(dipole_amplitude(&mode, &t, &f, &p, &s, &coupling()), Err(crate::Error::VariantMismatch)));
    let mut bad = p.clone();
    bad.m_r = -2;
    assert!(dipole_amplitude(&mode, &t, &t, &bad, &s, &coupling()).is_err());
    let l = ModeSpec::new(ModeKind::L, 2, 0.6, 0.8).unwrap();
    assert!(dipole_amplitude(&l, &t, &t, &p, &s, &coupling()).is_err());
}

#[test]
fn emission_is_conjugate_of_reverse_absorption() {
    let (k, kz) = (0.7, 0.5);
    for kind in [ModeKind::TE, ModeKind::TM] {
        for m in [-2, 0, 1, 3] {
            let mode = ModeSpec::new(kind, m, k, kz).unwrap();
            for p_in in -1..=1 {
                let int_in = InternalState::hydrogen_2p(p_in).unwrap();
                let int_out = InternalState::hydrogen_1s();
                let j = p_in;
                let l = m - j;
                let cm_in = CenterOfMassState::trapped(1, 1, 1.3, 0.4).unwrap();
                let cm_out = CenterOfMassState::trapped(1 - l, 0, 1.3, 0.4 - kz).unwrap();
                let fwd = DipoleCoupling { charge: -1.0, energy_gap: 0.375 };
                let back = DipoleCoupling { charge: -1.0, energy_gap: -0.375 };
                let em = dipole_amplitude(&mode, &cm_in, &cm_out, &int_in, &int_out, &fwd).unwrap();
                let ab = dipole_absorption_amplitude(&mode, &cm_out, &cm_in, &int_out, &int_in, &back).unwrap();
                assert_eq!(em.len(), ab.len(), "{kind} m={m} j={j}");
                for (e, a) in em.iter().zip(&ab) {
                    assert!((e.amplitude - a.amplitude.conj()).norm() < 1e-14 * e.amplitude.norm().max(1e-300));
                    assert_eq!(e.channel.delta_m_cm, -a.channel.delta_m_cm);
                }
                if kind == ModeKind::TE && j == 0 {
                    assert!(em.is_empty());
                } else {
                    assert_eq!(em.len(), 1);
                }
            }
        }
    }
}

#[test]
fn free_atom_amplitude_carries_axial_constraint() {
    let (k, kz) = (0.8, 0.6);
    let mode = ModeSpec::new(ModeKind::TE, 1, k, kz).unwrap();
    let cm_in = CenterOfMassState::free(2, 1.0, 0.3).unwrap();
    let cm_out = CenterOfMassState::free(2, 1.2, 0.3 - kz).unwrap();
    let int_in = InternalState::hydrogen_2p(1).unwrap();
    let int_out = InternalState::hydrogen_1s();
    let amps = dipole_amplitude(&mode, &cm_in, &cm_out, &int_in, &int_out, &coupling()).unwrap();
    assert_eq!(amps.len(), 1);
    assert!(amps[0].axial.satisfied);
    assert!((amps[0].axial.required_k_z_out - (0.3 - kz)).abs() < 1e-15);
    let off = CenterOfMassState::free(2, 1.2, 0.0).unwrap();
    assert!(dipole_amplitude(&mode, &cm_in, &off, &int_in, &int_out, &coupling()).unwrap().is_empty());
}

fn particle() -> SpinParticle {
    SpinParticle { g: 2.0, charge: -1.0, mass: 1.0 }
}

#[test]
fn spin_flip_up_tm_factor() {
    let (k, kz, m) = (0.9, 0.7, 2);
    let mode = ModeSpec::new(ModeKind::TM, m, k, kz).unwrap();
    let s = InternalState::hydrogen_1s();
    let cm_in = CenterOfMassState::trapped(0, 0, 1.1, 0.0).unwrap();
    let cm_out = CenterOfMassState::trapped(-(m + 1), 0, 1.1, -kz).unwrap();
    let a = spin_matrix_element(&mode, &particle(), -0.5, 0.5, &cm_in, &cm_out, &s, &s).unwrap().unwrap();
    assert_eq!(a.channel.delta_spin_e, 1);
    assert_eq!(a.channel.bessel_order, m + 1);
    assert_eq!(a.channel.total_change(), -m);
    let omega = k.hypot(kz);
    let e0 = crate::fields::normalization_e0(k, kz);
    let p = particle();
    let expect = p.g * p.charge * omega * e0 / (4.0 * p.mass * kz);
    assert!((a.factors.coupling - Complex64::new(expect, 0.0)).norm() < 1e-15);
    let icm = icm0(&cm_in, &cm_out, k, kz, m + 1).unwrap().value;
    assert!((a.factors.cm_integral - icm).norm() < 1e-15);
    assert!((a.factors.rel_integral - 1.0).abs() < 1e-10);
}

#[test]
fn spin_z_coupling_only_for_te() {
    let (k, kz, m) = (0.9, 0.7, 1);
    let s = InternalState::hydrogen_1s();
    let cm_in = CenterOfMassState::trapped(1, 0, 1.1, 0.0).unwrap();
    let cm_out = CenterOfMassState::trapped(1 - m, 0, 1.1, -kz).unwrap();
    let tm = ModeSpec::new(ModeKind::TM, m, k, kz).unwrap();
    assert!(spin_matrix_element(&tm, &particle(), 0.5, 0.5, &cm_in, &cm_out, &s, &s).unwrap().is_none());
    let te = ModeSpec::new(ModeKind::TE, m, k, kz).unwrap();
    let a = spin_matrix_element(&te, &particle(), 0.5, 0.5, &cm_in, &cm_out, &s, &s).unwrap().unwrap();
    assert_eq!(a.channel.delta_m_cm, -m);
    let e0 = crate::fields::normalization_e0(k, kz);
    let p = particle();
    // (g q / 2M) (k E0 / k_z) <S_z>
    let expect = p.g * p.charge / (2.0 * p.mass) * k * e0 / kz;
    assert!((a.factors.coupling.re - expect).abs() < 1e-15);
    assert!((a.factors.rel_integral - 0.5).abs() < 1e-10);
}

#[test]
fn spin_element_edge_cases() {
    let mode = ModeSpec::new(ModeKind::TE, 1, 0.9, 0.7).unwrap();
    let s = InternalState::hydrogen_1s();
    let p = InternalState::hydrogen_2p(0).unwrap();
    let cm = CenterOfMassState::trapped(0, 0, 1.0, 0.0).unwrap();
    assert!(spin_matrix_element(&mode, &particle(), 0.5, 1.0, &cm, &cm, &s, &s).is_err());
    // internal spatial state must be unchanged at leading order
    let out = CenterOfMassState::trapped(0, 0, 1.0, -0.7).unwrap();
    assert!(spin_matrix_element(&mode, &particle(), -0.5, 0.5, &cm, &out, &s, &p).unwrap().is_none());
}
