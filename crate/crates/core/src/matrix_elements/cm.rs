use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{ensure_finite, Error, Result};
use crate::quadrature::{cross_validated, integrate_finite_with, Oscillation, QuadOptions, QuadResult};
use crate::specfun::{bessel_j_int, factorial, gamma, hyp2f2, laguerre, SeriesResult};

use super::types::{ho_normalization, AxialConstraint, CenterOfMassState, CmProfile};

/// Relative tolerance requested from the semi-infinite Bessel oracle.
pub const TRIPLE_TOL: f64 = 1e-10;

const CANDIDATE_TERM_CAP: usize = 4000;

/// Relative truncation tolerance of the alternating vortex series.
const SERIES_TOL: f64 = 1e-16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConeRegime {
    /// `k_out < k + k_R` (and no other beat frequency vanishes).
    Inside,
    /// `k_out > k + k_R`.
    Outside,
    /// A beat frequency of the three Bessel factors vanishes.
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TripleBesselReport {
    pub value: f64,
    pub uncertainty: f64,
    /// Largest magnitude of the running partial integrals.
    pub partial_scale: f64,
    pub regime: ConeRegime,
    pub zero_partition: QuadResult,
    pub eps_regularized: Option<QuadResult>,
    /// Printed closed-form double series, evaluated for `m, m_R >= 0` inside the cone.
    pub candidate: Option<f64>,
    pub discrepancy: Option<f64>,
}

fn check_wavenumber(name: &str, k: f64) -> Result<()> {
    ensure_finite(name, k)?;
    if k <= 0.0 {
        return Err(Error::InvalidArgument(format!("{name} must be > 0, got {k}")));
    }
    Ok(())
}

fn cone_regime(k: f64, k_r: f64, k_out: f64) -> ConeRegime {
    let scale = k + k_r + k_out;
    let beats = [k + k_r - k_out, k - k_r + k_out, -k + k_r + k_out];
    if beats.iter().any(|b| b.abs() <= 1e-12 * scale) {
        ConeRegime::Boundary
    } else if k_out > k + k_r {
        ConeRegime::Outside
    } else {
        ConeRegime::Inside
    }
}

/// `int_0^inf J_m(k R) R^{1-n} J_{m_R}(k_R R) J_{m_R+m-n}(k_out R) dR`.
///
/// Evaluated by the cross-validated semi-infinite Bessel oracle. For integer
/// orders the integrand is regular at the origin (`J_{-j}` vanishes like
/// `R^j`), so every `n >= 0` converges away from the boundary. On the
/// boundary of the transverse-momentum cone the `n = 0` integral diverges.
/// For `n >= 1` the non-oscillating power-law tail is subtracted through its
/// Hankel expansion and integrated in closed form; the oscillating remainder
/// goes to the cross-validated oracle and the uncertainty is enlarged.
pub fn triple_bessel(k: f64, k_r: f64, k_out: f64, m: i32, m_r: i32, n: u32) -> Result<TripleBesselReport> {
    check_wavenumber("k_perp", k)?;
    check_wavenumber("k_perp_R", k_r)?;
    check_wavenumber("k_perp_R'", k_out)?;
    let ni = n as i32;
    let third = m_r + m - ni;
    let regime = cone_regime(k, k_r, k_out);
    if regime == ConeRegime::Boundary && n == 0 {
        return Err(Error::NonConvergent(
            "n = 0 on the transverse-momentum boundary: the tail decays as R^{-1/2}".into(),
        ));
    }
    let f = move |x: f64| {
        if x == 0.0 {
            return 0.0;
        }
        bessel_j_int(m, k * x) * x.powi(1 - ni) * bessel_j_int(m_r, k_r * x) * bessel_j_int(third, k_out * x)
    };
    let osc = Oscillation::bessel_product(&[(m, k), (m_r, k_r), (third, k_out)]);
    let (value, uncertainty, partial_scale, zp, er) = if regime == ConeRegime::Boundary {
        let tail = StaticTail::new([(m, k), (m_r, k_r), (third, k_out)], n);
        let h = |x: f64| f(x) - tail.switched(x);
        let oscillating = Oscillation { has_static_component: false, ..osc };
        let cv = cross_validated(h, &oscillating, TRIPLE_TOL)?;
        let (tail_value, tail_err) = tail.integral()?;
        let value = cv.value + tail_value;
        let unc = (10.0 * cv.uncertainty + tail_err).max(1e-6 * value.abs());
        (value, unc, cv.partial_scale.max(value.abs()), cv.zero_partition, Some(cv.eps_regularized))
    } else {
        let cv = cross_validated(f, &osc, TRIPLE_TOL)?;
        (cv.value, cv.uncertainty, cv.partial_scale, cv.zero_partition, Some(cv.eps_regularized))
    };
    let candidate = if regime == ConeRegime::Inside && m >= 0 && m_r >= 0 {
        triple_bessel_candidate(k, k_r, k_out, m as u32, m_r as u32, n)
    } else {
        None
    };
    Ok(TripleBesselReport {
        value,
        uncertainty,
        partial_scale,
        regime,
        zero_partition: zp,
        eps_regularized: er,
        candidate,
        discrepancy: candidate.map(|c| c - value),
    })
}

/// Non-oscillating large-argument part of a triple Bessel integrand whose
/// beat frequency vanishes, `sum_j c_j x^{-1/2-n-j}`, switched on smoothly
/// between `start / 2` and `start`.
struct StaticTail {
    coefficients: Vec<f64>,
    n: u32,
    start: f64,
}

const TAIL_TERMS: usize = 6;

impl StaticTail {
    fn new(factors: [(i32, f64); 3], n: u32) -> Self {
        let total: f64 = factors.iter().map(|f| f.1).sum();
        let sigma = (0u32..8)
            .map(|mask| [0, 1, 2].map(|i| if mask >> i & 1 == 1 { -1.0 } else { 1.0 }))
            .filter(|s| s[0] > 0.0)
            .min_by(|a, b| {
                let beat = |s: &[f64; 3]| (0..3).map(|i| s[i] * factors[i].1).sum::<f64>().abs();
                beat(a).total_cmp(&beat(b))
            })
            .unwrap();
        debug_assert!((0..3).map(|i| sigma[i] * factors[i].1).sum::<f64>().abs() <= 1e-12 * total);
        // Hankel expansion: J_nu(y) = Re[sqrt(2/(pi y)) e^{i w} sum_j i^j a_j(nu) y^{-j}].
        let hankel = |nu: i32, k: f64, sign: f64| -> Vec<Complex64> {
            let nu2 = 4.0 * (nu as f64).powi(2);
            let mut a = 1.0;
            (0..=TAIL_TERMS)
                .map(|j| {
                    if j > 0 {
                        let l = j as f64;
                        a *= (nu2 - (2.0 * l - 1.0).powi(2)) / (8.0 * l);
                    }
                    Complex64::new(0.0, sign).powi(j as i32) * a / k.powi(j as i32)
                })
                .collect()
        };
        let mut series = vec![Complex64::new(1.0, 0.0)];
        let mut phase = 0.0;
        for (i, &(nu, k)) in factors.iter().enumerate() {
            let h = hankel(nu, k, sigma[i]);
            let mut next = vec![Complex64::new(0.0, 0.0); TAIL_TERMS + 1];
            for (p, sp) in series.iter().enumerate() {
                for (q, hq) in h.iter().enumerate().take(TAIL_TERMS + 1 - p) {
                    next[p + q] += sp * hq;
                }
            }
            series = next;
            phase += sigma[i] * (-(nu as f64) * PI / 2.0 - PI / 4.0);
        }
        let prefactor = (2.0 / PI).powf(1.5) / (factors[0].1 * factors[1].1 * factors[2].1).sqrt() / 4.0;
        let rotation = Complex64::from_polar(1.0, phase);
        let coefficients = series.iter().map(|c| prefactor * (rotation * c).re).collect();
        let max_order = factors.iter().map(|f| f.0.abs()).max().unwrap() as f64;
        let k_min = factors.iter().map(|f| f.1).fold(f64::INFINITY, f64::min);
        let start = (8.0f64).max(2.0 * max_order * max_order) / k_min;
        StaticTail { coefficients, n, start }
    }

    fn bare(&self, x: f64, terms: usize) -> f64 {
        let inv = 1.0 / x;
        let mut power = x.powf(-0.5 - self.n as f64);
        let mut total = 0.0;
        for c in &self.coefficients[..terms] {
            total += c * power;
            power *= inv;
        }
        total
    }

    fn switch(&self, x: f64) -> f64 {
        let t = ((2.0 * x - self.start) / self.start).clamp(0.0, 1.0);
        t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
    }

    fn switched(&self, x: f64) -> f64 {
        if x <= 0.5 * self.start {
            0.0
        } else {
            self.switch(x) * self.bare(x, TAIL_TERMS)
        }
    }

    /// Integral of the switched tail and the size of the first omitted term.
    fn integral(&self) -> Result<(f64, f64)> {
        let ramp = integrate_finite_with(
            |x| self.switched(x),
            0.5 * self.start,
            self.start,
            &QuadOptions { abs_tol: 1e-15, rel_tol: 1e-13, max_evaluations: 100_000 },
        )?;
        let exponent = |j: usize| 0.5 - self.n as f64 - j as f64;
        let beyond = |j: usize| self.coefficients[j] * self.start.powf(exponent(j)) / -exponent(j);
        let analytic: f64 = (0..TAIL_TERMS).map(beyond).sum();
        Ok((ramp.value + analytic, beyond(TAIL_TERMS).abs() + ramp.abs_error_estimate))
    }
}

/// The closed-form double series printed for the inside of the cone,
/// summed verbatim (real Gamma for the half-integer argument).
pub fn triple_bessel_candidate(k: f64, k_r: f64, k_out: f64, m: u32, m_r: u32, n: u32) -> Option<f64> {
    let a = m_r as f64 + m as f64 - n as f64 + 1.0;
    let g = gamma(1.5 * (a - 1.0) + 2.0);
    if !g.is_finite() {
        return None;
    }
    let prefactor =
        2f64.powi(2 - n as i32) * k.powi(m as i32) * k_r.powi(m_r as i32) * k_out.powi(m as i32 + m_r as i32 - 2) * g
            / (factorial(m) * factorial(m_r));
    let x = (k / k_out).powi(2);
    let y = (k_r / k_out).powi(2);
    let mut total = 0.0;
    // row_head = (a)_v y^v / ((1 + m_R)_v v!)
    let mut row_head = 1.0;
    for v in 0..CANDIDATE_TERM_CAP {
        if v > 0 {
            let vf = v as f64;
            row_head *= (a + vf - 1.0) * y / ((m_r as f64 + vf) * vf);
        }
        let mut term = row_head;
        let mut row = 0.0;
        for u in 0..CANDIDATE_TERM_CAP {
            if u > 0 {
                let uf = u as f64;
                term *= (a + v as f64 + uf - 1.0) * x / ((m as f64 + uf) * uf);
            }
            row += term;
            if term == 0.0 || (u > 2 && term.abs() < 1e-17 * row.abs()) {
                break;
            }
        }
        total += row;
        if row_head == 0.0 || (v > 2 && row.abs() < 1e-17 * total.abs()) {
            break;
        }
        if !total.is_finite() {
            return None;
        }
    }
    let value = prefactor * total;
    value.is_finite().then_some(value)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CmIntegral {
    /// Transverse radial factor; for trapped states it includes both normalizations.
    pub value: Complex64,
    pub uncertainty: f64,
    /// Integral without the oscillator normalization constants.
    pub unnormalized: f64,
    pub axial: AxialConstraint,
    /// Printed closed form for trapped states when its index pattern applies.
    pub candidate: Option<f64>,
    /// Generating-function closed form under the same conditions.
    pub closed_form: Option<f64>,
    /// `e^{-alpha^2 k^2 / 4}` for trapped states.
    pub gaussian_factor: Option<f64>,
    pub regime: Option<ConeRegime>,
}

/// Integration cutoff for products of oscillator states in units of the
/// larger oscillator length.
fn gaussian_cutoff(powers: u32) -> f64 {
    (80.0 + 4.0 * powers as f64).sqrt()
}

/// Finite-interval quadrature with the absolute tolerance tied to
/// `int |f|`, which keeps the target above the rounding floor of the rule.
fn l1_scaled_integral<F: Fn(f64) -> f64>(f: F, upper: f64) -> Result<QuadResult> {
    let l1 = integrate_finite_with(
        |x| f(x).abs(),
        0.0,
        upper,
        &QuadOptions { abs_tol: f64::MIN_POSITIVE, rel_tol: 1e-6, max_evaluations: 400_000 },
    )?;
    if l1.value == 0.0 {
        return Ok(QuadResult { value: 0.0, abs_error_estimate: 0.0, ..l1 });
    }
    integrate_finite_with(
        f,
        0.0,
        upper,
        &QuadOptions { abs_tol: 1e-13 * l1.value, rel_tol: 1e-13, max_evaluations: 2_000_000 },
    )
}

pub(crate) struct RadialCm {
    pub value: f64,
    pub uncertainty: f64,
    pub unnormalized: f64,
    pub candidate: Option<f64>,
    pub closed_form: Option<f64>,
    pub regime: Option<ConeRegime>,
}

/// `int_0^inf R Y_out(R) J_l(k R) Y_in(R) dR` for profiles whose orders
/// satisfy `|m_out - m_in| = |l|`.
pub(crate) fn radial_cm_integral(
    cm_in: &CenterOfMassState,
    cm_out: &CenterOfMassState,
    k: f64,
    l: i32,
) -> Result<RadialCm> {
    match (cm_in.profile, cm_out.profile) {
        (CmProfile::FreeBessel { k_perp_cm: k_in }, CmProfile::FreeBessel { k_perp_cm: k_o }) => {
            let diff = cm_out.m_cm - cm_in.m_cm;
            let sign = if diff == l {
                1.0
            } else if diff == -l {
                if l.rem_euclid(2) == 0 {
                    1.0
                } else {
                    -1.0
                }
            } else {
                return Err(Error::InvalidArgument(format!(
                    "orders {} -> {} are not connected by J_{l}",
                    cm_in.m_cm, cm_out.m_cm
                )));
            };
            let rep = triple_bessel(k, k_in, k_o, diff, cm_in.m_cm, 0)?;
            let v = sign * rep.value;
            Ok(RadialCm {
                value: v,
                uncertainty: rep.uncertainty,
                unnormalized: v,
                candidate: None,
                closed_form: None,
                regime: Some(rep.regime),
            })
        }
        (CmProfile::TrappedHO { n_bar: nb_in, alpha: a_in }, CmProfile::TrappedHO { n_bar: nb_o, alpha: a_o }) => {
            let (am_in, am_o) = (cm_in.m_cm.unsigned_abs(), cm_out.m_cm.unsigned_abs());
            let norm = ho_normalization(nb_in, am_in, a_in) * ho_normalization(nb_o, am_o, a_o);
            let f = move |r: f64| {
                let (x_in, x_o) = (r / a_in, r / a_o);
                r * (-0.5 * (x_in * x_in + x_o * x_o)).exp()
                    * x_in.powi(am_in as i32)
                    * x_o.powi(am_o as i32)
                    * laguerre(nb_in, am_in as f64, x_in * x_in)
                    * laguerre(nb_o, am_o as f64, x_o * x_o)
                    * bessel_j_int(l, k * r)
            };
            let a_max = a_in.max(a_o);
            let upper = a_max * gaussian_cutoff(2 * (nb_in + nb_o) + am_in + am_o);
            let q = l1_scaled_integral(f, upper)?;
            let (candidate, closed_form) = if a_in == a_o && am_in + am_o == l.unsigned_abs() {
                let sign = if l < 0 && l.rem_euclid(2) == 1 { -1.0 } else { 1.0 };
                let nu = l.unsigned_abs();
                let scale = sign * a_in.powi(-(nu as i32)) * norm;
                (
                    Some(scale * laguerre_gauss_candidate(nu, am_in, nb_o, nb_in, a_in, k)),
                    Some(scale * laguerre_gauss_closed_form(nu, am_in, nb_o, nb_in, a_in, k)),
                )
            } else {
                (None, None)
            };
            Ok(RadialCm {
                value: q.value * norm,
                uncertainty: q.abs_error_estimate * norm,
                unnormalized: q.value,
                candidate,
                closed_form,
                regime: None,
            })
        }
        _ => Err(Error::VariantMismatch),
    }
}

/// The printed closed form for
/// `int x^{nu+1} e^{-x^2/alpha^2} L_lambda^{nu-sigma} L_eta^sigma J_nu(k x) dx`,
/// evaluated verbatim.
pub fn laguerre_gauss_candidate(nu: u32, sigma: u32, lambda: u32, eta: u32, alpha: f64, k: f64) -> f64 {
    let (nu_f, sigma_f, lambda_f, eta_f) = (nu as f64, sigma as f64, lambda as f64, eta as f64);
    let x = alpha * alpha * k * k / 4.0;
    let sign = if (lambda + eta).is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * (2.0 / alpha.sqrt()).powf(-nu_f - 1.0)
        * k.powi(nu as i32)
        * (-x).exp()
        * laguerre(eta, sigma_f - lambda_f - eta_f, x)
        * laguerre(lambda, nu_f - sigma_f + lambda_f - eta_f, x)
}

/// The same integral as [`laguerre_gauss_candidate`] in the closed form
/// that follows from the Laguerre generating function.
pub fn laguerre_gauss_closed_form(nu: u32, sigma: u32, lambda: u32, eta: u32, alpha: f64, k: f64) -> f64 {
    let (nu_f, sigma_f, lambda_f, eta_f) = (nu as f64, sigma as f64, lambda as f64, eta as f64);
    let x = alpha * alpha * k * k / 4.0;
    let sign = if (lambda + eta).is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * (alpha * alpha / 2.0).powf(nu_f + 1.0)
        * k.powi(nu as i32)
        * (-x).exp()
        * laguerre(lambda, sigma_f - lambda_f + eta_f, x)
        * laguerre(eta, nu_f - sigma_f + lambda_f - eta_f, x)
}

/// Leading-order centre-of-mass integral for emission of a photon with
/// transverse wavenumber `k_perp`, axial wavenumber `k_z`, through the Bessel
/// factor of the given order.
///
/// Azimuthal selection requires `m_out = m_in - order`; otherwise the
/// integral is exactly zero. The axial plane-wave overlap is never turned
/// into a number: it is returned as [`AxialConstraint`] metadata.
pub fn icm0(
    cm_in: &CenterOfMassState,
    cm_out: &CenterOfMassState,
    k_perp: f64,
    k_z: f64,
    order: i32,
) -> Result<CmIntegral> {
    cm_in.validate()?;
    cm_out.validate()?;
    check_wavenumber("k_perp", k_perp)?;
    ensure_finite("k_z", k_z)?;
    let trapped = match (cm_in.profile, cm_out.profile) {
        (CmProfile::FreeBessel { .. }, CmProfile::FreeBessel { .. }) => None,
        (CmProfile::TrappedHO { alpha, .. }, CmProfile::TrappedHO { .. }) => Some(alpha),
        _ => return Err(Error::VariantMismatch),
    };
    let axial = AxialConstraint::new(cm_in.k_z_cm - k_z, cm_out.k_z_cm);
    let gaussian_factor = trapped.map(|alpha| suppression_factor(k_perp, alpha));
    if cm_out.m_cm != cm_in.m_cm - order {
        return Ok(CmIntegral {
            value: Complex64::new(0.0, 0.0),
            uncertainty: 0.0,
            unnormalized: 0.0,
            axial,
            candidate: None,
            closed_form: None,
            gaussian_factor,
            regime: None,
        });
    }
    let r = radial_cm_integral(cm_in, cm_out, k_perp, order)?;
    Ok(CmIntegral {
        value: Complex64::new(r.value, 0.0),
        uncertainty: r.uncertainty,
        unnormalized: r.unnormalized,
        axial,
        candidate: r.candidate,
        closed_form: r.closed_form,
        gaussian_factor,
        regime: r.regime,
    })
}

/// `e^{-k^2 alpha^2 / 4}`.
pub fn suppression_factor(k_perp: f64, alpha: f64) -> f64 {
    (-0.25 * k_perp * k_perp * alpha * alpha).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HoVortexReport {
    /// Series value, `(k/2)^{m+2 n_bar} alpha^{2(m-n+n_bar+1)} / (2 n_bar!) (A!/B!) 1F1(A+1; B+1; -X)`
    /// with `A = m + n_bar - n`, `B = m + n_bar`, `X = k^2 alpha^2 / 4`.
    pub value: f64,
    pub series: SeriesResult,
    pub quadrature: QuadResult,
    /// Printed closed form, evaluated verbatim.
    pub candidate: f64,
    pub discrepancy: f64,
}

/// `int_0^inf R^{m-2n+1} e^{-R^2/alpha^2} J_m(k R) L_{n_bar}^{m-n}(R^2/alpha^2) dR`.
pub fn ho_vortex_integral(n_bar: u32, alpha: f64, k_perp: f64, m: u32, n: u32) -> Result<HoVortexReport> {
    check_wavenumber("alpha", alpha)?;
    ensure_finite("k_perp", k_perp)?;
    if k_perp < 0.0 {
        return Err(Error::InvalidArgument(format!("k_perp must be >= 0, got {k_perp}")));
    }
    if n > m {
        return Err(Error::NonConvergent(format!(
            "integrand behaves as R^{} at the origin (m={m}, n={n})",
            2 * m as i64 - 2 * n as i64 + 1
        )));
    }
    let x = 0.25 * k_perp * k_perp * alpha * alpha;
    let a = m + n_bar - n;
    let b = m + n_bar;
    let hyp = hyp2f2(a as f64 + 1.0, 1.0, b as f64 + 1.0, 1.0, -x, SERIES_TOL)?;
    let ratio = factorial(a) / factorial(b);
    let prefactor =
        (0.5 * k_perp).powi((m + 2 * n_bar) as i32) * alpha.powi(2 * (a as i32 + 1)) / (2.0 * factorial(n_bar)) * ratio;
    let series = SeriesResult {
        value: prefactor * hyp.value,
        terms_used: hyp.terms_used,
        truncation_estimate: prefactor.abs() * hyp.truncation_estimate,
    };

    let power = m as i32 - 2 * n as i32 + 1;
    let f = move |r: f64| {
        let t = r / alpha;
        r.powi(power) * (-t * t).exp() * bessel_j_int(m as i32, k_perp * r) * laguerre(n_bar, (m - n) as f64, t * t)
    };
    let upper = alpha * gaussian_cutoff(2 * n_bar + 2 * m);
    let quadrature = l1_scaled_integral(f, upper)?;

    let s = alpha.sqrt();
    let candidate_sum = ratio * hyp.value;
    let candidate = k_perp.powi((m + 2 * n) as i32) / (2f64.powi((m + 2 * n + 1) as i32) * factorial(n_bar))
        * s.powi(n_bar as i32 + 1)
        * candidate_sum
        / s.powi(n as i32 - m as i32);
    Ok(HoVortexReport { value: series.value, series, quadrature, candidate, discrepancy: candidate - series.value })
}
