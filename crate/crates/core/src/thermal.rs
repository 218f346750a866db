//! Thermal additions to the vacuum elements, the monotonicity machinery behind
//! the temperature theorem, and the massless thermal Wightman function.
//!
//! For a Gibbs state the two-point function is the vacuum one plus
//! `\int d^3k/(2w) n(w) [e^{-i w dt + i k.dx} + c.c.]` with `n` the Bose factor,
//! so every quantity here is a radial integral weighted by `n(w)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::model::{dispersion, gaussian_switching_ft, sinc, Detector, DetectorPair, FieldState, ModelError};
use crate::quadrature::{integrate_semi_infinite_hinted, QuadratureConfig};
use crate::vacuum::{vacuum_elements, ElementError, MatrixElements};

/// Bose occupation `1/(e^{beta w} - 1)`. The multiplicative `perturbation`
/// exists only so self-checks can prove they catch a wrong Bose factor.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BoseFactor {
    pub perturbation: f64,
}

impl BoseFactor {
    pub fn occupation(&self, omega: f64, beta: f64) -> f64 {
        bose_factor(omega, beta) * (1.0 + self.perturbation)
    }
}

pub fn bose_factor(omega: f64, beta: f64) -> f64 {
    let x = beta * omega;
    if x < 1e-6 {
        1.0 / x - 0.5
    } else {
        1.0 / x.exp_m1()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalSetup {
    pub pair: DetectorPair,
    pub beta: f64,
    pub mass: f64,
    pub bose: BoseFactor,
}

impl ThermalSetup {
    pub fn new(pair: DetectorPair, beta: f64, mass: f64) -> Result<Self, ModelError> {
        FieldState::Thermal { beta, mass }.validate()?;
        Ok(ThermalSetup {
            pair,
            beta,
            mass,
            bose: BoseFactor::default(),
        })
    }
}

/// Mode weighting inside the thermal integrals.
#[derive(Debug, Clone, Copy)]
enum Occupation {
    Bose { beta: f64, factor: BoseFactor },
    /// `lim_{beta -> 0} beta n(w) = 1/w`, the high-temperature scaling.
    Classical,
}

impl Occupation {
    /// `k^2/w * occupation(w)`, finite at `k = 0` for the massless field.
    fn radial_weight(&self, k: f64, mass: f64) -> f64 {
        let w = dispersion(k, mass);
        match *self {
            Occupation::Bose { beta, factor } => {
                if w == 0.0 {
                    (1.0 + factor.perturbation) / beta
                } else {
                    k * (k / w) * factor.occupation(w, beta)
                }
            }
            Occupation::Classical => {
                if w == 0.0 {
                    1.0
                } else {
                    (k / w) * (k / w)
                }
            }
        }
    }
}

fn phase(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, x)
}

fn l_kernel(
    pair: &DetectorPair,
    which: (Detector, Detector),
    mass: f64,
    occ: Occupation,
    cfg: &QuadratureConfig,
) -> Result<Complex64, ElementError> {
    let nu = *pair.get(which.0);
    let eta = *pair.get(which.1);
    let d = crate::model::norm(crate::model::sub(nu.center, eta.center));
    let (pn, pe) = (nu.profile(), eta.profile());
    let pref = PI * nu.coupling * eta.coupling * 4.0 * PI;
    // The switching factors are evaluated as products of Gaussians, never as
    // e^{-W^2/2} cosh(W k), so large gaps cannot overflow.
    let terms = move |k: f64| {
        let w = dispersion(k, mass);
        let plus = gaussian_switching_ft(w + nu.gap) * gaussian_switching_ft(w + eta.gap);
        let minus = gaussian_switching_ft(w - nu.gap) * gaussian_switching_ft(w - eta.gap);
        (w, plus, minus)
    };
    let base = move |k: f64| pref * occ.radial_weight(k, mass) * pn.smearing_ft(k) * pe.smearing_ft(k);
    let envelope = move |k: f64| {
        let (_, plus, minus) = terms(k);
        base(k) * (plus + minus)
    };
    let f = |k: f64| {
        let (w, plus, minus) = terms(k);
        let p = phase((w + nu.gap) * nu.switch_center - (w + eta.gap) * eta.switch_center) * plus
            + phase(-(w - nu.gap) * nu.switch_center + (w - eta.gap) * eta.switch_center) * minus;
        p * (base(k) * sinc(k * d))
    };
    let dt = (nu.switch_center - eta.switch_center).abs();
    let r = integrate_semi_infinite_hinted(f, envelope, Some(d + dt), cfg)?;
    if which.0 == which.1 {
        return Ok(Complex64::new(r.value.re, 0.0));
    }
    Ok(r.value)
}

fn m_kernel(pair: &DetectorPair, mass: f64, occ: Occupation, cfg: &QuadratureConfig) -> Result<Complex64, ElementError> {
    let (a, b) = (pair.a, pair.b);
    let d = pair.distance();
    let (pa, pb) = (a.profile(), b.profile());
    // The thermal part of the Wightman function is even under t <-> t', so the
    // time-ordered sum collapses to the unrestricted double integral.
    let pref = -a.coupling * b.coupling * 4.0 * PI / 2.0 * 2.0 * PI;
    let base = move |k: f64| pref * occ.radial_weight(k, mass) * pa.smearing_ft(k) * pb.smearing_ft(k);
    let terms = move |k: f64| {
        let w = dispersion(k, mass);
        let first = gaussian_switching_ft(a.gap - w) * gaussian_switching_ft(b.gap + w);
        let second = gaussian_switching_ft(a.gap + w) * gaussian_switching_ft(b.gap - w);
        (w, first, second)
    };
    let envelope = move |k: f64| {
        let (_, first, second) = terms(k);
        base(k).abs() * (first + second)
    };
    let f = |k: f64| {
        let (w, first, second) = terms(k);
        let p = phase((a.gap - w) * a.switch_center + (b.gap + w) * b.switch_center) * first
            + phase((a.gap + w) * a.switch_center + (b.gap - w) * b.switch_center) * second;
        p * (base(k) * sinc(k * d))
    };
    let r = integrate_semi_infinite_hinted(f, envelope, Some(d + pair.delta_minus().abs()), cfg)?;
    Ok(r.value)
}

/// Thermal addition to `L^vac_{nu eta}`.
pub fn l_thermal(setup: &ThermalSetup, which: (Detector, Detector), cfg: &QuadratureConfig) -> Result<Complex64, ElementError> {
    let occ = Occupation::Bose {
        beta: setup.beta,
        factor: setup.bose,
    };
    l_kernel(&setup.pair, which, setup.mass, occ, cfg)
}

/// Thermal addition to `M^vac`.
pub fn m_thermal(setup: &ThermalSetup, cfg: &QuadratureConfig) -> Result<Complex64, ElementError> {
    let occ = Occupation::Bose {
        beta: setup.beta,
        factor: setup.bose,
    };
    m_kernel(&setup.pair, setup.mass, occ, cfg)
}

fn elements_with(pair: &DetectorPair, mass: f64, occ: Occupation, cfg: &QuadratureConfig) -> Result<MatrixElements, ElementError> {
    use Detector::{A, B};
    Ok(MatrixElements {
        l_aa: l_kernel(pair, (A, A), mass, occ, cfg)?,
        l_bb: l_kernel(pair, (B, B), mass, occ, cfg)?,
        l_ab: l_kernel(pair, (A, B), mass, occ, cfg)?,
        m: m_kernel(pair, mass, occ, cfg)?,
    })
}

/// The thermal additions only.
pub fn thermal_elements(setup: &ThermalSetup, cfg: &QuadratureConfig) -> Result<MatrixElements, ElementError> {
    let occ = Occupation::Bose {
        beta: setup.beta,
        factor: setup.bose,
    };
    elements_with(&setup.pair, setup.mass, occ, cfg)
}

/// Vacuum plus thermal elements of the Gibbs state.
pub fn total_thermal_elements(setup: &ThermalSetup, cfg: &QuadratureConfig) -> Result<MatrixElements, ElementError> {
    Ok(vacuum_elements(&setup.pair, setup.mass, cfg)? + thermal_elements(setup, cfg)?)
}

/// `lim_{beta -> 0} beta * (thermal additions)`: the elements grow linearly in
/// the temperature with these coefficients.
pub fn classical_thermal_elements(pair: &DetectorPair, mass: f64, cfg: &QuadratureConfig) -> Result<MatrixElements, ElementError> {
    elements_with(pair, mass, Occupation::Classical, cfg)
}

/// `h = n_{beta2}(w) - n_{beta1}(w)`, positive whenever `beta1 > beta2`.
pub fn bose_difference_h(k: f64, beta1: f64, beta2: f64, mass: f64) -> f64 {
    let w = dispersion(k, mass);
    bose_factor(w, beta2) - bose_factor(w, beta1)
}

/// `D(k) = |F(k)|^2 (|chi(w - W)| - |chi(w + W)|)^2` for identical detectors
/// (the profile of detector A is used).
pub fn d_function(k: f64, pair: &DetectorPair, mass: f64) -> f64 {
    let w = dispersion(k, mass);
    let f = pair.a.profile().smearing_ft(k);
    let diff = gaussian_switching_ft(w - pair.a.gap) - gaussian_switching_ft(w + pair.a.gap);
    f * f * diff * diff
}

/// Lower bound `pi l^2 \int d^3k D(k) e^{beta w}/(e^{beta w} - 1)^2` on
/// `dN/dbeta` for identical detectors, wherever the negativity is positive.
pub fn negativity_rate_bound(setup: &ThermalSetup, cfg: &QuadratureConfig) -> Result<f64, ElementError> {
    if !setup.pair.identical() {
        return Err(ElementError::InvalidInput("rate bound needs identical detectors".into()));
    }
    let (pair, beta, mass) = (setup.pair, setup.beta, setup.mass);
    let lambda = pair.a.coupling;
    let pref = PI * lambda * lambda * 4.0 * PI;
    let f = move |k: f64| {
        let w = dispersion(k, mass);
        // e^x/(e^x - 1)^2 = 1/(4 sinh^2(x/2))
        let s = (0.5 * beta * w).sinh();
        let weight = if w == 0.0 {
            1.0 / (beta * beta)
        } else {
            let r = k / (2.0 * s);
            r * r
        };
        pref * weight * d_function(k, &pair, mass)
    };
    let r = integrate_semi_infinite_hinted(|k| Complex64::new(f(k), 0.0), f, None, cfg)?;
    Ok(r.value.re.max(0.0))
}

fn light_cone_guard(r: f64, t: f64) -> Result<(), ElementError> {
    if !(r > 0.0) || (r - t.abs()).abs() < 1e-3 {
        return Err(ElementError::LightConeProximity { r, t });
    }
    Ok(())
}

/// Thermal part of the massless two-point function by radial quadrature,
/// `(1/(2 pi^2 r)) \int dk sin(k r) cos(k t) / (e^{beta k} - 1)`.
pub fn thermal_wightman_numeric(r: f64, t: f64, beta: f64, cfg: &QuadratureConfig) -> Result<f64, ElementError> {
    light_cone_guard(r, t)?;
    let f = move |k: f64| {
        if k == 0.0 {
            return r / beta;
        }
        let kr = k * r;
        kr * sinc(kr) * (k * t).cos() * bose_factor(k, beta)
    };
    let envelope = move |k: f64| if k == 0.0 { r / beta } else { (k * r).min(1.0) * bose_factor(k, beta) };
    let res = integrate_semi_infinite_hinted(|k| Complex64::new(f(k), 0.0), envelope, Some(r + t.abs()), cfg)?;
    Ok(res.value.re / (2.0 * PI * PI * r))
}

/// Closed form of the same quantity:
/// `-1/(4 pi^2 (r^2 - t^2)) + (coth(pi (r+t)/beta) + coth(pi (r-t)/beta)) / (8 pi r beta)`.
pub fn thermal_wightman_closed(r: f64, t: f64, beta: f64) -> Result<f64, ElementError> {
    light_cone_guard(r, t)?;
    let coth = |x: f64| 1.0 / x.tanh();
    Ok(-1.0 / (4.0 * PI * PI * (r * r - t * t))
        + (coth(PI * (r + t) / beta) + coth(PI * (r - t) / beta)) / (8.0 * PI * r * beta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DetectorParams;
    use crate::quadrature::integrate_box_3d;
    use Detector::{A, B};

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    fn pair(gap: f64, sigma: f64, d: f64, ta: f64, tb: f64) -> DetectorPair {
        let a = DetectorParams::new(gap, sigma, [-d / 2.0, 0.0, 0.0], ta, 1.0).unwrap();
        let b = DetectorParams::new(gap, sigma, [d / 2.0, 0.0, 0.0], tb, 1.0).unwrap();
        DetectorPair::new(a, b).unwrap()
    }

    fn setup(p: DetectorPair, beta: f64, mass: f64) -> ThermalSetup {
        ThermalSetup::new(p, beta, mass).unwrap()
    }

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm()
    }

    fn radial(f: impl Fn(f64) -> f64, kmax: f64) -> f64 {
        let n = 400_000;
        let h = kmax / n as f64;
        (0..n).map(|i| f((i as f64 + 0.5) * h)).sum::<f64>() * h
    }

    #[test]
    fn identical_kernels_as_printed() {
        let (gap, s, d, beta, tb) = (3.0, 1.0, 2.0, 1.0, 0.7);
        let st = setup(pair(gap, s, d, 0.0, tb), beta, 0.0);
        let pre = (-gap * gap / 2.0f64).exp();
        let g = move |k: f64| (-k * k * (1.0 + s * s) / 2.0).exp() / (beta * k).exp_m1();

        let lnn = l_thermal(&st, (A, A), &cfg()).unwrap().re;
        let printed_nn = pre / (2.0 * PI) * radial(|k| k * g(k) * (gap * k).cosh(), 30.0);
        assert!((lnn - printed_nn).abs() < 1e-8 * printed_nn);

        let dm = tb;
        let lab = l_thermal(&st, (A, B), &cfg()).unwrap();
        let kernel = |k: f64, part: fn(Complex64) -> f64| {
            part(Complex64::new(gap * k, dm * k).cosh()) * (d * k).sin() * g(k)
        };
        let printed_ab = phase(-gap * dm) * (pre / (2.0 * PI * d))
            * Complex64::new(radial(|k| kernel(k, |z| z.re), 30.0), radial(|k| kernel(k, |z| z.im), 30.0));
        assert!(rel(lab, printed_ab) < 1e-7, "{lab} vs {printed_ab}");

        // Printed M^th carries 4 pi d; the general form gives 2 pi d.
        let m = m_thermal(&st, &cfg()).unwrap();
        let dp = tb;
        let printed_m = -phase(gap * dp) * (pre / (2.0 * PI * d)) * radial(|k| g(k) * (d * k).sin() * (dm * k).cos(), 30.0);
        assert!(rel(m, printed_m) < 1e-7, "{m} vs {printed_m}");
    }

    /// General thermal integrals in (k, cos theta, phi) with the plane-wave
    /// phases kept explicit.
    fn spherical_oracle(st: &ThermalSetup, which: Option<(Detector, Detector)>) -> Complex64 {
        let c = QuadratureConfig {
            abs_tol: 1e-14,
            rel_tol: 1e-9,
            max_subdivisions: 40_000,
            ..QuadratureConfig::default()
        };
        let p = st.pair;
        let beta = st.beta;
        let f = |v: [f64; 3]| {
            let (k, ct, phi) = (v[0], v[1], v[2]);
            let st_ = (1.0 - ct * ct).max(0.0).sqrt();
            let kv = [k * st_ * phi.cos(), k * st_ * phi.sin(), k * ct];
            let w = dispersion(k, st.mass);
            let n = bose_factor(w, beta);
            let chi = |det: &DetectorParams, x: f64| phase(x * det.switch_center) * gaussian_switching_ft(x);
            match which {
                Some(wh) => {
                    let (nu, eta) = (p.get(wh.0), p.get(wh.1));
                    let dx = crate::model::sub(eta.center, nu.center);
                    let e = phase(crate::model::dot(kv, dx));
                    let t = chi(nu, w - nu.gap).conj() * chi(eta, w - eta.gap) * e
                        + chi(nu, w + nu.gap) * chi(eta, w + eta.gap).conj() * e.conj();
                    t * (PI * k * k / w * n * nu.profile().smearing_ft(k) * eta.profile().smearing_ft(k))
                }
                None => {
                    let dx = crate::model::sub(p.a.center, p.b.center);
                    let e = phase(crate::model::dot(kv, dx));
                    let t = chi(&p.a, p.a.gap - w) * chi(&p.b, p.b.gap + w) * e
                        + chi(&p.a, p.a.gap + w) * chi(&p.b, p.b.gap - w) * e.conj();
                    t * (-PI * k * k / w * n * p.a.profile().smearing_ft(k) * p.b.profile().smearing_ft(k))
                }
            }
        };
        integrate_box_3d(f, [1e-12, -1.0, 0.0], [12.0, 1.0, 2.0 * PI], &c).unwrap().value
    }

    #[test]
    fn matches_general_form_oracle() {
        let st = setup(pair(3.0, 1.0, 2.0, 0.0, 0.0), 1.0, 0.0);
        let lnn = l_thermal(&st, (A, A), &cfg()).unwrap();
        assert!(rel(lnn, spherical_oracle(&st, Some((A, A)))) < 1e-6);
        let m = m_thermal(&st, &cfg()).unwrap();
        assert!(rel(m, spherical_oracle(&st, None)) < 1e-6);
        // Unequal switching times and a massive field.
        let st2 = setup(pair(1.5, 0.8, 1.2, -0.3, 0.5), 0.7, 1.0);
        let lab = l_thermal(&st2, (A, B), &cfg()).unwrap();
        let o = spherical_oracle(&st2, Some((A, B)));
        assert!(rel(lab, o) < 1e-6, "{lab} vs {o}");
        let m2 = m_thermal(&st2, &cfg()).unwrap();
        let o2 = spherical_oracle(&st2, None);
        assert!(rel(m2, o2) < 1e-6, "{m2} vs {o2}");
    }

    #[test]
    fn low_temperature_suppression() {
        // The massless field keeps thermally populated infrared modes, so the
        // additions fall off as pi^2/(6 beta^2) rather than exponentially.
        let beta = 200.0;
        let st = setup(pair(1.0, 1.0, 2.0, 0.0, 0.0), beta, 0.0);
        let asymptote = (-0.5f64).exp() / (2.0 * PI) * PI * PI / (6.0 * beta * beta);
        let l = l_thermal(&st, (A, A), &cfg()).unwrap().re;
        assert!((l - asymptote).abs() < 0.02 * asymptote, "{l} vs {asymptote}");
        let m = m_thermal(&st, &cfg()).unwrap();
        assert!((m.norm() - asymptote).abs() < 0.02 * asymptote);
        // A gapped field is exponentially suppressed.
        let heavy = setup(pair(1.0, 1.0, 2.0, 0.0, 0.0), beta, 1.0);
        assert!(l_thermal(&heavy, (A, A), &cfg()).unwrap().re < 1e-12);
        assert!(m_thermal(&heavy, &cfg()).unwrap().norm() < 1e-12);
    }

    #[test]
    fn coincidence_limit() {
        let st = setup(pair(1.0, 1.0, 0.0, 0.0, 0.0), 1.0, 0.0);
        let lnn = l_thermal(&st, (A, A), &cfg()).unwrap();
        let lab = l_thermal(&st, (A, B), &cfg()).unwrap();
        assert!(rel(lab, lnn) < 1e-10);
    }

    #[test]
    fn phase_law_in_delta_plus() {
        let gap = 1.7;
        let st = setup(pair(gap, 1.0, 2.0, 0.2, 0.5), 1.0, 0.0);
        let m0 = m_thermal(&st, &cfg()).unwrap();
        let shift = PI / gap / 2.0;
        let st2 = setup(pair(gap, 1.0, 2.0, 0.2 + shift, 0.5 + shift), 1.0, 0.0);
        let m1 = m_thermal(&st2, &cfg()).unwrap();
        assert!((m1 + m0).norm() < 1e-10 * m0.norm());
    }

    #[test]
    fn bose_difference_values() {
        assert_eq!(bose_difference_h(1.3, 2.0, 2.0, 0.5), 0.0);
        assert!(bose_difference_h(100.0, 2.0, 1.0, 0.0).abs() < 1e-30);
        let v = bose_difference_h(1.0, 1.0, 0.5, 0.0);
        assert!((v - 0.9595173756674718597).abs() < 1e-14);
    }

    #[test]
    fn laurent_branch_joins_expm1() {
        let below = bose_factor(1e-6 * (1.0 - 1e-9), 1.0);
        let above = bose_factor(1e-6 * (1.0 + 1e-9), 1.0);
        assert!((below - above).abs() / above < 1e-8);
    }

    #[test]
    fn d_function_values() {
        let p = pair(1.0, 1.0, 2.0, 0.0, 0.0);
        let v = d_function(1.0, &p, 0.0);
        assert!((v - 0.0004885207206160125992).abs() < 1e-14 * 0.00049 + 1e-18);
        let p0 = pair(0.0, 1.0, 2.0, 0.0, 0.0);
        for k in [0.0, 0.5, 3.0] {
            assert_eq!(d_function(k, &p0, 0.0), 0.0);
        }
    }

    #[test]
    fn rate_bound_vanishes_without_gap() {
        let st = setup(pair(0.0, 1.0, 2.0, 0.0, 0.0), 1.0, 0.0);
        assert_eq!(negativity_rate_bound(&st, &cfg()).unwrap(), 0.0);
        let st = setup(pair(3.0, 1.0, 2.0, 0.0, 0.0), 1.0, 0.0);
        assert!(negativity_rate_bound(&st, &cfg()).unwrap() > 0.0);
    }

    #[test]
    fn wightman_identity() {
        let c = cfg();
        let a = thermal_wightman_numeric(1.0, 0.5, 1.0, &c).unwrap();
        let b = thermal_wightman_closed(1.0, 0.5, 1.0).unwrap();
        assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        assert_eq!(thermal_wightman_numeric(1.0, -0.5, 1.0, &c).unwrap(), a);
        assert_eq!(thermal_wightman_closed(1.0, -0.5, 1.0).unwrap(), b);
        assert!(matches!(
            thermal_wightman_closed(1.0, 0.9995, 1.0),
            Err(ElementError::LightConeProximity { .. })
        ));
    }

    #[test]
    fn wightman_zero_temperature_limit() {
        // Both sides tend to 1/(12 beta^2), the thermal energy scale, not zero.
        let beta = 500.0;
        let limit = 1.0 / (12.0 * beta * beta);
        let closed = thermal_wightman_closed(1.0, 0.5, beta).unwrap();
        let numeric = thermal_wightman_numeric(1.0, 0.5, beta, &cfg()).unwrap();
        assert!((closed - limit).abs() < 1e-4 * limit);
        assert!((numeric - closed).abs() < 1e-10);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(64))]
        #[test]
        fn h_positive(k in 1e-3f64..40.0, b2 in 0.05f64..5.0, db in 1e-3f64..5.0, m in 0.0f64..2.0) {
            proptest::prop_assert!(bose_difference_h(k, b2 + db, b2, m) > 0.0);
        }

        #[test]
        fn d_non_negative(k in 0.0f64..20.0, gap in -5.0f64..5.0, s in 0.2f64..3.0, m in 0.0f64..2.0) {
            let p = pair(gap, s, 1.0, 0.0, 0.0);
            proptest::prop_assert!(d_function(k, &p, m) >= 0.0);
        }
    }
}
