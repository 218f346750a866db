//! Coherent (displaced) field states: the one-point function, the first-order
//! amplitudes and the assembled second-order density matrix.
//!
//! Displacing the field adds a classical solution `v` to the field operator.
//! With ground-state detectors the first-order term only links `gg` with the
//! singly excited states, and every second-order correction from `v v'` is a
//! product of the first-order amplitudes `A_nu^+ = lambda int chi e^{i W t} V`:
//!
//! ```text
//! L_nu_eta += A_nu^+ conj(A_eta^+),  M += -A_A^+ A_B^+,  rho_gg -= |A_A^+|^2 + |A_B^+|^2
//! ```

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::measures::{hermiticity_residual, Matrix4, TwoDetectorDensityMatrix};
use crate::model::{norm, sinc, DetectorPair, DetectorParams, Vec3};
use crate::quadrature::{integrate_interval, integrate_semi_infinite_hinted, QuadratureConfig};
use crate::vacuum::{ElementError, MatrixElements};

/// Half-width of the switching window used for the time integrals.
pub const SWITCHING_WINDOW: f64 = 8.0;

/// `alpha(k) = a0 exp(-width^2 |k|^2 / 4)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentAmplitudeFamily {
    pub a0: f64,
    pub width: f64,
}

impl CoherentAmplitudeFamily {
    pub fn alpha(&self, k: f64) -> f64 {
        self.a0 * (-self.width * self.width * k * k / 4.0).exp()
    }

    fn validate(&self) -> Result<(), ElementError> {
        if !(self.width > 0.0 && self.width.is_finite()) || !self.a0.is_finite() {
            return Err(ElementError::InvalidInput(format!(
                "coherent family needs finite a0 and width > 0, got a0 = {}, width = {}",
                self.a0, self.width
            )));
        }
        Ok(())
    }
}

/// Index 0 is detector A, 1 is detector B.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstOrderAmplitudes {
    pub a_plus: [Complex64; 2],
    pub a_minus: [Complex64; 2],
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoherentError {
    #[error(transparent)]
    Element(#[from] ElementError),
    #[error("assembled matrix is not Hermitian (residual {0:e})")]
    NonHermitian(f64),
}

/// `2 * 4 pi / sqrt(2 (2 pi)^3)`: angular integral times the `+ c.c.` pairing.
fn radial_prefactor() -> f64 {
    8.0 * PI / (2.0 * (2.0 * PI).powi(3)).sqrt()
}

/// `v` with an extra `exp(-sigma^2 k^2 / 4)` (sigma = 0 gives the bare field).
fn radial_v(amp: CoherentAmplitudeFamily, sigma: f64, x: Vec3, t: f64, cfg: &QuadratureConfig) -> Result<f64, ElementError> {
    amp.validate()?;
    if amp.a0 == 0.0 {
        return Ok(0.0);
    }
    let pref = radial_prefactor();
    let r = norm(x);
    let weight = move |k: f64| pref * k.powf(1.5) * amp.alpha(k) * (-sigma * sigma * k * k / 4.0).exp();
    let f = |k: f64| Complex64::new(weight(k) * sinc(k * r) * (k * t).cos(), 0.0);
    let res = integrate_semi_infinite_hinted(f, |k| weight(k).abs(), Some(r + t.abs()), cfg)?;
    Ok(res.value.re)
}

/// One-point function `v(x, t)` of the displaced field.
pub fn one_point_v(amp: CoherentAmplitudeFamily, x: Vec3, t: f64, cfg: &QuadratureConfig) -> Result<f64, ElementError> {
    radial_v(amp, 0.0, x, t, cfg)
}

/// `V(x_nu, t)`: `v` smeared with the detector's Gaussian profile. In momentum
/// space the convolution multiplies the mode sum by `exp(-sigma^2 k^2 / 4)`.
pub fn smeared_v(detector: &DetectorParams, amp: CoherentAmplitudeFamily, t: f64, cfg: &QuadratureConfig) -> Result<f64, ElementError> {
    radial_v(amp, detector.smearing_width, detector.center, t, cfg)
}

fn amplitude(detector: &DetectorParams, amp: CoherentAmplitudeFamily, sign: f64, cfg: &QuadratureConfig) -> Result<Complex64, ElementError> {
    let profile = detector.profile();
    let t0 = detector.switch_center;
    // Quadrature errors inside the integrand are kept and reported afterwards.
    let failure = std::cell::Cell::new(None);
    let f = |t: f64| {
        let v = match smeared_v(detector, amp, t, cfg) {
            Ok(v) => v,
            Err(e) => {
                failure.set(Some(e));
                0.0
            }
        };
        Complex64::from_polar(profile.switching(t - t0) * v, sign * detector.gap * t)
    };
    let hint = detector.gap.abs() + 6.0 / amp.width;
    let res = integrate_interval(f, t0 - SWITCHING_WINDOW, t0 + SWITCHING_WINDOW, Some(hint), cfg)?;
    if let Some(e) = failure.take() {
        return Err(e);
    }
    Ok(res.value * detector.coupling)
}

pub fn first_order_amplitudes(pair: &DetectorPair, amp: CoherentAmplitudeFamily, cfg: &QuadratureConfig) -> Result<FirstOrderAmplitudes, ElementError> {
    amp.validate()?;
    let mut out = FirstOrderAmplitudes {
        a_plus: [Complex64::new(0.0, 0.0); 2],
        a_minus: [Complex64::new(0.0, 0.0); 2],
    };
    if amp.a0 == 0.0 {
        return Ok(out);
    }
    for (i, d) in [pair.a, pair.b].iter().enumerate() {
        out.a_plus[i] = amplitude(d, amp, 1.0, cfg)?;
        out.a_minus[i] = amplitude(d, amp, -1.0, cfg)?;
    }
    Ok(out)
}

/// Product corrections to the second-order elements.
pub fn coherent_corrections(amps: &FirstOrderAmplitudes) -> MatrixElements {
    let [a, b] = amps.a_plus;
    MatrixElements {
        l_aa: Complex64::new(a.norm_sqr(), 0.0),
        l_bb: Complex64::new(b.norm_sqr(), 0.0),
        l_ab: a * b.conj(),
        m: -a * b,
    }
}

/// Full density matrix from precomputed amplitudes and `base` (the vacuum
/// elements of the same pair).
pub fn assemble_from_amplitudes(amps: &FirstOrderAmplitudes, base: &MatrixElements) -> Result<TwoDetectorDensityMatrix, CoherentError> {
    let el = *base + coherent_corrections(amps);
    let i = Complex64::i();
    let [pa, pb] = amps.a_plus;
    let [ma, mb] = amps.a_minus;
    let z = Complex64::new(0.0, 0.0);
    let mut m: Matrix4 = [
        [z, i * mb, i * ma, el.m.conj()],
        [-i * pb, Complex64::new(el.l_bb.re, 0.0), el.l_ab.conj(), z],
        [-i * pa, el.l_ab, Complex64::new(el.l_aa.re, 0.0), z],
        [el.m, z, z, z],
    ];
    m[0][0] = Complex64::new(1.0 - m[1][1].re - m[2][2].re, 0.0);
    let res = hermiticity_residual(&m);
    if res > 1e-10 {
        return Err(CoherentError::NonHermitian(res));
    }
    Ok(TwoDetectorDensityMatrix { entries: m })
}

pub fn assemble_coherent_rho(
    pair: &DetectorPair,
    amp: CoherentAmplitudeFamily,
    base: &MatrixElements,
    cfg: &QuadratureConfig,
) -> Result<TwoDetectorDensityMatrix, CoherentError> {
    let amps = first_order_amplitudes(pair, amp, cfg)?;
    assemble_from_amplitudes(&amps, base)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{assemble_xform, negativity};
    use crate::quadrature::{integrate_box_3d, integrate_rect_2d};
    use crate::vacuum::vacuum_elements;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    fn fam(a0: f64) -> CoherentAmplitudeFamily {
        CoherentAmplitudeFamily { a0, width: 1.0 }
    }

    /// Gap 3, width 1, separation 0.5: a pair that harvests from the vacuum.
    fn std_pair(coupling: f64) -> DetectorPair {
        DetectorPair::identical_on_axis(3.0, 1.0, coupling, 0.0, 0.5).unwrap()
    }

    #[test]
    fn vanishes_for_zero_amplitude() {
        assert_eq!(one_point_v(fam(0.0), [1.0, 0.0, 0.0], 0.3, &cfg()).unwrap(), 0.0);
        let d = DetectorParams::new(1.0, 1.0, [0.5, 0.0, 0.0], 0.0, 1.0).unwrap();
        assert_eq!(smeared_v(&d, fam(0.0), 0.3, &cfg()).unwrap(), 0.0);
        let a = first_order_amplitudes(&std_pair(0.1), fam(0.0), &cfg()).unwrap();
        assert!(a.a_plus.iter().chain(&a.a_minus).all(|z| z.norm() == 0.0));
    }

    #[test]
    fn v_matches_cartesian_mode_sum() {
        let amp = fam(1.0);
        let (x, t) = ([1.0, 0.0, 0.0], 0.5);
        // alpha e^{-i(kt - k.x)} + c.c. = 2 alpha cos(kt - k.x).
        let f = |kv: [f64; 3]| {
            let k = norm(kv);
            if k == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let phase = k * t - (kv[0] * x[0] + kv[1] * x[1] + kv[2] * x[2]);
            Complex64::new(2.0 * amp.alpha(k) * phase.cos() / (2.0 * (2.0 * PI).powi(3) * k).sqrt(), 0.0)
        };
        let c = QuadratureConfig {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_subdivisions: 200_000,
            ..QuadratureConfig::cubature()
        };
        let mut want = 0.0;
        for o in 0..8 {
            let lo = [0, 1, 2].map(|a| if o >> a & 1 == 1 { 0.0 } else { -12.0 });
            let hi = [0, 1, 2].map(|a| if o >> a & 1 == 1 { 12.0 } else { 0.0 });
            want += integrate_box_3d(f, lo, hi, &c).unwrap().value.re;
        }
        let got = one_point_v(amp, x, t, &cfg()).unwrap();
        assert!((got - want).abs() < 1e-6 * want.abs().max(1e-3), "{got} vs {want}");
    }

    #[test]
    fn v_is_even_in_position() {
        let amp = fam(1.3);
        for x in [[0.4, -0.2, 0.9], [2.0, 0.0, 0.0]] {
            let a = one_point_v(amp, x, 0.7, &cfg()).unwrap();
            let b = one_point_v(amp, [-x[0], -x[1], -x[2]], 0.7, &cfg()).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn narrow_smearing_recovers_point_value() {
        // The gap is the physical sigma^2 k^2 / 4 correction: it falls 100x per
        // decade of sigma and drops below 1e-8 at sigma = 1e-4.
        let amp = fam(1.0);
        let point = one_point_v(amp, [1.0, 0.0, 0.0], 0.2, &cfg()).unwrap();
        let gap = |s: f64| {
            let d = DetectorParams::new(1.0, s, [1.0, 0.0, 0.0], 0.0, 1.0).unwrap();
            (smeared_v(&d, amp, 0.2, &cfg()).unwrap() - point) / point
        };
        let (g3, g4) = (gap(1e-3), gap(1e-4));
        assert!(g4.abs() < 1e-8);
        assert!((g3 / g4 - 100.0).abs() < 0.1, "{g3} {g4}");
    }

    #[test]
    fn smearing_matches_position_space_convolution() {
        let amp = fam(1.0);
        let d = DetectorParams::new(1.0, 1.0, [1.0, 0.0, 0.0], 0.0, 1.0).unwrap();
        let t = 0.0;
        let profile = d.profile();
        let c = norm(d.center);
        // Spherical coordinates about the detector centre; v only depends on |x|.
        let f = |p: [f64; 2]| {
            let (rho, u) = (p[0], p[1]);
            let dist = (c * c + rho * rho + 2.0 * c * rho * u).max(0.0).sqrt();
            let v = one_point_v(amp, [dist, 0.0, 0.0], t, &cfg()).unwrap();
            Complex64::new(2.0 * PI * rho * rho * profile.smearing(rho) * v, 0.0)
        };
        let oc = QuadratureConfig {
            rel_tol: 1e-8,
            abs_tol: 1e-11,
            ..QuadratureConfig::cubature()
        };
        let want = integrate_rect_2d(f, [0.0, -1.0], [6.0, 1.0], &oc).unwrap().value.re;
        let got = smeared_v(&d, amp, t, &cfg()).unwrap();
        assert!((got - want).abs() < 1e-5 * want.abs(), "{got} vs {want}");
    }

    #[test]
    fn amplitudes_match_joint_time_momentum_quadrature() {
        let amp = fam(1.0);
        let pair = DetectorPair::new(
            DetectorParams::new(1.0, 1.0, [0.5, 0.0, 0.0], 0.3, 0.1).unwrap(),
            DetectorParams::new(2.0, 0.7, [-0.5, 0.2, 0.0], -0.4, 0.1).unwrap(),
        )
        .unwrap();
        let got = first_order_amplitudes(&pair, amp, &cfg()).unwrap();
        let oc = QuadratureConfig {
            rel_tol: 1e-9,
            abs_tol: 1e-13,
            max_subdivisions: 100_000,
            ..QuadratureConfig::cubature()
        };
        for (i, d) in [pair.a, pair.b].iter().enumerate() {
            let (r, s) = (norm(d.center), d.smearing_width);
            let f = |p: [f64; 2]| {
                let (t, k) = (p[0], p[1]);
                let w = radial_prefactor() * k.powf(1.5) * amp.alpha(k) * (-s * s * k * k / 4.0).exp();
                let chi = (-(t - d.switch_center).powi(2)).exp();
                Complex64::from_polar(d.coupling * chi * w * sinc(k * r) * (k * t).cos(), d.gap * t)
            };
            let t0 = d.switch_center;
            let want = integrate_rect_2d(f, [t0 - 8.0, 0.0], [t0 + 8.0, 14.0], &oc).unwrap().value;
            assert!((got.a_plus[i] - want).norm() < 1e-6 * want.norm(), "{} vs {want}", got.a_plus[i]);
            assert!((got.a_minus[i] - want.conj()).norm() < 1e-6 * want.norm());
            assert!((got.a_minus[i] - got.a_plus[i].conj()).norm() <= 1e-12 * want.norm().max(1e-300));
        }
    }

    #[test]
    fn zero_amplitude_reduces_to_x_form() {
        let pair = std_pair(0.1);
        let base = vacuum_elements(&pair, 0.0, &cfg()).unwrap();
        let rho = assemble_coherent_rho(&pair, fam(0.0), &base, &cfg()).unwrap();
        assert_eq!(rho, assemble_xform(&base).unwrap());
    }

    #[test]
    fn assembled_matrix_is_unit_trace_and_hermitian() {
        let pair = std_pair(0.05);
        let base = vacuum_elements(&pair, 0.0, &cfg()).unwrap();
        let rho = assemble_coherent_rho(&pair, fam(2.0), &base, &cfg()).unwrap();
        let tr: Complex64 = (0..4).map(|i| rho.entries[i][i]).sum();
        assert_eq!(tr, Complex64::new(1.0, 0.0));
        assert!(hermiticity_residual(&rho.entries) <= 1e-12);
    }

    #[test]
    fn first_order_part_is_traceless_and_hermitian() {
        let amps = FirstOrderAmplitudes {
            a_plus: [Complex64::new(0.01, 0.02), Complex64::new(-0.03, 0.005)],
            a_minus: [Complex64::new(0.01, -0.02), Complex64::new(-0.03, -0.005)],
        };
        // Cancelling the product corrections leaves rho^(0) + rho^(1).
        let corr = coherent_corrections(&amps);
        let mut first = assemble_from_amplitudes(&amps, &corr.scaled(-1.0)).unwrap().entries;
        first[0][0] -= Complex64::new(1.0, 0.0);
        let tr: Complex64 = (0..4).map(|i| first[i][i]).sum();
        assert_eq!(tr, Complex64::new(0.0, 0.0));
        assert_eq!(hermiticity_residual(&first), 0.0);
        for (r, c) in [(1, 1), (2, 2), (1, 2), (2, 1), (0, 3), (3, 0), (3, 1), (3, 2), (3, 3)] {
            assert_eq!(first[r][c].norm(), 0.0, "[{r}][{c}]");
        }
        assert_eq!(first[2][0], -Complex64::i() * amps.a_plus[0]);
        assert_eq!(first[0][1], Complex64::i() * amps.a_minus[1]);
    }

    #[test]
    fn asymmetric_amplitudes_are_rejected() {
        let amps = FirstOrderAmplitudes {
            a_plus: [Complex64::new(0.01, 0.0), Complex64::new(0.0, 0.0)],
            a_minus: [Complex64::new(0.5, 0.0), Complex64::new(0.0, 0.0)],
        };
        assert!(matches!(
            assemble_from_amplitudes(&amps, &MatrixElements::zero()),
            Err(CoherentError::NonHermitian(_))
        ));
    }

    #[test]
    fn negativity_is_insensitive_to_the_amplitude() {
        let lambda = 0.01;
        let pair = std_pair(lambda);
        let base = vacuum_elements(&pair, 0.0, &cfg()).unwrap();
        let n0 = negativity(&assemble_coherent_rho(&pair, fam(0.0), &base, &cfg()).unwrap()).unwrap();
        assert!(n0 > 0.0);
        let na = negativity(&assemble_coherent_rho(&pair, fam(2.0), &base, &cfg()).unwrap()).unwrap();
        assert!((na - n0).abs() <= 5.0 * lambda.powi(3), "{na} vs {n0}");
    }
}
