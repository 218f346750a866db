//! Reduced-density copies of the oracle comparisons and invariant checks.

use std::f64::consts::{PI, SQRT_2};
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::coherent::{assemble_coherent_rho, first_order_amplitudes, CoherentAmplitudeFamily};
use crate::faddeeva::faddeeva;
use crate::measures::{assemble_xform, eigenvalues_hermitian_4, negativity, negativity_xform, Matrix4};
use crate::model::{dot, gaussian_switching_ft, Detector, DetectorPair, DetectorParams};
use crate::quadrature::{integrate_box_3d, integrate_rect_2d, QuadratureConfig};
use crate::squeezed::{db_from_r, m_sq_general, m_sq_uniform, phase_shift_zeta, r_from_db, squeezed_elements, GeneralSqueezing, SqueezeAmplitude, UniformSqueezing};
use crate::thermal::{bose_factor, l_thermal, thermal_wightman_closed, thermal_wightman_numeric, total_thermal_elements, BoseFactor, ThermalSetup};
use crate::vacuum::{l_vac, time_ordered_gaussian, vacuum_elements, MatrixElements};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SelfcheckOptions {
    /// Relative error injected into the Bose factor of the thermal engines.
    pub bose_perturbation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub name: &'static str,
    pub passed: bool,
    pub worst: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl std::fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {:<24} worst {:.3e} (tol {:.1e})", self.name, self.worst, self.tolerance)?;
        if !self.detail.is_empty() {
            write!(f, "  {}", self.detail)?;
        }
        Ok(())
    }
}

type SuiteResult = Result<(f64, f64), String>;

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

fn phase(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, x)
}

fn oracle_cfg() -> QuadratureConfig {
    QuadratureConfig {
        abs_tol: 1e-14,
        rel_tol: 1e-9,
        max_subdivisions: 40_000,
        ..QuadratureConfig::default()
    }
}

fn pair(gap: f64, d: f64) -> DetectorPair {
    DetectorPair::identical_on_axis(gap, 1.0, 1.0, 0.0, d).unwrap()
}

const FADDEEVA_REFERENCE: &[(f64, f64, f64, f64)] = &include!("../../tests/data/faddeeva_reference.in");

fn faddeeva_suite() -> SuiteResult {
    let worst = FADDEEVA_REFERENCE
        .iter()
        .map(|&(x, y, re, im)| rel(faddeeva(Complex64::new(x, y)), Complex64::new(re, im)))
        .fold(0.0, f64::max);
    Ok((worst, 1e-12))
}

fn wightman_suite() -> SuiteResult {
    let cfg = QuadratureConfig::default();
    let mut worst: f64 = 0.0;
    for r in [0.5, 1.5, 3.0] {
        for t in [0.0, 0.7, 2.2] {
            for beta in [0.5, 1.0, 3.0] {
                let a = thermal_wightman_closed(r, t, beta).map_err(|e| e.to_string())?;
                let b = thermal_wightman_numeric(r, t, beta, &cfg).map_err(|e| e.to_string())?;
                worst = worst.max((a - b).abs());
            }
        }
    }
    Ok((worst, 1e-8))
}

fn time_kernel_suite() -> SuiteResult {
    let c = QuadratureConfig {
        abs_tol: 1e-12,
        rel_tol: 1e-10,
        ..QuadratureConfig::cubature()
    };
    let mut worst: f64 = 0.0;
    for &(a, b, t1, t2) in &[(1.0, -2.0, 0.0, 0.0), (0.3, 0.8, -0.5, 0.7), (-1.5, 2.5, 1.0, -0.2)] {
        let closed = time_ordered_gaussian(a, b, t1, t2).map_err(|e| e.to_string())?;
        // Rotate to (p, q) = ((u + v) / sqrt 2, (u - v) / sqrt 2) so t > t' is a half plane.
        let q0 = (t2 - t1) / SQRT_2;
        let f = |x: [f64; 2]| {
            let (p, q) = (x[0], x[1]);
            let (u, v) = ((p + q) / SQRT_2, (p - q) / SQRT_2);
            phase(a * (u + t1) + b * (v + t2)) * (-(p * p + q * q)).exp()
        };
        let o = integrate_rect_2d(f, [-7.0, q0], [7.0, q0.max(0.0) + 7.0], &c).map_err(|e| e.to_string())?;
        worst = worst.max(rel(closed, o.value));
    }
    Ok((worst, 1e-6))
}

fn spherical<F: Fn([f64; 3], f64) -> Complex64>(f: F, k_max: f64) -> Result<Complex64, String> {
    let g = |v: [f64; 3]| {
        let (k, ct, phi) = (v[0], v[1], v[2]);
        let st = (1.0 - ct * ct).max(0.0).sqrt();
        f([k * st * phi.cos(), k * st * phi.sin(), k * ct], k) * (k * k)
    };
    integrate_box_3d(g, [1e-12, -1.0, 0.0], [k_max, 1.0, 2.0 * PI], &oracle_cfg())
        .map(|r| r.value)
        .map_err(|e| e.to_string())
}

fn vacuum_suite() -> SuiteResult {
    let p = pair(1.0, 2.0);
    let (nu, eta) = (p.a, p.b);
    let dx = crate::model::sub(nu.center, eta.center);
    let oracle = spherical(
        |kv, k| {
            let amp = 2.0 * PI / (2.0 * k)
                * nu.profile().smearing_ft(k)
                * eta.profile().smearing_ft(k)
                * gaussian_switching_ft(k + nu.gap)
                * gaussian_switching_ft(k + eta.gap);
            phase(-dot(kv, dx)) * amp
        },
        10.0,
    )?;
    let got = l_vac(&p, (Detector::A, Detector::B), &QuadratureConfig::default()).map_err(|e| e.to_string())?;
    Ok((rel(got, oracle), 1e-6))
}

fn thermal_suite(opts: SelfcheckOptions) -> SuiteResult {
    let p = pair(2.0, 1.0);
    let beta = 1.0;
    let mut st = ThermalSetup::new(p, beta, 0.0).map_err(|e| e.to_string())?;
    st.bose = BoseFactor {
        perturbation: opts.bose_perturbation,
    };
    let got = l_thermal(&st, (Detector::A, Detector::B), &QuadratureConfig::default()).map_err(|e| e.to_string())?;
    let dx = crate::model::sub(p.b.center, p.a.center);
    let oracle = spherical(
        |kv, k| {
            let e = phase(dot(kv, dx));
            let g = gaussian_switching_ft;
            let t = e * (g(k - p.a.gap) * g(k - p.b.gap)) + e.conj() * (g(k + p.a.gap) * g(k + p.b.gap));
            t * (PI / k * bose_factor(k, beta) * p.a.profile().smearing_ft(k) * p.b.profile().smearing_ft(k))
        },
        12.0,
    )?;
    Ok((rel(got, oracle), 1e-6))
}

fn thermal_monotonicity_suite(opts: SelfcheckOptions) -> SuiteResult {
    let cfg = QuadratureConfig::default();
    let mut worst: f64 = 0.0;
    for &(gap, d) in &[(3.0, 0.5), (2.0, 1.0)] {
        let p = DetectorPair::identical_on_axis(gap, 1.0, 0.1, 0.0, d).unwrap();
        let mut prev = negativity_xform(&vacuum_elements(&p, 0.0, &cfg).map_err(|e| e.to_string())?, true).map_err(|e| e.to_string())?;
        for t in [0.5, 1.0, 2.0, 4.0] {
            let mut st = ThermalSetup::new(p, 1.0 / t, 0.0).map_err(|e| e.to_string())?;
            st.bose.perturbation = opts.bose_perturbation;
            let n = negativity_xform(&total_thermal_elements(&st, &cfg).map_err(|e| e.to_string())?, true).map_err(|e| e.to_string())?;
            worst = worst.max(n - prev);
            prev = n;
        }
    }
    Ok((worst.max(0.0), 1e-9))
}

fn squeezed_suite() -> SuiteResult {
    let p = pair(1.0, 2.0);
    let amp = UniformSqueezing { r: 0.7, theta: 0.2 };
    let z = Complex64::from_polar(0.7, 0.2);
    let g = GeneralSqueezing {
        zeta: Arc::new(move |k| if crate::model::norm(k) <= 8.0 { z } else { Complex64::new(0.0, 0.0) }),
        support_envelope: Arc::new(|k| if k <= 8.0 { 0.7 } else { 0.0 }),
    };
    let u = m_sq_uniform(&p, amp, &QuadratureConfig::default()).map_err(|e| e.to_string())?;
    let v = m_sq_general(&p, &g, &QuadratureConfig::cubature()).map_err(|e| e.to_string())?;
    Ok((rel(v, u), 1e-4))
}

fn translation_suite() -> SuiteResult {
    let amp = SqueezeAmplitude::uniform(0.5, 0.3);
    let x0 = [0.8, -0.4, 0.3];
    let a = DetectorParams::new(1.0, 1.0, [0.4, 0.0, 0.0], 0.0, 1.0).unwrap();
    let b = DetectorParams::new(1.0, 1.0, [-0.6, 0.0, 0.0], 0.0, 1.0).unwrap();
    let p = DetectorPair::new(a, b).unwrap();
    let shifted = p.translated([x0[0] / 2.0, x0[1] / 2.0, x0[2] / 2.0]);
    let vac = |q: &DetectorPair| vacuum_elements(q, 0.0, &QuadratureConfig::default()).map_err(|e| e.to_string());
    let e1 = vac(&p)? + squeezed_elements(&p, &phase_shift_zeta(&amp, x0), &QuadratureConfig::cubature()).map_err(|e| e.to_string())?;
    let e2 = vac(&shifted)? + squeezed_elements(&shifted, &amp, &QuadratureConfig::default()).map_err(|e| e.to_string())?;
    let n1 = negativity_xform(&e1, false).map_err(|e| e.to_string())?;
    let n2 = negativity_xform(&e2, false).map_err(|e| e.to_string())?;
    Ok(((n1 - n2).abs(), 1e-6))
}

fn coherent_suite() -> SuiteResult {
    let cfg = QuadratureConfig::default();
    let p = DetectorPair::identical_on_axis(3.0, 1.0, 0.01, 0.0, 0.5).unwrap();
    let base = vacuum_elements(&p, 0.0, &cfg).map_err(|e| e.to_string())?;
    let fam = |a0| CoherentAmplitudeFamily { a0, width: 1.0 };
    let n = negativity(&assemble_coherent_rho(&p, fam(2.0), &base, &cfg).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let n0 = negativity(&assemble_coherent_rho(&p, fam(0.0), &base, &cfg).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let amps = first_order_amplitudes(&p, fam(2.0), &cfg).map_err(|e| e.to_string())?;
    let scale = amps.a_plus.iter().map(|a| a.norm()).fold(0.0, f64::max).powi(3);
    Ok(((n - n0).abs() / scale, 5.0))
}

/// Determinant of a 4x4 complex matrix by cofactor expansion.
fn det4(m: &Matrix4) -> Complex64 {
    fn det3(a: [[Complex64; 3]; 3]) -> Complex64 {
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    }
    let mut total = Complex64::new(0.0, 0.0);
    for col in 0..4 {
        let mut minor = [[Complex64::new(0.0, 0.0); 3]; 3];
        for r in 1..4 {
            let mut cc = 0;
            for c in 0..4 {
                if c != col {
                    minor[r - 1][cc] = m[r][c];
                    cc += 1;
                }
            }
        }
        let sign = if col % 2 == 0 { 1.0 } else { -1.0 };
        total += m[0][col] * det3(minor) * sign;
    }
    total
}

fn measures_suite() -> SuiteResult {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let mut m = [[Complex64::new(0.0, 0.0); 4]; 4];
        for i in 0..4 {
            m[i][i] = Complex64::new(rng.gen_range(-1.0..1.0), 0.0);
            for j in i + 1..4 {
                let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                m[i][j] = z;
                m[j][i] = z.conj();
            }
        }
        for ev in eigenvalues_hermitian_4(&m).map_err(|e| e.to_string())? {
            let mut s = m;
            for (i, row) in s.iter_mut().enumerate() {
                row[i] -= ev;
            }
            worst = worst.max(det4(&s).norm());
        }
    }
    // X-form closed form against the general eigen path, minus the known
    // -|L_AB|^2 truncation eigenvalue.
    let el = MatrixElements {
        l_aa: Complex64::new(0.012, 0.0),
        l_bb: Complex64::new(0.012, 0.0),
        l_ab: Complex64::new(0.004, -0.002),
        m: Complex64::new(-0.009, 0.011),
    };
    let g = 1.0 - 0.024;
    let artifact = 0.5 * ((g * g + 4.0 * el.l_ab.norm_sqr()).sqrt() - g);
    let general = negativity(&assemble_xform(&el).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let closed = negativity_xform(&el, true).map_err(|e| e.to_string())?;
    worst = worst.max((general - artifact - closed).abs());
    Ok((worst, 1e-10))
}

fn decibel_suite() -> SuiteResult {
    let r = r_from_db(-15.0).map_err(|e| e.to_string())?;
    let db = db_from_r(1.0).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    if !(1.70..=1.76).contains(&r) {
        worst = worst.max(1.0);
    }
    worst = worst.max((db + 8.686).abs());
    Ok((worst, 1e-3))
}

pub fn run_selfcheck(opts: SelfcheckOptions) -> Vec<SuiteReport> {
    let suites: Vec<(&'static str, Box<dyn Fn() -> SuiteResult>)> = vec![
        ("faddeeva-reference", Box::new(faddeeva_suite)),
        ("wightman-identity", Box::new(wightman_suite)),
        ("time-ordered-kernel", Box::new(time_kernel_suite)),
        ("vacuum-3d-oracle", Box::new(vacuum_suite)),
        ("thermal-3d-oracle", Box::new(move || thermal_suite(opts))),
        ("thermal-monotonicity", Box::new(move || thermal_monotonicity_suite(opts))),
        ("squeezed-cross-engine", Box::new(squeezed_suite)),
        ("translation-theorem", Box::new(translation_suite)),
        ("coherent-invariance", Box::new(coherent_suite)),
        ("measures", Box::new(measures_suite)),
        ("decibel-conversion", Box::new(decibel_suite)),
    ];
    suites
        .into_iter()
        .map(|(name, f)| match f() {
            Ok((worst, tolerance)) => SuiteReport {
                name,
                passed: worst <= tolerance,
                worst,
                tolerance,
                detail: String::new(),
            },
            Err(e) => SuiteReport {
                name,
                passed: false,
                worst: f64::INFINITY,
                tolerance: 0.0,
                detail: e,
            },
        })
        .collect()
}

