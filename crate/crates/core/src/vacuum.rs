//! Vacuum matrix elements `L^vac_{nu eta}` and `M^vac` for Gaussian detectors.
//!
//! The momentum integrals are reduced to one radial dimension through
//! `\int d^2 k_hat exp(i k.a) = 4 pi sinc(k |a|)`, and the time-ordered double
//! integral in `M` is done in closed form with the complex error function.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use thiserror::Error;

use crate::faddeeva::{scaled_erfc, SpecialFunctionError};
use crate::model::{dispersion, gaussian_switching_ft, sinc, Detector, DetectorPair};
use crate::quadrature::{integrate_semi_infinite_hinted, QuadratureConfig, QuadratureError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ElementError {
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    SpecialFunction(#[from] SpecialFunctionError),
    #[error("{0}")]
    InvalidInput(String),
    #[error("(r, t) = ({r}, {t}) is within 1e-3 of the light cone")]
    LightConeProximity { r: f64, t: f64 },
}

/// Second-order entries of the detector-pair density matrix, coupling
/// prefactors included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatrixElements {
    pub l_aa: Complex64,
    pub l_bb: Complex64,
    pub l_ab: Complex64,
    pub m: Complex64,
}

impl MatrixElements {
    pub fn zero() -> Self {
        let z = Complex64::new(0.0, 0.0);
        MatrixElements {
            l_aa: z,
            l_bb: z,
            l_ab: z,
            m: z,
        }
    }

    /// Elements of the same state with the detector labels exchanged.
    pub fn swapped(&self) -> Self {
        MatrixElements {
            l_aa: self.l_bb,
            l_bb: self.l_aa,
            l_ab: self.l_ab.conj(),
            m: self.m,
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        MatrixElements {
            l_aa: self.l_aa * s,
            l_bb: self.l_bb * s,
            l_ab: self.l_ab * s,
            m: self.m * s,
        }
    }
}

impl std::ops::Add for MatrixElements {
    type Output = MatrixElements;

    fn add(self, o: MatrixElements) -> MatrixElements {
        MatrixElements {
            l_aa: self.l_aa + o.l_aa,
            l_bb: self.l_bb + o.l_bb,
            l_ab: self.l_ab + o.l_ab,
            m: self.m + o.m,
        }
    }
}

fn phase(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, x)
}

/// Massless `L^vac_{nu eta}`.
pub fn l_vac(pair: &DetectorPair, which: (Detector, Detector), cfg: &QuadratureConfig) -> Result<Complex64, ElementError> {
    l_vac_massive(pair, which, 0.0, cfg)
}

/// `L^vac_{nu eta} = 2 pi l_nu l_eta \int d^3k/(2w) F_nu F_eta exp(-i k.(x_nu - x_eta))
/// chi_nu(w + W_nu) conj(chi_eta(w + W_eta))`.
pub fn l_vac_massive(
    pair: &DetectorPair,
    which: (Detector, Detector),
    mass: f64,
    cfg: &QuadratureConfig,
) -> Result<Complex64, ElementError> {
    let nu = pair.get(which.0);
    let eta = pair.get(which.1);
    let d = crate::model::norm(crate::model::sub(nu.center, eta.center));
    let (pn, pe) = (nu.profile(), eta.profile());
    let dt = nu.switch_center - eta.switch_center;
    let pref = 2.0 * PI * nu.coupling * eta.coupling * 4.0 * PI;
    let magnitude = move |k: f64| {
        let w = dispersion(k, mass);
        if w == 0.0 {
            return 0.0;
        }
        pref * k * k / (2.0 * w)
            * pn.smearing_ft(k)
            * pe.smearing_ft(k)
            * gaussian_switching_ft(w + nu.gap)
            * gaussian_switching_ft(w + eta.gap)
    };
    let f = |k: f64| {
        let w = dispersion(k, mass);
        let ph = phase((w + nu.gap) * nu.switch_center - (w + eta.gap) * eta.switch_center);
        ph * (magnitude(k) * sinc(k * d))
    };
    let r = integrate_semi_infinite_hinted(f, magnitude, Some(d + dt.abs()), cfg)?;
    if which.0 == which.1 {
        return Ok(Complex64::new(r.value.re, 0.0));
    }
    Ok(r.value)
}

/// Time-ordered Gaussian integral
/// `\int dt \int_{-inf}^{t} dt' chi_1(t) chi_2(t') exp(i a t + i b t')`
/// with `chi_j(t) = exp(-(t - t_j)^2)`.
pub fn time_ordered_gaussian(a: f64, b: f64, t1: f64, t2: f64) -> Result<Complex64, SpecialFunctionError> {
    let delta = t2 - t1;
    let z = Complex64::new(delta / SQRT_2, -(a - b) / (2.0 * SQRT_2));
    let e = scaled_erfc(z, Complex64::new((a * a + b * b) / 4.0, 0.0))?;
    Ok(0.5 * PI * phase(a * t1 + b * t2) * e)
}

pub fn m_vac(pair: &DetectorPair, cfg: &QuadratureConfig) -> Result<Complex64, ElementError> {
    m_vac_massive(pair, 0.0, cfg)
}

/// `M^vac = -l_A l_B \int d^3k/(2w) F_A F_B exp(i k.(x_A - x_B)) [I_AB(w) + I_BA(w)]`
/// with `I` the time-ordered kernel above.
pub fn m_vac_massive(pair: &DetectorPair, mass: f64, cfg: &QuadratureConfig) -> Result<Complex64, ElementError> {
    let (a, b) = (pair.a, pair.b);
    let d = pair.distance();
    let (pa, pb) = (a.profile(), b.profile());
    let pref = -a.coupling * b.coupling * 4.0 * PI / 2.0;
    let radial = move |k: f64| {
        let w = dispersion(k, mass);
        if w == 0.0 {
            return 0.0;
        }
        k * k / w * pa.smearing_ft(k) * pb.smearing_ft(k)
    };
    // |I| <= pi, the unrestricted double integral of the envelopes.
    let envelope = move |k: f64| pref.abs() * radial(k) * 2.0 * PI;

    let failure = std::cell::Cell::new(None);
    let f = |k: f64| {
        let w = dispersion(k, mass);
        let kernel = time_ordered_gaussian(a.gap - w, b.gap + w, a.switch_center, b.switch_center).and_then(
            |iab| time_ordered_gaussian(b.gap - w, a.gap + w, b.switch_center, a.switch_center).map(|iba| iab + iba),
        );
        match kernel {
            Ok(v) => v * (pref * radial(k) * sinc(k * d)),
            Err(e) => {
                failure.set(Some(e));
                Complex64::new(0.0, 0.0)
            }
        }
    };
    let r = integrate_semi_infinite_hinted(f, envelope, Some(d + pair.delta_minus().abs()), cfg)?;
    if let Some(e) = failure.take() {
        return Err(e.into());
    }
    Ok(r.value)
}

/// All four vacuum elements of a pair.
pub fn vacuum_elements(pair: &DetectorPair, mass: f64, cfg: &QuadratureConfig) -> Result<MatrixElements, ElementError> {
    use Detector::{A, B};
    Ok(MatrixElements {
        l_aa: l_vac_massive(pair, (A, A), mass, cfg)?,
        l_bb: l_vac_massive(pair, (B, B), mass, cfg)?,
        l_ab: l_vac_massive(pair, (A, B), mass, cfg)?,
        m: m_vac_massive(pair, mass, cfg)?,
    })
}
