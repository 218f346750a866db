//! Detector and field-state data model.
//!
//! All quantities are dimensionless, measured in units of the switching width:
//! gaps are `Omega * tau`, lengths and times are divided by `tau`. The built-in
//! profiles are the normalized Gaussian smearing
//! `F(x) = pi^{-3/2} sigma^{-3} exp(-|x|^2 / sigma^2)` and the Gaussian switching
//! `chi(t) = exp(-(t - t_nu)^2)`, with Fourier transforms taken under
//! `g_bar(k) = (2 pi)^{-m/2} \int g(x) exp(i k.x) d^m x`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

pub type Vec3 = [f64; 3];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
}

fn require(cond: bool, name: &'static str, value: f64, reason: &'static str) -> Result<(), ModelError> {
    if cond {
        Ok(())
    } else {
        Err(ModelError::InvalidParameter { name, value, reason })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorParams {
    pub gap: f64,
    pub smearing_width: f64,
    pub center: Vec3,
    pub switch_center: f64,
    pub coupling: f64,
}

impl DetectorParams {
    pub fn new(
        gap: f64,
        smearing_width: f64,
        center: Vec3,
        switch_center: f64,
        coupling: f64,
    ) -> Result<Self, ModelError> {
        let d = DetectorParams {
            gap,
            smearing_width,
            center,
            switch_center,
            coupling,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        require(self.gap.is_finite(), "gap", self.gap, "must be finite")?;
        require(
            self.smearing_width > 0.0 && self.smearing_width.is_finite(),
            "smearing_width",
            self.smearing_width,
            "must be > 0",
        )?;
        require(
            self.coupling > 0.0 && self.coupling.is_finite(),
            "coupling",
            self.coupling,
            "must be > 0",
        )?;
        for &c in &self.center {
            require(c.is_finite(), "center", c, "must be finite")?;
        }
        require(
            self.switch_center.is_finite(),
            "switch_center",
            self.switch_center,
            "must be finite",
        )
    }

    pub fn profile(&self) -> ProfileFT {
        ProfileFT {
            smearing_width: self.smearing_width,
        }
    }

    pub fn translated(&self, shift: Vec3) -> Self {
        let mut out = *self;
        for i in 0..3 {
            out.center[i] += shift[i];
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorPair {
    pub a: DetectorParams,
    pub b: DetectorParams,
}

impl DetectorPair {
    pub fn new(a: DetectorParams, b: DetectorParams) -> Result<Self, ModelError> {
        a.validate()?;
        b.validate()?;
        Ok(DetectorPair { a, b })
    }

    /// Identical Gaussian detectors at `(center_of_mass +- separation/2, 0, 0)`,
    /// both switched on around `t = 0`.
    pub fn identical_on_axis(
        gap: f64,
        smearing_width: f64,
        coupling: f64,
        center_of_mass: f64,
        separation: f64,
    ) -> Result<Self, ModelError> {
        let h = 0.5 * separation;
        let a = DetectorParams::new(gap, smearing_width, [center_of_mass - h, 0.0, 0.0], 0.0, coupling)?;
        let b = DetectorParams::new(gap, smearing_width, [center_of_mass + h, 0.0, 0.0], 0.0, coupling)?;
        Ok(DetectorPair { a, b })
    }

    pub fn distance(&self) -> f64 {
        norm(sub(self.a.center, self.b.center))
    }

    /// `t_B - t_A`.
    pub fn delta_minus(&self) -> f64 {
        self.b.switch_center - self.a.switch_center
    }

    /// `t_B + t_A`.
    pub fn delta_plus(&self) -> f64 {
        self.b.switch_center + self.a.switch_center
    }

    /// Same gap, width and coupling; centers may differ.
    pub fn identical(&self) -> bool {
        self.a.gap == self.b.gap
            && self.a.smearing_width == self.b.smearing_width
            && self.a.coupling == self.b.coupling
    }

    pub fn swapped(&self) -> Self {
        DetectorPair { a: self.b, b: self.a }
    }

    pub fn translated(&self, shift: Vec3) -> Self {
        DetectorPair {
            a: self.a.translated(shift),
            b: self.b.translated(shift),
        }
    }

    pub fn with_coupling(&self, coupling: f64) -> Self {
        let mut out = *self;
        out.a.coupling = coupling;
        out.b.coupling = coupling;
        out
    }

    pub fn get(&self, which: Detector) -> &DetectorParams {
        match which {
            Detector::A => &self.a,
            Detector::B => &self.b,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Detector {
    A,
    B,
}

/// Fourier data of one detector's built-in Gaussian profiles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileFT {
    pub smearing_width: f64,
}

impl ProfileFT {
    pub fn smearing_ft(&self, k: f64) -> f64 {
        gaussian_smearing_ft(self.smearing_width, k)
    }

    pub fn switching_ft(&self, omega: f64) -> f64 {
        gaussian_switching_ft(omega)
    }

    /// Position-space smearing `F(x)` at distance `r` from the center.
    pub fn smearing(&self, r: f64) -> f64 {
        let s = self.smearing_width;
        (-(r * r) / (s * s)).exp() / (PI.sqrt() * s).powi(3)
    }

    /// Uncentered switching `chi(t)`.
    pub fn switching(&self, t: f64) -> f64 {
        (-t * t).exp()
    }
}

pub fn gaussian_smearing_ft(smearing_width: f64, k: f64) -> f64 {
    (2.0 * PI).powf(-1.5) * (-smearing_width * smearing_width * k * k / 4.0).exp()
}

pub fn gaussian_switching_ft(omega: f64) -> f64 {
    (-omega * omega / 4.0).exp() / 2f64.sqrt()
}

pub fn dispersion(k: f64, mass: f64) -> f64 {
    k.hypot(mass)
}

/// `sin(x) / x` with the removable singularity filled in.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

pub(crate) fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub(crate) fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub type ZetaFn = Arc<dyn Fn(Vec3) -> Complex64 + Send + Sync>;
pub type EnvelopeFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum FieldState {
    Vacuum,
    Thermal {
        beta: f64,
        mass: f64,
    },
    SqueezedUniform {
        r: f64,
        theta: f64,
    },
    SqueezedBandlimited {
        k_center: Vec3,
        epsilon: f64,
        r: f64,
        theta: f64,
    },
    SqueezedGeneral {
        zeta: ZetaFn,
        /// Non-increasing bound on `|zeta|` as a function of `|k|`.
        support_envelope: EnvelopeFn,
    },
    CoherentGaussian {
        amplitude: f64,
        width: f64,
    },
}

impl fmt::Debug for FieldState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldState::Vacuum => write!(f, "Vacuum"),
            FieldState::Thermal { beta, mass } => write!(f, "Thermal {{ beta: {beta}, mass: {mass} }}"),
            FieldState::SqueezedUniform { r, theta } => {
                write!(f, "SqueezedUniform {{ r: {r}, theta: {theta} }}")
            }
            FieldState::SqueezedBandlimited {
                k_center,
                epsilon,
                r,
                theta,
            } => write!(
                f,
                "SqueezedBandlimited {{ k_center: {k_center:?}, epsilon: {epsilon}, r: {r}, theta: {theta} }}"
            ),
            FieldState::SqueezedGeneral { .. } => write!(f, "SqueezedGeneral {{ .. }}"),
            FieldState::CoherentGaussian { amplitude, width } => {
                write!(f, "CoherentGaussian {{ amplitude: {amplitude}, width: {width} }}")
            }
        }
    }
}

impl FieldState {
    pub fn validate(&self) -> Result<(), ModelError> {
        match *self {
            FieldState::Vacuum | FieldState::SqueezedGeneral { .. } => Ok(()),
            FieldState::Thermal { beta, mass } => {
                require(beta > 0.0, "beta", beta, "must be > 0")?;
                require(mass >= 0.0, "mass", mass, "must be >= 0")
            }
            FieldState::SqueezedUniform { r, theta } => {
                require(r >= 0.0, "r", r, "must be >= 0")?;
                require(theta.is_finite(), "theta", theta, "must be finite")
            }
            FieldState::SqueezedBandlimited { epsilon, r, .. } => {
                require(epsilon > 0.0, "epsilon", epsilon, "must be > 0")?;
                require(r >= 0.0, "r", r, "must be >= 0")
            }
            FieldState::CoherentGaussian { width, .. } => {
                require(width > 0.0, "width", width, "must be > 0")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smearing_ft_values() {
        let v0 = gaussian_smearing_ft(1.0, 0.0);
        assert!((v0 - (2.0 * PI).powf(-1.5)).abs() < 1e-16);
        assert!((v0 - 0.0634936359).abs() < 1e-10);
        let v2 = gaussian_smearing_ft(1.0, 2.0);
        assert!((v2 - (2.0 * PI).powf(-1.5) * (-1.0f64).exp()).abs() < 1e-16);
    }

    #[test]
    fn smearing_ft_vs_position_space_transform() {
        // For an isotropic profile, F_bar(k) = (2 pi)^{-3/2} 4 pi \int r^2 F(r) sinc(k r) dr.
        let p = ProfileFT { smearing_width: 0.5 };
        let k = 3.0;
        let n = 200_000;
        let rmax = 6.0;
        let h = rmax / n as f64;
        let radial: f64 = (0..n)
            .map(|i| {
                let r = (i as f64 + 0.5) * h;
                r * r * p.smearing(r) * sinc(k * r)
            })
            .sum::<f64>()
            * h;
        let numeric = (2.0 * PI).powf(-1.5) * 4.0 * PI * radial;
        assert!((numeric - p.smearing_ft(k)).abs() < 1e-6);
    }

    #[test]
    fn switching_ft_values() {
        assert!((gaussian_switching_ft(0.0) - 1.0 / 2f64.sqrt()).abs() < 1e-16);
        assert!(gaussian_switching_ft(60.0) < 1e-300);
        let exact = (-1.0f64).exp() / 2f64.sqrt();
        assert!((gaussian_switching_ft(2.0) - exact).abs() < 1e-16);
        // Direct transform (2 pi)^{-1/2} \int exp(-t^2) cos(2 t) dt on a fine grid.
        let n = 200_000;
        let h = 24.0 / n as f64;
        let s: f64 = (0..n)
            .map(|i| {
                let t = -12.0 + (i as f64 + 0.5) * h;
                (-t * t).exp() * (2.0 * t).cos()
            })
            .sum::<f64>()
            * h
            / (2.0 * PI).sqrt();
        assert!((s - exact).abs() < 1e-10);
    }

    #[test]
    fn dispersion_values() {
        assert_eq!(dispersion(3.0, 4.0), 5.0);
        assert_eq!(dispersion(0.0, 0.0), 0.0);
        assert!((dispersion(1.0, 1.0) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn pair_geometry() {
        let a = DetectorParams::new(1.0, 1.0, [0.0, 0.0, 0.0], 1.0, 0.1).unwrap();
        let b = DetectorParams::new(1.0, 1.0, [3.0, 4.0, 0.0], 2.5, 0.1).unwrap();
        let p = DetectorPair::new(a, b).unwrap();
        assert_eq!(p.distance(), 5.0);
        assert_eq!(p.delta_minus(), 1.5);
        assert_eq!(p.delta_plus(), 3.5);
        assert!(p.identical());
        assert_eq!(p.identical(), p.swapped().identical());
        let c = DetectorParams { gap: 2.0, ..b };
        assert!(!DetectorPair { a, b: c }.identical());
        assert!(!DetectorPair { a: c, b: a }.identical());
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(DetectorParams::new(1.0, 0.0, [0.0; 3], 0.0, 0.1).is_err());
        assert!(DetectorParams::new(1.0, 1.0, [0.0; 3], 0.0, -0.1).is_err());
        assert!(FieldState::Thermal { beta: 0.0, mass: 0.0 }.validate().is_err());
        assert!(FieldState::Thermal { beta: 1.0, mass: -1.0 }.validate().is_err());
        assert!(FieldState::SqueezedBandlimited {
            k_center: [0.0; 3],
            epsilon: 0.0,
            r: 1.0,
            theta: 0.0
        }
        .validate()
        .is_err());
        assert!(DetectorParams::new(-2.0, 1.0, [0.0; 3], 0.0, 0.1).is_ok());
    }

    #[test]
    fn sinc_series_branch_is_continuous() {
        let x = 1e-4;
        let below = sinc(x * (1.0 - 1e-12));
        let above = sinc(x * (1.0 + 1e-12));
        assert!((below - above).abs() < 1e-15);
        assert_eq!(sinc(0.0), 1.0);
    }

    proptest::proptest! {
        #[test]
        fn profiles_positive_even_decreasing(x in 0.0f64..20.0, y in 0.0f64..20.0, s in 0.1f64..3.0) {
            let (lo, hi) = if x < y { (x, y) } else { (y, x) };
            proptest::prop_assert!(gaussian_smearing_ft(s, lo) >= gaussian_smearing_ft(s, hi));
            proptest::prop_assert!(gaussian_switching_ft(lo) >= gaussian_switching_ft(hi));
            proptest::prop_assert_eq!(gaussian_switching_ft(-x), gaussian_switching_ft(x));
            proptest::prop_assert_eq!(gaussian_smearing_ft(s, -x), gaussian_smearing_ft(s, x));
            proptest::prop_assert!(gaussian_smearing_ft(s, x) >= 0.0);
            proptest::prop_assert!(gaussian_switching_ft(x.min(50.0)) > 0.0);
        }
    }
}
