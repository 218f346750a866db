//! Faddeeva function `w(z) = exp(-z^2) erfc(-iz)` and the complementary error
//! function of complex argument built on it.
//!
//! The upper half plane uses Weideman's rational expansion for moderate
//! arguments and the Laplace continued fraction for large `|z|`; the lower half
//! plane follows from the reflection `w(z) = 2 exp(-z^2) - w(-z)`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecialFunctionError {
    #[error("erfc({0}) overflows double precision")]
    Overflow(Complex64),
}

const TERMS: usize = 40;
const CF_RADIUS: f64 = 8.0;

struct Weideman {
    scale: f64,
    coeffs: [f64; TERMS],
}

fn weideman() -> &'static Weideman {
    static TABLE: OnceLock<Weideman> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n = TERMS;
        let m = 2 * n;
        let scale = (n as f64 / 2f64.sqrt()).sqrt();
        // g(k) = exp(-t^2)(L^2 + t^2), t = L tan(theta/2), theta = k pi / M,
        // for k = -M+1..M-1 and g(-M) = 0; coefficients are its cosine transform.
        let g = |k: i64| -> f64 {
            if k.unsigned_abs() as usize >= m {
                return 0.0;
            }
            let theta = k as f64 * PI / m as f64;
            let t = scale * (theta / 2.0).tan();
            (-t * t).exp() * (scale * scale + t * t)
        };
        let mut coeffs = [0.0; TERMS];
        for (j, c) in coeffs.iter_mut().enumerate() {
            let jj = (j + 1) as f64;
            let mut s = 0.0;
            for k in -(m as i64) + 1..m as i64 {
                s += g(k) * (PI * jj * k as f64 / m as f64).cos();
            }
            *c = s / (2 * m) as f64;
        }
        Weideman { scale, coeffs }
    })
}

fn w_upper_rational(z: Complex64) -> Complex64 {
    let tab = weideman();
    let i = Complex64::i();
    let l = Complex64::new(tab.scale, 0.0);
    let denom = l - i * z;
    let zz = (l + i * z) / denom;
    let mut p = Complex64::new(0.0, 0.0);
    for c in tab.coeffs.iter().rev() {
        p = p * zz + c;
    }
    2.0 * p / (denom * denom) + (1.0 / PI.sqrt()) / denom
}

fn w_upper_continued_fraction(z: Complex64) -> Complex64 {
    // w(z) = (i/sqrt(pi)) / (z - (1/2)/(z - 1/(z - (3/2)/(z - ...))))
    let mut tail = z;
    for n in (1..=60).rev() {
        tail = z - (n as f64 * 0.5) / tail;
    }
    Complex64::i() / (PI.sqrt() * tail)
}

/// Faddeeva function for any complex argument.
pub fn faddeeva(z: Complex64) -> Complex64 {
    if z.im >= 0.0 {
        if z.norm() >= CF_RADIUS {
            w_upper_continued_fraction(z)
        } else {
            w_upper_rational(z)
        }
    } else {
        2.0 * (-z * z).exp() - faddeeva(-z)
    }
}

/// `exp(-a) * erfc(z)` evaluated without forming `erfc(z)` alone, so that a
/// large Gaussian prefactor can absorb the growth of `erfc`.
pub fn scaled_erfc(z: Complex64, a: Complex64) -> Result<Complex64, SpecialFunctionError> {
    // erfc(z) = exp(-z^2) w(iz) for Re z >= 0, and 2 - erfc(-z) otherwise.
    let i = Complex64::i();
    let out = if z.re >= 0.0 {
        (-a - z * z).exp() * faddeeva(i * z)
    } else {
        2.0 * (-a).exp() - (-a - z * z).exp() * faddeeva(-i * z)
    };
    if out.re.is_finite() && out.im.is_finite() {
        Ok(out)
    } else {
        Err(SpecialFunctionError::Overflow(z))
    }
}

pub fn erfc(z: Complex64) -> Result<Complex64, SpecialFunctionError> {
    scaled_erfc(z, Complex64::new(0.0, 0.0))
}
