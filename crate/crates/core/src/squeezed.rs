//! Squeezed-vacuum contributions `L^sq_{nu eta}` and `M^sq` (massless field).
//!
//! Every element is `s2 * S + cs * C` with `s2 = sinh^2 r`, `cs = sinh r cosh r`.
//! `S` collects the terms whose plane waves carry position differences, `C`
//! the ones carrying position sums. For uniform squeezing the engine integrates
//! `A = S + C` and `S` separately and recombines as `cs * A - h * S` with
//! `h = cs - s2 = (1 - e^{-2r}) / 2`, so the growing factor multiplies one
//! integral and never enters the integrand.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::model::{dot, gaussian_switching_ft, norm, sinc, Detector, DetectorPair, EnvelopeFn, FieldState, Vec3, ZetaFn};
use crate::quadrature::{
    integrate_box_3d, integrate_semi_infinite_hinted, truncation_radius, QuadratureConfig,
};
use crate::vacuum::{vacuum_elements, ElementError, MatrixElements};

/// Radius of the ball around `k = 0` removed from bandlimited boxes.
pub const ORIGIN_EXCLUSION: f64 = 1e-8;

#[derive(Clone)]
pub enum SqueezeAmplitude {
    Uniform(UniformSqueezing),
    Bandlimited(BandlimitedSqueezing),
    General(GeneralSqueezing),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformSqueezing {
    pub r: f64,
    pub theta: f64,
}

/// `zeta = r e^{i theta}` on the box `|k_i - k_center_i| < epsilon / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandlimitedSqueezing {
    pub k_center: Vec3,
    pub epsilon: f64,
    pub r: f64,
    pub theta: f64,
}

#[derive(Clone)]
pub struct GeneralSqueezing {
    pub zeta: ZetaFn,
    /// Non-increasing bound on `|zeta(k)|` as a function of `|k|`.
    pub support_envelope: EnvelopeFn,
}

impl std::fmt::Debug for SqueezeAmplitude {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SqueezeAmplitude::Uniform(u) => write!(f, "{u:?}"),
            SqueezeAmplitude::Bandlimited(b) => write!(f, "{b:?}"),
            SqueezeAmplitude::General(_) => write!(f, "GeneralSqueezing {{ .. }}"),
        }
    }
}

impl BandlimitedSqueezing {
    pub fn contains(&self, k: Vec3) -> bool {
        (0..3).all(|i| (k[i] - self.k_center[i]).abs() < 0.5 * self.epsilon)
    }
}

impl SqueezeAmplitude {
    pub fn uniform(r: f64, theta: f64) -> Self {
        SqueezeAmplitude::Uniform(UniformSqueezing { r, theta })
    }

    pub fn value(&self, k: Vec3) -> Complex64 {
        match self {
            SqueezeAmplitude::Uniform(u) => Complex64::from_polar(u.r, u.theta),
            SqueezeAmplitude::Bandlimited(b) if b.contains(k) => Complex64::from_polar(b.r, b.theta),
            SqueezeAmplitude::Bandlimited(_) => Complex64::new(0.0, 0.0),
            SqueezeAmplitude::General(g) => (g.zeta)(k),
        }
    }

    /// The same amplitude as a general one (closure plus support envelope).
    pub fn to_general(&self) -> GeneralSqueezing {
        match self {
            SqueezeAmplitude::General(g) => g.clone(),
            SqueezeAmplitude::Uniform(u) => {
                let (r, z) = (u.r, Complex64::from_polar(u.r, u.theta));
                GeneralSqueezing {
                    zeta: Arc::new(move |_| z),
                    support_envelope: Arc::new(move |_| r),
                }
            }
            SqueezeAmplitude::Bandlimited(b) => {
                let b = *b;
                // Farthest box corner from the origin.
                let reach = norm([
                    b.k_center[0].abs() + 0.5 * b.epsilon,
                    b.k_center[1].abs() + 0.5 * b.epsilon,
                    b.k_center[2].abs() + 0.5 * b.epsilon,
                ]);
                let amp = SqueezeAmplitude::Bandlimited(b);
                GeneralSqueezing {
                    zeta: Arc::new(move |k| amp.value(k)),
                    support_envelope: Arc::new(move |k| if k <= reach { b.r } else { 0.0 }),
                }
            }
        }
    }

    pub fn from_field_state(state: &FieldState) -> Option<Self> {
        match state {
            FieldState::SqueezedUniform { r, theta } => Some(Self::uniform(*r, *theta)),
            FieldState::SqueezedBandlimited {
                k_center,
                epsilon,
                r,
                theta,
            } => Some(SqueezeAmplitude::Bandlimited(BandlimitedSqueezing {
                k_center: *k_center,
                epsilon: *epsilon,
                r: *r,
                theta: *theta,
            })),
            FieldState::SqueezedGeneral { zeta, support_envelope } => Some(SqueezeAmplitude::General(GeneralSqueezing {
                zeta: zeta.clone(),
                support_envelope: support_envelope.clone(),
            })),
            _ => None,
        }
    }

    fn validate(&self) -> Result<(), ElementError> {
        let bad = |what: &str, v: f64| Err(ElementError::InvalidInput(format!("{what} = {v} is out of range")));
        match self {
            SqueezeAmplitude::Uniform(u) => {
                if !(u.r >= 0.0 && u.r.is_finite()) {
                    return bad("r", u.r);
                }
                if !u.theta.is_finite() {
                    return bad("theta", u.theta);
                }
            }
            SqueezeAmplitude::Bandlimited(b) => {
                if !(b.r >= 0.0 && b.r.is_finite()) {
                    return bad("r", b.r);
                }
                if !(b.epsilon > 0.0 && b.epsilon.is_finite()) {
                    return bad("epsilon", b.epsilon);
                }
            }
            SqueezeAmplitude::General(_) => {}
        }
        Ok(())
    }
}

/// `zeta'(k) = e^{i k.x0} zeta(k)`. Evaluating a pair centred at `c` in the
/// shifted state equals evaluating the pair centred at `c + x0 / 2` in the
/// original one.
pub fn phase_shift_zeta(amp: &SqueezeAmplitude, x0: Vec3) -> SqueezeAmplitude {
    let g = amp.to_general();
    let zeta = g.zeta.clone();
    SqueezeAmplitude::General(GeneralSqueezing {
        zeta: Arc::new(move |k| Complex64::from_polar(1.0, dot(k, x0)) * zeta(k)),
        support_envelope: g.support_envelope,
    })
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("{name} = {value}: {reason}")]
pub struct DomainError {
    pub name: &'static str,
    pub value: f64,
    pub reason: &'static str,
}

/// Noise reduction in dB per unit squeezing amplitude: `20 log10(e)`.
fn db_per_r() -> f64 {
    20.0 * std::f64::consts::LOG10_E
}

pub fn r_from_db(noise_db: f64) -> Result<f64, DomainError> {
    if !(noise_db <= 0.0) {
        return Err(DomainError {
            name: "noise_db",
            value: noise_db,
            reason: "squeezing reduces noise, expected <= 0",
        });
    }
    Ok(-noise_db / db_per_r())
}

pub fn db_from_r(r: f64) -> Result<f64, DomainError> {
    if !(r >= 0.0) {
        return Err(DomainError {
            name: "r",
            value: r,
            reason: "must be >= 0",
        });
    }
    Ok(-r * db_per_r())
}

/// `sinh^2 r`, `sinh r cosh r`, and `cs - s2`.
fn hyperbolic(r: f64) -> (f64, f64, f64) {
    let (s, c) = (r.sinh(), r.cosh());
    (s * s, s * c, 0.5 * (-(-2.0 * r).exp_m1()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Element {
    L(Detector, Detector),
    M,
}

fn chi(w: f64, t: f64) -> Complex64 {
    Complex64::from_polar(gaussian_switching_ft(w), w * t)
}

/// Squeezing-independent parts `(S, C)` of the integrand at `|k| = k`, without
/// the coupling prefactor and the `d^3k / omega` measure. `plane(a)` stands
/// for `e^{i k.a}` (3D) or its angular average (radial).
fn parts<P: Fn(Vec3) -> Complex64>(pair: &DetectorPair, el: Element, theta: f64, k: f64, plane: P) -> (Complex64, Complex64) {
    let rot = Complex64::from_polar(1.0, theta);
    match el {
        Element::L(n, e) => {
            let (nu, eta) = (pair.get(n), pair.get(e));
            let f = nu.profile().smearing_ft(k) * eta.profile().smearing_ft(k);
            let diff = crate::model::sub(nu.center, eta.center);
            let sum = crate::model::add(nu.center, eta.center);
            let (tn, te) = (nu.switch_center, eta.switch_center);
            let (np, nm) = (chi(k + nu.gap, tn), chi(k - nu.gap, tn));
            let (ep, em) = (chi(k + eta.gap, te), chi(k - eta.gap, te));
            let s = nm.conj() * em * plane(diff) + np * ep.conj() * plane(neg(diff));
            let c = -(rot.conj() * np * em * plane(neg(sum)) + rot * nm.conj() * ep.conj() * plane(sum));
            (s * f, c * f)
        }
        Element::M => {
            let (a, b) = (&pair.a, &pair.b);
            let f = a.profile().smearing_ft(k) * b.profile().smearing_ft(k);
            let diff = crate::model::sub(a.center, b.center);
            let sum = crate::model::add(a.center, b.center);
            let (ap, am) = (chi(k + a.gap, a.switch_center), chi(k - a.gap, a.switch_center));
            let (bp, bm) = (chi(k + b.gap, b.switch_center), chi(k - b.gap, b.switch_center));
            let c = rot.conj() * ap * bp * plane(neg(sum)) + rot * am.conj() * bm.conj() * plane(sum);
            let s = -(ap * bm.conj() * plane(neg(diff)) + am.conj() * bp * plane(diff));
            (s * f, c * f)
        }
    }
}

fn neg(a: Vec3) -> Vec3 {
    [-a[0], -a[1], -a[2]]
}

/// Bound on `|S| + |C|` at `|k| = k`.
fn parts_bound(pair: &DetectorPair, el: Element, k: f64) -> f64 {
    let (x, y) = match el {
        Element::L(n, e) => (pair.get(n), pair.get(e)),
        Element::M => (&pair.a, &pair.b),
    };
    let f = x.profile().smearing_ft(k) * y.profile().smearing_ft(k);
    let g = gaussian_switching_ft;
    f * (g(k + x.gap) + g(k - x.gap)) * (g(k + y.gap) + g(k - y.gap))
}

fn coupling(pair: &DetectorPair, el: Element) -> f64 {
    match el {
        Element::L(n, e) => pair.get(n).coupling * pair.get(e).coupling,
        Element::M => pair.a.coupling * pair.b.coupling,
    }
}

fn finish(el: Element, v: Complex64) -> Complex64 {
    match el {
        Element::L(n, e) if n == e => Complex64::new(v.re, 0.0),
        _ => v,
    }
}

fn frequency_hint(pair: &DetectorPair) -> f64 {
    let reach = norm(pair.a.center).max(norm(pair.b.center));
    2.0 * reach + pair.distance() + pair.a.switch_center.abs() + pair.b.switch_center.abs()
}

/// Radial integrals `(A, S)` for uniform squeezing, prefactor included.
fn uniform_integrals(pair: &DetectorPair, el: Element, theta: f64, cfg: &QuadratureConfig) -> Result<(Complex64, Complex64), ElementError> {
    let pref = PI * coupling(pair, el) * 4.0 * PI;
    let radial = |k: f64| parts(pair, el, theta, k, |a: Vec3| Complex64::new(sinc(k * norm(a)), 0.0));
    // k^2 / omega = k for the massless field.
    let envelope = |k: f64| pref.abs() * k * parts_bound(pair, el, k);
    let hint = Some(frequency_hint(pair));
    let a = integrate_semi_infinite_hinted(
        |k| {
            let (s, c) = radial(k);
            (s + c) * (pref * k)
        },
        envelope,
        hint,
        cfg,
    )?;
    let s = integrate_semi_infinite_hinted(|k| radial(k).0 * (pref * k), envelope, hint, cfg)?;
    Ok((a.value, s.value))
}

fn uniform_element(pair: &DetectorPair, el: Element, amp: UniformSqueezing, cfg: &QuadratureConfig) -> Result<Complex64, ElementError> {
    SqueezeAmplitude::Uniform(amp).validate()?;
    if amp.r == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let (_, cs, h) = hyperbolic(amp.r);
    let (a, s) = uniform_integrals(pair, el, amp.theta, cfg)?;
    Ok(finish(el, a * cs - s * h))
}

pub fn l_sq_uniform(pair: &DetectorPair, which: (Detector, Detector), amp: UniformSqueezing, cfg: &QuadratureConfig) -> Result<Complex64, ElementError> {
    uniform_element(pair, Element::L(which.0, which.1), amp, cfg)
}

pub fn m_sq_uniform(pair: &DetectorPair, amp: UniformSqueezing, cfg: &QuadratureConfig) -> Result<Complex64, ElementError> {
    uniform_element(pair, Element::M, amp, cfg)
}

/// Cartesian integrand `s2 S + cs C` over `d^3k / omega`, prefactor included.
fn cartesian_integrand<'a>(
    pair: &'a DetectorPair,
    el: Element,
    zeta: &'a (dyn Fn(Vec3) -> Complex64 + 'a),
) -> impl Fn(Vec3) -> Complex64 + 'a {
    let pref = PI * coupling(pair, el);
    move |kv: Vec3| {
        let k = norm(kv);
        if k < ORIGIN_EXCLUSION {
            return Complex64::new(0.0, 0.0);
        }
        let z = zeta(kv);
        if z.norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let (s2, cs, _) = hyperbolic(z.norm());
        let (s, c) = parts(pair, el, z.arg(), k, |a: Vec3| Complex64::from_polar(1.0, dot(kv, a)));
        (s * s2 + c * cs) * (pref / k)
    }
}

fn bandlimited_element(pair: &DetectorPair, el: Element, amp: BandlimitedSqueezing, cfg: &QuadratureConfig) -> Result<Complex64, ElementError> {
    SqueezeAmplitude::Bandlimited(amp).validate()?;
    if amp.r == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let z = Complex64::from_polar(amp.r, amp.theta);
    let zeta = move |_: Vec3| z;
    let f = cartesian_integrand(pair, el, &zeta);
    // Split the box on the coordinate planes through the origin so the 1/|k|
    // point sits on panel corners only.
    let mut edges: Vec<Vec<f64>> = Vec::with_capacity(3);
    for i in 0..3 {
        let lo = amp.k_center[i] - 0.5 * amp.epsilon;
        let hi = amp.k_center[i] + 0.5 * amp.epsilon;
        if lo >= hi {
            return Err(ElementError::Quadrature(crate::quadrature::QuadratureError::DegenerateBox { axis: i, lo, hi }));
        }
        edges.push(if lo < 0.0 && hi > 0.0 { vec![lo, 0.0, hi] } else { vec![lo, hi] });
    }
    let pieces = edges.iter().map(|e| e.len() - 1).product::<usize>() as f64;
    let sub_cfg = QuadratureConfig {
        abs_tol: cfg.abs_tol / pieces,
        ..*cfg
    };
    let mut total = Complex64::new(0.0, 0.0);
    for x in edges[0].windows(2) {
        for y in edges[1].windows(2) {
            for w in edges[2].windows(2) {
                let r = integrate_box_3d(&f, [x[0], y[0], w[0]], [x[1], y[1], w[1]], &sub_cfg)?;
                total += r.value;
            }
        }
    }
    Ok(finish(el, total))
}

pub fn l_sq_bandlimited(
    pair: &DetectorPair,
    which: (Detector, Detector),
    amp: BandlimitedSqueezing,
    cfg: &QuadratureConfig,
) -> Result<Complex64, ElementError> {
    bandlimited_element(pair, Element::L(which.0, which.1), amp, cfg)
}

pub fn m_sq_bandlimited(pair: &DetectorPair, amp: BandlimitedSqueezing, cfg: &QuadratureConfig) -> Result<Complex64, ElementError> {
    bandlimited_element(pair, Element::M, amp, cfg)
}

fn general_element(pair: &DetectorPair, el: Element, amp: &GeneralSqueezing, cfg: &QuadratureConfig) -> Result<Complex64, ElementError> {
    let pref = PI * coupling(pair, el);
    let support = amp.support_envelope.clone();
    let envelope = |k: f64| {
        let rr = support(k);
        if rr <= 0.0 {
            return 0.0;
        }
        let (s2, cs, _) = hyperbolic(rr);
        4.0 * PI * pref.abs() * k * (s2 + cs) * parts_bound(pair, el, k)
    };
    let k_max = truncation_radius(envelope, cfg)?;
    if k_max == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let zeta = amp.zeta.clone();
    let zf = move |k: Vec3| zeta(k);
    let f = cartesian_integrand(pair, el, &zf);
    // Spherical coordinates (|k|, cos theta, phi); the Jacobian is |k|^2.
    let r = integrate_box_3d(
        |p: [f64; 3]| {
            let (k, u, phi) = (p[0], p[1], p[2]);
            let st = (1.0 - u * u).max(0.0).sqrt();
            f([k * st * phi.cos(), k * st * phi.sin(), k * u]) * (k * k)
        },
        [0.0, -1.0, 0.0],
        [k_max, 1.0, 2.0 * PI],
        cfg,
    )?;
    Ok(finish(el, r.value))
}

pub fn l_sq_general(pair: &DetectorPair, which: (Detector, Detector), amp: &GeneralSqueezing, cfg: &QuadratureConfig) -> Result<Complex64, ElementError> {
    general_element(pair, Element::L(which.0, which.1), amp, cfg)
}

pub fn m_sq_general(pair: &DetectorPair, amp: &GeneralSqueezing, cfg: &QuadratureConfig) -> Result<Complex64, ElementError> {
    general_element(pair, Element::M, amp, cfg)
}

/// Squeezed contributions alone (no vacuum part).
pub fn squeezed_elements(pair: &DetectorPair, amp: &SqueezeAmplitude, cfg: &QuadratureConfig) -> Result<MatrixElements, ElementError> {
    amp.validate()?;
    let els = [
        Element::L(Detector::A, Detector::A),
        Element::L(Detector::B, Detector::B),
        Element::L(Detector::A, Detector::B),
        Element::M,
    ];
    let mut out = [Complex64::new(0.0, 0.0); 4];
    for (slot, el) in out.iter_mut().zip(els) {
        *slot = match amp {
            SqueezeAmplitude::Uniform(u) => uniform_element(pair, el, *u, cfg)?,
            SqueezeAmplitude::Bandlimited(b) => bandlimited_element(pair, el, *b, cfg)?,
            SqueezeAmplitude::General(g) => general_element(pair, el, g, cfg)?,
        };
    }
    Ok(MatrixElements {
        l_aa: out[0],
        l_bb: out[1],
        l_ab: out[2],
        m: out[3],
    })
}

/// Vacuum plus squeezed contributions.
pub fn total_squeezed_elements(pair: &DetectorPair, amp: &SqueezeAmplitude, cfg: &QuadratureConfig) -> Result<MatrixElements, ElementError> {
    Ok(vacuum_elements(pair, 0.0, cfg)? + squeezed_elements(pair, amp, cfg)?)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TableError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("expected {expected} value lines, found {found}")]
    Count { expected: usize, found: usize },
}

/// `zeta` sampled on a rectilinear grid, trilinearly interpolated, zero
/// outside the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedZeta {
    pub n: [usize; 3],
    pub origin: Vec3,
    pub step: Vec3,
    pub values: Vec<Complex64>,
}

impl TabulatedZeta {
    /// Header `nx ny nz kx0 ky0 kz0 dkx dky dkz`, then `nx*ny*nz` lines of
    /// `re im`, x fastest. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, TableError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hl, header) = lines.next().ok_or(TableError::Parse {
            line: 0,
            reason: "missing header".into(),
        })?;
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 9 {
            return Err(TableError::Parse {
                line: hl,
                reason: format!("header needs 9 fields, found {}", h.len()),
            });
        }
        let mut n = [0usize; 3];
        for i in 0..3 {
            n[i] = h[i].parse().map_err(|_| TableError::Parse {
                line: hl,
                reason: format!("bad grid size {:?}", h[i]),
            })?;
            if n[i] < 2 {
                return Err(TableError::Parse {
                    line: hl,
                    reason: "each grid axis needs at least 2 points".into(),
                });
            }
        }
        let mut nums = [0.0; 6];
        for i in 0..6 {
            nums[i] = h[3 + i].parse().map_err(|_| TableError::Parse {
                line: hl,
                reason: format!("bad number {:?}", h[3 + i]),
            })?;
        }
        let origin = [nums[0], nums[1], nums[2]];
        let step = [nums[3], nums[4], nums[5]];
        if step.iter().any(|s| !(*s > 0.0)) {
            return Err(TableError::Parse {
                line: hl,
                reason: "grid steps must be > 0".into(),
            });
        }
        let expected = n[0] * n[1] * n[2];
        let mut values = Vec::with_capacity(expected);
        for (ln, l) in lines {
            let f: Vec<&str> = l.split_whitespace().collect();
            let parse = |s: &str| {
                s.parse::<f64>().map_err(|_| TableError::Parse {
                    line: ln,
                    reason: format!("bad number {s:?}"),
                })
            };
            if f.len() != 2 {
                return Err(TableError::Parse {
                    line: ln,
                    reason: "expected `re im`".into(),
                });
            }
            values.push(Complex64::new(parse(f[0])?, parse(f[1])?));
        }
        if values.len() != expected {
            return Err(TableError::Count {
                expected,
                found: values.len(),
            });
        }
        Ok(TabulatedZeta { n, origin, step, values })
    }

    pub fn value(&self, k: Vec3) -> Complex64 {
        let mut idx = [0usize; 3];
        let mut frac = [0.0; 3];
        for i in 0..3 {
            let x = (k[i] - self.origin[i]) / self.step[i];
            let last = (self.n[i] - 1) as f64;
            if !(0.0..=last).contains(&x) {
                return Complex64::new(0.0, 0.0);
            }
            let j = (x.floor() as usize).min(self.n[i] - 2);
            idx[i] = j;
            frac[i] = x - j as f64;
        }
        let at = |i: usize, j: usize, l: usize| self.values[i + self.n[0] * (j + self.n[1] * l)];
        let mut out = Complex64::new(0.0, 0.0);
        for corner in 0..8 {
            let (bx, by, bz) = (corner & 1, (corner >> 1) & 1, (corner >> 2) & 1);
            let w = [bx, by, bz]
                .iter()
                .enumerate()
                .map(|(i, &b)| if b == 1 { frac[i] } else { 1.0 - frac[i] })
                .product::<f64>();
            if w != 0.0 {
                out += at(idx[0] + bx, idx[1] + by, idx[2] + bz) * w;
            }
        }
        out
    }

    /// General amplitude with a step support envelope out to the farthest
    /// grid corner.
    pub fn into_amplitude(self) -> SqueezeAmplitude {
        let peak = self.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let mut far = [0.0; 3];
        for i in 0..3 {
            let end = self.origin[i] + self.step[i] * (self.n[i] - 1) as f64;
            far[i] = self.origin[i].abs().max(end.abs());
        }
        let reach = norm(far);
        let table = Arc::new(self);
        SqueezeAmplitude::General(GeneralSqueezing {
            zeta: Arc::new(move |k| table.value(k)),
            support_envelope: Arc::new(move |k| if k <= reach { peak } else { 0.0 }),
        })
    }
}
