//! Density-matrix assembly, partial transpose, a 4x4 Hermitian eigensolver,
//! negativity and mutual information.
//!
//! Basis order is `{gg, ge, eg, ee}` with the first letter for detector A, so
//! index `2a + b` holds A in state `a` and B in state `b`.

use num_complex::Complex64;
use thiserror::Error;

use crate::vacuum::MatrixElements;

pub type Matrix4 = [[Complex64; 4]; 4];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error("invalid matrix elements: {0}")]
    InvalidElements(String),
    #[error("input is not Hermitian (residual {0:e})")]
    NonHermitianInput(f64),
    #[error("Jacobi iteration did not converge after {0} sweeps")]
    NoConvergence(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoDetectorDensityMatrix {
    pub entries: Matrix4,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationReport {
    pub negativity: f64,
    pub min_pt_eigenvalue: f64,
    pub mutual_information: f64,
    pub l_plus: f64,
    pub l_minus: f64,
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

const IMAG_THRESHOLD: f64 = 1e-10;

/// Real part of a diagonal element, after checking it is real and not
/// meaningfully negative. Quadrature noise down to -1e-12 is clamped to 0.
fn diagonal_value(name: &str, v: Complex64) -> Result<f64, MeasureError> {
    if v.im.abs() > IMAG_THRESHOLD * v.re.abs().max(1.0) {
        return Err(MeasureError::InvalidElements(format!("{name} has imaginary part {:e}", v.im)));
    }
    if v.re < -1e-12 {
        return Err(MeasureError::InvalidElements(format!("{name} = {:e} is negative", v.re)));
    }
    if v.re < 0.0 {
        log::warn!("clamping {name} = {:e} to 0", v.re);
        return Ok(0.0);
    }
    Ok(v.re)
}

pub fn assemble_xform(el: &MatrixElements) -> Result<TwoDetectorDensityMatrix, MeasureError> {
    let laa = diagonal_value("L_AA", el.l_aa)?;
    let lbb = diagonal_value("L_BB", el.l_bb)?;
    if laa + lbb > 1.0 {
        return Err(MeasureError::InvalidElements(format!(
            "L_AA + L_BB = {} exceeds 1; the coupling is outside the perturbative regime",
            laa + lbb
        )));
    }
    let z = zero();
    Ok(TwoDetectorDensityMatrix {
        entries: [
            [c(1.0 - laa - lbb), z, z, el.m.conj()],
            [z, c(lbb), el.l_ab.conj(), z],
            [z, el.l_ab, c(laa), z],
            [el.m, z, z, z],
        ],
    })
}

/// Transpose on the A factor: `[(a,b),(a',b')] -> [(a',b),(a,b')]`.
pub fn partial_transpose_a(m: &Matrix4) -> Matrix4 {
    let mut out = [[zero(); 4]; 4];
    for a in 0..2 {
        for b in 0..2 {
            for a2 in 0..2 {
                for b2 in 0..2 {
                    out[2 * a2 + b][2 * a + b2] = m[2 * a + b][2 * a2 + b2];
                }
            }
        }
    }
    out
}

pub fn hermiticity_residual(m: &Matrix4) -> f64 {
    let mut r: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            r = r.max((m[i][j] - m[j][i].conj()).norm());
        }
    }
    r
}

fn frobenius(m: &Matrix4) -> f64 {
    m.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

const MAX_SWEEPS: usize = 100;

/// Eigenvalues of a Hermitian 4x4 matrix in ascending order, by cyclic complex
/// Jacobi rotations.
pub fn eigenvalues_hermitian_4(m: &Matrix4) -> Result<[f64; 4], MeasureError> {
    let res = hermiticity_residual(m);
    let scale = frobenius(m);
    if res > 1e-8 * scale.max(1e-300) && res > 1e-300 {
        return Err(MeasureError::NonHermitianInput(res));
    }
    let mut a = *m;
    // Symmetrize so rounding in the input cannot bias the rotations.
    for i in 0..4 {
        a[i][i] = c(a[i][i].re);
        for j in i + 1..4 {
            let v = 0.5 * (a[i][j] + a[j][i].conj());
            a[i][j] = v;
            a[j][i] = v.conj();
        }
    }
    let target = 1e-14 * scale;
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..4)
            .flat_map(|i| (0..4).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= target {
            converged = true;
            break;
        }
        for p in 0..3 {
            for q in p + 1..4 {
                rotate(&mut a, p, q);
            }
        }
    }
    if !converged {
        return Err(MeasureError::NoConvergence(MAX_SWEEPS));
    }
    let mut ev = [a[0][0].re, a[1][1].re, a[2][2].re, a[3][3].re];
    ev.sort_by(|x, y| x.total_cmp(y));
    Ok(ev)
}

/// One Jacobi step zeroing `a[p][q]`: a diagonal phase makes it real, then a
/// real Givens rotation removes it.
fn rotate(a: &mut Matrix4, p: usize, q: usize) {
    let apq = a[p][q];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let ph = apq / mag;
    // Column q times conj(ph), row q times ph.
    for k in 0..4 {
        a[k][q] *= ph.conj();
        a[q][k] *= ph;
    }
    let app = a[p][p].re;
    let aqq = a[q][q].re;
    let tau = (aqq - app) / (2.0 * mag);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let cs = 1.0 / (1.0 + t * t).sqrt();
    let sn = t * cs;
    for k in 0..4 {
        let (kp, kq) = (a[k][p], a[k][q]);
        a[k][p] = kp * cs - kq * sn;
        a[k][q] = kp * sn + kq * cs;
    }
    for k in 0..4 {
        let (pk, qk) = (a[p][k], a[q][k]);
        a[p][k] = pk * cs - qk * sn;
        a[q][k] = pk * sn + qk * cs;
    }
    a[p][q] = zero();
    a[q][p] = zero();
    a[p][p] = c(a[p][p].re);
    a[q][q] = c(a[q][q].re);
}

pub fn pt_spectrum(rho: &TwoDetectorDensityMatrix) -> Result<[f64; 4], MeasureError> {
    eigenvalues_hermitian_4(&partial_transpose_a(&rho.entries))
}

/// Sum of the magnitudes of the negative eigenvalues of the partial transpose.
pub fn negativity(rho: &TwoDetectorDensityMatrix) -> Result<f64, MeasureError> {
    Ok(pt_spectrum(rho)?.iter().map(|&e| (-e).max(0.0)).sum())
}

fn xform_diagonals(el: &MatrixElements) -> Result<(f64, f64), MeasureError> {
    Ok((diagonal_value("L_AA", el.l_aa)?, diagonal_value("L_BB", el.l_bb)?))
}

/// Closed-form negativity of an X-form matrix. Only `L >= 0` is required, so
/// elements divided by `lambda^2` are accepted.
pub fn negativity_xform(el: &MatrixElements, identical: bool) -> Result<f64, MeasureError> {
    let (laa, lbb) = xform_diagonals(el)?;
    let m = el.m.norm();
    if identical {
        return Ok((m - 0.5 * (laa + lbb)).max(0.0));
    }
    let e1 = 0.5 * (laa + lbb - ((laa - lbb).powi(2) + 4.0 * m * m).sqrt());
    Ok((-e1).max(0.0))
}

pub fn l_plus_minus(el: &MatrixElements) -> Result<(f64, f64), MeasureError> {
    let (laa, lbb) = xform_diagonals(el)?;
    if el.l_ab.norm_sqr() == 0.0 {
        return Ok((laa.max(lbb), laa.min(lbb)));
    }
    let root = ((laa - lbb).powi(2) + 4.0 * el.l_ab.norm_sqr()).sqrt();
    Ok((0.5 * (laa + lbb + root), (0.5 * (laa + lbb - root)).max(0.0)))
}

pub(crate) fn xlogx(x: f64) -> f64 {
    if x < 1e-300 {
        0.0
    } else {
        x * x.ln()
    }
}

/// `L+ log L+ + L- log L- - L_AA log L_AA - L_BB log L_BB`.
pub fn mutual_information(el: &MatrixElements) -> Result<f64, MeasureError> {
    let (laa, lbb) = xform_diagonals(el)?;
    let lab2 = el.l_ab.norm_sqr();
    if lab2 > laa * lbb * (1.0 + 1e-9) + 1e-12 {
        return Err(MeasureError::InvalidElements(format!(
            "|L_AB|^2 = {lab2:e} exceeds L_AA L_BB = {:e}",
            laa * lbb
        )));
    }
    if lab2 == 0.0 {
        return Ok(0.0);
    }
    let (lp, lm) = l_plus_minus(el)?;
    Ok(xlogx(lp) + xlogx(lm) - xlogx(laa) - xlogx(lbb))
}

pub fn correlation_report(el: &MatrixElements) -> Result<CorrelationReport, MeasureError> {
    let rho = assemble_xform(el)?;
    let spec = pt_spectrum(&rho)?;
    let (l_plus, l_minus) = l_plus_minus(el)?;
    Ok(CorrelationReport {
        negativity: spec.iter().map(|&e| (-e).max(0.0)).sum(),
        min_pt_eigenvalue: spec[0],
        mutual_information: mutual_information(el)?,
        l_plus,
        l_minus,
    })
}

/// `-tr(rho log rho)` of a Hermitian 4x4 matrix.
pub fn von_neumann_entropy(m: &Matrix4) -> Result<f64, MeasureError> {
    Ok(-eigenvalues_hermitian_4(m)?.iter().map(|&e| xlogx(e.max(0.0))).sum::<f64>())
}

/// Reduced states `(rho_A, rho_B)`.
pub fn partial_traces(m: &Matrix4) -> ([[Complex64; 2]; 2], [[Complex64; 2]; 2]) {
    let mut ra = [[zero(); 2]; 2];
    let mut rb = [[zero(); 2]; 2];
    for a in 0..2 {
        for a2 in 0..2 {
            for b in 0..2 {
                ra[a][a2] += m[2 * a + b][2 * a2 + b];
                rb[a][a2] += m[2 * b + a][2 * b + a2];
            }
        }
    }
    (ra, rb)
}

fn entropy_2(m: &[[Complex64; 2]; 2]) -> f64 {
    let (p, q) = (m[0][0].re, m[1][1].re);
    let root = ((p - q).powi(2) + 4.0 * m[0][1].norm_sqr()).sqrt();
    -(xlogx((0.5 * (p + q + root)).max(0.0)) + xlogx((0.5 * (p + q - root)).max(0.0)))
}

/// `S_A + S_B - S_AB` from the full spectra.
pub fn mutual_information_exact(rho: &TwoDetectorDensityMatrix) -> Result<f64, MeasureError> {
    let (ra, rb) = partial_traces(&rho.entries);
    Ok(entropy_2(&ra) + entropy_2(&rb) - von_neumann_entropy(&rho.entries)?)
}
