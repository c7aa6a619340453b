//! Dense 2×2 complex linear algebra.
//!
//! Every coin, shift symbol, walk operator and Hamiltonian symbol in the crate is a
//! [`Mat2`]. Rotations follow the single convention `R_m(w) = exp(-i w σ_m / 2)`;
//! other modules call [`rot`] rather than restating it.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Two-component spinor `(ψ^L, ψ^R)`.
pub type Spinor = [C64; 2];

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Tolerance for the Hermiticity / unitarity input checks.
pub const DECOMP_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Row-major 2×2 complex matrix `[[a11, a12], [a21, a22]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub a11: C64,
    pub a12: C64,
    pub a21: C64,
    pub a22: C64,
}

impl Mat2 {
    pub const ZERO: Mat2 = Mat2::new(ZERO, ZERO, ZERO, ZERO);
    pub const IDENTITY: Mat2 = Mat2::new(ONE, ZERO, ZERO, ONE);

    pub const fn new(a11: C64, a12: C64, a21: C64, a22: C64) -> Self {
        Self { a11, a12, a21, a22 }
    }

    pub fn from_real(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Self::new(a11.into(), a12.into(), a21.into(), a22.into())
    }

    pub fn diag(d1: C64, d2: C64) -> Self {
        Self::new(d1, ZERO, ZERO, d2)
    }

    pub fn scalar(s: C64) -> Self {
        Self::diag(s, s)
    }

    pub fn adjoint(&self) -> Self {
        Self::new(self.a11.conj(), self.a21.conj(), self.a12.conj(), self.a22.conj())
    }

    pub fn transpose(&self) -> Self {
        Self::new(self.a11, self.a21, self.a12, self.a22)
    }

    pub fn trace(&self) -> C64 {
        self.a11 + self.a22
    }

    pub fn det(&self) -> C64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    /// Inverse by the adjugate formula. `None` when the determinant vanishes.
    pub fn inverse(&self) -> Option<Self> {
        let det = self.det();
        if det.norm() == 0.0 {
            return None;
        }
        let inv = det.inv();
        Some(Self::new(
            self.a22 * inv,
            -self.a12 * inv,
            -self.a21 * inv,
            self.a11 * inv,
        ))
    }

    pub fn entries(&self) -> [C64; 4] {
        [self.a11, self.a12, self.a21, self.a22]
    }

    pub fn is_finite(&self) -> bool {
        self.entries().iter().all(|z| z.is_finite())
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.entries().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.entries().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Operator (spectral) norm; see [`op_norm`].
    pub fn op_norm(&self) -> f64 {
        op_norm(self)
    }

    pub fn hermiticity_residual(&self) -> f64 {
        (*self - self.adjoint()).op_norm()
    }

    pub fn unitarity_residual(&self) -> f64 {
        (*self * self.adjoint() - Mat2::IDENTITY).op_norm()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_residual() <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_residual() <= tol
    }

    pub fn apply(&self, v: Spinor) -> Spinor {
        [self.a11 * v[0] + self.a12 * v[1], self.a21 * v[0] + self.a22 * v[1]]
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::new(self.a11 * s, self.a12 * s, self.a21 * s, self.a22 * s)
    }

    pub fn commutator(&self, other: &Mat2) -> Mat2 {
        *self * *other - *other * *self
    }

    pub fn anticommutator(&self, other: &Mat2) -> Mat2 {
        *self * *other + *other * *self
    }

    /// Non-negative integer power by repeated squaring.
    pub fn powu(&self, mut n: u64) -> Mat2 {
        let mut base = *self;
        let mut acc = Mat2::IDENTITY;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            n >>= 1;
        }
        acc
    }

    /// Coefficients `(h0, hx, hy, hz)` of `M = h0 I + hx σx + hy σy + hz σz`.
    pub fn pauli_coefficients(&self) -> [C64; 4] {
        let half = 0.5;
        [
            (self.a11 + self.a22) * half,
            (self.a12 + self.a21) * half,
            (self.a21 - self.a12) * (-I * half),
            (self.a11 - self.a22) * half,
        ]
    }

    pub fn from_pauli_coefficients(c: [C64; 4]) -> Mat2 {
        Mat2::new(c[0] + c[3], c[1] - I * c[2], c[1] + I * c[2], c[0] - c[3])
    }

    /// General matrix exponential `exp(M)`.
    ///
    /// Splits `M = μ I + N` with `N` traceless, so `N² = ω² I` and
    /// `exp(M) = e^μ (cosh ω I + sinh(ω)/ω N)`.
    pub fn exp(&self) -> Mat2 {
        let mu = self.trace() * 0.5;
        let n = *self - Mat2::scalar(mu);
        let omega_sq = n.a11 * n.a11 + n.a12 * n.a21;
        let omega = omega_sq.sqrt();
        let (cosh, sinhc) = if omega.norm() < 1e-4 {
            let w2 = omega_sq;
            (
                ONE + w2 / 2.0 + w2 * w2 / 24.0 + w2 * w2 * w2 / 720.0,
                ONE + w2 / 6.0 + w2 * w2 / 120.0 + w2 * w2 * w2 / 5040.0,
            )
        } else {
            (omega.cosh(), omega.sinh() / omega)
        };
        (Mat2::scalar(cosh) + n.scale(sinhc)).scale(mu.exp())
    }

    /// Flat `[re, im]` × 4 row-major encoding used by every JSON export.
    pub fn to_reals(&self) -> [f64; 8] {
        let e = self.entries();
        [e[0].re, e[0].im, e[1].re, e[1].im, e[2].re, e[2].im, e[3].re, e[3].im]
    }

    pub fn from_reals(r: [f64; 8]) -> Mat2 {
        Mat2::new(
            C64::new(r[0], r[1]),
            C64::new(r[2], r[3]),
            C64::new(r[4], r[5]),
            C64::new(r[6], r[7]),
        )
    }

    pub fn approx_eq(&self, other: &Mat2, tol: f64) -> bool {
        (*self - *other).max_abs() <= tol
    }
}

impl Default for Mat2 {
    fn default() -> Self {
        Mat2::ZERO
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        Mat2::new(self.a11 + o.a11, self.a12 + o.a12, self.a21 + o.a21, self.a22 + o.a22)
    }
}

impl AddAssign for Mat2 {
    fn add_assign(&mut self, o: Mat2) {
        *self = *self + o;
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        Mat2::new(self.a11 - o.a11, self.a12 - o.a12, self.a21 - o.a21, self.a22 - o.a22)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        Mat2::new(-self.a11, -self.a12, -self.a21, -self.a22)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        Mat2::new(
            self.a11 * o.a11 + self.a12 * o.a21,
            self.a11 * o.a12 + self.a12 * o.a22,
            self.a21 * o.a11 + self.a22 * o.a21,
            self.a21 * o.a12 + self.a22 * o.a22,
        )
    }
}

impl Mul<C64> for Mat2 {
    type Output = Mat2;
    fn mul(self, s: C64) -> Mat2 {
        self.scale(s)
    }
}

impl Mul<Mat2> for C64 {
    type Output = Mat2;
    fn mul(self, m: Mat2) -> Mat2 {
        m.scale(self)
    }
}

impl Mul<f64> for Mat2 {
    type Output = Mat2;
    fn mul(self, s: f64) -> Mat2 {
        self.scale(s.into())
    }
}

impl Mul<Mat2> for f64 {
    type Output = Mat2;
    fn mul(self, m: Mat2) -> Mat2 {
        m.scale(self.into())
    }
}

impl std::iter::Sum for Mat2 {
    fn sum<It: Iterator<Item = Mat2>>(iter: It) -> Mat2 {
        iter.fold(Mat2::ZERO, |acc, m| acc + m)
    }
}

impl Serialize for Mat2 {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_reals().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Mat2 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        <[f64; 8]>::deserialize(d).map(Mat2::from_reals)
    }
}

fn fmt_c64(z: C64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let p = f.precision().unwrap_or(4);
    let clean = |x: f64| {
        if x.abs() < 0.5 * 10f64.powi(-(p as i32)) {
            0.0
        } else {
            x
        }
    };
    let (re, im) = (clean(z.re), clean(z.im));
    match (re == 0.0, im == 0.0) {
        (_, true) => write!(f, "{re:.p$}"),
        (true, false) => write!(f, "{im:.p$}i"),
        (false, false) if im < 0.0 => write!(f, "{re:.p$}-{:.p$}i", -im),
        _ => write!(f, "{re:.p$}+{im:.p$}i"),
    }
}

impl fmt::Display for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[[")?;
        fmt_c64(self.a11, f)?;
        f.write_str(", ")?;
        fmt_c64(self.a12, f)?;
        f.write_str("], [")?;
        fmt_c64(self.a21, f)?;
        f.write_str(", ")?;
        fmt_c64(self.a22, f)?;
        f.write_str("]]")
    }
}

pub fn pauli(axis: Axis) -> Mat2 {
    match axis {
        Axis::X => Mat2::new(ZERO, ONE, ONE, ZERO),
        Axis::Y => Mat2::new(ZERO, -I, I, ZERO),
        Axis::Z => Mat2::new(ONE, ZERO, ZERO, -ONE),
    }
}

/// `R_m(w) = exp(-i w σ_m / 2)`.
pub fn rot(axis: Axis, angle: f64) -> Mat2 {
    let (s, c) = (0.5 * angle).sin_cos();
    let c = C64::new(c, 0.0);
    let mis = C64::new(0.0, -s);
    match axis {
        Axis::X => Mat2::new(c, mis, mis, c),
        Axis::Y => Mat2::new(c, (-s).into(), s.into(), c),
        Axis::Z => Mat2::diag(C64::new(c.re, -s), C64::new(c.re, s)),
    }
}

/// Rotation with a complex angle, `cos(w/2) I - i sin(w/2) σ_m`.
///
/// Only used to continue walk operators off the real ε axis for contour
/// coefficient extraction.
pub fn rot_complex(axis: Axis, angle: C64) -> Mat2 {
    let half = angle * 0.5;
    Mat2::scalar(half.cos()) - pauli(axis).scale(I * half.sin())
}

pub fn rz(angle: f64) -> Mat2 {
    rot(Axis::Z, angle)
}

pub fn ry(angle: f64) -> Mat2 {
    rot(Axis::Y, angle)
}

/// Largest singular value.
///
/// Works from the Gram matrix `M†M = [[p, q], [q*, r]]`, whose top eigenvalue
/// `(p+r)/2 + sqrt(((p-r)/2)² + |q|²)` involves no cancellation.
pub fn op_norm(m: &Mat2) -> f64 {
    let p = m.a11.norm_sqr() + m.a21.norm_sqr();
    let r = m.a12.norm_sqr() + m.a22.norm_sqr();
    let q = m.a11.conj() * m.a12 + m.a21.conj() * m.a22;
    let half_diff = 0.5 * (p - r);
    let top = 0.5 * (p + r) + (half_diff * half_diff + q.norm_sqr()).sqrt();
    top.max(0.0).sqrt()
}

/// What the caller knows about the matrix handed to [`eig2`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigHint {
    Unitary,
    Hermitian,
    General,
}

/// Eigen-decomposition of a 2×2 matrix: `M v_i = λ_i v_i`.
#[derive(Debug, Clone, Copy)]
pub struct Eig2 {
    pub values: [C64; 2],
    /// Unit-norm eigenvectors, `vectors[i]` belongs to `values[i]`.
    pub vectors: [Spinor; 2],
    /// Eigenvalues coincide within tolerance; vectors are then the canonical basis.
    pub degenerate: bool,
}

impl Eig2 {
    /// Column matrix `V = [v_0 v_1]`.
    pub fn vector_matrix(&self) -> Mat2 {
        let [v0, v1] = self.vectors;
        Mat2::new(v0[0], v1[0], v0[1], v1[1])
    }

    /// `V diag(λ) V⁻¹`.
    pub fn reconstruct(&self) -> Option<Mat2> {
        let v = self.vector_matrix();
        Some(v * Mat2::diag(self.values[0], self.values[1]) * v.inverse()?)
    }
}

fn normalize(v: Spinor) -> Spinor {
    let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    [v[0] / n, v[1] / n]
}

/// Null vector of `M - λI`, picking the better-conditioned of the two row candidates.
fn eigvec_for(m: &Mat2, lambda: C64) -> Option<Spinor> {
    let from_row1 = [m.a12, lambda - m.a11];
    let from_row2 = [lambda - m.a22, m.a21];
    let n1 = from_row1[0].norm_sqr() + from_row1[1].norm_sqr();
    let n2 = from_row2[0].norm_sqr() + from_row2[1].norm_sqr();
    let (v, n) = if n1 >= n2 { (from_row1, n1) } else { (from_row2, n2) };
    (n > 0.0).then(|| normalize(v))
}

/// Closed-form eigen-decomposition.
///
/// Degenerate eigenvalues of a scalar matrix return the canonical basis with
/// `degenerate` set; a non-scalar matrix with a single eigenvector is
/// [`Error::Defective`].
pub fn eig2(m: &Mat2, hint: EigHint) -> Result<Eig2> {
    let half_tr = m.trace() * 0.5;
    let half_diff = (m.a11 - m.a22) * 0.5;
    let disc = (half_diff * half_diff + m.a12 * m.a21).sqrt();
    let mut values = [half_tr + disc, half_tr - disc];
    match hint {
        EigHint::Hermitian => values.iter_mut().for_each(|v| v.im = 0.0),
        EigHint::Unitary => values.iter_mut().for_each(|v| *v /= v.norm()),
        EigHint::General => {}
    }

    let scale = m.max_abs().max(1.0);
    let degenerate = (values[0] - values[1]).norm() <= DECOMP_TOL * scale;
    if degenerate {
        let off = m.a12.norm().max(m.a21.norm()).max(half_diff.norm());
        if off > DECOMP_TOL * scale {
            return Err(Error::Defective);
        }
        return Ok(Eig2 {
            values,
            vectors: [[ONE, ZERO], [ZERO, ONE]],
            degenerate: true,
        });
    }

    let v0 = eigvec_for(m, values[0]).ok_or(Error::Defective)?;
    let v1 = match hint {
        // normal matrices: the second eigenvector is the orthogonal complement
        EigHint::Unitary | EigHint::Hermitian => [-v0[1].conj(), v0[0].conj()],
        EigHint::General => eigvec_for(m, values[1]).ok_or(Error::Defective)?,
    };
    let overlap = (v0[0].conj() * v1[0] + v0[1].conj() * v1[1]).norm();
    if overlap > 1.0 - DECOMP_TOL {
        return Err(Error::Defective);
    }
    Ok(Eig2 {
        values,
        vectors: [v0, v1],
        degenerate: false,
    })
}

/// `exp(-i H t)` for Hermitian `H`.
///
/// With `H = h0 I + h·σ`: `e^{-i h0 t} (cos(|h| t) I - i sin(|h| t) ĥ·σ)`.
pub fn exp_herm(h: &Mat2, t: f64) -> Result<Mat2> {
    let residual = h.hermiticity_residual();
    if residual > DECOMP_TOL {
        return Err(Error::NonHermitian { residual });
    }
    let [h0, hx, hy, hz] = h.pauli_coefficients();
    let (hx, hy, hz) = (hx.re, hy.re, hz.re);
    let len = (hx * hx + hy * hy + hz * hz).sqrt();
    let (cos, sin_over_len) = if len == 0.0 {
        (1.0, t)
    } else {
        let (s, c) = (len * t).sin_cos();
        (c, s / len)
    };
    let vec_part = Mat2::from_pauli_coefficients([ZERO, hx.into(), hy.into(), hz.into()]);
    let u = Mat2::scalar(cos.into()) - vec_part.scale(I * sin_over_len);
    Ok(u.scale((-I * h0.re * t).exp()))
}
