//! Scalar backends and tolerance-aware linear algebra.
//!
//! Two interchangeable scalar types implement [`Scalar`]:
//! [`Complex64`] (machine-precision complex floats, rank decided by singular
//! values relative to the largest one) and [`GaussRat`] (exact Gaussian
//! rationals, rank decided by exact elimination).

mod approx;
mod exact;
mod matrix;

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

pub use num_complex::Complex64;

pub use exact::GaussRat;
pub use matrix::{dot, norm, scale_vec, Matrix};

use crate::error::{Error, Result};

/// Default relative rank tolerance.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Slack for checks on derived quantities (powers of `G`, eigenvalue ranks),
/// which inherit the conditioning of the fitted form.
pub const VERIFY_TOL: f64 = 1e-6;

/// A field of complex scalars with the linear-algebra kernels the rest of
/// the crate needs.
pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// True for the exact backend; tolerances are ignored there.
    const EXACT: bool;
    /// Name used in serialized documents (`"approx"` or `"exact"`).
    const NAME: &'static str;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn from_ratio(num: i64, den: i64) -> Self;
    fn imag_unit() -> Self;
    /// Converts a float; exact for the exact backend (binary expansion).
    fn from_c64(z: Complex64) -> Self;
    /// `exp(2 pi i num / den)` if the backend can represent it.
    fn root_of_unity(num: i64, den: i64) -> Option<Self>;

    fn is_zero(&self) -> bool;
    fn modulus(&self) -> f64;
    fn conj(&self) -> Self;
    fn to_c64(&self) -> Complex64;
    fn is_real(&self) -> bool;

    fn rank(m: &Matrix<Self>, tol: f64) -> usize;
    fn nullspace(m: &Matrix<Self>, tol: f64) -> Vec<Vec<Self>>;

    /// Rescales a nonzero vector to a canonical projective representative:
    /// largest-modulus entry equal to 1 (approximate) or primitive Gaussian
    /// integer vector with a positive leading entry (exact).
    fn normalize(v: &mut [Self]);

    /// Serializes as a `[re, im]` pair of JSON values.
    fn encode(&self) -> [serde_json::Value; 2];
    fn decode(re: &serde_json::Value, im: &serde_json::Value) -> Result<Self>;
}

/// Numerical rank: singular values above `tol * sigma_max` (approximate) or
/// the exact pivot count (exact, `tol` ignored).
pub fn rank<S: Scalar>(m: &Matrix<S>, tol: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    S::rank(m, tol)
}

/// Basis of the right kernel; its length is `cols - rank(m, tol)`.
pub fn nullspace<S: Scalar>(m: &Matrix<S>, tol: f64) -> Vec<Vec<S>> {
    if m.cols() == 0 {
        return Vec::new();
    }
    if m.rows() == 0 {
        return (0..m.cols())
            .map(|i| {
                let mut v = vec![S::zero(); m.cols()];
                v[i] = S::one();
                v
            })
            .collect();
    }
    S::nullspace(m, tol)
}

/// Singular values in descending order, computed in floating point.
pub fn singular_values<S: Scalar>(m: &Matrix<S>) -> Vec<f64> {
    approx::singular_values(&m.to_c64())
}

/// Unit vector minimizing `|Mv|` together with the residual `|Mv|`.
///
/// The exact backend returns a kernel vector with residual 0, or
/// [`Error::ExactUnsupported`] when the kernel is trivial.
pub fn least_singular_vector<S: Scalar>(m: &Matrix<S>) -> Result<(Vec<S>, f64)> {
    if m.cols() == 0 {
        return Err(Error::DimensionMismatch("matrix has no columns".into()));
    }
    if S::EXACT {
        let ker = nullspace(m, 0.0);
        return match ker.into_iter().next() {
            Some(v) => Ok((v, 0.0)),
            None => Err(Error::ExactUnsupported(
                "trivial kernel has no exact least singular vector".into(),
            )),
        };
    }
    let (v, res) = approx::least_singular_vector(&m.to_c64());
    Ok((v.into_iter().map(S::from_c64).collect(), res))
}

/// True iff `M^r` is a nonzero multiple of the identity, judged after
/// dividing by its top-left entry.
pub fn power_is_identity<S: Scalar>(m: &Matrix<S>, r: usize, tol: f64) -> Result<bool> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch("power of non-square matrix".into()));
    }
    m.inverse(tol)?;
    let p = m.pow(r);
    let lead = p[(0, 0)].clone();
    let scale = p.max_modulus();
    if lead.is_zero() || (!S::EXACT && lead.modulus() <= tol * scale) {
        return Ok(false);
    }
    let n = p.rows();
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { S::one() } else { S::zero() };
            let d = p[(i, j)].clone() / lead.clone() - target;
            if S::EXACT {
                if !d.is_zero() {
                    return Ok(false);
                }
            } else if d.modulus() > tol {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Projective distance between two nonzero vectors: the sine of the angle
/// between the lines they span (approximate), or 0/1 for
/// proportional/non-proportional (exact).
pub fn projective_distance<S: Scalar>(a: &[S], b: &[S]) -> f64 {
    assert_eq!(a.len(), b.len());
    if S::EXACT {
        return if proportional_exact(a, b) { 0.0 } else { 1.0 };
    }
    let a: Vec<Complex64> = a.iter().map(Scalar::to_c64).collect();
    let b: Vec<Complex64> = b.iter().map(Scalar::to_c64).collect();
    let na: f64 = a.iter().map(|z| z.norm_sqr()).sum::<f64>();
    let nb: f64 = b.iter().map(|z| z.norm_sqr()).sum::<f64>();
    if na == 0.0 || nb == 0.0 {
        return 1.0;
    }
    let inner: Complex64 = a.iter().zip(&b).map(|(x, y)| x.conj() * y).sum();
    let coef = inner / na;
    let perp: f64 = a
        .iter()
        .zip(&b)
        .map(|(x, y)| (y - x * coef).norm_sqr())
        .sum();
    (perp / nb).sqrt().min(1.0)
}

fn proportional_exact<S: Scalar>(a: &[S], b: &[S]) -> bool {
    // all 2x2 minors a_i b_j - a_j b_i vanish
    let Some(p) = a.iter().position(|x| !x.is_zero()) else {
        return false;
    };
    if b[p].is_zero() {
        return false;
    }
    (0..a.len()).all(|j| (a[p].clone() * b[j].clone() - a[j].clone() * b[p].clone()).is_zero())
}

/// Random scalar: uniform in [-1, 1] (approximate) or a small integer in
/// [-5, 5] (exact); complex unless `real`.
pub fn sample<S: Scalar, R: rand::Rng + ?Sized>(rng: &mut R, real: bool) -> S {
    if S::EXACT {
        let re = S::from_i64(rng.gen_range(-5..=5));
        if real {
            return re;
        }
        return re + S::from_i64(rng.gen_range(-5..=5)) * S::imag_unit();
    }
    let re = rng.gen_range(-1.0..1.0);
    let im = if real { 0.0 } else { rng.gen_range(-1.0..1.0) };
    S::from_c64(Complex64::new(re, im))
}
