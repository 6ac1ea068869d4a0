//! Deciding m-self-duality, the bilinear form `F`, its monodromy
//! `G = F^-1 F^T` and the congruence classification of `F`.

use std::collections::BTreeMap;

use num_integer::Integer;

use crate::error::{Error, Result};
use crate::numeric::{self, Matrix, Scalar, VERIFY_TOL};
use crate::polygon::Polygon;
use crate::projective::{fit_map, fit_map_solutions, ProjMap};

/// A nondegenerate bilinear form `F(u, v) = u^T F v`, defined up to scale.
#[derive(Clone, Debug)]
pub struct BilinearForm<S> {
    matrix: Matrix<S>,
}

impl<S: Scalar> BilinearForm<S> {
    pub fn new(matrix: Matrix<S>, tol: f64) -> Result<Self> {
        if !matrix.is_square() || matrix.rows() < 2 {
            return Err(Error::DimensionMismatch("bilinear form needs a square matrix".into()));
        }
        matrix.inverse(tol)?;
        Ok(Self { matrix })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: Matrix::identity(dim),
        }
    }

    /// `Omega_{2f}` as `f` copies of `[[0, 1], [-1, 0]]`, followed by `I`.
    pub fn symplectic(f: usize, dim: usize) -> Result<Self> {
        Self::canonical(&vec![(1, 2); f], dim)
    }

    /// A form congruent to `(+) H_2(e^{2 pi i a/d}) (+) I`, one 2x2 block per
    /// angle `(a, d)` (fraction of a full turn) and an identity block filling
    /// up to `dim`.
    ///
    /// Approximate blocks are `H_2(mu) = [[0, 1], [mu, 0]]`. Exact blocks are
    /// rational forms `[[1, p], [-p, pq]]` whose monodromy has trace
    /// `2 (q-p)/(q+p) = 2 cos theta`, so only angles with rational cosine
    /// (turns of 1/2, 1/3, 1/4, 1/6 and their complements) are available.
    pub fn canonical(angles: &[(i64, i64)], dim: usize) -> Result<Self> {
        if 2 * angles.len() > dim {
            return Err(Error::Precondition(format!(
                "{} blocks do not fit in dimension {dim}",
                angles.len()
            )));
        }
        let mut m = Matrix::<S>::zeros(0, 0);
        for &(a, d) in angles {
            if d <= 0 || a.rem_euclid(d) == 0 {
                return Err(Error::Precondition(format!("trivial angle {a}/{d}")));
            }
            m = m.direct_sum(&h2_block::<S>(a, d)?);
        }
        let rest = Matrix::identity(dim - 2 * angles.len());
        Ok(Self {
            matrix: m.direct_sum(&rest),
        })
    }

    /// Like [`BilinearForm::canonical`] but with the rational blocks in
    /// both backends, so the form and its monodromy are real.
    pub fn rational(angles: &[(i64, i64)], dim: usize) -> Result<Self> {
        if 2 * angles.len() > dim {
            return Err(Error::Precondition(format!(
                "{} blocks do not fit in dimension {dim}",
                angles.len()
            )));
        }
        let mut m = Matrix::<S>::zeros(0, 0);
        for &(a, d) in angles {
            if d <= 0 || a.rem_euclid(d) == 0 {
                return Err(Error::Precondition(format!("trivial angle {a}/{d}")));
            }
            m = m.direct_sum(&rational_block::<S>(a, d)?);
        }
        Ok(Self {
            matrix: m.direct_sum(&Matrix::identity(dim - 2 * angles.len())),
        })
    }

    pub fn matrix(&self) -> &Matrix<S> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn eval(&self, u: &[S], v: &[S]) -> S {
        numeric::dot(u, &self.matrix.mul_vec(v))
    }

    /// `G = F^-1 F^T`; independent of the scale of `F`, with `det G = 1`.
    pub fn monodromy(&self, tol: f64) -> Result<Matrix<S>> {
        Ok(self.matrix.inverse(tol)?.mul(&self.matrix.transpose()))
    }

    /// `(F + F^T)/2` and `(F - F^T)/2`.
    pub fn sym_skew_split(&self) -> (Matrix<S>, Matrix<S>) {
        let t = self.matrix.transpose();
        let half = S::from_ratio(1, 2);
        (
            self.matrix.add(&t).scale(&half),
            self.matrix.sub(&t).scale(&half),
        )
    }

    /// Dimension of `{X : X^T F + F X = 0}`, the Lie algebra of the
    /// isometry group of `F`.
    pub fn stabilizer_dim(&self, tol: f64) -> usize {
        let d = self.dim();
        let f = &self.matrix;
        let mut op = Matrix::<S>::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                let row = i * d + j;
                for l in 0..d {
                    // (X^T F)_{ij} = sum_l X_{li} F_{lj}
                    let col = l * d + i;
                    op[(row, col)] = op[(row, col)].clone() + f[(l, j)].clone();
                    // (F X)_{ij} = sum_l F_{il} X_{lj}
                    let col = l * d + j;
                    op[(row, col)] = op[(row, col)].clone() + f[(i, l)].clone();
                }
            }
        }
        d * d - numeric::rank(&op, tol)
    }
}

fn h2_block<S: Scalar>(a: i64, d: i64) -> Result<Matrix<S>> {
    if S::EXACT {
        return rational_block(a, d);
    }
    let mu = S::root_of_unity(a, d).expect("approximate roots always exist");
    Ok(Matrix::from_fn(2, 2, |r, c| match (r, c) {
        (0, 1) => S::one(),
        (1, 0) => mu.clone(),
        _ => S::zero(),
    }))
}

fn rational_block<S: Scalar>(a: i64, d: i64) -> Result<Matrix<S>> {
    let int = |v: [[i64; 2]; 2]| Matrix::from_fn(2, 2, |r, c| S::from_i64(v[r][c]));
    let (a, d) = reduce_turn(a, d);
    // (1 - cos)/(1 + cos) = p/q
    let (p, q) = match (a.min(d - a), d) {
        (1, 2) => return Ok(int([[0, 1], [-1, 0]])),
        (1, 3) => (3, 1),
        (1, 4) => (1, 1),
        (1, 6) => (1, 3),
        _ => {
            return Err(Error::ExactUnsupported(format!(
                "no rational form for angle {a}/{d} of a turn"
            )))
        }
    };
    Ok(int([[1, p], [-p, p * q]]))
}

/// `n / gcd(m, n)` with `gcd(0, n) = n`.
pub fn rotation_order(m: i64, n: usize) -> usize {
    let g = (m.unsigned_abs() as usize).gcd(&n);
    n / g
}

/// Witness of m-self-duality.
#[derive(Clone, Debug)]
pub struct SelfDualityCertificate<S> {
    pub m: i64,
    pub n: usize,
    pub k: usize,
    pub r: usize,
    /// Matrix `M` of `f`: the covector of `f(u)` is `M u`.
    pub f_map: ProjMap<S>,
    /// `F = M^T`.
    pub form: BilinearForm<S>,
    /// `G = F^-1 F^T`.
    pub monodromy: Matrix<S>,
    /// Least singular value of the correspondence system.
    pub residual: f64,
    /// Dimension of the solution space of the correspondence system.
    pub solution_dim: usize,
}

/// Outcome of [`check_self_dual`].
#[derive(Clone, Debug)]
pub enum SelfDuality<S> {
    SelfDual(Box<SelfDualityCertificate<S>>),
    NotSelfDual { residual: f64, detail: String },
}

impl<S: Scalar> SelfDuality<S> {
    pub fn is_self_dual(&self) -> bool {
        matches!(self, Self::SelfDual(_))
    }

    pub fn residual(&self) -> f64 {
        match self {
            Self::SelfDual(c) => c.residual,
            Self::NotSelfDual { residual, .. } => *residual,
        }
    }

    pub fn certificate(self) -> Option<SelfDualityCertificate<S>> {
        match self {
            Self::SelfDual(c) => Some(*c),
            Self::NotSelfDual { .. } => None,
        }
    }
}

/// Checks the parity condition `m = k-1 (mod 2)`.
pub fn check_parity(m: i64, k: usize) -> Result<()> {
    if (m - k as i64 + 1).rem_euclid(2) != 0 {
        return Err(Error::ParityError { index: m });
    }
    Ok(())
}

/// Decides whether some `f` sends every `A_i` to `B_{i+m}`.
pub fn check_self_dual<S: Scalar>(p: &Polygon<S>, m: i64, tol: f64) -> Result<SelfDuality<S>> {
    let (n, k) = (p.n(), p.ambient_dim());
    check_parity(m, k)?;
    let dual = match p.dual(tol) {
        Ok(d) => d,
        Err(e @ Error::DegenerateSpan { .. }) => {
            return Ok(SelfDuality::NotSelfDual {
                residual: 1.0,
                detail: format!("dual polygon undefined: {e}"),
            })
        }
        Err(e) => return Err(e),
    };
    // B_{1+2t+m} sits in dual slot t + (1+m-k)/2
    let shift = (1 + m - k as i64) / 2;
    let sources = p.coords();
    let targets: Vec<Vec<S>> = (0..n as i64)
        .map(|t| dual.slot(t + shift).covector().to_vec())
        .collect();
    let fit = fit_map(&sources, &targets, tol)?;
    let accepted = if S::EXACT { fit.solution_dim > 0 } else { fit.residual <= tol };
    let not = |detail: String| SelfDuality::NotSelfDual {
        residual: fit.residual,
        detail,
    };
    if !accepted {
        return Ok(not("no map sends the vertices onto the shifted dual".into()));
    }
    let candidates = match &fit.map {
        Some(m0) if !S::EXACT => vec![m0.clone()],
        _ => exact_candidates(&sources, &targets)?,
    };
    let Some(mat) = candidates.into_iter().find(|c| c.inverse(tol).is_ok()) else {
        return Ok(not("every fitted map is singular".into()));
    };
    let f_map = ProjMap::new(mat.clone(), tol)?;
    let form = BilinearForm::new(mat.transpose(), tol)?;
    let monodromy = form.monodromy(tol)?;
    Ok(SelfDuality::SelfDual(Box::new(SelfDualityCertificate {
        m,
        n,
        k,
        r: rotation_order(m, n),
        f_map,
        form,
        monodromy,
        residual: fit.residual,
        solution_dim: fit.solution_dim,
    })))
}

/// Kernel basis of the exact system plus a few integer combinations, so a
/// nonsingular member is found when the solution space is not a line.
fn exact_candidates<S: Scalar>(sources: &[Vec<S>], targets: &[Vec<S>]) -> Result<Vec<Matrix<S>>> {
    let basis = fit_map_solutions(sources, targets, 0.0)?;
    let mut out = basis.clone();
    for c in 1..=3i64 {
        let mut acc: Option<Matrix<S>> = None;
        for (j, b) in basis.iter().enumerate() {
            let term = b.scale(&S::from_i64(c.pow(j as u32)));
            acc = Some(match acc {
                None => term,
                Some(a) => a.add(&term),
            });
        }
        out.extend(acc);
    }
    Ok(out)
}

/// Largest normalized incidence `|F(A_i, A_{i+m+e})| / (|F| |A_i| |A_j|)`
/// over all constraint pairs.
pub fn incidence_residual<S: Scalar>(form: &BilinearForm<S>, p: &Polygon<S>, m: i64) -> f64 {
    let k = p.ambient_dim() as i64;
    let fnorm = form.matrix().frobenius_norm();
    let mut worst: f64 = 0.0;
    for t in 0..p.n() as i64 {
        for e in offsets(k) {
            let u = t + (m + e) / 2;
            let (a, b) = (p.slot(t).coords(), p.slot(u).coords());
            let v = form.eval(a, b).modulus() / (fnorm * numeric::norm(a) * numeric::norm(b));
            worst = worst.max(v);
        }
    }
    worst
}

/// Offsets `e` with `|e| <= k-1`, `e = k-1 (mod 2)`.
pub fn offsets(k: i64) -> impl Iterator<Item = i64> {
    (0..k).map(move |j| -(k - 1) + 2 * j)
}

fn slack<S: Scalar>(tol: f64) -> f64 {
    if S::EXACT {
        0.0
    } else {
        tol.max(VERIFY_TOL)
    }
}

/// `G A_i = A_{i+2m}` for every vertex and `G^r` is scalar.
pub fn verify_rotation<S: Scalar>(cert: &SelfDualityCertificate<S>, p: &Polygon<S>, tol: f64) -> bool {
    let tol = slack::<S>(tol);
    let g = &cert.monodromy;
    let moved = (0..p.n() as i64).all(|t| {
        let img = g.mul_vec(p.slot(t).coords());
        numeric::projective_distance(&img, p.slot(t + cert.m).coords()) <= tol
    });
    moved && numeric::power_is_identity(g, cert.r, tol).unwrap_or(false)
}

/// Congruence class of `F`: `(+) H_2(e^{i theta_j}) (+) I_{identity_block}`.
///
/// Angles are fractions `(a, d)` of a full turn in lowest terms with
/// `0 < a/d <= 1/2`; `H_2(mu)` and `H_2(1/mu)` are congruent, so `theta` and
/// `-theta` are the same class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalForm {
    pub angles: Vec<(i64, i64)>,
    pub identity_block: usize,
}

impl CanonicalForm {
    pub fn block_count(&self) -> usize {
        self.angles.len()
    }

    pub fn dim(&self) -> usize {
        2 * self.angles.len() + self.identity_block
    }

    /// Number of blocks with the given angle.
    pub fn count(&self, angle: (i64, i64)) -> usize {
        self.angles.iter().filter(|&&a| a == angle).count()
    }
}

/// Reduces `a/d` to lowest terms in `[0, 1)`.
pub fn reduce_turn(a: i64, d: i64) -> (i64, i64) {
    let a = a.rem_euclid(d);
    if a == 0 {
        return (0, 1);
    }
    let g = a.gcd(&d);
    (a / g, d / g)
}

/// Classifies `F` from the eigenvalue multiplicities of `G`, all of which
/// are `2r`-th roots of unity.
pub fn classify_form<S: Scalar>(cert: &SelfDualityCertificate<S>, tol: f64) -> Result<CanonicalForm> {
    classify_monodromy(&cert.monodromy, cert.r, tol)
}

/// [`classify_form`] on a bare monodromy matrix `G` with `G^r` scalar.
pub fn classify_monodromy<S: Scalar>(g: &Matrix<S>, r: usize, tol: f64) -> Result<CanonicalForm> {
    let mults = if S::EXACT {
        exact_multiplicities(g, r)?
    } else {
        approx_multiplicities(&g.to_c64(), r, slack::<S>(tol))
    };
    pair_multiplicities(&mults, g.rows())
}

fn approx_multiplicities(
    g: &Matrix<numeric::Complex64>,
    r: usize,
    tol: f64,
) -> BTreeMap<(i64, i64), usize> {
    let dim = g.rows();
    let den = 2 * r as i64;
    // G - nu I may vanish entirely, so singular values are judged against |G|
    let scale = numeric::singular_values(g).first().copied().unwrap_or(1.0);
    let mut out = BTreeMap::new();
    for a in 0..den {
        let nu = numeric::Complex64::from_polar(1.0, std::f64::consts::TAU * a as f64 / den as f64);
        let shifted = g.sub(&Matrix::identity(dim).scale(&nu));
        let sv = numeric::singular_values(&shifted);
        let mult = sv.iter().filter(|&&x| x <= tol * scale).count();
        if mult > 0 {
            out.insert(reduce_turn(a, den), mult);
        }
    }
    out
}

fn exact_multiplicities<S: Scalar>(g: &Matrix<S>, r: usize) -> Result<BTreeMap<(i64, i64), usize>> {
    let dim = g.rows();
    let gr = g.pow(r);
    let lambda = gr[(0, 0)].clone();
    let minus = S::from_i64(-1);
    if gr != Matrix::identity(dim).scale(&lambda) || !(lambda == S::one() || lambda == minus) {
        return Err(Error::ClassificationFailure(format!(
            "G^{r} is not +-I in exact arithmetic"
        )));
    }
    let den = 2 * r as i64;
    let mut out = BTreeMap::new();
    let mut total = 0;
    for d in (1..=den).filter(|d| den % d == 0) {
        let phi = cyclotomic(d as usize);
        let nullity = dim - numeric::rank(&poly_at(&phi, g), 0.0);
        if nullity == 0 {
            continue;
        }
        total += nullity;
        let prims: Vec<i64> = (0..d).filter(|a| a.gcd(&d) == 1).collect();
        if g.is_real() {
            // a rational G has a rational characteristic polynomial, so all
            // primitive d-th roots share one multiplicity
            if nullity % prims.len() != 0 {
                return Err(Error::ClassificationFailure(format!(
                    "nullity {nullity} of Phi_{d}(G) not divisible by {}",
                    prims.len()
                )));
            }
            for &a in &prims {
                out.insert(reduce_turn(a, d), nullity / prims.len());
            }
        } else {
            let approx = approx_multiplicities(&g.to_c64(), r, VERIFY_TOL);
            let mut sum = 0;
            for &a in &prims {
                if let Some(&mult) = approx.get(&reduce_turn(a, d)) {
                    out.insert(reduce_turn(a, d), mult);
                    sum += mult;
                }
            }
            if sum != nullity {
                return Err(Error::ClassificationFailure(format!(
                    "floating multiplicities of primitive {d}-th roots sum to {sum}, exact {nullity}"
                )));
            }
        }
    }
    if total != dim {
        return Err(Error::ClassificationFailure(format!(
            "cyclotomic nullities sum to {total}, expected {dim}"
        )));
    }
    Ok(out)
}

/// Integer coefficients of the `d`-th cyclotomic polynomial, constant first.
pub fn cyclotomic(d: usize) -> Vec<i64> {
    // x^d - 1 divided by Phi_e for every proper divisor e of d
    let mut num = vec![0i64; d + 1];
    num[0] = -1;
    num[d] = 1;
    for e in (1..d).filter(|e| d % e == 0) {
        num = poly_div_exact(&num, &cyclotomic(e));
    }
    num
}

fn poly_div_exact(num: &[i64], den: &[i64]) -> Vec<i64> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    let lead = den[dd];
    let mut q = vec![0i64; rem.len() - dd];
    for i in (0..q.len()).rev() {
        let c = rem[i + dd] / lead;
        q[i] = c;
        for (j, &dj) in den.iter().enumerate() {
            rem[i + j] -= c * dj;
        }
    }
    debug_assert!(rem.iter().all(|&x| x == 0));
    q
}

fn poly_at<S: Scalar>(coeffs: &[i64], g: &Matrix<S>) -> Matrix<S> {
    let id = Matrix::identity(g.rows());
    let mut acc = Matrix::zeros(g.rows(), g.rows());
    for &c in coeffs.iter().rev() {
        acc = acc.mul(g).add(&id.scale(&S::from_i64(c)));
    }
    acc
}

fn pair_multiplicities(mults: &BTreeMap<(i64, i64), usize>, dim: usize) -> Result<CanonicalForm> {
    let total: usize = mults.values().sum();
    if total != dim {
        return Err(Error::ClassificationFailure(format!(
            "eigenvalue multiplicities sum to {total}, expected {dim}"
        )));
    }
    let identity_block = mults.get(&(0, 1)).copied().unwrap_or(0);
    let mut angles = Vec::new();
    for (&(a, d), &mult) in mults {
        if a == 0 {
            continue;
        }
        if 2 * a == d {
            if mult % 2 != 0 {
                return Err(Error::ClassificationFailure(format!(
                    "eigenvalue -1 has odd multiplicity {mult}"
                )));
            }
            angles.extend(std::iter::repeat((a, d)).take(mult / 2));
            continue;
        }
        let partner = mults.get(&(d - a, d)).copied().unwrap_or(0);
        if partner != mult {
            return Err(Error::ClassificationFailure(format!(
                "eigenvalues at {a}/{d} and {}/{d} of a turn have multiplicities {mult} and {partner}",
                d - a
            )));
        }
        if 2 * a < d {
            angles.extend(std::iter::repeat((a, d)).take(mult));
        }
    }
    let form = CanonicalForm {
        angles,
        identity_block,
    };
    if form.dim() != dim {
        return Err(Error::ClassificationFailure(format!(
            "2S + identity_block = {} but k+1 = {dim}",
            form.dim()
        )));
    }
    Ok(form)
}
