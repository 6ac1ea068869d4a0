//! Generators of m-self-dual polygons.
//!
//! Every constructor fixes `F` in canonical coordinates, sets
//! `G = F^-1 F^T` and chooses the seed vertices `A_1, A_3, ..., A_{2g-1}`
//! (`g = gcd(m, n)`) one at a time. All other vertices are `G`-images of the
//! seeds, so each incidence `F(A_i, A_{i+m+e}) = 0` becomes
//! `x_a^T F G^p x_b = 0` between two seeds. Conditions against earlier seeds
//! are linear in the newest seed; conditions of a seed with itself are
//! quadrics, solved by Gauss-Newton projection in approximate mode.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::formulas::{gcd_mn, normalize_shift, stabilizer_r2, stabilizer_r3};
use crate::numeric::{self, Complex64, Matrix, Scalar, VERIFY_TOL};
use crate::polygon::Polygon;
use crate::projective::ProjPoint;
use crate::selfdual::{
    check_parity, check_self_dual, classify_form, offsets, reduce_turn, rotation_order,
    verify_rotation, BilinearForm, CanonicalForm, SelfDualityCertificate,
};

/// Default retry cap.
pub const DEFAULT_RETRIES: usize = 32;

/// Requested congruence class of `F`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CanonicalChoice {
    /// `F = I` (`m = n`).
    Identity,
    /// `F = Omega_{k+1}` (`m = 0`).
    FullSymplectic,
    /// `Omega_{2f} (+) I` (`r = 2`).
    Symplectic(usize),
    /// `s1` blocks at `+1/3` and `s2` at `-1/3` of a turn (`r = 3`).
    OrderThree { s1: usize, s2: usize },
    /// Arbitrary block angles as fractions `(a, d)` of a turn.
    Angles(Vec<(i64, i64)>),
}

impl CanonicalChoice {
    pub fn angles(&self, k: usize) -> Vec<(i64, i64)> {
        match self {
            Self::Identity => Vec::new(),
            Self::FullSymplectic => vec![(1, 2); (k + 1) / 2],
            Self::Symplectic(f) => vec![(1, 2); *f],
            Self::OrderThree { s1, s2 } => {
                let mut v = vec![(1, 3); *s1];
                v.extend(vec![(2, 3); *s2]);
                v
            }
            Self::Angles(v) => v.clone(),
        }
    }

    /// The class [`classify_form`] reports for this choice.
    pub fn expected(&self, k: usize) -> CanonicalForm {
        let mut angles: Vec<(i64, i64)> = self
            .angles(k)
            .into_iter()
            .map(|(a, d)| {
                let (a, d) = reduce_turn(a, d);
                (a.min(d - a), d)
            })
            .collect();
        angles.sort();
        CanonicalForm {
            identity_block: k + 1 - 2 * angles.len(),
            angles,
        }
    }
}

/// `identity`, `symplectic`, `f=2`, `s=1,0` or `angles=1/6,1/2`.
impl fmt::Display for CanonicalChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Identity => f.write_str("identity"),
            Self::FullSymplectic => f.write_str("symplectic"),
            Self::Symplectic(x) => write!(f, "f={x}"),
            Self::OrderThree { s1, s2 } => write!(f, "s={s1},{s2}"),
            Self::Angles(v) => {
                let parts: Vec<String> = v.iter().map(|(a, d)| format!("{a}/{d}")).collect();
                write!(f, "angles={}", parts.join(","))
            }
        }
    }
}

impl FromStr for CanonicalChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("unrecognised canonical choice {s:?}"));
        let int = |x: &str| x.trim().parse::<i64>().map_err(|_| bad());
        match s.trim() {
            "identity" => return Ok(Self::Identity),
            "symplectic" => return Ok(Self::FullSymplectic),
            _ => {}
        }
        let (key, value) = s.split_once('=').ok_or_else(bad)?;
        match key.trim() {
            "f" => Ok(Self::Symplectic(int(value)?.try_into().map_err(|_| bad())?)),
            "s" => {
                let (a, b) = value.split_once(',').ok_or_else(bad)?;
                Ok(Self::OrderThree {
                    s1: int(a)?.try_into().map_err(|_| bad())?,
                    s2: int(b)?.try_into().map_err(|_| bad())?,
                })
            }
            "angles" => value
                .split(',')
                .map(|frac| {
                    let (a, d) = frac.split_once('/').ok_or_else(bad)?;
                    Ok((int(a)?, int(d)?))
                })
                .collect::<Result<Vec<_>>>()
                .map(Self::Angles),
            _ => Err(bad()),
        }
    }
}

/// Everything a construction needs; the result depends only on these fields.
#[derive(Clone, Debug)]
pub struct ConstructionSpec {
    pub m: i64,
    pub n: usize,
    pub k: usize,
    pub canonical: CanonicalChoice,
    pub seed: u64,
    /// Prefer real vertices; complex ones are used when real sampling fails.
    pub real: bool,
    pub retries: usize,
    pub tol: f64,
}

impl ConstructionSpec {
    pub fn new(m: i64, n: usize, k: usize, canonical: CanonicalChoice, seed: u64) -> Self {
        Self {
            m,
            n,
            k,
            canonical,
            seed,
            real: true,
            retries: DEFAULT_RETRIES,
            tol: numeric::DEFAULT_TOL,
        }
    }

    /// The canonical choice used by default for `(m, n, k)`: identity for
    /// `m = n`, full symplectic for `m = 0`, the rank with the smallest
    /// stabilizer for `r = 2` and `r = 3`, and the regular class otherwise.
    pub fn default_for(m: i64, n: usize, k: usize, seed: u64) -> Result<Self> {
        let mm = normalize_shift(m, n);
        let canonical = if mm == 0 {
            CanonicalChoice::FullSymplectic
        } else if mm == n as i64 {
            CanonicalChoice::Identity
        } else {
            match rotation_order(mm, n) {
                2 if k >= 2 => CanonicalChoice::Symplectic(
                    (1..=k / 2).min_by_key(|&f| stabilizer_r2(f, k)).unwrap_or(1),
                ),
                3 if k >= 2 => CanonicalChoice::OrderThree {
                    s1: (1..=k / 2).min_by_key(|&s| stabilizer_r3(s, k)).unwrap_or(1),
                    s2: 0,
                },
                _ => CanonicalChoice::Angles(regular_angles(mm, n, k)),
            }
        };
        Ok(Self::new(m, n, k, canonical, seed))
    }
}

/// Angles of the class realised by [`regular_polygon`] with frequencies
/// `1, 2, ...`: `G` is `R^m`, negated when `k+1` is even. Fixed planes
/// are left to the identity block.
pub fn regular_angles(m: i64, n: usize, k: usize) -> Vec<(i64, i64)> {
    let n = n as i64;
    let half = if (k + 1) % 2 == 0 { n } else { 0 };
    (1..=(k as i64 + 1) / 2)
        .map(|j| reduce_turn(2 * j * m + half, 2 * n))
        .filter(|&(a, _)| a != 0)
        .collect()
}

/// Sampling-space dimensions recorded for one seed vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SeedDim {
    /// Dimension of the linear subspace left by conditions on earlier seeds.
    pub subspace: usize,
    /// Independent quadrics the seed must satisfy on that subspace.
    pub quadrics: usize,
}

impl SeedDim {
    /// Projective dimension of the seed's sampling variety.
    pub fn freedom(&self) -> i64 {
        self.subspace as i64 - 1 - self.quadrics as i64
    }
}

#[derive(Clone, Debug)]
pub struct ConstructionReport<S> {
    pub polygon: Polygon<S>,
    pub certificate: SelfDualityCertificate<S>,
    pub canonical: CanonicalForm,
    /// Failed attempts before success.
    pub retries: usize,
    pub seed_dims: Vec<SeedDim>,
}

/// Slot bookkeeping: slot `t` holds `G^power(t) x_seed(t)`.
struct Layout {
    n: usize,
    g: usize,
    r: usize,
    m: i64,
    inv: usize,
}

impl Layout {
    fn new(m: i64, n: usize) -> Self {
        let mm = normalize_shift(m, n);
        let g = gcd_mn(mm, n);
        let r = n / g;
        let step = (mm as usize % n) / g;
        let inv = (0..r).find(|x| (x * step) % r == 1 % r).unwrap_or(0);
        Self { n, g, r, m: mm, inv }
    }

    fn locate(&self, t: usize) -> (usize, usize) {
        let s = t % self.g;
        (s, ((t - s) / self.g * self.inv) % self.r)
    }

    /// `(a, b, p)`: every incidence as `x_a^T F G^p x_b = 0`.
    fn constraints(&self, k: usize) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for t in 0..self.n {
            for e in offsets(k as i64) {
                let u = (t as i64 + (self.m + e) / 2).rem_euclid(self.n as i64) as usize;
                let (a, la) = self.locate(t);
                let (b, lb) = self.locate(u);
                let c = (a, b, (lb + self.r - la) % self.r);
                if !out.contains(&c) {
                    out.push(c);
                }
            }
        }
        out
    }
}

fn is_negligible<S: Scalar>(m: &Matrix<S>, scale: f64) -> bool {
    if S::EXACT {
        m.max_modulus() == 0.0
    } else {
        m.max_modulus() <= 1e-12 * scale
    }
}

/// Builds a self-dual polygon for `spec`, verifying the certificate,
/// rotation and classification of every attempt.
pub fn construct<S: Scalar>(spec: &ConstructionSpec) -> Result<ConstructionReport<S>> {
    let (m, n, k) = (spec.m, spec.n, spec.k);
    check_parity(m, k)?;
    if n < k + 3 {
        return Err(Error::Precondition(format!("n = {n} < k+3 = {}", k + 3)));
    }
    let layout = Layout::new(m, n);
    let angles = spec.canonical.angles(k);
    if let CanonicalChoice::Symplectic(f) = spec.canonical {
        if f == 0 || 2 * f >= k + 1 {
            return Err(Error::Precondition(format!(
                "symplectic rank f = {f} needs 1 <= f and 2f < k+1 = {}",
                k + 1
            )));
        }
    }
    let form = match BilinearForm::<S>::rational(&angles, k + 1) {
        Ok(f) => f,
        Err(Error::ExactUnsupported(_)) if !S::EXACT => BilinearForm::canonical(&angles, k + 1)?,
        Err(e) => return Err(e),
    };
    let tol = spec.tol;
    let g = form.monodromy(tol)?;
    if !numeric::power_is_identity(&g, layout.r, VERIFY_TOL.max(tol))? {
        return Err(Error::Precondition(format!(
            "angles {angles:?} do not give G^{} = +-I",
            layout.r
        )));
    }
    let fg: Vec<Matrix<S>> = (0..layout.r)
        .map(|p| form.matrix().mul(&g.pow(p)))
        .collect();
    let gp: Vec<Matrix<S>> = (0..layout.r).map(|p| g.pow(p)).collect();
    let constraints = layout.constraints(k);
    let expected = spec.canonical.expected(k);
    let real = spec.real && form.matrix().is_real();

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut last_residual = f64::NAN;
    let mut last_reason = String::new();
    for attempt in 0..spec.retries.max(1) {
        let (seeds, seed_dims) = match sample_seeds(&layout, &constraints, &fg, real, &mut rng)? {
            Some(v) => v,
            None => {
                last_reason = "quadric projection did not converge".into();
                continue;
            }
        };
        let coords: Vec<Vec<S>> = (0..n)
            .map(|t| {
                let (s, l) = layout.locate(t);
                let mut v = gp[l].mul_vec(&seeds[s]);
                S::normalize(&mut v);
                v
            })
            .collect();
        if coords.iter().any(|v| v.iter().all(Scalar::is_zero)) {
            last_reason = "zero vertex".into();
            continue;
        }
        let polygon = Polygon::new(coords.into_iter().map(ProjPoint::new).collect::<Result<_>>()?)?;
        if let Err(e) = polygon.validate(tol) {
            last_reason = e.to_string();
            continue;
        }
        let outcome = check_self_dual(&polygon, m, tol)?;
        last_residual = outcome.residual();
        let Some(certificate) = outcome.certificate() else {
            last_reason = "self-duality check failed".into();
            continue;
        };
        if !verify_rotation(&certificate, &polygon, tol) {
            last_reason = "monodromy does not rotate the vertices".into();
            continue;
        }
        match classify_form(&certificate, tol) {
            Ok(c) if c == expected => {
                return Ok(ConstructionReport {
                    polygon,
                    certificate,
                    canonical: c,
                    retries: attempt,
                    seed_dims,
                })
            }
            Ok(c) => last_reason = format!("classified as {c:?}, wanted {expected:?}"),
            Err(e) => last_reason = e.to_string(),
        }
    }
    Err(Error::ConstructionFailed {
        retries: spec.retries.max(1),
        residual: last_residual,
        reason: last_reason,
    })
}

type Seeds<S> = (Vec<Vec<S>>, Vec<SeedDim>);

fn sample_seeds<S: Scalar>(
    layout: &Layout,
    constraints: &[(usize, usize, usize)],
    fg: &[Matrix<S>],
    real: bool,
    rng: &mut ChaCha8Rng,
) -> Result<Option<Seeds<S>>> {
    let dim = fg[0].rows();
    let scale = fg[0].max_modulus();
    let mut seeds: Vec<Vec<S>> = Vec::with_capacity(layout.g);
    let mut dims = Vec::with_capacity(layout.g);
    for s in 0..layout.g {
        let mut rows = Vec::new();
        let mut quadrics = Vec::new();
        for &(a, b, p) in constraints {
            if a == s && b < s {
                rows.push(fg[p].mul_vec(&seeds[b]));
            } else if b == s && a < s {
                rows.push(fg[p].transpose().mul_vec(&seeds[a]));
            } else if a == s && b == s {
                let q = fg[p].add(&fg[p].transpose());
                if !is_negligible(&q, scale) {
                    quadrics.push(q);
                }
            }
        }
        let basis = if rows.is_empty() {
            Matrix::<S>::identity(dim).row_vectors()
        } else {
            numeric::nullspace(&Matrix::from_rows(&rows)?, numeric::DEFAULT_TOL)
        };
        if basis.is_empty() {
            return Err(Error::InfeasibleConstraints(format!(
                "no room for seed {s} after {} linear conditions",
                rows.len()
            )));
        }
        let v = Matrix::from_columns(&basis)?;
        let restricted: Vec<Matrix<S>> = quadrics
            .iter()
            .map(|q| v.transpose().mul(q).mul(&v))
            .collect();
        let independent = independent_quadrics(&restricted);
        let d = basis.len();
        dims.push(SeedDim {
            subspace: d,
            quadrics: independent.len(),
        });
        if independent.len() >= d {
            return Err(Error::InfeasibleConstraints(format!(
                "seed {s}: {} quadrics on a {d}-dimensional subspace",
                independent.len()
            )));
        }
        let coeffs: Vec<S> = if independent.is_empty() {
            (0..d).map(|_| numeric::sample::<S, _>(rng, real)).collect()
        } else if S::EXACT {
            return Err(Error::ExactUnsupported(
                "seed vertices on quadrics need approximate arithmetic".into(),
            ));
        } else {
            let qs: Vec<Matrix<Complex64>> = independent.iter().map(|&j| restricted[j].to_c64()).collect();
            match project_to_quadrics(&qs, real, rng) {
                Some(c) => c.into_iter().map(S::from_c64).collect(),
                None => return Ok(None),
            }
        };
        let x = v.mul_vec(&coeffs);
        if x.iter().all(Scalar::is_zero) {
            return Ok(None);
        }
        seeds.push(x);
    }
    Ok(Some((seeds, dims)))
}

/// Greedy maximal subset of linearly independent symmetric matrices.
fn independent_quadrics<S: Scalar>(qs: &[Matrix<S>]) -> Vec<usize> {
    let mut chosen: Vec<usize> = Vec::new();
    let mut rows: Vec<Vec<S>> = Vec::new();
    for (j, q) in qs.iter().enumerate() {
        rows.push(q.data().to_vec());
        let rank = numeric::rank(&Matrix::from_rows(&rows).expect("equal sizes"), 1e-10);
        if rank > chosen.len() {
            chosen.push(j);
        } else {
            rows.pop();
        }
    }
    chosen
}

/// Gauss-Newton projection of a random unit vector onto `c^T Q_j c = 0`,
/// using minimum-norm steps. Real starts are tried first when `real`.
fn project_to_quadrics(
    qs: &[Matrix<Complex64>],
    real: bool,
    rng: &mut ChaCha8Rng,
) -> Option<Vec<Complex64>> {
    let d = qs[0].rows();
    let starts = if real { [true, true, true, false, false, false] } else { [false; 6] };
    for real_start in starts {
        let mut c: Vec<Complex64> = (0..d)
            .map(|_| numeric::sample::<Complex64, _>(rng, real_start))
            .collect();
        for _ in 0..200 {
            let nc = numeric::norm(&c);
            c.iter_mut().for_each(|z| *z /= nc);
            let grads: Vec<Vec<Complex64>> = qs.iter().map(|q| q.mul_vec(&c)).collect();
            let vals: Vec<Complex64> = grads.iter().map(|gq| numeric::dot(&c, gq)).collect();
            if vals.iter().all(|v| v.norm() <= 1e-15) {
                return Some(c);
            }
            let jac = Matrix::from_rows(
                &grads
                    .iter()
                    .map(|gq| gq.iter().map(|z| z * 2.0).collect())
                    .collect::<Vec<_>>(),
            )
            .ok()?;
            let jh = jac.transpose().map(|z| z.conj());
            let Ok(inv) = jac.mul(&jh).inverse(1e-14) else {
                break;
            };
            let step = jh.mul_vec(&inv.mul_vec(&vals));
            for (x, s) in c.iter_mut().zip(step) {
                *x -= s;
            }
        }
    }
    None
}

/// `m = n` with `F = I`: polar duality. Requires `n = k+1 (mod 2)`.
pub fn construct_m_eq_n<S: Scalar>(n: usize, k: usize, seed: u64) -> Result<ConstructionReport<S>> {
    if (n + k + 1) % 2 != 0 {
        return Err(Error::Precondition(format!(
            "m = n needs n = k+1 (mod 2), got n = {n}, k = {k}"
        )));
    }
    construct(&ConstructionSpec::new(n as i64, n, k, CanonicalChoice::Identity, seed))
}

/// `m = 0` with `F = Omega_{k+1}`. Requires `k` odd.
pub fn construct_m_eq_0<S: Scalar>(n: usize, k: usize, seed: u64) -> Result<ConstructionReport<S>> {
    if k % 2 == 0 {
        return Err(Error::Precondition(format!("m = 0 needs k odd, got k = {k}")));
    }
    construct(&ConstructionSpec::new(0, n, k, CanonicalChoice::FullSymplectic, seed))
}

/// Orbit construction for `m` not in `{0, n}`.
pub fn construct_orbit<S: Scalar>(spec: &ConstructionSpec) -> Result<ConstructionReport<S>> {
    let mm = normalize_shift(spec.m, spec.n);
    if mm == 0 || mm == spec.n as i64 {
        return Err(Error::Precondition(
            "m = 0 and m = n have dedicated constructors".into(),
        ));
    }
    construct(spec)
}

/// Orbit of one vertex under a block rotation by `2 pi a_j / n` per block
/// (plus a fixed axis when `k+1` is odd). A phase of `pi/(2n)` keeps every
/// sine coordinate nonzero.
pub fn regular_polygon(n: usize, k: usize, frequencies: &[i64]) -> Result<Polygon<Complex64>> {
    if frequencies.len() != k.div_ceil(2) {
        return Err(Error::DegenerateFrequencies(format!(
            "need {} frequencies for k = {k}, got {}",
            k.div_ceil(2),
            frequencies.len()
        )));
    }
    if n < k + 3 {
        return Err(Error::Precondition(format!("n = {n} < k+3 = {}", k + 3)));
    }
    let phase = std::f64::consts::PI / (2.0 * n as f64);
    let coords = (0..n)
        .map(|l| {
            let mut v = Vec::with_capacity(k + 1);
            if (k + 1) % 2 == 1 {
                v.push(Complex64::new(1.0, 0.0));
            }
            for &a in frequencies {
                let th = std::f64::consts::TAU * (a * l as i64) as f64 / n as f64 + phase;
                v.push(Complex64::new(th.cos(), 0.0));
                v.push(Complex64::new(th.sin(), 0.0));
            }
            v
        })
        .collect();
    let p = Polygon::from_coords(coords)?;
    p.validate(numeric::DEFAULT_TOL)
        .map_err(|e| Error::DegenerateFrequencies(e.to_string()))?;
    Ok(p)
}

/// Named constructions exercised by the round-trip suites.
pub fn presets() -> Vec<(&'static str, i64, usize, usize, CanonicalChoice)> {
    use CanonicalChoice::*;
    vec![
        ("pentagon-symmetric", 5, 5, 2, Identity),
        ("twelve-symmetric", 12, 12, 3, Identity),
        ("twelve-order-two", 6, 12, 3, Symplectic(1)),
        ("twelve-order-three", 4, 12, 3, OrderThree { s1: 1, s2: 0 }),
        ("twelve-order-three-conj", 4, 12, 3, OrderThree { s1: 0, s2: 1 }),
        ("twelve-order-three-d1", 8, 12, 3, OrderThree { s1: 1, s2: 0 }),
        ("twelve-shift-zero", 0, 12, 3, FullSymplectic),
        ("hexagon-shift-zero", 0, 6, 3, FullSymplectic),
        ("nine-coprime", 2, 9, 3, Angles(vec![(5, 18), (7, 18)])),
        ("ten-order-two-k4", 5, 10, 4, Symplectic(2)),
    ]
}

/// Independent per-trial seed derived from a base seed.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(base ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.gen()
}
