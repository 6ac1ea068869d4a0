//! Points, hyperplanes and projective transformations of P^k.

use crate::error::{Error, Result};
use crate::numeric::{self, dot, projective_distance, Matrix, Scalar};

/// A point of P^k given by homogeneous coordinates (never the zero vector).
#[derive(Clone, Debug)]
pub struct ProjPoint<S> {
    coords: Vec<S>,
}

/// A hyperplane of P^k, i.e. a point of the dual space.
#[derive(Clone, Debug)]
pub struct Hyperplane<S> {
    covector: Vec<S>,
}

/// A projective transformation represented by a square matrix, up to scale.
#[derive(Clone, Debug)]
pub struct ProjMap<S> {
    matrix: Matrix<S>,
}

fn nonzero<S: Scalar>(v: &[S]) -> bool {
    v.iter().any(|x| !x.is_zero())
}

impl<S: Scalar> ProjPoint<S> {
    pub fn new(coords: Vec<S>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::DimensionMismatch(
                "a projective point needs at least two coordinates".into(),
            ));
        }
        if !nonzero(&coords) {
            return Err(Error::DegenerateConfiguration("zero vector is not a point".into()));
        }
        Ok(Self { coords })
    }

    pub fn from_i64(coords: &[i64]) -> Result<Self> {
        Self::new(coords.iter().map(|&x| S::from_i64(x)).collect())
    }

    pub fn coords(&self) -> &[S] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<S> {
        self.coords
    }

    pub fn ambient_dim(&self) -> usize {
        self.coords.len() - 1
    }

    /// Canonical representative (see [`Scalar::normalize`]).
    pub fn normalized(&self) -> Self {
        let mut c = self.coords.clone();
        S::normalize(&mut c);
        Self { coords: c }
    }

    /// Projective equality: the 2 x (k+1) stack has rank 1.
    pub fn same_as(&self, other: &Self, tol: f64) -> bool {
        self.coords.len() == other.coords.len()
            && numeric::rank(
                &Matrix::from_rows(&[self.coords.clone(), other.coords.clone()])
                    .expect("equal lengths"),
                tol,
            ) == 1
    }

    pub fn distance(&self, other: &Self) -> f64 {
        projective_distance(&self.coords, &other.coords)
    }

    /// Incidence value `<h, p>` scaled by the norms of both vectors.
    pub fn incidence(&self, h: &Hyperplane<S>) -> f64 {
        let v = dot(&h.covector, &self.coords).modulus();
        v / (numeric::norm(&h.covector) * numeric::norm(&self.coords))
    }
}

impl<S: Scalar> Hyperplane<S> {
    pub fn new(covector: Vec<S>) -> Result<Self> {
        if covector.len() < 2 {
            return Err(Error::DimensionMismatch(
                "a hyperplane needs at least two coordinates".into(),
            ));
        }
        if !nonzero(&covector) {
            return Err(Error::DegenerateConfiguration(
                "zero covector is not a hyperplane".into(),
            ));
        }
        Ok(Self { covector })
    }

    pub fn from_i64(covector: &[i64]) -> Result<Self> {
        Self::new(covector.iter().map(|&x| S::from_i64(x)).collect())
    }

    pub fn covector(&self) -> &[S] {
        &self.covector
    }

    pub fn ambient_dim(&self) -> usize {
        self.covector.len() - 1
    }

    pub fn same_as(&self, other: &Self, tol: f64) -> bool {
        self.as_point().same_as(&other.as_point(), tol)
    }

    /// The hyperplane viewed as a point of the dual space.
    pub fn as_point(&self) -> ProjPoint<S> {
        ProjPoint {
            coords: self.covector.clone(),
        }
    }

    pub fn from_point(p: ProjPoint<S>) -> Self {
        Self { covector: p.coords }
    }
}

impl<S: Scalar> ProjMap<S> {
    /// Wraps a square matrix, rejecting matrices singular at `tol`.
    pub fn new(matrix: Matrix<S>, tol: f64) -> Result<Self> {
        if !matrix.is_square() || matrix.rows() < 2 {
            return Err(Error::DimensionMismatch("projective map needs a square matrix".into()));
        }
        matrix.inverse(tol)?;
        Ok(Self { matrix })
    }

    pub fn identity(ambient_dim: usize) -> Self {
        Self {
            matrix: Matrix::identity(ambient_dim + 1),
        }
    }

    pub fn matrix(&self) -> &Matrix<S> {
        &self.matrix
    }

    pub fn ambient_dim(&self) -> usize {
        self.matrix.rows() - 1
    }

    pub fn apply(&self, p: &ProjPoint<S>) -> Result<ProjPoint<S>> {
        ProjPoint::new(self.matrix.mul_vec(&p.coords))
    }

    /// Action on hyperplanes: covectors transform by the inverse transpose.
    pub fn apply_hyperplane(&self, h: &Hyperplane<S>, tol: f64) -> Result<Hyperplane<S>> {
        let inv_t = self.matrix.inverse(tol)?.transpose();
        Hyperplane::new(inv_t.mul_vec(&h.covector))
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self {
            matrix: self.matrix.mul(&other.matrix),
        }
    }

    /// Equality up to a nonzero scale.
    pub fn same_as(&self, other: &Self, tol: f64) -> bool {
        self.matrix.rows() == other.matrix.rows()
            && numeric::rank(
                &Matrix::from_rows(&[self.matrix.data().to_vec(), other.matrix.data().to_vec()])
                    .expect("equal sizes"),
                tol,
            ) == 1
    }
}

/// Hyperplane through `k` independent points of P^k.
pub fn span_hyperplane<S: Scalar>(points: &[ProjPoint<S>], tol: f64) -> Result<Hyperplane<S>> {
    let k = points
        .first()
        .map(ProjPoint::ambient_dim)
        .ok_or_else(|| Error::DimensionMismatch("no points".into()))?;
    if points.len() != k || points.iter().any(|p| p.ambient_dim() != k) {
        return Err(Error::DimensionMismatch(format!(
            "span_hyperplane needs exactly {k} points of P^{k}, got {}",
            points.len()
        )));
    }
    let stack = Matrix::from_rows(&points.iter().map(|p| p.coords.clone()).collect::<Vec<_>>())?;
    let ker = numeric::nullspace(&stack, tol);
    if ker.len() != 1 {
        return Err(Error::DegenerateSpan {
            rank: k + 1 - ker.len(),
            needed: k,
        });
    }
    let mut c = ker.into_iter().next().expect("len checked");
    S::normalize(&mut c);
    Hyperplane::new(c)
}

/// Common point of `k` independent hyperplanes of P^k.
pub fn meet_point<S: Scalar>(planes: &[Hyperplane<S>], tol: f64) -> Result<ProjPoint<S>> {
    let k = planes
        .first()
        .map(Hyperplane::ambient_dim)
        .ok_or_else(|| Error::DimensionMismatch("no hyperplanes".into()))?;
    if planes.len() != k || planes.iter().any(|h| h.ambient_dim() != k) {
        return Err(Error::DimensionMismatch(format!(
            "meet_point needs exactly {k} hyperplanes of P^{k}, got {}",
            planes.len()
        )));
    }
    let stack = Matrix::from_rows(&planes.iter().map(|h| h.covector.clone()).collect::<Vec<_>>())?;
    let ker = numeric::nullspace(&stack, tol);
    if ker.len() != 1 {
        return Err(Error::DegenerateMeet {
            rank: k + 1 - ker.len(),
            needed: k,
        });
    }
    let mut c = ker.into_iter().next().expect("len checked");
    S::normalize(&mut c);
    ProjPoint::new(c)
}

/// Result of fitting a projective map to correspondences.
#[derive(Clone, Debug)]
pub struct MapFit<S> {
    /// Best-fit matrix (least singular vector). Exact fits carry a matrix
    /// only when an exact solution exists.
    pub map: Option<Matrix<S>>,
    /// Least singular value of the stacked system (0 for exact solutions).
    pub residual: f64,
    /// Dimension of the solution space of the homogeneous system at `tol`.
    pub solution_dim: usize,
}

/// Stacked homogeneous system in the entries of `M` (row-major).
fn correspondence_system<S: Scalar>(
    sources: &[Vec<S>],
    targets: &[Vec<S>],
    tol: f64,
) -> Result<Matrix<S>> {
    let n = sources.len();
    if targets.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{n} sources but {} targets",
            targets.len()
        )));
    }
    let dim = sources
        .first()
        .map(Vec::len)
        .ok_or(Error::InsufficientPoints { needed: 1, got: 0 })?;
    let k = dim - 1;
    if n < k + 2 {
        return Err(Error::InsufficientPoints {
            needed: k + 2,
            got: n,
        });
    }
    if sources.iter().chain(targets).any(|v| v.len() != dim) {
        return Err(Error::DimensionMismatch("mixed vector lengths".into()));
    }
    let src_stack = Matrix::from_rows(sources)?;
    if numeric::rank(&src_stack, tol) < dim {
        return Err(Error::DegenerateConfiguration(
            "sources do not span the ambient space".into(),
        ));
    }
    let unit = |v: &Vec<S>| -> Vec<S> {
        if S::EXACT {
            return v.clone();
        }
        let nv = numeric::norm(v);
        v.iter().map(|x| x.clone() / S::from_c64((nv).into())).collect()
    };
    let mut rows = Vec::with_capacity(n * k);
    for (s, t) in sources.iter().zip(targets) {
        let (s, t) = (unit(s), unit(t));
        let p = (0..dim)
            .max_by(|&a, &b| t[a].modulus().total_cmp(&t[b].modulus()))
            .expect("dim > 0");
        for a in (0..dim).filter(|&a| a != p) {
            let mut row = vec![S::zero(); dim * dim];
            for b in 0..dim {
                row[a * dim + b] = s[b].clone() * t[p].clone();
                row[p * dim + b] = -(s[b].clone() * t[a].clone());
            }
            rows.push(row);
        }
    }
    Matrix::from_rows(&rows)
}

/// Fits `M` with `M * source_i` proportional to `target_i` for every `i`.
///
/// Targets may be points or covectors; only the vectors matter. The unknown
/// per-pair scale is eliminated with the 2x2 minors `(M s)_a t_p - (M s)_p t_a`
/// taken against the largest-modulus target coordinate `p`, which cut out the
/// same solution set as the full family of minors.
pub fn fit_map<S: Scalar>(sources: &[Vec<S>], targets: &[Vec<S>], tol: f64) -> Result<MapFit<S>> {
    let system = correspondence_system(sources, targets, tol)?;
    let dim = sources[0].len();
    let to_matrix = |v: Vec<S>| Matrix::from_fn(dim, dim, |r, c| v[r * dim + c].clone());
    if S::EXACT {
        let ker = numeric::nullspace(&system, 0.0);
        let solution_dim = ker.len();
        return Ok(match ker.into_iter().next() {
            Some(v) => MapFit {
                map: Some(to_matrix(v)),
                residual: 0.0,
                solution_dim,
            },
            None => {
                let sv = numeric::singular_values(&system);
                MapFit {
                    map: None,
                    residual: sv.last().copied().unwrap_or(0.0),
                    solution_dim: 0,
                }
            }
        });
    }
    let solution_dim = dim * dim - numeric::rank(&system, tol);
    let (v, residual) = numeric::least_singular_vector(&system)?;
    Ok(MapFit {
        map: Some(to_matrix(v)),
        residual,
        solution_dim,
    })
}

/// Basis of all matrices solving the correspondence system of [`fit_map`].
pub fn fit_map_solutions<S: Scalar>(
    sources: &[Vec<S>],
    targets: &[Vec<S>],
    tol: f64,
) -> Result<Vec<Matrix<S>>> {
    let system = correspondence_system(sources, targets, tol)?;
    let dim = sources[0].len();
    Ok(numeric::nullspace(&system, tol)
        .into_iter()
        .map(|v| Matrix::from_fn(dim, dim, |r, c| v[r * dim + c].clone()))
        .collect())
}

/// Verdict of a projective-equivalence test.
#[derive(Clone, Debug)]
pub struct Equivalence<S> {
    pub equivalent: bool,
    /// Largest projective distance between `witness(P_i)` and `Q_i`.
    pub residual: f64,
    pub witness: Option<ProjMap<S>>,
}

/// Unique map sending the first `k+2` points of `sources` to those of
/// `targets`, if both frames are in general position.
pub fn frame_map<S: Scalar>(
    sources: &[ProjPoint<S>],
    targets: &[ProjPoint<S>],
    tol: f64,
) -> Result<ProjMap<S>> {
    let k = sources
        .first()
        .map(ProjPoint::ambient_dim)
        .ok_or(Error::InsufficientPoints { needed: 1, got: 0 })?;
    if sources.len() < k + 2 || targets.len() < k + 2 {
        return Err(Error::InsufficientPoints {
            needed: k + 2,
            got: sources.len().min(targets.len()),
        });
    }
    let scaled_basis = |pts: &[ProjPoint<S>]| -> Result<Matrix<S>> {
        let basis = Matrix::from_columns(
            &pts[..=k].iter().map(|p| p.coords.clone()).collect::<Vec<_>>(),
        )?;
        let c = basis
            .solve(&pts[k + 1].coords, tol)
            .map_err(|_| Error::DegenerateConfiguration("frame basis is singular".into()))?;
        let cmax = c.iter().map(Scalar::modulus).fold(0.0, f64::max);
        if c.iter().any(|x| x.is_zero() || (!S::EXACT && x.modulus() <= tol * cmax)) {
            return Err(Error::DegenerateConfiguration(
                "frame is not in general position".into(),
            ));
        }
        Ok(basis.mul(&Matrix::diagonal(&c)))
    };
    let src = scaled_basis(sources)?;
    let dst = scaled_basis(targets)?;
    ProjMap::new(dst.mul(&src.inverse(tol)?), tol)
}

/// Coordinates of `points[k+2..]` after the projective map sending
/// `points[..k+2]` to the standard frame. Two labeled lists with general
/// position frames are equivalent iff these agree point by point, which
/// avoids forming the map.
pub fn frame_coordinates<S: Scalar>(points: &[ProjPoint<S>], tol: f64) -> Result<Vec<Vec<S>>> {
    let dim = points.first().map(|p| p.coords.len()).unwrap_or(0);
    if dim == 0 || points.len() < dim + 1 {
        return Err(Error::InsufficientPoints {
            needed: dim + 1,
            got: points.len(),
        });
    }
    let v = Matrix::from_columns(&points.iter().map(|p| p.coords.clone()).collect::<Vec<_>>())?;
    let (r, pivots) = v.rref(tol);
    if pivots.len() < dim || pivots[dim - 1] != dim - 1 {
        return Err(Error::DegenerateConfiguration("frame basis is singular".into()));
    }
    let unit = r.column(dim);
    if unit.iter().any(Scalar::is_zero) || (!S::EXACT && unit.iter().any(|x| x.modulus() <= tol)) {
        return Err(Error::DegenerateConfiguration("frame is not in general position".into()));
    }
    Ok((dim + 1..points.len())
        .map(|j| {
            let mut y: Vec<S> = r.column(j).into_iter().zip(&unit).map(|(x, c)| x / c.clone()).collect();
            S::normalize(&mut y);
            y
        })
        .collect())
}

/// Largest projective distance between `map(P_i)` and `Q_i`.
pub fn transfer_residual<S: Scalar>(
    map: &ProjMap<S>,
    sources: &[ProjPoint<S>],
    targets: &[ProjPoint<S>],
) -> f64 {
    sources
        .iter()
        .zip(targets)
        .map(|(p, q)| match map.apply(p) {
            Ok(img) => img.distance(q),
            Err(_) => 1.0,
        })
        .fold(0.0, f64::max)
}

/// Tests whether some projective transformation sends `P_i` to `Q_i` for
/// all `i`. Witnesses come from frames of `k+2` cyclically consecutive
/// points in general position on both sides; a floating frame can pass that
/// test and still be ill-conditioned, so up to [`FRAME_ATTEMPTS`] frames are
/// judged and the best verdict kept. [`fit_map`] is the last resort.
pub fn projectively_equivalent<S: Scalar>(
    p: &[ProjPoint<S>],
    q: &[ProjPoint<S>],
    tol: f64,
) -> Result<Equivalence<S>> {
    check_equal_lengths(p, q)?;
    let attempts = if S::EXACT { 1 } else { FRAME_ATTEMPTS };
    let mut best: Option<Equivalence<S>> = None;
    let mut tried = 0;
    for start in 0..p.len() {
        let (mut ps, mut qs) = (p.to_vec(), q.to_vec());
        ps.rotate_left(start);
        qs.rotate_left(start);
        match frame_map(&ps, &qs, tol) {
            Ok(m) => {
                let e = judge(Some(m), p, q, tol);
                if e.equivalent {
                    return Ok(e);
                }
                if best.as_ref().map_or(true, |b| e.residual < b.residual) {
                    best = Some(e);
                }
                tried += 1;
                if tried == attempts {
                    break;
                }
            }
            Err(Error::DegenerateConfiguration(_) | Error::SingularMatrix) => continue,
            Err(e) => return Err(e),
        }
    }
    match best {
        Some(e) => Ok(e),
        None => Ok(judge(fit_witness(p, q, tol)?, p, q, tol)),
    }
}

/// Frames judged by [`projectively_equivalent`] in floating arithmetic.
pub const FRAME_ATTEMPTS: usize = 3;

/// Same verdict as [`projectively_equivalent`], always through [`fit_map`].
pub fn projectively_equivalent_by_fit<S: Scalar>(
    p: &[ProjPoint<S>],
    q: &[ProjPoint<S>],
    tol: f64,
) -> Result<Equivalence<S>> {
    check_equal_lengths(p, q)?;
    let witness = fit_witness(p, q, tol)?;
    Ok(judge(witness, p, q, tol))
}

fn check_equal_lengths<S: Scalar>(p: &[ProjPoint<S>], q: &[ProjPoint<S>]) -> Result<()> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch(format!(
            "point lists of lengths {} and {}",
            p.len(),
            q.len()
        )));
    }
    Ok(())
}

fn fit_witness<S: Scalar>(
    p: &[ProjPoint<S>],
    q: &[ProjPoint<S>],
    tol: f64,
) -> Result<Option<ProjMap<S>>> {
    let fit = fit_map(
        &p.iter().map(|x| x.coords.clone()).collect::<Vec<_>>(),
        &q.iter().map(|x| x.coords.clone()).collect::<Vec<_>>(),
        tol,
    )?;
    Ok(fit.map.and_then(|m| ProjMap::new(m, tol).ok()))
}

fn judge<S: Scalar>(
    witness: Option<ProjMap<S>>,
    p: &[ProjPoint<S>],
    q: &[ProjPoint<S>],
    tol: f64,
) -> Equivalence<S> {
    match witness {
        None => Equivalence {
            equivalent: false,
            residual: 1.0,
            witness: None,
        },
        Some(m) => {
            let residual = transfer_residual(&m, p, q);
            let equivalent = if S::EXACT { residual == 0.0 } else { residual <= tol };
            Equivalence {
                equivalent,
                residual,
                witness: Some(m),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{Complex64, GaussRat, DEFAULT_TOL};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type C = Complex64;

    fn pt<S: Scalar>(c: &[i64]) -> ProjPoint<S> {
        ProjPoint::from_i64(c).unwrap()
    }

    fn hp<S: Scalar>(c: &[i64]) -> Hyperplane<S> {
        Hyperplane::from_i64(c).unwrap()
    }

    fn random_points(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<ProjPoint<C>> {
        (0..n)
            .map(|_| {
                ProjPoint::new(
                    (0..=k)
                        .map(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                        .collect(),
                )
                .unwrap()
            })
            .collect()
    }

    fn random_map(rng: &mut ChaCha8Rng, k: usize) -> ProjMap<C> {
        let m = Matrix::from_fn(k + 1, k + 1, |_, _| {
            C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        ProjMap::new(m, DEFAULT_TOL).unwrap()
    }

    fn span_examples<S: Scalar>() {
        let h = span_hyperplane(&[pt::<S>(&[1, 0, 0]), pt(&[0, 1, 0])], DEFAULT_TOL).unwrap();
        assert!(h.same_as(&hp(&[0, 0, 1]), DEFAULT_TOL));
        let h = span_hyperplane(
            &[pt::<S>(&[1, 0, 0, 0]), pt(&[0, 1, 0, 0]), pt(&[0, 0, 1, 0])],
            DEFAULT_TOL,
        )
        .unwrap();
        assert!(h.same_as(&hp(&[0, 0, 0, 1]), DEFAULT_TOL));
        assert!(matches!(
            span_hyperplane(&[pt::<S>(&[1, 2, 3]), pt(&[1, 2, 3])], DEFAULT_TOL),
            Err(Error::DegenerateSpan { .. })
        ));
    }

    fn meet_examples<S: Scalar>() {
        let p = meet_point(&[hp::<S>(&[1, 0, 0]), hp(&[0, 1, 0])], DEFAULT_TOL).unwrap();
        assert!(p.same_as(&pt(&[0, 0, 1]), DEFAULT_TOL));
        for j in 0..4 {
            let planes: Vec<Hyperplane<S>> = (0..4)
                .filter(|&i| i != j)
                .map(|i| {
                    let mut c = [0; 4];
                    c[i] = 1;
                    hp(&c)
                })
                .collect();
            let mut e = [0; 4];
            e[j] = 1;
            assert!(meet_point(&planes, DEFAULT_TOL).unwrap().same_as(&pt(&e), DEFAULT_TOL));
        }
        assert!(matches!(
            meet_point(&[hp::<S>(&[1, 1, 0]), hp(&[2, 2, 0])], DEFAULT_TOL),
            Err(Error::DegenerateMeet { .. })
        ));
    }

    #[test]
    fn span_hyperplane_examples() {
        span_examples::<C>();
        span_examples::<GaussRat>();
    }

    #[test]
    fn meet_point_examples() {
        meet_examples::<C>();
        meet_examples::<GaussRat>();
    }

    #[test]
    fn span_then_incidence() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for k in 2..6 {
            let pts = random_points(&mut rng, k, k);
            let h = span_hyperplane(&pts, DEFAULT_TOL).unwrap();
            for p in &pts {
                assert!(p.incidence(&h) < 1e-12);
            }
        }
    }

    #[test]
    fn fit_map_identity_and_frames() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for k in 1..5 {
            let pts = random_points(&mut rng, k + 3, k);
            let coords: Vec<_> = pts.iter().map(|p| p.coords().to_vec()).collect();
            let fit = fit_map(&coords, &coords, DEFAULT_TOL).unwrap();
            assert!(fit.residual <= DEFAULT_TOL);
            assert_eq!(fit.solution_dim, 1);
            let m = ProjMap::new(fit.map.unwrap(), DEFAULT_TOL).unwrap();
            assert!(m.same_as(&ProjMap::identity(k), 1e-8));

            let src = random_points(&mut rng, k + 2, k);
            let dst = random_points(&mut rng, k + 2, k);
            let fit = fit_map(
                &src.iter().map(|p| p.coords().to_vec()).collect::<Vec<_>>(),
                &dst.iter().map(|p| p.coords().to_vec()).collect::<Vec<_>>(),
                DEFAULT_TOL,
            )
            .unwrap();
            assert!(fit.residual <= DEFAULT_TOL);
            assert_eq!(fit.solution_dim, 1);
        }
    }

    #[test]
    fn fit_map_rejects_too_few_points() {
        let v = vec![vec![C::new(1.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0)]; 3];
        assert!(matches!(
            fit_map(&v, &v, DEFAULT_TOL),
            Err(Error::InsufficientPoints { needed: 4, got: 3 })
        ));
    }

    /// Brute force: the stacked system for k+3 random pairs has a trivial
    /// kernel, so no map exists and the residual is large.
    #[test]
    fn fit_map_random_targets_has_no_solution() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for k in 1..5 {
            let src = random_points(&mut rng, k + 3, k);
            let dst = random_points(&mut rng, k + 3, k);
            let fit = fit_map(
                &src.iter().map(|p| p.coords().to_vec()).collect::<Vec<_>>(),
                &dst.iter().map(|p| p.coords().to_vec()).collect::<Vec<_>>(),
                DEFAULT_TOL,
            )
            .unwrap();
            assert_eq!(fit.solution_dim, 0);
            assert!(fit.residual > 1e-4, "k={k} residual {}", fit.residual);
        }
    }

    #[test]
    fn equivalence_under_random_maps() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for k in 1..5 {
            let p = random_points(&mut rng, k + 4, k);
            let psi = random_map(&mut rng, k);
            let q: Vec<_> = p.iter().map(|x| psi.apply(x).unwrap()).collect();
            let eq = projectively_equivalent(&p, &q, 1e-8).unwrap();
            assert!(eq.equivalent, "residual {}", eq.residual);
            assert!(eq.witness.unwrap().same_as(&psi, 1e-6));
            let same = projectively_equivalent(&p, &p, 1e-8).unwrap();
            assert!(same.witness.unwrap().same_as(&ProjMap::identity(k), 1e-8));
        }
    }

    #[test]
    fn swapped_labels_are_not_equivalent() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut min_residual = f64::INFINITY;
        for trial in 0..100 {
            let k = 2 + trial % 3;
            let p = random_points(&mut rng, k + 3, k);
            let mut q = p.clone();
            q.swap(0, k + 2);
            let eq = projectively_equivalent(&p, &q, 1e-8).unwrap();
            assert!(!eq.equivalent);
            let fit = projectively_equivalent_by_fit(&p, &q, 1e-8).unwrap();
            assert!(!fit.equivalent);
            min_residual = min_residual.min(eq.residual);
        }
        assert!(min_residual > 1e-6);
    }

    #[test]
    fn frame_and_fit_routes_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for k in 1..4 {
            let p = random_points(&mut rng, k + 3, k);
            let psi = random_map(&mut rng, k);
            let q: Vec<_> = p.iter().map(|x| psi.apply(x).unwrap()).collect();
            let a = projectively_equivalent(&p, &q, 1e-8).unwrap();
            let b = projectively_equivalent_by_fit(&p, &q, 1e-8).unwrap();
            assert!(a.equivalent && b.equivalent);
            assert!(a.witness.unwrap().same_as(&b.witness.unwrap(), 1e-6));
        }
    }

    #[test]
    fn frame_coordinates_decide_equivalence() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for k in 2..=4 {
            let p: Vec<ProjPoint<GaussRat>> = (0..k + 5)
                .map(|_| ProjPoint::new((0..=k).map(|_| numeric::sample(&mut rng, true)).collect()).unwrap())
                .collect();
            let m = Matrix::from_fn(k + 1, k + 1, |_, _| numeric::sample::<GaussRat, _>(&mut rng, false));
            let Ok(map) = ProjMap::new(m, 0.0) else { continue };
            let q: Vec<_> = p.iter().map(|x| map.apply(x).unwrap()).collect();
            let (Ok(a), Ok(b)) = (frame_coordinates(&p, 0.0), frame_coordinates(&q, 0.0)) else {
                continue;
            };
            assert_eq!(a, b);
            let mut swapped = q.clone();
            swapped.swap(k + 2, k + 3);
            let c = frame_coordinates(&swapped, 0.0).unwrap();
            assert_ne!(a, c);
            assert!(!projectively_equivalent(&p, &swapped, 0.0).unwrap().equivalent);
        }
        let flat = [[1, 0, 0], [0, 1, 0], [1, 1, 0], [1, 1, 1], [2, 3, 5]].map(|c| pt::<GaussRat>(&c));
        assert!(matches!(frame_coordinates(&flat, 0.0), Err(Error::DegenerateConfiguration(_))));
    }

    #[test]
    fn exact_equivalence_is_reflexive_symmetric_transitive() {
        let p: Vec<ProjPoint<GaussRat>> = [[1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 1], [2, -1, 3]]
            .iter()
            .map(|c| pt(c))
            .collect();
        let m1 = ProjMap::new(
            Matrix::from_rows(&[
                vec![GaussRat::from_i64(1), GaussRat::from_i64(2), GaussRat::from_i64(0)],
                vec![GaussRat::from_i64(0), GaussRat::from_i64(1), GaussRat::from_i64(-1)],
                vec![GaussRat::from_i64(3), GaussRat::from_i64(0), GaussRat::from_i64(1)],
            ])
            .unwrap(),
            0.0,
        )
        .unwrap();
        let m2 = ProjMap::new(
            Matrix::from_rows(&[
                vec![GaussRat::from_i64(2), GaussRat::imag_unit(), GaussRat::from_i64(0)],
                vec![GaussRat::from_i64(0), GaussRat::from_i64(1), GaussRat::from_i64(0)],
                vec![GaussRat::from_i64(1), GaussRat::from_i64(0), GaussRat::from_i64(1)],
            ])
            .unwrap(),
            0.0,
        )
        .unwrap();
        let q: Vec<_> = p.iter().map(|x| m1.apply(x).unwrap()).collect();
        let r: Vec<_> = q.iter().map(|x| m2.apply(x).unwrap()).collect();
        assert!(projectively_equivalent(&p, &p, 0.0).unwrap().equivalent);
        assert!(projectively_equivalent(&p, &q, 0.0).unwrap().equivalent);
        assert!(projectively_equivalent(&q, &p, 0.0).unwrap().equivalent);
        assert!(projectively_equivalent(&q, &r, 0.0).unwrap().equivalent);
        let pr = projectively_equivalent(&p, &r, 0.0).unwrap();
        assert!(pr.equivalent);
        assert_eq!(pr.residual, 0.0);
    }
}
