//! Closed n-gons in P^k and their duals.
//!
//! Vertices carry odd indices `A_1, A_3, ...` taken mod `2n`; slot `t` stores
//! `A_{1+2t}`. Dual hyperplanes carry indices of the parity of `k`; dual slot
//! `t` stores `B_{k+2t}`, the span of vertex slots `t, t+1, ..., t+k-1`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::numeric::{self, Matrix, Scalar};
use crate::projective::{span_hyperplane, Hyperplane, ProjMap, ProjPoint};

/// Slot of the vertex `A_i`.
pub fn vertex_slot(i: i64, n: usize) -> Result<usize> {
    if i.rem_euclid(2) != 1 {
        return Err(Error::ParityError { index: i });
    }
    Ok(((i - 1) / 2).rem_euclid(n as i64) as usize)
}

/// Slot of the dual hyperplane `B_i` of a polygon in P^k.
pub fn dual_slot(i: i64, k: usize, n: usize) -> Result<usize> {
    if (i - k as i64).rem_euclid(2) != 0 {
        return Err(Error::ParityError { index: i });
    }
    Ok(((i - k as i64) / 2).rem_euclid(n as i64) as usize)
}

/// A closed polygon with `n >= k+3` vertices in P^k.
#[derive(Clone, Debug)]
pub struct Polygon<S> {
    k: usize,
    vertices: Vec<ProjPoint<S>>,
}

/// The dual polygon: one hyperplane per slot.
#[derive(Clone, Debug)]
pub struct DualPolygon<S> {
    k: usize,
    hyperplanes: Vec<Hyperplane<S>>,
}

impl<S: Scalar> Polygon<S> {
    /// Structural checks only (common dimension, `n >= k+3`); see
    /// [`Polygon::validate`] for general position and simplicity.
    pub fn new(vertices: Vec<ProjPoint<S>>) -> Result<Self> {
        let k = vertices
            .first()
            .map(ProjPoint::ambient_dim)
            .ok_or_else(|| Error::Precondition("polygon without vertices".into()))?;
        if vertices.iter().any(|v| v.ambient_dim() != k) {
            return Err(Error::DimensionMismatch("vertices of mixed dimension".into()));
        }
        if vertices.len() < k + 3 {
            return Err(Error::Precondition(format!(
                "an n-gon in P^{k} needs n >= {}, got n = {}",
                k + 3,
                vertices.len()
            )));
        }
        Ok(Self { k, vertices })
    }

    pub fn from_coords(coords: Vec<Vec<S>>) -> Result<Self> {
        Self::new(
            coords
                .into_iter()
                .map(ProjPoint::new)
                .collect::<Result<Vec<_>>>()?,
        )
    }

    /// [`Polygon::new`] followed by [`Polygon::validate`].
    pub fn new_checked(vertices: Vec<ProjPoint<S>>, tol: f64) -> Result<Self> {
        let p = Self::new(vertices)?;
        p.validate(tol)?;
        Ok(p)
    }

    /// Random polygon with entries from [`numeric::sample`], redrawn until
    /// it is in general position and simple.
    pub fn random<R: Rng + ?Sized>(k: usize, n: usize, real: bool, rng: &mut R, tol: f64) -> Result<Self> {
        for _ in 0..64 {
            let coords = (0..n)
                .map(|_| (0..=k).map(|_| numeric::sample::<S, _>(rng, real)).collect())
                .collect::<Vec<Vec<S>>>();
            if coords.iter().any(|c| c.iter().all(Scalar::is_zero)) {
                continue;
            }
            let p = Self::from_coords(coords)?;
            if p.validate(tol).is_ok() {
                return Ok(p);
            }
        }
        Err(Error::DegenerateConfiguration(
            "no valid random polygon after 64 draws".into(),
        ))
    }

    pub fn ambient_dim(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[ProjPoint<S>] {
        &self.vertices
    }

    pub fn slot(&self, t: i64) -> &ProjPoint<S> {
        &self.vertices[t.rem_euclid(self.n() as i64) as usize]
    }

    /// The vertex `A_i` (odd `i`).
    pub fn vertex(&self, i: i64) -> Result<&ProjPoint<S>> {
        Ok(&self.vertices[vertex_slot(i, self.n())?])
    }

    pub fn coords(&self) -> Vec<Vec<S>> {
        self.vertices.iter().map(|v| v.coords().to_vec()).collect()
    }

    pub fn is_real(&self) -> bool {
        self.vertices.iter().all(|v| v.coords().iter().all(Scalar::is_real))
    }

    /// Every `k+1` cyclically consecutive vertices are independent.
    pub fn general_position(&self, tol: f64) -> bool {
        self.first_dependent_window(tol).is_none()
    }

    fn first_dependent_window(&self, tol: f64) -> Option<usize> {
        let n = self.n() as i64;
        (0..n).find_map(|t| {
            let rows: Vec<Vec<S>> = (0..=self.k as i64)
                .map(|j| self.slot(t + j).coords().to_vec())
                .collect();
            let m = Matrix::from_rows(&rows).expect("uniform rows");
            (numeric::rank(&m, tol) <= self.k).then_some(t as usize)
        })
    }

    /// No rotation by `n / l` slots (`l > 1` dividing `n`) fixes every vertex.
    pub fn is_simple(&self, tol: f64) -> bool {
        let n = self.n();
        (2..=n).filter(|l| n % l == 0).all(|l| {
            let step = (n / l) as i64;
            !(0..n as i64).all(|t| self.slot(t).same_as(self.slot(t + step), tol))
        })
    }

    pub fn validate(&self, tol: f64) -> Result<()> {
        if let Some(t) = self.first_dependent_window(tol) {
            return Err(Error::DegenerateConfiguration(format!(
                "vertices in slots {t}..{} are dependent",
                t + self.k
            )));
        }
        if !self.is_simple(tol) {
            return Err(Error::DegenerateConfiguration(
                "polygon repeats a shorter polygon".into(),
            ));
        }
        Ok(())
    }

    pub fn transform(&self, map: &ProjMap<S>) -> Result<Self> {
        Self::new(
            self.vertices
                .iter()
                .map(|v| map.apply(v))
                .collect::<Result<Vec<_>>>()?,
        )
    }

    /// Relabels so that new slot `t` holds old slot `t + s`.
    pub fn rotated(&self, s: i64) -> Self {
        let n = self.n() as i64;
        Self {
            k: self.k,
            vertices: (0..n).map(|t| self.slot(t + s).clone()).collect(),
        }
    }

    /// Same vertices in reverse cyclic order.
    pub fn reversed(&self) -> Self {
        let mut vertices = self.vertices.clone();
        vertices.reverse();
        Self { k: self.k, vertices }
    }

    pub fn normalized(&self) -> Self {
        Self {
            k: self.k,
            vertices: self.vertices.iter().map(ProjPoint::normalized).collect(),
        }
    }

    pub fn dual(&self, tol: f64) -> Result<DualPolygon<S>> {
        let hyperplanes = (0..self.n() as i64)
            .map(|t| {
                let pts: Vec<_> = (0..self.k as i64).map(|j| self.slot(t + j).clone()).collect();
                span_hyperplane(&pts, tol)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DualPolygon { k: self.k, hyperplanes })
    }
}

impl<S: Scalar> DualPolygon<S> {
    pub fn ambient_dim(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.hyperplanes.len()
    }

    pub fn hyperplanes(&self) -> &[Hyperplane<S>] {
        &self.hyperplanes
    }

    pub fn slot(&self, t: i64) -> &Hyperplane<S> {
        &self.hyperplanes[t.rem_euclid(self.n() as i64) as usize]
    }

    /// The hyperplane `B_i` (`i` of the parity of `k`).
    pub fn hyperplane(&self, i: i64) -> Result<&Hyperplane<S>> {
        Ok(&self.hyperplanes[dual_slot(i, self.k, self.n())?])
    }

    /// The dual polygon as an ordinary polygon in the dual space (slot-ordered).
    pub fn as_polygon(&self) -> Result<Polygon<S>> {
        Polygon::new(self.hyperplanes.iter().map(Hyperplane::as_point).collect())
    }
}

/// Dualizes twice and compares with the original: second-dual slot `t` is
/// the meet of dual slots `t..t+k-1`, which all contain vertex slot `t+k-1`.
pub fn double_dual_check<S: Scalar>(p: &Polygon<S>, tol: f64) -> Result<bool> {
    double_dual_check_shifted(p, 0, tol)
}

/// [`double_dual_check`] with the slot bookkeeping offset by `shift`.
pub fn double_dual_check_shifted<S: Scalar>(p: &Polygon<S>, shift: i64, tol: f64) -> Result<bool> {
    let dd = p.dual(tol)?.as_polygon()?.dual(tol)?;
    let k = p.ambient_dim() as i64;
    Ok((0..p.n() as i64).all(|t| {
        dd.slot(t)
            .as_point()
            .same_as(p.slot(t + k - 1 + shift), tol)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{Complex64, GaussRat, DEFAULT_TOL};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn slot_conventions() {
        assert_eq!(vertex_slot(1, 12).unwrap(), 0);
        assert_eq!(vertex_slot(25, 12).unwrap(), 0);
        assert_eq!(vertex_slot(-1, 12).unwrap(), 11);
        assert_eq!(vertex_slot(2, 12), Err(Error::ParityError { index: 2 }));
        assert_eq!(dual_slot(3, 3, 12).unwrap(), 0);
        assert_eq!(dual_slot(5, 3, 12).unwrap(), 1);
        assert!(dual_slot(4, 3, 12).is_err());
    }

    #[test]
    fn rejects_short_polygons() {
        let pts: Vec<ProjPoint<Complex64>> = (0..5)
            .map(|i| ProjPoint::from_i64(&[1, i, i * i, i * i * i]).unwrap())
            .collect();
        assert!(matches!(Polygon::new(pts), Err(Error::Precondition(_))));
    }

    #[test]
    fn line_dual_is_swap_negate() {
        let p = Polygon::<GaussRat>::from_coords(
            [[1, 2], [3, -1], [0, 1], [1, 1]]
                .iter()
                .map(|c| c.iter().map(|&x| GaussRat::from_i64(x)).collect())
                .collect(),
        )
        .unwrap();
        let d = p.dual(0.0).unwrap();
        for t in 0..4 {
            let a = p.slot(t).coords();
            let expect = ProjPoint::new(vec![a[1].clone(), -a[0].clone()]).unwrap();
            assert!(d.slot(t).as_point().same_as(&expect, 0.0));
        }
    }

    #[test]
    fn plane_dual_is_line_through_neighbours() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let p = Polygon::<Complex64>::random(2, 5, false, &mut rng, DEFAULT_TOL).unwrap();
        let d = p.dual(DEFAULT_TOL).unwrap();
        for i in (2..12).step_by(2) {
            let b = d.hyperplane(i).unwrap();
            assert!(p.vertex(i - 1).unwrap().incidence(b) < 1e-12);
            assert!(p.vertex(i + 1).unwrap().incidence(b) < 1e-12);
        }
    }

    #[test]
    fn collinear_window_is_degenerate_span() {
        let rows: [[i64; 4]; 7] = [
            [1, 0, 0, 0],
            [0, 1, 0, 0],
            [1, 1, 0, 0],
            [0, 0, 1, 0],
            [0, 0, 0, 1],
            [1, 2, 3, 4],
            [1, -1, 2, 5],
        ];
        let p = Polygon::<GaussRat>::from_coords(
            rows.iter()
                .map(|c| c.iter().map(|&x| GaussRat::from_i64(x)).collect())
                .collect(),
        )
        .unwrap();
        assert!(matches!(p.dual(0.0), Err(Error::DegenerateSpan { .. })));
        assert!(!p.general_position(0.0));
    }

    #[test]
    fn double_dual_recovers_vertices() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pent = Polygon::<Complex64>::random(2, 5, false, &mut rng, DEFAULT_TOL).unwrap();
        assert!(double_dual_check(&pent, 1e-8).unwrap());
        let p = Polygon::<Complex64>::random(3, 12, false, &mut rng, DEFAULT_TOL).unwrap();
        assert!(double_dual_check(&p, 1e-8).unwrap());
        assert!(!double_dual_check_shifted(&p, 1, 1e-8).unwrap());
        let q = Polygon::<GaussRat>::random(4, 9, false, &mut rng, 0.0).unwrap();
        assert!(double_dual_check(&q, 0.0).unwrap());
    }

    #[test]
    fn simplicity_detects_repeats() {
        let base: Vec<Vec<i64>> = vec![
            vec![1, 0, 0],
            vec![0, 1, 0],
            vec![0, 0, 1],
            vec![1, 1, 1],
            vec![1, 2, 5],
        ];
        let twice: Vec<Vec<GaussRat>> = base
            .iter()
            .chain(&base)
            .map(|c| c.iter().map(|&x| GaussRat::from_i64(2 * x)).collect())
            .collect();
        let p = Polygon::from_coords(twice).unwrap();
        assert!(p.general_position(0.0));
        assert!(!p.is_simple(0.0));
        assert!(p.validate(0.0).is_err());
    }

    #[test]
    fn dual_is_equivariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for trial in 0..100 {
            let k = 2 + trial % 3;
            let n = k + 3 + trial % 4;
            let p = Polygon::<Complex64>::random(k, n, false, &mut rng, DEFAULT_TOL).unwrap();
            let psi = ProjMap::new(
                Matrix::from_fn(k + 1, k + 1, |_, _| numeric::sample(&mut rng, false)),
                DEFAULT_TOL,
            )
            .unwrap();
            let lhs = p.transform(&psi).unwrap().dual(DEFAULT_TOL).unwrap();
            let rhs = p.dual(DEFAULT_TOL).unwrap();
            for t in 0..n as i64 {
                let moved = psi.apply_hyperplane(rhs.slot(t), DEFAULT_TOL).unwrap();
                assert!(lhs.slot(t).same_as(&moved, 1e-7), "trial {trial} slot {t}");
            }
        }
    }
}
