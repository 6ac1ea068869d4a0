//! Local dimension of the moduli space from the tangent space of the
//! incidence variety `{(A, F) : F(A_i, A_{i+m+e}) = 0}`.
//!
//! Unknowns are `(dA_0..dA_{n-1}, dF)`, ordered vertex-major then `F`
//! row-major. The gauge orbit through a general-position point has
//! dimension `n + (k+1)^2`: vertex scalings plus the general-linear action,
//! with form scaling absorbed by the scalar matrices.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::construction::{construct, derive_seed, CanonicalChoice, ConstructionSpec};
use crate::error::{Error, Result};
use crate::numeric::{self, Complex64, Matrix, Scalar};
use crate::polygon::Polygon;
use crate::selfdual::{offsets, SelfDualityCertificate};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TangentReport {
    pub m: i64,
    pub n: usize,
    pub k: usize,
    pub kernel_dim: usize,
    pub estimated_moduli_dim: i64,
    pub constraint_rank: usize,
    pub unknowns: usize,
    pub tolerance: f64,
    pub exact: bool,
}

/// The linearized incidence system at `(p, F)`.
pub fn tangent_matrix<S: Scalar>(p: &Polygon<S>, form: &Matrix<S>, m: i64) -> Matrix<S> {
    let n = p.n();
    let d = p.ambient_dim() + 1;
    let cols = n * d + d * d;
    let ft = form.transpose();
    let mut rows = Vec::with_capacity(n * (d - 1));
    for t in 0..n as i64 {
        for e in offsets(d as i64 - 1) {
            let u = (t + (m + e) / 2).rem_euclid(n as i64);
            let (a, b) = (p.slot(t).coords(), p.slot(u).coords());
            let mut row = vec![S::zero(); cols];
            let fb = form.mul_vec(b);
            let fta = ft.mul_vec(a);
            for j in 0..d {
                row[t as usize * d + j] = row[t as usize * d + j].clone() + fb[j].clone();
                row[u as usize * d + j] = row[u as usize * d + j].clone() + fta[j].clone();
            }
            for i in 0..d {
                for j in 0..d {
                    row[n * d + i * d + j] = a[i].clone() * b[j].clone();
                }
            }
            rows.push(row);
        }
    }
    Matrix::from_rows(&rows).expect("uniform rows")
}

/// Tangent vectors of the gauge orbit: vertex scalings, form scaling and
/// the general-linear action `dA = X A`, `dF = -X^T F - F X`.
pub fn trivial_directions<S: Scalar>(p: &Polygon<S>, form: &Matrix<S>) -> Vec<Vec<S>> {
    let n = p.n();
    let d = p.ambient_dim() + 1;
    let cols = n * d + d * d;
    let mut out = Vec::new();
    for t in 0..n {
        let mut v = vec![S::zero(); cols];
        v[t * d..(t + 1) * d].clone_from_slice(p.slot(t as i64).coords());
        out.push(v);
    }
    let mut v = vec![S::zero(); cols];
    v[n * d..].clone_from_slice(form.data());
    out.push(v);
    for a in 0..d {
        for b in 0..d {
            let x = Matrix::from_fn(d, d, |i, j| if (i, j) == (a, b) { S::one() } else { S::zero() });
            let mut v = Vec::with_capacity(cols);
            for t in 0..n {
                v.extend(x.mul_vec(p.slot(t as i64).coords()));
            }
            let df = x.transpose().mul(form).add(&form.mul(&x)).scale(&S::from_i64(-1));
            v.extend(df.data().iter().cloned());
            out.push(v);
        }
    }
    out
}

fn balanced<S: Scalar>(p: &Polygon<S>, form: &Matrix<S>) -> (Polygon<S>, Matrix<S>) {
    if S::EXACT {
        return (p.clone(), form.clone());
    }
    let scale = form.frobenius_norm();
    let f = form.scale(&S::from_c64(Complex64::new(1.0 / scale, 0.0)));
    (p.normalized(), f)
}

/// Tangent-space estimate at a certified polygon.
pub fn tangent_dim<S: Scalar>(
    p: &Polygon<S>,
    cert: &SelfDualityCertificate<S>,
    tol: f64,
) -> Result<TangentReport> {
    let (p, form) = balanced(p, cert.form.matrix());
    let jac = tangent_matrix(&p, &form, cert.m);
    let worst = trivial_residual(&jac, &trivial_directions(&p, &form));
    if worst > tol.max(numeric::VERIFY_TOL) {
        return Err(Error::RankUnstable(format!(
            "gauge direction leaves the tangent space (residual {worst:.2e})"
        )));
    }
    let rank = numeric::rank(&jac, tol);
    if !S::EXACT {
        for probe in [tol * 10.0, tol / 10.0] {
            let other = numeric::rank(&jac, probe);
            if other != rank {
                return Err(Error::RankUnstable(format!(
                    "rank {rank} at tolerance {tol:e} but {other} at {probe:e}"
                )));
            }
        }
    }
    Ok(report(cert.m, p.n(), p.ambient_dim(), jac.cols(), rank, tol, S::EXACT))
}

/// Same accounting at an arbitrary `(p, F)`, with no stability probe.
/// Used to show the estimate collapses away from the variety.
pub fn tangent_dim_unchecked<S: Scalar>(p: &Polygon<S>, form: &Matrix<S>, m: i64, tol: f64) -> TangentReport {
    let (p, form) = balanced(p, form);
    let jac = tangent_matrix(&p, &form, m);
    let rank = numeric::rank(&jac, tol);
    report(m, p.n(), p.ambient_dim(), jac.cols(), rank, tol, S::EXACT)
}

fn report(m: i64, n: usize, k: usize, cols: usize, rank: usize, tol: f64, exact: bool) -> TangentReport {
    let kernel_dim = cols - rank;
    TangentReport {
        m,
        n,
        k,
        kernel_dim,
        estimated_moduli_dim: kernel_dim as i64 - n as i64 - ((k + 1) * (k + 1)) as i64,
        constraint_rank: rank,
        unknowns: cols,
        tolerance: tol,
        exact,
    }
}

/// Largest `|J v| / |v|` over the given directions, relative to `|J|`.
pub fn trivial_residual<S: Scalar>(jac: &Matrix<S>, dirs: &[Vec<S>]) -> f64 {
    let scale = jac.frobenius_norm().max(f64::MIN_POSITIVE);
    dirs.iter()
        .map(|v| {
            let nv = numeric::norm(v);
            if nv == 0.0 {
                0.0
            } else {
                numeric::norm(&jac.mul_vec(v)) / (scale * nv)
            }
        })
        .fold(0.0, f64::max)
}

/// Residual of the incidence equations, relative to vertex and form norms.
pub fn constraint_residual<S: Scalar>(p: &Polygon<S>, form: &Matrix<S>, m: i64) -> f64 {
    let fnorm = form.frobenius_norm();
    let n = p.n() as i64;
    let mut worst: f64 = 0.0;
    for t in 0..n {
        for e in offsets(p.ambient_dim() as i64) {
            let (a, b) = (p.slot(t).coords(), p.slot(t + (m + e) / 2).coords());
            let v = numeric::dot(a, &form.mul_vec(b)).modulus()
                / (fnorm * numeric::norm(a) * numeric::norm(b));
            worst = worst.max(v);
        }
    }
    worst
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DimSurvey {
    pub m: i64,
    pub n: usize,
    pub k: usize,
    pub canonical: String,
    pub trials: usize,
    pub modal: Option<i64>,
    /// Estimate -> number of trials.
    pub histogram: BTreeMap<i64, usize>,
    pub disagreements: usize,
    /// Trials that failed to construct or gave an unstable rank.
    pub failures: Vec<String>,
    pub reports: Vec<TangentReport>,
}

impl DimSurvey {
    pub fn unanimous(&self) -> bool {
        self.disagreements == 0 && self.failures.is_empty() && self.modal.is_some()
    }
}

/// Estimates at `trials` independent constructions for one canonical
/// choice. Trials run in parallel; the result does not depend on thread
/// scheduling. Exact scalars give exact kernel dimensions but only support
/// classes with rational blocks and no self-incidence quadrics.
pub fn dim_survey_with<S: Scalar>(
    m: i64,
    n: usize,
    k: usize,
    canonical: &CanonicalChoice,
    trials: usize,
    seed: u64,
    tol: f64,
) -> DimSurvey {
    let outcomes: Vec<Result<TangentReport>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut spec = ConstructionSpec::new(m, n, k, canonical.clone(), derive_seed(seed, i as u64));
            spec.tol = tol;
            let rep = construct::<S>(&spec)?;
            tangent_dim(&rep.polygon, &rep.certificate, tol)
        })
        .collect();
    let mut histogram = BTreeMap::new();
    let mut failures = Vec::new();
    let mut reports = Vec::new();
    for o in outcomes {
        match o {
            Ok(r) => {
                *histogram.entry(r.estimated_moduli_dim).or_insert(0) += 1;
                reports.push(r);
            }
            Err(e) => failures.push(e.to_string()),
        }
    }
    let modal = histogram
        .iter()
        .max_by_key(|&(d, c)| (*c, std::cmp::Reverse(*d)))
        .map(|(d, _)| *d);
    let disagreements = reports.len() - modal.map_or(0, |d| histogram[&d]);
    DimSurvey {
        m,
        n,
        k,
        canonical: canonical.to_string(),
        trials,
        modal,
        histogram,
        disagreements,
        failures,
        reports,
    }
}

/// [`dim_survey_with`] at the default canonical choice for `(m, n, k)`.
pub fn dim_survey<S: Scalar>(m: i64, n: usize, k: usize, trials: usize, seed: u64, tol: f64) -> Result<DimSurvey> {
    let spec = ConstructionSpec::default_for(m, n, k, seed)?;
    Ok(dim_survey_with::<S>(m, n, k, &spec.canonical, trials, seed, tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::{construct_m_eq_0, construct_m_eq_n};
    use crate::numeric::GaussRat;
    use rand::SeedableRng;

    type C = Complex64;

    #[test]
    fn symmetric_and_shift_zero_values() {
        let rep = construct_m_eq_n::<C>(12, 3, 1).unwrap();
        let t = tangent_dim(&rep.polygon, &rep.certificate, 1e-9).unwrap();
        assert_eq!(t.estimated_moduli_dim, 12);
        assert_eq!(t.kernel_dim + t.constraint_rank, t.unknowns);
        let rep = construct_m_eq_0::<C>(12, 3, 1).unwrap();
        assert_eq!(tangent_dim(&rep.polygon, &rep.certificate, 1e-9).unwrap().estimated_moduli_dim, 14);
        let rep = construct_m_eq_n::<C>(5, 2, 1).unwrap();
        assert_eq!(tangent_dim(&rep.polygon, &rep.certificate, 1e-9).unwrap().estimated_moduli_dim, 2);
    }

    #[test]
    fn exact_path_agrees() {
        let rep = construct_m_eq_n::<GaussRat>(12, 3, 4).unwrap();
        let t = tangent_dim(&rep.polygon, &rep.certificate, 1e-9).unwrap();
        assert!(t.exact);
        assert_eq!(t.estimated_moduli_dim, 12);
        let rep = construct::<GaussRat>(&ConstructionSpec::new(6, 12, 3, CanonicalChoice::Symplectic(1), 4)).unwrap();
        assert_eq!(tangent_dim(&rep.polygon, &rep.certificate, 1e-9).unwrap().estimated_moduli_dim, 5);
    }

    #[test]
    fn gauge_directions_are_tangent() {
        let rep = construct::<C>(&ConstructionSpec::new(4, 12, 3, CanonicalChoice::OrderThree { s1: 1, s2: 0 }, 2)).unwrap();
        let (p, f) = balanced(&rep.polygon, rep.certificate.form.matrix());
        let jac = tangent_matrix(&p, &f, 4);
        let dirs = trivial_directions(&p, &f);
        assert_eq!(dirs.len(), 12 + 1 + 16);
        assert!(trivial_residual(&jac, &dirs) < 1e-12);
        // the span of gauge directions has the subtracted dimension
        assert_eq!(numeric::rank(&Matrix::from_rows(&dirs).unwrap(), 1e-9), 12 + 16);
    }

    #[test]
    fn survey_is_unanimous_on_theorem_cases() {
        for (m, n, k, want) in [(6, 12, 3, 5), (4, 12, 3, 4), (12, 12, 3, 12), (0, 12, 3, 14)] {
            let s = dim_survey::<C>(m, n, k, 4, 7, 1e-9).unwrap();
            assert!(s.unanimous(), "{s:?}");
            assert_eq!(s.modal, Some(want), "({m},{n},{k})");
            let s = dim_survey::<GaussRat>(m, n, k, 2, 7, 1e-9).unwrap();
            assert!(s.unanimous() && s.reports.iter().all(|r| r.exact), "{s:?}");
            assert_eq!(s.modal, Some(want), "exact ({m},{n},{k})");
        }
    }

    #[test]
    fn perturbation_leaves_the_variety() {
        let rep = construct::<C>(&ConstructionSpec::new(6, 12, 3, CanonicalChoice::Symplectic(1), 3)).unwrap();
        let f = rep.certificate.form.matrix();
        let before = constraint_residual(&rep.polygon, f, 6);
        let mut coords = rep.polygon.coords();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        for z in coords[0].iter_mut() {
            *z += numeric::sample::<C, _>(&mut rng, true) * 1e-3;
        }
        let moved = Polygon::from_coords(coords).unwrap();
        let after = constraint_residual(&moved, f, 6);
        assert!(after > before && after > 1e-6);
        assert!(tangent_dim_unchecked(&moved, f, 6, 1e-9).estimated_moduli_dim < 5);
    }
}
