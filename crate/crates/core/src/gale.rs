//! Gale transform of n-gons, `P^k -> P^w` with `w = n - k - 2`.
//!
//! The image is read off a basis of the kernel of the `(k+1) x n` vertex
//! matrix. A different basis changes the image by a linear map of `P^w`, so
//! every downstream check is up to projective equivalence.

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::construction::{construct_m_eq_0, construct_m_eq_n};
use crate::error::{Error, Result};
use crate::formulas::normalize_shift;
use crate::numeric::{self, Matrix, Scalar};
use crate::polygon::Polygon;
use crate::selfdual::check_self_dual;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GaleConvention {
    Plain,
    /// Column `t` multiplied by `(-1)^t`.
    Alternating,
}

impl GaleConvention {
    /// Pinned by [`calibrate`]. Flipping column signs only flips the signs
    /// of the matching image vertices, so both conventions give the same
    /// projective polygon and both pass calibration.
    pub const CALIBRATED: GaleConvention = GaleConvention::Plain;
}

impl fmt::Display for GaleConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Plain => "plain",
            Self::Alternating => "alternating",
        })
    }
}

impl FromStr for GaleConvention {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plain" => Ok(Self::Plain),
            "alternating" => Ok(Self::Alternating),
            other => Err(Error::Parse(format!("unknown Gale convention {other:?}"))),
        }
    }
}

/// Dimension of the image space.
pub fn gale_dim(n: usize, k: usize) -> Result<usize> {
    let g = n.gcd(&k);
    if g != 1 {
        return Err(Error::GcdViolation { n, k, gcd: g });
    }
    if n < k + 3 {
        return Err(Error::Precondition(format!("n = {n} < k+3 = {}", k + 3)));
    }
    Ok(n - k - 2)
}

pub fn gale_transform<S: Scalar>(p: &Polygon<S>, convention: GaleConvention, tol: f64) -> Result<Polygon<S>> {
    let (n, k) = (p.n(), p.ambient_dim());
    let w = gale_dim(n, k)?;
    let minus = S::from_i64(-1);
    let columns: Vec<Vec<S>> = (0..n)
        .map(|t| {
            let c = p.slot(t as i64).coords().to_vec();
            match convention {
                GaleConvention::Alternating if t % 2 == 1 => c.into_iter().map(|x| x * minus.clone()).collect(),
                _ => c,
            }
        })
        .collect();
    let v = Matrix::from_columns(&columns)?;
    let rank = numeric::rank(&v, tol);
    if rank != k + 1 {
        return Err(Error::KernelDefect(format!("vertex matrix has rank {rank}, expected {}", k + 1)));
    }
    let kernel = numeric::nullspace(&v, tol);
    if kernel.len() != w + 1 {
        return Err(Error::KernelDefect(format!(
            "kernel dimension {} instead of {}",
            kernel.len(),
            w + 1
        )));
    }
    let coords = (0..n)
        .map(|t| kernel.iter().map(|b| b[t].clone()).collect())
        .collect();
    Polygon::from_coords(coords)
}

/// Whether `p` is `m`-self-dual and its image is `(m-n)`-self-dual.
pub fn verify_translation<S: Scalar>(p: &Polygon<S>, m: i64, convention: GaleConvention, tol: f64) -> Result<bool> {
    if !check_self_dual(p, m, tol)?.is_self_dual() {
        return Err(Error::Precondition(format!("polygon is not {m}-self-dual")));
    }
    let image = gale_transform(p, convention, tol)?;
    let shifted = normalize_shift(m - p.n() as i64, p.n());
    Ok(check_self_dual(&image, shifted, tol)?.is_self_dual())
}

/// Self-dual polygons used to pin the sign convention, one per `(n, k)`.
pub fn calibration_polygon<S: Scalar>(n: usize, k: usize, seed: u64) -> Result<(Polygon<S>, i64)> {
    if (n + k + 1) % 2 == 0 {
        return Ok((construct_m_eq_n::<S>(n, k, seed)?.polygon, n as i64));
    }
    if k % 2 == 1 {
        return Ok((construct_m_eq_0::<S>(n, k, seed)?.polygon, 0));
    }
    Err(Error::Precondition(format!("no m = n or m = 0 polygon for n = {n}, k = {k}")))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Calibration {
    pub cases: Vec<(usize, usize, i64)>,
    pub plain: usize,
    pub alternating: usize,
    pub trials: usize,
    pub chosen: Option<GaleConvention>,
}

/// Runs [`verify_translation`] under both conventions over `cases`
/// (`(n, k)` pairs), `trials` constructions each.
pub fn calibrate<S: Scalar>(cases: &[(usize, usize)], trials: usize, seed: u64, tol: f64) -> Result<Calibration> {
    let mut out = Calibration {
        cases: Vec::new(),
        plain: 0,
        alternating: 0,
        trials: 0,
        chosen: None,
    };
    for &(n, k) in cases {
        for i in 0..trials {
            let (p, m) = calibration_polygon::<S>(n, k, seed.wrapping_add(i as u64))?;
            if i == 0 {
                out.cases.push((n, k, m));
            }
            out.trials += 1;
            out.plain += usize::from(verify_translation(&p, m, GaleConvention::Plain, tol)?);
            out.alternating += usize::from(verify_translation(&p, m, GaleConvention::Alternating, tol)?);
        }
    }
    out.chosen = if out.plain == out.trials {
        Some(GaleConvention::Plain)
    } else if out.alternating == out.trials {
        Some(GaleConvention::Alternating)
    } else {
        None
    };
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{Complex64, GaussRat};
    use crate::projective::projectively_equivalent;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn preconditions() {
        assert!(matches!(gale_dim(6, 3), Err(Error::GcdViolation { gcd: 3, .. })));
        assert!(matches!(gale_dim(12, 3), Err(Error::GcdViolation { .. })));
        assert_eq!(gale_dim(11, 3).unwrap(), 6);
        assert_eq!(gale_dim(5, 2).unwrap(), 1);
    }

    #[test]
    fn pentagon_goes_to_the_line() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = Polygon::<GaussRat>::random(2, 5, true, &mut rng, 1e-9).unwrap();
        let g = gale_transform(&p, GaleConvention::Plain, 1e-9).unwrap();
        assert_eq!(g.ambient_dim(), 1);
        assert!(check_self_dual(&g, 0, 1e-9).unwrap().is_self_dual());
    }

    #[test]
    fn involution() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for (n, k) in [(5, 2), (7, 2), (7, 4), (9, 2), (11, 3)] {
            for _ in 0..5 {
                let p = Polygon::<Complex64>::random(k, n, true, &mut rng, 1e-9).unwrap();
                for conv in [GaleConvention::Plain, GaleConvention::Alternating] {
                    let back = gale_transform(&gale_transform(&p, conv, 1e-9).unwrap(), conv, 1e-9).unwrap();
                    assert!(projectively_equivalent(p.vertices(), back.vertices(), 1e-7).unwrap().equivalent);
                }
            }
        }
    }

    #[test]
    fn calibration_selects_a_convention() {
        let cases = [(5, 2), (7, 2), (9, 2), (11, 3), (7, 4)];
        let c = calibrate::<Complex64>(&cases, 3, 1, 1e-9).unwrap();
        assert_eq!(c.chosen, Some(GaleConvention::CALIBRATED), "{c:?}");
    }

    #[test]
    fn regular_polygons_shift_both_ways() {
        for (n, k, freqs, shifts) in [(11, 3, vec![1, 2], vec![2i64, 4, 6]), (9, 2, vec![1], vec![1, 3, 5])] {
            let p = crate::construction::regular_polygon(n, k, &freqs).unwrap();
            let g = gale_transform(&p, GaleConvention::CALIBRATED, 1e-9).unwrap();
            assert_eq!(g.ambient_dim(), n - k - 2);
            for m in shifts {
                assert!(check_self_dual(&p, m, 1e-9).unwrap().is_self_dual());
                for shifted in [m - n as i64, m + n as i64] {
                    assert!(check_self_dual(&g, shifted, 1e-9).unwrap().is_self_dual(), "({m},{n},{k})");
                }
            }
        }
    }

    #[test]
    fn conventions_agree_pointwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = Polygon::<GaussRat>::random(3, 11, true, &mut rng, 1e-9).unwrap();
        let a = gale_transform(&p, GaleConvention::Plain, 1e-9).unwrap();
        let b = gale_transform(&p, GaleConvention::Alternating, 1e-9).unwrap();
        let eq = projectively_equivalent(a.vertices(), b.vertices(), 1e-9).unwrap();
        assert!(eq.equivalent);
        assert_eq!(eq.residual, 0.0);
    }

    #[test]
    fn not_self_dual_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = Polygon::<Complex64>::random(3, 11, true, &mut rng, 1e-9).unwrap();
        assert!(matches!(
            verify_translation(&p, 4, GaleConvention::Plain, 1e-9),
            Err(Error::Precondition(_))
        ));
    }
}
