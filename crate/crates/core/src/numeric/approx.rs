use nalgebra::DMatrix;
use num_complex::Complex64;
use serde_json::Value;

use super::{Matrix, Scalar};
use crate::error::{Error, Result};

struct Decomposition {
    /// Singular values, descending.
    values: Vec<f64>,
    /// Right singular vectors matching `values`, one per column of the input.
    right: Vec<Vec<Complex64>>,
}

/// SVD with a full set of right singular vectors (wide inputs are padded
/// with zero rows). Real inputs take a real-arithmetic path so that kernel
/// bases of real systems stay real.
fn decompose(m: &Matrix<Complex64>) -> Decomposition {
    let rows = m.rows().max(m.cols());
    let cols = m.cols();
    let (values, right) = if m.is_real() {
        let a = DMatrix::<f64>::from_fn(rows, cols, |r, c| {
            if r < m.rows() {
                m[(r, c)].re
            } else {
                0.0
            }
        });
        let svd = a.svd(false, true);
        let v_t = svd.v_t.expect("right singular vectors requested");
        let values: Vec<f64> = svd.singular_values.iter().copied().collect();
        let right = (0..values.len())
            .map(|j| (0..cols).map(|c| Complex64::new(v_t[(j, c)], 0.0)).collect())
            .collect::<Vec<Vec<_>>>();
        (values, right)
    } else {
        let a = DMatrix::<Complex64>::from_fn(rows, cols, |r, c| {
            if r < m.rows() {
                m[(r, c)]
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let svd = a.svd(false, true);
        let v_t = svd.v_t.expect("right singular vectors requested");
        let values: Vec<f64> = svd.singular_values.iter().copied().collect();
        let right = (0..values.len())
            .map(|j| (0..cols).map(|c| v_t[(j, c)].conj()).collect())
            .collect::<Vec<Vec<_>>>();
        (values, right)
    };
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    Decomposition {
        values: order.iter().map(|&i| values[i]).collect(),
        right: order.into_iter().map(|i| right[i].clone()).collect(),
    }
}

pub(super) fn singular_values(m: &Matrix<Complex64>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut v = decompose(m).values;
    v.truncate(m.rows().min(m.cols()));
    v
}

fn numerical_rank(values: &[f64], tol: f64) -> usize {
    let top = values.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return 0;
    }
    values.iter().filter(|&&s| s > tol * top).count()
}

pub(super) fn least_singular_vector(m: &Matrix<Complex64>) -> (Vec<Complex64>, f64) {
    let d = decompose(m);
    let v = d.right.last().expect("at least one column").clone();
    let mv = m.mul_vec(&v);
    let res = mv.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    (v, res)
}

impl Scalar for Complex64 {
    const EXACT: bool = false;
    const NAME: &'static str = "approx";

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }

    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }

    fn from_i64(v: i64) -> Self {
        Complex64::new(v as f64, 0.0)
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Complex64::new(num as f64 / den as f64, 0.0)
    }

    fn imag_unit() -> Self {
        Complex64::new(0.0, 1.0)
    }

    fn from_c64(z: Complex64) -> Self {
        z
    }

    fn root_of_unity(num: i64, den: i64) -> Option<Self> {
        let theta = 2.0 * std::f64::consts::PI * (num.rem_euclid(den) as f64) / den as f64;
        Some(Complex64::from_polar(1.0, theta))
    }

    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }

    fn modulus(&self) -> f64 {
        self.norm()
    }

    fn conj(&self) -> Self {
        Complex64::conj(self)
    }

    fn to_c64(&self) -> Complex64 {
        *self
    }

    fn is_real(&self) -> bool {
        self.im == 0.0
    }

    fn rank(m: &Matrix<Self>, tol: f64) -> usize {
        let d = decompose(m);
        let k = m.rows().min(m.cols());
        numerical_rank(&d.values[..k], tol)
    }

    fn nullspace(m: &Matrix<Self>, tol: f64) -> Vec<Vec<Self>> {
        let d = decompose(m);
        let k = m.rows().min(m.cols());
        let r = numerical_rank(&d.values[..k], tol);
        d.right.into_iter().skip(r).collect()
    }

    fn normalize(v: &mut [Self]) {
        let Some(pivot) = v
            .iter()
            .copied()
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .filter(|p| p.norm() > 0.0)
        else {
            return;
        };
        for x in v.iter_mut() {
            *x /= pivot;
        }
    }

    fn encode(&self) -> [Value; 2] {
        [Value::from(self.re), Value::from(self.im)]
    }

    fn decode(re: &Value, im: &Value) -> Result<Self> {
        let parse = |v: &Value| {
            v.as_f64()
                .ok_or_else(|| Error::Parse(format!("expected a number, got {v}")))
        };
        Ok(Complex64::new(parse(re)?, parse(im)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{least_singular_vector as lsv, rank, DEFAULT_TOL};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn residual_matches_smallest_singular_value_on_tall_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let m = Matrix::from_fn(7, 4, |_, _| {
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            });
            // independent route: eigenvalues of the Gram matrix
            let a = DMatrix::<Complex64>::from_fn(7, 4, |r, c| m[(r, c)]);
            let gram = a.adjoint() * &a;
            let eig = gram.symmetric_eigenvalues();
            let smallest = eig.iter().copied().fold(f64::INFINITY, f64::min).sqrt();
            let (_, res) = lsv(&m).unwrap();
            assert!((res - smallest).abs() < 1e-9, "{res} vs {smallest}");
        }
    }

    #[test]
    fn real_systems_keep_real_kernels() {
        let m = Matrix::from_rows(&[vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(2.0, 0.0),
            Complex64::new(3.0, 0.0),
        ]])
        .unwrap();
        for v in Complex64::nullspace(&m, DEFAULT_TOL) {
            assert!(v.iter().all(|z| z.im == 0.0));
        }
        assert_eq!(rank(&m, DEFAULT_TOL), 1);
    }

    #[test]
    fn normalize_sets_largest_entry_to_one() {
        let mut v = vec![Complex64::new(0.5, 0.0), Complex64::new(0.0, -2.0)];
        Complex64::normalize(&mut v);
        assert!((v[1] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }
}
