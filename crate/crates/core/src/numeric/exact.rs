use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::Value;

use super::{Matrix, Scalar};
use crate::error::{Error, Result};

/// Exact Gaussian rational `re + i im` with `re, im` in Q.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GaussRat {
    re: BigRational,
    im: BigRational,
}

impl GaussRat {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Self { re, im }
    }

    pub fn re(&self) -> &BigRational {
        &self.re
    }

    pub fn im(&self) -> &BigRational {
        &self.im
    }

    fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }
}

impl fmt::Debug for GaussRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else {
            write!(f, "({}+{}i)", self.re, self.im)
        }
    }
}

impl Add for GaussRat {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            re: self.re + o.re,
            im: self.im + o.im,
        }
    }
}

impl Sub for GaussRat {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self {
            re: self.re - o.re,
            im: self.im - o.im,
        }
    }
}

impl Mul for GaussRat {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        if self.im.is_zero() && o.im.is_zero() {
            return Self {
                re: self.re * o.re,
                im: BigRational::zero(),
            };
        }
        Self {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }
}

impl Div for GaussRat {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        assert!(!o.is_zero(), "division by exact zero");
        if o.im.is_zero() {
            return Self {
                re: self.re / &o.re,
                im: self.im / o.re,
            };
        }
        let d = o.norm_sqr();
        let conj = Self {
            re: o.re,
            im: -o.im,
        };
        let num = self * conj;
        Self {
            re: num.re / &d,
            im: num.im / d,
        }
    }
}

impl Neg for GaussRat {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            re: -self.re,
            im: -self.im,
        }
    }
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn parse_rational(v: &Value) -> Result<BigRational> {
    match v {
        Value::String(s) => {
            let s = s.trim();
            let (n, d) = match s.split_once('/') {
                Some((n, d)) => (n.trim(), d.trim()),
                None => (s, "1"),
            };
            let n: BigInt = n
                .parse()
                .map_err(|_| Error::Parse(format!("bad rational numerator in {s:?}")))?;
            let d: BigInt = d
                .parse()
                .map_err(|_| Error::Parse(format!("bad rational denominator in {s:?}")))?;
            if d.is_zero() {
                return Err(Error::Parse(format!("zero denominator in {s:?}")));
            }
            Ok(BigRational::new(n, d))
        }
        Value::Number(n) if n.is_i64() => Ok(BigRational::from_integer(BigInt::from(
            n.as_i64().expect("checked"),
        ))),
        other => Err(Error::Parse(format!(
            "expected a \"p/q\" string, got {other}"
        ))),
    }
}

/// Reduced row echelon form; returns the pivot columns.
fn rref(m: &Matrix<GaussRat>) -> (Matrix<GaussRat>, Vec<usize>) {
    let mut a = m.clone();
    let (rows, cols) = (a.rows(), a.cols());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[(i, c)].is_zero()) else {
            continue;
        };
        a.swap_rows(r, p);
        let inv = GaussRat::one() / a[(r, c)].clone();
        for j in c..cols {
            if !a[(r, j)].is_zero() {
                a[(r, j)] = a[(r, j)].clone() * inv.clone();
            }
        }
        for i in 0..rows {
            if i == r || a[(i, c)].is_zero() {
                continue;
            }
            let factor = a[(i, c)].clone();
            for j in c..cols {
                let t = a[(r, j)].clone();
                if !t.is_zero() {
                    a[(i, j)] = a[(i, j)].clone() - factor.clone() * t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (a, pivots)
}

impl Scalar for GaussRat {
    const EXACT: bool = true;
    const NAME: &'static str = "exact";

    fn zero() -> Self {
        Self {
            re: BigRational::zero(),
            im: BigRational::zero(),
        }
    }

    fn one() -> Self {
        Self {
            re: BigRational::one(),
            im: BigRational::zero(),
        }
    }

    fn from_i64(v: i64) -> Self {
        Self {
            re: rat(v, 1),
            im: BigRational::zero(),
        }
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Self {
            re: rat(num, den),
            im: BigRational::zero(),
        }
    }

    fn imag_unit() -> Self {
        Self {
            re: BigRational::zero(),
            im: BigRational::one(),
        }
    }

    fn from_c64(z: Complex64) -> Self {
        let conv = |x: f64| BigRational::from_float(x).unwrap_or_else(BigRational::zero);
        Self {
            re: conv(z.re),
            im: conv(z.im),
        }
    }

    fn root_of_unity(num: i64, den: i64) -> Option<Self> {
        let g = num.gcd(&den).max(1);
        let (a, d) = (num.rem_euclid(den) / g, den / g);
        match (a, d) {
            (_, 1) => Some(Self::one()),
            (1, 2) => Some(Self::from_i64(-1)),
            (1, 4) => Some(Self::imag_unit()),
            (3, 4) => Some(-Self::imag_unit()),
            _ => None,
        }
    }

    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    fn modulus(&self) -> f64 {
        let c = self.to_c64();
        c.norm()
    }

    fn conj(&self) -> Self {
        Self {
            re: self.re.clone(),
            im: -self.im.clone(),
        }
    }

    fn to_c64(&self) -> Complex64 {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }

    fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    fn rank(m: &Matrix<Self>, _tol: f64) -> usize {
        rref(m).1.len()
    }

    fn nullspace(m: &Matrix<Self>, _tol: f64) -> Vec<Vec<Self>> {
        let (r, pivots) = rref(m);
        let cols = m.cols();
        let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
        free.into_iter()
            .map(|f| {
                let mut v = vec![Self::zero(); cols];
                v[f] = Self::one();
                for (i, &p) in pivots.iter().enumerate() {
                    v[p] = -r[(i, f)].clone();
                }
                Self::normalize(&mut v);
                v
            })
            .collect()
    }

    fn normalize(v: &mut [Self]) {
        if v.iter().all(Self::is_zero) {
            return;
        }
        let lcm = v
            .iter()
            .flat_map(|x| [x.re.denom(), x.im.denom()])
            .fold(BigInt::one(), |acc, d| acc.lcm(d));
        let scale = BigRational::from_integer(lcm);
        for x in v.iter_mut() {
            x.re = &x.re * &scale;
            x.im = &x.im * &scale;
        }
        let g = v
            .iter()
            .flat_map(|x| [x.re.numer().clone(), x.im.numer().clone()])
            .fold(BigInt::zero(), |acc, n| acc.gcd(&n));
        if !g.is_zero() && !g.is_one() {
            let g = BigRational::from_integer(g);
            for x in v.iter_mut() {
                x.re = &x.re / &g;
                x.im = &x.im / &g;
            }
        }
        let lead = v.iter().find(|x| !x.is_zero()).expect("nonzero vector");
        if lead.re.is_negative() || (lead.re.is_zero() && lead.im.is_negative()) {
            for x in v.iter_mut() {
                *x = -x.clone();
            }
        }
    }

    fn encode(&self) -> [Value; 2] {
        let s = |q: &BigRational| Value::from(format!("{}/{}", q.numer(), q.denom()));
        [s(&self.re), s(&self.im)]
    }

    fn decode(re: &Value, im: &Value) -> Result<Self> {
        Ok(Self {
            re: parse_rational(re)?,
            im: parse_rational(im)?,
        })
    }
}
