//! Closed-form counts: `D(m, n, k)`, seed-block freedom and moduli dimensions.
//!
//! `m` is reduced into `[0, 2n)` before dispatch and `gcd(0, n) = n`.

use std::fmt;

use num_integer::Integer;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::selfdual::check_parity;

/// `gcd(|m|, n)` with `gcd(0, n) = n`.
pub fn gcd_mn(m: i64, n: usize) -> usize {
    (m.unsigned_abs() as usize).gcd(&n)
}

/// Representative of `m` in `[0, 2n)`.
pub fn normalize_shift(m: i64, n: usize) -> i64 {
    m.rem_euclid(2 * n as i64)
}

fn binom2(x: i64) -> i64 {
    x * (x - 1) / 2
}

/// `D(m, n, k)`: how many vertices of the orbit of `A_1` under `G` lie among
/// the `k` vertices spanning `B_{1+m}`.
pub fn drama(m: i64, n: usize, k: usize) -> usize {
    let m = normalize_shift(m, n);
    let g = gcd_mn(m, n);
    if (m as usize / g) % 2 == 1 {
        2 * ((k + g) / (2 * g))
    } else {
        2 * (k / (2 * g)) + 1
    }
}

/// Brute-force count of `j in 0..r` with `1 + 2jg` in `{1+m+e : |e| <= k-1,
/// e = k-1 (mod 2)}` modulo `2n`.
pub fn drama_oracle(m: i64, n: usize, k: usize) -> usize {
    let two_n = 2 * n as i64;
    let m = normalize_shift(m, n);
    let g = gcd_mn(m, n) as i64;
    let r = n as i64 / g;
    let k = k as i64;
    let window: Vec<i64> = (0..k)
        .map(|j| (m - (k - 1) + 2 * j).rem_euclid(two_n))
        .collect();
    (0..r)
        .filter(|j| window.contains(&(2 * j * g).rem_euclid(two_n)))
        .count()
}

/// Free parameters when choosing the seed block `A_1, ..., A_{2g-1}`:
/// `g (k + D) / 2`, or `kn/2` when `m = n`.
pub fn dof_seed(m: i64, n: usize, k: usize) -> Result<usize> {
    let mm = normalize_shift(m, n);
    let total = if mm == n as i64 {
        k * n
    } else {
        gcd_mn(mm, n) * (k + drama(mm, n, k))
    };
    if total % 2 != 0 {
        return Err(Error::KernelDefect(format!(
            "seed freedom {total}/2 is not an integer for (m, n, k) = ({m}, {n}, {k})"
        )));
    }
    Ok(total / 2)
}

/// Dimension of the isometry algebra of `Omega_{2f} (+) I_{k+1-2f}`.
pub fn stabilizer_r2(f: usize, k: usize) -> i64 {
    let (f, k) = (f as i64, k as i64);
    4 * f * f - 2 * k * f + binom2(k + 1)
}

/// Dimension of the isometry algebra of a form with `s` blocks at a third of
/// a turn plus an identity block.
pub fn stabilizer_r3(s: usize, k: usize) -> i64 {
    let (s, k) = (s as i64, k as i64);
    3 * s * s - (2 * k + 1) * s + binom2(k + 1)
}

/// `floor(k/2)` for `r = 2`, `C(floor(k/2)+2, 2) - 1` for `r = 3`.
pub fn component_count(m: i64, n: usize, k: usize) -> Result<usize> {
    match n / gcd_mn(normalize_shift(m, n), n) {
        2 => Ok(k / 2),
        3 => {
            let h = k / 2 + 2;
            Ok(h * (h - 1) / 2 - 1)
        }
        r => Err(Error::Precondition(format!(
            "component counts are known only for r = 2, 3 (got r = {r})"
        ))),
    }
}

/// Which closed form produced a [`DimReport`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DimSource {
    /// `m = 0`, `k` odd: `(k+1)(n-k-2)/2`.
    ShiftZero,
    /// `m = n`: `k(n-k-1)/2`.
    Symmetric,
    /// `gcd(m, n) = 1`: only the regular class.
    Coprime,
    /// `n = 2 gcd(m, n)`.
    OrderTwo,
    /// `n = 3 gcd(m, n)`.
    OrderThree,
    /// Plane polygons: `gcd(m, n) - 1`.
    Plane,
    /// `(k+4)`-gons, `k` odd: `gcd(m, k+4) - 1`.
    KPlusFour,
    /// No closed form applies.
    Unknown,
}

impl fmt::Display for DimSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::ShiftZero => "shift-zero",
            Self::Symmetric => "symmetric",
            Self::Coprime => "coprime",
            Self::OrderTwo => "order-two",
            Self::OrderThree => "order-three",
            Self::Plane => "plane",
            Self::KPlusFour => "k-plus-four",
            Self::Unknown => "unknown",
        };
        f.write_str(s)
    }
}

/// One component of the moduli space.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DimComponent {
    pub label: String,
    pub dim: i64,
}

/// Closed-form dimensions of `M_{m,n,k}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DimReport {
    pub m: i64,
    pub n: usize,
    pub k: usize,
    pub source: DimSource,
    pub components: Vec<DimComponent>,
}

impl DimReport {
    pub fn is_known(&self) -> bool {
        self.source != DimSource::Unknown
    }

    /// Largest component; the first one on ties.
    pub fn largest(&self) -> Option<&DimComponent> {
        self.components
            .iter()
            .fold(None, |best: Option<&DimComponent>, c| match best {
                Some(b) if b.dim >= c.dim => Some(b),
                _ => Some(c),
            })
    }
}

fn single(label: &str, dim: i64) -> Vec<DimComponent> {
    vec![DimComponent {
        label: label.to_string(),
        dim,
    }]
}

/// Dispatches `(m, n, k)` to the applicable closed form.
pub fn moduli_dim(m: i64, n: usize, k: usize) -> Result<DimReport> {
    check_parity(m, k)?;
    if k == 0 || n < k + 3 {
        return Err(Error::Precondition(format!(
            "need k >= 1 and n >= k+3, got n = {n}, k = {k}"
        )));
    }
    let mm = normalize_shift(m, n);
    let g = gcd_mn(mm, n);
    let r = n / g;
    let (ni, ki) = (n as i64, k as i64);
    let report = |source, components| DimReport {
        m,
        n,
        k,
        source,
        components,
    };
    if mm == 0 {
        // parity forces k odd
        return Ok(report(
            DimSource::ShiftZero,
            single("symplectic", (ki + 1) * (ni - ki - 2) / 2),
        ));
    }
    if mm == ni {
        return Ok(report(
            DimSource::Symmetric,
            single("identity", ki * (ni - ki - 1) / 2),
        ));
    }
    if g == 1 {
        return Ok(report(DimSource::Coprime, single("regular", 0)));
    }
    // overlaps r = 3 when 3 | n; the tangent-space estimate sides with this route
    if k % 2 == 1 && n == k + 4 && mm < 2 * ni {
        return Ok(report(DimSource::KPlusFour, single("gale", g as i64 - 1)));
    }
    let seed = dof_seed(mm, n, k)? as i64;
    if r == 2 {
        let comps = (1..=k / 2)
            .map(|f| DimComponent {
                label: format!("f={f}"),
                dim: seed - stabilizer_r2(f, k),
            })
            .filter(|c| c.dim >= 0)
            .collect();
        return Ok(report(DimSource::OrderTwo, comps));
    }
    if r == 3 {
        let mut comps = Vec::new();
        for s in 1..=k / 2 {
            if seed < stabilizer_r3(s, k) {
                continue;
            }
            for s1 in (0..=s).rev() {
                comps.push(DimComponent {
                    label: format!("s=({s1},{})", s - s1),
                    dim: seed - stabilizer_r3(s, k),
                });
            }
        }
        return Ok(report(DimSource::OrderThree, comps));
    }
    if k == 2 && mm <= ni && n != 2 * mm as usize {
        return Ok(report(DimSource::Plane, single("plane", g as i64 - 1)));
    }
    Ok(report(DimSource::Unknown, Vec::new()))
}

/// Largest-component closed forms stated for `r = 2` (via `f_0`, split on
/// `k mod 4`) and `r = 3` (at `s = ceil(k/3)`, split on `k mod 3`).
pub fn largest_closed_form(m: i64, n: usize, k: usize) -> Option<i64> {
    let mm = normalize_shift(m, n);
    let g = gcd_mn(mm, n);
    let (ni, ki) = (n as i64, k as i64);
    match n / g {
        2 if mm < ni && k >= 2 => {
            let small = ki < mm;
            let base = if small { ni * ki } else { ni * (ki + 2) };
            Some(match k % 4 {
                0 if small => ki * (ni - ki - 2) / 4,
                0 => (ki + 2) * (ni - ki) / 4,
                1 | 3 => (base - (ki + 1) * (ki + 1)) / 4,
                _ => (base - (ki * ki + 2 * ki + 4)) / 4,
            })
        }
        3 if k >= 2 => {
            let d = drama(mm, n, k) as i64;
            Some(match k % 3 {
                1 => (ni * (ki + d) - (ki * ki + ki + 4)) / 6,
                _ => (ni * (ki + d) - ki * (ki + 1)) / 6,
            })
        }
        _ => None,
    }
}
