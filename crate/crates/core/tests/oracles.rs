use selfdual::formulas::{drama, drama_oracle, gcd_mn, moduli_dim, stabilizer_r2, stabilizer_r3, DimSource};
use selfdual::numeric::{Complex64, GaussRat, DEFAULT_TOL};
use selfdual::selfdual::BilinearForm;

fn valid_shifts(n: usize, k: usize) -> impl Iterator<Item = i64> {
    (0..=n as i64).filter(move |m| (m - k as i64 + 1).rem_euclid(2) == 0)
}

#[test]
fn drama_matches_brute_force() {
    let mut cases = 0;
    for k in 1..=12usize {
        for n in k + 3..=40 {
            for m in valid_shifts(n, k) {
                assert_eq!(drama(m, n, k), drama_oracle(m, n, k), "({m},{n},{k})");
                cases += 1;
            }
        }
    }
    assert!(cases > 2000);
}

/// `D - 1 < k/g < D + 1` unless `k/g` is an integer of the wrong parity.
#[test]
fn drama_sandwich() {
    for k in 1..=12usize {
        for n in k + 3..=40 {
            for m in valid_shifts(n, k) {
                let g = gcd_mn(m, n);
                let d = drama(m, n, k) as f64;
                let q = k as f64 / g as f64;
                if k % g == 0 && (k / g) % 2 != (d as usize) % 2 {
                    continue;
                }
                assert!(d - 1.0 < q && q < d + 1.0, "({m},{n},{k}): D = {d}, k/g = {q}");
            }
        }
    }
}

fn binom2(x: usize) -> i64 {
    (x * (x - 1) / 2) as i64
}

#[test]
fn stabilizers_of_order_two_forms() {
    for k in 1..=9usize {
        for f in 1..=k / 2 {
            let want = 4 * (f * f) as i64 - 2 * (k * f) as i64 + binom2(k + 1);
            assert_eq!(stabilizer_r2(f, k), want);
            let form = BilinearForm::<GaussRat>::symplectic(f, k + 1).unwrap();
            assert_eq!(form.stabilizer_dim(0.0) as i64, want, "k={k} f={f}");
        }
    }
}

#[test]
fn stabilizers_of_order_three_forms() {
    for k in 1..=9usize {
        for s in 1..=k / 2 {
            let want = 3 * (s * s) as i64 - ((2 * k + 1) * s) as i64 + binom2(k + 1);
            assert_eq!(stabilizer_r3(s, k), want);
            for s1 in 0..=s {
                let mut angles = vec![(1, 3); s1];
                angles.extend(vec![(2, 3); s - s1]);
                let exact = BilinearForm::<GaussRat>::canonical(&angles, k + 1).unwrap();
                assert_eq!(exact.stabilizer_dim(0.0) as i64, want, "k={k} s=({s1},{})", s - s1);
                let approx = BilinearForm::<Complex64>::canonical(&angles, k + 1).unwrap();
                assert_eq!(approx.stabilizer_dim(DEFAULT_TOL) as i64, want);
            }
        }
    }
}

/// The `m = n` and `m = 0` counts are exchanged by `k -> n - k - 2`.
#[test]
fn symmetric_and_shift_zero_counts_are_gale_partners() {
    for n in 4..=40usize {
        for k in 1..=n - 3 {
            let w = n - k - 2;
            assert_eq!(k * (n - k - 1), (w + 1) * (n - w - 2));
            if (n + k + 1) % 2 != 0 || w % 2 == 0 || w < 1 {
                continue;
            }
            let sym = moduli_dim(n as i64, n, k).unwrap();
            let zero = moduli_dim(0, n, w).unwrap();
            assert_eq!(sym.source, DimSource::Symmetric);
            assert_eq!(zero.source, DimSource::ShiftZero);
            assert_eq!(sym.largest().unwrap().dim, zero.largest().unwrap().dim, "n={n} k={k}");
        }
    }
}

#[test]
fn twelve_gons_in_three_space() {
    for (m, want) in [(4, 4), (6, 5), (8, 6), (12, 12), (0, 14)] {
        assert_eq!(moduli_dim(m, 12, 3).unwrap().largest().unwrap().dim, want, "m={m}");
    }
}
