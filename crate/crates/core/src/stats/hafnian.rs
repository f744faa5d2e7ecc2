//! Hafnian of a symmetric complex matrix.
//!
//! Uses the inclusion–exclusion power-trace algorithm: for an n×n matrix
//! (n = 2m even),
//!
//! `Haf(A) = Σ_{S ⊆ pairs} (−1)^{m−|S|} [z^m] exp( Σ_j tr((X A_S)^j) z^j / (2j) )`
//!
//! where pairs are index couples (2k, 2k+1), `A_S` the submatrix on the
//! pairs in `S`, and `X` the within-pair swap. Cost O(2^{n/2} n³ / 8) —
//! exponential, as it must be, but far faster than matching enumeration.

use crate::error::{Error, Result};
use crate::{C64, CMat};

const SYMMETRY_TOL: f64 = 1e-10;

/// Hafnian: the perfect-matching sum `Σ_M Π_{(i,j)∈M} A_ij`.
///
/// Conventions: 0×0 → 1, odd size → 0. Input must be symmetric to within
/// 1e-10 (relative).
pub fn hafnian(a: &CMat) -> Result<C64> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "hafnian needs a square matrix, got {}x{}",
            n,
            a.ncols()
        )));
    }
    let scale = a.iter().map(|z| z.norm()).fold(1.0_f64, f64::max);
    let asym = (0..n)
        .flat_map(|r| (0..r).map(move |c| (r, c)))
        .map(|(r, c)| (a[(r, c)] - a[(c, r)]).norm())
        .fold(0.0_f64, f64::max);
    if asym / scale > SYMMETRY_TOL {
        return Err(Error::NotSymmetric {
            residual: asym / scale,
            tol: SYMMETRY_TOL,
        });
    }
    if n == 0 {
        return Ok(C64::new(1.0, 0.0));
    }
    if n % 2 == 1 {
        return Ok(C64::new(0.0, 0.0));
    }
    let m = n / 2;

    let mut total = C64::new(0.0, 0.0);
    for mask in 1u64..(1 << m) {
        let pairs: Vec<usize> = (0..m).filter(|k| mask >> k & 1 == 1).collect();
        let s = pairs.len();
        let dim = 2 * s;
        // B = X A_S: X swaps the two rows of each pair.
        let mut b = CMat::zeros(dim, dim);
        for (bi, &pi) in pairs.iter().enumerate() {
            for (bj, &pj) in pairs.iter().enumerate() {
                for di in 0..2 {
                    for dj in 0..2 {
                        // Row swap within the pair: (2bi+di) ← original row
                        // 2pi + (1−di).
                        b[(2 * bi + di, 2 * bj + dj)] = a[(2 * pi + (1 - di), 2 * pj + dj)];
                    }
                }
            }
        }
        // Power traces tr(B^j), j = 1..m.
        let mut traces = vec![C64::new(0.0, 0.0); m + 1];
        let mut p = b.clone();
        traces[1] = p.trace();
        for j in 2..=m {
            p = &p * &b;
            traces[j] = p.trace();
        }
        // f(z) = Σ_j traces[j] z^j / (2j); coefficient m of exp(f) via the
        // standard series recurrence e_k = (1/k) Σ_j j f_j e_{k−j}.
        let mut f = vec![C64::new(0.0, 0.0); m + 1];
        for j in 1..=m {
            f[j] = traces[j] / (2.0 * j as f64);
        }
        let mut e = vec![C64::new(0.0, 0.0); m + 1];
        e[0] = C64::new(1.0, 0.0);
        for k in 1..=m {
            let mut acc = C64::new(0.0, 0.0);
            for j in 1..=k {
                acc += f[j] * e[k - j] * j as f64;
            }
            e[k] = acc / k as f64;
        }
        let sign = if (m - s) % 2 == 0 { 1.0 } else { -1.0 };
        total += e[m] * sign;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use slp_oracle::hafnian_pairing;

    fn random_symmetric(n: usize, rng: &mut impl Rng) -> CMat {
        let mut a = CMat::zeros(n, n);
        for r in 0..n {
            for c in r..n {
                let z = C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
                a[(r, c)] = z;
                a[(c, r)] = z;
            }
        }
        a
    }

    #[test]
    fn conventions() {
        assert_eq!(hafnian(&CMat::zeros(0, 0)).unwrap(), C64::new(1.0, 0.0));
        let odd = CMat::from_element(3, 3, C64::new(1.0, 0.0));
        assert_eq!(hafnian(&odd).unwrap(), C64::new(0.0, 0.0));
    }

    #[test]
    fn two_by_two_is_off_diagonal() {
        let mut a = CMat::zeros(2, 2);
        a[(0, 1)] = C64::new(2.5, -1.0);
        a[(1, 0)] = a[(0, 1)];
        assert_eq!(hafnian(&a).unwrap(), C64::new(2.5, -1.0));
    }

    #[test]
    fn all_ones_4x4_is_3() {
        let a = CMat::from_element(4, 4, C64::new(1.0, 0.0));
        let h = hafnian(&a).unwrap();
        assert_abs_diff_eq!(h.re, 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(h.im, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn asymmetric_rejected() {
        let mut a = CMat::zeros(2, 2);
        a[(0, 1)] = C64::new(1.0, 0.0);
        assert!(hafnian(&a).is_err());
    }

    #[test]
    fn matches_pairing_oracle() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(42);
        for n in [2, 4, 6, 8, 10] {
            for _ in 0..3 {
                let a = random_symmetric(n, &mut rng);
                let fast = hafnian(&a).unwrap();
                let slow = hafnian_pairing(&a);
                let rel = (fast - slow).norm() / slow.norm().max(1e-30);
                assert!(rel < 1e-9, "n = {n}: {fast} vs {slow}");
            }
        }
    }
}
