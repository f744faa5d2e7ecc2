//! In-crate eigen/exponential kernels for Hermitian matrices.
//!
//! The general-purpose symmetric eigensolver in the linear-algebra
//! dependency miscomputes eigenvectors for certain structured matrices with
//! high-multiplicity degenerate spectra (two-band coupling blocks of the
//! form `[[zI, kI], [kI, −zI]]` are an observed failure case, returning an
//! orthonormal basis that does not diagonalize the input). Propagation and
//! mode decomposition hit exactly those structures, so everything
//! correctness-critical routes through the cyclic Jacobi solvers here
//! (unconditionally stable, quadratically convergent) and through a
//! scaling-and-squaring matrix exponential that needs no eigenbasis.

use crate::error::{Error, Result};
use crate::{C64, CMat, RMat, RVec};

const MAX_SWEEPS: usize = 64;

/// Eigendecomposition `H = V diag(λ) V†` of a Hermitian matrix by cyclic
/// Jacobi rotations. Returns eigenvalues (ascending) and the matching
/// eigenvector columns.
pub fn hermitian_eigen(h: &CMat) -> Result<(RVec, CMat)> {
    let n = h.nrows();
    if h.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix is not square",
            n,
            h.ncols()
        )));
    }
    let herm_residual = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| (h[(i, j)] - h[(j, i)].conj()).norm())
        .fold(0.0_f64, f64::max);
    let scale = h.iter().map(|z| z.norm()).fold(0.0_f64, f64::max);
    if herm_residual > 1e-10 * scale.max(1.0) {
        return Err(Error::NotSymmetric {
            residual: herm_residual,
            tol: 1e-10 * scale.max(1.0),
        });
    }
    let mut a = h.clone();
    let mut v = CMat::identity(n, n);
    let tol = 1e-15 * scale.max(f64::MIN_POSITIVE);
    for _ in 0..MAX_SWEEPS {
        let off = (0..n)
            .flat_map(|p| (p + 1..n).map(move |q| (p, q)))
            .map(|(p, q)| a[(p, q)].norm())
            .fold(0.0_f64, f64::max);
        if off <= tol {
            return Ok(sorted_hermitian(a, v));
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq.norm() <= tol {
                    continue;
                }
                // Phase step: rotate column/row q so the pivot is real
                // positive, then a real Jacobi rotation annihilates it.
                let w = C64::from_polar(1.0, -apq.arg());
                for i in 0..n {
                    a[(i, q)] *= w;
                    v[(i, q)] *= w;
                }
                for j in 0..n {
                    a[(q, j)] *= w.conj();
                }
                let absa = a[(p, q)].re;
                let (c, s) = jacobi_angles(a[(p, p)].re, a[(q, q)].re, absa);
                for i in 0..n {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = aip * c - aiq * s;
                    a[(i, q)] = aip * s + aiq * c;
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip * c - viq * s;
                    v[(i, q)] = vip * s + viq * c;
                }
                for j in 0..n {
                    let apj = a[(p, j)];
                    let aqj = a[(q, j)];
                    a[(p, j)] = apj * c - aqj * s;
                    a[(q, j)] = apj * s + aqj * c;
                }
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
            }
        }
    }
    Err(Error::NonConvergence(
        "Jacobi eigensolver did not converge".into(),
    ))
}

/// Eigendecomposition of a real symmetric matrix (cyclic Jacobi).
pub fn symmetric_eigen(h: &RMat) -> Result<(RVec, RMat)> {
    let n = h.nrows();
    let hc = CMat::from_fn(n, h.ncols(), |i, j| C64::new(h[(i, j)], 0.0));
    // Real input keeps every phase step at ±1, so the eigenvectors stay
    // real exactly.
    let (vals, vecs) = hermitian_eigen(&hc)?;
    Ok((vals, RMat::from_fn(n, n, |i, j| vecs[(i, j)].re)))
}

fn jacobi_angles(app: f64, aqq: f64, apq: f64) -> (f64, f64) {
    let theta = (aqq - app) / (2.0 * apq);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let c = 1.0 / (t * t + 1.0).sqrt();
    (c, t * c)
}

fn sorted_hermitian(a: CMat, v: CMat) -> (RVec, CMat) {
    let n = a.nrows();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).unwrap());
    let vals = RVec::from_fn(n, |k, _| a[(idx[k], idx[k])].re);
    let vecs = CMat::from_fn(n, n, |i, k| v[(i, idx[k])]);
    (vals, vecs)
}

/// Matrix exponential `exp(A)` by scaling and squaring with a Taylor core.
///
/// The argument is scaled to 1-norm ≤ 1/4, the series is summed to machine
/// precision, and the result squared back up.
pub fn expm(a: &CMat) -> CMat {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm needs a square matrix");
    let norm1 = (0..n)
        .map(|j| (0..n).map(|i| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0_f64, f64::max);
    let squarings = if norm1 > 0.25 {
        (norm1 / 0.25).log2().ceil() as u32
    } else {
        0
    };
    let b = a.map(|z| z / (2.0_f64.powi(squarings as i32)));
    let mut term = CMat::identity(n, n);
    let mut sum = CMat::identity(n, n);
    for j in 1..=40u32 {
        term = (&term * &b) / C64::new(j as f64, 0.0);
        sum += &term;
        let t = term.iter().map(|z| z.norm()).fold(0.0_f64, f64::max);
        if t < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}
