//! Closed-form photon-number moments of a Gaussian state.
//!
//! All formulas are expressed through the normal-ordered quadrants
//! `V_ij = ⟨a_i† a_j⟩` (Hermitian) and `U_ij = ⟨a_i a_j⟩` (symmetric),
//! evaluated in the gauge where every `U_ii` is real and nonnegative
//! (fixed by local phase rotations, which leave photon statistics
//! untouched). Mixed formulas assume ascending mode order; the entry point
//! canonicalizes indices first.

use crate::error::{Error, Result};
use crate::gaussian::CovarianceMatrix;
use crate::{CMat, RMat, RVec};

const PHYSICALITY_TOL: f64 = 1e-10;

/// Mean photon number per mode, `⟨n_i⟩ = V_ii`.
pub fn mean_photons(sigma: &CovarianceMatrix) -> Result<RVec> {
    let v = sigma.mean_photons();
    for i in 0..v.len() {
        if v[i] < -PHYSICALITY_TOL {
            return Err(Error::Unphysical(format!(
                "negative mean photon number {} in mode {i}",
                v[i]
            )));
        }
    }
    Ok(v)
}

/// Photon-number covariance matrix:
/// `Cov(n_i, n_j) = |U_ij|² + |V_ij|²` for `i ≠ j`,
/// `Var(n_i) = |U_ii|² + ⟨n_i⟩² + ⟨n_i⟩`.
pub fn photon_covariance(sigma: &CovarianceMatrix) -> RMat {
    let m = sigma.modes();
    let (v, u) = quadrants(sigma);
    let mut out = RMat::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            if i == j {
                let n = v[(i, i)].re;
                out[(i, i)] = u[(i, i)].norm_sqr() + n * n + n;
            } else {
                out[(i, j)] = u[(i, j)].norm_sqr() + v[(i, j)].norm_sqr();
            }
        }
    }
    out
}

/// Normal-ordered quadrants with `V_ij = ⟨a_i† a_j⟩`, `U_ij = ⟨a_i a_j⟩`.
fn quadrants(sigma: &CovarianceMatrix) -> (CMat, CMat) {
    (sigma.v_quadrant().conjugate(), sigma.u_quadrant())
}

/// Rotates each listed mode so its `U_ii` becomes real and nonnegative.
fn fix_gauge(sigma: &CovarianceMatrix, modes: &[usize]) -> CovarianceMatrix {
    let mut s = sigma.clone();
    for &i in modes {
        let uii = s.u_quadrant()[(i, i)];
        if uii.norm() > 1e-14 {
            s = s
                .rotate_mode_phase(i, -uii.arg() / 2.0)
                .expect("gauge rotation cannot fail on valid modes");
        }
    }
    s
}

/// Moment `⟨Π_i n_i^{p_i}⟩` for the closed-form family: exponents ≤ 2 on at
/// most three modes, at most two modes when any exponent is 2.
///
/// `pattern` has one entry per mode of `sigma`.
pub fn photon_moment(sigma: &CovarianceMatrix, pattern: &[usize]) -> Result<f64> {
    let m = sigma.modes();
    if pattern.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "pattern has {} entries for an {m}-mode state",
            pattern.len()
        )));
    }
    // Canonicalize: involved modes in ascending order with their exponents.
    let involved: Vec<(usize, usize)> = pattern
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 0)
        .map(|(i, &p)| (i, p))
        .collect();
    if involved.is_empty() {
        return Ok(1.0);
    }
    if involved.iter().any(|&(_, p)| p > 2) {
        return Err(Error::UnsupportedPattern(format!(
            "exponents above 2 not in the closed-form family: {pattern:?}"
        )));
    }
    let modes: Vec<usize> = involved.iter().map(|&(i, _)| i).collect();
    let s = fix_gauge(sigma, &modes);
    let (v, u) = quadrants(&s);
    let n = |i: usize| v[(i, i)].re;
    let nn = |i: usize, j: usize| {
        u[(i, j)].norm_sqr() + v[(i, j)].norm_sqr() + n(i) * n(j)
    };

    let value = match involved.as_slice() {
        [(i, 1)] => n(*i),
        [(i, 2)] => {
            let ni = n(*i);
            u[(*i, *i)].norm_sqr() + 2.0 * ni * ni + ni
        }
        [(i, 1), (j, 1)] => nn(*i, *j),
        [(i, 1), (j, 1), (k, 1)] => {
            let (i, j, k) = (*i, *j, *k);
            let interference = u[(i, j)].conj() * (v[(i, k)] * u[(j, k)] + v[(j, k)] * u[(i, k)])
                + v[(i, j)] * (u[(i, k)].conj() * u[(j, k)] + v[(i, k)].conj() * v[(j, k)]);
            n(i) * nn(j, k) + n(j) * nn(i, k) + n(k) * nn(i, j) - 2.0 * n(i) * n(j) * n(k)
                + 2.0 * interference.re
        }
        [(i, 2), (j, 1)] => moment_21(&v, &u, *i, *j),
        [(i, 1), (j, 2)] => moment_12(&v, &u, *i, *j),
        [(i, 2), (j, 2)] => {
            let (i, j) = (*i, *j);
            let (ni, nj) = (n(i), n(j));
            let uii = u[(i, i)].re;
            let ujj = u[(j, j)].re;
            let (uij, vij) = (u[(i, j)], v[(i, j)]);
            let m21 = moment_21(&v, &u, i, j);
            let m12 = moment_12(&v, &u, i, j);
            m21 * (4.0 * nj + 1.0) + m12 * (4.0 * ni + 1.0)
                - nn(i, j) * (4.0 * ni + 1.0) * (4.0 * nj + 1.0)
                + 4.0 * (nn(i, j) - ni * nj).powi(2)
                + (2.0 * ni * ni - uii * uii) * (2.0 * nj * nj - ujj * ujj)
                + 2.0 * uii * ujj * 2.0 * (vij * vij + uij * uij).re
                + 8.0 * uij.norm_sqr() * vij.norm_sqr()
        }
        _ => {
            return Err(Error::UnsupportedPattern(format!(
                "pattern {pattern:?} outside the closed-form family"
            )))
        }
    };
    Ok(value)
}

/// `⟨n_i² n_j⟩` for `i < j` in the real-`U_ii` gauge.
fn moment_21(v: &CMat, u: &CMat, i: usize, j: usize) -> f64 {
    let ni = v[(i, i)].re;
    let nj = v[(j, j)].re;
    let nn = u[(i, j)].norm_sqr() + v[(i, j)].norm_sqr() + ni * nj;
    let uii = u[(i, i)].re;
    let cross = (u[(i, j)].conj() * v[(i, j)] + u[(i, j)] * v[(i, j)].conj()).re;
    nn * (4.0 * ni + 1.0) + nj * (uii * uii - 2.0 * ni * ni) + 2.0 * uii * cross
}

/// `⟨n_i n_j²⟩` for `i < j` in the real-`U_ii` gauge.
fn moment_12(v: &CMat, u: &CMat, i: usize, j: usize) -> f64 {
    let ni = v[(i, i)].re;
    let nj = v[(j, j)].re;
    let nn = u[(i, j)].norm_sqr() + v[(i, j)].norm_sqr() + ni * nj;
    let ujj = u[(j, j)].re;
    let cross = (u[(i, j)] * v[(i, j)] + (u[(i, j)] * v[(i, j)]).conj()).re;
    nn * (4.0 * nj + 1.0) + ni * (ujj * ujj - 2.0 * nj * nj) + 2.0 * ujj * cross
}
