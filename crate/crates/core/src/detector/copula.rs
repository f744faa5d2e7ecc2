//! Gaussian-copula frame sampler for large pixel counts.
//!
//! Exact pattern sampling scales exponentially with mode number, but at
//! full camera scale only first and second moments are measured. This
//! sampler draws integer pixel counts whose marginals match the binned
//! mean/variance exactly (negative binomial for super-Poissonian pixels,
//! Poisson otherwise) and whose correlations approximate the binned
//! covariance through a Gaussian copula. It is an approximation: cumulants
//! beyond second order are not faithful to the underlying Gaussian state,
//! and Pearson correlations carry a small copula bias.

use rand::Rng;
use rand_distr::StandardNormal;
use statrs::function::erf::erf;

use crate::error::{Error, Result};
use crate::exec::{run_shots, ExecMode};
use crate::RMat;

use super::BinnedStats;

/// Marginal CDF table of one pixel; empty means "always zero".
struct Marginal {
    cdf: Vec<f64>,
}

const TAIL_TOL: f64 = 1e-12;
const MAX_COUNT: usize = 100_000;

impl Marginal {
    /// Matches mean `m` and variance `v`: negative binomial when `v > m`,
    /// Poisson otherwise (underdispersion is approximated).
    fn matched(m: f64, v: f64) -> Result<Self> {
        if !(m >= -1e-12) || !v.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "bad pixel moments: mean {m}, variance {v}"
            )));
        }
        if m < 1e-12 {
            return Ok(Self { cdf: Vec::new() });
        }
        let mut pmf_k: f64;
        let mut cdf = Vec::new();
        let mut cum = 0.0;
        if v > m * (1.0 + 1e-9) {
            // Negative binomial: q = 1 − m/v, r = m²/(v−m).
            let q = 1.0 - m / v;
            let r = m * m / (v - m);
            pmf_k = (m / v).powf(r);
            let mut k = 0usize;
            loop {
                cum += pmf_k;
                cdf.push(cum);
                if 1.0 - cum < TAIL_TOL || k >= MAX_COUNT {
                    break;
                }
                pmf_k *= q * (k as f64 + r) / (k as f64 + 1.0);
                k += 1;
            }
        } else {
            pmf_k = (-m).exp();
            let mut k = 0usize;
            loop {
                cum += pmf_k;
                cdf.push(cum);
                if 1.0 - cum < TAIL_TOL || k >= MAX_COUNT {
                    break;
                }
                pmf_k *= m / (k as f64 + 1.0);
                k += 1;
            }
        }
        Ok(Self { cdf })
    }

    fn quantile(&self, u: f64) -> u32 {
        if self.cdf.is_empty() {
            return 0;
        }
        self.cdf.partition_point(|&c| c < u).min(self.cdf.len() - 1) as u32
    }
}

fn normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + erf(x / std::f64::consts::SQRT_2))
}

/// Builds a unit-diagonal positive-definite correlation matrix from the
/// binned covariance, repairing small indefiniteness from the accumulation.
fn correlation_matrix(stats: &BinnedStats) -> Result<RMat> {
    let b = stats.mean.len();
    let mut r = RMat::identity(b, b);
    for i in 0..b {
        for j in 0..b {
            if i == j {
                continue;
            }
            let vi = stats.covariance[(i, i)];
            let vj = stats.covariance[(j, j)];
            if vi > 0.0 && vj > 0.0 {
                r[(i, j)] = (stats.covariance[(i, j)] / (vi * vj).sqrt()).clamp(-0.999, 0.999);
            }
        }
    }
    // Clip negative eigenvalues and restore the unit diagonal.
    let (mut vals, vecs) = crate::linalg::symmetric_eigen(&r)?;
    let mut needs_fix = false;
    for v in vals.iter_mut() {
        if *v < 1e-9 {
            *v = 1e-9;
            needs_fix = true;
        }
    }
    if needs_fix {
        r = &vecs * RMat::from_diagonal(&vals) * vecs.transpose();
        for i in 0..b {
            let d = r[(i, i)].sqrt();
            for j in 0..b {
                r[(i, j)] /= d;
                r[(j, i)] /= d;
            }
        }
        // Symmetrize after the two one-sided scalings.
        r = (&r + r.transpose()) * 0.5;
        for i in 0..b {
            r[(i, i)] = 1.0;
        }
    }
    Ok(r)
}

/// Draws integer photon-count frames from binned pixel statistics via a
/// Gaussian copula. Deterministic for a given seed in both execution modes.
pub fn sample_binned_frames(
    stats: &BinnedStats,
    shots: u64,
    seed: u64,
    mode: ExecMode,
) -> Result<Vec<Vec<u32>>> {
    let b = stats.mean.len();
    if stats.covariance.nrows() != b || stats.covariance.ncols() != b {
        return Err(Error::DimensionMismatch(format!(
            "mean has {b} pixels, covariance is {}x{}",
            stats.covariance.nrows(),
            stats.covariance.ncols()
        )));
    }
    let marginals: Vec<Marginal> = (0..b)
        .map(|i| Marginal::matched(stats.mean[i], stats.covariance[(i, i)]))
        .collect::<Result<_>>()?;
    let corr = correlation_matrix(stats)?;
    let mut chol = nalgebra::Cholesky::new(corr.clone());
    let mut jitter = 1e-10;
    while chol.is_none() && jitter < 1e-4 {
        chol = nalgebra::Cholesky::new(&corr + RMat::identity(b, b) * jitter);
        jitter *= 10.0;
    }
    let l = chol
        .ok_or_else(|| Error::NonConvergence("correlation matrix not factorizable".into()))?
        .l();
    Ok(run_shots(shots, seed, mode, |_, rng| {
        let z = nalgebra::DVector::from_fn(b, |_, _| rng.sample::<f64, _>(StandardNormal));
        let correlated = &l * z;
        (0..b)
            .map(|i| marginals[i].quantile(normal_cdf(correlated[i])))
            .collect()
    }))
}
