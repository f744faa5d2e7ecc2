//! Spectrometer binning with point-spread blur.
//!
//! Photon means and covariances computed on the fine frequency grid are
//! accumulated into camera pixels. A photon arriving at spectral position
//! `ω` lands on pixel `b` with probability given by a Gaussian point-spread
//! function of width `psf_sigma` (in pixel units) integrated over the pixel;
//! weights are renormalized so every photon lands somewhere, which keeps
//! the total mean photon number exactly conserved. The independent
//! per-photon arrival makes the pixel counts a multinomial splitting of the
//! fine-mode counts, which fixes the binned covariance in closed form.

use statrs::function::erf::erf;

use crate::error::{Error, Result};
use crate::gaussian::CovarianceMatrix;
use crate::stats::{mean_photons, photon_covariance};
use crate::{RMat, RVec};

/// Spectrometer geometry: fine simulation grid, pixel boundaries, and
/// point-spread width.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrometerConfig {
    pub fine_grid: crate::nlo::FrequencyGrid,
    /// Pixel boundaries in the spectral coordinate of the fine grid,
    /// strictly increasing; `B+1` edges define `B` pixels.
    pub bin_edges: Vec<f64>,
    /// Gaussian point-spread width in pixel units.
    pub psf_sigma: f64,
}

impl SpectrometerConfig {
    pub fn new(
        fine_grid: crate::nlo::FrequencyGrid,
        bin_edges: Vec<f64>,
        psf_sigma: f64,
    ) -> Result<Self> {
        if bin_edges.len() < 2 {
            return Err(Error::InvalidArgument(
                "need at least two bin edges".into(),
            ));
        }
        if bin_edges.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument(
                "bin edges must be strictly increasing".into(),
            ));
        }
        if !(psf_sigma >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "psf_sigma {psf_sigma} must be >= 0"
            )));
        }
        Ok(Self {
            fine_grid,
            bin_edges,
            psf_sigma,
        })
    }

    pub fn bins(&self) -> usize {
        self.bin_edges.len() - 1
    }
}

/// Standard normal CDF.
fn normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + erf(x / std::f64::consts::SQRT_2))
}

/// Arrival-probability matrix `W` (bins × fine points): `W[b][k]` is the
/// probability that a photon in fine mode `k` is recorded in pixel `b`.
///
/// Every fine point must fall inside the binned range, and every pixel must
/// contain at least one fine point (otherwise the grid does not resolve the
/// binning and the request is rejected).
pub fn bin_weights(cfg: &SpectrometerConfig) -> Result<RMat> {
    let bins = cfg.bins();
    let fine = cfg.fine_grid.len();
    let edges = &cfg.bin_edges;
    let mut occupancy = vec![0usize; bins];
    let mut w = RMat::zeros(bins, fine);
    for k in 0..fine {
        let omega = cfg.fine_grid.omega(k);
        if omega < edges[0] || omega > edges[bins] {
            return Err(Error::InvalidArgument(format!(
                "fine point {k} at {omega} lies outside the binned range"
            )));
        }
        // Nominal pixel and continuous pixel coordinate.
        let home = match edges.partition_point(|&e| e <= omega) {
            0 => 0,
            i => (i - 1).min(bins - 1),
        };
        occupancy[home] += 1;
        let p = home as f64 + (omega - edges[home]) / (edges[home + 1] - edges[home]);
        if cfg.psf_sigma == 0.0 {
            w[(home, k)] = 1.0;
            continue;
        }
        let mut total = 0.0;
        for b in 0..bins {
            let lo = (b as f64 - p) / cfg.psf_sigma;
            let hi = (b as f64 + 1.0 - p) / cfg.psf_sigma;
            let weight = normal_cdf(hi) - normal_cdf(lo);
            w[(b, k)] = weight;
            total += weight;
        }
        // Renormalize away the tails clipped by the sensor edges so the
        // photon is always recorded.
        for b in 0..bins {
            w[(b, k)] /= total;
        }
    }
    if let Some(empty) = occupancy.iter().position(|&c| c == 0) {
        return Err(Error::InvalidArgument(format!(
            "pixel {empty} contains no fine grid points; refine the grid"
        )));
    }
    Ok(w)
}

/// Per-pixel photon mean vector and covariance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedStats {
    pub mean: RVec,
    pub covariance: RMat,
}

/// Accumulates fine-mode photon statistics into pixels through the arrival
/// matrix `weights` (rows = pixels, columns sum to 1).
///
/// Each photon chooses its pixel independently, so conditioned on the fine
/// counts the pixel counts are multinomial. Averaging over both layers:
///
/// `mean_b = Σ_k W_bk ⟨n_k⟩`
/// `Cov_bc = (W C Wᵀ)_bc − Σ_k W_bk W_ck ⟨n_k⟩ + δ_bc Σ_k W_bk ⟨n_k⟩`
///
/// where `C` is the fine-mode photon covariance.
pub fn accumulate_bins(mean: &RVec, cov: &RMat, weights: &RMat) -> Result<BinnedStats> {
    let fine = mean.len();
    if cov.nrows() != fine || cov.ncols() != fine || weights.ncols() != fine {
        return Err(Error::DimensionMismatch(format!(
            "mean {fine}, covariance {}x{}, weights {}x{}",
            cov.nrows(),
            cov.ncols(),
            weights.nrows(),
            weights.ncols()
        )));
    }
    let bins = weights.nrows();
    let binned_mean = weights * mean;
    let mut binned_cov = weights * cov * weights.transpose();
    for b in 0..bins {
        for c in 0..bins {
            let mut shot = 0.0;
            for k in 0..fine {
                shot += weights[(b, k)] * weights[(c, k)] * mean[k];
            }
            binned_cov[(b, c)] -= shot;
        }
        binned_cov[(b, b)] += binned_mean[b];
    }
    Ok(BinnedStats {
        mean: binned_mean,
        covariance: binned_cov,
    })
}

/// Full binning pipeline: photon statistics of the Gaussian state on the
/// fine grid, blurred and accumulated into pixels.
pub fn bin_covariance(sigma: &CovarianceMatrix, cfg: &SpectrometerConfig) -> Result<BinnedStats> {
    if sigma.modes() != cfg.fine_grid.len() {
        return Err(Error::DimensionMismatch(format!(
            "state has {} modes but the fine grid has {} points",
            sigma.modes(),
            cfg.fine_grid.len()
        )));
    }
    let mean = mean_photons(sigma)?;
    let cov = photon_covariance(sigma);
    accumulate_bins(&mean, &cov, &bin_weights(cfg)?)
}
