//! EMCCD measurement chain.
//!
//! Covers the full path from photon numbers at the spectrometer output to
//! camera frames and back: electron-multiplication gain noise (Erlang),
//! Gaussian readout noise, analog moment inversion, click thresholding with
//! ROC characterization, pixel-unit conversion, and spectrometer binning
//! with Gaussian point-spread blur.

mod binning;
mod copula;
mod emccd;

pub use binning::{accumulate_bins, bin_covariance, bin_weights, BinnedStats, SpectrometerConfig};
pub use copula::sample_binned_frames;
pub use emccd::{
    analog_invert_moments, em_gain_sample, pixel_to_photoelectrons, roc_curve, simulate_frames,
    threshold_frames, EmccdConfig, PairMoments, PhotonMoments,
};
