//! Photon-number statistics of zero-mean Gaussian states: Hafnians,
//! closed-form moments, measurement probabilities, and exact pattern
//! sampling.

mod gbs;
mod hafnian;
mod moments;
mod sampler;

pub use gbs::{gbs_distribution, gbs_probability, squeezed_tail_bound, GbsEvaluator, StatsMatrices};
pub use hafnian::hafnian;
pub use moments::{mean_photons, photon_covariance, photon_moment};
pub use sampler::sample_patterns;

use crate::error::{Error, Result};

/// A photon-counting outcome: photons per mode.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PhotonPattern {
    pub counts: Vec<usize>,
}

impl PhotonPattern {
    pub fn new(counts: Vec<usize>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::InvalidArgument("pattern must be nonempty".into()));
        }
        Ok(Self { counts })
    }

    /// Total photons `Σ n_i`.
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    /// `n! = Π n_i!` as a float.
    pub fn factorial(&self) -> f64 {
        self.counts
            .iter()
            .map(|&n| (1..=n).map(|k| k as f64).product::<f64>())
            .product()
    }
}
