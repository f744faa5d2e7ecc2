use crate::error::{Error, Result};
use crate::{C64, CVec};

use super::FrequencyGrid;

/// Classical pump pulse: spectral amplitude `A₀(ω)` (√W·s) on a grid, with
/// programmable intensity mask `μ(ω) ∈ [0, 1]` and phase mask `φ(ω)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PumpPulse {
    pub grid: FrequencyGrid,
    pub amplitude: CVec,
    pub mu: Vec<f64>,
    pub phi: Vec<f64>,
}

impl PumpPulse {
    pub fn new(grid: FrequencyGrid, amplitude: CVec, mu: Vec<f64>, phi: Vec<f64>) -> Result<Self> {
        let n = grid.len();
        if amplitude.len() != n || mu.len() != n || phi.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "grid has {n} points; amplitude/mu/phi have {}/{}/{}",
                amplitude.len(),
                mu.len(),
                phi.len()
            )));
        }
        for (i, &m) in mu.iter().enumerate() {
            if !(0.0..=1.0).contains(&m) {
                return Err(Error::InvalidArgument(format!(
                    "mu[{i}] = {m} outside [0, 1]"
                )));
            }
        }
        if phi.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidArgument("phase mask must be finite".into()));
        }
        Ok(Self {
            grid,
            amplitude,
            mu,
            phi,
        })
    }

    /// Unmodulated pump: `μ ≡ 1`, `φ ≡ 0`.
    pub fn unshaped(grid: FrequencyGrid, amplitude: CVec) -> Result<Self> {
        let n = grid.len();
        Self::new(grid, amplitude, vec![1.0; n], vec![0.0; n])
    }

    /// Single spectral line of the given amplitude.
    pub fn monochromatic(center: f64, spacing: f64, amplitude: C64) -> Result<Self> {
        let grid = FrequencyGrid::new(1, center, spacing)?;
        Self::unshaped(grid, CVec::from_element(1, amplitude))
    }

    /// Pulse energy proxy `Σ |A|²` of the shaped spectrum.
    pub fn shaped_energy(&self) -> f64 {
        shape_pump(self).iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Shaped spectral amplitude `A(ω) = A₀(ω) √μ(ω) e^{iφ(ω)}`.
pub fn shape_pump(pulse: &PumpPulse) -> CVec {
    CVec::from_fn(pulse.grid.len(), |i, _| {
        pulse.amplitude[i] * pulse.mu[i].sqrt() * C64::from_polar(1.0, pulse.phi[i])
    })
}
