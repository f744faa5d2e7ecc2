//! Pipeline configuration: one JSON document, validated fully before any
//! compute. The machine-readable schema lives at `schema/pipeline.schema.json`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use slp_core::nlo::{DispersionProfile, FrequencyGrid, PropagationConfig, PumpPulse};
use slp_core::{C64, CVec};

use crate::error::{CliError, Result};

/// Full pipeline configuration. Units are stated per field; spectral
/// coordinates are detunings from the band center in rad/s throughout.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub dopa: DopaSection,
    pub afc: AfcSection,
    pub loss: LossSection,
    pub spectrometer: SpectrometerSection,
    pub detector: DetectorSection,
    pub sampling: SamplingSection,
}

/// Parametric-amplifier stage. The pump grid has `pump_points = 2M − 1`
/// points; the signal band then has M modes at the same spacing.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DopaSection {
    /// Pump grid size, odd.
    pub pump_points: usize,
    /// Pump grid spacing (rad/s).
    pub pump_spacing: f64,
    /// Peak spectral amplitude of the pump envelope (√W·s).
    pub pump_peak: f64,
    /// Gaussian envelope width of the pump spectrum (rad/s); 0 = flat.
    #[serde(default)]
    pub pump_sigma: f64,
    /// Optional intensity mask μ(ω) ∈ [0, 1] per grid point.
    #[serde(default)]
    pub intensity_mask: Option<Vec<f64>>,
    /// Optional phase mask φ(ω) (rad) per grid point.
    #[serde(default)]
    pub phase_mask: Option<Vec<f64>>,
    /// Signal dispersion orders [β₂, β₃, …] (rad·sᵏ/m).
    #[serde(default)]
    pub beta_coeffs: Vec<f64>,
    /// Nonlinear coupling κ (1/(m·√W)).
    pub kappa: f64,
    /// Crystal length (m).
    pub length: f64,
    /// Base z-step count (validated against 2× internally).
    pub z_steps: usize,
}

/// Adiabatic-frequency-conversion stage (rotating-frame sweep).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AfcSection {
    /// Skip the stage entirely when false.
    pub enabled: bool,
    /// Monochromatic conversion-pump amplitude (√W·s).
    #[serde(default)]
    pub pump_amplitude: f64,
    /// Quasi-phase-matching sweep rate β₀ (rad/m²).
    #[serde(default)]
    pub beta0_rate: f64,
    /// Nonlinear coupling κ (1/(m·√W)).
    #[serde(default = "one")]
    pub kappa: f64,
    /// Crystal length (m).
    #[serde(default = "one")]
    pub length: f64,
    /// Base z-step count.
    #[serde(default = "default_afc_steps")]
    pub z_steps: usize,
}

fn one() -> f64 {
    1.0
}

fn default_afc_steps() -> usize {
    1024
}

/// Uniform transmission applied to every signal mode after conversion.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossSection {
    /// Transmission η ∈ [0, 1].
    pub eta: f64,
}

/// Spectrometer binning of the fine signal grid onto camera pixels.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrometerSection {
    /// Pixel boundaries in the signal spectral coordinate (rad/s),
    /// strictly increasing; B+1 edges give B pixels.
    pub bin_edges: Vec<f64>,
    /// Gaussian point-spread width in pixel units.
    pub psf_sigma: f64,
}

/// EMCCD model parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorSection {
    /// Mean electron-multiplication gain (electrons out per photoelectron).
    pub gain: f64,
    /// Gaussian readout noise σ_r (electrons).
    pub readout_sigma: f64,
    /// Quantum efficiency ∈ [0, 1].
    pub qe: f64,
    /// ADC conversion (electrons per count).
    pub adc_k: f64,
    /// ADC bias (counts).
    pub bias: f64,
    /// Dark/spurious electron probability per pixel per frame.
    pub dark_rate: f64,
    /// Click threshold in units of σ_r.
    pub threshold_sigmas: f64,
}

/// Monte-Carlo settings.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingSection {
    /// Number of camera frames to draw.
    pub shots: u64,
    /// RNG seed (overridable with --seed).
    pub seed: u64,
    /// Fan shots out over worker threads; results are identical either way.
    #[serde(default = "yes")]
    pub parallel: bool,
}

fn yes() -> bool {
    true
}

impl PipelineConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
        let cfg: Self = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("parsing {}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Signal-band mode count M.
    pub fn band_size(&self) -> usize {
        (self.dopa.pump_points + 1) / 2
    }

    pub fn validate(&self) -> Result<()> {
        let d = &self.dopa;
        if d.pump_points == 0 || d.pump_points % 2 == 0 {
            return Err(CliError::Config(format!(
                "dopa.pump_points must be odd and positive, got {}",
                d.pump_points
            )));
        }
        if !(d.pump_spacing > 0.0) || !(d.pump_peak >= 0.0) || !(d.pump_sigma >= 0.0) {
            return Err(CliError::Config(
                "dopa pump spacing must be positive; peak and sigma nonnegative".into(),
            ));
        }
        for (name, mask) in [
            ("intensity_mask", &d.intensity_mask),
            ("phase_mask", &d.phase_mask),
        ] {
            if let Some(m) = mask {
                if m.len() != d.pump_points {
                    return Err(CliError::Config(format!(
                        "dopa.{name} has {} entries for {} grid points",
                        m.len(),
                        d.pump_points
                    )));
                }
            }
        }
        if self.afc.enabled && !(self.afc.beta0_rate > 0.0) {
            return Err(CliError::Config(
                "afc.beta0_rate must be positive when the stage is enabled".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.loss.eta) {
            return Err(CliError::Config(format!(
                "loss.eta = {} outside [0, 1]",
                self.loss.eta
            )));
        }
        let edges = &self.spectrometer.bin_edges;
        if edges.len() < 2 || edges.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(CliError::Config(
                "spectrometer.bin_edges must be >= 2 strictly increasing values".into(),
            ));
        }
        let det = &self.detector;
        if !(det.gain > 0.0)
            || !(det.readout_sigma >= 0.0)
            || !(0.0..=1.0).contains(&det.qe)
            || !(det.adc_k > 0.0)
            || !(0.0..=1.0).contains(&det.dark_rate)
        {
            return Err(CliError::Config(format!("bad detector section: {det:?}")));
        }
        if self.sampling.shots == 0 {
            return Err(CliError::Config("sampling.shots must be >= 1".into()));
        }
        Ok(())
    }

    /// Builds the DOPA pump pulse from the envelope and masks.
    pub fn dopa_pump(&self) -> Result<PumpPulse> {
        let d = &self.dopa;
        let grid = FrequencyGrid::new(d.pump_points, 0.0, d.pump_spacing)
            .map_err(|e| CliError::from_stage("dopa", e))?;
        let amplitude = CVec::from_fn(d.pump_points, |i, _| {
            let omega = grid.detuning(i);
            let env = if d.pump_sigma > 0.0 {
                (-omega * omega / (2.0 * d.pump_sigma * d.pump_sigma)).exp()
            } else {
                1.0
            };
            C64::new(d.pump_peak * env, 0.0)
        });
        let mu = d
            .intensity_mask
            .clone()
            .unwrap_or_else(|| vec![1.0; d.pump_points]);
        let phi = d
            .phase_mask
            .clone()
            .unwrap_or_else(|| vec![0.0; d.pump_points]);
        PumpPulse::new(grid, amplitude, mu, phi).map_err(|e| CliError::from_stage("dopa", e))
    }

    pub fn dopa_dispersion(&self) -> Result<DispersionProfile> {
        DispersionProfile::new(self.dopa.beta_coeffs.clone(), 0.0)
            .map_err(|e| CliError::from_stage("dopa", e))
    }

    pub fn dopa_propagation(&self) -> Result<PropagationConfig> {
        PropagationConfig::new(self.dopa.z_steps, self.dopa.kappa, self.dopa.length)
            .map_err(|e| CliError::from_stage("dopa", e))
    }

    /// AFC pump: one spectral line, carried on a grid sized to the signal
    /// band so the Toeplitz kernel is diagonal.
    pub fn afc_pump(&self) -> Result<PumpPulse> {
        let m = self.band_size();
        let n = 2 * m - 1;
        let grid = FrequencyGrid::new(n, 0.0, self.dopa.pump_spacing)
            .map_err(|e| CliError::from_stage("afc", e))?;
        let amp = CVec::from_fn(n, |i, _| {
            if i == m - 1 {
                C64::new(self.afc.pump_amplitude, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        PumpPulse::unshaped(grid, amp).map_err(|e| CliError::from_stage("afc", e))
    }

    pub fn afc_propagation(&self) -> Result<PropagationConfig> {
        PropagationConfig::new(self.afc.z_steps, self.afc.kappa, self.afc.length)
            .map_err(|e| CliError::from_stage("afc", e))
    }
}
