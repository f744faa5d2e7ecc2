//! Closed-form coincidence predictions for split-beam detection.
//!
//! A beam is split on a balanced beamsplitter and each output arm is
//! photon-counted. For an input mode with mean `⟨n⟩` and variance `Var(n)`,
//! the covariance of the two arm counts is `¼(Var(n) − ⟨n⟩)` in the
//! lossless case, and the variance-to-mean relation of the source kind
//! makes the covariance-vs-photon-number scaling a state discriminator:
//! coherent light gives zero, thermal light `⟨n⟩²/4`, squeezed vacuum
//! `(2⟨n⟩² + ⟨n⟩)/4`, and Fock states a negative covariance
//! (anti-bunching). Independent arm losses scale the covariance by
//! `η_L η_R`; in the low-photon regime the slope of covariance versus
//! detected photons measures the transmission directly.

use crate::error::{Error, Result};

/// Photon statistics family of the source.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceKind {
    /// Squeezed vacuum: `Var(n) = 2⟨n⟩(⟨n⟩+1)`.
    Squeezed,
    /// Coherent: `Var(n) = ⟨n⟩`.
    Coherent,
    /// Thermal: `Var(n) = ⟨n⟩(⟨n⟩+1)`.
    Thermal,
    /// Photon-number eigenstate: `Var(n) = 0`.
    Fock,
}

impl SourceKind {
    /// Photon-number variance for mean `m`.
    pub fn variance(self, m: f64) -> f64 {
        match self {
            SourceKind::Squeezed => 2.0 * m * (m + 1.0),
            SourceKind::Coherent => m,
            SourceKind::Thermal => m * (m + 1.0),
            SourceKind::Fock => 0.0,
        }
    }
}

/// Multimode source entering the splitter: per-mode means and per-arm
/// transmissions.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceSpec {
    pub kind: SourceKind,
    pub mean_photons: Vec<f64>,
    pub eta_l: Vec<f64>,
    pub eta_r: Vec<f64>,
}

impl SourceSpec {
    pub fn new(kind: SourceKind, mean_photons: Vec<f64>, eta_l: Vec<f64>, eta_r: Vec<f64>) -> Result<Self> {
        let n = mean_photons.len();
        if eta_l.len() != n || eta_r.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{n} modes vs {} / {} transmissions",
                eta_l.len(),
                eta_r.len()
            )));
        }
        if mean_photons.iter().any(|&m| !(m >= 0.0)) {
            return Err(Error::InvalidArgument("mean photons must be >= 0".into()));
        }
        for eta in eta_l.iter().chain(eta_r.iter()) {
            if !(0.0..=1.0).contains(eta) {
                return Err(Error::InvalidArgument(format!(
                    "transmission {eta} outside [0, 1]"
                )));
            }
        }
        Ok(Self {
            kind,
            mean_photons,
            eta_l,
            eta_r,
        })
    }

    /// Uniform transmissions across all modes.
    pub fn uniform(kind: SourceKind, mean_photons: Vec<f64>, eta_l: f64, eta_r: f64) -> Result<Self> {
        let n = mean_photons.len();
        Self::new(kind, mean_photons, vec![eta_l; n], vec![eta_r; n])
    }
}

/// Arm-count covariance contributed by a single mode:
/// `η_L η_R/4 · (Var(n) − ⟨n⟩)`.
pub fn splitter_covariance(spec: &SourceSpec, mode: usize) -> Result<f64> {
    let m = *spec
        .mean_photons
        .get(mode)
        .ok_or_else(|| Error::InvalidArgument(format!("mode {mode} out of range")))?;
    let var = spec.kind.variance(m);
    Ok(spec.eta_l[mode] * spec.eta_r[mode] / 4.0 * (var - m))
}

/// Total arm-count covariance: modes are independent, so contributions add.
pub fn multimode_covariance(spec: &SourceSpec) -> Result<f64> {
    (0..spec.mean_photons.len())
        .map(|i| splitter_covariance(spec, i))
        .sum()
}

/// Mean detected photons per arm, `⟨N⟩ = Σ_i η_i ⟨n_i⟩ / 2`, using the
/// geometric mean of the two arm transmissions as the per-mode `η_i`.
pub fn detected_mean(spec: &SourceSpec) -> f64 {
    spec.mean_photons
        .iter()
        .zip(spec.eta_l.iter().zip(&spec.eta_r))
        .map(|(&m, (&l, &r))| (l * r).sqrt() * m / 2.0)
        .sum()
}

/// Covariance of two thresholded (click/no-click) detectors from the
/// conditional click probabilities of detector 3 given detector 4:
///
/// `Cov(c₃, c₄) = (P(c₃|c₄) − P(c₃|¬c₄)) · ⟨c₄⟩(1 − ⟨c₄⟩)`
///
/// an exact identity for Bernoulli variables; with conditionals constant in
/// the photon flux, the covariance traces the parabola `⟨c₄⟩(1 − ⟨c₄⟩)`
/// peaking at `⟨c₄⟩ = ½`.
pub fn threshold_covariance(p3_given_click: f64, p3_given_noclick: f64, mean4: f64) -> Result<f64> {
    for p in [p3_given_click, p3_given_noclick, mean4] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!(
                "probability {p} outside [0, 1]"
            )));
        }
    }
    Ok((p3_given_click - p3_given_noclick) * mean4 * (1.0 - mean4))
}

/// Wavelength-dependent detector quantum efficiency, linearly interpolated
/// on its grid and zero outside it.
#[derive(Debug, Clone, PartialEq)]
pub struct QeCurve {
    wavelengths: Vec<f64>,
    qe: Vec<f64>,
    /// Degenerate biphoton center λ₀.
    center: f64,
}

impl QeCurve {
    pub fn new(wavelengths: Vec<f64>, qe: Vec<f64>, center: f64) -> Result<Self> {
        if wavelengths.len() != qe.len() || wavelengths.len() < 2 {
            return Err(Error::DimensionMismatch(format!(
                "{} wavelengths vs {} QE values",
                wavelengths.len(),
                qe.len()
            )));
        }
        if wavelengths.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument(
                "QE wavelength grid must be strictly increasing".into(),
            ));
        }
        if qe.iter().any(|q| !(0.0..=1.0).contains(q)) {
            return Err(Error::InvalidArgument("QE values outside [0, 1]".into()));
        }
        if !(center > 0.0) {
            return Err(Error::InvalidArgument(format!("bad center {center}")));
        }
        Ok(Self {
            wavelengths,
            qe,
            center,
        })
    }

    /// Flat unit efficiency over `[lo, hi]`.
    pub fn uniform(lo: f64, hi: f64, center: f64) -> Result<Self> {
        Self::new(vec![lo, hi], vec![1.0, 1.0], center)
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    /// Interpolated efficiency at wavelength `lambda` (0 outside the grid).
    pub fn eval(&self, lambda: f64) -> f64 {
        let w = &self.wavelengths;
        if lambda < w[0] || lambda > w[w.len() - 1] {
            return 0.0;
        }
        let i = w.partition_point(|&x| x < lambda).max(1).min(w.len() - 1);
        let t = (lambda - w[i - 1]) / (w[i] - w[i - 1]);
        self.qe[i - 1] * (1.0 - t) + self.qe[i] * t
    }

    /// Wavelength of the energy-matched sister photon:
    /// `1/λ' = 2/λ₀ − 1/λ`. Returns `None` past the degeneracy fold where
    /// the sister frequency would be non-positive.
    pub fn pair_wavelength(&self, lambda: f64) -> Option<f64> {
        let u = 2.0 / self.center - 1.0 / lambda;
        if u > 0.0 {
            Some(1.0 / u)
        } else {
            None
        }
    }
}

/// Slope of `Cov(n₃, n₄)` versus `⟨N⟩` for a biphoton source with
/// wavelength-dependent quantum efficiency:
///
/// `slope = η² ∫ dλ/λ² 𝒫(λ) QE(λ) QE(λ_pair) / ∫ dλ/λ² 𝒫(λ)`
///
/// where the sister wavelength satisfies `1/λ_pair = 2/λ₀ − 1/λ`. The
/// `1/λ²` measure makes this a frequency-space integral; it is evaluated by
/// trapezoid quadrature in `u = 1/λ`. Valid in the biphoton regime
/// (`⟨N⟩ ≪ 1`, see [`check_biphoton_validity`]).
pub fn qe_weighted_slope(
    wavelengths: &[f64],
    density: &[f64],
    qe: &QeCurve,
    eta: f64,
) -> Result<f64> {
    if wavelengths.len() != density.len() || wavelengths.len() < 2 {
        return Err(Error::DimensionMismatch(format!(
            "{} wavelengths vs {} density values",
            wavelengths.len(),
            density.len()
        )));
    }
    if wavelengths
        .windows(2)
        .any(|w| !(w[1] > w[0]) || !(w[0] > 0.0))
    {
        return Err(Error::InvalidArgument(
            "spectrum grid must be positive and strictly increasing".into(),
        ));
    }
    if density.iter().any(|&p| !(p >= 0.0)) {
        return Err(Error::InvalidArgument(
            "spectral density must be >= 0".into(),
        ));
    }
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::InvalidArgument(format!("eta {eta} outside [0, 1]")));
    }
    // Frequency-proportional nodes u = 1/λ (descending in u as λ ascends);
    // trapezoid in u absorbs the 1/λ² measure.
    let n = wavelengths.len();
    let mut num = 0.0;
    let mut den = 0.0;
    let value = |i: usize| -> (f64, f64) {
        let lam = wavelengths[i];
        let q = qe.eval(lam)
            * qe
                .pair_wavelength(lam)
                .map_or(0.0, |sister| qe.eval(sister));
        (density[i] * q, density[i])
    };
    let mut prev = value(0);
    for i in 1..n {
        let du = (1.0 / wavelengths[i - 1] - 1.0 / wavelengths[i]).abs();
        let cur = value(i);
        num += 0.5 * (prev.0 + cur.0) * du;
        den += 0.5 * (prev.1 + cur.1) * du;
        prev = cur;
    }
    if !(den > 0.0) {
        return Err(Error::InvalidArgument(
            "spectral density integrates to zero".into(),
        ));
    }
    if num == 0.0 {
        log::warn!("spectrum lies entirely outside the QE support; slope is 0");
        return Ok(0.0);
    }
    Ok(eta * eta * num / den)
}

/// Biphoton-regime gate: the closed-form coincidence model neglects
/// multi-pair emission, which is only justified for `⟨N⟩ < 0.1`. Returns
/// whether the gate passes and logs a warning otherwise.
pub fn check_biphoton_validity(total_detected_mean: f64) -> bool {
    if total_detected_mean < 0.1 {
        true
    } else {
        log::warn!(
            "biphoton approximation invalid at <N> = {total_detected_mean:.3} (needs < 0.1)"
        );
        false
    }
}
