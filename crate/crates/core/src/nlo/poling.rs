//! Quasi-phase-matching poling design.
//!
//! The crystal's sign profile is `χ(z) = sign(sin φ(z))` with
//! `dφ/dz = Δk(z)`. For a linear sweep `Δk(z) = β_i + (β_f − β_i) z / L`,
//! so `φ(z) = β_i z + (β_f − β_i) z²/2L`. Optionally, the first and last
//! `tanh_fraction·L` of the crystal add a slope-matched tanh excursion to
//! the sweep so the ends run through extra spatial frequencies quickly.
//! Domain boundaries sit at `φ = kπ` and are quantized to an integer number
//! of fabrication quanta with running-error feedback.

use std::io::Write;

use crate::error::{Error, Result};

/// Default fabrication quantum: 0.025 µm.
pub const DEFAULT_QUANTUM: f64 = 0.025e-6;

/// Sharpness of the tanh end-sweeps (fixed curvature).
const TANH_GAIN: f64 = 2.0;

/// Alternating-sign domain structure of a poled crystal.
#[derive(Debug, Clone, PartialEq)]
pub struct PolingProfile {
    domain_lengths: Vec<f64>,
    signs: Vec<i8>,
    total_length: f64,
    /// Cumulative end positions of each domain.
    boundaries: Vec<f64>,
}

impl PolingProfile {
    pub fn new(domain_lengths: Vec<f64>, signs: Vec<i8>) -> Result<Self> {
        if domain_lengths.is_empty() || domain_lengths.len() != signs.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} domains vs {} signs",
                domain_lengths.len(),
                signs.len()
            )));
        }
        if domain_lengths.iter().any(|&l| !(l > 0.0)) {
            return Err(Error::InvalidArgument(
                "domain lengths must be positive".into(),
            ));
        }
        for w in signs.windows(2) {
            if w[0] * w[1] != -1 {
                return Err(Error::InvalidArgument(
                    "signs must strictly alternate between +1 and -1".into(),
                ));
            }
        }
        let mut boundaries = Vec::with_capacity(domain_lengths.len());
        let mut acc = 0.0;
        for &l in &domain_lengths {
            acc += l;
            boundaries.push(acc);
        }
        Ok(Self {
            domain_lengths,
            signs,
            total_length: acc,
            boundaries,
        })
    }

    pub fn domain_lengths(&self) -> &[f64] {
        &self.domain_lengths
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn total_length(&self) -> f64 {
        self.total_length
    }

    /// Sign `χ(z) ∈ {−1, +1}` at position `z` (clamped to the crystal).
    pub fn sign_at(&self, z: f64) -> f64 {
        let idx = match self
            .boundaries
            .binary_search_by(|b| b.partial_cmp(&z).unwrap())
        {
            Ok(i) => (i + 1).min(self.signs.len() - 1),
            Err(i) => i.min(self.signs.len() - 1),
        };
        self.signs[idx] as f64
    }
}

/// Local sweep `Δk(z)`: linear `β_i → β_f` with tanh-accelerated ends.
fn delta_k(beta_i: f64, beta_f: f64, l: f64, tanh_fraction: f64, z: f64) -> f64 {
    let base = beta_i + (beta_f - beta_i) * z / l;
    let fl = tanh_fraction * l;
    let excursion = (beta_f - beta_i) * tanh_fraction;
    if fl > 0.0 && z < fl {
        base - excursion * (TANH_GAIN * (fl - z) / fl).tanh()
    } else if fl > 0.0 && z > l - fl {
        base + excursion * (TANH_GAIN * (z - (l - fl)) / fl).tanh()
    } else {
        base
    }
}

/// Designs the poling for a linear QPM sweep from `beta_i` to `beta_f`
/// (rad/m) over length `l` (m), with domains quantized to `quantum` (m) and
/// `tanh_fraction` of each end swept with the accelerated tanh profile.
pub fn design_poling(
    beta_i: f64,
    beta_f: f64,
    l: f64,
    quantum: f64,
    tanh_fraction: f64,
) -> Result<PolingProfile> {
    if !(l > 0.0) || !(quantum > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need positive length and quantum, got L = {l}, quantum = {quantum}"
        )));
    }
    if !(0.0..=0.45).contains(&tanh_fraction) {
        return Err(Error::InvalidArgument(format!(
            "tanh_fraction {tanh_fraction} outside [0, 0.45]"
        )));
    }
    let k_max = [0.0, tanh_fraction * l, l / 2.0, l * (1.0 - tanh_fraction), l]
        .iter()
        .map(|&z| delta_k(beta_i, beta_f, l, tanh_fraction, z).abs())
        .fold(0.0_f64, f64::max);
    if k_max == 0.0 {
        return Err(Error::InvalidArgument("sweep is identically zero".into()));
    }
    if std::f64::consts::PI / k_max < quantum {
        return Err(Error::InvalidArgument(format!(
            "quantum {quantum} exceeds the shortest ideal domain {}",
            std::f64::consts::PI / k_max
        )));
    }

    // Integrate φ(z) on a fine grid; record each kπ crossing as an ideal
    // domain boundary.
    let h = (std::f64::consts::PI / k_max / 64.0).min(l / 1024.0);
    let steps = (l / h).ceil() as usize;
    let h = l / steps as f64;
    let mut phi = 0.0;
    let mut crossings: Vec<f64> = Vec::new();
    let mut k_next = 1.0;
    let mut rate_prev = delta_k(beta_i, beta_f, l, tanh_fraction, 0.0);
    if rate_prev <= 0.0 {
        return Err(Error::InvalidArgument(
            "sweep must keep the spatial frequency positive".into(),
        ));
    }
    for s in 0..steps {
        let z1 = (s as f64 + 1.0) * h;
        let rate = delta_k(beta_i, beta_f, l, tanh_fraction, z1);
        if rate <= 0.0 {
            return Err(Error::InvalidArgument(
                "sweep must keep the spatial frequency positive".into(),
            ));
        }
        let phi1 = phi + 0.5 * (rate_prev + rate) * h;
        while phi1 >= k_next * std::f64::consts::PI {
            let target = k_next * std::f64::consts::PI;
            let frac = (target - phi) / (phi1 - phi);
            crossings.push(z1 - h + frac * h);
            k_next += 1.0;
        }
        phi = phi1;
        rate_prev = rate;
    }

    // Ideal domains: [0, c₁], [c₁, c₂], …, [c_last, L].
    let mut ideal = Vec::with_capacity(crossings.len() + 1);
    let mut prev = 0.0;
    for &c in &crossings {
        ideal.push(c - prev);
        prev = c;
    }
    if l - prev > 0.0 {
        ideal.push(l - prev);
    }

    // Quantize with running-error feedback: each quantized boundary chases
    // the ideal one.
    let mut lengths = Vec::with_capacity(ideal.len());
    let mut signs = Vec::with_capacity(ideal.len());
    let mut cum_ideal = 0.0;
    let mut cum_quant = 0.0;
    for (m, &len) in ideal.iter().enumerate() {
        cum_ideal += len;
        let n = ((cum_ideal - cum_quant) / quantum).round().max(1.0);
        let qlen = n * quantum;
        cum_quant += qlen;
        lengths.push(qlen);
        signs.push(if m % 2 == 0 { 1 } else { -1 });
    }
    PolingProfile::new(lengths, signs)
}

/// Exports a profile as two-column CSV `length_m,sign`.
pub fn write_poling_csv<W: Write>(profile: &PolingProfile, mut w: W) -> Result<()> {
    writeln!(w, "length_m,sign")?;
    for (l, s) in profile.domain_lengths().iter().zip(profile.signs()) {
        writeln!(w, "{l:.9e},{s}")?;
    }
    Ok(())
}
