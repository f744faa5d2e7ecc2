//! Classical-simulability bound for lossy squeezed-light sampling.
//!
//! A register of `K` identical squeezers (parameter `r`) behind total
//! transmission `η`, measured by threshold detectors of efficiency `η_D`
//! and dark-count probability `p_D`, admits an efficient classical
//! simulation to total-variation distance ε whenever
//!
//! `sech(x/2) > exp(−ε²/4K)`,  `x = max(0, ln Λ)`,
//! `Λ = (1 − 2 p_D/η_D) / (η e^{−2r} + 1 − η)`.
//!
//! The minimal non-simulable distance is the equality point
//! `ε = 2 √(K ln cosh(x/2))`, and 0 when Λ ≤ 1 (the gated hyperbolic
//! secant is 1, so every distance is reachable classically).

use crate::error::{CliError, Result};

/// Inputs of the simulability bound.
#[derive(Debug, Clone, Copy)]
pub struct SimulabilityInput {
    /// Squeezing parameter per squeezer (dimensionless), ≥ 0.
    pub r: f64,
    /// Total transmission to the detectors, in [0, 1].
    pub eta: f64,
    /// Detector efficiency, in (0, 1].
    pub eta_d: f64,
    /// Dark-count probability per detector per shot, in [0, 1].
    pub p_d: f64,
    /// Number of squeezers, ≥ 1.
    pub k: usize,
}

impl SimulabilityInput {
    pub fn validate(&self) -> Result<()> {
        let ok = self.r >= 0.0
            && (0.0..=1.0).contains(&self.eta)
            && self.eta_d > 0.0
            && self.eta_d <= 1.0
            && (0.0..=1.0).contains(&self.p_d)
            && self.k >= 1;
        if !ok {
            return Err(CliError::Config(format!("invalid bound inputs: {self:?}")));
        }
        Ok(())
    }

    /// The ratio Λ whose logarithm is gated; > 1 in the non-trivial regime.
    fn ratio(&self) -> f64 {
        (1.0 - 2.0 * self.p_d / self.eta_d) / (self.eta * (-2.0 * self.r).exp() + 1.0 - self.eta)
    }
}

/// Minimal total-variation distance, closed form.
pub fn epsilon_closed_form(input: &SimulabilityInput) -> Result<f64> {
    input.validate()?;
    let lam = input.ratio();
    if !(lam > 1.0) {
        return Ok(0.0);
    }
    let x = lam.ln();
    Ok(2.0 * (input.k as f64 * (x / 2.0).cosh().ln()).sqrt())
}

/// Minimal distance by bisection on the defining inequality; independent of
/// the closed form, used to cross-check it.
pub fn epsilon_bisection(input: &SimulabilityInput) -> Result<f64> {
    input.validate()?;
    let lam = input.ratio();
    if !(lam > 1.0) {
        return Ok(0.0);
    }
    let x = lam.ln();
    let target = 1.0 / (x / 2.0).cosh(); // sech(x/2) ∈ (0, 1)
    let k = input.k as f64;
    // f(ε) = exp(−ε²/4K) decreases from 1; solve f(ε) = target.
    let f = |eps: f64| (-eps * eps / (4.0 * k)).exp();
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    while f(hi) > target {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(CliError::Numeric(
                "simulability bisection failed to bracket".into(),
            ));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
