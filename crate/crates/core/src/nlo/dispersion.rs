use crate::error::{Error, Result};

/// Polynomial dispersion of one band, as the propagation-constant expansion
/// `D(Δω) = Δβ₁ Δω + ½ β₂ Δω² + ⅙ β₃ Δω³ + …` (rad/m), plus the linear QPM
/// detuning sweep rate `β₀` (rad/m²) used by the AFC in the rotating frame.
#[derive(Debug, Clone, PartialEq)]
pub struct DispersionProfile {
    beta_coeffs: Vec<f64>,
    beta0_rate: f64,
}

impl DispersionProfile {
    /// `beta_coeffs = [Δβ₁, β₂, β₃, …]` (orders 1, 2, 3, … in Δω).
    pub fn new(beta_coeffs: Vec<f64>, beta0_rate: f64) -> Result<Self> {
        if beta_coeffs.iter().any(|b| !b.is_finite()) || !beta0_rate.is_finite() {
            return Err(Error::InvalidArgument(
                "dispersion coefficients must be finite".into(),
            ));
        }
        Ok(Self {
            beta_coeffs,
            beta0_rate,
        })
    }

    /// Dispersion-free profile.
    pub fn flat() -> Self {
        Self {
            beta_coeffs: Vec::new(),
            beta0_rate: 0.0,
        }
    }

    pub fn beta_coeffs(&self) -> &[f64] {
        &self.beta_coeffs
    }

    pub fn beta0_rate(&self) -> f64 {
        self.beta0_rate
    }

    /// `D(Δω) = Σ_k β_k Δω^k / k!` over the stored orders.
    pub fn phase_rate(&self, detuning: f64) -> f64 {
        let mut acc = 0.0;
        let mut term = 1.0; // Δω^k / k!
        for (k, &b) in self.beta_coeffs.iter().enumerate() {
            term *= detuning / (k as f64 + 1.0);
            acc += b * term;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn polynomial_terms() {
        let d = DispersionProfile::new(vec![2.0, 4.0, 6.0], 0.0).unwrap();
        // 2Δω + 2Δω² + Δω³ at Δω = 3: 6 + 18 + 27 = 51.
        assert_abs_diff_eq!(d.phase_rate(3.0), 51.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d.phase_rate(0.0), 0.0);
    }

    #[test]
    fn flat_is_zero() {
        assert_abs_diff_eq!(DispersionProfile::flat().phase_rate(5.0), 0.0);
    }

    #[test]
    fn nonfinite_rejected() {
        assert!(DispersionProfile::new(vec![f64::INFINITY], 0.0).is_err());
    }
}
