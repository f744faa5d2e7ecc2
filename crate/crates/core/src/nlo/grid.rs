use crate::error::{Error, Result};

/// Uniform angular-frequency grid, symmetric about its center.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    n: usize,
    center: f64,
    spacing: f64,
}

impl FrequencyGrid {
    pub fn new(n: usize, center: f64, spacing: f64) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidArgument("grid needs at least 1 point".into()));
        }
        if !(spacing > 0.0) || !center.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "bad grid parameters: center {center}, spacing {spacing}"
            )));
        }
        Ok(Self { n, center, spacing })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Detuning Δω of grid point `i` from the center; symmetric about 0.
    pub fn detuning(&self, i: usize) -> f64 {
        (i as f64 - (self.n as f64 - 1.0) / 2.0) * self.spacing
    }

    /// All detunings in index order.
    pub fn detunings(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.detuning(i)).collect()
    }

    /// Absolute angular frequency of grid point `i`.
    pub fn omega(&self, i: usize) -> f64 {
        self.center + self.detuning(i)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn symmetric_about_center() {
        let g = FrequencyGrid::new(5, 100.0, 2.0).unwrap();
        let d = g.detunings();
        assert_abs_diff_eq!(d[0], -4.0);
        assert_abs_diff_eq!(d[2], 0.0);
        assert_abs_diff_eq!(d[4], 4.0);
        let sum: f64 = d.iter().sum();
        assert_abs_diff_eq!(sum, 0.0, epsilon = 1e-12);
        // Even point counts straddle the center symmetrically.
        let g2 = FrequencyGrid::new(4, 0.0, 1.0).unwrap();
        assert_abs_diff_eq!(g2.detuning(1), -0.5);
        assert_abs_diff_eq!(g2.detuning(2), 0.5);
    }

    #[test]
    fn invalid_rejected() {
        assert!(FrequencyGrid::new(0, 0.0, 1.0).is_err());
        assert!(FrequencyGrid::new(2, 0.0, 0.0).is_err());
        assert!(FrequencyGrid::new(2, f64::NAN, 1.0).is_err());
    }
}
