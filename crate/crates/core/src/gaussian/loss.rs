use crate::error::{Error, Result};
use crate::C64;

use super::CovarianceMatrix;

/// Lumped loss/noise channel: per-mode transmission `η ∈ [0, 1]` and added
/// noise `ν = n̄ + 1/2 ≥ 1/2` (1/2 for a vacuum environment).
#[derive(Debug, Clone, PartialEq)]
pub struct LossChannel {
    eta: Vec<f64>,
    nu: Vec<f64>,
}

impl LossChannel {
    pub fn new(eta: Vec<f64>, nu: Vec<f64>) -> Result<Self> {
        if eta.len() != nu.len() {
            return Err(Error::DimensionMismatch(
                "eta and nu vectors differ in length".into(),
            ));
        }
        for (i, &e) in eta.iter().enumerate() {
            if !(0.0..=1.0).contains(&e) {
                return Err(Error::InvalidArgument(format!(
                    "eta[{i}] = {e} outside [0, 1]"
                )));
            }
        }
        for (i, &v) in nu.iter().enumerate() {
            if !(v >= 0.5) {
                return Err(Error::InvalidArgument(format!("nu[{i}] = {v} < 1/2")));
            }
        }
        Ok(Self { eta, nu })
    }

    /// Uniform transmission into a vacuum environment.
    pub fn uniform(modes: usize, eta: f64) -> Result<Self> {
        Self::new(vec![eta; modes], vec![0.5; modes])
    }

    pub fn len(&self) -> usize {
        self.eta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eta.is_empty()
    }

    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    pub fn nu(&self) -> &[f64] {
        &self.nu
    }

    /// Beamsplitter-and-trace loss map:
    /// `σ → √(ηηᵀ) ∘ σ + (1−η) ∘ ν ∘ I`, with `η` broadcast over both basis
    /// halves.
    pub fn apply(&self, sigma: &CovarianceMatrix) -> Result<CovarianceMatrix> {
        let m = sigma.modes();
        if self.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "channel has {} modes, state has {m}",
                self.len()
            )));
        }
        let sqrt_eta: Vec<f64> = self.eta.iter().map(|e| e.sqrt()).collect();
        let half = |i: usize| i % m;
        let mut out = sigma.data().clone();
        for r in 0..2 * m {
            for c in 0..2 * m {
                out[(r, c)] *= sqrt_eta[half(r)] * sqrt_eta[half(c)];
            }
        }
        for i in 0..m {
            let add = C64::new((1.0 - self.eta[i]) * self.nu[i], 0.0);
            out[(i, i)] += add;
            out[(i + m, i + m)] += add;
        }
        CovarianceMatrix::new(m, out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::GreensFunction;
    use approx::assert_abs_diff_eq;

    #[test]
    fn range_checks() {
        assert!(LossChannel::new(vec![1.1], vec![0.5]).is_err());
        assert!(LossChannel::new(vec![-0.1], vec![0.5]).is_err());
        assert!(LossChannel::new(vec![0.5], vec![0.4]).is_err());
        assert!(LossChannel::new(vec![0.5], vec![f64::NAN]).is_err());
    }

    #[test]
    fn full_transmission_is_identity() {
        let g = GreensFunction::squeezer(0.8, 0.3);
        let s = CovarianceMatrix::from_greens(&g).unwrap();
        let out = LossChannel::uniform(1, 1.0).unwrap().apply(&s).unwrap();
        assert_abs_diff_eq!((out.data() - s.data()).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn zero_transmission_gives_vacuum() {
        let g = GreensFunction::squeezer(1.3, 0.0);
        let s = CovarianceMatrix::from_greens(&g).unwrap();
        let out = LossChannel::uniform(1, 0.0).unwrap().apply(&s).unwrap();
        let vac = CovarianceMatrix::vacuum(1).unwrap();
        assert_abs_diff_eq!((out.data() - vac.data()).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn loss_scales_mean_photons() {
        let r = 1.0_f64;
        let g = GreensFunction::squeezer(r, 0.0);
        let s = CovarianceMatrix::from_greens(&g).unwrap();
        let out = LossChannel::uniform(1, 0.4).unwrap().apply(&s).unwrap();
        assert_abs_diff_eq!(
            out.mean_photons()[0],
            0.4 * r.sinh().powi(2),
            epsilon = 1e-12
        );
    }

    #[test]
    fn matches_beamsplitter_ancilla_trace() {
        // Dual route: embed the state with a vacuum ancilla, apply a
        // beamsplitter with cos²θ = η, trace out the ancilla.
        let r = 0.9_f64;
        let eta = 0.37_f64;
        let g = GreensFunction::two_mode_squeezer(r, 0.4);
        let s = CovarianceMatrix::from_greens(&g).unwrap();

        let direct = LossChannel::new(vec![eta, 1.0], vec![0.5, 0.5])
            .unwrap()
            .apply(&s)
            .unwrap();

        // Ancilla route on 3 modes: lossy mode 0, ancilla mode 2.
        let embed = g.embed(3, &[0, 1]).unwrap();
        let theta = eta.sqrt().acos();
        let bs = GreensFunction::beamsplitter(3, 0, 2, theta).unwrap();
        let big = CovarianceMatrix::vacuum(3)
            .unwrap()
            .apply_greens(&embed)
            .unwrap()
            .apply_greens(&bs)
            .unwrap();
        let traced = big.trace_out(&[0, 1]).unwrap();

        assert_abs_diff_eq!((direct.data() - traced.data()).norm(), 0.0, epsilon = 1e-10);
    }
}
