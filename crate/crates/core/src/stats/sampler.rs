//! Exact photon-pattern sampling by the mode-by-mode chain rule.
//!
//! For each mode k in turn, the conditional distribution
//! `P(n_k | n_1..n_{k−1}) = P_{1..k}(n_1..n_k) / P_{1..k−1}(n_1..n_{k−1})`
//! is built from exact marginal probabilities of the reduced state on the
//! first k modes. Conditionals are cached by prefix and shared across shots
//! (and worker threads), so the Hafnian work is done once per distinct
//! prefix.

use std::collections::HashMap;
use std::sync::Mutex;

use rand::Rng;

use crate::error::{Error, Result};
use crate::exec::{run_shots, ExecMode};
use crate::gaussian::CovarianceMatrix;

use super::gbs::GbsEvaluator;
use super::PhotonPattern;

/// Largest mode count accepted for exact sampling.
pub const MAX_EXACT_MODES: usize = 16;
/// Hard per-mode photon cap; hitting it with unresolved mass is an error.
const HARD_CAP: usize = 40;
/// Acceptable per-prefix truncation mass.
const TRUNCATION_TOL: f64 = 1e-6;
/// Conditional tail mass at which extension stops.
const TAIL_STOP: f64 = 1e-10;

struct Shared {
    /// One probability evaluator per prefix length k (modes 0..=k).
    evals: Vec<Mutex<GbsEvaluator>>,
    /// prefix (length k) → conditional distribution of mode k given prefix,
    /// plus the unresolved tail mass.
    conditionals: Mutex<HashMap<Vec<u16>, (Vec<f64>, f64)>>,
}

impl Shared {
    fn conditional(&self, prefix: &[u16], prefix_prob: f64) -> Result<(Vec<f64>, f64)> {
        if let Some(hit) = self.conditionals.lock().unwrap().get(prefix) {
            return Ok(hit.clone());
        }
        let k = prefix.len();
        let mut eval = self.evals[k].lock().unwrap();
        let mut probs = Vec::new();
        let mut cum = 0.0;
        for n in 0..=HARD_CAP {
            let mut counts: Vec<usize> = prefix.iter().map(|&c| c as usize).collect();
            counts.push(n);
            let joint =
                eval.probability_capped(&PhotonPattern::new(counts)?, HARD_CAP * (k + 1))?;
            let cond = joint / prefix_prob;
            probs.push(cond);
            cum += cond;
            if 1.0 - cum < TAIL_STOP {
                break;
            }
        }
        let lost = (1.0 - cum).max(0.0);
        if lost > TRUNCATION_TOL {
            return Err(Error::TruncationLoss {
                lost,
                tol: TRUNCATION_TOL,
            });
        }
        let entry = (probs, lost);
        self.conditionals
            .lock()
            .unwrap()
            .insert(prefix.to_vec(), entry.clone());
        Ok(entry)
    }
}

/// Draws `shots` i.i.d. photon patterns from the state's exact
/// photon-number distribution. Deterministic for a fixed seed regardless of
/// execution mode.
pub fn sample_patterns(
    sigma: &CovarianceMatrix,
    shots: u64,
    seed: u64,
    mode: ExecMode,
) -> Result<Vec<PhotonPattern>> {
    let m = sigma.modes();
    if m > MAX_EXACT_MODES {
        return Err(Error::InvalidArgument(format!(
            "exact sampling capped at {MAX_EXACT_MODES} modes, got {m}"
        )));
    }
    let mut evals = Vec::with_capacity(m);
    for k in 0..m {
        let keep: Vec<usize> = (0..=k).collect();
        let reduced = if k + 1 == m {
            sigma.clone()
        } else {
            sigma.trace_out(&keep)?
        };
        evals.push(Mutex::new(GbsEvaluator::new(&reduced)?));
    }
    let shared = Shared {
        evals,
        conditionals: Mutex::new(HashMap::new()),
    };

    let results = run_shots(shots, seed, mode, |_, rng| {
        let mut prefix: Vec<u16> = Vec::with_capacity(m);
        let mut prefix_prob = 1.0;
        for _ in 0..m {
            let (cond, lost) = shared.conditional(&prefix, prefix_prob)?;
            let kept = 1.0 - lost;
            let mut x: f64 = rng.gen::<f64>() * kept;
            let mut chosen = cond.len() - 1;
            for (n, &p) in cond.iter().enumerate() {
                if x < p {
                    chosen = n;
                    break;
                }
                x -= p;
            }
            prefix_prob *= cond[chosen];
            prefix.push(chosen as u16);
        }
        PhotonPattern::new(prefix.iter().map(|&c| c as usize).collect())
    });
    results.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::GreensFunction;
    use crate::stats::{gbs_distribution, mean_photons};

    #[test]
    fn vacuum_samples_are_all_zero() {
        let v = CovarianceMatrix::vacuum(3).unwrap();
        let samples = sample_patterns(&v, 50, 1, ExecMode::Sequential).unwrap();
        assert!(samples.iter().all(|p| p.total() == 0));
    }

    #[test]
    fn deterministic_across_exec_modes() {
        let s = CovarianceMatrix::from_greens(&GreensFunction::two_mode_squeezer(0.6, 0.2))
            .unwrap();
        let a = sample_patterns(&s, 200, 7, ExecMode::Sequential).unwrap();
        let b = sample_patterns(&s, 200, 7, ExecMode::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn squeezed_sample_mean_matches() {
        let r = 0.5_f64;
        let s = CovarianceMatrix::from_greens(&GreensFunction::squeezer(r, 0.0)).unwrap();
        let shots = 100_000;
        let samples = sample_patterns(&s, shots, 12345, ExecMode::Parallel).unwrap();
        let mean: f64 =
            samples.iter().map(|p| p.counts[0] as f64).sum::<f64>() / shots as f64;
        let expect = r.sinh().powi(2);
        // Standard error of the mean from Var(n) = 2m(m+1).
        let se = (2.0 * expect * (expect + 1.0) / shots as f64).sqrt();
        assert!(
            (mean - expect).abs() < 3.0 * se,
            "mean {mean} vs {expect} (se {se})"
        );
    }

    #[test]
    fn tmsv_total_variation_small() {
        let r = 0.4_f64;
        let s = CovarianceMatrix::from_greens(&GreensFunction::two_mode_squeezer(r, 0.0))
            .unwrap();
        let shots = 100_000u64;
        let samples = sample_patterns(&s, shots, 99, ExecMode::Parallel).unwrap();
        let mut freq: HashMap<Vec<usize>, f64> = HashMap::new();
        for p in &samples {
            *freq.entry(p.counts.clone()).or_insert(0.0) += 1.0 / shots as f64;
        }
        let exact = gbs_distribution(&s, 16).unwrap();
        let mut tv = 0.0;
        let mut covered = 0.0;
        for (pat, p) in &exact {
            let f = freq.get(&pat.counts).copied().unwrap_or(0.0);
            tv += 0.5 * (p - f).abs();
            covered += p;
        }
        tv += 0.5 * (1.0 - covered);
        assert!(tv < 0.01, "total variation {tv}");
    }

    #[test]
    fn duality_mean_from_samples_consistent() {
        // The sampler and the analytic mean must agree for a lossy state.
        let g = GreensFunction::two_mode_squeezer(0.5, 0.0);
        let s = crate::gaussian::LossChannel::uniform(2, 0.7)
            .unwrap()
            .apply(&CovarianceMatrix::from_greens(&g).unwrap())
            .unwrap();
        let shots = 40_000u64;
        let samples = sample_patterns(&s, shots, 5, ExecMode::Parallel).unwrap();
        let mean0: f64 =
            samples.iter().map(|p| p.counts[0] as f64).sum::<f64>() / shots as f64;
        let expect = mean_photons(&s).unwrap()[0];
        let se = (2.0 * expect * (expect + 1.0) / shots as f64).sqrt();
        assert!((mean0 - expect).abs() < 4.0 * se, "{mean0} vs {expect}");
    }

    #[test]
    fn mode_cap_enforced() {
        let v = CovarianceMatrix::vacuum(17).unwrap();
        assert!(sample_patterns(&v, 1, 0, ExecMode::Sequential).is_err());
    }
}
