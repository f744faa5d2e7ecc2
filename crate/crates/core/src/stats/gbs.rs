//! Measurement probabilities of Gaussian states (boson sampling
//! distribution).
//!
//! `P(n) = Haf((XA)_n) / (n! |σ + I/2|^{1/2})` with
//! `A = I − (σ + I/2)^{-1}`; the submatrix `(XA)_n` repeats the rows and
//! columns of mode `i` (in both basis halves) `n_i` times.
//!
//! For lattice sums and sampling, repeated-index Hafnians are evaluated by
//! the recursive expansion along a repeated row, memoized over multiplicity
//! vectors; subproblems are shared across every pattern of a batch.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::gaussian::CovarianceMatrix;
use crate::{C64, CMat};

use super::PhotonPattern;

/// Default cap on `Σ n_i` for a single probability evaluation.
pub const DEFAULT_MAX_TOTAL: usize = 20;

/// The matrices entering photon statistics, derived from one state.
#[derive(Debug, Clone)]
pub struct StatsMatrices {
    modes: usize,
    /// `U_ij = ⟨a_i a_j⟩` (symmetric).
    pub u: CMat,
    /// `V_ij = ⟨a_i† a_j⟩` (Hermitian).
    pub v: CMat,
    /// GBS kernel `A = I − (σ + I/2)^{-1}`.
    pub a: CMat,
    /// Vacuum probability `|σ + I/2|^{-1/2}`.
    pub p_vacuum: f64,
}

impl StatsMatrices {
    pub fn from_covariance(sigma: &CovarianceMatrix) -> Result<Self> {
        let m = sigma.modes();
        let n = 2 * m;
        let mut q = sigma.data().clone();
        for i in 0..n {
            q[(i, i)] += C64::new(0.5, 0.0);
        }
        let lu = q.clone().lu();
        let det = lu.determinant();
        if det.re <= 0.0 || det.im.abs() > 1e-6 * det.re.abs().max(1.0) {
            return Err(Error::Unphysical(format!(
                "det(sigma + I/2) = {det} is not real positive"
            )));
        }
        let qinv = lu
            .try_inverse()
            .ok_or_else(|| Error::Unphysical("sigma + I/2 is singular".into()))?;
        let mut a = CMat::identity(n, n) - qinv;
        // Snap inversion round-off to exact zero so structural zeros of the
        // kernel survive (e.g. pure squeezed states must give exactly
        // vanishing odd-pattern hafnians).
        let snap = 1e-13 * a.norm();
        for z in a.iter_mut() {
            if z.norm() < snap {
                *z = C64::new(0.0, 0.0);
            }
        }
        Ok(Self {
            modes: m,
            u: sigma.u_quadrant(),
            v: sigma.v_quadrant().conjugate(),
            a,
            p_vacuum: 1.0 / det.re.sqrt(),
        })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    /// The symmetric kernel `XA` whose repeated-index Hafnians give
    /// probabilities.
    pub fn xa(&self) -> CMat {
        let m = self.modes;
        let n = 2 * m;
        let mut w = CMat::zeros(n, n);
        for r in 0..n {
            let src = if r < m { r + m } else { r - m };
            for c in 0..n {
                w[(r, c)] = self.a[(src, c)];
            }
        }
        w
    }
}

/// Memoized evaluator of measurement probabilities for one state.
///
/// Keep the evaluator alive across calls when computing many patterns — the
/// Hafnian expansion subproblems are shared.
#[derive(Debug)]
pub struct GbsEvaluator {
    modes: usize,
    w: CMat,
    p_vacuum: f64,
    /// Memoized `(Haf, Haf of |W|)` per multiplicity vector; the second
    /// entry bounds the term magnitudes feeding the first and sets the
    /// scale for the realness check.
    memo: HashMap<Vec<u16>, (C64, f64)>,
}

impl GbsEvaluator {
    pub fn new(sigma: &CovarianceMatrix) -> Result<Self> {
        let stats = StatsMatrices::from_covariance(sigma)?;
        Ok(Self {
            modes: stats.modes(),
            w: stats.xa(),
            p_vacuum: stats.p_vacuum,
            memo: HashMap::new(),
        })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    /// `P(n)` for one pattern, with `Σ n_i ≤ max_total`.
    pub fn probability_capped(
        &mut self,
        pattern: &PhotonPattern,
        max_total: usize,
    ) -> Result<f64> {
        if pattern.counts.len() != self.modes {
            return Err(Error::DimensionMismatch(format!(
                "pattern has {} modes, state has {}",
                pattern.counts.len(),
                self.modes
            )));
        }
        let total = pattern.total();
        if total > max_total {
            return Err(Error::InvalidArgument(format!(
                "pattern total {total} exceeds cap {max_total}"
            )));
        }
        if total % 2 == 1 && self.w.iter().all(|z| z.norm() == 0.0) {
            return Ok(0.0);
        }
        // Multiplicity vector over the 2M kernel indices: mode i repeats
        // index i and index M+i, n_i times each.
        let mut counts = vec![0u16; 2 * self.modes];
        for (i, &ni) in pattern.counts.iter().enumerate() {
            counts[i] = ni as u16;
            counts[i + self.modes] = ni as u16;
        }
        let (haf, scale) = self.haf_repeated(counts);
        // The exact hafnian is real; the imaginary residue comes from
        // cancellation among terms of magnitude up to `scale`.
        if haf.im.abs() > 1e-9 * scale.max(1.0) {
            return Err(Error::NonConvergence(format!(
                "probability came out complex: {haf} (term scale {scale:.3e})"
            )));
        }
        let p = self.p_vacuum * haf.re / pattern.factorial();
        Ok(p.max(0.0))
    }

    /// `P(n)` with the default total-photon cap.
    pub fn probability(&mut self, pattern: &PhotonPattern) -> Result<f64> {
        self.probability_capped(pattern, DEFAULT_MAX_TOTAL)
    }

    /// Hafnian of the kernel with row/column multiplicities `counts`, by
    /// expansion along the first index with multiplicity left:
    /// `Haf(c) = Σ_j c'_j W[i][j] Haf(c' − e_j)` with `c' = c − e_i`.
    fn haf_repeated(&mut self, counts: Vec<u16>) -> (C64, f64) {
        let total: u32 = counts.iter().map(|&c| c as u32).sum();
        if total == 0 {
            return (C64::new(1.0, 0.0), 1.0);
        }
        if total % 2 == 1 {
            return (C64::new(0.0, 0.0), 0.0);
        }
        if let Some(&cached) = self.memo.get(&counts) {
            return cached;
        }
        let i = counts
            .iter()
            .position(|&c| c > 0)
            .expect("total > 0 implies a nonzero count");
        let mut reduced = counts.clone();
        reduced[i] -= 1;
        let mut acc = C64::new(0.0, 0.0);
        let mut acc_abs = 0.0;
        for j in 0..reduced.len() {
            if reduced[j] == 0 {
                continue;
            }
            let weight = reduced[j] as f64;
            let mut next = reduced.clone();
            next[j] -= 1;
            let (sub, sub_abs) = self.haf_repeated(next);
            acc += self.w[(i, j)] * weight * sub;
            acc_abs += self.w[(i, j)].norm() * weight * sub_abs;
        }
        self.memo.insert(counts, (acc, acc_abs));
        (acc, acc_abs)
    }
}

/// One-off probability of a single pattern.
pub fn gbs_probability(sigma: &CovarianceMatrix, pattern: &PhotonPattern) -> Result<f64> {
    GbsEvaluator::new(sigma)?.probability(pattern)
}

/// All pattern probabilities with `Σ n_i ≤ max_total`, in lexicographic
/// pattern order.
pub fn gbs_distribution(
    sigma: &CovarianceMatrix,
    max_total: usize,
) -> Result<Vec<(PhotonPattern, f64)>> {
    let mut eval = GbsEvaluator::new(sigma)?;
    let m = eval.modes();
    let mut out = Vec::new();
    let mut pattern = vec![0usize; m];
    loop {
        let p = PhotonPattern::new(pattern.clone())?;
        let prob = eval.probability_capped(&p, max_total)?;
        out.push((p, prob));
        // Advance to the next lattice point with Σ ≤ max_total.
        let mut k = m;
        loop {
            if k == 0 {
                return Ok(out);
            }
            k -= 1;
            pattern[k] += 1;
            if pattern.iter().sum::<usize>() <= max_total {
                break;
            }
            pattern[k] = 0;
        }
    }
}

/// Chernoff bound on the probability that independent squeezed-vacuum modes
/// with parameters `rs` emit more than `max_total` photons in total.
///
/// Uses the generating function `E[z^{n_i}] = 1/(cosh r √(1 − z² tanh² r))`
/// minimized over a grid of valid `z > 1`.
pub fn squeezed_tail_bound(rs: &[f64], max_total: usize) -> f64 {
    let tmax = rs.iter().map(|r| r.tanh().abs()).fold(0.0_f64, f64::max);
    if tmax == 0.0 {
        return 0.0;
    }
    let z_sup = 1.0 / tmax;
    let mut best = 1.0_f64;
    for step in 1..200 {
        let z = 1.0 + (z_sup - 1.0) * step as f64 / 200.0;
        if z * tmax >= 1.0 {
            break;
        }
        let mut log_mgf = 0.0;
        for &r in rs {
            let t = r.tanh();
            log_mgf += -r.cosh().ln() - 0.5 * (1.0 - z * z * t * t).ln();
        }
        // P(N > T) ≤ E[z^N] / z^{T+1}.
        let bound = (log_mgf - (max_total as f64 + 1.0) * z.ln()).exp();
        best = best.min(bound);
    }
    best
}
