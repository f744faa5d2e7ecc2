//! Brute-force reference implementations used to cross-check the fast
//! engine: a pairing-enumeration hafnian and dense truncated Fock-space
//! states. Everything here favors obviousness over speed and shares no code
//! with the main crate.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Hafnian by direct enumeration of perfect matchings.
///
/// `Haf(A) = Σ_{M ∈ PMP(n)} Π_{(i,j) ∈ M} A_ij` over all perfect matchings
/// of {0..n}. Odd `n` gives 0, empty gives 1. Cost (n−1)!!, so keep n ≲ 16.
pub fn hafnian_pairing(a: &DMatrix<Complex64>) -> Complex64 {
    assert_eq!(a.nrows(), a.ncols(), "hafnian needs a square matrix");
    let n = a.nrows();
    if n % 2 == 1 {
        return Complex64::new(0.0, 0.0);
    }
    let mut used = vec![false; n];
    fn rec(a: &DMatrix<Complex64>, used: &mut [bool]) -> Complex64 {
        let Some(i) = used.iter().position(|u| !u) else {
            return Complex64::new(1.0, 0.0);
        };
        used[i] = true;
        let mut total = Complex64::new(0.0, 0.0);
        for j in (i + 1)..used.len() {
            if used[j] {
                continue;
            }
            used[j] = true;
            total += a[(i, j)] * rec(a, used);
            used[j] = false;
        }
        used[i] = false;
        total
    }
    rec(a, &mut used)
}

/// Pure state on `modes` modes in a dense Fock basis truncated at
/// `cutoff` photons per mode (occupations 0..=cutoff).
#[derive(Debug, Clone)]
pub struct FockState {
    modes: usize,
    cutoff: usize,
    amp: Vec<Complex64>,
}

impl FockState {
    fn dim_per_mode(&self) -> usize {
        self.cutoff + 1
    }

    fn index(&self, occ: &[usize]) -> usize {
        debug_assert_eq!(occ.len(), self.modes);
        let d = self.dim_per_mode();
        occ.iter().fold(0, |acc, &n| acc * d + n)
    }

    fn occupation(&self, mut idx: usize) -> Vec<usize> {
        let d = self.dim_per_mode();
        let mut occ = vec![0; self.modes];
        for i in (0..self.modes).rev() {
            occ[i] = idx % d;
            idx /= d;
        }
        occ
    }

    /// Vacuum on `modes` modes.
    pub fn vacuum(modes: usize, cutoff: usize) -> Self {
        let mut amp = vec![Complex64::new(0.0, 0.0); (cutoff + 1).pow(modes as u32)];
        amp[0] = Complex64::new(1.0, 0.0);
        Self { modes, cutoff, amp }
    }

    /// Single-mode squeezed vacuum:
    /// `|ψ⟩ = (1/√cosh r) Σ_k (−e^{iφ} tanh r / 2)^k √((2k)!)/k! |2k⟩`.
    pub fn squeezed(r: f64, phi: f64, cutoff: usize) -> Self {
        let mut s = Self::vacuum(1, cutoff);
        s.amp[0] = Complex64::new(0.0, 0.0);
        let base = -Complex64::from_polar(r.tanh(), phi) / 2.0;
        for k in 0..=(cutoff / 2) {
            let mut coeff = Complex64::new(1.0 / r.cosh().sqrt(), 0.0);
            // (base)^k · √((2k)!)/k!, built incrementally to avoid overflow.
            for j in 1..=k {
                let jf = j as f64;
                coeff *= base * ((2.0 * jf) * (2.0 * jf - 1.0)).sqrt() / jf;
            }
            s.amp[2 * k] = coeff;
        }
        s
    }

    /// Two-mode squeezed vacuum:
    /// `|ψ⟩ = (1/cosh r) Σ_k (e^{iφ} tanh r)^k |k, k⟩`.
    pub fn two_mode_squeezed(r: f64, phi: f64, cutoff: usize) -> Self {
        let mut s = Self::vacuum(2, cutoff);
        s.amp[0] = Complex64::new(0.0, 0.0);
        let base = Complex64::from_polar(r.tanh(), phi);
        let mut coeff = Complex64::new(1.0 / r.cosh(), 0.0);
        for k in 0..=cutoff {
            let idx = s.index(&[k, k]);
            s.amp[idx] = coeff;
            coeff *= base;
        }
        s
    }

    /// Thermal-like diagnostics don't need mixed states here; instead, a
    /// tensor product grows the register: `self ⊗ other`.
    pub fn tensor(&self, other: &Self) -> Self {
        assert_eq!(self.cutoff, other.cutoff, "cutoffs must match");
        let modes = self.modes + other.modes;
        let mut out = Self::vacuum(modes, self.cutoff);
        out.amp.iter_mut().for_each(|a| *a = Complex64::new(0.0, 0.0));
        for (ia, &va) in self.amp.iter().enumerate() {
            if va.norm_sqr() == 0.0 {
                continue;
            }
            for (ib, &vb) in other.amp.iter().enumerate() {
                let mut occ = self.occupation(ia);
                occ.extend(other.occupation(ib));
                let idx = out.index(&occ);
                out.amp[idx] = va * vb;
            }
        }
        out
    }

    /// Applies `exp(θ (a_i† a_j − a_j† a_i))` — a beamsplitter between modes
    /// `i` and `j` with transmission amplitude cos θ — by Taylor series on
    /// the truncated space. Keep total photons well below the cutoff.
    pub fn beamsplitter(&self, i: usize, j: usize, theta: f64) -> Self {
        assert!(i < self.modes && j < self.modes && i != j);
        let gen = |s: &Self| -> Vec<Complex64> {
            // v ← (a_i† a_j − a_j† a_i) v
            let mut out = vec![Complex64::new(0.0, 0.0); s.amp.len()];
            for (idx, &v) in s.amp.iter().enumerate() {
                if v.norm_sqr() == 0.0 {
                    continue;
                }
                let occ = s.occupation(idx);
                // a_i† a_j term: (n_i, n_j) → (n_i + 1, n_j − 1)
                if occ[j] >= 1 && occ[i] + 1 <= s.cutoff {
                    let mut o2 = occ.clone();
                    o2[i] += 1;
                    o2[j] -= 1;
                    let f = ((occ[i] as f64 + 1.0) * occ[j] as f64).sqrt();
                    out[s.index(&o2)] += v * f;
                }
                // −a_j† a_i term
                if occ[i] >= 1 && occ[j] + 1 <= s.cutoff {
                    let mut o2 = occ.clone();
                    o2[j] += 1;
                    o2[i] -= 1;
                    let f = ((occ[j] as f64 + 1.0) * occ[i] as f64).sqrt();
                    out[s.index(&o2)] -= v * f;
                }
            }
            out
        };
        // exp(θK)v via scaled Taylor: split θ into small steps for accuracy.
        let steps = (theta.abs().ceil() as usize).max(1) * 4;
        let dt = theta / steps as f64;
        let mut state = self.clone();
        for _ in 0..steps {
            let mut acc = state.amp.clone();
            let mut term = state.clone();
            for k in 1..=30 {
                let kv = gen(&term);
                for (t, s2) in term.amp.iter_mut().zip(kv) {
                    *t = s2 * (dt / k as f64);
                }
                for (a, t) in acc.iter_mut().zip(&term.amp) {
                    *a += t;
                }
                let tail: f64 = term.amp.iter().map(|z| z.norm_sqr()).sum();
                if tail < 1e-32 {
                    break;
                }
            }
            state.amp = acc;
        }
        state
    }

    /// Applies the phase rotation `exp(iθ n̂_mode)` (Heisenberg
    /// `a → e^{iθ} a`).
    pub fn phase(&self, mode: usize, theta: f64) -> Self {
        assert!(mode < self.modes);
        let mut out = self.clone();
        for (idx, a) in out.amp.iter_mut().enumerate() {
            let n = self.occupation(idx)[mode] as f64;
            *a *= Complex64::from_polar(1.0, theta * n);
        }
        out
    }

    /// Probability of the exact photon pattern `occ`.
    pub fn probability(&self, occ: &[usize]) -> f64 {
        self.amp[self.index(occ)].norm_sqr()
    }

    /// Marginal probability of a pattern on a subset of modes, summing over
    /// the rest (e.g. loss ancillas).
    pub fn marginal_probability(&self, modes: &[usize], occ: &[usize]) -> f64 {
        assert_eq!(modes.len(), occ.len());
        let mut total = 0.0;
        for (idx, a) in self.amp.iter().enumerate() {
            let p = a.norm_sqr();
            if p == 0.0 {
                continue;
            }
            let full = self.occupation(idx);
            if modes.iter().zip(occ).all(|(&m, &n)| full[m] == n) {
                total += p;
            }
        }
        total
    }

    /// Moment `⟨Π_i n_i^{k_i}⟩` with exponent `k_i = powers[i]` per mode.
    pub fn photon_moment(&self, powers: &[usize]) -> f64 {
        assert_eq!(powers.len(), self.modes);
        let mut total = 0.0;
        for (idx, a) in self.amp.iter().enumerate() {
            let p = a.norm_sqr();
            if p == 0.0 {
                continue;
            }
            let occ = self.occupation(idx);
            let w: f64 = occ
                .iter()
                .zip(powers)
                .map(|(&n, &k)| (n as f64).powi(k as i32))
                .product();
            total += p * w;
        }
        total
    }

    /// Squared norm; < 1 signals cutoff truncation.
    pub fn norm_sqr(&self) -> f64 {
        self.amp.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn modes(&self) -> usize {
        self.modes
    }
}
