use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::{C64, CMat, RVec};

use super::GreensFunction;

/// Second-moment matrix of a zero-mean multimode Gaussian state in the
/// `[a, a†]` basis. Dimensionless, vacuum units: vacuum is `I/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    modes: usize,
    data: CMat,
}

const HERMITICITY_TOL: f64 = 1e-12;

impl CovarianceMatrix {
    /// Wraps a 2M×2M matrix, enforcing Hermiticity to within 1e-12 relative.
    pub fn new(modes: usize, data: CMat) -> Result<Self> {
        if modes == 0 {
            return Err(Error::InvalidArgument("mode count must be >= 1".into()));
        }
        if data.nrows() != 2 * modes || data.ncols() != 2 * modes {
            return Err(Error::DimensionMismatch(format!(
                "expected {0}x{0} covariance, got {1}x{2}",
                2 * modes,
                data.nrows(),
                data.ncols()
            )));
        }
        let scale = data.norm().max(1.0);
        let asym = (&data - data.adjoint()).norm() / scale;
        if asym > HERMITICITY_TOL {
            return Err(Error::NotSymmetric {
                residual: asym,
                tol: HERMITICITY_TOL,
            });
        }
        // Store the exactly Hermitian part so downstream eigensolves behave.
        let herm = (&data + data.adjoint()).scale(0.5);
        Ok(Self { modes, data: herm })
    }

    /// Vacuum state: `σ = I_{2M}/2`.
    pub fn vacuum(modes: usize) -> Result<Self> {
        if modes == 0 {
            return Err(Error::InvalidArgument("mode count must be >= 1".into()));
        }
        let data = CMat::identity(2 * modes, 2 * modes).scale(0.5);
        Ok(Self { modes, data })
    }

    /// `σ = ½ G G†` — the state produced by applying `G` to vacuum.
    pub fn from_greens(g: &GreensFunction) -> Result<Self> {
        if g.modes_in() != g.modes_out() {
            return Err(Error::DimensionMismatch(format!(
                "Green's function must be square, got {} -> {}",
                g.modes_in(),
                g.modes_out()
            )));
        }
        let full = g.full_matrix();
        let sigma = (&full * full.adjoint()).scale(0.5);
        Self::new(g.modes_out(), sigma)
    }

    /// Congruence transform `σ → G σ G†`.
    pub fn apply_greens(&self, g: &GreensFunction) -> Result<Self> {
        if g.modes_in() != self.modes {
            return Err(Error::DimensionMismatch(format!(
                "Green's function expects {} modes, state has {}",
                g.modes_in(),
                self.modes
            )));
        }
        let full = g.full_matrix();
        let out = &full * &self.data * full.adjoint();
        Self::new(g.modes_out(), out)
    }

    /// Partial trace: keeps the listed modes (both basis halves), dropping
    /// the rest. `keep` must be a nonempty set of in-range mode indices.
    pub fn trace_out(&self, keep: &[usize]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::InvalidArgument("keep set must be nonempty".into()));
        }
        let mut seen = vec![false; self.modes];
        for &k in keep {
            if k >= self.modes {
                return Err(Error::InvalidArgument(format!(
                    "mode {k} out of range (M = {})",
                    self.modes
                )));
            }
            if seen[k] {
                return Err(Error::InvalidArgument(format!("mode {k} listed twice")));
            }
            seen[k] = true;
        }
        let m = keep.len();
        let mut out = CMat::zeros(2 * m, 2 * m);
        for (r, &kr) in keep.iter().enumerate() {
            for (c, &kc) in keep.iter().enumerate() {
                out[(r, c)] = self.data[(kr, kc)];
                out[(r, c + m)] = self.data[(kr, kc + self.modes)];
                out[(r + m, c)] = self.data[(kr + self.modes, kc)];
                out[(r + m, c + m)] = self.data[(kr + self.modes, kc + self.modes)];
            }
        }
        Self::new(m, out)
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn data(&self) -> &CMat {
        &self.data
    }

    /// Thermal/classical quadrant: `V = σ_aa† − I/2` (Hermitian).
    pub fn v_quadrant(&self) -> CMat {
        let m = self.modes;
        let mut v = self.data.view((0, 0), (m, m)).into_owned();
        for i in 0..m {
            v[(i, i)] -= C64::new(0.5, 0.0);
        }
        v
    }

    /// Squeezing/entanglement quadrant: `U = σ_aa` (symmetric).
    pub fn u_quadrant(&self) -> CMat {
        let m = self.modes;
        self.data.view((0, m), (m, m)).into_owned()
    }

    /// Mean photon number per mode, `⟨n_i⟩ = V_ii`.
    pub fn mean_photons(&self) -> RVec {
        let m = self.modes;
        RVec::from_fn(m, |i, _| self.data[(i, i)].re - 0.5)
    }

    /// Most negative eigenvalue over the two uncertainty conditions
    /// `σ ± K/2 ⪰ 0`, `K = diag(I, −I)`. Physical states give ≳ 0 up to
    /// floating-point noise.
    pub fn physicality_residual(&self) -> f64 {
        let mut worst = f64::INFINITY;
        for sign in [1.0_f64, -1.0] {
            let mut m = self.data.clone();
            for i in 0..self.modes {
                m[(i, i)] += C64::new(0.5 * sign, 0.0);
                m[(i + self.modes, i + self.modes)] -= C64::new(0.5 * sign, 0.0);
            }
            let (vals, _) = crate::linalg::hermitian_eigen(&m)
                .expect("covariance matrices are Hermitian by construction");
            worst = worst.min(vals[0]);
        }
        worst
    }

    /// Rotates mode `i` by `a_i → e^{iθ} a_i`. Photon statistics are
    /// invariant under this local-phase gauge.
    pub fn rotate_mode_phase(&self, mode: usize, theta: f64) -> Result<Self> {
        if mode >= self.modes {
            return Err(Error::InvalidArgument(format!(
                "mode {mode} out of range (M = {})",
                self.modes
            )));
        }
        let mut phases = DMatrix::identity(2 * self.modes, 2 * self.modes);
        phases[(mode, mode)] = C64::from_polar(1.0, theta);
        phases[(mode + self.modes, mode + self.modes)] = C64::from_polar(1.0, -theta);
        let out = &phases * &self.data * phases.adjoint();
        Self::new(self.modes, out)
    }
}
