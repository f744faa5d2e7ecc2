//! Split-step solvers for the two nonlinear processes.
//!
//! DOPA (degenerate parametric amplification):
//! `da/dz = iD a + iA(z) * a†` — the pump couples detunings with
//! `δ_s + δ_i = δ_p`, so the discrete coupling kernel is the Hankel matrix
//! `K[i][j] = κ A[i+j]`. The Green's-function blocks evolve as
//! `dC/dz = iDC + iKS*`, `dS/dz = iDS + iKC*`.
//!
//! AFC (sum-frequency conversion between an infrared and a visible band):
//! `d/dz [a_vis; a_ir] = i [[D_vis ± β₀z, K], [K†, D_ir ∓ β₀z]] [a_vis; a_ir]`
//! with the Toeplitz kernel `K[i][j] = κ A[i−j]` (δ_vis = δ_ir + δ_p). The
//! total map is passive (photon-number conserving), hence unitary.
//!
//! Both use Strang splitting: half-step dispersion phases, exact matrix
//! exponential of the coupling sampled at the step midpoint, half-step
//! dispersion. The quasi-phase-matching sweep is treated either in the
//! rotating frame (linear detuning `±β₀z`, crystal coordinate centered so
//! z = 0 is phase-matched) or with an explicit ±1 domain profile, in which
//! case steps are split at domain walls.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::gaussian::{CovarianceMatrix, GreensFunction};
use crate::{C64, CMat, CVec};

use super::{shape_pump, DispersionProfile, PolingProfile, PumpPulse};

const CONVERGENCE_TOL: f64 = 1e-4;
const SYMPLECTIC_TOL: f64 = 1e-6;
const UNITARITY_TOL: f64 = 1e-6;

/// Numerical-propagation settings shared by both solvers.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagationConfig {
    /// Base z-step count; convergence is validated against 2× this.
    pub z_steps: usize,
    /// Nonlinear coupling strength κ (1/(m·√W)); multiplies the pump kernel.
    pub kappa: f64,
    /// Crystal length L (m).
    pub length: f64,
    /// Dispersion orders [Δβ₁, β₂, …] applied to the (undepleted) pump
    /// itself as it propagates.
    pub pump_beta_coeffs: Vec<f64>,
}

impl PropagationConfig {
    pub fn new(z_steps: usize, kappa: f64, length: f64) -> Result<Self> {
        if z_steps < 16 {
            return Err(Error::InvalidArgument(format!(
                "z_steps must be >= 16, got {z_steps}"
            )));
        }
        if !(length > 0.0) || !kappa.is_finite() || kappa < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "bad propagation parameters: kappa = {kappa}, length = {length}"
            )));
        }
        Ok(Self {
            z_steps,
            kappa,
            length,
            pump_beta_coeffs: Vec::new(),
        })
    }

    pub fn with_pump_dispersion(mut self, beta_coeffs: Vec<f64>) -> Self {
        self.pump_beta_coeffs = beta_coeffs;
        self
    }
}

/// Signal-band mode count implied by a pump spectrum of odd length 2M−1.
fn band_size(pump_len: usize) -> Result<usize> {
    if pump_len % 2 == 0 {
        return Err(Error::DimensionMismatch(format!(
            "pump grid must have odd length 2M-1, got {pump_len}"
        )));
    }
    Ok((pump_len + 1) / 2)
}

/// Hankel coupling kernel of the DOPA: `K[i][j] = A[i+j]` (symmetric).
/// Signal band size M = (len(A)+1)/2.
pub fn dopa_coupling_matrix(pump_amplitude: &CVec) -> Result<CMat> {
    let m = band_size(pump_amplitude.len())?;
    Ok(CMat::from_fn(m, m, |i, j| pump_amplitude[i + j]))
}

/// Toeplitz coupling kernel of the AFC: `K[i][j] = A[i−j+M−1]`.
/// Band size M = (len(A)+1)/2; pump shaping enters through `A` itself.
pub fn lz_coupling_matrix(pump_amplitude: &CVec) -> Result<CMat> {
    let m = band_size(pump_amplitude.len())?;
    Ok(CMat::from_fn(m, m, |i, j| {
        pump_amplitude[i + m - 1 - j]
    }))
}

/// `exp(s·H)` for Hermitian `H` and real `s`.
fn exp_hermitian(h: &CMat, s: f64) -> CMat {
    crate::linalg::expm(&h.map(|z| z * s))
}

/// `exp(i·s·H)` for Hermitian `H` and real `s` (a unitary).
fn exp_i_hermitian(h: &CMat, s: f64) -> CMat {
    crate::linalg::expm(&h.map(|z| z * C64::new(0.0, s)))
}

/// Pump spectrum propagated to position z under its own dispersion.
fn pump_at(shaped: &CVec, detunings: &[f64], beta: &[f64], z: f64) -> CVec {
    if beta.is_empty() {
        return shaped.clone();
    }
    let disp = DispersionProfile::new(beta.to_vec(), 0.0).expect("validated at config build");
    CVec::from_fn(shaped.len(), |k, _| {
        shaped[k] * C64::from_polar(1.0, disp.phase_rate(detunings[k]) * z)
    })
}

fn run_dopa(
    shaped: &CVec,
    pump_detunings: &[f64],
    signal_phase: &DVector<f64>,
    cfg: &PropagationConfig,
    steps: usize,
) -> GreensFunction {
    let m = signal_phase.len();
    let dz = cfg.length / steps as f64;
    let mut c = CMat::identity(m, m);
    let mut s = CMat::zeros(m, m);
    let half: Vec<C64> = (0..m)
        .map(|i| C64::from_polar(1.0, signal_phase[i] * dz / 2.0))
        .collect();
    for step in 0..steps {
        let zmid = (step as f64 + 0.5) * dz;
        for r in 0..m {
            for col in 0..m {
                c[(r, col)] *= half[r];
                s[(r, col)] *= half[r];
            }
        }
        let a = pump_at(shaped, pump_detunings, &cfg.pump_beta_coeffs, zmid);
        let k = dopa_coupling_matrix(&a).expect("length checked by caller") * C64::new(cfg.kappa, 0.0);
        // Generator on the stacked [C; S*]: B = [[0, iK], [−iK*, 0]], which
        // is Hermitian for symmetric K — squeezing is hyperbolic.
        let mut b = CMat::zeros(2 * m, 2 * m);
        for r in 0..m {
            for col in 0..m {
                b[(r, col + m)] = C64::i() * k[(r, col)];
                b[(r + m, col)] = -C64::i() * k[(r, col)].conj();
            }
        }
        let e = exp_hermitian(&b, dz);
        let sc = s.conjugate();
        let new_c = e.view((0, 0), (m, m)) * &c + e.view((0, m), (m, m)) * &sc;
        let new_sc = e.view((m, 0), (m, m)) * &c + e.view((m, m), (m, m)) * &sc;
        c = new_c;
        s = new_sc.conjugate();
        for r in 0..m {
            for col in 0..m {
                c[(r, col)] *= half[r];
                s[(r, col)] *= half[r];
            }
        }
    }
    GreensFunction::new(c, s).expect("blocks share a shape")
}

/// Propagates the DOPA over the crystal, returning the signal-band Green's
/// function. The signal grid shares the pump's spacing, with
/// M = (pump points + 1)/2 modes; `disp` is evaluated at signal detunings.
pub fn solve_dopa(
    pump: &PumpPulse,
    disp: &DispersionProfile,
    cfg: &PropagationConfig,
) -> Result<GreensFunction> {
    let m = band_size(pump.grid.len())?;
    let shaped = shape_pump(pump);
    let pump_detunings = pump.grid.detunings();
    let signal_grid = super::FrequencyGrid::new(m, 0.0, pump.grid.spacing())?;
    let signal_phase = DVector::from_fn(m, |i, _| disp.phase_rate(signal_grid.detuning(i)));

    let coarse = run_dopa(&shaped, &pump_detunings, &signal_phase, cfg, cfg.z_steps);
    let fine = run_dopa(&shaped, &pump_detunings, &signal_phase, cfg, 2 * cfg.z_steps);
    let scale = fine.full_matrix().norm().max(1.0);
    let diff = (coarse.full_matrix() - fine.full_matrix()).norm() / scale;
    if diff > CONVERGENCE_TOL {
        return Err(Error::NonConvergence(format!(
            "step-doubling disagreement {diff:.3e} > {CONVERGENCE_TOL:.1e}; increase z_steps"
        )));
    }
    let residual = fine.symplectic_residual();
    if residual > SYMPLECTIC_TOL {
        return Err(Error::NotSymplectic {
            residual,
            tol: SYMPLECTIC_TOL,
        });
    }
    Ok(fine)
}

/// Passive bipartite Green's function of the AFC over the joint
/// (visible, infrared) space, modes ordered `[vis 0..M, ir 0..M]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AfcGreens {
    band: usize,
    u: CMat,
}

impl AfcGreens {
    pub fn band_size(&self) -> usize {
        self.band
    }

    /// Full 2M×2M unitary.
    pub fn full(&self) -> &CMat {
        &self.u
    }

    pub fn g_vis_vis(&self) -> CMat {
        self.u.view((0, 0), (self.band, self.band)).into_owned()
    }

    pub fn g_vis_ir(&self) -> CMat {
        self.u.view((0, self.band), (self.band, self.band)).into_owned()
    }

    pub fn g_ir_vis(&self) -> CMat {
        self.u.view((self.band, 0), (self.band, self.band)).into_owned()
    }

    pub fn g_ir_ir(&self) -> CMat {
        self.u
            .view((self.band, self.band), (self.band, self.band))
            .into_owned()
    }

    /// Max-abs of `UU† − I`.
    pub fn unitarity_residual(&self) -> f64 {
        let n = self.u.nrows();
        let r = &self.u * self.u.adjoint() - CMat::identity(n, n);
        r.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Observed visible-band state for an infrared input state (visible
    /// input is vacuum):
    /// `σ_vis = G_vis,ir σ_ir G_vis,ir† + ½ G_vis,vis G_vis,vis†`.
    pub fn output_covariance(&self, sigma_ir: &CovarianceMatrix) -> Result<CovarianceMatrix> {
        let m = self.band;
        if sigma_ir.modes() != m {
            return Err(Error::DimensionMismatch(format!(
                "infrared state has {} modes, band has {m}",
                sigma_ir.modes()
            )));
        }
        // Assemble the joint state (vis vacuum ⊗ ir state) and push it
        // through the passive map, then keep the visible modes.
        let mut joint = CMat::identity(4 * m, 4 * m).scale(0.5);
        let d = sigma_ir.data();
        for r in 0..m {
            for c in 0..m {
                joint[(m + r, m + c)] = d[(r, c)];
                joint[(m + r, 3 * m + c)] = d[(r, m + c)];
                joint[(3 * m + r, m + c)] = d[(m + r, c)];
                joint[(3 * m + r, 3 * m + c)] = d[(m + r, m + c)];
            }
        }
        let sigma_joint = CovarianceMatrix::new(2 * m, joint)?;
        let g = GreensFunction::new(self.u.clone(), CMat::zeros(2 * m, 2 * m))?;
        let keep: Vec<usize> = (0..m).collect();
        sigma_joint.apply_greens(&g)?.trace_out(&keep)
    }
}

struct AfcSetup<'a> {
    shaped: CVec,
    pump_detunings: Vec<f64>,
    d_vis: Vec<f64>,
    d_ir: Vec<f64>,
    beta0: f64,
    poling: Option<(&'a PolingProfile, f64)>,
    cfg: &'a PropagationConfig,
}

fn run_afc(setup: &AfcSetup, steps: usize) -> CMat {
    let m = setup.d_vis.len();
    let l = setup.cfg.length;
    let dz = l / steps as f64;
    let mut u = CMat::identity(2 * m, 2 * m);
    for step in 0..steps {
        let z0 = step as f64 * dz;
        // Split the step at poling domain walls so χ is constant per
        // segment.
        let mut segs: Vec<(f64, f64)> = Vec::new();
        if let Some((profile, _)) = setup.poling {
            let mut start = z0;
            let mut acc = 0.0;
            for &len in profile.domain_lengths() {
                acc += len;
                if acc > z0 && acc < z0 + dz {
                    segs.push((start, acc));
                    start = acc;
                }
                if acc >= z0 + dz {
                    break;
                }
            }
            segs.push((start, z0 + dz));
        } else {
            segs.push((z0, z0 + dz));
        }
        for &(a, b) in &segs {
            let seg = b - a;
            if seg <= 0.0 {
                continue;
            }
            let zm = (a + b) / 2.0;
            let pump = pump_at(
                &setup.shaped,
                &setup.pump_detunings,
                &setup.cfg.pump_beta_coeffs,
                zm,
            );
            let k = lz_coupling_matrix(&pump).expect("length checked by caller")
                * C64::new(setup.cfg.kappa, 0.0);
            let mut h = CMat::zeros(2 * m, 2 * m);
            match setup.poling {
                None => {
                    // Rotating frame: crystal centered at z = 0.
                    let zc = zm - l / 2.0;
                    for i in 0..m {
                        h[(i, i)] = C64::new(setup.d_vis[i] + setup.beta0 * zc, 0.0);
                        h[(i + m, i + m)] = C64::new(setup.d_ir[i] - setup.beta0 * zc, 0.0);
                    }
                    for r in 0..m {
                        for c in 0..m {
                            h[(r, c + m)] = k[(r, c)];
                            h[(c + m, r)] = k[(r, c)].conj();
                        }
                    }
                }
                Some((profile, mismatch)) => {
                    let chi = profile.sign_at(zm);
                    let carrier = C64::from_polar(chi, -mismatch * zm);
                    for i in 0..m {
                        h[(i, i)] = C64::new(setup.d_vis[i], 0.0);
                        h[(i + m, i + m)] = C64::new(setup.d_ir[i], 0.0);
                    }
                    for r in 0..m {
                        for c in 0..m {
                            h[(r, c + m)] = carrier * k[(r, c)];
                            h[(c + m, r)] = (carrier * k[(r, c)]).conj();
                        }
                    }
                }
            }
            u = exp_i_hermitian(&h, seg) * u;
        }
    }
    u
}

/// Estimates the carrier QPM wavenumber of a poling profile from the domain
/// lengths around the crystal center.
fn center_spatial_frequency(profile: &PolingProfile) -> f64 {
    let l = profile.total_length();
    let mut acc = 0.0;
    let mut count = 0usize;
    let mut z = 0.0;
    for &len in profile.domain_lengths() {
        let mid = z + len / 2.0;
        if (0.45 * l..0.55 * l).contains(&mid) {
            acc += len;
            count += 1;
        }
        z += len;
    }
    std::f64::consts::PI * count as f64 / acc.max(f64::MIN_POSITIVE)
}

/// Propagates the AFC over the crystal.
///
/// With `poling = None`, the quasi-phase-matching sweep is modeled in the
/// rotating frame using `disp_vis.beta0_rate()` (detuning `+β₀z` on the
/// visible band, `−β₀z` on the infrared, crystal centered so z = 0 is
/// phase-matched). With an explicit profile, the ±1 domain structure
/// multiplies the coupling and the carrier mismatch is taken as the
/// profile's central spatial frequency.
pub fn solve_afc(
    pump: &PumpPulse,
    disp_ir: &DispersionProfile,
    disp_vis: &DispersionProfile,
    poling: Option<&PolingProfile>,
    cfg: &PropagationConfig,
) -> Result<AfcGreens> {
    let m = band_size(pump.grid.len())?;
    let band_grid = super::FrequencyGrid::new(m, 0.0, pump.grid.spacing())?;
    let setup = AfcSetup {
        shaped: shape_pump(pump),
        pump_detunings: pump.grid.detunings(),
        d_vis: (0..m).map(|i| disp_vis.phase_rate(band_grid.detuning(i))).collect(),
        d_ir: (0..m).map(|i| disp_ir.phase_rate(band_grid.detuning(i))).collect(),
        beta0: disp_vis.beta0_rate(),
        poling: poling.map(|p| (p, center_spatial_frequency(p))),
        cfg,
    };
    let coarse = run_afc(&setup, cfg.z_steps);
    let fine = run_afc(&setup, 2 * cfg.z_steps);
    let diff = (&coarse - &fine).norm() / fine.norm().max(1.0);
    if diff > CONVERGENCE_TOL {
        return Err(Error::NonConvergence(format!(
            "step-doubling disagreement {diff:.3e} > {CONVERGENCE_TOL:.1e}; increase z_steps"
        )));
    }
    let out = AfcGreens { band: m, u: fine };
    let residual = out.unitarity_residual();
    if residual > UNITARITY_TOL {
        return Err(Error::NotUnitary {
            residual,
            tol: UNITARITY_TOL,
        });
    }
    Ok(out)
}

/// Conversion efficiency `‖G_vis,ir v‖² / ‖v‖²` for each input-mode column
/// of `input_modes`.
pub fn conversion_efficiency(g: &AfcGreens, input_modes: &CMat) -> Result<Vec<f64>> {
    if input_modes.nrows() != g.band_size() {
        return Err(Error::DimensionMismatch(format!(
            "input modes live on {} points, band has {}",
            input_modes.nrows(),
            g.band_size()
        )));
    }
    let residual = g.unitarity_residual();
    if residual > UNITARITY_TOL {
        return Err(Error::NotUnitary {
            residual,
            tol: UNITARITY_TOL,
        });
    }
    let gvi = g.g_vis_ir();
    let mut out = Vec::with_capacity(input_modes.ncols());
    for j in 0..input_modes.ncols() {
        let v = input_modes.column(j);
        let n2 = v.norm_squared();
        if n2 == 0.0 {
            return Err(Error::InvalidArgument(format!("input mode {j} is zero")));
        }
        out.push(((&gvi * v).norm_squared() / n2).min(1.0));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::bloch_messiah;
    use crate::nlo::{design_poling, FrequencyGrid};
    use approx::assert_abs_diff_eq;

    fn mono_pump(amp: f64) -> PumpPulse {
        PumpPulse::monochromatic(0.0, 1.0, C64::new(amp, 0.0)).unwrap()
    }

    fn gauss_pump(n: usize, peak: f64, width: f64) -> PumpPulse {
        let grid = FrequencyGrid::new(n, 0.0, 1.0).unwrap();
        let amp = CVec::from_fn(n, |i, _| {
            let d = grid.detuning(i);
            C64::new(peak * (-d * d / (2.0 * width * width)).exp(), 0.0)
        });
        PumpPulse::unshaped(grid, amp).unwrap()
    }

    #[test]
    fn zero_pump_dopa_is_pure_dispersion() {
        let pump = mono_pump(0.0);
        let disp = DispersionProfile::new(vec![0.7, 0.1], 0.0).unwrap();
        let cfg = PropagationConfig::new(32, 1.0, 2.0).unwrap();
        let g = solve_dopa(&pump, &disp, &cfg).unwrap();
        assert_abs_diff_eq!(g.s().norm(), 0.0, epsilon = 1e-14);
        // Single signal mode at detuning 0: phase e^{iD(0)L} = 1.
        assert_abs_diff_eq!((g.c()[(0, 0)] - C64::new(1.0, 0.0)).norm(), 0.0, epsilon = 1e-12);
        let pump9 = gauss_pump(9, 0.0, 1.0);
        let g9 = solve_dopa(&pump9, &disp, &cfg).unwrap();
        assert_abs_diff_eq!(g9.s().norm(), 0.0, epsilon = 1e-14);
        for i in 0..5 {
            let grid = FrequencyGrid::new(5, 0.0, 1.0).unwrap();
            let expect = C64::from_polar(1.0, disp.phase_rate(grid.detuning(i)) * 2.0);
            assert_abs_diff_eq!((g9.c()[(i, i)] - expect).norm(), 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn monochromatic_dopa_matches_analytic() {
        let amp = 0.8;
        let kappa = 0.9;
        let l = 1.3;
        let pump = mono_pump(amp);
        let cfg = PropagationConfig::new(16, kappa, l).unwrap();
        let g = solve_dopa(&pump, &DispersionProfile::flat(), &cfg).unwrap();
        let r = kappa * amp * l;
        assert_abs_diff_eq!(g.c()[(0, 0)].norm(), r.cosh(), epsilon = 1e-4);
        assert_abs_diff_eq!(g.s()[(0, 0)].norm(), r.sinh(), epsilon = 1e-4);
    }

    #[test]
    fn pulsed_dopa_is_symplectic_and_decomposable() {
        let pump = gauss_pump(17, 0.6, 2.0);
        let disp = DispersionProfile::new(vec![0.2, 0.05], 0.0).unwrap();
        let cfg = PropagationConfig::new(64, 1.0, 1.0).unwrap();
        let g = solve_dopa(&pump, &disp, &cfg).unwrap();
        assert!(g.symplectic_residual() < 1e-6);
        let d = bloch_messiah(&g).unwrap();
        let sigma = CovarianceMatrix::from_greens(&g).unwrap();
        let total: f64 = sigma.mean_photons().iter().sum();
        assert_abs_diff_eq!(d.total_mean_photons(), total, epsilon = 1e-8);
        assert!(total > 0.01, "pump should generate photons");
    }

    #[test]
    fn coupling_matrix_shapes() {
        let a = CVec::from_fn(5, |i, _| C64::new(i as f64, 0.0));
        let hankel = dopa_coupling_matrix(&a).unwrap();
        assert_eq!(hankel.nrows(), 3);
        assert_abs_diff_eq!(hankel[(1, 2)].re, 3.0);
        assert_abs_diff_eq!(hankel[(2, 1)].re, 3.0);
        let toeplitz = lz_coupling_matrix(&a).unwrap();
        // K[i][j] = A[i−j+M−1]; diagonals constant.
        assert_abs_diff_eq!(toeplitz[(0, 0)].re, 2.0);
        assert_abs_diff_eq!(toeplitz[(1, 1)].re, 2.0);
        assert_abs_diff_eq!(toeplitz[(2, 2)].re, 2.0);
        assert_abs_diff_eq!(toeplitz[(0, 1)].re, 1.0);
        assert_abs_diff_eq!(toeplitz[(1, 2)].re, 1.0);
        // Monochromatic pump → single diagonal.
        let mono = CVec::from_element(1, C64::new(2.0, 0.0));
        let k1 = lz_coupling_matrix(&mono).unwrap();
        assert_eq!(k1.nrows(), 1);
        assert_abs_diff_eq!(k1[(0, 0)].re, 2.0);
    }

    #[test]
    fn zero_pump_afc_does_not_convert() {
        let pump = mono_pump(0.0);
        let disp = DispersionProfile::new(vec![0.1], 1.0).unwrap();
        let cfg = PropagationConfig::new(32, 1.0, 4.0).unwrap();
        let g = solve_afc(&pump, &DispersionProfile::flat(), &disp, None, &cfg).unwrap();
        assert_abs_diff_eq!(g.g_vis_ir().norm(), 0.0, epsilon = 1e-13);
        assert!(g.unitarity_residual() < 1e-10);
    }

    #[test]
    fn landau_zener_two_level() {
        // H = [[β₀z, κA], [κA, −β₀z]]: survival exp(−2π(κA)²/(2β₀)).
        let beta0 = 1.0;
        let l = 200.0;
        for ka in [0.3_f64, 0.5, 0.8] {
            let pump = mono_pump(ka);
            let disp_vis = DispersionProfile::new(vec![], beta0).unwrap();
            let cfg = PropagationConfig::new(16384, 1.0, l).unwrap();
            let g = solve_afc(&pump, &DispersionProfile::flat(), &disp_vis, None, &cfg).unwrap();
            let survival = g.g_ir_ir()[(0, 0)].norm_sqr();
            let expect = (-2.0 * std::f64::consts::PI * ka * ka / (2.0 * beta0)).exp();
            assert!(
                (survival - expect).abs() / expect < 0.03,
                "kA = {ka}: survival {survival:.4} vs LZ {expect:.4}"
            );
        }
    }

    #[test]
    fn explicit_poling_matches_rotating_frame() {
        // Same two-level sweep in both pictures. The square-wave domain
        // profile carries its power in the first Fourier harmonic, so the
        // explicit picture needs κ_explicit = (π/2) κ_rotating.
        let beta0 = 1.0_f64;
        let l = 40.0_f64;
        let ka_rot = 0.5_f64;
        let carrier = 200.0_f64; // carrier mismatch β̄ ≫ sweep range
        let sweep = 2.0 * beta0 * l; // Δk spans β̄ ± β₀L
        let quantum = 1e-4;
        let poling = design_poling(
            carrier - sweep / 2.0,
            carrier + sweep / 2.0,
            l,
            quantum,
            0.0,
        )
        .unwrap();

        let disp_vis = DispersionProfile::new(vec![], beta0).unwrap();
        let cfg_rot = PropagationConfig::new(2048, 1.0, l).unwrap();
        let g_rot = solve_afc(
            &mono_pump(ka_rot),
            &DispersionProfile::flat(),
            &disp_vis,
            None,
            &cfg_rot,
        )
        .unwrap();

        // The explicit picture resolves the fast carrier oscillation, so it
        // needs a far finer step than the rotating frame to pass the
        // internal step-doubling check.
        let cfg_exp = PropagationConfig::new(262_144, 1.0, l).unwrap();
        let g_exp = solve_afc(
            &mono_pump(ka_rot * std::f64::consts::FRAC_PI_2),
            &DispersionProfile::flat(),
            &DispersionProfile::flat(),
            Some(&poling),
            &cfg_exp,
        )
        .unwrap();

        let s_rot = g_rot.g_ir_ir()[(0, 0)].norm_sqr();
        let s_exp = g_exp.g_ir_ir()[(0, 0)].norm_sqr();
        assert!(
            (s_rot - s_exp).abs() < 0.05,
            "rotating {s_rot:.4} vs explicit {s_exp:.4}"
        );
    }

    #[test]
    fn translation_covariance_with_flat_dispersion() {
        // Pure β₀ sweep, single-line pump: every frequency pair evolves
        // identically, so the map is exactly Toeplitz (diagonal).
        let pump = PumpPulse::monochromatic(0.0, 1.0, C64::new(0.4, 0.0)).unwrap();
        let grid = FrequencyGrid::new(9, 0.0, 1.0).unwrap();
        let wide = PumpPulse::unshaped(
            grid,
            CVec::from_fn(9, |i, _| if i == 4 { C64::new(0.4, 0.0) } else { C64::new(0.0, 0.0) }),
        )
        .unwrap();
        let disp_vis = DispersionProfile::new(vec![], 1.0).unwrap();
        let cfg = PropagationConfig::new(1024, 1.0, 20.0).unwrap();
        let g = solve_afc(&wide, &DispersionProfile::flat(), &disp_vis, None, &cfg).unwrap();
        let gvi = g.g_vis_ir();
        let _ = pump;
        for i in 1..5 {
            assert_abs_diff_eq!(
                (gvi[(i, i)] - gvi[(0, 0)]).norm(),
                0.0,
                epsilon = 1e-8
            );
        }
        for i in 0..5 {
            for j in 0..5 {
                if i != j {
                    assert!(gvi[(i, j)].norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn conversion_efficiency_bounds() {
        let pump = mono_pump(0.6);
        let disp_vis = DispersionProfile::new(vec![], 1.0).unwrap();
        let cfg = PropagationConfig::new(2048, 1.0, 40.0).unwrap();
        let g = solve_afc(&pump, &DispersionProfile::flat(), &disp_vis, None, &cfg).unwrap();
        let modes = CMat::identity(1, 1);
        let eff = conversion_efficiency(&g, &modes).unwrap();
        assert_eq!(eff.len(), 1);
        assert!(eff[0] > 0.0 && eff[0] <= 1.0);
        // Survival + conversion = 1 (unitarity, one mode per band).
        let survival = g.g_ir_ir()[(0, 0)].norm_sqr();
        assert_abs_diff_eq!(eff[0] + survival, 1.0, epsilon = 1e-8);
    }

    #[test]
    fn afc_output_covariance_limits() {
        // Full conversion limit: strong adiabatic sweep moves the squeezed
        // state to the visible band.
        let pump = mono_pump(2.0);
        let disp_vis = DispersionProfile::new(vec![], 1.0).unwrap();
        let cfg = PropagationConfig::new(4096, 1.0, 80.0).unwrap();
        let g = solve_afc(&pump, &DispersionProfile::flat(), &disp_vis, None, &cfg).unwrap();
        let eff = conversion_efficiency(&g, &CMat::identity(1, 1)).unwrap()[0];
        assert!(eff > 0.999, "strong sweep should convert fully, got {eff}");
        let r = 0.7;
        let sq = CovarianceMatrix::from_greens(&GreensFunction::squeezer(r, 0.0)).unwrap();
        let out = g.output_covariance(&sq).unwrap();
        let n_out = out.mean_photons()[0];
        assert!(
            (n_out - r.sinh().powi(2)).abs() < 0.01,
            "converted photons {n_out} vs {}",
            r.sinh().powi(2)
        );
    }
}
