//! Electron-multiplying CCD model.
//!
//! A pixel that collects `n` photoelectrons produces an amplified charge
//! `x` that follows an Erlang distribution,
//! `P(x; n) = x^{n−1} e^{−x/g} / (gⁿ (n−1)!)`,
//! with conditional moments `⟨x^k⟩_n = g^k (n+k−1)!/(n−1)!`. Gaussian
//! readout noise of width `σ_r` is added independently per pixel. Because
//! the conditional moments are polynomial in `n`, raw moments of `x` can be
//! inverted exactly (in expectation) into photon-number moments.

use rand::Rng;
use rand_distr::{Binomial, Distribution, Gamma, Normal};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::exec::{run_shots, ExecMode};

/// Camera parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct EmccdConfig {
    /// Mean multiplication gain `g` (electrons per photoelectron).
    pub gain: f64,
    /// Gaussian readout noise `σ_r` (electrons).
    pub readout_sigma: f64,
    /// Quantum efficiency (photon → photoelectron probability).
    pub qe: f64,
    /// ADC conversion `k` (photoelectrons per pixel count).
    pub adc_k: f64,
    /// Bias `b` (photoelectrons) subtracted after conversion.
    pub bias: f64,
    /// Spurious-electron events (dark + clock-induced charge) per pixel per
    /// frame; each event injects one electron before multiplication.
    pub dark_rate: f64,
}

impl EmccdConfig {
    pub fn new(
        gain: f64,
        readout_sigma: f64,
        qe: f64,
        adc_k: f64,
        bias: f64,
        dark_rate: f64,
    ) -> Result<Self> {
        if !(gain > 0.0) {
            return Err(Error::InvalidArgument(format!("gain {gain} must be > 0")));
        }
        if !(readout_sigma >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "readout_sigma {readout_sigma} must be >= 0"
            )));
        }
        if !(0.0..=1.0).contains(&qe) {
            return Err(Error::InvalidArgument(format!("qe {qe} outside [0, 1]")));
        }
        if !(adc_k > 0.0) || !bias.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "bad ADC parameters: k = {adc_k}, bias = {bias}"
            )));
        }
        if !(0.0..=1.0).contains(&dark_rate) {
            return Err(Error::InvalidArgument(format!(
                "dark_rate {dark_rate} outside [0, 1]"
            )));
        }
        Ok(Self {
            gain,
            readout_sigma,
            qe,
            adc_k,
            bias,
            dark_rate,
        })
    }

    /// Reference camera profile (instrument-specific, not physics).
    pub fn camera_defaults() -> Self {
        Self {
            gain: 3000.0,
            readout_sigma: 100.0,
            qe: 0.95,
            adc_k: 21.43,
            bias: 0.0,
            dark_rate: 0.002,
        }
    }
}

/// One amplified-and-read-out pixel value for `n` photoelectrons.
///
/// `n = 0` contributes no charge; `n ≥ 1` draws from Erlang(`n`, `g`).
/// Gaussian readout noise is always added.
pub fn em_gain_sample<R: Rng + ?Sized>(n: u32, cfg: &EmccdConfig, rng: &mut R) -> f64 {
    let mut x = 0.0;
    if n > 0 {
        // Erlang(n, g) is Gamma with integer shape n and scale g.
        x += Gamma::new(n as f64, cfg.gain).unwrap().sample(rng);
    }
    if cfg.readout_sigma > 0.0 {
        x += Normal::new(0.0, cfg.readout_sigma).unwrap().sample(rng);
    }
    x
}

/// Simulates camera frames from per-frame photon numbers.
///
/// Each pixel thins its photons binomially with probability `qe`, adds a
/// Bernoulli(`dark_rate`) spurious electron, then amplifies and reads out
/// via [`em_gain_sample`]. Frames are independent shots with per-shot RNG
/// streams, so output is identical in both execution modes.
pub fn simulate_frames(
    photon_frames: &[Vec<u32>],
    cfg: &EmccdConfig,
    seed: u64,
    mode: ExecMode,
) -> Vec<Vec<f64>> {
    run_shots(photon_frames.len() as u64, seed, mode, |shot, rng| {
        photon_frames[shot as usize]
            .iter()
            .map(|&n| {
                let mut pe = if n > 0 && cfg.qe > 0.0 {
                    Binomial::new(n as u64, cfg.qe).unwrap().sample(rng) as u32
                } else {
                    0
                };
                if cfg.dark_rate > 0.0 && rng.gen::<f64>() < cfg.dark_rate {
                    pe += 1;
                }
                em_gain_sample(pe, cfg, rng)
            })
            .collect()
    })
}

/// Raw measured moments of a pixel pair `(i, j)`, up to order (2, 2),
/// readout noise included. Fields are `⟨x_i^a x_j^b⟩` estimates.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PairMoments {
    pub xi: f64,
    pub xj: f64,
    pub xi2: f64,
    pub xj2: f64,
    pub xij: f64,
    pub xi2j: f64,
    pub xij2: f64,
    pub xi2j2: f64,
}

impl PairMoments {
    /// Accumulates the raw moments of pixels `i` and `j` over frames.
    pub fn estimate(frames: &[Vec<f64>], i: usize, j: usize) -> Result<Self> {
        if frames.is_empty() {
            return Err(Error::InvalidArgument("no frames".into()));
        }
        let mut m = Self::default();
        for f in frames {
            if i >= f.len() || j >= f.len() {
                return Err(Error::DimensionMismatch(format!(
                    "pixels ({i}, {j}) outside frame of {} pixels",
                    f.len()
                )));
            }
            let (a, b) = (f[i], f[j]);
            m.xi += a;
            m.xj += b;
            m.xi2 += a * a;
            m.xj2 += b * b;
            m.xij += a * b;
            m.xi2j += a * a * b;
            m.xij2 += a * b * b;
            m.xi2j2 += a * a * b * b;
        }
        let n = frames.len() as f64;
        m.xi /= n;
        m.xj /= n;
        m.xi2 /= n;
        m.xj2 /= n;
        m.xij /= n;
        m.xi2j /= n;
        m.xij2 /= n;
        m.xi2j2 /= n;
        Ok(m)
    }
}

/// Photon-number moments of a pixel pair recovered from analog statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonMoments {
    pub ni: f64,
    pub nj: f64,
    pub ni2: f64,
    pub nj2: f64,
    pub nij: f64,
    pub ni2j: f64,
    pub nij2: f64,
    pub ni2j2: f64,
}

/// Inverts raw analog moments into photon-number moments.
///
/// Readout noise is independent of the signal, so its contribution is
/// removed term by term (`σ_r²` from pure second moments, `σ_r²⟨x⟩` from
/// mixed third moments, and so on); the Erlang ladder
/// `⟨x^k⟩_n = g^k (n+k−1)!/(n−1)!` then gives an exact linear inversion:
///
/// - `⟨n⟩ = ⟨x⟩/g`
/// - `⟨n_i n_j⟩ = ⟨x_i x_j⟩/g²`
/// - `⟨n²⟩ = ⟨x²⟩/g² − ⟨x⟩/g`
/// - `⟨n_i² n_j⟩ = ⟨x_i² x_j⟩/g³ − ⟨x_i x_j⟩/g²`
/// - `⟨n_i² n_j²⟩ = ⟨x_i² x_j²⟩/g⁴ − ⟨x_i² x_j⟩/g³ − ⟨x_i x_j²⟩/g³
///    + ⟨x_i x_j⟩/g²`
///
/// The inversion is unbiased in expectation for any photon distribution.
pub fn analog_invert_moments(raw: &PairMoments, cfg: &EmccdConfig) -> PhotonMoments {
    let g = cfg.gain;
    let s2 = cfg.readout_sigma * cfg.readout_sigma;
    // Noise-free analog moments.
    let xi = raw.xi;
    let xj = raw.xj;
    let xi2 = raw.xi2 - s2;
    let xj2 = raw.xj2 - s2;
    let xij = raw.xij;
    let xi2j = raw.xi2j - s2 * xj;
    let xij2 = raw.xij2 - s2 * xi;
    let xi2j2 = raw.xi2j2 - s2 * (xi2 + xj2) - s2 * s2;
    PhotonMoments {
        ni: xi / g,
        nj: xj / g,
        ni2: xi2 / (g * g) - xi / g,
        nj2: xj2 / (g * g) - xj / g,
        nij: xij / (g * g),
        ni2j: xi2j / (g * g * g) - xij / (g * g),
        nij2: xij2 / (g * g * g) - xij / (g * g),
        ni2j2: xi2j2 / (g * g * g * g) - (xi2j + xij2) / (g * g * g) + xij / (g * g),
    }
}

/// Standard normal survival function `Q(x) = P(Z > x)`.
fn normal_survival(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Survival of `Exp(g) + N(0, σ²)` at `t` (exponentially modified Gaussian).
fn exp_gauss_survival(t: f64, g: f64, sigma: f64) -> f64 {
    if sigma == 0.0 {
        return if t <= 0.0 { 1.0 } else { (-t / g).exp() };
    }
    let u = t / sigma;
    if u < -8.0 {
        return 1.0;
    }
    let tail = normal_survival(u);
    let v = sigma * sigma / (2.0 * g * g) - t / g;
    let s = tail + v.exp() * (1.0 - normal_survival(u - sigma / g));
    s.clamp(0.0, 1.0)
}

/// Receiver operating characteristic of the thresholded camera.
///
/// For each threshold `t` returns `(false_click_rate, pde)`:
/// the false-click rate is the probability that readout noise plus a
/// possible dark event exceeds `t` on an unilluminated pixel; the
/// photon-detection efficiency is `qe · P(Erlang(1, g) + noise > t)`.
pub fn roc_curve(cfg: &EmccdConfig, thresholds: &[f64]) -> Result<Vec<(f64, f64)>> {
    if !(cfg.readout_sigma > 0.0) {
        return Err(Error::InvalidArgument(
            "roc_curve needs readout_sigma > 0".into(),
        ));
    }
    Ok(thresholds
        .iter()
        .map(|&t| {
            let one = exp_gauss_survival(t, cfg.gain, cfg.readout_sigma);
            let noise_only = normal_survival(t / cfg.readout_sigma);
            let false_rate = (1.0 - cfg.dark_rate) * noise_only + cfg.dark_rate * one;
            (false_rate, cfg.qe * one)
        })
        .collect())
}

/// Converts a raw pixel count to photoelectrons: `n_e = k·p/g − b`.
pub fn pixel_to_photoelectrons(p: f64, cfg: &EmccdConfig) -> f64 {
    cfg.adc_k * p / cfg.gain - cfg.bias
}

/// Elementwise click discrimination: `x > t`.
pub fn threshold_frames(frames: &[Vec<f64>], t: f64) -> Vec<Vec<bool>> {
    frames
        .iter()
        .map(|f| f.iter().map(|&x| x > t).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::shot_rng;
    use approx::assert_abs_diff_eq;
    use rand_distr::Poisson;

    fn noiseless(gain: f64) -> EmccdConfig {
        EmccdConfig::new(gain, 0.0, 1.0, 21.43, 0.0, 0.0).unwrap()
    }

    #[test]
    fn erlang_mean_and_variance() {
        let cfg = noiseless(500.0);
        let mut rng = shot_rng(11, 0);
        let n_draws = 20_000usize;
        let xs: Vec<f64> = (0..n_draws).map(|_| em_gain_sample(4, &cfg, &mut rng)).collect();
        let mean = xs.iter().sum::<f64>() / n_draws as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n_draws as f64;
        // Erlang(4, g): mean 4g, variance 4g².
        let se = (4.0_f64).sqrt() * 500.0 / (n_draws as f64).sqrt();
        assert!((mean - 2000.0).abs() < 5.0 * se, "mean {mean}");
        // Erlang(4, 500): variance 4g² = 1e6.
        assert!((var / 1e6 - 1.0).abs() < 0.05, "variance {var}");
    }

    #[test]
    fn single_electron_is_exponential() {
        // Kolmogorov-Smirnov test against Exp(g) at alpha = 0.01.
        let cfg = noiseless(3000.0);
        let mut rng = shot_rng(5, 0);
        let n_draws = 100_000usize;
        let mut xs: Vec<f64> = (0..n_draws).map(|_| em_gain_sample(1, &cfg, &mut rng)).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = n_draws as f64;
        let mut d: f64 = 0.0;
        for (i, &x) in xs.iter().enumerate() {
            let f = 1.0 - (-x / 3000.0).exp();
            d = d.max((f - i as f64 / n).abs()).max(((i + 1) as f64 / n - f).abs());
        }
        let critical = 1.628 / n.sqrt();
        assert!(d < critical, "KS statistic {d} vs {critical}");
    }

    #[test]
    fn zero_electrons_leave_readout_noise_only() {
        let cfg = EmccdConfig::new(3000.0, 40.0, 1.0, 21.43, 0.0, 0.0).unwrap();
        let mut rng = shot_rng(3, 0);
        let n_draws = 50_000usize;
        let xs: Vec<f64> = (0..n_draws).map(|_| em_gain_sample(0, &cfg, &mut rng)).collect();
        let mean = xs.iter().sum::<f64>() / n_draws as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n_draws as f64;
        assert!(mean.abs() < 5.0 * 40.0 / (n_draws as f64).sqrt());
        assert!((var.sqrt() - 40.0).abs() < 1.0);
    }

    #[test]
    fn moment_inversion_recovers_thermal_statistics() {
        // Two independent thermal pixels, full chain with readout noise.
        let cfg = EmccdConfig::new(800.0, 60.0, 1.0, 21.43, 0.0, 0.0).unwrap();
        let m = 1.2f64;
        let p_geom = m / (1.0 + m);
        let frames_n: Vec<Vec<u32>> = run_shots(200_000, 21, ExecMode::Parallel, |_, rng| {
            (0..2)
                .map(|_| {
                    let mut n = 0u32;
                    while rng.gen::<f64>() < p_geom {
                        n += 1;
                    }
                    n
                })
                .collect()
        });
        let frames = simulate_frames(&frames_n, &cfg, 22, ExecMode::Parallel);
        let raw = PairMoments::estimate(&frames, 0, 1).unwrap();
        let mom = analog_invert_moments(&raw, &cfg);
        // Thermal: ⟨n⟩ = m, Var = m(m+1), pixels independent.
        assert!((mom.ni - m).abs() < 0.05, "ni {}", mom.ni);
        assert!((mom.nj - m).abs() < 0.05, "nj {}", mom.nj);
        let var_i = mom.ni2 - mom.ni * mom.ni;
        assert!((var_i - m * (1.0 + m)).abs() < 0.12, "var {var_i}");
        let cov = mom.nij - mom.ni * mom.nj;
        assert!(cov.abs() < 0.05, "cov {cov}");
        // Fourth-order consistency for independent pixels:
        // ⟨n_i² n_j²⟩ = ⟨n_i²⟩⟨n_j²⟩.
        assert!((mom.ni2j2 - mom.ni2 * mom.nj2).abs() < 0.6, "{}", mom.ni2j2);
    }

    #[test]
    fn moment_inversion_zero_signal() {
        let cfg = EmccdConfig::new(1000.0, 80.0, 1.0, 21.43, 0.0, 0.0).unwrap();
        let frames_n = vec![vec![0u32; 2]; 100_000];
        let frames = simulate_frames(&frames_n, &cfg, 9, ExecMode::Parallel);
        let mom = analog_invert_moments(&PairMoments::estimate(&frames, 0, 1).unwrap(), &cfg);
        for v in [mom.ni, mom.nj, mom.ni2, mom.nij, mom.ni2j2] {
            assert!(v.abs() < 0.01, "residual moment {v}");
        }
    }

    #[test]
    fn roc_limits() {
        let cfg = EmccdConfig::camera_defaults();
        let pts = roc_curve(&cfg, &[-1e12, 1e12]).unwrap();
        assert_abs_diff_eq!(pts[0].0, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pts[0].1, cfg.qe, epsilon = 1e-12);
        assert_abs_diff_eq!(pts[1].0, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pts[1].1, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn roc_is_monotone() {
        let cfg = EmccdConfig::camera_defaults();
        let thresholds: Vec<f64> = (0..200).map(|i| -1000.0 + 15.0 * i as f64).collect();
        let pts = roc_curve(&cfg, &thresholds).unwrap();
        for w in pts.windows(2) {
            assert!(w[1].0 <= w[0].0 + 1e-12);
            assert!(w[1].1 <= w[0].1 + 1e-12);
        }
    }

    #[test]
    fn roc_pde_anchor_at_five_sigma() {
        // Camera defaults, threshold at 5σ_r: PDE close to 0.80 with a
        // small false-click rate.
        let cfg = EmccdConfig::camera_defaults();
        let t = 5.0 * cfg.readout_sigma;
        let (false_rate, pde) = roc_curve(&cfg, &[t]).unwrap()[0];
        assert!((0.75..0.85).contains(&pde), "pde {pde}");
        assert!(false_rate < 0.01, "false rate {false_rate}");
    }

    #[test]
    fn pixel_conversion() {
        let cfg = EmccdConfig::camera_defaults();
        assert_abs_diff_eq!(
            pixel_to_photoelectrons(1400.0, &cfg),
            21.43 * 1400.0 / 3000.0,
            epsilon = 1e-12
        );
        // Bias cancellation: p with k·p/g = b maps to zero.
        let cfg_b = EmccdConfig::new(3000.0, 100.0, 0.95, 21.43, 2.5, 0.0).unwrap();
        let p = 2.5 * 3000.0 / 21.43;
        assert_abs_diff_eq!(pixel_to_photoelectrons(p, &cfg_b), 0.0, epsilon = 1e-12);
        // Linearity about the bias point.
        let y1 = pixel_to_photoelectrons(p + 10.0, &cfg_b);
        let y2 = pixel_to_photoelectrons(p + 20.0, &cfg_b);
        assert_abs_diff_eq!(y2, 2.0 * y1, epsilon = 1e-10);
    }

    #[test]
    fn thresholding_basics() {
        let frames = vec![vec![0.0, 10.0, -3.0]];
        let clicks = threshold_frames(&frames, 5.0);
        assert_eq!(clicks, vec![vec![false, true, false]]);
        let all = threshold_frames(&frames, f64::NEG_INFINITY);
        assert_eq!(all, vec![vec![true, true, true]]);
    }

    #[test]
    fn poisson_click_rate_matches_prediction() {
        // Poisson illumination λ = 0.1 per pixel, high gain, t = 5σ_r.
        let cfg = EmccdConfig::new(3000.0, 30.0, 0.95, 21.43, 0.0, 0.0).unwrap();
        let lambda = 0.1f64;
        let shots = 200_000usize;
        let frames_n: Vec<Vec<u32>> = run_shots(shots as u64, 31, ExecMode::Parallel, |_, rng| {
            vec![Poisson::new(lambda).unwrap().sample(rng) as u32]
        });
        let frames = simulate_frames(&frames_n, &cfg, 32, ExecMode::Parallel);
        let t = 5.0 * cfg.readout_sigma;
        let clicks = threshold_frames(&frames, t);
        let rate = clicks.iter().filter(|c| c[0]).count() as f64 / shots as f64;
        // Photoelectrons are Poisson(λ·qe); P(click | k) ≈ Erlang survival
        // at t (readout noise negligible at 5σ).
        let mu = lambda * cfg.qe;
        let mut predict = 0.0;
        let mut pois = (-mu).exp();
        for k in 1..15u32 {
            pois *= mu / k as f64;
            let r = t / cfg.gain;
            let mut surv = 0.0;
            let mut term = (-r).exp();
            for j in 0..k {
                surv += term;
                term *= r / (j + 1) as f64;
            }
            predict += pois * surv;
        }
        let se = (predict * (1.0 - predict) / shots as f64).sqrt();
        assert!(
            (rate - predict).abs() < 3.0 * se + 1e-3,
            "rate {rate} vs {predict}"
        );
    }

    #[test]
    fn dark_rate_produces_spurious_clicks() {
        let mut cfg = EmccdConfig::camera_defaults();
        cfg.dark_rate = 0.05;
        let frames_n = vec![vec![0u32]; 100_000];
        let frames = simulate_frames(&frames_n, &cfg, 41, ExecMode::Parallel);
        let t = 5.0 * cfg.readout_sigma;
        let rate = threshold_frames(&frames, t)
            .iter()
            .filter(|c| c[0])
            .count() as f64
            / 100_000.0;
        let (false_rate, _) = roc_curve(&cfg, &[t]).unwrap()[0];
        let se = (false_rate * (1.0 - false_rate) / 1e5).sqrt();
        assert!(
            (rate - false_rate).abs() < 4.0 * se + 1e-4,
            "rate {rate} vs {false_rate}"
        );
    }

    #[test]
    fn invalid_configs_rejected() {
        assert!(EmccdConfig::new(0.0, 1.0, 0.5, 21.43, 0.0, 0.0).is_err());
        assert!(EmccdConfig::new(100.0, -1.0, 0.5, 21.43, 0.0, 0.0).is_err());
        assert!(EmccdConfig::new(100.0, 1.0, 1.5, 21.43, 0.0, 0.0).is_err());
        assert!(EmccdConfig::new(100.0, 1.0, 0.5, 21.43, 0.0, 2.0).is_err());
        let mut cfg = EmccdConfig::camera_defaults();
        cfg.readout_sigma = 0.0;
        assert!(roc_curve(&cfg, &[1.0]).is_err());
    }
}
