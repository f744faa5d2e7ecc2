//! Damped least-squares (Levenberg-style) fits of the two calibration
//! models used by the pipeline:
//!
//! * parametric gain `⟨n⟩(P) = a sinh²√(P/b)` — `a` is the effective
//!   detected mode number ηM, `b` the threshold power P₀;
//! * conversion saturation `c(P) = c_max (1 − e^{−P/P_sat})`.
//!
//! Both use analytic Jacobians. Parameter standard errors come from the
//! Gauss–Newton curvature at the optimum scaled by the residual variance.

use crate::error::{CliError, Result};

/// Fitted parameters with standard errors and the residual norm.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub params: Vec<f64>,
    pub std_errs: Vec<f64>,
    pub residual_norm: f64,
    pub model: String,
}

/// Model evaluation at one point: value and gradient w.r.t. parameters.
type Eval = fn(&[f64], f64) -> (f64, Vec<f64>);

fn gain_model(p: &[f64], x: f64) -> (f64, Vec<f64>) {
    let (a, b) = (p[0], p[1]);
    let u = (x / b).max(0.0).sqrt();
    let sh = u.sinh();
    let y = a * sh * sh;
    // ∂u/∂b = −u/(2b); chain through y = a sinh²u.
    let dyda = sh * sh;
    let dydb = if u > 0.0 {
        a * 2.0 * sh * u.cosh() * (-u / (2.0 * b))
    } else {
        0.0
    };
    (y, vec![dyda, dydb])
}

fn saturation_model(p: &[f64], x: f64) -> (f64, Vec<f64>) {
    let (cmax, psat) = (p[0], p[1]);
    let e = (-x / psat).exp();
    let y = cmax * (1.0 - e);
    let dydc = 1.0 - e;
    let dydp = -cmax * e * x / (psat * psat);
    (y, vec![dydc, dydp])
}

const MAX_ITERS: usize = 200;
const STEP_TOL: f64 = 1e-12;

fn levenberg(xs: &[f64], ys: &[f64], model: Eval, init: [f64; 2], tag: &str) -> Result<FitResult> {
    let n = xs.len();
    if n < 3 || ys.len() != n {
        return Err(CliError::Config(format!(
            "fit needs >= 3 (x, y) points, got {n} x and {} y",
            ys.len()
        )));
    }
    let chi2 = |p: &[f64]| -> f64 {
        xs.iter()
            .zip(ys)
            .map(|(&x, &y)| {
                let (f, _) = model(p, x);
                (y - f).powi(2)
            })
            .sum()
    };

    let mut p = init.to_vec();
    let mut lambda = 1e-3;
    let mut cost = chi2(&p);
    for _ in 0..MAX_ITERS {
        // Normal equations JᵀJ δ = Jᵀr with Levenberg damping on the
        // diagonal.
        let mut jtj = [[0.0f64; 2]; 2];
        let mut jtr = [0.0f64; 2];
        for (&x, &y) in xs.iter().zip(ys) {
            let (f, grad) = model(&p, x);
            let r = y - f;
            for a in 0..2 {
                jtr[a] += grad[a] * r;
                for b in 0..2 {
                    jtj[a][b] += grad[a] * grad[b];
                }
            }
        }
        let a00 = jtj[0][0] * (1.0 + lambda);
        let a11 = jtj[1][1] * (1.0 + lambda);
        let det = a00 * a11 - jtj[0][1] * jtj[1][0];
        if det.abs() < 1e-300 {
            return Err(CliError::Numeric(format!(
                "{tag} fit: singular normal equations at p = {p:?}"
            )));
        }
        let dp0 = (a11 * jtr[0] - jtj[0][1] * jtr[1]) / det;
        let dp1 = (a00 * jtr[1] - jtj[1][0] * jtr[0]) / det;
        let trial = vec![p[0] + dp0, p[1] + dp1];
        if !trial.iter().all(|v| v.is_finite()) || trial[1] <= 0.0 {
            lambda *= 10.0;
            continue;
        }
        let trial_cost = chi2(&trial);
        if trial_cost < cost {
            let rel_step = (dp0.abs() / p[0].abs().max(1e-30))
                .max(dp1.abs() / p[1].abs().max(1e-30));
            p = trial;
            cost = trial_cost;
            lambda = (lambda / 10.0).max(1e-12);
            if rel_step < STEP_TOL {
                break;
            }
        } else {
            lambda *= 10.0;
            if lambda > 1e12 {
                break;
            }
        }
    }

    // Undamped curvature at the optimum for the standard errors.
    let mut jtj = [[0.0f64; 2]; 2];
    for &x in xs {
        let (_, grad) = model(&p, x);
        for a in 0..2 {
            for b in 0..2 {
                jtj[a][b] += grad[a] * grad[b];
            }
        }
    }
    let det = jtj[0][0] * jtj[1][1] - jtj[0][1] * jtj[1][0];
    let dof = (n as f64 - 2.0).max(1.0);
    let s2 = cost / dof;
    let std_errs = if det > 0.0 {
        vec![(jtj[1][1] / det * s2).sqrt(), (jtj[0][0] / det * s2).sqrt()]
    } else {
        vec![f64::NAN, f64::NAN]
    };
    if !p.iter().all(|v| v.is_finite()) {
        return Err(CliError::Numeric(format!(
            "{tag} fit diverged: p = {p:?}, residual {cost:.3e}"
        )));
    }
    Ok(FitResult {
        params: p,
        std_errs,
        residual_norm: cost.sqrt(),
        model: tag.to_string(),
    })
}

/// Fits `⟨n⟩(P) = a sinh²√(P/b)`; returns `(a, b)` = (ηM, P₀).
///
/// Initialization: `a` from the largest observation (sinh² ≈ its argument
/// near threshold, so max(y) bounds a from below), `b` from the power where
/// the data crosses half its maximum.
pub fn fit_parametric_gain(powers: &[f64], means: &[f64]) -> Result<FitResult> {
    if powers.iter().any(|&p| !(p > 0.0)) {
        return Err(CliError::Config("powers must be positive".into()));
    }
    let ymax = means.iter().cloned().fold(f64::MIN, f64::max);
    if !(ymax > 0.0) {
        return Err(CliError::Config("photon means must not all vanish".into()));
    }
    let half_idx = means
        .iter()
        .position(|&y| y >= ymax / 2.0)
        .unwrap_or(means.len() / 2);
    let init = [ymax.max(1.0), powers[half_idx].max(1e-12)];
    levenberg(powers, means, gain_model, init, "parametric-gain")
}

/// Fits `c(P) = c_max (1 − e^{−P/P_sat})`; returns `(c_max, P_sat)`.
pub fn fit_saturation(powers: &[f64], conversions: &[f64]) -> Result<FitResult> {
    if conversions.iter().any(|&c| !(0.0..=1.0).contains(&c)) {
        return Err(CliError::Config("conversions must lie in [0, 1]".into()));
    }
    let cmax0 = conversions.iter().cloned().fold(0.0f64, f64::max).max(0.1);
    let half_idx = conversions
        .iter()
        .position(|&c| c >= cmax0 / 2.0)
        .unwrap_or(conversions.len() / 2);
    let init = [cmax0, powers[half_idx].max(1e-12)];
    levenberg(powers, conversions, saturation_model, init, "saturation")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gain_round_trip_noiseless() {
        let (a, b) = (431.0, 0.37);
        let powers: Vec<f64> = (1..=20).map(|i| 0.05 * i as f64).collect();
        let means: Vec<f64> = powers
            .iter()
            .map(|&p| a * (p / b).sqrt().sinh().powi(2))
            .collect();
        let fit = fit_parametric_gain(&powers, &means).unwrap();
        assert!((fit.params[0] / a - 1.0).abs() < 1e-6, "{:?}", fit.params);
        assert!((fit.params[1] / b - 1.0).abs() < 1e-6, "{:?}", fit.params);
    }

    #[test]
    fn saturation_round_trip_noiseless() {
        let (cmax, psat) = (0.925, 2.1);
        let powers: Vec<f64> = (1..=15).map(|i| 0.4 * i as f64).collect();
        let cs: Vec<f64> = powers
            .iter()
            .map(|&p| cmax * (1.0 - (-p / psat).exp()))
            .collect();
        let fit = fit_saturation(&powers, &cs).unwrap();
        assert!((fit.params[0] / cmax - 1.0).abs() < 1e-6);
        assert!((fit.params[1] / psat - 1.0).abs() < 1e-6);
    }

    #[test]
    fn degenerate_input_rejected() {
        assert!(fit_parametric_gain(&[1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(fit_parametric_gain(&[-1.0, 1.0, 2.0], &[1.0, 1.0, 1.0]).is_err());
        assert!(fit_saturation(&[1.0, 2.0, 3.0], &[0.1, 1.5, 0.3]).is_err());
    }

    #[test]
    fn standard_errors_shrink_with_noise() {
        let (a, b) = (100.0, 1.0);
        let powers: Vec<f64> = (1..=30).map(|i| 0.1 * i as f64).collect();
        let clean: Vec<f64> = powers
            .iter()
            .map(|&p| a * (p / b).sqrt().sinh().powi(2))
            .collect();
        let noisy: Vec<f64> = clean
            .iter()
            .enumerate()
            .map(|(i, &y)| y * (1.0 + 0.02 * ((i as f64 * 7.3).sin())))
            .collect();
        let f_clean = fit_parametric_gain(&powers, &clean).unwrap();
        let f_noisy = fit_parametric_gain(&powers, &noisy).unwrap();
        assert!(f_clean.std_errs[0] < f_noisy.std_errs[0]);
    }
}
