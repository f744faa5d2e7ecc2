//! Property-based invariants of the Gaussian engine: symplectic structure,
//! decomposition round trips, gauge freedom, and determinism of the
//! samplers.

use proptest::prelude::*;

use slp_core::detector::{accumulate_bins, bin_weights, SpectrometerConfig};
use slp_core::exec::ExecMode;
use slp_core::gaussian::{bloch_messiah, CovarianceMatrix, GreensFunction, LossChannel};
use slp_core::stats::{mean_photons, photon_covariance, photon_moment, sample_patterns};
use slp_core::RVec;

/// A random active/passive circuit on `modes` modes built from the listed
/// squeezers and beamsplitter layers.
fn random_circuit(
    modes: usize,
    rs: &[f64],
    phis: &[f64],
    thetas: &[(usize, usize, f64)],
) -> GreensFunction {
    let mut g = GreensFunction::squeezer_multi(&rs[..modes], &phis[..modes]).unwrap();
    for &(i, j, theta) in thetas {
        let (i, j) = (i % modes, j % modes);
        if i == j {
            continue;
        }
        let bs = GreensFunction::beamsplitter(modes, i, j, theta).unwrap();
        g = bs.compose(&g).unwrap();
    }
    g
}

fn small_angle() -> impl Strategy<Value = f64> {
    -3.0..3.0f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn compositions_stay_symplectic(
        modes in 2usize..=6,
        rs in prop::collection::vec(0.0..1.2f64, 6),
        phis in prop::collection::vec(-3.2..3.2f64, 6),
        thetas in prop::collection::vec((0usize..6, 0usize..6, -1.5..1.5f64), 1..5),
    ) {
        let g = random_circuit(modes, &rs, &phis, &thetas);
        prop_assert!(g.symplectic_residual() < 1e-8);
    }

    #[test]
    fn bloch_messiah_round_trips(
        modes in 2usize..=5,
        rs in prop::collection::vec(0.0..1.0f64, 6),
        phis in prop::collection::vec(-3.2..3.2f64, 6),
        thetas in prop::collection::vec((0usize..6, 0usize..6, -1.5..1.5f64), 1..4),
    ) {
        let g = random_circuit(modes, &rs, &phis, &thetas);
        let d = bloch_messiah(&g).unwrap();
        let back = d.reconstruct();
        let scale = g.full_matrix().norm().max(1.0);
        let residual = (g.full_matrix() - back.full_matrix()).norm() / scale;
        prop_assert!(residual < 1e-9, "reconstruction residual {residual:.3e}");
    }

    #[test]
    fn photon_moments_are_phase_gauge_invariant(
        r in 0.1..1.0f64,
        phi in small_angle(),
        theta in -1.5..1.5f64,
        gauge in small_angle(),
    ) {
        let squeeze = GreensFunction::squeezer_multi(&[r, 0.6 * r], &[phi, -phi]).unwrap();
        let bs = GreensFunction::beamsplitter(2, 0, 1, theta).unwrap();
        let sigma =
            CovarianceMatrix::from_greens(&bs.compose(&squeeze).unwrap()).unwrap();
        let rotated = sigma.rotate_mode_phase(0, gauge).unwrap();
        for pattern in [[1usize, 0], [1, 1], [2, 1], [2, 2]] {
            let a = photon_moment(&sigma, &pattern).unwrap();
            let b = photon_moment(&rotated, &pattern).unwrap();
            prop_assert!((a - b).abs() < 1e-9 * a.abs().max(1.0), "{pattern:?}: {a} vs {b}");
        }
    }

    #[test]
    fn trace_out_preserves_kept_mode_moments(
        rs in prop::collection::vec(0.0..1.0f64, 4),
        phis in prop::collection::vec(-3.2..3.2f64, 4),
        theta in -1.5..1.5f64,
    ) {
        let squeeze = GreensFunction::squeezer_multi(&rs, &phis).unwrap();
        let bs = GreensFunction::beamsplitter(4, 0, 2, theta).unwrap();
        let sigma =
            CovarianceMatrix::from_greens(&bs.compose(&squeeze).unwrap()).unwrap();
        let keep = [0usize, 3];
        let reduced = sigma.trace_out(&keep).unwrap();
        let full_means = mean_photons(&sigma).unwrap();
        let red_means = mean_photons(&reduced).unwrap();
        for (slot, &mode) in keep.iter().enumerate() {
            prop_assert!((red_means[slot] - full_means[mode]).abs() < 1e-12);
        }
        // Covariance between the two kept modes is also unchanged.
        let full_cov = photon_covariance(&sigma);
        let red_cov = photon_covariance(&reduced);
        prop_assert!((red_cov[(0, 1)] - full_cov[(0, 3)]).abs() < 1e-10);
    }

    #[test]
    fn loss_scales_means_and_stays_physical(
        r in 0.1..1.2f64,
        phi in small_angle(),
        eta in 0.05..1.0f64,
    ) {
        let g = GreensFunction::two_mode_squeezer(r, phi);
        let sigma = CovarianceMatrix::from_greens(&g).unwrap();
        let lossy = LossChannel::uniform(2, eta).unwrap().apply(&sigma).unwrap();
        let before = mean_photons(&sigma).unwrap();
        let after = mean_photons(&lossy).unwrap();
        for i in 0..2 {
            prop_assert!((after[i] - eta * before[i]).abs() < 1e-10);
        }
        prop_assert!(lossy.physicality_residual() > -1e-10);
    }

    #[test]
    fn sampler_is_deterministic_across_exec_modes(
        // r stays below 0.8: the exact sampler's per-mode truncation budget
        // is sized for moderate squeezing.
        r in 0.2..0.8f64,
        theta in -1.5..1.5f64,
        seed in 0u64..1000,
    ) {
        let squeeze = GreensFunction::squeezer_multi(&[r, 0.7 * r], &[0.0, 1.0]).unwrap();
        let bs = GreensFunction::beamsplitter(2, 0, 1, theta).unwrap();
        let sigma =
            CovarianceMatrix::from_greens(&bs.compose(&squeeze).unwrap()).unwrap();
        let seq = sample_patterns(&sigma, 64, seed, ExecMode::Sequential).unwrap();
        let par = sample_patterns(&sigma, 64, seed, ExecMode::Parallel).unwrap();
        prop_assert_eq!(seq, par);
    }

    #[test]
    fn binning_conserves_total_mean(
        scale in 0.1..3.0f64,
        psf in 0.0..1.5f64,
    ) {
        // Six fine points into two bins under an arbitrary PSF blur: photons
        // are redistributed, never created or destroyed.
        let grid = slp_core::nlo::FrequencyGrid::new(6, 3.0, 1.0).unwrap();
        let cfg = SpectrometerConfig::new(grid, vec![0.0, 3.0, 6.0], psf).unwrap();
        let w = bin_weights(&cfg).unwrap();
        let mean = RVec::from_fn(6, |i, _| scale * (1.0 + i as f64));
        let cov = slp_core::RMat::from_diagonal(&mean.map(|m| m * (1.0 + m)));
        let binned = accumulate_bins(&mean, &cov, &w).unwrap();
        let before: f64 = mean.iter().sum();
        let after: f64 = binned.mean.iter().sum();
        prop_assert!((before - after).abs() < 1e-12 * before.max(1.0));
    }
}
