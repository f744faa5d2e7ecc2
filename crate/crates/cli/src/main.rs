//! `slp` — squeezed-light pipeline runner and analysis CLI.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numeric failure,
//! 4 I/O failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use slp_cli::config::PipelineConfig;
use slp_cli::error::{CliError, Result};
use slp_cli::fit::{fit_parametric_gain, fit_saturation, FitResult};
use slp_cli::pipeline::run_pipeline;
use slp_cli::report::Reporter;
use slp_cli::simulability::{epsilon_bisection, epsilon_closed_form, SimulabilityInput};
use slp_core::detector::{roc_curve, EmccdConfig};
use slp_core::nlo::{design_poling, write_poling_csv, DEFAULT_QUANTUM};

#[derive(Parser)]
#[command(name = "slp", version, about = "Squeezed-light experiment pipeline")]
struct Cli {
    /// RNG seed; overrides the config's `sampling.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for artifacts.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline from a JSON config.
    Run {
        /// Path to the pipeline configuration (see schema/pipeline.schema.json).
        #[arg(long)]
        config: PathBuf,
    },
    /// Fit detected photon means vs pump power to a sinh² gain curve.
    FitGain {
        /// CSV with header `power,mean_photons`.
        #[arg(long)]
        data: PathBuf,
    },
    /// Fit conversion efficiency vs pump power to a saturating exponential.
    FitSaturation {
        /// CSV with header `power,conversion`.
        #[arg(long)]
        data: PathBuf,
    },
    /// Evaluate the classical-simulability distance bound.
    Simulability {
        /// Squeezing parameter per source.
        #[arg(long)]
        r: f64,
        /// Total transmission in [0, 1].
        #[arg(long)]
        eta: f64,
        /// Detector efficiency in (0, 1].
        #[arg(long)]
        eta_d: f64,
        /// Dark-count probability per shot.
        #[arg(long)]
        p_d: f64,
        /// Number of squeezed sources.
        #[arg(long)]
        k: usize,
    },
    /// Emit the threshold-detection ROC curve for a camera config.
    Roc {
        /// Pipeline config supplying the detector section.
        #[arg(long)]
        config: PathBuf,
        /// Number of threshold points, spread over ±8σ_r around zero.
        #[arg(long, default_value_t = 200)]
        points: usize,
    },
    /// Design a quasi-phase-matching poling profile and export it as CSV.
    Poling {
        /// Initial phase mismatch (rad/m).
        #[arg(long)]
        beta_start: f64,
        /// Final phase mismatch (rad/m).
        #[arg(long)]
        beta_end: f64,
        /// Crystal length (m).
        #[arg(long)]
        length: f64,
        /// Fabrication quantum for domain walls (m).
        #[arg(long, default_value_t = DEFAULT_QUANTUM)]
        quantum: f64,
        /// Fraction of each end swept with the accelerated tanh profile.
        #[arg(long, default_value_t = 0.0)]
        tanh_fraction: f64,
    },
}

/// Reads a two-column CSV with the given header into (x, y) vectors.
fn read_xy(path: &PathBuf, header: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == header => {}
        other => {
            return Err(CliError::Config(format!(
                "{}: expected header `{header}`, got {other:?}",
                path.display()
            )))
        }
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let parse = |f: Option<&str>| -> Result<f64> {
            f.and_then(|s| s.trim().parse().ok()).ok_or_else(|| {
                CliError::Config(format!("{}: bad line {}", path.display(), i + 2))
            })
        };
        xs.push(parse(fields.next())?);
        ys.push(parse(fields.next())?);
    }
    Ok((xs, ys))
}

fn print_fit(fit: &FitResult, names: [&str; 2]) {
    println!("model: {}", fit.model);
    for (i, name) in names.iter().enumerate() {
        println!("{name} = {:.6e} +/- {:.3e}", fit.params[i], fit.std_errs[i]);
    }
    println!("residual_norm = {:.6e}", fit.residual_norm);
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config } => {
            let cfg = PipelineConfig::from_path(&config)?;
            let seed = cli.seed.unwrap_or(cfg.sampling.seed);
            let mut reporter = Reporter::new(&cli.out_dir)?;
            let bundle = run_pipeline(&cfg, seed, &mut reporter)?;
            let cfg_json = serde_json::to_string_pretty(&cfg)
                .map_err(|e| CliError::Io(format!("serializing config: {e}")))?;
            reporter.write("config_used.json", cfg_json.as_bytes())?;
            let manifest = reporter.finish(&cfg_json, seed)?;
            println!(
                "pipeline complete: {} modes, {:.3} mean photons detected, manifest {}",
                bundle.sigma_detected.modes(),
                bundle.binned.mean.iter().sum::<f64>(),
                manifest.display()
            );
            Ok(())
        }
        Command::FitGain { data } => {
            let (p, y) = read_xy(&data, "power,mean_photons")?;
            let fit = fit_parametric_gain(&p, &y)?;
            print_fit(&fit, ["eta_m", "p0"]);
            Ok(())
        }
        Command::FitSaturation { data } => {
            let (p, c) = read_xy(&data, "power,conversion")?;
            let fit = fit_saturation(&p, &c)?;
            print_fit(&fit, ["c_max", "p_sat"]);
            Ok(())
        }
        Command::Simulability { r, eta, eta_d, p_d, k } => {
            let input = SimulabilityInput { r, eta, eta_d, p_d, k };
            let eps = epsilon_closed_form(&input)?;
            let check = epsilon_bisection(&input)?;
            if (eps - check).abs() > 1e-8 * eps.max(1.0) {
                return Err(CliError::Numeric(format!(
                    "inversion cross-check failed: {eps} vs {check}"
                )));
            }
            println!("epsilon = {eps:.9e}");
            Ok(())
        }
        Command::Roc { config, points } => {
            let cfg = PipelineConfig::from_path(&config)?;
            let d = &cfg.detector;
            let emccd = EmccdConfig::new(
                d.gain,
                d.readout_sigma,
                d.qe,
                d.adc_k,
                d.bias,
                d.dark_rate,
            )
            .map_err(|e| CliError::from_stage("detector", e))?;
            let thresholds: Vec<f64> = (0..points.max(2))
                .map(|i| {
                    let f = i as f64 / (points.max(2) as f64 - 1.0);
                    (-8.0 + 16.0 * f) * d.readout_sigma
                })
                .collect();
            let curve = roc_curve(&emccd, &thresholds)
                .map_err(|e| CliError::from_stage("detector", e))?;
            let mut reporter = Reporter::new(&cli.out_dir)?;
            let rows: Vec<Vec<String>> = thresholds
                .iter()
                .zip(&curve)
                .map(|(t, (fr, pde))| {
                    vec![format!("{t:.6e}"), format!("{fr:.9e}"), format!("{pde:.9e}")]
                })
                .collect();
            reporter.write_csv("roc.csv", "threshold_electrons,false_click_rate,pde", &rows)?;
            let manifest = reporter.finish("roc", 0)?;
            println!("wrote {} ROC points, manifest {}", curve.len(), manifest.display());
            Ok(())
        }
        Command::Poling { beta_start, beta_end, length, quantum, tanh_fraction } => {
            let profile = design_poling(beta_start, beta_end, length, quantum, tanh_fraction)
                .map_err(|e| CliError::from_stage("poling", e))?;
            let mut csv = Vec::new();
            write_poling_csv(&profile, &mut csv)
                .map_err(|e| CliError::from_stage("poling", e))?;
            let mut reporter = Reporter::new(&cli.out_dir)?;
            reporter.write("poling.csv", &csv)?;
            let manifest = reporter.finish("poling", 0)?;
            println!(
                "designed {} domains over {:.4} m, manifest {}",
                profile.domain_lengths().len(),
                profile.total_length(),
                manifest.display()
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
