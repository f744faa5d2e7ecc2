//! Simulation engine for pulse-pumped squeezed light: multimode Gaussian
//! states, split-step nonlinear propagation, Hafnian photon statistics, and
//! an EMCCD detection chain.
//!
//! The crate is organized around the stages of a frequency-multiplexed
//! squeezed-light experiment:
//!
//! - [`gaussian`]: symplectic linear algebra on covariance matrices and
//!   Green's functions, including the Bloch–Messiah supermode decomposition.
//! - [`nlo`]: split-step solvers for parametric amplification (DOPA) and
//!   adiabatic frequency conversion (AFC), plus poling design and pump
//!   shaping.
//! - [`stats`]: Hafnian-based photon-number moments, Gaussian boson sampling
//!   probabilities, and exact pattern sampling.
//! - [`detector`]: EMCCD electron-multiplication noise, moment inversion,
//!   thresholding, and spectrometer binning.
//! - [`coincidence`]: closed-form split-beam coincidence predictions.
//!
//! All state values are immutable after construction and all operations are
//! pure functions, so everything here is safe to call from concurrent
//! workers. Monte Carlo entry points accept an [`exec::ExecMode`]; with the
//! `parallel` feature (default) shots fan out over rayon.

pub mod coincidence;
pub mod detector;
pub mod error;
pub mod exec;
pub mod gaussian;
pub mod linalg;
pub mod nlo;
pub mod stats;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
/// Dense complex matrix used throughout.
pub type CMat = nalgebra::DMatrix<num_complex::Complex64>;
/// Dense complex vector.
pub type CVec = nalgebra::DVector<num_complex::Complex64>;
/// Dense real matrix.
pub type RMat = nalgebra::DMatrix<f64>;
/// Dense real vector.
pub type RVec = nalgebra::DVector<f64>;
