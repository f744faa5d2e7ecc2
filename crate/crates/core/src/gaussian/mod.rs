//! Symplectic linear algebra for multimode Gaussian states.
//!
//! Basis convention, fixed globally: mode operators are ordered
//! `[a_1 .. a_M, a_1^† .. a_M^†]`, so every 2M×2M matrix here has an
//! annihilation block in the top-left. The covariance matrix of a zero-mean
//! state is `σ = ½⟨{ξ, ξ†}⟩` with quadrants `[[V + I/2, U], [U*, Vᵀ + I/2]]`;
//! vacuum is `I/2`.

mod bloch_messiah;
mod covariance;
mod greens;
pub mod io;
mod loss;

pub use bloch_messiah::{bloch_messiah, SupermodeDecomposition};
pub use covariance::CovarianceMatrix;
pub use greens::GreensFunction;
pub use loss::LossChannel;
