//! Nonlinear-optics engine: split-step propagation of the parametric
//! amplifier (DOPA) and adiabatic frequency conversion (AFC) coupled-mode
//! equations, plus quasi-phase-matched poling design and pump shaping.

mod dispersion;
mod grid;
mod poling;
mod pump;
mod solver;

pub use dispersion::DispersionProfile;
pub use grid::FrequencyGrid;
pub use poling::{design_poling, write_poling_csv, PolingProfile, DEFAULT_QUANTUM};
pub use pump::{shape_pump, PumpPulse};
pub use solver::{
    conversion_efficiency, dopa_coupling_matrix, lz_coupling_matrix, solve_afc, solve_dopa,
    AfcGreens, PropagationConfig,
};
