//! Library surface of the pipeline CLI, exposed so integration tests and
//! downstream tooling can drive the same code paths as the binary.

pub mod config;
pub mod error;
pub mod fit;
pub mod pipeline;
pub mod report;
pub mod simulability;
