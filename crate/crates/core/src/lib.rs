//! Simulator and analytics for entanglement distillation by Hamiltonian twirling.

pub mod analytics;
pub mod checks;
pub mod config;
pub mod distill;
pub mod error;
pub mod experiment;
pub mod hamlib;
pub mod linalg;
pub mod noise;
pub mod otoc;
pub mod qcore;
pub mod twirl;

pub use error::{Error, Result};
