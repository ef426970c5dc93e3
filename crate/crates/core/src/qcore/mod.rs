//! Pauli algebra, bipartite states, measurement projectors and spectra.

mod basis;
mod pauli;
mod spectral;
pub mod state;

pub use basis::{MeasurementBasis, identical_outcome_projector};
pub use pauli::{Pauli, PauliString, pauli_matrix};
pub use spectral::{SpectralDecomposition, eigendecompose};
pub use state::{BranchState, DensityOperator, epr_state, state_fidelity};
