//! Dense statevector and density-matrix simulation of small registers.

pub mod density;
pub mod gate;
pub mod state;

pub use density::{apply_gate_dm, fidelity_pure_mixed, to_density, DensityMatrix, DENSITY_QUBIT_CAP};
pub use gate::{gate_matrix_oracle, GateOp, Matrix2};
pub use state::{apply_gate, overlap, StateVector, STATE_QUBIT_CAP};
pub use swap_test::{
    swap_test_circuit_exact, swap_test_p0, swap_test_shots, Register, SWAP_CIRCUIT_QUBIT_CAP,
};

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Largest entry modulus of a complex matrix.
pub fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
