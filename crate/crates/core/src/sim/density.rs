//! Dense density matrices for mixed states under noise.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use super::gate::{apply_matrix2, apply_unchecked, GateOp, Matrix2};
use super::state::{check_qubits, StateVector};
use crate::error::{Error, Result};

/// Largest density-matrix register.
pub const DENSITY_QUBIT_CAP: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    mat: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// `|ψ⟩⟨ψ|`.
    pub fn from_pure(psi: &StateVector) -> Result<Self> {
        check_qubits(psi.n_qubits(), DENSITY_QUBIT_CAP, "density matrices")?;
        let v = nalgebra::DVector::from_column_slice(psi.amplitudes());
        Ok(Self {
            n_qubits: psi.n_qubits(),
            mat: &v * v.adjoint(),
        })
    }

    pub fn maximally_mixed(n_qubits: usize) -> Result<Self> {
        check_qubits(n_qubits, DENSITY_QUBIT_CAP, "density matrices")?;
        let dim = 1 << n_qubits;
        Ok(Self {
            n_qubits,
            mat: DMatrix::identity(dim, dim) / Complex64::new(dim as f64, 0.0),
        })
    }

    /// Wraps a matrix without checking positivity; the shape must be `2^k × 2^k`.
    pub fn from_matrix(n_qubits: usize, mat: DMatrix<Complex64>) -> Result<Self> {
        check_qubits(n_qubits, DENSITY_QUBIT_CAP, "density matrices")?;
        let dim = 1 << n_qubits;
        if mat.nrows() != dim || mat.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: mat.nrows().max(mat.ncols()),
            });
        }
        Ok(Self { n_qubits, mat })
    }

    /// Random mixture of `rank` random pure states with random weights.
    pub fn random<R: Rng + ?Sized>(n_qubits: usize, rank: usize, rng: &mut R) -> Result<Self> {
        check_qubits(n_qubits, DENSITY_QUBIT_CAP, "density matrices")?;
        let dim = 1 << n_qubits;
        let weights: Vec<f64> = (0..rank.max(1)).map(|_| rng.random::<f64>() + 1e-3).collect();
        let total: f64 = weights.iter().sum();
        let mut mat = DMatrix::zeros(dim, dim);
        for w in weights {
            let psi = StateVector::random(n_qubits, rng)?;
            let v = nalgebra::DVector::from_column_slice(psi.amplitudes());
            mat += (&v * v.adjoint()) * Complex64::new(w / total, 0.0);
        }
        Ok(Self { n_qubits, mat })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn trace(&self) -> Complex64 {
        self.mat.trace()
    }

    /// `tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        (&self.mat * &self.mat).trace().re
    }

    /// Largest `|ρ_ij − conj(ρ_ji)|`.
    pub fn hermiticity_error(&self) -> f64 {
        super::max_abs(&(&self.mat - self.mat.adjoint()))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.mat + self.mat.adjoint()) * Complex64::new(0.5, 0.0);
        herm.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `X ρ X†` where `apply` maps a column vector `v ↦ X v`.
    pub(crate) fn sandwich<F>(&self, apply: F) -> DMatrix<Complex64>
    where
        F: Fn(&mut [Complex64]),
    {
        let dim = self.dim();
        let mut left = self.mat.clone();
        for col in left.as_mut_slice().chunks_mut(dim) {
            apply(col);
        }
        let mut right = left.adjoint();
        for col in right.as_mut_slice().chunks_mut(dim) {
            apply(col);
        }
        right.adjoint()
    }

    /// In-place `U ρ U†`.
    pub fn apply(&mut self, gate: &GateOp) -> Result<()> {
        gate.validate(self.n_qubits)?;
        let n = self.n_qubits;
        self.mat = self.sandwich(|col| apply_unchecked(col, n, gate));
        Ok(())
    }

    /// `Σ_E E_q ρ E_q†` for 2×2 operators acting on `qubit`.
    pub(crate) fn apply_kraus(&mut self, qubit: usize, kraus: &[Matrix2]) -> Result<()> {
        if qubit >= self.n_qubits {
            return Err(Error::QubitOutOfRange {
                qubit,
                n_qubits: self.n_qubits,
            });
        }
        let n = self.n_qubits;
        let dim = self.dim();
        let mut acc = DMatrix::zeros(dim, dim);
        for e in kraus {
            acc += self.sandwich(|col| apply_matrix2(col, n, qubit, e));
        }
        self.mat = acc;
        Ok(())
    }
}

/// Functional form of [`DensityMatrix::apply`].
pub fn apply_gate_dm(rho: &DensityMatrix, gate: &GateOp) -> Result<DensityMatrix> {
    let mut out = rho.clone();
    out.apply(gate)?;
    Ok(out)
}

/// `|ψ⟩⟨ψ|`.
pub fn to_density(psi: &StateVector) -> Result<DensityMatrix> {
    DensityMatrix::from_pure(psi)
}

/// `⟨ψ|ρ|ψ⟩`.
pub fn fidelity_pure_mixed(psi: &StateVector, rho: &DensityMatrix) -> Result<f64> {
    if psi.n_qubits() != rho.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: psi.n_qubits(),
            found: rho.n_qubits(),
        });
    }
    let v = nalgebra::DVector::from_column_slice(psi.amplitudes());
    Ok((v.adjoint() * rho.matrix() * &v)[(0, 0)].re)
}
