//! Gate set and the bit-twiddling kernels that apply it to amplitude slices.
//!
//! Conventions:
//! - `Rx(θ) = exp(-iθX/2)`, `Ry(θ) = exp(-iθY/2)` (half angle).
//! - `Xx(ξ) = exp(-iξ X⊗X)` (no half angle).
//! - Qubit 0 is the most significant bit of a basis-state index.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major 2×2 complex matrix `[m00, m01, m10, m11]`.
pub type Matrix2 = [Complex64; 4];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Largest register accepted by [`gate_matrix_oracle`].
pub const ORACLE_QUBIT_CAP: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GateOp {
    Rx { qubit: usize, angle: f64 },
    Ry { qubit: usize, angle: f64 },
    Cnot { control: usize, target: usize },
    Xx { a: usize, b: usize, angle: f64 },
}

impl GateOp {
    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        let check = |q: usize| {
            if q >= n_qubits {
                Err(Error::QubitOutOfRange { qubit: q, n_qubits })
            } else {
                Ok(())
            }
        };
        let check_angle = |a: f64| {
            if a.is_finite() {
                Ok(())
            } else {
                Err(Error::NonFiniteAngle(a))
            }
        };
        match *self {
            GateOp::Rx { qubit, angle } | GateOp::Ry { qubit, angle } => {
                check(qubit)?;
                check_angle(angle)
            }
            GateOp::Cnot { control, target } => {
                check(control)?;
                check(target)?;
                if control == target {
                    return Err(Error::RepeatedQubit(control));
                }
                Ok(())
            }
            GateOp::Xx { a, b, angle } => {
                check(a)?;
                check(b)?;
                if a == b {
                    return Err(Error::RepeatedQubit(a));
                }
                check_angle(angle)
            }
        }
    }

    /// The inverse gate.
    pub fn adjoint(&self) -> GateOp {
        match *self {
            GateOp::Rx { qubit, angle } => GateOp::Rx {
                qubit,
                angle: -angle,
            },
            GateOp::Ry { qubit, angle } => GateOp::Ry {
                qubit,
                angle: -angle,
            },
            g @ GateOp::Cnot { .. } => g,
            GateOp::Xx { a, b, angle } => GateOp::Xx { a, b, angle: -angle },
        }
    }

    /// Same gate with its angle replaced. Angle-free gates are returned unchanged.
    pub fn with_angle(&self, angle: f64) -> GateOp {
        match *self {
            GateOp::Rx { qubit, .. } => GateOp::Rx { qubit, angle },
            GateOp::Ry { qubit, .. } => GateOp::Ry { qubit, angle },
            g @ GateOp::Cnot { .. } => g,
            GateOp::Xx { a, b, .. } => GateOp::Xx { a, b, angle },
        }
    }

    pub fn angle(&self) -> Option<f64> {
        match *self {
            GateOp::Rx { angle, .. } | GateOp::Ry { angle, .. } | GateOp::Xx { angle, .. } => {
                Some(angle)
            }
            GateOp::Cnot { .. } => None,
        }
    }

    pub fn is_entangler(&self) -> bool {
        matches!(self, GateOp::Cnot { .. } | GateOp::Xx { .. })
    }
}

pub fn rx_matrix(angle: f64) -> Matrix2 {
    let (s, c) = (angle / 2.0).sin_cos();
    let mis = Complex64::new(0.0, -s);
    [Complex64::new(c, 0.0), mis, mis, Complex64::new(c, 0.0)]
}

pub fn ry_matrix(angle: f64) -> Matrix2 {
    let (s, c) = (angle / 2.0).sin_cos();
    [
        Complex64::new(c, 0.0),
        Complex64::new(-s, 0.0),
        Complex64::new(s, 0.0),
        Complex64::new(c, 0.0),
    ]
}

pub fn pauli_x() -> Matrix2 {
    [ZERO, ONE, ONE, ZERO]
}

pub fn pauli_y() -> Matrix2 {
    [ZERO, Complex64::new(0.0, -1.0), Complex64::new(0.0, 1.0), ZERO]
}

pub fn pauli_z() -> Matrix2 {
    [ONE, ZERO, ZERO, -ONE]
}

pub fn identity2() -> Matrix2 {
    [ONE, ZERO, ZERO, ONE]
}

pub fn matmul2(a: &Matrix2, b: &Matrix2) -> Matrix2 {
    [
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    ]
}

pub fn dagger2(m: &Matrix2) -> Matrix2 {
    [m[0].conj(), m[2].conj(), m[1].conj(), m[3].conj()]
}

#[inline]
pub(crate) fn qubit_mask(n_qubits: usize, qubit: usize) -> usize {
    1 << (n_qubits - 1 - qubit)
}

/// Applies a 2×2 matrix to `qubit` of an amplitude slice of length `2^n_qubits`.
pub(crate) fn apply_matrix2(amps: &mut [Complex64], n_qubits: usize, qubit: usize, m: &Matrix2) {
    let mask = qubit_mask(n_qubits, qubit);
    for i in 0..amps.len() {
        if i & mask != 0 {
            continue;
        }
        let j = i | mask;
        let (a0, a1) = (amps[i], amps[j]);
        amps[i] = m[0] * a0 + m[1] * a1;
        amps[j] = m[2] * a0 + m[3] * a1;
    }
}

/// Applies an already validated gate to an amplitude slice.
pub(crate) fn apply_unchecked(amps: &mut [Complex64], n_qubits: usize, gate: &GateOp) {
    match *gate {
        GateOp::Rx { qubit, angle } => apply_matrix2(amps, n_qubits, qubit, &rx_matrix(angle)),
        GateOp::Ry { qubit, angle } => apply_matrix2(amps, n_qubits, qubit, &ry_matrix(angle)),
        GateOp::Cnot { control, target } => {
            let cm = qubit_mask(n_qubits, control);
            let tm = qubit_mask(n_qubits, target);
            for i in 0..amps.len() {
                if i & cm != 0 && i & tm == 0 {
                    amps.swap(i, i | tm);
                }
            }
        }
        GateOp::Xx { a, b, angle } => {
            let flip = qubit_mask(n_qubits, a) | qubit_mask(n_qubits, b);
            let (s, c) = angle.sin_cos();
            let mis = Complex64::new(0.0, -s);
            for i in 0..amps.len() {
                let j = i ^ flip;
                if i < j {
                    let (ai, aj) = (amps[i], amps[j]);
                    amps[i] = ai * c + mis * aj;
                    amps[j] = aj * c + mis * ai;
                }
            }
        }
    }
}

fn kron_chain(factors: &[Matrix2]) -> DMatrix<Complex64> {
    factors
        .iter()
        .map(|m| DMatrix::from_row_slice(2, 2, m))
        .reduce(|acc, f| acc.kronecker(&f))
        .unwrap_or_else(|| DMatrix::identity(1, 1))
}

fn embed(n_qubits: usize, ops: &[(usize, Matrix2)]) -> DMatrix<Complex64> {
    let mut factors = vec![identity2(); n_qubits];
    for &(q, m) in ops {
        factors[q] = m;
    }
    kron_chain(&factors)
}

/// Full `2^k × 2^k` unitary of `gate`, assembled from Kronecker products of
/// 2×2 blocks and identities. Independent of the slice kernels; used to
/// cross-check them.
pub fn gate_matrix_oracle(gate: &GateOp, n_qubits: usize) -> Result<DMatrix<Complex64>> {
    if n_qubits == 0 || n_qubits > ORACLE_QUBIT_CAP {
        return Err(Error::TooManyQubits {
            requested: n_qubits,
            cap: ORACLE_QUBIT_CAP,
            what: "the dense gate oracle",
        });
    }
    gate.validate(n_qubits)?;
    let p0: Matrix2 = [ONE, ZERO, ZERO, ZERO];
    let p1: Matrix2 = [ZERO, ZERO, ZERO, ONE];
    Ok(match *gate {
        GateOp::Rx { qubit, angle } => embed(n_qubits, &[(qubit, rx_matrix(angle))]),
        GateOp::Ry { qubit, angle } => embed(n_qubits, &[(qubit, ry_matrix(angle))]),
        GateOp::Cnot { control, target } => {
            embed(n_qubits, &[(control, p0)])
                + embed(n_qubits, &[(control, p1), (target, pauli_x())])
        }
        GateOp::Xx { a, b, angle } => {
            let dim = 1 << n_qubits;
            let xx = embed(n_qubits, &[(a, pauli_x()), (b, pauli_x())]);
            DMatrix::<Complex64>::identity(dim, dim) * Complex64::new(angle.cos(), 0.0)
                + xx * Complex64::new(0.0, -angle.sin())
        }
    })
}
