//! Dense pure-state register.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::gate::{apply_unchecked, GateOp};
use crate::error::{Error, Result};

/// Largest statevector register.
pub const STATE_QUBIT_CAP: usize = 12;

/// Normalized amplitudes of a `k`-qubit pure state, qubit 0 most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

pub(crate) fn check_qubits(n_qubits: usize, cap: usize, what: &'static str) -> Result<()> {
    if n_qubits == 0 || n_qubits > cap {
        return Err(Error::TooManyQubits {
            requested: n_qubits,
            cap,
            what,
        });
    }
    Ok(())
}

impl StateVector {
    /// `|0…0⟩` on `n_qubits` qubits.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        check_qubits(n_qubits, STATE_QUBIT_CAP, "statevectors")?;
        let dim = 1 << n_qubits;
        if index >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: index,
            });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    /// Wraps raw amplitudes. The length must be `2^n_qubits`; the caller is
    /// responsible for normalization (see [`StateVector::normalized`]).
    pub fn from_amplitudes(n_qubits: usize, amps: Vec<Complex64>) -> Result<Self> {
        check_qubits(n_qubits, STATE_QUBIT_CAP, "statevectors")?;
        if amps.len() != 1 << n_qubits {
            return Err(Error::DimensionMismatch {
                expected: 1 << n_qubits,
                found: amps.len(),
            });
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::InvalidArgument("non-finite amplitude".into()));
        }
        Ok(Self { n_qubits, amps })
    }

    /// Haar-like random state from normally distributed amplitudes.
    pub fn random<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> Result<Self> {
        check_qubits(n_qubits, STATE_QUBIT_CAP, "statevectors")?;
        let amps = (0..1usize << n_qubits)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        Ok(Self { n_qubits, amps }.normalized())
    }

    pub fn normalized(mut self) -> Self {
        let n = self.norm();
        if n > 0.0 {
            self.amps.iter_mut().for_each(|a| *a /= n);
        }
        self
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }


    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// In-place `U|ψ⟩`.
    pub fn apply(&mut self, gate: &GateOp) -> Result<()> {
        gate.validate(self.n_qubits)?;
        apply_unchecked(&mut self.amps, self.n_qubits, gate);
        Ok(())
    }

    pub fn apply_all<'a, I>(&mut self, gates: I) -> Result<()>
    where
        I: IntoIterator<Item = &'a GateOp>,
    {
        for g in gates {
            self.apply(g)?;
        }
        Ok(())
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                found: other.n_qubits,
            });
        }
        Ok(dot(&self.amps, &other.amps))
    }
}

/// `Σ conj(a_i) b_i`.
#[inline]
pub(crate) fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Functional form of [`StateVector::apply`].
pub fn apply_gate(state: &StateVector, gate: &GateOp) -> Result<StateVector> {
    let mut out = state.clone();
    out.apply(gate)?;
    Ok(out)
}

/// The kernel value `⟨a|b⟩`.
pub fn overlap(a: &StateVector, b: &StateVector) -> Result<Complex64> {
    a.inner(b)
}
