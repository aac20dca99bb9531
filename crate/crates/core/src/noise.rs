//! Single-qubit Kraus channels applied identically to every qubit of the
//! encoded register.
//!
//! Kraus sets:
//! - depolarizing(p): `√(1−3p/4)·I`, `√(p/4)·X`, `√(p/4)·Y`, `√(p/4)·Z`,
//!   so that `ε(ρ) = pI/2 + (1−p)ρ`.
//! - amplitude damping(γ): `diag(1, √(1−γ))` and `√γ·|0⟩⟨1|`.
//! - phase damping(γ): `diag(1, √(1−γ))` and `diag(0, √γ)`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::gate::{dagger2, identity2, matmul2, pauli_x, pauli_y, pauli_z, Matrix2};
use crate::sim::DensityMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    Depolarizing,
    AmplitudeDamping,
    PhaseDamping,
    #[serde(rename = "none")]
    Identity,
}

impl ChannelKind {
    pub fn build(self, strength: f64) -> Result<KrausChannel> {
        match self {
            ChannelKind::Depolarizing => depolarizing(strength),
            ChannelKind::AmplitudeDamping => amplitude_damping(strength),
            ChannelKind::PhaseDamping => phase_damping(strength),
            ChannelKind::Identity if strength == 0.0 => Ok(KrausChannel::identity()),
            ChannelKind::Identity => Err(Error::InvalidArgument(
                "the identity channel takes strength 0".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    kind: ChannelKind,
    strength: f64,
    kraus: Vec<Matrix2>,
}

fn scaled(m: Matrix2, s: f64) -> Matrix2 {
    m.map(|z| z * s)
}

fn check_strength(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidStrength(p))
    }
}

fn real(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn depolarizing(p: f64) -> Result<KrausChannel> {
    check_strength(p)?;
    let side = (p / 4.0).sqrt();
    Ok(KrausChannel {
        kind: ChannelKind::Depolarizing,
        strength: p,
        kraus: vec![
            scaled(identity2(), (1.0 - 3.0 * p / 4.0).sqrt()),
            scaled(pauli_x(), side),
            scaled(pauli_y(), side),
            scaled(pauli_z(), side),
        ],
    })
}

pub fn amplitude_damping(gamma: f64) -> Result<KrausChannel> {
    check_strength(gamma)?;
    let z = real(0.0);
    Ok(KrausChannel {
        kind: ChannelKind::AmplitudeDamping,
        strength: gamma,
        kraus: vec![
            [real(1.0), z, z, real((1.0 - gamma).sqrt())],
            [z, real(gamma.sqrt()), z, z],
        ],
    })
}

pub fn phase_damping(gamma: f64) -> Result<KrausChannel> {
    check_strength(gamma)?;
    let z = real(0.0);
    Ok(KrausChannel {
        kind: ChannelKind::PhaseDamping,
        strength: gamma,
        kraus: vec![
            [real(1.0), z, z, real((1.0 - gamma).sqrt())],
            [z, z, z, real(gamma.sqrt())],
        ],
    })
}

impl KrausChannel {
    pub fn identity() -> Self {
        Self {
            kind: ChannelKind::Identity,
            strength: 0.0,
            kraus: vec![identity2()],
        }
    }

    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    pub fn strength(&self) -> f64 {
        self.strength
    }

    pub fn kraus(&self) -> &[Matrix2] {
        &self.kraus
    }

    /// Largest entry of `|Σ E†E − I|`.
    pub fn completeness_error(&self) -> f64 {
        let sum = self
            .kraus
            .iter()
            .map(|e| matmul2(&dagger2(e), e))
            .fold([real(0.0); 4], |acc, m| {
                [acc[0] + m[0], acc[1] + m[1], acc[2] + m[2], acc[3] + m[3]]
            });
        sum.iter()
            .zip(identity2().iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `ε` on one qubit of `rho`.
    pub fn apply_to_qubit(&self, rho: &mut DensityMatrix, qubit: usize) -> Result<()> {
        rho.apply_kraus(qubit, &self.kraus)
    }
}

/// Placement is fixed: the channel follows the encoder and acts identically
/// on every qubit of the encoded register.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NoiseSpecRepr", into = "NoiseSpecRepr")]
pub struct NoiseSpec {
    channel: KrausChannel,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NoiseSpecRepr {
    channel: ChannelKind,
    #[serde(default)]
    strength: f64,
}

impl TryFrom<NoiseSpecRepr> for NoiseSpec {
    type Error = Error;
    fn try_from(r: NoiseSpecRepr) -> Result<Self> {
        NoiseSpec::new(r.channel, r.strength)
    }
}

impl From<NoiseSpec> for NoiseSpecRepr {
    fn from(n: NoiseSpec) -> Self {
        NoiseSpecRepr {
            channel: n.channel.kind,
            strength: n.channel.strength,
        }
    }
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self::none()
    }
}

impl NoiseSpec {
    pub fn none() -> Self {
        Self {
            channel: KrausChannel::identity(),
        }
    }

    pub fn new(kind: ChannelKind, strength: f64) -> Result<Self> {
        Ok(Self {
            channel: kind.build(strength)?,
        })
    }

    pub fn channel(&self) -> &KrausChannel {
        &self.channel
    }

    /// True only for the explicit identity channel. A zero-strength physical
    /// channel still routes predictions through the density-matrix path.
    pub fn is_none(&self) -> bool {
        self.channel.kind == ChannelKind::Identity
    }
}

/// `(⊗_i ε_i)(ρ)`.
pub fn apply_local_noise(rho: &DensityMatrix, spec: &NoiseSpec) -> Result<DensityMatrix> {
    let order: Vec<usize> = (0..rho.n_qubits()).collect();
    apply_local_noise_in_order(rho, spec, &order)
}

/// Same as [`apply_local_noise`] with an explicit qubit visiting order.
pub fn apply_local_noise_in_order(
    rho: &DensityMatrix,
    spec: &NoiseSpec,
    order: &[usize],
) -> Result<DensityMatrix> {
    let mut out = rho.clone();
    if spec.is_none() {
        return Ok(out);
    }
    for &q in order {
        spec.channel.apply_to_qubit(&mut out, q)?;
    }
    Ok(out)
}

/// Heisenberg-picture adjoint `(⊗_i ε_i†)(A)` with `ε†(A) = Σ E† A E`, so
/// that `tr(A · ε(ρ)) = tr(ε†(A) · ρ)`.
pub(crate) fn apply_adjoint_local_noise(
    n_qubits: usize,
    op: DMatrix<Complex64>,
    spec: &NoiseSpec,
) -> Result<DMatrix<Complex64>> {
    if spec.is_none() {
        return Ok(op);
    }
    let adjoint_kraus: Vec<Matrix2> = spec.channel.kraus.iter().map(dagger2).collect();
    let mut acc = DensityMatrix::from_matrix(n_qubits, op)?;
    for q in 0..n_qubits {
        acc.apply_kraus(q, &adjoint_kraus)?;
    }
    Ok(acc.matrix().clone())
}
