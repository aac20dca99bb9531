//! Memory circuit `M_θ` and variational data encoder `E_ξ(x)`.
//!
//! Parameter layouts are flat, row-major vectors:
//!
//! - `theta[layer * k + qubit]`, `layer ∈ 0..=d_m`.
//! - `xi[((layer * n_features) + feature) * 2k + slot]`, `layer ∈ 0..d_e`.
//!   Slots `0..k` are the `Ry` angles of each qubit, slot `k + j` is the
//!   `XX` angle on the ring pair `(j, (j + 1) mod k)`.
//!
//! Removing entanglers deletes the gates but keeps the parameter tensors at
//! full shape, so unused `XX` slots simply never reach the circuit.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::{GateOp, StateVector};

/// Which entangling gates are present. The four combinations are the four
/// circuit configurations used throughout the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct CircuitConfig {
    pub memory_entanglers: bool,
    pub encoder_entanglers: bool,
}

impl CircuitConfig {
    pub const ALL: [CircuitConfig; 4] = [
        CircuitConfig::new(false, false),
        CircuitConfig::new(true, false),
        CircuitConfig::new(false, true),
        CircuitConfig::new(true, true),
    ];

    pub const fn new(memory_entanglers: bool, encoder_entanglers: bool) -> Self {
        Self {
            memory_entanglers,
            encoder_entanglers,
        }
    }

    /// Configuration 1 (no entanglers) to 4 (all entanglers).
    pub fn from_id(id: u8) -> Result<Self> {
        match id {
            1..=4 => Ok(Self::ALL[id as usize - 1]),
            _ => Err(Error::InvalidArgument(format!(
                "circuit configuration must be 1..=4, got {id}"
            ))),
        }
    }

    pub fn id(&self) -> u8 {
        match (self.memory_entanglers, self.encoder_entanglers) {
            (false, false) => 1,
            (true, false) => 2,
            (false, true) => 3,
            (true, true) => 4,
        }
    }
}

impl Default for CircuitConfig {
    fn default() -> Self {
        Self::new(true, true)
    }
}

impl TryFrom<u8> for CircuitConfig {
    type Error = Error;
    fn try_from(id: u8) -> Result<Self> {
        Self::from_id(id)
    }
}

impl From<CircuitConfig> for u8 {
    fn from(c: CircuitConfig) -> u8 {
        c.id()
    }
}

fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().find(|v| !v.is_finite()) {
        Some(&v) => Err(Error::NonFiniteAngle(v)),
        None => Ok(()),
    }
}

fn uniform_angles<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-PI..PI)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MemoryParams {
    k: usize,
    d_m: usize,
    theta: Vec<f64>,
}

impl MemoryParams {
    pub fn new(k: usize, d_m: usize, theta: Vec<f64>) -> Result<Self> {
        let expected = k * (d_m + 1);
        if k == 0 || theta.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: theta.len(),
            });
        }
        check_finite(&theta)?;
        Ok(Self { k, d_m, theta })
    }

    pub fn zeros(k: usize, d_m: usize) -> Result<Self> {
        Self::new(k, d_m, vec![0.0; k * (d_m + 1)])
    }

    /// Angles drawn uniformly from `[-π, π)`.
    pub fn random<R: Rng + ?Sized>(k: usize, d_m: usize, rng: &mut R) -> Result<Self> {
        Self::new(k, d_m, uniform_angles(k * (d_m + 1), rng))
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn depth(&self) -> usize {
        self.d_m
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn angle(&self, layer: usize, qubit: usize) -> f64 {
        self.theta[layer * self.k + qubit]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncoderParams {
    k: usize,
    d_e: usize,
    n_features: usize,
    xi: Vec<f64>,
}

impl EncoderParams {
    pub fn new(k: usize, d_e: usize, n_features: usize, xi: Vec<f64>) -> Result<Self> {
        let expected = 2 * k * n_features * d_e;
        if k == 0 || n_features == 0 || xi.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: xi.len(),
            });
        }
        check_finite(&xi)?;
        Ok(Self {
            k,
            d_e,
            n_features,
            xi,
        })
    }

    pub fn zeros(k: usize, d_e: usize, n_features: usize) -> Result<Self> {
        Self::new(k, d_e, n_features, vec![0.0; 2 * k * n_features * d_e])
    }

    /// Angles drawn uniformly from `[-π, π)`.
    pub fn random<R: Rng + ?Sized>(
        k: usize,
        d_e: usize,
        n_features: usize,
        rng: &mut R,
    ) -> Result<Self> {
        Self::new(k, d_e, n_features, uniform_angles(2 * k * n_features * d_e, rng))
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn depth(&self) -> usize {
        self.d_e
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn xi(&self) -> &[f64] {
        &self.xi
    }

    /// Flat index of `(layer, feature, slot)`.
    pub fn index(&self, layer: usize, feature: usize, slot: usize) -> usize {
        (layer * self.n_features + feature) * 2 * self.k + slot
    }
}

/// Gate list of the memory circuit: an `Rx` column, then `d_m` repetitions of
/// a CNOT ring `(0→1), (1→2), …, (k−1→0)` followed by another `Rx` column.
pub fn build_memory(params: &MemoryParams, config: CircuitConfig) -> Result<Vec<GateOp>> {
    let k = params.k;
    if config.memory_entanglers && params.d_m > 0 && k < 2 {
        return Err(Error::RingTooSmall(k));
    }
    let mut gates = Vec::with_capacity(k * (params.d_m + 1) + k * params.d_m);
    let column = |gates: &mut Vec<GateOp>, layer: usize| {
        for q in 0..k {
            gates.push(GateOp::Rx {
                qubit: q,
                angle: params.angle(layer, q),
            });
        }
    };
    column(&mut gates, 0);
    for layer in 1..=params.d_m {
        if config.memory_entanglers {
            for q in 0..k {
                gates.push(GateOp::Cnot {
                    control: q,
                    target: (q + 1) % k,
                });
            }
        }
        column(&mut gates, layer);
    }
    Ok(gates)
}

/// `|Ψ⟩ = M_θ|0⟩`.
pub fn memory_state(params: &MemoryParams, config: CircuitConfig) -> Result<StateVector> {
    let mut state = StateVector::zero(params.k)?;
    state.apply_all(&build_memory(params, config)?)?;
    Ok(state)
}

/// Encoder gates, each tagged with the index into `xi` of its trainable angle.
pub(crate) fn encoder_gates_tagged(
    params: &EncoderParams,
    x: &[f64],
    config: CircuitConfig,
) -> Result<Vec<(GateOp, Option<usize>)>> {
    let k = params.k;
    if x.len() != params.n_features {
        return Err(Error::DimensionMismatch {
            expected: params.n_features,
            found: x.len(),
        });
    }
    check_finite(x)?;
    if config.encoder_entanglers && params.d_e > 0 && k < 2 {
        return Err(Error::RingTooSmall(k));
    }
    let per_block = if config.encoder_entanglers { 3 * k } else { 2 * k };
    let mut gates = Vec::with_capacity(per_block * params.n_features * params.d_e);
    for layer in 0..params.d_e {
        for (feature, &xn) in x.iter().enumerate() {
            for q in 0..k {
                let idx = params.index(layer, feature, q);
                gates.push((
                    GateOp::Ry {
                        qubit: q,
                        angle: params.xi[idx],
                    },
                    Some(idx),
                ));
            }
            if config.encoder_entanglers {
                // Rightmost factor first: pair (0,1) with slot k, …, pair (k-1,0) with slot 2k-1.
                for j in 0..k {
                    let idx = params.index(layer, feature, k + j);
                    gates.push((
                        GateOp::Xx {
                            a: j,
                            b: (j + 1) % k,
                            angle: params.xi[idx],
                        },
                        Some(idx),
                    ));
                }
            }
            for q in 0..k {
                gates.push((GateOp::Rx { qubit: q, angle: xn }, None));
            }
        }
    }
    Ok(gates)
}

/// Gate list of `E_ξ(x)`: per layer and feature, an `Ry` column, the `XX`
/// ring (when enabled) and `Rx(x_n)` on every qubit.
pub fn build_encoder(params: &EncoderParams, x: &[f64], config: CircuitConfig) -> Result<Vec<GateOp>> {
    Ok(encoder_gates_tagged(params, x, config)?
        .into_iter()
        .map(|(g, _)| g)
        .collect())
}

/// `|ψ(x)⟩ = E_ξ(x)|0⟩`.
pub fn encode_state(params: &EncoderParams, x: &[f64], config: CircuitConfig) -> Result<StateVector> {
    let mut state = StateVector::zero(params.k)?;
    state.apply_all(&build_encoder(params, x, config)?)?;
    Ok(state)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamCount {
    pub memory: usize,
    pub encoder: usize,
}

impl ParamCount {
    pub fn total(&self) -> usize {
        self.memory + self.encoder
    }
}

pub fn param_count(k: usize, d_m: usize, d_e: usize, n_features: usize) -> ParamCount {
    ParamCount {
        memory: k * (d_m + 1),
        encoder: 2 * k * n_features * d_e,
    }
}

/// Smallest single-qubit marginal purity. Equal to one exactly when the state
/// factorizes across every single-qubit cut.
pub fn product_state_check(state: &StateVector) -> f64 {
    let n = state.n_qubits();
    let amps = state.amplitudes();
    (0..n)
        .map(|q| {
            let mask = 1 << (n - 1 - q);
            let (mut p0, mut p1) = (0.0, 0.0);
            let mut coh = num_complex::Complex64::new(0.0, 0.0);
            for i in 0..amps.len() {
                if i & mask == 0 {
                    p0 += amps[i].norm_sqr();
                    p1 += amps[i | mask].norm_sqr();
                    coh += amps[i] * amps[i | mask].conj();
                }
            }
            p0 * p0 + p1 * p1 + 2.0 * coh.norm_sqr()
        })
        .fold(1.0, f64::min)
}

/// Serializable circuit description used for checkpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitSpec {
    pub k: usize,
    pub d_m: usize,
    pub d_e: usize,
    pub n_features: usize,
    pub config: CircuitConfig,
    pub theta: Vec<f64>,
    pub xi: Vec<f64>,
}

impl CircuitSpec {
    pub fn new(memory: &MemoryParams, encoder: &EncoderParams, config: CircuitConfig) -> Self {
        Self {
            k: memory.k,
            d_m: memory.d_m,
            d_e: encoder.d_e,
            n_features: encoder.n_features,
            config,
            theta: memory.theta.clone(),
            xi: encoder.xi.clone(),
        }
    }

    pub fn memory(&self) -> Result<MemoryParams> {
        MemoryParams::new(self.k, self.d_m, self.theta.clone())
    }

    pub fn encoder(&self) -> Result<EncoderParams> {
        EncoderParams::new(self.k, self.d_e, self.n_features, self.xi.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn memory_gate_counts() {
        let p = MemoryParams::zeros(3, 3).unwrap();
        let on = build_memory(&p, CircuitConfig::new(true, false)).unwrap();
        let off = build_memory(&p, CircuitConfig::new(false, false)).unwrap();
        let rx = |g: &Vec<GateOp>| g.iter().filter(|g| matches!(g, GateOp::Rx { .. })).count();
        assert_eq!(rx(&on), 12);
        assert_eq!(on.len(), 12 + 9);
        assert_eq!(off.len(), 12);
    }

    #[test]
    fn memory_ring_order() {
        let p = MemoryParams::zeros(3, 1).unwrap();
        let cnots: Vec<_> = build_memory(&p, CircuitConfig::new(true, true))
            .unwrap()
            .into_iter()
            .filter_map(|g| match g {
                GateOp::Cnot { control, target } => Some((control, target)),
                _ => None,
            })
            .collect();
        assert_eq!(cnots, vec![(0, 1), (1, 2), (2, 0)]);
    }

    #[test]
    fn ring_needs_two_qubits() {
        let p = MemoryParams::zeros(1, 2).unwrap();
        assert!(matches!(
            build_memory(&p, CircuitConfig::new(true, false)),
            Err(Error::RingTooSmall(1))
        ));
        assert!(build_memory(&p, CircuitConfig::new(false, false)).is_ok());
    }

    #[test]
    fn zero_parameters_give_ground_state() {
        let p = MemoryParams::zeros(3, 2).unwrap();
        let s = memory_state(&p, CircuitConfig::new(false, false)).unwrap();
        assert_eq!(s, StateVector::zero(3).unwrap());
        let e = EncoderParams::zeros(3, 2, 1).unwrap();
        let s = encode_state(&e, &[0.0], CircuitConfig::new(false, false)).unwrap();
        assert_eq!(s, StateVector::zero(3).unwrap());
    }

    #[test]
    fn encoder_data_rotation_hand_example() {
        // Rx(π)⊗Rx(π)|00⟩ = (−i)²|11⟩ = −|11⟩
        let e = EncoderParams::zeros(2, 1, 1).unwrap();
        let s = encode_state(&e, &[std::f64::consts::PI], CircuitConfig::new(false, false)).unwrap();
        assert!((s.amplitudes()[3] - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn encoder_counts_and_layout() {
        assert_eq!(param_count(3, 3, 6, 1), ParamCount { memory: 12, encoder: 36 });
        assert_eq!(param_count(3, 3, 6, 2).encoder, 72);
        assert_eq!(param_count(3, 3, 0, 1).encoder, 0);
        let e = EncoderParams::zeros(3, 6, 1).unwrap();
        assert_eq!(e.xi().len(), 36);
        let g = build_encoder(&e, &[0.3], CircuitConfig::default()).unwrap();
        assert_eq!(g.len(), 6 * 9);
        let e2 = EncoderParams::zeros(3, 12, 1).unwrap();
        assert_eq!(build_encoder(&e2, &[0.3], CircuitConfig::default()).unwrap().len(), 2 * g.len());
        assert!(build_encoder(&e, &[0.3, 0.1], CircuitConfig::default()).is_err());
    }

    #[test]
    fn zero_xx_equals_no_entanglers() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut e = EncoderParams::random(3, 3, 2, &mut rng).unwrap();
        let k = e.k();
        for layer in 0..3 {
            for f in 0..2 {
                for j in 0..k {
                    let idx = e.index(layer, f, k + j);
                    e.xi[idx] = 0.0;
                }
            }
        }
        let x = [0.4, -0.7];
        let a = encode_state(&e, &x, CircuitConfig::new(false, true)).unwrap();
        let b = encode_state(&e, &x, CircuitConfig::new(false, false)).unwrap();
        for (u, v) in a.amplitudes().iter().zip(b.amplitudes()) {
            assert!((u - v).norm() < 1e-12);
        }
    }

    #[test]
    fn product_check_examples() {
        assert_eq!(product_state_check(&StateVector::zero(3).unwrap()), 1.0);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let z = Complex64::new(0.0, 0.0);
        let bell = StateVector::from_amplitudes(
            2,
            vec![Complex64::new(h, 0.0), z, z, Complex64::new(h, 0.0)],
        )
        .unwrap();
        assert!((product_state_check(&bell) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn config_ids_round_trip() {
        for id in 1..=4u8 {
            assert_eq!(CircuitConfig::from_id(id).unwrap().id(), id);
        }
        assert!(CircuitConfig::from_id(0).is_err());
        assert!(CircuitConfig::from_id(5).is_err());
        assert_eq!(CircuitConfig::from_id(1).unwrap(), CircuitConfig::new(false, false));
        assert_eq!(CircuitConfig::from_id(2).unwrap(), CircuitConfig::new(true, false));
        assert_eq!(CircuitConfig::from_id(3).unwrap(), CircuitConfig::new(false, true));
    }

    #[test]
    fn spec_json_layout() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = MemoryParams::random(3, 1, &mut rng).unwrap();
        let e = EncoderParams::random(3, 1, 1, &mut rng).unwrap();
        let spec = CircuitSpec::new(&m, &e, CircuitConfig::from_id(3).unwrap());
        let json = serde_json::to_value(&spec).unwrap();
        assert_eq!(json["config"], 3);
        assert_eq!(json["theta"].as_array().unwrap().len(), 6);
        let back: CircuitSpec = serde_json::from_value(json).unwrap();
        assert_eq!(back, spec);
        assert_eq!(back.memory().unwrap(), m);
    }
}
