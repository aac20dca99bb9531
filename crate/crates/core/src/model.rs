//! The regression model `f(x) = |⟨Ψ|ψ(x)⟩|`, its loss, the quantum kernel,
//! and the representer-form baseline predictor.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circuits::{
    encode_state, memory_state, CircuitConfig, CircuitSpec, EncoderParams, MemoryParams,
};
use crate::error::{Error, Result};
use crate::noise::{apply_local_noise, NoiseSpec};
use crate::sim::swap_test::sample_fraction;
use crate::sim::{fidelity_pure_mixed, swap_test_p0, to_density, StateVector};

/// How the swap-test probability is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum EvalMode {
    #[default]
    Exact,
    Shots { count: u64, seed: u64 },
}

#[derive(Debug, Clone)]
pub struct VqraModel {
    memory: MemoryParams,
    encoder: EncoderParams,
    config: CircuitConfig,
    noise: NoiseSpec,
    eval_mode: EvalMode,
    memory_state: StateVector,
}

/// splitmix64 finalizer.
pub(crate) fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn input_seed(seed: u64, x: &[f64]) -> u64 {
    x.iter().fold(mix64(seed), |h, v| mix64(h ^ v.to_bits()))
}

impl VqraModel {
    pub fn new(
        memory: MemoryParams,
        encoder: EncoderParams,
        config: CircuitConfig,
        noise: NoiseSpec,
        eval_mode: EvalMode,
    ) -> Result<Self> {
        if memory.k() != encoder.k() {
            return Err(Error::DimensionMismatch {
                expected: memory.k(),
                found: encoder.k(),
            });
        }
        if let EvalMode::Shots { count: 0, .. } = eval_mode {
            return Err(Error::ZeroShots);
        }
        let memory_state = memory_state(&memory, config)?;
        Ok(Self {
            memory,
            encoder,
            config,
            noise,
            eval_mode,
            memory_state,
        })
    }

    pub fn from_spec(spec: &CircuitSpec, noise: NoiseSpec, eval_mode: EvalMode) -> Result<Self> {
        Self::new(spec.memory()?, spec.encoder()?, spec.config, noise, eval_mode)
    }

    pub fn spec(&self) -> CircuitSpec {
        CircuitSpec::new(&self.memory, &self.encoder, self.config)
    }

    pub fn k(&self) -> usize {
        self.memory.k()
    }

    pub fn n_features(&self) -> usize {
        self.encoder.n_features()
    }

    pub fn memory(&self) -> &MemoryParams {
        &self.memory
    }

    pub fn encoder(&self) -> &EncoderParams {
        &self.encoder
    }

    pub fn config(&self) -> CircuitConfig {
        self.config
    }

    pub fn noise(&self) -> &NoiseSpec {
        &self.noise
    }

    pub fn eval_mode(&self) -> EvalMode {
        self.eval_mode
    }

    pub fn with_eval_mode(mut self, mode: EvalMode) -> Result<Self> {
        if let EvalMode::Shots { count: 0, .. } = mode {
            return Err(Error::ZeroShots);
        }
        self.eval_mode = mode;
        Ok(self)
    }

    /// Cached `|Ψ⟩ = M_θ|0⟩`.
    pub fn memory_state(&self) -> &StateVector {
        &self.memory_state
    }

    pub fn n_parameters(&self) -> usize {
        self.memory.theta().len() + self.encoder.xi().len()
    }

    /// All trainable angles, `θ` followed by `ξ`.
    pub fn parameters(&self) -> Vec<f64> {
        let mut p = self.memory.theta().to_vec();
        p.extend_from_slice(self.encoder.xi());
        p
    }

    pub fn set_parameters(&mut self, params: &[f64]) -> Result<()> {
        let n_theta = self.memory.theta().len();
        if params.len() != self.n_parameters() {
            return Err(Error::DimensionMismatch {
                expected: self.n_parameters(),
                found: params.len(),
            });
        }
        let memory = MemoryParams::new(self.k(), self.memory.depth(), params[..n_theta].to_vec())?;
        let encoder = EncoderParams::new(
            self.k(),
            self.encoder.depth(),
            self.n_features(),
            params[n_theta..].to_vec(),
        )?;
        self.memory_state = memory_state(&memory, self.config)?;
        self.memory = memory;
        self.encoder = encoder;
        Ok(())
    }

    pub fn encode(&self, x: &[f64]) -> Result<StateVector> {
        encode_state(&self.encoder, x, self.config)
    }

    /// `f(x) ∈ [0, 1]`. Without noise this is `|⟨Ψ|ψ(x)⟩|`; with noise it is
    /// `√(2p(0) − 1)` from the mixed-state swap test, clamped at zero.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        let psi = self.encode(x)?;
        let exact_p0 = || -> Result<f64> {
            if self.noise.is_none() {
                swap_test_p0(&self.memory_state, &psi)
            } else {
                let rho = apply_local_noise(&to_density(&psi)?, &self.noise)?;
                swap_test_p0(&self.memory_state, &rho)
            }
        };
        let f = match self.eval_mode {
            EvalMode::Exact if self.noise.is_none() => self.memory_state.inner(&psi)?.norm(),
            EvalMode::Exact => {
                let rho = apply_local_noise(&to_density(&psi)?, &self.noise)?;
                fidelity_pure_mixed(&self.memory_state, &rho)?.max(0.0).sqrt()
            }
            EvalMode::Shots { count, seed } => {
                let p0 = sample_fraction(exact_p0()?, count, input_seed(seed, x))?;
                (2.0 * p0 - 1.0).max(0.0).sqrt()
            }
        };
        Ok(f.min(1.0))
    }
}

/// Affine map applied to raw labels before they enter a [`Dataset`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetScaling {
    pub offset: f64,
    pub scale: f64,
}

impl Default for TargetScaling {
    fn default() -> Self {
        Self {
            offset: 0.0,
            scale: 1.0,
        }
    }
}

impl TargetScaling {
    /// Maps `[lo, hi]` onto `[0, 1]`.
    pub fn onto_unit(lo: f64, hi: f64) -> Result<Self> {
        if !(hi > lo) {
            return Err(Error::InvalidArgument(format!("empty label range [{lo}, {hi}]")));
        }
        Ok(Self {
            offset: -lo,
            scale: 1.0 / (hi - lo),
        })
    }

    pub fn apply(&self, y: f64) -> f64 {
        (y + self.offset) * self.scale
    }

    pub fn invert(&self, y: f64) -> f64 {
        y / self.scale - self.offset
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    xs: Vec<Vec<f64>>,
    ys: Vec<f64>,
    feature_dim: usize,
}

impl Dataset {
    /// Labels must already lie in `[0, 1]`.
    pub fn new(points: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        Self::scaled(points, TargetScaling::default())
    }

    pub fn scaled(points: Vec<(Vec<f64>, f64)>, scaling: TargetScaling) -> Result<Self> {
        let feature_dim = points.first().ok_or(Error::EmptyDataset)?.0.len();
        let mut xs = Vec::with_capacity(points.len());
        let mut ys = Vec::with_capacity(points.len());
        for (x, y) in points {
            if x.len() != feature_dim {
                return Err(Error::DimensionMismatch {
                    expected: feature_dim,
                    found: x.len(),
                });
            }
            let y = scaling.apply(y);
            if !(0.0..=1.0).contains(&y) {
                return Err(Error::LabelOutOfRange(y));
            }
            xs.push(x);
            ys.push(y);
        }
        Ok(Self { xs, ys, feature_dim })
    }

    pub fn len(&self) -> usize {
        self.ys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ys.is_empty()
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn xs(&self) -> &[Vec<f64>] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> {
        self.xs.iter().map(Vec::as_slice).zip(self.ys.iter().copied())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossReport {
    pub mse: f64,
    pub regularization: f64,
    pub total: f64,
    pub per_sample_residuals: Vec<f64>,
}

/// `λ · mean(p²)` over every trainable angle.
pub(crate) fn angle_penalty(params: &[f64], reg_lambda: f64) -> f64 {
    if reg_lambda == 0.0 || params.is_empty() {
        return 0.0;
    }
    reg_lambda * params.iter().map(|p| p * p).sum::<f64>() / params.len() as f64
}

/// Mean squared error plus the optional mean-square-angle penalty.
pub fn loss(model: &VqraModel, data: &Dataset, reg_lambda: f64) -> Result<LossReport> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if !(reg_lambda >= 0.0) {
        return Err(Error::InvalidArgument(format!("reg_lambda {reg_lambda} < 0")));
    }
    let residuals = data
        .iter()
        .map(|(x, y)| Ok(model.predict(x)? - y))
        .collect::<Result<Vec<f64>>>()?;
    let mse = residuals.iter().map(|r| r * r).sum::<f64>() / residuals.len() as f64;
    let regularization = angle_penalty(&model.parameters(), reg_lambda);
    Ok(LossReport {
        mse,
        regularization,
        total: mse + regularization,
        per_sample_residuals: residuals,
    })
}

fn encode_all(encoder: &EncoderParams, config: CircuitConfig, xs: &[Vec<f64>]) -> Result<Vec<StateVector>> {
    xs.iter().map(|x| encode_state(encoder, x, config)).collect()
}

/// Gram matrix `K[i][j] = ⟨ψ(x_i)|ψ(x_j)⟩`.
pub fn kernel_matrix(
    encoder: &EncoderParams,
    config: CircuitConfig,
    xs: &[Vec<f64>],
) -> Result<DMatrix<Complex64>> {
    let states = encode_all(encoder, config, xs)?;
    let m = states.len();
    let mut k = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            k[(i, j)] = states[i].inner(&states[j])?;
        }
    }
    Ok(k)
}

/// `|Σ_m β_m y_m κ(x_m, x)|`.
pub fn representer_predict(
    encoder: &EncoderParams,
    config: CircuitConfig,
    train: &Dataset,
    beta: &[f64],
    x: &[f64],
) -> Result<f64> {
    if beta.len() != train.len() {
        return Err(Error::DimensionMismatch {
            expected: train.len(),
            found: beta.len(),
        });
    }
    let psi = encode_state(encoder, x, config)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for ((xm, ym), b) in train.iter().zip(beta) {
        let phi = encode_state(encoder, xm, config)?;
        acc += phi.inner(&psi)? * (b * ym);
    }
    Ok(acc.norm())
}

/// Real design matrix `A[m][j] = Re(y_j κ(x_j, x_m))`.
pub fn representer_design(
    encoder: &EncoderParams,
    config: CircuitConfig,
    train: &Dataset,
) -> Result<DMatrix<f64>> {
    let k = kernel_matrix(encoder, config, train.xs())?;
    let ys = train.ys();
    Ok(DMatrix::from_fn(train.len(), train.len(), |m, j| (k[(j, m)] * ys[j]).re))
}

/// Ridge least squares `argmin |Aβ − y|² + ridge·|β|²` on the real design
/// matrix. With `ridge = 0` a rank-deficient design is reported as
/// [`Error::SingularSystem`].
pub fn fit_beta_least_squares(
    encoder: &EncoderParams,
    config: CircuitConfig,
    train: &Dataset,
    ridge: f64,
) -> Result<Vec<f64>> {
    if train.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if !(ridge >= 0.0) {
        return Err(Error::InvalidArgument(format!("ridge {ridge} < 0")));
    }
    let a = representer_design(encoder, config, train)?;
    let y = DVector::from_column_slice(train.ys());
    let svd = a.svd(true, true);
    let s_max = svd.singular_values.max();
    if ridge == 0.0 && svd.singular_values.iter().any(|&s| s <= s_max * 1e-12) {
        return Err(Error::SingularSystem);
    }
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::SingularSystem),
    };
    // β = V diag(s / (s² + ridge)) Uᵀ y
    let uty = u.transpose() * y;
    let scaled = DVector::from_iterator(
        uty.len(),
        uty.iter()
            .zip(svd.singular_values.iter())
            .map(|(c, &s)| if s > 0.0 { c * s / (s * s + ridge) } else { 0.0 }),
    );
    Ok((v_t.transpose() * scaled).iter().copied().collect())
}

/// Sum of squared residuals of the real-part design, `|Aβ − y|²`.
pub fn representer_residual(
    encoder: &EncoderParams,
    config: CircuitConfig,
    train: &Dataset,
    beta: &[f64],
) -> Result<f64> {
    let a = representer_design(encoder, config, train)?;
    let r = a * DVector::from_column_slice(beta) - DVector::from_column_slice(train.ys());
    Ok(r.norm_squared())
}

/// Training record stored alongside a checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingRecord {
    pub xs: Vec<Vec<f64>>,
    pub ys: Vec<f64>,
    pub predictions: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub circuit: CircuitSpec,
    pub noise: NoiseSpec,
    #[serde(default)]
    pub eval_mode: EvalMode,
    #[serde(default)]
    pub loss_history: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub training: Option<TrainingRecord>,
}

impl Checkpoint {
    pub fn model(&self) -> Result<VqraModel> {
        VqraModel::from_spec(&self.circuit, self.noise.clone(), self.eval_mode)
    }
}
