//! Target functions, synthetic datasets, and the fitting, depth-sweep and
//! noise-sweep studies.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuits::{CircuitConfig, EncoderParams, MemoryParams};
use crate::error::{Error, Result};
use crate::model::{loss, Dataset, EvalMode, VqraModel};
use crate::noise::{ChannelKind, NoiseSpec};
use crate::optimize::{initial_parameters, train_model, TrainConfig, TrainTrace};

/// Offset added to the top-level seed to seed dataset synthesis.
pub const DATASET_SEED_TAG: u64 = 0xDA7A;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetFunction {
    F1,
    F2,
    F3,
    F4,
    F5,
}

impl TargetFunction {
    pub const ALL: [TargetFunction; 5] = [Self::F1, Self::F2, Self::F3, Self::F4, Self::F5];

    pub fn arity(self) -> usize {
        match self {
            Self::F5 => 2,
            _ => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::F1 => "f1",
            Self::F2 => "f2",
            Self::F3 => "f3",
            Self::F4 => "f4",
            Self::F5 => "f5",
        }
    }

    /// Default training-set size.
    pub fn default_samples(self) -> usize {
        if self.arity() == 1 {
            50
        } else {
            200
        }
    }
}

impl std::str::FromStr for TargetFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown target {s:?}")))
    }
}

/// `x²`, `eˣ/e`, `sin²(πx)`, `1/(1+e^{−10x})`, `1/(1+e^{10(x₁²−x₂²)})`.
pub fn eval_target(target: TargetFunction, x: &[f64]) -> Result<f64> {
    if x.len() != target.arity() {
        return Err(Error::DimensionMismatch {
            expected: target.arity(),
            found: x.len(),
        });
    }
    Ok(match target {
        TargetFunction::F1 => x[0] * x[0],
        TargetFunction::F2 => (x[0] - 1.0).exp(),
        TargetFunction::F3 => (std::f64::consts::PI * x[0]).sin().powi(2),
        TargetFunction::F4 => 1.0 / (1.0 + (-10.0 * x[0]).exp()),
        TargetFunction::F5 => 1.0 / (1.0 + (10.0 * (x[0] * x[0] - x[1] * x[1])).exp()),
    })
}

/// Gaussian label noise, `n` draws of `N(0, σ²)`.
pub fn label_noise(sigma: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
    let normal = Normal::new(0.0, sigma)
        .map_err(|_| Error::InvalidArgument(format!("label noise sigma {sigma}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n).map(|_| normal.sample(&mut rng)).collect())
}

/// `m` evenly spaced points on `[−1, 1]` (1-D) or `m` uniform draws on
/// `[−1, 1]²` (2-D), labelled `f(x) + N(0, σ²)` and clamped to `[0, 1]`.
pub fn make_dataset(target: TargetFunction, m: usize, sigma: f64, seed: u64) -> Result<Dataset> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 samples, got {m}")));
    }
    let xs: Vec<Vec<f64>> = if target.arity() == 1 {
        linspace(-1.0, 1.0, m).into_iter().map(|x| vec![x]).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..m)
            .map(|_| (0..target.arity()).map(|_| rng.random_range(-1.0..=1.0)).collect())
            .collect()
    };
    let noise = label_noise(sigma, m, seed.wrapping_add(1))?;
    let points = xs
        .into_iter()
        .zip(noise)
        .map(|(x, e)| {
            let y = (eval_target(target, &x)? + e).clamp(0.0, 1.0);
            Ok((x, y))
        })
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(points)
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n)
            .map(|i| if i == n - 1 { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
            .collect(),
    }
}

/// Dense evaluation grid: 201 points in 1-D, a 41×41 lattice in 2-D.
pub fn prediction_grid(target: TargetFunction) -> Vec<Vec<f64>> {
    if target.arity() == 1 {
        linspace(-1.0, 1.0, 201).into_iter().map(|x| vec![x]).collect()
    } else {
        let axis = linspace(-1.0, 1.0, 41);
        axis.iter()
            .flat_map(|&a| axis.iter().map(move |&b| vec![a, b]))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    pub target: TargetFunction,
    pub k: usize,
    pub d_m: usize,
    pub d_e: usize,
    pub config_id: u8,
    pub noise: NoiseSpec,
    /// Channel swept by the noise study.
    pub sweep_channel: ChannelKind,
    pub train: TrainConfig,
    /// Defaults to 50 for 1-D targets and 200 for 2-D ones.
    pub sample_count: Option<usize>,
    pub label_noise_sigma: f64,
    pub eval_mode: EvalMode,
    /// Encoder depths visited by the depth sweep.
    pub sweep_depths: Vec<usize>,
    /// Strengths of `sweep_channel` visited by the noise sweep, ascending.
    pub sweep_strengths: Vec<f64>,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            target: TargetFunction::F4,
            k: 3,
            d_m: 3,
            d_e: 6,
            config_id: 4,
            noise: NoiseSpec::none(),
            sweep_channel: ChannelKind::Depolarizing,
            train: TrainConfig::default(),
            sample_count: None,
            label_noise_sigma: 0.01,
            eval_mode: EvalMode::Exact,
            sweep_depths: (1..=6).collect(),
            sweep_strengths: default_noise_grid(),
        }
    }
}

impl ExperimentSpec {
    /// Rejects specifications that cannot run, before any compute happens.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.k == 0 {
            return bad("k: must be at least 1".into());
        }
        if self.k > crate::sim::STATE_QUBIT_CAP {
            return bad(format!("k: {} exceeds the statevector cap", self.k));
        }
        let config = CircuitConfig::from_id(self.config_id)
            .map_err(|_| Error::InvalidArgument(format!("config_id: {} is not in 1..=4", self.config_id)))?;
        if self.k < 2 && (config.memory_entanglers || config.encoder_entanglers) {
            return bad("k: entangling rings need at least 2 qubits".into());
        }
        if self.d_e == 0 && self.train.iterations > 0 {
            return bad("d_e: an encoder of depth 0 ignores its input and cannot be trained".into());
        }
        if !(self.train.fd_step > 0.0 && self.train.fd_step.is_finite()) {
            return bad(format!("train.fd_step: {} must be positive", self.train.fd_step));
        }
        if self.train.rounds == 0 {
            return bad("train.rounds: must be at least 1".into());
        }
        if !(self.train.reg_lambda >= 0.0) {
            return bad(format!("train.reg_lambda: {} must be non-negative", self.train.reg_lambda));
        }
        if !(self.label_noise_sigma >= 0.0 && self.label_noise_sigma.is_finite()) {
            return bad(format!("label_noise_sigma: {}", self.label_noise_sigma));
        }
        if self.sample_count.is_some_and(|m| m < 2) {
            return bad("sample_count: must be at least 2".into());
        }
        if let EvalMode::Shots { count: 0, .. } = self.eval_mode {
            return bad("eval_mode.count: must be at least 1".into());
        }
        if self.sweep_depths.is_empty() || self.sweep_depths.contains(&0) {
            return bad("sweep_depths: must be a nonempty list of depths ≥ 1".into());
        }
        if self.sweep_strengths.is_empty()
            || self.sweep_strengths.iter().any(|p| !(0.0..=1.0).contains(p))
            || self.sweep_strengths.windows(2).any(|w| w[1] < w[0])
        {
            return bad("sweep_strengths: must be a nonempty ascending list in [0, 1]".into());
        }
        if !self.noise.is_none() && self.k > crate::sim::DENSITY_QUBIT_CAP {
            return bad(format!("k: {} exceeds the density-matrix cap", self.k));
        }
        Ok(())
    }

    pub fn config(&self) -> Result<CircuitConfig> {
        CircuitConfig::from_id(self.config_id)
    }

    pub fn samples(&self) -> usize {
        self.sample_count.unwrap_or_else(|| self.target.default_samples())
    }

    pub fn dataset_seed(&self) -> u64 {
        self.train.seed.wrapping_add(DATASET_SEED_TAG)
    }

    pub fn dataset(&self) -> Result<Dataset> {
        make_dataset(self.target, self.samples(), self.label_noise_sigma, self.dataset_seed())
    }

    /// Untrained model with zero angles.
    pub fn template(&self) -> Result<VqraModel> {
        VqraModel::new(
            MemoryParams::zeros(self.k, self.d_m)?,
            EncoderParams::zeros(self.k, self.d_e, self.target.arity())?,
            self.config()?,
            self.noise.clone(),
            self.eval_mode,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub x: Vec<f64>,
    pub y_true: f64,
    pub y_pred: f64,
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub dataset: Dataset,
    pub model: VqraModel,
    pub trace: TrainTrace,
    pub train_mse: f64,
    pub grid: Vec<GridPoint>,
}

impl FitResult {
    pub fn max_grid_error(&self) -> f64 {
        self.grid
            .iter()
            .map(|p| (p.y_pred - p.y_true).abs())
            .fold(0.0, f64::max)
    }
}

/// One training run seeded with `spec.train.seed`, followed by dense
/// predictions against the noise-free target.
pub fn run_fit(spec: &ExperimentSpec) -> Result<FitResult> {
    spec.validate()?;
    let data = spec.dataset()?;
    let template = spec.template()?;
    let (model, trace) = if spec.train.iterations == 0 {
        let mut m = template.clone();
        m.set_parameters(&initial_parameters(m.n_parameters(), spec.train.seed))?;
        let l = loss(&m, &data, spec.train.reg_lambda)?.total;
        let trace = TrainTrace {
            initial_loss: l,
            loss_history: vec![],
            final_params: m.parameters(),
            final_loss: l,
            wall_time: 0.0,
            objective_evals: 0,
        };
        (m, trace)
    } else {
        train_model(&template, &data, &spec.train, spec.train.seed)?
    };
    let train_mse = loss(&model, &data, 0.0)?.mse;
    let grid = prediction_grid(spec.target)
        .into_iter()
        .map(|x| {
            Ok(GridPoint {
                y_true: eval_target(spec.target, &x)?,
                y_pred: model.predict(&x)?,
                x,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FitResult {
        dataset: data,
        model,
        trace,
        train_mse,
        grid,
    })
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Population standard deviation (divides by `n`).
pub fn std_dev(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64).sqrt()
}

/// `√((s_a² + s_b²)/2)`.
pub fn pooled_std(a: f64, b: f64) -> f64 {
    ((a * a + b * b) / 2.0).sqrt()
}

/// Least-squares slope of `ys` against `xs`.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let (mx, my) = (mean(xs), mean(ys));
    let num: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepKind {
    Depth,
    Noise,
}

impl SweepKind {
    pub fn axis_name(self) -> &'static str {
        match self {
            SweepKind::Depth => "d_e",
            SweepKind::Noise => "p",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub config: u8,
    pub value: f64,
    pub mean_loss: f64,
    pub std_loss: f64,
    pub final_losses: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub kind: SweepKind,
    pub axis: Vec<f64>,
    pub configs: Vec<u8>,
    pub rounds: usize,
    /// Config-major: all axis values for `configs[0]`, then `configs[1]`, …
    pub cells: Vec<SweepCell>,
}

impl SweepResult {
    pub fn cell(&self, config: u8, axis_index: usize) -> Option<&SweepCell> {
        let c = self.configs.iter().position(|&c| c == config)?;
        self.cells.get(c * self.axis.len() + axis_index)
    }

    pub fn mean_losses(&self, config: u8) -> Vec<f64> {
        (0..self.axis.len())
            .filter_map(|i| self.cell(config, i).map(|c| c.mean_loss))
            .collect()
    }

    pub fn std_losses(&self, config: u8) -> Vec<f64> {
        (0..self.axis.len())
            .filter_map(|i| self.cell(config, i).map(|c| c.std_loss))
            .collect()
    }
}

/// Runs every (config, axis value, round) job and aggregates final training
/// losses per cell. Round `r` is seeded with `base.train.seed + r`; the
/// dataset is shared by every job.
pub fn run_sweep(base: &ExperimentSpec, kind: SweepKind, axis: &[f64], configs: &[u8]) -> Result<SweepResult> {
    base.validate()?;
    if axis.is_empty() || configs.is_empty() {
        return Err(Error::InvalidArgument("empty sweep grid".into()));
    }
    let mut cell_specs = Vec::with_capacity(configs.len() * axis.len());
    for &config in configs {
        CircuitConfig::from_id(config)?;
        for &value in axis {
            let mut spec = base.clone();
            spec.config_id = config;
            match kind {
                SweepKind::Depth => {
                    if value < 1.0 || value.fract() != 0.0 {
                        return Err(Error::InvalidArgument(format!("d_e grid value {value}")));
                    }
                    spec.d_e = value as usize;
                }
                SweepKind::Noise => spec.noise = NoiseSpec::new(base.sweep_channel, value)?,
            }
            spec.validate()?;
            cell_specs.push((config, value, spec));
        }
    }
    if kind == SweepKind::Noise && axis.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("noise strengths must be ascending".into()));
    }
    let data = base.dataset()?;
    let rounds = base.train.rounds;
    let jobs: Vec<(usize, u64)> = (0..cell_specs.len())
        .flat_map(|c| (0..rounds as u64).map(move |r| (c, r)))
        .collect();
    let finals = jobs
        .par_iter()
        .map(|&(c, r)| {
            let spec = &cell_specs[c].2;
            let template = spec.template()?;
            let seed = spec.train.seed.wrapping_add(r);
            let (_, trace) = train_model(&template, &data, &spec.train, seed)?;
            log::debug!("config {} {}={} round {r}: {:.4e}", cell_specs[c].0, kind.axis_name(), cell_specs[c].1, trace.final_loss);
            Ok(trace.final_loss)
        })
        .collect::<Result<Vec<f64>>>()?;
    let cells = cell_specs
        .iter()
        .zip(finals.chunks(rounds))
        .map(|((config, value, _), losses)| SweepCell {
            config: *config,
            value: *value,
            mean_loss: mean(losses),
            std_loss: std_dev(losses),
            final_losses: losses.to_vec(),
        })
        .collect();
    Ok(SweepResult {
        kind,
        axis: axis.to_vec(),
        configs: configs.to_vec(),
        rounds,
        cells,
    })
}

/// All four configurations over the given encoder depths.
pub fn run_depth_sweep(base: &ExperimentSpec, d_e_values: &[usize]) -> Result<SweepResult> {
    let axis: Vec<f64> = d_e_values.iter().map(|&d| d as f64).collect();
    run_sweep(base, SweepKind::Depth, &axis, &[1, 2, 3, 4])
}

/// All four configurations over the given strengths of `base.sweep_channel`.
pub fn run_noise_sweep(base: &ExperimentSpec, strengths: &[f64]) -> Result<SweepResult> {
    run_sweep(base, SweepKind::Noise, strengths, &[1, 2, 3, 4])
}

/// `{0.00, 0.01, …, 0.10}`.
pub fn default_noise_grid() -> Vec<f64> {
    (0..=10).map(|i| i as f64 / 100.0).collect()
}
