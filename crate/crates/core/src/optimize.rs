//! Adam over central finite-difference gradients, single runs and seeded
//! multi-round training.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluator::ModelObjective;
use crate::model::{Dataset, VqraModel};

/// A scalar function of a flat parameter vector.
pub trait Objective {
    fn dim(&self) -> usize;

    fn value(&self, params: &[f64]) -> Result<f64>;

    /// `(L(p + h e_i) − L(p − h e_i)) / 2h` for every coordinate.
    fn central_gradient(&self, params: &[f64], h: f64) -> Result<Vec<f64>> {
        numerical_gradient(|p| self.value(p), params, h)
    }
}

/// Central-difference gradient using `2·dim` evaluations of `f`.
pub fn numerical_gradient<F>(mut f: F, params: &[f64], h: f64) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("finite-difference step {h}")));
    }
    let mut p = params.to_vec();
    let mut grad = Vec::with_capacity(params.len());
    for i in 0..params.len() {
        let orig = p[i];
        p[i] = orig + h;
        let plus = f(&p)?;
        p[i] = orig - h;
        let minus = f(&p)?;
        p[i] = orig;
        let g = (plus - minus) / (2.0 * h);
        if !g.is_finite() {
            return Err(Error::NonFiniteObjective {
                coordinate: Some(i),
                value: g,
            });
        }
        grad.push(g);
    }
    Ok(grad)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.01,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
}

impl AdamState {
    pub fn new(dim: usize) -> Self {
        Self {
            m: vec![0.0; dim],
            v: vec![0.0; dim],
            t: 0,
        }
    }
}

/// One bias-corrected Adam update of `params` in place.
pub fn adam_step(params: &mut [f64], grad: &[f64], state: &mut AdamState, cfg: &AdamConfig) -> Result<()> {
    if grad.len() != params.len() || state.m.len() != params.len() {
        return Err(Error::DimensionMismatch {
            expected: params.len(),
            found: grad.len(),
        });
    }
    state.t += 1;
    let t = state.t as i32;
    let c1 = 1.0 - cfg.beta1.powi(t);
    let c2 = 1.0 - cfg.beta2.powi(t);
    for i in 0..params.len() {
        state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * grad[i];
        state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
        let m_hat = state.m[i] / c1;
        let v_hat = state.v[i] / c2;
        params[i] -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.eps);
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub iterations: usize,
    pub fd_step: f64,
    pub seed: u64,
    pub rounds: usize,
    /// Progress is logged every `log_every` iterations; 0 disables it.
    pub log_every: usize,
    pub reg_lambda: f64,
    pub adam: AdamConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            iterations: 2000,
            fd_step: 1e-4,
            seed: 0,
            rounds: 10,
            log_every: 0,
            reg_lambda: 0.0,
            adam: AdamConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainTrace {
    pub initial_loss: f64,
    /// Loss after each update.
    pub loss_history: Vec<f64>,
    pub final_params: Vec<f64>,
    pub final_loss: f64,
    pub wall_time: f64,
    pub objective_evals: u64,
}

/// Runs `cfg.iterations` Adam updates from `init`.
pub fn train<O: Objective + ?Sized>(objective: &O, init: Vec<f64>, cfg: &TrainConfig) -> Result<TrainTrace> {
    if init.len() != objective.dim() {
        return Err(Error::DimensionMismatch {
            expected: objective.dim(),
            found: init.len(),
        });
    }
    let start = Instant::now();
    let check = |v: f64| {
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteObjective {
                coordinate: None,
                value: v,
            })
        }
    };
    let mut params = init;
    let mut state = AdamState::new(params.len());
    let initial_loss = check(objective.value(&params)?)?;
    let mut history = Vec::with_capacity(cfg.iterations);
    for it in 0..cfg.iterations {
        let grad = objective.central_gradient(&params, cfg.fd_step)?;
        adam_step(&mut params, &grad, &mut state, &cfg.adam)?;
        let loss = check(objective.value(&params)?)?;
        history.push(loss);
        if cfg.log_every > 0 && (it + 1) % cfg.log_every == 0 {
            log::info!("iteration {:>5}  loss {:.6e}", it + 1, loss);
        }
    }
    let dim = params.len() as u64;
    Ok(TrainTrace {
        initial_loss,
        final_loss: history.last().copied().unwrap_or(initial_loss),
        loss_history: history,
        final_params: params,
        wall_time: start.elapsed().as_secs_f64(),
        objective_evals: cfg.iterations as u64 * (2 * dim + 1),
    })
}

/// Uniform draw on `[−π, π)` for each parameter.
pub fn initial_parameters(dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..dim)
        .map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI))
        .collect()
}

/// Trains a copy of `model` on `data` from a random start drawn with `seed`.
pub fn train_model(model: &VqraModel, data: &Dataset, cfg: &TrainConfig, seed: u64) -> Result<(VqraModel, TrainTrace)> {
    let objective = ModelObjective::new(model.clone(), data.clone(), cfg.reg_lambda)?;
    let init = initial_parameters(model.n_parameters(), seed);
    let trace = train(&objective, init, cfg)?;
    let mut trained = model.clone();
    trained.set_parameters(&trace.final_params)?;
    Ok((trained, trace))
}

/// `cfg.rounds` independent trainings, round `r` seeded with `cfg.seed + r`.
/// Results are in round order regardless of scheduling.
pub fn train_rounds(model: &VqraModel, data: &Dataset, cfg: &TrainConfig) -> Result<Vec<(VqraModel, TrainTrace)>> {
    (0..cfg.rounds as u64)
        .into_par_iter()
        .map(|r| train_model(model, data, cfg, cfg.seed.wrapping_add(r)))
        .collect()
}
