//! Loss objective over a model and a dataset, with a structured
//! central-difference gradient for exact evaluation.
//!
//! For an encoder angle, only one gate of each sample's circuit changes. The
//! state just before that gate and the observable pulled back to just after
//! it are cached, so each perturbed prediction costs one gate application and
//! one contraction instead of a full circuit run. The arithmetic is still a
//! central difference of the loss with step `h`; it is not an analytic
//! derivative.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::circuits::{encoder_gates_tagged, memory_state, MemoryParams};
use crate::error::{Error, Result};
use crate::model::{angle_penalty, loss, Dataset, EvalMode, VqraModel};
use crate::noise::apply_adjoint_local_noise;
use crate::optimize::{numerical_gradient, Objective};
use crate::sim::gate::{apply_unchecked, GateOp};
use crate::sim::state::dot;
use crate::sim::{DensityMatrix, StateVector};

/// `|ψ⟩ ↦ f` as a quadratic form: a single bra without noise, or the
/// Heisenberg-picture operator `ε†(|Ψ⟩⟨Ψ|)` with noise.
#[derive(Clone)]
enum Observable {
    Pure(Vec<Complex64>),
    Mixed(DMatrix<Complex64>),
}

impl Observable {
    fn for_memory(model: &VqraModel, psi: &StateVector) -> Result<Self> {
        if model.noise().is_none() {
            return Ok(Observable::Pure(psi.amplitudes().to_vec()));
        }
        let v = DVector::from_column_slice(psi.amplitudes());
        let proj = &v * v.adjoint();
        Ok(Observable::Mixed(apply_adjoint_local_noise(
            psi.n_qubits(),
            proj,
            model.noise(),
        )?))
    }

    fn fidelity(&self, v: &[Complex64]) -> f64 {
        match self {
            Observable::Pure(b) => dot(b, v).norm().min(1.0),
            Observable::Mixed(o) => {
                let dim = v.len();
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..dim {
                    let mut col = Complex64::new(0.0, 0.0);
                    for i in 0..dim {
                        col += v[i].conj() * o[(i, j)];
                    }
                    acc += col * v[j];
                }
                acc.re.max(0.0).sqrt().min(1.0)
            }
        }
    }

    /// The observable seen just before `gate`: `G† O G`.
    fn pull_back(&self, n_qubits: usize, gate: &GateOp) -> Result<Self> {
        let inv = gate.adjoint();
        Ok(match self {
            Observable::Pure(b) => {
                let mut b = b.clone();
                apply_unchecked(&mut b, n_qubits, &inv);
                Observable::Pure(b)
            }
            Observable::Mixed(o) => {
                let wrapped = DensityMatrix::from_matrix(n_qubits, o.clone())?;
                Observable::Mixed(wrapped.sandwich(|col| apply_unchecked(col, n_qubits, &inv)))
            }
        })
    }
}

/// Regularized MSE of a model on a fixed dataset, as a function of the flat
/// parameter vector `θ ‖ ξ`.
pub struct ModelObjective {
    model: VqraModel,
    data: Dataset,
    reg_lambda: f64,
}

impl ModelObjective {
    pub fn new(model: VqraModel, data: Dataset, reg_lambda: f64) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if data.feature_dim() != model.n_features() {
            return Err(Error::DimensionMismatch {
                expected: model.n_features(),
                found: data.feature_dim(),
            });
        }
        if !(reg_lambda >= 0.0) {
            return Err(Error::InvalidArgument(format!("reg_lambda {reg_lambda} < 0")));
        }
        Ok(Self {
            model,
            data,
            reg_lambda,
        })
    }

    pub fn model_at(&self, params: &[f64]) -> Result<VqraModel> {
        let mut m = self.model.clone();
        m.set_parameters(params)?;
        Ok(m)
    }

    /// Central differences computed through cached partial circuits.
    pub fn structured_gradient(&self, params: &[f64], h: f64) -> Result<Vec<f64>> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidArgument(format!("finite-difference step {h}")));
        }
        let model = self.model_at(params)?;
        let k = model.k();
        let n_theta = model.memory().theta().len();
        let m_count = self.data.len() as f64;
        let obs = Observable::for_memory(&model, model.memory_state())?;
        let mut diff = vec![0.0; params.len()];
        let mut finals = Vec::with_capacity(self.data.len());

        for (x, y) in self.data.iter() {
            let gates = encoder_gates_tagged(model.encoder(), x, model.config())?;
            let mut before = Vec::with_capacity(gates.len());
            let mut amps = StateVector::zero(k)?.amplitudes().to_vec();
            for (g, _) in &gates {
                before.push(amps.clone());
                apply_unchecked(&mut amps, k, g);
            }
            let mut after = obs.clone();
            for (g, (gate, tag)) in gates.iter().enumerate().rev() {
                if let Some(idx) = tag {
                    let angle = gate.angle().unwrap_or(0.0);
                    let side = |delta: f64| {
                        let mut v = before[g].clone();
                        apply_unchecked(&mut v, k, &gate.with_angle(angle + delta));
                        after.fidelity(&v) - y
                    };
                    let (rp, rm) = (side(h), side(-h));
                    diff[n_theta + idx] += rp * rp - rm * rm;
                }
                if g > 0 {
                    after = after.pull_back(k, gate)?;
                }
            }
            finals.push(amps);
        }

        let mut theta = model.memory().theta().to_vec();
        for i in 0..n_theta {
            let orig = theta[i];
            let mut side = |delta: f64| -> Result<Vec<f64>> {
                theta[i] = orig + delta;
                let mem = MemoryParams::new(k, model.memory().depth(), theta.clone())?;
                let psi = memory_state(&mem, model.config())?;
                let o = Observable::for_memory(&model, &psi)?;
                Ok(self
                    .data
                    .ys()
                    .iter()
                    .zip(&finals)
                    .map(|(y, v)| o.fidelity(v) - y)
                    .collect())
            };
            let plus = side(h)?;
            let minus = side(-h)?;
            theta[i] = orig;
            diff[i] = plus.iter().zip(&minus).map(|(a, b)| a * a - b * b).sum();
        }

        let n = params.len() as f64;
        let mut grad = Vec::with_capacity(params.len());
        for (i, d) in diff.into_iter().enumerate() {
            let p = params[i];
            let pen = self.reg_lambda * ((p + h) * (p + h) - (p - h) * (p - h)) / n;
            let g = (d / m_count + pen) / (2.0 * h);
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
}

impl Objective for ModelObjective {
    fn dim(&self) -> usize {
        self.model.n_parameters()
    }

    fn value(&self, params: &[f64]) -> Result<f64> {
        let model = self.model_at(params)?;
        if model.eval_mode() == EvalMode::Exact {
            let obs = Observable::for_memory(&model, model.memory_state())?;
            let mut sse = 0.0;
            for (x, y) in self.data.iter() {
                let psi = model.encode(x)?;
                let r = obs.fidelity(psi.amplitudes()) - y;
                sse += r * r;
            }
            Ok(sse / self.data.len() as f64 + angle_penalty(params, self.reg_lambda))
        } else {
            Ok(loss(&model, &self.data, self.reg_lambda)?.total)
        }
    }

    fn central_gradient(&self, params: &[f64], h: f64) -> Result<Vec<f64>> {
        match self.model.eval_mode() {
            EvalMode::Exact => self.structured_gradient(params, h),
            EvalMode::Shots { .. } => numerical_gradient(|p| self.value(p), params, h),
        }
    }
}
