//! Fast invariant suite behind `vqra selftest`.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuits::{encode_state, memory_state, CircuitConfig, EncoderParams, MemoryParams, product_state_check};
use crate::evaluator::ModelObjective;
use crate::experiments::make_dataset;
use crate::experiments::TargetFunction;
use crate::model::{fit_beta_least_squares, kernel_matrix, representer_residual, EvalMode, VqraModel};
use crate::noise::{apply_local_noise, ChannelKind, NoiseSpec};
use crate::optimize::{adam_step, numerical_gradient, train, AdamConfig, AdamState, Objective, TrainConfig};
use crate::sim::swap_test::{ancilla_mixer, swap_test_circuit_with_mixer};
use crate::sim::{
    apply_gate, fidelity_pure_mixed, gate_matrix_oracle, max_abs, overlap, swap_test_p0, swap_test_shots,
    to_density, DensityMatrix, GateOp, StateVector,
};

/// Deliberate defects used to confirm that the suite catches them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Builds the swap-test ancilla gates with doubled rotation angles, as if
    /// the single-qubit rotations had no half angle.
    GateConvention,
}

impl std::str::FromStr for Fault {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "gate-convention" => Ok(Fault::GateConvention),
            other => Err(format!("unknown fault {other:?}")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct SelftestReport {
    pub checks: Vec<CheckOutcome>,
}

impl SelftestReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| !c.passed)
    }

    pub fn table(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            s.push_str(&format!(
                "{:<4} {:<38} {:>7.3}s  {}\n",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.seconds,
                c.detail
            ));
        }
        let passed = self.checks.iter().filter(|c| c.passed).count();
        s.push_str(&format!("{} checks run, {} passed, {} failed\n", self.checks.len(), passed, self.checks.len() - passed));
        s
    }
}

type Check = std::result::Result<String, String>;

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn random_gate(kind: usize, k: usize, rng: &mut ChaCha8Rng) -> GateOp {
    let angle = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
    let q = rng.random_range(0..k);
    let other = if k > 1 { (q + rng.random_range(1..k)) % k } else { q };
    match kind {
        0 => GateOp::Rx { qubit: q, angle },
        1 => GateOp::Ry { qubit: q, angle },
        2 => GateOp::Cnot { control: q, target: other },
        _ => GateOp::Xx { a: q, b: other, angle },
    }
}

fn oracle_check(kind: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(100 + kind as u64);
    let mut worst = 0.0f64;
    for case in 0..200 {
        let k = if kind >= 2 { 2 + case % 3 } else { 1 + case % 4 };
        let g = random_gate(kind, k, &mut rng);
        let s = StateVector::random(k, &mut rng).map_err(|e| e.to_string())?;
        let fast = apply_gate(&s, &g).map_err(|e| e.to_string())?;
        let u = gate_matrix_oracle(&g, k).map_err(|e| e.to_string())?;
        let dense = u * DVector::from_column_slice(s.amplitudes());
        for (a, b) in fast.amplitudes().iter().zip(dense.iter()) {
            worst = worst.max((a - b).norm());
        }
    }
    ensure(worst < 1e-10, format!("max |diff| {worst:.2e} over 200 cases"))
}

fn swap_law_check(k: usize, fault: Option<Fault>) -> Check {
    let scale = if fault == Some(Fault::GateConvention) { 2.0 } else { 1.0 };
    let mixer = ancilla_mixer(scale);
    let mut rng = ChaCha8Rng::seed_from_u64(200 + k as u64);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let a = StateVector::random(k, &mut rng).map_err(|e| e.to_string())?;
        let b = StateVector::random(k, &mut rng).map_err(|e| e.to_string())?;
        let lit = swap_test_circuit_with_mixer(&a, &b, &mixer).map_err(|e| e.to_string())?;
        let closed = swap_test_p0(&a, &b).map_err(|e| e.to_string())?;
        worst = worst.max((lit - closed).abs());
    }
    ensure(worst < 1e-10, format!("k={k}: max |diff| {worst:.2e} over 100 pairs"))
}

fn channel_check(kind: ChannelKind) -> Check {
    let mut worst_complete = 0.0f64;
    for i in 0..20 {
        let ch = kind.build(i as f64 / 19.0).map_err(|e| e.to_string())?;
        worst_complete = worst_complete.max(ch.completeness_error());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(300);
    let (mut herm, mut tr, mut min_eig) = (0.0f64, 0.0f64, f64::INFINITY);
    for _ in 0..100 {
        let rho = DensityMatrix::random(2, 3, &mut rng).map_err(|e| e.to_string())?;
        let spec = NoiseSpec::new(kind, rng.random::<f64>()).map_err(|e| e.to_string())?;
        let out = apply_local_noise(&rho, &spec).map_err(|e| e.to_string())?;
        herm = herm.max(out.hermiticity_error());
        tr = tr.max((out.trace() - Complex64::new(1.0, 0.0)).norm());
        min_eig = min_eig.min(out.min_eigenvalue());
    }
    ensure(
        worst_complete < 1e-12 && herm < 1e-10 && tr < 1e-10 && min_eig > -1e-9,
        format!("completeness {worst_complete:.1e}, hermiticity {herm:.1e}, trace {tr:.1e}, min eig {min_eig:.1e}"),
    )
}

fn random_model(seed: u64, config: CircuitConfig, noise: NoiseSpec) -> crate::Result<VqraModel> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    VqraModel::new(
        MemoryParams::random(3, 3, &mut rng)?,
        EncoderParams::random(3, 2, 1, &mut rng)?,
        config,
        noise,
        EvalMode::Exact,
    )
}

fn small_objective(seed: u64) -> crate::Result<ModelObjective> {
    let model = random_model(seed, CircuitConfig::default(), NoiseSpec::none())?;
    let data = make_dataset(TargetFunction::F4, 12, 0.01, seed)?;
    ModelObjective::new(model, data, 0.0)
}

fn run_check(name: &'static str, f: impl FnOnce() -> Check) -> CheckOutcome {
    let start = Instant::now();
    let (passed, detail) = match f() {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    CheckOutcome {
        name,
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

macro_rules! tryc {
    ($e:expr) => {
        $e.map_err(|e| e.to_string())?
    };
}

pub fn run_selftest(fault: Option<Fault>) -> SelftestReport {
    let mut checks = Vec::new();
    let mut add = |name, f: &dyn Fn() -> Check| checks.push(run_check(name, f));

    add("gate oracle: rx", &|| oracle_check(0));
    add("gate oracle: ry", &|| oracle_check(1));
    add("gate oracle: cnot", &|| oracle_check(2));
    add("gate oracle: xx", &|| oracle_check(3));
    add("norm preservation", &|| {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut worst = 0.0f64;
        for _ in 0..20 {
            let mut s = tryc!(StateVector::random(4, &mut rng));
            for _ in 0..100 {
                let kind = rng.random_range(0..4);
                tryc!(s.apply(&random_gate(kind, 4, &mut rng)));
            }
            worst = worst.max((s.norm() - 1.0).abs());
        }
        ensure(worst < 1e-9, format!("max |norm − 1| {worst:.1e}"))
    });
    add("overlap symmetry", &|| {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut worst = 0.0f64;
        for _ in 0..50 {
            let a = tryc!(StateVector::random(3, &mut rng));
            let b = tryc!(StateVector::random(3, &mut rng));
            worst = worst.max((tryc!(overlap(&a, &b)) - tryc!(overlap(&b, &a)).conj()).norm());
        }
        ensure(worst < 1e-12, format!("max error {worst:.1e}"))
    });
    add("swap-test law", &|| {
        let details = [1, 2, 3]
            .into_iter()
            .map(|k| swap_law_check(k, fault))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(details.join("; "))
    });
    add("pure-state fidelity consistency", &|| {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut worst = 0.0f64;
        for _ in 0..50 {
            let a = tryc!(StateVector::random(3, &mut rng));
            let b = tryc!(StateVector::random(3, &mut rng));
            let f = tryc!(fidelity_pure_mixed(&a, &tryc!(to_density(&b))));
            worst = worst.max((f - tryc!(overlap(&a, &b)).norm_sqr()).abs());
        }
        ensure(worst < 1e-10, format!("max error {worst:.1e}"))
    });
    add("shot estimator concentration", &|| {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let shots = 100_000u64;
        for case in 0..20 {
            let a = tryc!(StateVector::random(2, &mut rng));
            let b = tryc!(StateVector::random(2, &mut rng));
            let p = tryc!(swap_test_p0(&a, &b));
            let est = tryc!(swap_test_shots(&a, &tryc!(to_density(&b)), shots, case));
            let bound = 5.0 * (p * (1.0 - p) / shots as f64).sqrt();
            if (est - p).abs() > bound {
                return Err(format!("case {case}: |{est} − {p}| > {bound:.2e}"));
            }
        }
        Ok("20 cases within 5σ".into())
    });
    add("depolarizing closed form", &|| {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut worst = 0.0f64;
        for i in 0..=20 {
            let p = i as f64 / 20.0;
            let ch = tryc!(crate::noise::depolarizing(p));
            for _ in 0..10 {
                let rho = tryc!(DensityMatrix::random(1, 2, &mut rng));
                let mut out = rho.clone();
                tryc!(ch.apply_to_qubit(&mut out, 0));
                let direct = DMatrix::<Complex64>::identity(2, 2) * Complex64::new(p / 2.0, 0.0)
                    + rho.matrix() * Complex64::new(1.0 - p, 0.0);
                worst = worst.max(max_abs(&(out.matrix() - direct)));
            }
        }
        ensure(worst < 1e-12, format!("max error {worst:.1e}"))
    });
    add("cptp: depolarizing", &|| channel_check(ChannelKind::Depolarizing));
    add("cptp: amplitude damping", &|| channel_check(ChannelKind::AmplitudeDamping));
    add("cptp: phase damping", &|| channel_check(ChannelKind::PhaseDamping));
    add("maximal depolarizing fixed point", &|| {
        let m = tryc!(random_model(6, CircuitConfig::default(), tryc!(NoiseSpec::new(ChannelKind::Depolarizing, 1.0))));
        let target = (1.0f64 / 8.0).sqrt();
        let worst = [-1.0, -0.3, 0.2, 0.9]
            .iter()
            .map(|&x| m.predict(&[x]).map(|f| (f - target).abs()))
            .collect::<crate::Result<Vec<_>>>()
            .map_err(|e| e.to_string())?
            .into_iter()
            .fold(0.0, f64::max);
        ensure(worst < 1e-9, format!("max |f − 2^(−3/2)| {worst:.1e}"))
    });
    add("fidelity decreases with noise", &|| {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let psi = tryc!(StateVector::random(3, &mut rng));
        let rho = tryc!(to_density(&psi));
        let mut prev = f64::INFINITY;
        for i in 0..=10 {
            let spec = tryc!(NoiseSpec::new(ChannelKind::Depolarizing, i as f64 / 10.0));
            let f = tryc!(fidelity_pure_mixed(&psi, &tryc!(apply_local_noise(&rho, &spec))));
            if f >= prev {
                return Err(format!("not decreasing at p = {}", i as f64 / 10.0));
            }
            prev = f;
        }
        ensure((prev - 0.125).abs() < 1e-9, format!("ends at {prev:.6}"))
    });
    add("noise-free path consistency", &|| {
        let pure = tryc!(random_model(8, CircuitConfig::default(), NoiseSpec::none()));
        let dm = tryc!(random_model(8, CircuitConfig::default(), tryc!(NoiseSpec::new(ChannelKind::Depolarizing, 0.0))));
        let mut worst = 0.0f64;
        for x in [-0.8, -0.1, 0.4, 1.0] {
            worst = worst.max((tryc!(pure.predict(&[x])) - tryc!(dm.predict(&[x]))).abs());
        }
        ensure(worst < 1e-9, format!("max difference {worst:.1e}"))
    });
    add("configuration 1 product states", &|| {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let c1 = tryc!(CircuitConfig::from_id(1));
        let mem = tryc!(MemoryParams::random(3, 3, &mut rng));
        let enc = tryc!(EncoderParams::random(3, 4, 1, &mut rng));
        let mut worst = (1.0 - product_state_check(&tryc!(memory_state(&mem, c1)))).abs();
        for x in [-0.7, 0.3] {
            worst = worst.max((1.0 - product_state_check(&tryc!(encode_state(&enc, &[x], c1)))).abs());
        }
        ensure(worst < 1e-9, format!("max |purity − 1| {worst:.1e}"))
    });
    add("kernel gram matrix", &|| {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let enc = tryc!(EncoderParams::random(3, 2, 1, &mut rng));
        let xs: Vec<Vec<f64>> = (0..15).map(|i| vec![-1.0 + i as f64 / 7.0]).collect();
        let k = tryc!(kernel_matrix(&enc, CircuitConfig::default(), &xs));
        let diag = (0..15).map(|i| (k[(i, i)] - Complex64::new(1.0, 0.0)).norm()).fold(0.0, f64::max);
        let herm = max_abs(&(&k - k.adjoint()));
        let sym = (&k + k.adjoint()) * Complex64::new(0.5, 0.0);
        let min_eig = sym.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
        ensure(
            diag < 1e-10 && herm < 1e-12 && min_eig > -1e-9,
            format!("diag {diag:.1e}, hermiticity {herm:.1e}, min eig {min_eig:.1e}"),
        )
    });
    add("gradient oracle", &|| {
        let obj = tryc!(small_objective(11));
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut worst = 0.0f64;
        for _ in 0..3 {
            let p: Vec<f64> = (0..obj.dim()).map(|_| rng.random_range(-3.0..3.0)).collect();
            let g1 = tryc!(numerical_gradient(|q| obj.value(q), &p, 1e-3));
            let g2 = tryc!(numerical_gradient(|q| obj.value(q), &p, 5e-4));
            let g = tryc!(numerical_gradient(|q| obj.value(q), &p, 1e-4));
            let scale = g.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1e-12);
            for i in 0..g.len() {
                let rich = (4.0 * g2[i] - g1[i]) / 3.0;
                worst = worst.max((g[i] - rich).abs() / scale);
            }
        }
        ensure(worst <= 1e-3, format!("max relative error {worst:.1e}"))
    });
    add("structured gradient matches generic", &|| {
        let obj = tryc!(small_objective(12));
        let p: Vec<f64> = (0..obj.dim()).map(|i| (i as f64 * 0.37).sin() * 2.0).collect();
        let a = tryc!(obj.structured_gradient(&p, 1e-4));
        let b = tryc!(numerical_gradient(|q| obj.value(q), &p, 1e-4));
        let worst = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        ensure(worst < 1e-8, format!("max difference {worst:.1e}"))
    });
    add("adam first step", &|| {
        let mut p = vec![0.5];
        let mut s = AdamState::new(1);
        tryc!(adam_step(&mut p, &[1.0], &mut s, &AdamConfig::default()));
        let delta = p[0] - 0.5;
        ensure((delta + 0.01).abs() < 1e-6, format!("delta {delta:.8}"))
    });
    add("training determinism", &|| {
        let obj = tryc!(small_objective(13));
        let cfg = TrainConfig {
            iterations: 30,
            ..TrainConfig::default()
        };
        let init: Vec<f64> = crate::optimize::initial_parameters(obj.dim(), 13);
        let a = tryc!(train(&obj, init.clone(), &cfg));
        let b = tryc!(train(&obj, init, &cfg));
        let same = a.loss_history.iter().zip(&b.loss_history).all(|(x, y)| x.to_bits() == y.to_bits());
        ensure(
            same && a.final_loss < a.initial_loss,
            format!("loss {:.4} → {:.4}", a.initial_loss, a.final_loss),
        )
    });
    add("representer least squares", &|| {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let enc = tryc!(EncoderParams::random(3, 2, 1, &mut rng));
        let c = CircuitConfig::default();
        let data = tryc!(make_dataset(TargetFunction::F4, 20, 0.0, 14));
        let beta = tryc!(fit_beta_least_squares(&enc, c, &data, 1e-10));
        let uniform = vec![1.0 / data.len() as f64; data.len()];
        let r_fit = tryc!(representer_residual(&enc, c, &data, &beta));
        let r_uni = tryc!(representer_residual(&enc, c, &data, &uniform));
        ensure(r_fit <= r_uni, format!("residual {r_fit:.3e} vs uniform {r_uni:.3e}"))
    });

    SelftestReport { checks }
}
