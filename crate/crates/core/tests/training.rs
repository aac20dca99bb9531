//! Training-loop behaviour on real models.

use vqra::experiments::{mean, run_depth_sweep, run_fit, run_noise_sweep, std_dev, ExperimentSpec, TargetFunction};
use vqra::optimize::{train, train_model, train_rounds, Objective, TrainConfig};
use vqra::Result;

fn quick_spec(target: TargetFunction, iterations: usize) -> ExperimentSpec {
    ExperimentSpec {
        target,
        d_e: 2,
        sample_count: Some(12),
        train: TrainConfig {
            iterations,
            rounds: 3,
            ..TrainConfig::default()
        },
        ..ExperimentSpec::default()
    }
}

struct Flat(usize);

impl Objective for Flat {
    fn dim(&self) -> usize {
        self.0
    }
    fn value(&self, _: &[f64]) -> Result<f64> {
        Ok(0.75)
    }
}

#[test]
fn constant_objective_leaves_loss_constant() {
    let cfg = TrainConfig {
        iterations: 25,
        ..TrainConfig::default()
    };
    let t = train(&Flat(4), vec![0.1, 0.2, 0.3, 0.4], &cfg).unwrap();
    assert_eq!(t.initial_loss, 0.75);
    assert!(t.loss_history.iter().all(|&l| l == 0.75));
    assert_eq!(t.final_params, vec![0.1, 0.2, 0.3, 0.4]);
    assert_eq!(t.objective_evals, 25 * 9);
}

#[test]
fn identical_seeds_give_identical_histories() {
    let spec = quick_spec(TargetFunction::F2, 30);
    let data = spec.dataset().unwrap();
    let model = spec.template().unwrap();
    let (_, a) = train_model(&model, &data, &spec.train, 11).unwrap();
    let (_, b) = train_model(&model, &data, &spec.train, 11).unwrap();
    let (_, c) = train_model(&model, &data, &spec.train, 12).unwrap();
    assert_eq!(a.loss_history, b.loss_history);
    assert_eq!(a.final_params, b.final_params);
    assert_ne!(a.loss_history, c.loss_history);
    assert_eq!(a.loss_history.len(), 30);
    assert_eq!(a.objective_evals, 30 * (2 * model.n_parameters() as u64 + 1));
}

#[test]
fn rounds_are_seeded_consecutively_and_in_order() {
    let spec = quick_spec(TargetFunction::F1, 10);
    let data = spec.dataset().unwrap();
    let model = spec.template().unwrap();
    let rounds = train_rounds(&model, &data, &spec.train).unwrap();
    assert_eq!(rounds.len(), 3);
    for (r, (_, trace)) in rounds.iter().enumerate() {
        let (_, direct) = train_model(&model, &data, &spec.train, r as u64).unwrap();
        assert_eq!(trace.loss_history, direct.loss_history);
    }
}

#[test]
fn single_round_sweep_has_zero_spread() {
    let mut spec = quick_spec(TargetFunction::F4, 5);
    spec.train.rounds = 1;
    let sweep = run_depth_sweep(&spec, &[1, 2]).unwrap();
    assert_eq!(sweep.cells.len(), 8);
    assert!(sweep.cells.iter().all(|c| c.std_loss == 0.0 && c.final_losses.len() == 1));
}

#[test]
fn zero_noise_column_matches_the_depth_sweep() {
    let spec = quick_spec(TargetFunction::F3, 8);
    let by_depth = run_depth_sweep(&spec, &[spec.d_e]).unwrap();
    let by_noise = run_noise_sweep(&spec, &[0.0]).unwrap();
    for config in 1..=4u8 {
        let a = &by_depth.cell(config, 0).unwrap().final_losses;
        let b = &by_noise.cell(config, 0).unwrap().final_losses;
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() < 1e-12, "config {config}: {x} vs {y}");
        }
    }
}

#[test]
fn training_reduces_loss_on_every_target() {
    for target in TargetFunction::ALL {
        let mut spec = quick_spec(target, 60);
        if target.arity() == 2 {
            spec.sample_count = Some(16);
        }
        let fit = run_fit(&spec).unwrap();
        assert!(
            fit.trace.final_loss < fit.trace.initial_loss,
            "{}: {} -> {}",
            target.name(),
            fit.trace.initial_loss,
            fit.trace.final_loss
        );
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[test]
fn late_losses_sit_below_early_losses_with_bounded_spread() {
    let spec = ExperimentSpec::default();
    let data = spec.dataset().unwrap();
    let model = spec.template().unwrap();
    let rounds = train_rounds(&model, &data, &spec.train).unwrap();
    let descended = rounds
        .iter()
        .filter(|(_, t)| {
            let h = &t.loss_history;
            median(h[h.len() - 100..].to_vec()) < median(h[..100].to_vec())
        })
        .count();
    assert!(descended >= 9, "{descended} of {} rounds descended", rounds.len());
    let finals: Vec<f64> = rounds.iter().map(|(_, t)| t.final_loss).collect();
    let spread = std_dev(&finals) / mean(&finals);
    assert!(spread < 1.0, "relative spread {spread}");
}

#[test]
fn parabola_fit_tracks_target_on_dense_grid() {
    let spec = ExperimentSpec {
        target: TargetFunction::F1,
        ..ExperimentSpec::default()
    };
    let fit = run_fit(&spec).unwrap();
    assert_eq!(fit.grid.len(), 201);
    let err = fit.max_grid_error();
    assert!(err <= 0.1, "max grid error {err}");
}
