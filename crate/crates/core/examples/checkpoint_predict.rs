//! Saves a trained model as a JSON checkpoint, reloads it and predicts,
//! including with a finite-shot swap-test estimator.
//!
//! `cargo run --release --example checkpoint_predict`

use vqra::experiments::{run_fit, ExperimentSpec, TargetFunction};
use vqra::model::{Checkpoint, EvalMode};

fn main() -> vqra::Result<()> {
    let spec = ExperimentSpec {
        target: TargetFunction::F3,
        ..ExperimentSpec::default()
    };
    let fit = run_fit(&spec)?;

    let checkpoint = Checkpoint {
        circuit: fit.model.spec(),
        noise: fit.model.noise().clone(),
        eval_mode: fit.model.eval_mode(),
        loss_history: fit.trace.loss_history.clone(),
        training: None,
    };
    let json = serde_json::to_string_pretty(&checkpoint)?;
    std::fs::create_dir_all("out")?;
    std::fs::write("out/checkpoint-f3.json", &json)?;

    let restored: Checkpoint = serde_json::from_str(&std::fs::read_to_string("out/checkpoint-f3.json")?)?;
    let exact = restored.model()?;
    let shots = exact.clone().with_eval_mode(EvalMode::Shots { count: 4096, seed: 1 })?;
    println!("   x     target   exact    4096 shots");
    for x in [-0.9, -0.5, 0.0, 0.25, 0.5, 0.9] {
        println!(
            "{x:>5}   {:.4}   {:.4}   {:.4}",
            vqra::experiments::eval_target(spec.target, &[x])?,
            exact.predict(&[x])?,
            shots.predict(&[x])?
        );
    }
    println!("checkpoint written to out/checkpoint-f3.json ({} bytes)", json.len());
    Ok(())
}
