//! Trains the regression model on one target function and writes the loss
//! trace, dense predictions and a gnuplot script.
//!
//! `cargo run --release --example fit_function -- f3 [iterations] [out_dir]`

use vqra::experiments::{run_fit, ExperimentSpec, TargetFunction};
use vqra::report::{fit_plot_script, predictions_csv, trace_csv, OutputDir};

fn main() -> vqra::Result<()> {
    let mut args = std::env::args().skip(1);
    let target: TargetFunction = args.next().as_deref().unwrap_or("f4").parse()?;
    let mut spec = ExperimentSpec {
        target,
        ..ExperimentSpec::default()
    };
    if let Some(it) = args.next() {
        spec.train.iterations = it.parse().expect("iterations must be an integer");
    }
    let dir = args.next().unwrap_or_else(|| format!("out/fit-{}", target.name()));

    let fit = run_fit(&spec)?;
    let mut out = OutputDir::new(&dir)?;
    out.write("trace.csv", &trace_csv(&fit.trace)?)?;
    out.write("predictions.csv", &predictions_csv(&fit)?)?;
    out.write("plot.gp", fit_plot_script("predictions.csv", target.arity()).as_bytes())?;

    println!(
        "{}: loss {:.4e} -> {:.4e} in {} iterations ({:.1}s)",
        target.name(),
        fit.trace.initial_loss,
        fit.trace.final_loss,
        fit.trace.loss_history.len(),
        fit.trace.wall_time
    );
    println!("training MSE {:.4e}, max error on the dense grid {:.4}", fit.train_mse, fit.max_grid_error());
    println!("wrote {dir}/trace.csv, predictions.csv, plot.gp");
    Ok(())
}
