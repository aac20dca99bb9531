//! The kernel view of a trained encoder: Gram matrix of encoded training
//! points and the representer predictor with uniform and least-squares weights.
//!
//! `cargo run --release --example kernel_representer -- [target]`

use vqra::experiments::{run_fit, ExperimentSpec, TargetFunction};
use vqra::model::{fit_beta_least_squares, kernel_matrix, representer_predict};
use vqra::report::{kernel_csv, write_atomic};

fn main() -> vqra::Result<()> {
    let target: TargetFunction = std::env::args().nth(1).as_deref().unwrap_or("f2").parse()?;
    let mut spec = ExperimentSpec {
        target,
        sample_count: Some(20),
        ..ExperimentSpec::default()
    };
    spec.train.iterations = 800;
    let fit = run_fit(&spec)?;
    let (data, enc, cfg) = (&fit.dataset, fit.model.encoder(), fit.model.config());

    let gram = kernel_matrix(enc, cfg, data.xs())?;
    let hermitian = (&gram - gram.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let eig = nalgebra::DMatrix::from_fn(2 * gram.nrows(), 2 * gram.ncols(), |i, j| {
        let z = gram[(i % gram.nrows(), j % gram.ncols())];
        match (i < gram.nrows(), j < gram.ncols()) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
    .symmetric_eigenvalues();
    println!("Gram matrix {}×{}: Hermitian error {hermitian:.1e}, min eigenvalue {:.2e}", gram.nrows(), gram.ncols(), eig.min());
    write_atomic(format!("out/kernel-{}.csv", target.name()).as_ref(), &kernel_csv(&gram)?)?;

    let mse = |beta: &[f64]| -> vqra::Result<f64> {
        let mut acc = 0.0;
        for (x, y) in data.iter() {
            acc += (representer_predict(enc, cfg, data, beta, x)? - y).powi(2);
        }
        Ok(acc / data.len() as f64)
    };
    let uniform = vec![1.0 / data.len() as f64; data.len()];
    let ls = fit_beta_least_squares(enc, cfg, data, 1e-3)?;
    println!("trained circuit MSE        {:.3e}", fit.train_mse);
    println!("representer, uniform beta  {:.3e}", mse(&uniform)?);
    println!("representer, ridge LS beta {:.3e}", mse(&ls)?);
    Ok(())
}
