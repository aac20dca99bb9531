//! Final training loss against depolarizing strength, with the low-noise
//! least-squares slope per configuration.
//!
//! `cargo run --release --example noise_sweep -- [rounds] [iterations]`

use vqra::experiments::{ls_slope, run_noise_sweep, ExperimentSpec};
use vqra::report::{figure_csv, write_atomic};

fn main() -> vqra::Result<()> {
    let mut args = std::env::args().skip(1);
    let mut spec = ExperimentSpec {
        d_e: 3,
        ..ExperimentSpec::default()
    };
    spec.train.rounds = args.next().map_or(2, |s| s.parse().expect("rounds"));
    spec.train.iterations = args.next().map_or(300, |s| s.parse().expect("iterations"));

    let grid = [0.0, 0.01, 0.02, 0.03, 0.1];
    let sweep = run_noise_sweep(&spec, &grid)?;
    println!("config  {:>10}  {:>10}  slope on [0, 0.03]", "p = 0", "p = 0.1");
    for c in 1..=4u8 {
        let m = sweep.mean_losses(c);
        let slope = ls_slope(&grid[..4], &m[..4]);
        println!("{c}       {:.4e}  {:.4e}  {slope:.4e}", m[0], m[4]);
    }
    write_atomic("out/noise/fig6.csv".as_ref(), &figure_csv(&sweep)?)?;
    println!("wrote out/noise/fig6.csv");
    Ok(())
}
