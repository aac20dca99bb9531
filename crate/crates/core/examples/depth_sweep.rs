//! Final training loss against encoder depth for the four entangler
//! configurations, averaged over independent rounds.
//!
//! `cargo run --release --example depth_sweep -- [rounds] [iterations]`

use vqra::experiments::{run_depth_sweep, ExperimentSpec};
use vqra::report::{figure_csv, sweep_plot_script, write_atomic};

fn main() -> vqra::Result<()> {
    let mut args = std::env::args().skip(1);
    let mut spec = ExperimentSpec::default();
    spec.train.rounds = args.next().map_or(3, |s| s.parse().expect("rounds"));
    spec.train.iterations = args.next().map_or(500, |s| s.parse().expect("iterations"));

    let depths = [1, 2, 3, 4];
    let sweep = run_depth_sweep(&spec, &depths)?;
    print!("config");
    for d in depths {
        print!("   D_E={d}             ");
    }
    println!();
    for c in 1..=4u8 {
        print!("{c}     ");
        for (m, s) in sweep.mean_losses(c).iter().zip(sweep.std_losses(c)) {
            print!("   {m:.3e} ± {s:.1e}");
        }
        println!();
    }
    write_atomic("out/depth/fig5.csv".as_ref(), &figure_csv(&sweep)?)?;
    write_atomic("out/depth/plot.gp".as_ref(), sweep_plot_script(&sweep, "fig5.csv").as_bytes())?;
    println!("wrote out/depth/fig5.csv and plot.gp");
    Ok(())
}
