//! Swap-test fidelity estimation: the literal (2k+1)-qubit circuit, the
//! closed form, and the shot-sampled estimate side by side.
//!
//! `cargo run --release --example swap_test`

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vqra::noise::{ChannelKind, NoiseSpec};
use vqra::sim::{swap_test_circuit_exact, swap_test_p0, swap_test_shots, to_density, StateVector};

fn main() -> vqra::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    println!("k  |<a|b>|^2   p0 circuit  p0 closed   p0 (10^4 shots)");
    for k in 1..=3 {
        let a = StateVector::random(k, &mut rng)?;
        let b = StateVector::random(k, &mut rng)?;
        let f = a.inner(&b)?.norm_sqr();
        let rho = to_density(&b)?;
        println!(
            "{k}  {f:.6}    {:.6}    {:.6}    {:.4}",
            swap_test_circuit_exact(&a, &b)?,
            swap_test_p0(&a, &b)?,
            swap_test_shots(&a, &rho, 10_000, 7)?,
        );
    }

    let a = StateVector::random(3, &mut rng)?;
    let noisy = vqra::noise::apply_local_noise(&to_density(&a)?, &NoiseSpec::new(ChannelKind::Depolarizing, 0.2)?)?;
    println!(
        "\nself-overlap of a 3-qubit state after depolarizing p = 0.2 on every qubit: p0 = {:.6}",
        swap_test_p0(&a, &noisy)?
    );
    Ok(())
}
