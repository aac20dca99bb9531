//! Single-qubit Kraus channels acting qubit-locally on a 3-qubit state:
//! completeness, trace, purity and the surviving fidelity as the strength grows.
//!
//! `cargo run --release --example noise_channels`

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vqra::noise::{apply_local_noise, ChannelKind, NoiseSpec};
use vqra::sim::{fidelity_pure_mixed, to_density, StateVector};

fn main() -> vqra::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let psi = StateVector::random(3, &mut rng)?;
    let rho = to_density(&psi)?;
    for kind in [ChannelKind::Depolarizing, ChannelKind::AmplitudeDamping, ChannelKind::PhaseDamping] {
        println!("{kind:?}");
        println!("  strength  completeness  trace     purity    fidelity");
        for s in [0.0, 0.05, 0.1, 0.25, 0.5, 1.0] {
            let spec = NoiseSpec::new(kind, s)?;
            let out = apply_local_noise(&rho, &spec)?;
            println!(
                "  {s:<8}  {:.1e}       {:.6}  {:.6}  {:.6}",
                spec.channel().completeness_error(),
                out.trace().re,
                out.purity(),
                fidelity_pure_mixed(&psi, &out)?
            );
        }
    }
    Ok(())
}
