//! The kernel function intertwines the difference operator at a coupling
//! with the one at the dual coupling: check the residual at random points.

use vdheun::adoeigen::check_kernel_identity;
use vdheun::coupling::Regime;
use vdheun::report::{sample_kernel_pairs, sample_pi_r_coupling, seeded_rng};
use vdheun::{Params, TruncationPolicy};

fn main() -> vdheun::Result<()> {
    let p = Params::new(1.0, 0.7, 1.1)?;
    let t = TruncationPolicy::default();
    let mut rng = seeded_rng(11);
    for regime in [Regime::Real, Regime::Mixed] {
        let gamma = sample_pi_r_coupling(&p, &mut rng, regime)?;
        let pairs = sample_kernel_pairs(&p, &mut rng, 50);
        let worst = check_kernel_identity(&p, &t, &gamma, &pairs)?;
        println!(
            "{regime:?} regime, sigma = {:.4}: max kernel-identity residual {worst:.3e}",
            gamma.sigma()
        );
    }
    Ok(())
}
