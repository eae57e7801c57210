//! The trace-class operators of couplings related by even sign flips
//! commute, even though their singular spectra differ.

use vdheun::coupling::Coupling;
use vdheun::quad::gauss_rule;
use vdheun::symlab::{cluster_lambda_spread, commutator_test};
use vdheun::{Params, TruncationPolicy};

fn main() -> vdheun::Result<()> {
    let p = Params::new(1.0, 0.7, 1.1)?;
    let t = TruncationPolicy::default();
    let gamma = Coupling::real(&p, [-0.41, -0.07, -0.16, -0.11, 0.12, -0.22, 0.19, -0.08])?;
    let rule = gauss_rule(&p, 160)?;
    let rep = commutator_test(&p, &t, &gamma, &rule, 8)?;
    println!("cluster members used: {}", rep.members.len());
    for (i, j, c) in &rep.pairs {
        println!("  ||[T_{i}, T_{j}]||_F / (||T_{i}|| ||T_{j}||) = {c:.3e}");
    }
    let spread = cluster_lambda_spread(&p, &t, &rep.members[..3], &rule, 5)?;
    println!("max commutator: {:.3e}", rep.max_norm);
    println!("lambda-spectrum spread across members (informational): {spread:.3e}");
    Ok(())
}
