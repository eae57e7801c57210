//! Exponential Nystrom convergence: singular values stabilize under node
//! doubling long before the default grid size.

use vdheun::coupling::gamma_s;
use vdheun::hsspec::decompose;
use vdheun::quad::gauss_rule;
use vdheun::{Params, TruncationPolicy};

fn main() -> vdheun::Result<()> {
    let p = Params::new(1.0, 0.7, 1.1)?;
    let t = TruncationPolicy::default();
    let gamma = gamma_s(&p)?;
    let reference = decompose(&p, &t, &gamma, &gauss_rule(&p, 320)?)?;
    println!("N    max relative lambda shift vs N = 320 (n <= 8)");
    for n_nodes in [20, 40, 80, 160] {
        let dec = decompose(&p, &t, &gamma, &gauss_rule(&p, n_nodes)?)?;
        let worst = (0..8)
            .map(|k| (dec.lambdas[k] - reference.lambdas[k]).abs() / reference.lambdas[k])
            .fold(0.0f64, f64::max);
        println!("{n_nodes:<4} {worst:.3e}");
    }
    Ok(())
}
