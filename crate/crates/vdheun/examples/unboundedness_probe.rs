//! Applying the small-shift operator to the trigonometric probe family
//! t_n = (e^{2inrx} + e^{-2inrx}) / c_P(x) grows like e^{2 n r a_s}.

use vdheun::adoeigen::unboundedness_probe;
use vdheun::coupling::pi_rs2;
use vdheun::quad::gauss_rule;
use vdheun::{Params, TruncationPolicy};

fn main() -> vdheun::Result<()> {
    let p = Params::new(1.0, 0.7, 1.1)?;
    let t = TruncationPolicy::default();
    let gamma = pi_rs2(&p, 0.25, [-0.52, -0.33, -0.46, -0.27])?;
    let rule = gauss_rule(&p, 200)?;
    let ratios = unboundedness_probe(&p, &t, &gamma, &rule, 1..=8)?;
    println!("n   ||A_s t_n|| / ||t_n||   log-increment");
    let mut prev: Option<f64> = None;
    for (n, v) in &ratios {
        let inc = prev.map(|q| (v / q).ln()).unwrap_or(f64::NAN);
        println!("{n:<3} {v:<22.6} {inc:.4}");
        prev = Some(*v);
    }
    println!("expected asymptotic log-increment: 2 r a_s = {:.4}", 2.0 * p.r * p.a_small());
    Ok(())
}
