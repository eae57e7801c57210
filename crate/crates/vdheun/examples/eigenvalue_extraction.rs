//! Extract the joint eigenvalue pairs (E_{n,s}, E_{n,l}) of a generic
//! coupling and verify they coincide with the dual coupling's pairs.

use vdheun::adoeigen::eigen_report;
use vdheun::coupling::pi_rs1;
use vdheun::hsspec::{decompose, Side};
use vdheun::quad::gauss_rule;
use vdheun::{Params, TruncationPolicy};

fn main() -> vdheun::Result<()> {
    let p = Params::new(1.0, 0.7, 1.1)?;
    let t = TruncationPolicy::default();
    let gamma = pi_rs1(&p, 0.46, [-0.62, -0.49, -0.33, -0.26])?;
    let rule = gauss_rule(&p, 200)?;
    let dec = decompose(&p, &t, &gamma, &rule)?;

    let rep = eigen_report(&dec, Side::Primal, 6, false)?;
    println!("sigma = {:.4},  M_s = {:.6},  M_l = {:.6}", dec.sigma, rep.m_small, rep.m_large);
    println!("n   E_n,small         res       E_n,large         res");
    for e in &rep.entries {
        println!(
            "{:<3} {:<17.10} {:<9.2e} {:<17.10} {:.2e}",
            e.n, e.e_small, e.res_small, e.e_large, e.res_large
        );
    }

    let dual = eigen_report(&dec, Side::Dual, 6, false)?;
    let max_dev = rep
        .entries
        .iter()
        .zip(&dual.entries)
        .map(|(a, b)| {
            ((a.e_small - b.e_small).abs() / a.e_small.abs())
                .max((a.e_large - b.e_large).abs() / a.e_large.abs())
        })
        .fold(0.0f64, f64::max);
    println!("\nmax relative deviation from the dual coupling's pairs: {max_dev:.3e}");
    Ok(())
}
