//! The entire eigenfunctions H_n satisfy exact reflection identities; check
//! every band-admissible instance for the first two modes.

use vdheun::adoeigen::{check_hn_identities, ALL_FAMILIES};
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
    for n in 0..2usize {
        println!("mode {n}:");
        for inst in check_hn_identities(&dec, Side::Primal, n, &ALL_FAMILIES)? {
            match (inst.rel_error, &inst.skipped) {
                (Some(err), _) => println!(
                    "  {}[{}] tau={}  rel err {err:.3e}",
                    inst.family, inst.index, inst.tau
                ),
                (None, Some(reason)) => println!(
                    "  {}[{}] tau={}  skipped: {reason}",
                    inst.family, inst.index, inst.tau
                ),
                (None, None) => println!(
                    "  {}[{}] tau={}  pass by vanishing",
                    inst.family, inst.index, inst.tau
                ),
            }
        }
    }
    Ok(())
}
