//! Evaluate the building-block functions and verify their functional
//! equations at a sample point.

use vdheun::specfun::{self, c64, I};
use vdheun::{Params, Sign, TruncationPolicy};

fn main() -> vdheun::Result<()> {
    let p = Params::new(1.0, 0.7, 1.1)?;
    let t = TruncationPolicy::default();
    let z = c64(0.3, 0.2);

    let g = specfun::eval_g(&p, &t, z)?;
    let e = specfun::eval_e(&p, &t, z)?;
    println!("G(0.3 + 0.2i)   = {g:.15}");
    println!("E(0.3 + 0.2i)   = {e:.15}");
    println!("E(z)/E(-z) - G  = {:.3e}", (e / specfun::eval_e(&p, &t, -z)? - g).norm());

    for delta in [Sign::Plus, Sign::Minus] {
        let ad = p.a_sign(delta);
        let up = specfun::eval_g(&p, &t, z + 0.5 * I * ad)?;
        let dn = specfun::eval_g(&p, &t, z - 0.5 * I * ad)?;
        let rhs = specfun::eval_r(&p, &t, delta.other(), z)?;
        println!(
            "G(z+ia{0:?}/2)/G(z-ia{0:?}/2) - R = {1:.3e}",
            delta,
            (up / dn - rhs).norm()
        );
    }

    let refl = g * specfun::eval_g(&p, &t, -z)?;
    println!("G(z) G(-z) - 1  = {:.3e}", (refl - c64(1.0, 0.0)).norm());

    let r0 = specfun::residue_r(&p, &t, 0)?;
    let r1 = specfun::residue_r(&p, &t, 1)?;
    println!("residues of G at -ia, -ia - i a_s: {r0:.12}, {r1:.12}");
    Ok(())
}
