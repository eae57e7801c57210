//! Large-n diagnostics: the orthonormal polynomials converge to plane waves,
//! the singular values to the explicit geometric sequence, and the
//! eigenvectors to the polynomial basis.

use vdheun::coupling::pi_rs2;
use vdheun::hsspec::decompose;
use vdheun::polyasym;
use vdheun::quad::gauss_rule;
use vdheun::vdcore::kappa_n;
use vdheun::{Params, TruncationPolicy};

fn main() -> vdheun::Result<()> {
    let p = Params::new(1.0, 0.7, 1.1)?;
    let t = TruncationPolicy::default();
    let gamma = pi_rs2(&p, 0.3 * p.a_small(), [-0.5, -0.3, -0.45, -0.25])?;
    let rule = gauss_rule(&p, 400)?;
    let basis = polyasym::build_ortho(&p, &t, &gamma, &rule, 15)?;
    let basis_dual = polyasym::build_ortho(&p, &t, &gamma.dual(), &rule, 15)?;
    let dec = decompose(&p, &t, &gamma, &rule)?;

    let psi_a = polyasym::decay_psi_vs_a(&p, &t, &basis, &rule, 4..=14, 1e-13)?;
    let on_psi = polyasym::decay_i_on_psi(&p, &t, &basis, &basis_dual, &rule, 4..=14, 1e-13)?;
    let lk = polyasym::lambda_vs_kappa(&dec, 4..=14, 1e-14)?;
    let (fp, signs) = polyasym::f_vs_psi(&dec, &basis, &rule, 4..=12, 1e-12)?;

    println!("sigma = {:.4} (= 0.3 a_s), 2 r a_s = {:.4}", dec.sigma, 2.0 * p.r * p.a_small());
    for rep in [&psi_a, &on_psi, &lk, &fp] {
        println!("{:<26} fitted decay rate {:.4}  ({} points)", rep.name, rep.slope, rep.points_used);
    }
    println!("observed signs in f_n ~ s_n psi_n: {signs:?}");
    println!("lambda_10 / kappa_10 = {:.8}", dec.lambdas[10] / kappa_n(&p, &t, dec.sigma, 10)?);
    Ok(())
}
