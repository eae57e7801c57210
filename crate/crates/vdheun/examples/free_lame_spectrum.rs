//! The free Lame coupling is exactly solvable: compare the Nystrom singular
//! values and difference-operator eigenvalues against the closed forms.

use vdheun::adoeigen::{default_probes, e_free, extract_e};
use vdheun::coupling::gamma_dot;
use vdheun::hsspec::{decompose, Side};
use vdheun::quad::gauss_rule;
use vdheun::specfun::{eval_s_large, I};
use vdheun::{Params, Shift, TruncationPolicy};

fn main() -> vdheun::Result<()> {
    let p = Params::new(1.0, 0.7, 1.1)?;
    let t = TruncationPolicy::default();
    let gd = gamma_dot(&p)?;
    let rule = gauss_rule(&p, 200)?;
    let dec = decompose(&p, &t, &gd, &rule)?;

    println!("n   lambda_n (Nystrom)    lambda_n (closed)     rel err");
    for n in 0..=10u32 {
        let sl = eval_s_large(&p, &t, I * p.a_small())?;
        let pref = 2.0 * std::f64::consts::PI * I * (p.r * p.a_large()).exp()
            / (p.p_large().powi(2) * sl);
        let want = (pref * ((n + 1) as f64 * p.r * p.a_small()).sinh()
            / ((n + 1) as f64 * p.r * p.a_large()).sinh())
        .re;
        let got = dec.lambdas[n as usize];
        println!("{n:<3} {got:<21.14e} {want:<21.14e} {:.2e}", (got - want).abs() / want);
    }

    let probes = default_probes(&p);
    println!("\nn   E_n,small (extracted)  closed        E_n,large (extracted)  closed");
    for n in 0..=6usize {
        let es = extract_e(&dec, Side::Primal, Shift::Small, n, &probes)?;
        let el = extract_e(&dec, Side::Primal, Shift::Large, n, &probes)?;
        println!(
            "{n:<3} {:<22.12} {:<13.6} {:<22.12} {:.6}",
            es.value,
            e_free(&p, Shift::Small, n as u32),
            el.value,
            e_free(&p, Shift::Large, n as u32)
        );
    }
    Ok(())
}
