//! Spectral invariance over a Weyl-orbit sample: permutations and even sign
//! flips give the identical operator; the highest-root reflection changes
//! the operator but not its spectrum.

use vdheun::coupling::Coupling;
use vdheun::quad::gauss_rule;
use vdheun::symlab::{default_words, isospectrality_scan};
use vdheun::{Params, TruncationPolicy};

fn main() -> vdheun::Result<()> {
    let p = Params::new(1.0, 0.7, 1.1)?;
    let t = TruncationPolicy::default();
    let gamma = Coupling::real(&p, [-0.27, -0.15, -0.09, -0.03, 0.06, 0.105, -0.075, -0.015])?;
    println!("||gamma||_2 = {:.4} < a = {:.4}", gamma.ell2_norm(), p.a());
    let words: Vec<_> = default_words(&gamma, 3).into_iter().take(14).collect();
    let rule = gauss_rule(&p, 160)?;
    let rep = isospectrality_scan(&p, &t, &gamma, &words, &rule, 6)?;
    for e in &rep.entries {
        match (e.deviation_small, e.deviation_large) {
            (Some(ds), Some(dl)) => println!(
                "word {:<12} d8-only={}  deviation (small, large) = ({ds:.2e}, {dl:.2e})",
                e.word, e.d8_only
            ),
            _ => println!("word {:<12} image left the admissible domain", e.word),
        }
    }
    println!(
        "max deviation: d8 words {:.3e}, reflection words {:.3e}",
        rep.max_deviation_d8, rep.max_deviation_full
    );
    Ok(())
}
