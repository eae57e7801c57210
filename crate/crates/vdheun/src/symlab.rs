//! Weyl-group experiments: cluster commutativity, dual-map isospectrality,
//! and orbit spectral-invariance scans.

use crate::adoeigen::{self, Extraction};
use crate::coupling::{cluster_members, Coupling};
use crate::error::{Result, VdError};
use crate::hsspec::{self, Side};
use crate::params::{Params, Shift, TruncationPolicy};
use crate::quad::QuadratureRule;
use num_complex::Complex64;
use serde::Serialize;

/// One generator of a Weyl word.
#[derive(Debug, Clone, Serialize)]
pub enum Gen {
    /// Permutation of the eight components (image index per slot).
    Perm([usize; 8]),
    /// Even sign-flip mask.
    Flip(u8),
    /// The reflection in the highest root.
    J,
}

pub type WeylWord = Vec<Gen>;

/// Membership flags of a word-prefix image.
#[derive(Debug, Clone, Serialize)]
pub struct PrefixTrace {
    pub in_pi_tilde: bool,
    pub in_pi_r: bool,
    pub ell2_below_a: bool,
}

/// Apply a word to a coupling, recording the membership trace after each
/// generator.
pub fn apply_word(
    params: &Params,
    base: &Coupling,
    word: &WeylWord,
) -> Result<(Coupling, Vec<PrefixTrace>)> {
    let mut cur = base.clone();
    let mut trace = Vec::with_capacity(word.len());
    for gen in word {
        cur = match gen {
            Gen::Perm(p) => {
                let mut seen = [false; 8];
                for &i in p {
                    if i >= 8 || seen[i] {
                        return Err(VdError::Domain(format!("invalid permutation {p:?}")));
                    }
                    seen[i] = true;
                }
                cur.permute(p)
            }
            Gen::Flip(mask) => {
                if !cur.flip_admissible(*mask) {
                    return Err(VdError::Domain(format!(
                        "flip mask {mask:#010b} not admissible for the regime"
                    )));
                }
                cur.flip(*mask)
            }
            Gen::J => cur.reflect_j(),
        };
        trace.push(PrefixTrace {
            in_pi_tilde: cur.in_pi_tilde(params),
            in_pi_r: cur.in_pi_r(params),
            ell2_below_a: cur.ell2_norm() < params.a(),
        });
    }
    Ok((cur, trace))
}

/// Flip-normalize a coupling into Pi_r: search the admissible even flips for
/// an image in Pi_r, preferring the most generic sigma (farthest from the
/// half-shift lattice and the domain ends).
pub fn flip_normalize(params: &Params, gamma: &Coupling) -> Option<(Coupling, u8)> {
    let mut best: Option<(Coupling, u8, f64)> = None;
    for mask in 0u16..256 {
        let mask = mask as u8;
        if !gamma.flip_admissible(mask) {
            continue;
        }
        let img = gamma.flip(mask);
        if !img.in_pi_r(params) {
            continue;
        }
        let score = sigma_genericity(params, img.sigma());
        if best.as_ref().map(|b| score > b.2).unwrap_or(true) {
            best = Some((img, mask, score));
        }
    }
    best.map(|(c, m, _)| (c, m))
}

/// Distance of sigma from the degenerate values (half-shift multiples and the
/// domain ends), used to rank normalization candidates.
fn sigma_genericity(params: &Params, sigma: f64) -> f64 {
    let asx = params.a_small();
    let mut d = sigma.min(params.a() - sigma);
    let kmax = (2.0 * params.a() / (0.5 * asx)).ceil() as i32;
    for k in 1..=kmax {
        d = d.min((sigma - 0.5 * k as f64 * asx).abs());
    }
    d
}

/// Pairwise commutators of the discretized trace-class operators over cluster
/// members (the c-function gauge).
#[derive(Debug, Clone, Serialize)]
pub struct CommutatorReport {
    pub members: Vec<Coupling>,
    /// (i, j, normalized commutator norm) for i < j.
    pub pairs: Vec<(usize, usize, f64)>,
    pub max_norm: f64,
}

pub fn commutator_test(
    params: &Params,
    tp: &TruncationPolicy,
    base: &Coupling,
    rule: &QuadratureRule,
    max_members: usize,
) -> Result<CommutatorReport> {
    let members = cluster_members(params, base)?;
    let members: Vec<Coupling> = members.into_iter().take(max_members).collect();
    let mats: Vec<_> = members
        .iter()
        .map(|g| hsspec::t_matrix_c_gauge(params, tp, g, rule))
        .collect::<Result<Vec<_>>>()?;
    let mut pairs = Vec::new();
    let mut max_norm = 0.0f64;
    for i in 0..mats.len() {
        for j in (i + 1)..mats.len() {
            let c = hsspec::commutator_norm(&mats[i], &mats[j]);
            max_norm = max_norm.max(c);
            pairs.push((i, j, c));
        }
    }
    Ok(CommutatorReport {
        members,
        pairs,
        max_norm,
    })
}

/// Eigenvalue lists of one coupling for the orbit comparison.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumSample {
    pub e_small: Vec<f64>,
    pub e_large: Vec<f64>,
    pub residual: f64,
}

/// Extract sorted eigenvalue lists for n < n_compare.
pub fn spectrum_sample(
    params: &Params,
    tp: &TruncationPolicy,
    gamma: &Coupling,
    rule: &QuadratureRule,
    n_compare: usize,
) -> Result<SpectrumSample> {
    let dec = hsspec::decompose(params, tp, gamma, rule)?;
    let probes = adoeigen::default_probes(params);
    let n_compare = n_compare.min(dec.resolved_rank);
    let mut e_small = Vec::new();
    let mut e_large = Vec::new();
    let mut residual = 0.0f64;
    for n in 0..n_compare {
        let s: Extraction = adoeigen::extract_e(&dec, Side::Primal, Shift::Small, n, &probes)?;
        let l: Extraction = adoeigen::extract_e(&dec, Side::Primal, Shift::Large, n, &probes)?;
        residual = residual.max(s.residual).max(l.residual);
        e_small.push(s.value);
        e_large.push(l.value);
    }
    e_small.sort_by(f64::total_cmp);
    e_large.sort_by(f64::total_cmp);
    Ok(SpectrumSample {
        e_small,
        e_large,
        residual,
    })
}

/// Relative deviation of two sorted eigenvalue lists (multiset comparison).
pub fn sorted_list_deviation(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / (x.abs() + y.abs()).max(1e-300))
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Serialize)]
pub struct OrbitEntry {
    pub word: String,
    pub image: Coupling,
    pub trace: Vec<PrefixTrace>,
    /// None when the image left the admissible domain.
    pub normalized: Option<Coupling>,
    pub e_small: Option<Vec<f64>>,
    pub e_large: Option<Vec<f64>>,
    pub deviation_small: Option<f64>,
    pub deviation_large: Option<f64>,
    pub escaped: bool,
    /// The word touches only permutations/flips (same operator family).
    pub d8_only: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct OrbitReport {
    pub base: Coupling,
    pub base_residual: f64,
    pub entries: Vec<OrbitEntry>,
    pub max_deviation_d8: f64,
    pub max_deviation_full: f64,
}

/// Describe a word compactly for reports.
pub fn word_label(word: &WeylWord) -> String {
    word.iter()
        .map(|g| match g {
            Gen::Perm(_) => "P".to_string(),
            Gen::Flip(m) => format!("F{m:02x}"),
            Gen::J => "J".to_string(),
        })
        .collect::<Vec<_>>()
        .join(".")
}

/// Default word list: all single admissible flips whose image can be
/// normalized into Pi_r, a few seeded permutations, J, and J-flip-J chains.
pub fn default_words(base: &Coupling, seed: u64) -> Vec<WeylWord> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut words: Vec<WeylWord> = Vec::new();
    for mask in 1u16..256 {
        let mask = mask as u8;
        if base.flip_admissible(mask) && mask.count_ones() == 2 {
            words.push(vec![Gen::Flip(mask)]);
        }
    }
    for _ in 0..5 {
        let mut perm = [0usize; 8];
        let mut pool: Vec<usize> = (0..8).collect();
        for slot in perm.iter_mut() {
            let k = rng.gen_range(0..pool.len());
            *slot = pool.swap_remove(k);
        }
        words.push(vec![Gen::Perm(perm)]);
    }
    words.push(vec![Gen::J]);
    for mask in [0b0000_0011u8, 0b0001_1000, 0b1010_0000] {
        words.push(vec![Gen::J, Gen::Flip(mask), Gen::J]);
    }
    words
}

/// Isospectrality scan over word images: every in-domain image must produce
/// the same sorted eigenvalue multisets after flip-normalization into Pi_r.
pub fn isospectrality_scan(
    params: &Params,
    tp: &TruncationPolicy,
    base: &Coupling,
    words: &[WeylWord],
    rule: &QuadratureRule,
    n_compare: usize,
) -> Result<OrbitReport> {
    if base.ell2_norm() >= params.a() {
        return Err(VdError::Domain(format!(
            "orbit base needs ||gamma||_2 < a, got {:.6}",
            base.ell2_norm()
        )));
    }
    let (base_norm, _) = flip_normalize(params, base).ok_or_else(|| {
        VdError::Domain("base coupling cannot be flip-normalized into Pi_r".into())
    })?;
    let base_spec = spectrum_sample(params, tp, &base_norm, rule, n_compare)?;

    let mut entries = Vec::new();
    let mut max_d8 = 0.0f64;
    let mut max_full = 0.0f64;
    for word in words {
        let (image, trace) = apply_word(params, base, word)?;
        let d8_only = word.iter().all(|g| !matches!(g, Gen::J));
        let escaped = !image.in_pi_tilde(params);
        let normalized = flip_normalize(params, &image);
        let (mut dev_s, mut dev_l) = (None, None);
        let (mut es, mut el) = (None, None);
        if let Some((img_norm, _)) = &normalized {
            let spec = spectrum_sample(params, tp, img_norm, rule, n_compare)?;
            let ds = sorted_list_deviation(&spec.e_small, &base_spec.e_small);
            let dl = sorted_list_deviation(&spec.e_large, &base_spec.e_large);
            dev_s = Some(ds);
            dev_l = Some(dl);
            let d = ds.max(dl);
            if d8_only {
                max_d8 = max_d8.max(d);
            } else {
                max_full = max_full.max(d);
            }
            es = Some(spec.e_small);
            el = Some(spec.e_large);
        }
        entries.push(OrbitEntry {
            word: word_label(word),
            image: image.clone(),
            trace,
            normalized: normalized.map(|(c, _)| c),
            e_small: es,
            e_large: el,
            deviation_small: dev_s,
            deviation_large: dev_l,
            escaped,
            d8_only,
        });
    }
    Ok(OrbitReport {
        base: base.clone(),
        base_residual: base_spec.residual,
        entries,
        max_deviation_d8: max_d8,
        max_deviation_full: max_full,
    })
}

/// Lambda spectra across a cluster generically differ even though the
/// difference-operator spectra coincide; returns max relative lambda gap.
pub fn cluster_lambda_spread(
    params: &Params,
    tp: &TruncationPolicy,
    members: &[Coupling],
    rule: &QuadratureRule,
    modes: usize,
) -> Result<f64> {
    let mut spread = 0.0f64;
    let mut first: Option<Vec<f64>> = None;
    for g in members {
        let dec = hsspec::decompose(params, tp, g, rule)?;
        let lams: Vec<f64> = dec.lambdas.iter().take(modes).cloned().collect();
        if let Some(f) = &first {
            spread = spread.max(sorted_list_deviation(f, &lams));
        } else {
            first = Some(lams);
        }
    }
    Ok(spread)
}

/// Check symmetry/positive-definiteness of the discretized operator of a
/// self-dual coupling, as a matrix-level sanity invariant.
pub fn self_dual_symmetry_residual(
    params: &Params,
    tp: &TruncationPolicy,
    gamma: &Coupling,
    rule: &QuadratureRule,
) -> Result<f64> {
    let m = hsspec::build_i_matrix(params, tp, gamma, rule)?;
    let mut worst = 0.0f64;
    let scale = m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    Ok(worst / scale)
}

/// Frobenius norm helper for complex matrices.
pub fn fro_norm(m: &nalgebra::DMatrix<Complex64>) -> f64 {
    m.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling;
    use crate::quad::gauss_rule;

    fn p710() -> Params {
        Params::new(1.0, 0.7, 1.1).unwrap()
    }

    fn tp() -> TruncationPolicy {
        TruncationPolicy::default()
    }

    #[test]
    fn free_cluster_commutators_vanish() {
        let (p, t) = (p710(), tp());
        let base = coupling::gamma_dot(&p).unwrap();
        let rule = gauss_rule(&p, 80).unwrap();
        let rep = commutator_test(&p, &t, &base, &rule, 6).unwrap();
        assert!(rep.members.len() >= 4);
        assert!(rep.max_norm < 1e-9, "max commutator {}", rep.max_norm);
    }

    #[test]
    fn real_cluster_commutators_vanish_and_lambdas_differ() {
        let (p, t) = (p710(), tp());
        let g = coupling::Coupling::real(
            &p,
            [-0.41, -0.07, -0.16, -0.11, 0.12, -0.22, 0.19, -0.08],
        )
        .unwrap();
        let rule = gauss_rule(&p, 80).unwrap();
        let rep = commutator_test(&p, &t, &g, &rule, 6).unwrap();
        assert!(rep.members.len() >= 4, "cluster size {}", rep.members.len());
        assert!(rep.max_norm < 1e-8, "max commutator {}", rep.max_norm);
        let spread =
            cluster_lambda_spread(&p, &t, &rep.members[..3.min(rep.members.len())], &rule, 5)
                .unwrap();
        assert!(spread > 1e-3, "lambda spectra unexpectedly equal: {spread}");
    }

    #[test]
    fn word_application_and_traces() {
        let p = p710();
        let g = coupling::Coupling::real(
            &p,
            [-0.27, -0.15, -0.09, -0.03, 0.06, 0.105, -0.075, -0.015],
        )
        .unwrap();
        let word = vec![Gen::J, Gen::Flip(0b0000_0011), Gen::J];
        let (img, trace) = apply_word(&p, &g, &word).unwrap();
        assert_eq!(trace.len(), 3);
        assert!(img.in_pi_tilde(&p));
        // J twice with no flip in between is the identity
        let (img2, _) = apply_word(&p, &g, &vec![Gen::J, Gen::J]).unwrap();
        assert!(coupling::couplings_equal(&img2, &g));
        // odd flips rejected
        assert!(apply_word(&p, &g, &vec![Gen::Flip(0b0000_0001)]).is_err());
    }

    #[test]
    fn j_fixes_couplings_orthogonal_to_the_highest_root() {
        let p = p710();
        // components sum to zero => sigma = 0 => J gamma = gamma
        let g = coupling::Coupling::real(
            &p,
            [-0.2, 0.2, -0.1, 0.1, -0.05, 0.05, -0.15, 0.15],
        )
        .unwrap();
        let j = g.reflect_j();
        assert!(coupling::couplings_equal(&j, &g));
    }

    #[test]
    fn flip_normalization_lands_in_pi_r() {
        let p = p710();
        let g = coupling::Coupling::real(
            &p,
            [0.27, 0.15, 0.09, 0.03, -0.06, -0.105, 0.075, 0.015],
        )
        .unwrap();
        assert!(g.sigma() < 0.0);
        let (img, mask) = flip_normalize(&p, &g).unwrap();
        assert!(img.in_pi_r(&p));
        assert!(mask.count_ones() % 2 == 0);
    }

    #[test]
    fn isospectrality_over_small_orbit() {
        let (p, t) = (p710(), tp());
        // moderate sigma after normalization keeps the extraction well
        // conditioned; ||gamma||_2 < a
        let g = coupling::Coupling::real(
            &p,
            [-0.27, -0.15, -0.09, -0.03, 0.06, 0.105, -0.075, -0.015],
        )
        .unwrap();
        assert!(g.ell2_norm() < p.a());
        let words: Vec<WeylWord> = vec![
            vec![Gen::Flip(0b0011_0000)],
            vec![Gen::Perm([2, 0, 1, 3, 5, 4, 7, 6])],
            vec![Gen::J],
            vec![Gen::J, Gen::Flip(0b0000_0011), Gen::J],
        ];
        let rule = gauss_rule(&p, 100).unwrap();
        let rep = isospectrality_scan(&p, &t, &g, &words, &rule, 5).unwrap();
        assert!(
            rep.max_deviation_d8 < 1e-8,
            "D8 deviation {}",
            rep.max_deviation_d8
        );
        let tol = (10.0 * rep.base_residual).max(1e-5);
        assert!(
            rep.max_deviation_full < tol,
            "full deviation {} vs tol {tol}",
            rep.max_deviation_full
        );
    }

    #[test]
    fn self_dual_discretization_is_symmetric() {
        let (p, t) = (p710(), tp());
        let g = coupling::pi_rs1(&p, 0.4, [-0.6, -0.5, -0.35, -0.25]).unwrap();
        let rule = gauss_rule(&p, 60).unwrap();
        let res = self_dual_symmetry_residual(&p, &t, &g, &rule).unwrap();
        assert!(res < 1e-12, "symmetry residual {res}");
    }
}
