//! Orthonormal polynomials for the polynomial weight, the plane-wave
//! comparison functions, and the large-n decay diagnostics.

use crate::coupling::Coupling;
use crate::error::{Result, VdError};
use crate::hsspec::{Side, SpectralDecomposition};
use crate::params::{Params, TruncationPolicy};
use crate::quad::QuadratureRule;
use crate::specfun::{c64, I};
use crate::vdcore;
use num_complex::Complex64;
use serde::Serialize;

/// Orthonormal polynomials p_n(gamma; cos 2rx) for the weight (r/pi) w_P dx,
/// together with grid data for the derived comparison functions.
#[derive(Debug)]
pub struct OrthoBasis {
    pub coupling: Coupling,
    pub n_max: usize,
    r: f64,
    /// Three-term recurrence: p_{k+1} = ((u - alpha_k) p_k - beta_k p_{k-1}) / beta_{k+1}-free form
    /// stored as monic recurrence coefficients (alpha_k, beta_k).
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    /// P_n(x_j) = p_n(cos 2r x_j), orthonormal rows 0..=n_max.
    pub p_samples: Vec<Vec<f64>>,
    /// c_P(gamma; x_j).
    pub cp_nodes: Vec<Complex64>,
    /// w_P(gamma; x_j).
    pub wp_nodes: Vec<f64>,
}

/// Build the basis by the Stieltjes procedure against the discrete measure
/// (r/pi) sum_j q_j w_P(x_j) f(x_j) g(x_j).
pub fn build_ortho(
    params: &Params,
    tp: &TruncationPolicy,
    gamma: &Coupling,
    rule: &QuadratureRule,
    n_max: usize,
) -> Result<OrthoBasis> {
    gamma.require_pi_tilde(params)?;
    if 2 * n_max >= rule.len() {
        return Err(VdError::Domain(format!(
            "degree {n_max} not resolvable by {} nodes",
            rule.len()
        )));
    }
    let n = rule.len();
    let mut cp_nodes = Vec::with_capacity(n);
    let mut wp_nodes = Vec::with_capacity(n);
    for &x in &rule.nodes {
        let cp = vdcore::cp_func(params, tp, gamma, c64(x, 0.0))?;
        cp_nodes.push(cp);
        let wp = 1.0 / cp.norm_sqr();
        wp_nodes.push(wp);
    }
    let measure: Vec<f64> = (0..n)
        .map(|j| params.r / std::f64::consts::PI * rule.weights[j] * wp_nodes[j])
        .collect();
    let u: Vec<f64> = rule.nodes.iter().map(|&x| (2.0 * params.r * x).cos()).collect();

    let dot = |a: &[f64], b: &[f64]| -> f64 { (0..n).map(|j| measure[j] * a[j] * b[j]).sum() };

    // monic Stieltjes recurrence q_{k+1} = (u - alpha_k) q_k - beta_k q_{k-1}
    let mut alpha = Vec::with_capacity(n_max + 1);
    let mut beta = Vec::with_capacity(n_max + 1);
    let mut q_prev = vec![0.0; n];
    let mut q_cur = vec![1.0; n];
    let mut norm_prev = 0.0f64;
    let mut norm_cur = dot(&q_cur, &q_cur);
    let mut p_samples: Vec<Vec<f64>> = Vec::with_capacity(n_max + 1);
    for k in 0..=n_max {
        let scale = norm_cur.sqrt();
        p_samples.push(q_cur.iter().map(|v| v / scale).collect());
        let uq: Vec<f64> = (0..n).map(|j| u[j] * q_cur[j]).collect();
        let a_k = dot(&uq, &q_cur) / norm_cur;
        let b_k = if k == 0 { 0.0 } else { norm_cur / norm_prev };
        alpha.push(a_k);
        beta.push(b_k);
        let q_next: Vec<f64> = (0..n)
            .map(|j| (u[j] - a_k) * q_cur[j] - if k == 0 { 0.0 } else { b_k * q_prev[j] })
            .collect();
        norm_prev = norm_cur;
        norm_cur = dot(&q_next, &q_next);
        q_prev = std::mem::replace(&mut q_cur, q_next);
        if norm_cur <= 0.0 || !norm_cur.is_finite() {
            return Err(VdError::LossOfOrthogonality(norm_cur));
        }
    }

    let basis = OrthoBasis {
        coupling: gamma.clone(),
        n_max,
        r: params.r,
        alpha,
        beta,
        p_samples,
        cp_nodes,
        wp_nodes,
    };
    let gram = basis.gram_residual(rule, n_max.min(10));
    if gram > 1e-8 {
        return Err(VdError::LossOfOrthogonality(gram));
    }
    Ok(basis)
}

impl OrthoBasis {
    /// max |<psi_m, psi_n> - delta_{mn}| over modes below `count`.
    pub fn gram_residual(&self, rule: &QuadratureRule, count: usize) -> f64 {
        let psi: Vec<Vec<Complex64>> = (0..=count).map(|k| self.psi_samples(k)).collect();
        let mut worst = 0.0f64;
        for m in 0..=count {
            for nn in 0..=count {
                let g = rule.inner_complex(&psi[m], &psi[nn]);
                let want = if m == nn { 1.0 } else { 0.0 };
                worst = worst.max((g - want).norm());
            }
        }
        worst
    }

    /// psi_n(x_j) = sqrt(r/pi) P_n(x_j) / c_P(x_j).
    pub fn psi_samples(&self, n: usize) -> Vec<Complex64> {
        let scale = (self.r / std::f64::consts::PI).sqrt();
        self.p_samples[n]
            .iter()
            .zip(&self.cp_nodes)
            .map(|(p, cp)| scale * p / cp)
            .collect()
    }

}

/// Plane-wave comparison functions
/// a_n(x_j) = sqrt(r/pi) (e^{2inrx} + (c_P(-x)/c_P(x)) e^{-2inrx}).
pub fn a_samples(
    params: &Params,
    tp: &TruncationPolicy,
    gamma: &Coupling,
    rule: &QuadratureRule,
    n: usize,
) -> Result<Vec<Complex64>> {
    let scale = (params.r / std::f64::consts::PI).sqrt();
    let mut out = Vec::with_capacity(rule.len());
    for &x in &rule.nodes {
        let z = c64(x, 0.0);
        let cp = vdcore::cp_func(params, tp, gamma, z)?;
        let cpm = vdcore::cp_func(params, tp, gamma, -z)?;
        let plus = (2.0 * I * (n as f64) * params.r * z).exp();
        let minus = (-2.0 * I * (n as f64) * params.r * z).exp();
        out.push(scale * (plus + cpm / cp * minus));
    }
    Ok(out)
}

/// Weighted least-squares fit of log(err) = intercept - slope * n on the
/// points above the noise floor. Returns (slope, points_used).
pub fn fit_decay_slope(errors: &[(u32, f64)], noise_floor: f64) -> (f64, usize) {
    let pts: Vec<(f64, f64)> = errors
        .iter()
        .filter(|(_, e)| *e > 10.0 * noise_floor && e.is_finite())
        .map(|(n, e)| (*n as f64, e.ln()))
        .collect();
    if pts.len() < 2 {
        return (f64::NAN, pts.len());
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    (-slope, pts.len())
}

/// Decay table of one diagnostic: per-n errors plus the fitted rate.
#[derive(Debug, Clone, Serialize)]
pub struct DecayReport {
    pub name: String,
    pub errors: Vec<(u32, f64)>,
    pub slope: f64,
    pub points_used: usize,
    /// Whether the hypotheses of the underlying decay statement hold.
    pub hypotheses_hold: bool,
}

impl DecayReport {
    /// Residual of the log-linear model at each point: ln(err_n) - fit(n).
    pub fn fit_residuals(&self) -> Vec<(u32, f64)> {
        let pts: Vec<(f64, f64)> = self
            .errors
            .iter()
            .filter(|(_, e)| e.is_finite() && *e > 0.0)
            .map(|(n, e)| (*n as f64, e.ln()))
            .collect();
        if pts.len() < 2 || !self.slope.is_finite() {
            return Vec::new();
        }
        let n = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let intercept = (sy + self.slope * sx) / n;
        pts.iter()
            .map(|(x, y)| (*x as u32, y - (intercept - self.slope * x)))
            .collect()
    }
}

/// || psi_n - a_n || over the range; expected rate >= 2 r (a_s - eps).
pub fn decay_psi_vs_a(
    params: &Params,
    tp: &TruncationPolicy,
    basis: &OrthoBasis,
    rule: &QuadratureRule,
    range: std::ops::RangeInclusive<u32>,
    noise_floor: f64,
) -> Result<DecayReport> {
    let mut errors = Vec::new();
    for n in range {
        let psi = basis.psi_samples(n as usize);
        let a = a_samples(params, tp, &basis.coupling, rule, n as usize)?;
        let diff: Vec<Complex64> = psi.iter().zip(&a).map(|(p, q)| p - q).collect();
        errors.push((n, rule.norm_complex(&diff)));
    }
    let (slope, points_used) = fit_decay_slope(&errors, noise_floor);
    Ok(DecayReport {
        name: "psi-vs-planewave".into(),
        errors,
        slope,
        points_used,
        hypotheses_hold: true,
    })
}

/// || I(gamma') psi_n(gamma) - kappa_n psi_n(gamma') ||; rate >= 2 r (a_s - eps).
pub fn decay_i_on_psi(
    params: &Params,
    tp: &TruncationPolicy,
    basis: &OrthoBasis,
    basis_dual: &OrthoBasis,
    rule: &QuadratureRule,
    range: std::ops::RangeInclusive<u32>,
    noise_floor: f64,
) -> Result<DecayReport> {
    let gamma = &basis.coupling;
    gamma.require_pi_r(params)?;
    let sigma = gamma.sigma();
    let m_dual = crate::hsspec::i_matrix_c_gauge(params, tp, &gamma.dual(), rule)?;
    let mut errors = Vec::new();
    for n in range {
        let psi = basis.psi_samples(n as usize);
        let img = crate::hsspec::apply_i_c_gauge(&m_dual, &psi);
        let kappa = vdcore::kappa_n(params, tp, sigma, n)?;
        let psi_d = basis_dual.psi_samples(n as usize);
        let diff: Vec<Complex64> = img
            .iter()
            .zip(&psi_d)
            .map(|(a, b)| a - kappa * b)
            .collect();
        errors.push((n, rule.norm_complex(&diff)));
    }
    let (slope, points_used) = fit_decay_slope(&errors, noise_floor);
    Ok(DecayReport {
        name: "integral-operator-on-psi".into(),
        errors,
        slope,
        points_used,
        hypotheses_hold: true,
    })
}

/// |lambda_n - kappa_n(sigma)| with the fitted decay rate; requires sigma < a_s.
pub fn lambda_vs_kappa(
    dec: &SpectralDecomposition,
    range: std::ops::RangeInclusive<u32>,
    noise_floor: f64,
) -> Result<DecayReport> {
    let hypotheses_hold = dec.sigma < dec.params.a_small();
    let mut errors = Vec::new();
    for n in range {
        if (n as usize) >= dec.resolved_rank {
            break;
        }
        let kappa = vdcore::kappa_n(&dec.params, &dec.tp, dec.sigma, n)?;
        errors.push((n, (dec.lambdas[n as usize] - kappa).abs()));
    }
    let (slope, points_used) = fit_decay_slope(&errors, noise_floor);
    Ok(DecayReport {
        name: "lambda-vs-kappa".into(),
        errors,
        slope,
        points_used,
        hypotheses_hold,
    })
}

/// min over signs of || f_n - s psi_n || with the observed signs; the decay
/// statement needs sigma < a_s (self-dual) or 2 sigma < a_s (general).
pub fn f_vs_psi(
    dec: &SpectralDecomposition,
    basis: &OrthoBasis,
    rule: &QuadratureRule,
    range: std::ops::RangeInclusive<u32>,
    noise_floor: f64,
) -> Result<(DecayReport, Vec<i8>)> {
    let self_dual = crate::coupling::couplings_equal(&dec.primal, &dec.dual)
        || is_permutation_pair(&dec.primal, &dec.dual);
    let hypotheses_hold = if self_dual {
        dec.sigma < dec.params.a_small()
    } else {
        2.0 * dec.sigma < dec.params.a_small()
    };
    let mut errors = Vec::new();
    let mut signs = Vec::new();
    for n in range {
        if (n as usize) >= dec.resolved_rank {
            break;
        }
        let f = dec.f_samples(Side::Primal, n as usize);
        let psi = basis.psi_samples(n as usize);
        let mut best = (f64::INFINITY, 0i8);
        for s in [1.0f64, -1.0] {
            let diff: Vec<Complex64> = f.iter().zip(&psi).map(|(a, b)| a - s * b).collect();
            let e = rule.norm_complex(&diff);
            if e < best.0 {
                best = (e, s as i8);
            }
        }
        errors.push((n, best.0));
        signs.push(best.1);
    }
    let (slope, points_used) = fit_decay_slope(&errors, noise_floor);
    Ok((
        DecayReport {
            name: "eigenvector-vs-psi".into(),
            errors,
            slope,
            points_used,
            hypotheses_hold,
        },
        signs,
    ))
}

fn is_permutation_pair(a: &Coupling, b: &Coupling) -> bool {
    let mut ga = a.g().to_vec();
    let mut gb = b.g().to_vec();
    ga.sort_by(f64::total_cmp);
    gb.sort_by(f64::total_cmp);
    ga.iter().zip(&gb).all(|(x, y)| (x - y).abs() < 1e-12)
}

/// b_n-consistency: || I(gamma') a_n(gamma) - kappa_n a_n(gamma') || decays at
/// rate 2 r (eta - eps), eta = min(a, sigma + a_s).
pub fn decay_b_vs_a(
    params: &Params,
    tp: &TruncationPolicy,
    gamma: &Coupling,
    rule: &QuadratureRule,
    range: std::ops::RangeInclusive<u32>,
    noise_floor: f64,
) -> Result<DecayReport> {
    gamma.require_pi_r(params)?;
    let sigma = gamma.sigma();
    let dual = gamma.dual();
    let m_dual = crate::hsspec::i_matrix_c_gauge(params, tp, &dual, rule)?;
    let mut errors = Vec::new();
    for n in range {
        let a_p = a_samples(params, tp, gamma, rule, n as usize)?;
        let img = crate::hsspec::apply_i_c_gauge(&m_dual, &a_p);
        let kappa = vdcore::kappa_n(params, tp, sigma, n)?;
        let a_d = a_samples(params, tp, &dual, rule, n as usize)?;
        let diff: Vec<Complex64> = img.iter().zip(&a_d).map(|(x, y)| x - kappa * y).collect();
        errors.push((n, rule.norm_complex(&diff)));
    }
    let (slope, points_used) = fit_decay_slope(&errors, noise_floor);
    Ok(DecayReport {
        name: "b-vs-a".into(),
        errors,
        slope,
        points_used,
        hypotheses_hold: true,
    })
}

/// Interval-trapping check of the compact-operator perturbation lemma: given
/// ||T p_n - e^{-ns} p_n'|| <= C e^{-na} with 0 < s < a, the singular values
/// nu_n land in [e^{-ns} - C e^{-na}, e^{-ns} + C e^{-na}] for all n past some
/// threshold. Returns the smallest M from which trapping holds, or None.
pub fn trapping_threshold(svals: &[f64], s: f64, a: f64, c: f64) -> Option<usize> {
    if !(s > 0.0 && s < a) {
        return None;
    }
    let trapped = |n: usize| -> bool {
        let center = (-(n as f64) * s).exp();
        let half = c * (-(n as f64) * a).exp();
        svals[n] >= center - half && svals[n] <= center + half
    };
    let mut m = None;
    for n in (0..svals.len()).rev() {
        if trapped(n) {
            m = Some(n);
        } else {
            break;
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling;
    use crate::hsspec::decompose;
    use crate::quad::gauss_rule;
    use nalgebra::DMatrix;

    fn p710() -> Params {
        Params::new(1.0, 0.7, 1.1).unwrap()
    }

    fn tp() -> TruncationPolicy {
        TruncationPolicy::default()
    }

    #[test]
    fn chebyshev_like_basis_for_free_lame() {
        let (p, t) = (p710(), tp());
        let gd = coupling::gamma_dot(&p).unwrap();
        let rule = gauss_rule(&p, 160).unwrap();
        let basis = build_ortho(&p, &t, &gd, &rule, 12).unwrap();
        // P_n = sin 2(n+1) r x / sin 2 r x and psi_n = a_n = f_n
        for n in [0usize, 3, 7] {
            let mut worst = 0.0f64;
            for (j, &x) in rule.nodes.iter().enumerate() {
                let want = (2.0 * (n as f64 + 1.0) * p.r * x).sin() / (2.0 * p.r * x).sin();
                worst = worst.max((basis.p_samples[n][j] - want).abs());
            }
            assert!(worst < 1e-8, "mode {n}: sup err {worst}");
            let psi = basis.psi_samples(n);
            let a = a_samples(&p, &t, &gd, &rule, n).unwrap();
            let diff: Vec<_> = psi.iter().zip(&a).map(|(x, y)| x - y).collect();
            assert!(rule.norm_complex(&diff) < 1e-9);
        }
        assert!(basis.gram_residual(&rule, 10) < 1e-10);
    }

    #[test]
    fn psi_decays_toward_planewaves() {
        let (p, t) = (p710(), tp());
        let g = coupling::pi_rs2(&p, 0.21, [-0.5, -0.3, -0.45, -0.25]).unwrap();
        let rule = gauss_rule(&p, 240).unwrap();
        let basis = build_ortho(&p, &t, &g, &rule, 15).unwrap();
        let rep = decay_psi_vs_a(&p, &t, &basis, &rule, 4..=14, 1e-13).unwrap();
        let want = 2.0 * p.r * (p.a_small() - 0.15 * p.a_small());
        assert!(
            rep.slope >= want,
            "slope {} below {want}; errors {:?}",
            rep.slope,
            rep.errors
        );
        // tail monotone from n = 6
        for w in rep.errors[2..].windows(2) {
            assert!(w[1].1 < w[0].1, "tail not decreasing: {:?}", rep.errors);
        }
    }

    #[test]
    fn integral_operator_matches_kappa_on_psi() {
        let (p, t) = (p710(), tp());
        let g = coupling::pi_rs2(&p, 0.21, [-0.5, -0.3, -0.45, -0.25]).unwrap();
        let rule = gauss_rule(&p, 240).unwrap();
        let basis = build_ortho(&p, &t, &g, &rule, 15).unwrap();
        let basis_d = build_ortho(&p, &t, &g.dual(), &rule, 15).unwrap();
        let rep = decay_i_on_psi(&p, &t, &basis, &basis_d, &rule, 4..=14, 1e-13).unwrap();
        let want = 2.0 * p.r * (p.a_small() - 0.15 * p.a_small());
        assert!(rep.slope >= want, "slope {} below {want}", rep.slope);
    }

    #[test]
    fn lambda_approaches_kappa_below_as() {
        let (p, t) = (p710(), tp());
        // free Lame: sigma = 0.2 < a_s, lambda_n and kappa_n agree in rate
        // and constant
        let gd = coupling::gamma_dot(&p).unwrap();
        let rule = gauss_rule(&p, 160).unwrap();
        let dec = decompose(&p, &t, &gd, &rule).unwrap();
        let rep = lambda_vs_kappa(&dec, 4..=14, 1e-14).unwrap();
        assert!(rep.hypotheses_hold);
        let want = 2.0 * p.r * (p.a_small() - 0.15 * p.a_small());
        assert!(rep.slope >= want, "slope {}", rep.slope);
        let ratio = dec.lambdas[10] / vdcore::kappa_n(&p, &t, dec.sigma, 10).unwrap();
        assert!((ratio - 1.0).abs() < 1e-2, "lambda/kappa = {ratio}");
    }

    #[test]
    fn eigenvectors_approach_psi() {
        let (p, t) = (p710(), tp());
        let g = coupling::pi_rs2(&p, 0.21, [-0.5, -0.3, -0.45, -0.25]).unwrap();
        let rule = gauss_rule(&p, 240).unwrap();
        let dec = decompose(&p, &t, &g, &rule).unwrap();
        let basis = build_ortho(&p, &t, &g, &rule, 15).unwrap();
        let (rep, signs) = f_vs_psi(&dec, &basis, &rule, 4..=12, 1e-12).unwrap();
        assert!(rep.hypotheses_hold, "sigma = {}", dec.sigma);
        assert!(rep.slope > 0.0, "slope {}", rep.slope);
        assert!(!signs.is_empty());
    }

    #[test]
    fn synthetic_interval_trapping() {
        // synthetic 40x40 operator: T = sum e^{-ns} p_n' (p_n, .) plus a
        // perturbation of the image of each p_n bounded by C e^{-na} and
        // supported on neighbouring output modes (overlaps with far modes
        // would violate the enclosure at finite dimension); the singular
        // values must land in the intervals I_n from some threshold on
        let dim = 40;
        let (s, a, c) = (0.35f64, 0.8f64, 0.9f64);
        let mut rng_state = 88172645463325252u64;
        let mut rnd = || {
            // xorshift
            rng_state ^= rng_state << 13;
            rng_state ^= rng_state >> 7;
            rng_state ^= rng_state << 17;
            (rng_state as f64 / u64::MAX as f64) - 0.5
        };
        let qr = |m: DMatrix<f64>| m.qr().q();
        let p = qr(DMatrix::from_fn(dim, dim, |_, _| rnd()));
        let q = qr(DMatrix::from_fn(dim, dim, |_, _| rnd()));
        let mut core = DMatrix::zeros(dim, dim);
        for n in 0..dim {
            core[(n, n)] = (-(n as f64) * s).exp();
        }
        let mut t = &q * &core * p.transpose();
        for n in 0..dim {
            let mix = rnd(); // in (-0.5, 0.5)
            let (alpha, beta) = ((1.0 - mix * mix).sqrt(), mix);
            let dir = q.column(n) * alpha + q.column((n + 1).min(dim - 1)) * beta;
            let col = dir * (0.5 * c * (-(n as f64) * a).exp());
            t += col * p.column(n).transpose();
        }
        let svd = t.svd(false, false);
        let mut svals: Vec<f64> = svd.singular_values.iter().cloned().collect();
        svals.sort_by(|x, y| y.total_cmp(x));
        let m = trapping_threshold(&svals, s, a, c);
        assert!(m.is_some(), "no trapping threshold found");
        let m = m.unwrap();
        assert!(m < dim / 2, "trapping only from {m}");
        // the intervals are genuinely pinching: relative halfwidth shrinks
        let rel_width = |n: usize| c * (-(n as f64) * (a - s)).exp();
        assert!(rel_width(30) < 1e-5);
    }

    #[test]
    fn b_vs_a_consistency() {
        let (p, t) = (p710(), tp());
        let g = coupling::pi_rs2(&p, 0.21, [-0.5, -0.3, -0.45, -0.25]).unwrap();
        let rule = gauss_rule(&p, 240).unwrap();
        let rep = decay_b_vs_a(&p, &t, &g, &rule, 3..=12, 1e-13).unwrap();
        // eta = min(a, sigma + a_s) = min(0.9, 0.91) = 0.9; allow 20% slack
        let eta = p.a().min(g.sigma() + p.a_small());
        assert!(
            rep.slope >= 2.0 * p.r * (eta - 0.2 * eta),
            "slope {} vs eta {eta}",
            rep.slope
        );
    }

    #[test]
    fn rejects_unresolvable_degree() {
        let (p, t) = (p710(), tp());
        let g = coupling::gamma_dot(&p).unwrap();
        let rule = gauss_rule(&p, 20).unwrap();
        assert!(build_ortho(&p, &t, &g, &rule, 15).is_err());
    }
}
