//! Closed-form kernel, weight and coefficient functions of the modular pair,
//! plus the residue multipliers used by the analytic continuation.

use crate::coupling::Coupling;
use crate::error::{Result, VdError};
use crate::params::{Params, Shift, Sign, TruncationPolicy};
use crate::specfun::{self, c64, I};
use num_complex::Complex64;

/// Half-period x_tau = i a_l/2 (+ pi/2r for tau = 1).
pub fn x_tau(params: &Params, tau: u8) -> Complex64 {
    c64(tau as f64 * params.half_period(), 0.5 * params.a_large())
}

/// Half-period x-tilde_tau = i a_s/2 (+ pi/2r for tau = 1).
pub fn x_tilde_tau(params: &Params, tau: u8) -> Complex64 {
    c64(tau as f64 * params.half_period(), 0.5 * params.a_small())
}

/// x_{tau,k} = i k a_l/2 (+ pi/2r for tau = 1).
pub fn x_tau_k(params: &Params, tau: u8, k: u32) -> Complex64 {
    c64(
        tau as f64 * params.half_period(),
        0.5 * k as f64 * params.a_large(),
    )
}

/// x-tilde_{tau,k} = i k a_s/2 (+ pi/2r for tau = 1).
pub fn x_tilde_tau_k(params: &Params, tau: u8, k: u32) -> Complex64 {
    c64(
        tau as f64 * params.half_period(),
        0.5 * k as f64 * params.a_small(),
    )
}

/// Generalized Harish-Chandra function
/// c(gamma; x) = G(-2x - ia) prod_mu G(x - i gamma_mu).
pub fn c_func(
    params: &Params,
    tp: &TruncationPolicy,
    gamma: &Coupling,
    x: Complex64,
) -> Result<Complex64> {
    let ia = I * params.a();
    let mut acc = specfun::eval_g(params, tp, -2.0 * x - ia)?;
    for mu in 0..8 {
        acc *= specfun::eval_g(params, tp, x - I * gamma.gamma_mu(mu))?;
    }
    Ok(acc)
}

/// Product function P(gamma; x) = prod_mu E(x + i gamma_mu) E(-x + i gamma_mu).
pub fn p_func(
    params: &Params,
    tp: &TruncationPolicy,
    gamma: &Coupling,
    x: Complex64,
) -> Result<Complex64> {
    let mut acc = c64(1.0, 0.0);
    for mu in 0..8 {
        let ig = I * gamma.gamma_mu(mu);
        acc *= specfun::eval_e(params, tp, x + ig)?;
        acc *= specfun::eval_e(params, tp, -x + ig)?;
    }
    Ok(acc)
}

fn p_func_negated(
    params: &Params,
    tp: &TruncationPolicy,
    gamma: &Coupling,
    x: Complex64,
) -> Result<Complex64> {
    let mut acc = c64(1.0, 0.0);
    for mu in 0..8 {
        let ig = I * gamma.gamma_mu(mu);
        acc *= specfun::eval_e(params, tp, x - ig)?;
        acc *= specfun::eval_e(params, tp, -x - ig)?;
    }
    Ok(acc)
}

/// Auxiliary Harish-Chandra function
/// c_P(gamma; x) = prod_mu E(x + i gamma_mu) E(x - i gamma_mu)
///               / [(1 - e^{-4irx}) E(2x + i(a_+ - a_-)/2) E(2x - i(a_+ - a_-)/2)].
pub fn cp_func(
    params: &Params,
    tp: &TruncationPolicy,
    gamma: &Coupling,
    x: Complex64,
) -> Result<Complex64> {
    let mut num = c64(1.0, 0.0);
    for mu in 0..8 {
        let ig = I * gamma.gamma_mu(mu);
        num *= specfun::eval_e(params, tp, x + ig)?;
        num *= specfun::eval_e(params, tp, x - ig)?;
    }
    let half_diff = 0.5 * I * (params.a_plus - params.a_minus);
    let e1 = specfun::eval_e(params, tp, 2.0 * x + half_diff)?;
    let e2 = specfun::eval_e(params, tp, 2.0 * x - half_diff)?;
    let fourier = 1.0 - (-4.0 * I * params.r * x).exp();
    let den = fourier * e1 * e2;
    if den.norm() < 1e-280 {
        return Err(VdError::PoleProximity {
            re: x.re,
            im: x.im,
            dist: den.norm(),
            guard: 1e-280,
        });
    }
    Ok(num / den)
}

/// Weight w(gamma; x) = 1/(c(gamma;x) c(gamma;-x)), complex-analytic version.
pub fn w_complex(
    params: &Params,
    tp: &TruncationPolicy,
    gamma: &Coupling,
    x: Complex64,
) -> Result<Complex64> {
    let den = c_func(params, tp, gamma, x)? * c_func(params, tp, gamma, -x)?;
    if den.norm() < 1e-280 {
        // a zero of the c-product is a pole of the weight
        return Err(VdError::PoleProximity {
            re: x.re,
            im: x.im,
            dist: den.norm(),
            guard: 1e-280,
        });
    }
    Ok(1.0 / den)
}

/// Multiplier function m_H(gamma; x) = G(2x + ia) G(-2x + ia) / P(-gamma; x).
pub fn mh_func(
    params: &Params,
    tp: &TruncationPolicy,
    gamma: &Coupling,
    x: Complex64,
) -> Result<Complex64> {
    let ia = I * params.a();
    let num = specfun::eval_g(params, tp, 2.0 * x + ia)? * specfun::eval_g(params, tp, -2.0 * x + ia)?;
    Ok(num / p_func_negated(params, tp, gamma, x)?)
}

/// The scattering-type multiplier u(gamma; x) = -e^{-4irx} c(x)/c(-x).
pub fn u_func(
    params: &Params,
    tp: &TruncationPolicy,
    gamma: &Coupling,
    x: Complex64,
) -> Result<Complex64> {
    let num = c_func(params, tp, gamma, x)?;
    let den = c_func(params, tp, gamma, -x)?;
    Ok(-(-4.0 * I * params.r * x).exp() * num / den)
}

/// The weight triple (w, w_P, w_H) at real x in (0, pi/2r).
pub fn weights(
    params: &Params,
    tp: &TruncationPolicy,
    gamma: &Coupling,
    x: f64,
) -> Result<(f64, f64, f64)> {
    gamma.require_pi_tilde(params)?;
    let z = c64(x, 0.0);
    let w = w_complex(params, tp, gamma, z)?;
    let cp = cp_func(params, tp, gamma, z)?;
    let cpm = cp_func(params, tp, gamma, -z)?;
    let wp = 1.0 / (cp * cpm);
    let ia = I * params.a();
    let g2 = specfun::eval_g(params, tp, 2.0 * z + ia)? * specfun::eval_g(params, tp, -2.0 * z + ia)?;
    let wh = g2 / (p_func(params, tp, gamma, z)? * p_func_negated(params, tp, gamma, z)?);
    for (name, v) in [("w", w), ("w_P", wp), ("w_H", wh)] {
        if v.im.abs() > 1e-9 * v.norm().max(1e-30) {
            return Err(VdError::Domain(format!(
                "{name}({x}) unexpectedly non-real: {v}"
            )));
        }
    }
    Ok((w.re, wp.re, wh.re))
}

/// Kernel function S(t; x, y) = prod_{d1,d2} G(d1 x + d2 y - ia + it),
/// valid at complex arguments.
pub fn kernel_s(
    params: &Params,
    tp: &TruncationPolicy,
    t: f64,
    x: Complex64,
    y: Complex64,
) -> Result<Complex64> {
    let shift = I * (t - params.a());
    let mut acc = c64(1.0, 0.0);
    for d1 in [1.0, -1.0] {
        for d2 in [1.0, -1.0] {
            acc *= specfun::eval_g(params, tp, d1 * x + d2 * y + shift)?;
        }
    }
    Ok(acc)
}

/// Cosine-series coefficients c_n with
/// log S(t;x,y) = sum_n c_n cos(2nrx) cos(2nry) for real x, y and t in (0, 2a).
pub fn kernel_s_series_coeffs(params: &Params, tp: &TruncationPolicy, t: f64) -> Result<Vec<f64>> {
    if !(t > 0.0 && t < 2.0 * params.a()) {
        return Err(VdError::Domain(format!(
            "kernel series needs sigma in (0, 2a), got {t}"
        )));
    }
    let r = params.r;
    let tt = (-2.0 * r * t).exp();
    let uu = (-2.0 * r * (2.0 * params.a() - t)).exp();
    let (q2p, q2m) = ((-2.0 * r * params.a_plus).exp(), (-2.0 * r * params.a_minus).exp());
    let mut coeffs = Vec::new();
    let (mut tn, mut un, mut qpn, mut qmn) = (tt, uu, q2p, q2m);
    for n in 1..=tp.max_terms {
        let dn = (1.0 - qpn) * (1.0 - qmn);
        coeffs.push(4.0 * (tn - un) / (n as f64 * dn));
        if tn < tp.eps && un < tp.eps {
            return Ok(coeffs);
        }
        tn *= tt;
        un *= uu;
        qpn *= q2p;
        qmn *= q2m;
    }
    Err(VdError::NonConvergent {
        max_terms: tp.max_terms,
    })
}

/// S(t; x, y) for real x, y via the cosine double series.
pub fn kernel_s_real(params: &Params, tp: &TruncationPolicy, t: f64, x: f64, y: f64) -> Result<f64> {
    let coeffs = kernel_s_series_coeffs(params, tp, t)?;
    let mut acc = 0.0;
    for (n, cn) in coeffs.iter().enumerate() {
        let nn = (n + 1) as f64;
        acc += cn * (2.0 * nn * params.r * x).cos() * (2.0 * nn * params.r * y).cos();
    }
    Ok(acc.exp())
}

/// Telescoped kernel D_j(t;x,y) = S(t;x,y) - e^{4jr(t-a)} S(t; x - ij a_s, y).
pub fn kernel_d(
    params: &Params,
    tp: &TruncationPolicy,
    j: u32,
    t: f64,
    x: Complex64,
    y: Complex64,
) -> Result<Complex64> {
    let s1 = kernel_s(params, tp, t, x, y)?;
    let s2 = kernel_s(params, tp, t, x - I * (j as f64 * params.a_small()), y)?;
    let factor = (4.0 * j as f64 * params.r * (t - params.a())).exp();
    Ok(s1 - factor * s2)
}

/// The residue-term quotient pi_{j,tau}(gamma) of the eigenfunction identities.
pub fn pi_j_tau(params: &Params, gamma: &Coupling, j: u32, tau: u8) -> f64 {
    let r = params.r;
    let asx = params.a_small();
    let sigma = gamma.sigma();
    let mut acc = (4.0 * j as f64 * r * (sigma - params.a())).exp();
    let sign = if tau == 0 { 1.0 } else { -1.0 };
    for mu in 0..8 {
        for m in 1..=j {
            let expo = 2.0 * r * (gamma.gamma_mu(mu) + 0.5 * (j as f64 + 1.0 - 2.0 * m as f64) * asx);
            let term = 1.0 - sign * expo.exp();
            debug_assert!(term.im.abs() < 1e-10 * (1.0 + expo.exp().norm()));
            acc *= term.re;
        }
    }
    acc
}

/// Residue multiplier mu_ell(gamma; x) of the shifted eigenfunction
/// representation (the form carrying P(gamma'; x) m_H(gamma; .)).
pub fn mu_ell(
    params: &Params,
    tp: &TruncationPolicy,
    gamma: &Coupling,
    ell: u32,
    x: Complex64,
) -> Result<Complex64> {
    let lmax = params.level_count_or_zero();
    if ell > lmax {
        return Err(VdError::OutOfRange {
            index: ell as usize,
            limit: lmax as usize,
        });
    }
    let sigma = gamma.sigma();
    let asx = params.a_small();
    let ia = I * params.a();
    let la = ell as f64 * asx;
    let r_ell = specfun::residue_r(params, tp, ell)?;
    let g1 = specfun::eval_g(params, tp, I * (2.0 * sigma + la) - ia)?;
    let g2 = specfun::eval_g(params, tp, 2.0 * x - I * la - ia)?;
    let g3 = specfun::eval_g(params, tp, -2.0 * (x - I * sigma) + I * la - ia)?;
    let xi = p_func(params, tp, &gamma.dual(), x)?
        * mh_func(params, tp, gamma, x - I * (sigma + la))?;
    Ok(-4.0 * I * std::f64::consts::PI * r_ell * g1 * g2 * g3 * xi)
}

/// P-free residue coefficient nu_ell(gamma; x) =
/// -2 i pi r_ell G(2i sigma + i ell a_s - ia) G(2x - i ell a_s - ia)
/// G(-2x + 2i sigma + i ell a_s - ia) w(gamma; x - i sigma - i ell a_s),
/// so that lambda F(gamma';x) picks up nu_ell(gamma;x) F(gamma; x - i sigma - i ell a_s).
pub fn nu_ell(
    params: &Params,
    tp: &TruncationPolicy,
    gamma: &Coupling,
    ell: u32,
    x: Complex64,
) -> Result<Complex64> {
    let lmax = params.level_count_or_zero();
    if ell > lmax {
        return Err(VdError::OutOfRange {
            index: ell as usize,
            limit: lmax as usize,
        });
    }
    let sigma = gamma.sigma();
    let asx = params.a_small();
    let ia = I * params.a();
    let la = ell as f64 * asx;
    let r_ell = specfun::residue_r(params, tp, ell)?;
    let g1 = specfun::eval_g(params, tp, I * (2.0 * sigma + la) - ia)?;
    let g2 = specfun::eval_g(params, tp, 2.0 * x - I * la - ia)?;
    let g3 = specfun::eval_g(params, tp, -2.0 * (x - I * sigma) + I * la - ia)?;
    let w = w_complex(params, tp, gamma, x - I * (sigma + la))?;
    Ok(-2.0 * I * std::f64::consts::PI * r_ell * g1 * g2 * g3 * w)
}

/// Residue weight rho_{ell,tau}(gamma) of the symmetry defect sum:
/// i pi R_l(x_tau + i ell a_s) / R_s'(x-tilde_tau + i ell a_s)
/// prod_mu 1/E(-x_tau ± i ell a_s/2 ± i gamma_mu).
pub fn rho_ell_tau(
    params: &Params,
    tp: &TruncationPolicy,
    gamma: &Coupling,
    ell: u32,
    tau: u8,
) -> Result<Complex64> {
    let asx = params.a_small();
    let la = ell as f64 * asx;
    let num = specfun::eval_r_large(params, tp, x_tau(params, tau) + I * la)?;
    let den = specfun::eval_r_alpha_deriv(params, tp, asx, x_tilde_tau(params, tau) + I * la)?;
    let mut acc = I * std::f64::consts::PI * num / den;
    for mu in 0..8 {
        let ig = I * gamma.gamma_mu(mu);
        for s1 in [1.0, -1.0] {
            for s2 in [1.0, -1.0] {
                let arg = -x_tau(params, tau) + s1 * I * 0.5 * la + s2 * ig;
                acc /= specfun::eval_e(params, tp, arg)?;
            }
        }
    }
    Ok(acc)
}

/// kappa_n(sigma): the explicit geometric sequence conjecturally matching the
/// singular values.
pub fn kappa_n(params: &Params, tp: &TruncationPolicy, sigma: f64, n: u32) -> Result<f64> {
    if !(sigma > 0.0 && sigma < params.a()) {
        return Err(VdError::Domain(format!(
            "kappa_n needs sigma in (0, a), got {sigma}"
        )));
    }
    let g = specfun::eval_g(params, tp, I * (2.0 * sigma - params.a()))?;
    let pref = std::f64::consts::PI * g.re
        / (params.r * params.qprod_sign(Sign::Plus) * params.qprod_sign(Sign::Minus));
    if g.im.abs() > 1e-10 * g.norm() {
        return Err(VdError::Domain("kappa prefactor not real".into()));
    }
    Ok(pref * (-2.0 * n as f64 * params.r * sigma).exp())
}

// ---------------------------------------------------------------------------
// Shift coefficients of the difference operators
// ---------------------------------------------------------------------------

fn sign_ratio_guard(params: &Params, delta: Sign) -> Result<()> {
    // coefficient of sign delta belongs to the operator shifting by a_{-delta}
    let shift = if params.a_sign(delta.other()) == params.a_small() {
        Shift::Small
    } else {
        Shift::Large
    };
    params.require_ratio_ok(shift)
}

/// Shift coefficient V_delta(gamma; x).
pub fn coef_v(
    params: &Params,
    tp: &TruncationPolicy,
    delta: Sign,
    gamma: &Coupling,
    x: Complex64,
) -> Result<Complex64> {
    sign_ratio_guard(params, delta)?;
    let alpha = params.a_sign(delta);
    let beta = params.a_sign(delta.other());
    let mut num = c64(1.0, 0.0);
    for mu in 0..8 {
        num *= specfun::eval_r_alpha(params, tp, alpha, x - I * gamma.gamma_mu(mu) - 0.5 * I * beta)?;
    }
    let den = specfun::eval_r_alpha(params, tp, alpha, 2.0 * x + 0.5 * I * alpha)?
        * specfun::eval_r_alpha(params, tp, alpha, 2.0 * x - I * beta + 0.5 * I * alpha)?;
    if den.norm() < 1e-280 {
        return Err(VdError::PoleProximity {
            re: x.re,
            im: x.im,
            dist: den.norm(),
            guard: 1e-280,
        });
    }
    Ok(num / den)
}

/// The elliptic building block of the additive coefficient.
fn e_t_delta(
    params: &Params,
    tp: &TruncationPolicy,
    alpha: f64,
    omega_t: Complex64,
    xi: Complex64,
    x: Complex64,
) -> Result<Complex64> {
    let ia = I * params.a();
    let num = specfun::eval_r_alpha(params, tp, alpha, x + xi - ia - omega_t)?
        * specfun::eval_r_alpha(params, tp, alpha, x - xi + ia - omega_t)?;
    let den = specfun::eval_r_alpha(params, tp, alpha, x - ia - omega_t)?
        * specfun::eval_r_alpha(params, tp, alpha, x + ia - omega_t)?;
    Ok(num / den)
}

/// Additive coefficient V_{b,delta}(gamma; x); the auxiliary parameter `xi`
/// drops out of the value (a tested invariant), the default is 0.31 pi/r.
pub fn coef_vb_with_xi(
    params: &Params,
    tp: &TruncationPolicy,
    delta: Sign,
    gamma: &Coupling,
    x: Complex64,
    xi: Complex64,
) -> Result<Complex64> {
    sign_ratio_guard(params, delta)?;
    let alpha = params.a_sign(delta);
    let beta = params.a_sign(delta.other());
    let r = params.r;
    let omegas = [
        c64(0.0, 0.0),
        c64(params.half_period(), 0.0),
        0.5 * I * alpha,
        c64(-params.half_period(), 0.0) - 0.5 * I * alpha,
    ];
    let zeta_gamma: Complex64 = (0..8).map(|mu| gamma.gamma_mu(mu)).sum();
    let mut p_t = [c64(0.0, 0.0); 4];
    let mut acc0 = c64(1.0, 0.0);
    let mut acc1 = c64(1.0, 0.0);
    let mut acc2 = c64(1.0, 0.0);
    let mut acc3 = c64(1.0, 0.0);
    for mu in 0..8 {
        let ig = I * gamma.gamma_mu(mu);
        acc0 *= specfun::eval_r_alpha(params, tp, alpha, ig)?;
        acc1 *= specfun::eval_r_alpha(params, tp, alpha, ig - params.half_period())?;
        acc2 *= specfun::eval_r_alpha(params, tp, alpha, ig - 0.5 * I * alpha)?;
        acc3 *= specfun::eval_r_alpha(params, tp, alpha, ig + params.half_period() + 0.5 * I * alpha)?;
    }
    p_t[0] = acc0;
    p_t[1] = acc1;
    p_t[2] = (-2.0 * r * alpha).exp() * (r * zeta_gamma).exp() * acc2;
    p_t[3] = (-2.0 * r * alpha).exp() * (-r * zeta_gamma).exp() * acc3;

    let mut num = c64(0.0, 0.0);
    for t in 0..4 {
        let et_x = e_t_delta(params, tp, alpha, omegas[t], xi, x)?;
        let et_omega = e_t_delta(params, tp, alpha, omegas[t], xi, omegas[t])?;
        num += p_t[t] * (et_x - et_omega);
    }
    let den = 2.0
        * specfun::eval_r_alpha(params, tp, alpha, xi - 0.5 * I * alpha)?
        * specfun::eval_r_alpha(params, tp, alpha, xi - I * beta - 0.5 * I * alpha)?;
    Ok(num / den)
}

/// Default probe value of the auxiliary xi parameter.
pub fn default_xi(params: &Params) -> Complex64 {
    c64(0.31 * params.period(), 0.0)
}

pub fn coef_vb(
    params: &Params,
    tp: &TruncationPolicy,
    delta: Sign,
    gamma: &Coupling,
    x: Complex64,
) -> Result<Complex64> {
    coef_vb_with_xi(params, tp, delta, gamma, x, default_xi(params))
}

/// Shift coefficient V_{a,delta}(gamma;x) of the c-gauge operator, explicit form.
pub fn coef_va(
    params: &Params,
    tp: &TruncationPolicy,
    delta: Sign,
    gamma: &Coupling,
    x: Complex64,
) -> Result<Complex64> {
    sign_ratio_guard(params, delta)?;
    let alpha = params.a_sign(delta);
    let beta = params.a_sign(delta.other());
    let mut num = c64(1.0, 0.0);
    for mu in 0..8 {
        let ig = I * gamma.gamma_mu(mu);
        num *= specfun::eval_r_alpha(params, tp, alpha, x + 0.5 * I * beta + ig)?;
        num *= specfun::eval_r_alpha(params, tp, alpha, x + 0.5 * I * beta - ig)?;
    }
    let den = specfun::eval_r_alpha(params, tp, alpha, 2.0 * x - 0.5 * I * alpha)?
        * specfun::eval_r_alpha(params, tp, alpha, 2.0 * x + 2.0 * I * beta + 0.5 * I * alpha)?
        * specfun::eval_r_alpha(params, tp, alpha, 2.0 * x + I * beta + 0.5 * I * alpha)?
        * specfun::eval_r_alpha(params, tp, alpha, 2.0 * x + I * beta - 0.5 * I * alpha)?;
    if den.norm() < 1e-280 {
        return Err(VdError::PoleProximity {
            re: x.re,
            im: x.im,
            dist: den.norm(),
            guard: 1e-280,
        });
    }
    Ok(num / den)
}

/// V_{a,delta} through the Harish-Chandra route (Varel), used as a cross-check.
pub fn coef_va_from_c(
    params: &Params,
    tp: &TruncationPolicy,
    delta: Sign,
    gamma: &Coupling,
    x: Complex64,
) -> Result<Complex64> {
    let beta = params.a_sign(delta.other());
    let v1 = coef_v(params, tp, delta, gamma, -x)?;
    let v2 = coef_v(params, tp, delta, gamma, x + I * beta)?;
    Ok(v1 * v2)
}

/// V_{a,delta} through the polynomial Harish-Chandra route (Vaalt).
pub fn coef_va_from_cp(
    params: &Params,
    tp: &TruncationPolicy,
    delta: Sign,
    gamma: &Coupling,
    x: Complex64,
) -> Result<Complex64> {
    let beta = params.a_sign(delta.other());
    let a1 = cp_func(params, tp, gamma, -x)? / cp_func(params, tp, gamma, x)?;
    let a2 = cp_func(params, tp, gamma, x + I * beta)? / cp_func(params, tp, gamma, -x - I * beta)?;
    Ok(a1 * a2)
}

/// Shift coefficient V^H_delta(gamma;x) of the H-gauge operator (VHfin form).
pub fn coef_vh(
    params: &Params,
    tp: &TruncationPolicy,
    delta: Sign,
    gamma: &Coupling,
    x: Complex64,
) -> Result<Complex64> {
    sign_ratio_guard(params, delta)?;
    let alpha = params.a_sign(delta);
    let beta = params.a_sign(delta.other());
    let mut den = specfun::eval_r_alpha(params, tp, alpha, 2.0 * x + 0.5 * I * alpha)?
        * specfun::eval_r_alpha(params, tp, alpha, 2.0 * x - I * beta + 0.5 * I * alpha)?;
    for mu in 0..8 {
        let ig = I * gamma.gamma_mu(mu);
        den *= specfun::eval_gt(params, tp, alpha, -x + 0.5 * I * beta + ig)?;
        den *= specfun::eval_gt(params, tp, alpha, -x + 0.5 * I * beta - ig)?;
    }
    if den.norm() < 1e-280 {
        return Err(VdError::PoleProximity {
            re: x.re,
            im: x.im,
            dist: den.norm(),
            guard: 1e-280,
        });
    }
    Ok(1.0 / den)
}

/// V^H via its defining similarity transformation (VH), used as a cross-check.
pub fn coef_vh_from_p(
    params: &Params,
    tp: &TruncationPolicy,
    delta: Sign,
    gamma: &Coupling,
    x: Complex64,
) -> Result<Complex64> {
    let beta = params.a_sign(delta.other());
    let v = coef_v(params, tp, delta, gamma, x)?;
    let p1 = p_func(params, tp, gamma, x)?;
    let p2 = p_func(params, tp, gamma, x - I * beta)?;
    Ok(v * p1 / p2)
}

/// Coefficient access by shift label: the operator shifting by +/- i a_s has
/// label `Shift::Small`.
pub fn coef_v_shift(
    params: &Params,
    tp: &TruncationPolicy,
    shift: Shift,
    gamma: &Coupling,
    x: Complex64,
) -> Result<Complex64> {
    coef_v(params, tp, params.sign_of_shift(shift), gamma, x)
}

pub fn coef_vb_shift(
    params: &Params,
    tp: &TruncationPolicy,
    shift: Shift,
    gamma: &Coupling,
    x: Complex64,
) -> Result<Complex64> {
    coef_vb(params, tp, params.sign_of_shift(shift), gamma, x)
}

pub fn coef_va_shift(
    params: &Params,
    tp: &TruncationPolicy,
    shift: Shift,
    gamma: &Coupling,
    x: Complex64,
) -> Result<Complex64> {
    coef_va(params, tp, params.sign_of_shift(shift), gamma, x)
}

pub fn coef_vh_shift(
    params: &Params,
    tp: &TruncationPolicy,
    shift: Shift,
    gamma: &Coupling,
    x: Complex64,
) -> Result<Complex64> {
    coef_vh(params, tp, params.sign_of_shift(shift), gamma, x)
}

/// Minimum of the additive coefficient over [0, pi/2r]: the lower bound
/// M_delta(gamma) of the operator spectrum.
pub fn vb_min(
    params: &Params,
    tp: &TruncationPolicy,
    shift: Shift,
    gamma: &Coupling,
) -> Result<f64> {
    let delta = params.sign_of_shift(shift);
    let n = 512;
    let mut best = f64::INFINITY;
    for k in 0..=n {
        // nudge off the end points where coefficient poles may sit
        let frac = (k as f64 + 0.5) / (n as f64 + 1.0);
        let x = c64(frac * params.half_period(), 0.0);
        let v = coef_vb(params, tp, delta, gamma, x)?;
        if v.im.abs() > 1e-8 * v.norm().max(1.0) {
            return Err(VdError::Domain(format!(
                "V_b not real on the interval: {v} at {x}"
            )));
        }
        best = best.min(v.re);
    }
    Ok(best)
}

// ---------------------------------------------------------------------------
// Identity suite
// ---------------------------------------------------------------------------

/// Maximum relative deviations of the closed-form identities linking the
/// coefficient functions, evaluated on caller-supplied sample points.
#[derive(Debug, Clone, serde::Serialize)]
pub struct IdentityReport {
    pub entries: Vec<(String, f64)>,
}

impl IdentityReport {
    pub fn max_error(&self) -> f64 {
        self.entries.iter().map(|e| e.1).fold(0.0, f64::max)
    }
}

fn rel_err(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / (a.norm() + b.norm()).max(1e-300)
}

/// Evaluate the coefficient/kernel identity family at the given sample points.
pub fn identity_suite(
    params: &Params,
    tp: &TruncationPolicy,
    gamma: &Coupling,
    points: &[Complex64],
) -> Result<IdentityReport> {
    let mut vec_err: f64 = 0.0;
    let mut vew_err: f64 = 0.0;
    let mut vaalt_err: f64 = 0.0;
    let mut va_rel_err: f64 = 0.0;
    let mut vh_err: f64 = 0.0;
    let mut eid_err: f64 = 0.0;
    let mut ccid_err: f64 = 0.0;
    let mut ccp_err: f64 = 0.0;
    let mut vgid_err: f64 = 0.0;
    let mut vgidl_err: f64 = 0.0;
    let mut xi_err: f64 = 0.0;
    let mut vper_err: f64 = 0.0;

    let sigma = gamma.sigma();
    let ia = I * params.a();
    for &x in points {
        for delta in [Sign::Plus, Sign::Minus] {
            let beta = params.a_sign(delta.other());
            // (Vec): V_delta(x) = c(x)/c(x - i a_{-delta})
            let v = coef_v(params, tp, delta, gamma, x)?;
            let c1 = c_func(params, tp, gamma, x)?;
            let c2 = c_func(params, tp, gamma, x - I * beta)?;
            vec_err = vec_err.max(rel_err(v, c1 / c2));
            // (Vew): V(x + i beta) w(x + i beta) = V(-x) w(x)
            let lhs = coef_v(params, tp, delta, gamma, x + I * beta)?
                * w_complex(params, tp, gamma, x + I * beta)?;
            let rhs = coef_v(params, tp, delta, gamma, -x)? * w_complex(params, tp, gamma, x)?;
            vew_err = vew_err.max(rel_err(lhs, rhs));
            // (Va) vs (Varel) vs (Vaalt)
            let va = coef_va(params, tp, delta, gamma, x)?;
            va_rel_err = va_rel_err.max(rel_err(va, coef_va_from_c(params, tp, delta, gamma, x)?));
            vaalt_err = vaalt_err.max(rel_err(va, coef_va_from_cp(params, tp, delta, gamma, x)?));
            // (VHfin) vs (VH)
            let vh = coef_vh(params, tp, delta, gamma, x)?;
            vh_err = vh_err.max(rel_err(vh, coef_vh_from_p(params, tp, delta, gamma, x)?));
            // xi-independence of V_b
            let vb1 = coef_vb_with_xi(params, tp, delta, gamma, x, c64(0.31 * params.period(), 0.0))?;
            let vb2 = coef_vb_with_xi(params, tp, delta, gamma, x, c64(0.77 * params.period(), 0.0))?;
            xi_err = xi_err.max(rel_err(vb1, vb2));
            // quasi-periodicity (Vper)
            let alpha = params.a_sign(delta);
            let vups = coef_v(params, tp, delta, gamma, x + I * alpha)?;
            let want = (8.0 * params.r * (sigma - params.a())).exp();
            vper_err = vper_err.max(rel_err(vups / v, c64(want, 0.0)));
        }
        // (Eid): (1 - e^{-4irx}) E(2x ± i(a_+ - a_-)/2) / E(2x ± ia) = 1
        let half_diff = 0.5 * I * (params.a_plus - params.a_minus);
        let num = (1.0 - (-4.0 * I * params.r * x).exp())
            * specfun::eval_e(params, tp, 2.0 * x + half_diff)?
            * specfun::eval_e(params, tp, 2.0 * x - half_diff)?;
        let den = specfun::eval_e(params, tp, 2.0 * x + ia)? * specfun::eval_e(params, tp, 2.0 * x - ia)?;
        eid_err = eid_err.max(rel_err(num, den));
        // (ccid): c_P/c = prod E(±x + i gamma_mu) / E(±2x - ia)
        let lhs = cp_func(params, tp, gamma, x)? / c_func(params, tp, gamma, x)?;
        let rhs = p_func(params, tp, gamma, x)?
            / (specfun::eval_e(params, tp, 2.0 * x - ia)? * specfun::eval_e(params, tp, -2.0 * x - ia)?);
        ccid_err = ccid_err.max(rel_err(lhs, rhs));
        // (ccP): c(x)/c(-x) = c_P(x)/c_P(-x)
        let lhs = c_func(params, tp, gamma, x)? / c_func(params, tp, gamma, -x)?;
        let rhs = cp_func(params, tp, gamma, x)? / cp_func(params, tp, gamma, -x)?;
        ccp_err = ccp_err.max(rel_err(lhs, rhs));
        // (VGid)/(VGidl): residue-cancellation identities behind the
        // eigenfunction continuation, for shift a_s (ell = 0) and a_l (ell <= L)
        let ds = params.sign_of_shift(Shift::Small);
        let lhs = specfun::eval_g(params, tp, 2.0 * x - ia)?
            * specfun::eval_g(params, tp, -2.0 * x + 2.0 * I * sigma - ia)?
            * coef_v(params, tp, ds, gamma, x + I * (params.a_small() - sigma))?;
        let rhs = coef_v(params, tp, ds, &gamma.dual(), -x)?
            * specfun::eval_g(params, tp, 2.0 * (x + I * params.a_small()) - ia)?
            * specfun::eval_g(params, tp, 2.0 * I * sigma - 2.0 * (x + I * params.a_small()) - ia)?;
        vgid_err = vgid_err.max(rel_err(lhs, rhs));
        let dl = params.sign_of_shift(Shift::Large);
        for ell in 0..=params.level_count_or_zero() {
            let la = ell as f64 * params.a_small();
            let lhs = specfun::eval_g(params, tp, 2.0 * x - ia - I * la)?
                * specfun::eval_g(params, tp, -2.0 * x + 2.0 * I * sigma - ia + I * la)?
                * coef_v(params, tp, dl, gamma, x + I * (params.a_large() - sigma - la))?;
            let rhs = coef_v(params, tp, dl, &gamma.dual(), -x)?
                * specfun::eval_g(params, tp, 2.0 * x + 2.0 * I * params.a_large() - ia - I * la)?
                * specfun::eval_g(
                    params,
                    tp,
                    -2.0 * x - 2.0 * I * params.a_large() + 2.0 * I * sigma - ia + I * la,
                )?;
            vgidl_err = vgidl_err.max(rel_err(lhs, rhs));
        }
    }
    Ok(IdentityReport {
        entries: vec![
            ("Vec".into(), vec_err),
            ("Vew".into(), vew_err),
            ("Va-Varel".into(), va_rel_err),
            ("Vaalt".into(), vaalt_err),
            ("VH-VHfin".into(), vh_err),
            ("Eid".into(), eid_err),
            ("ccid".into(), ccid_err),
            ("ccP".into(), ccp_err),
            ("VGid".into(), vgid_err),
            ("VGidl".into(), vgidl_err),
            ("Vb-xi-independence".into(), xi_err),
            ("Vper".into(), vper_err),
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::{self, Coupling};

    fn p710() -> Params {
        Params::new(1.0, 0.7, 1.1).unwrap()
    }

    fn tp() -> TruncationPolicy {
        TruncationPolicy::default()
    }

    fn generic_real(p: &Params) -> Coupling {
        Coupling::real(p, [-0.41, -0.27, -0.16, -0.35, 0.12, -0.22, 0.19, -0.08]).unwrap()
    }

    #[test]
    fn c_is_one_for_free_coupling() {
        let (p, t) = (p710(), tp());
        let gf = coupling::gamma_free(&p);
        for &x in &[c64(0.31, 0.0), c64(0.87, 0.11), c64(0.2, -0.4)] {
            let c = c_func(&p, &t, &gf, x).unwrap();
            assert!(rel_err(c, c64(1.0, 0.0)) < 1e-11, "c = {c}");
        }
    }

    #[test]
    fn c_of_lame_is_g_ratio() {
        let (p, t) = (p710(), tp());
        let b = 0.37;
        let gl = coupling::gamma_lame(&p, b).unwrap();
        let ia = I * p.a();
        for &x in &[c64(0.23, 0.05), c64(0.71, -0.13)] {
            let c = c_func(&p, &t, &gl, x).unwrap();
            let want = specfun::eval_g(&p, &t, 2.0 * x + ia - I * b).unwrap()
                / specfun::eval_g(&p, &t, 2.0 * x + ia).unwrap();
            assert!(rel_err(c, want) < 1e-11);
            // the dual gives the same c-function (self-dual family)
            let cd = c_func(&p, &t, &gl.dual(), x).unwrap();
            assert!(rel_err(c, cd) < 1e-11);
        }
    }

    #[test]
    fn cp_and_u_free_lame_values() {
        let (p, t) = (p710(), tp());
        let gd = coupling::gamma_dot(&p).unwrap();
        for &x in &[c64(0.31, 0.0), c64(0.52, 0.07)] {
            let cp = cp_func(&p, &t, &gd, x).unwrap();
            let want = 1.0 / (1.0 - (-4.0 * I * p.r * x).exp());
            assert!(rel_err(cp, want) < 1e-11, "cp = {cp}, want {want}");
            let u = u_func(&p, &t, &gd, x).unwrap();
            assert!(rel_err(u, c64(1.0, 0.0)) < 1e-11);
        }
    }

    #[test]
    fn p_func_lame_is_dual_e_pair() {
        let (p, t) = (p710(), tp());
        let b = 0.42;
        let gl = coupling::gamma_lame(&p, b).unwrap();
        let ia = I * p.a();
        let x = c64(0.37, 0.21);
        let got = p_func(&p, &t, &gl, x).unwrap();
        let want = specfun::eval_e(&p, &t, 2.0 * x - ia + I * b).unwrap()
            * specfun::eval_e(&p, &t, -2.0 * x - ia + I * b).unwrap();
        assert!(rel_err(got, want) < 1e-11);
    }

    #[test]
    fn weight_free_lame_is_theta_square() {
        let (p, t) = (p710(), tp());
        let gd = coupling::gamma_dot(&p).unwrap();
        for x in [0.22, 0.61, 1.31] {
            let (w, _, _) = weights(&p, &t, &gd, x).unwrap();
            let s = specfun::eval_s_large(&p, &t, c64(2.0 * x, 0.0)).unwrap();
            let want = (p.p_large() * s.re).powi(2);
            assert!((w - want).abs() < 1e-10 * want.abs().max(1.0), "w {w} want {want}");
            assert!(w > 0.0);
        }
    }

    #[test]
    fn weight_gamma_l_flip() {
        let (p, t) = (p710(), tp());
        let gl = coupling::gamma_l(&p).unwrap();
        for x in [0.3, 0.9] {
            let (w, _, _) = weights(&p, &t, &gl, x).unwrap();
            let s1 = specfun::eval_s_large(&p, &t, c64(x, 0.0)).unwrap().re;
            let s2 = specfun::eval_s_large(&p, &t, c64(x + p.half_period(), 0.0)).unwrap().re;
            let want = p.p_large().powi(4) * s1 * s1 * s2 * s2;
            assert!((w - want).abs() < 1e-9 * want.abs().max(1.0), "w {w} want {want}");
        }
    }

    #[test]
    fn weight_positive_and_vanishing_quadratically() {
        let (p, t) = (p710(), tp());
        let g = generic_real(&p);
        for k in 1..100 {
            let x = k as f64 / 100.0 * p.half_period();
            let (w, wp, wh) = weights(&p, &t, &g, x).unwrap();
            assert!(w > 0.0 && wp > 0.0 && wh > 0.0, "at {x}: {w} {wp} {wh}");
        }
        // double zero at x = 0: w(eps)/eps^2 bounded
        let (w1, _, _) = weights(&p, &t, &g, 1e-4).unwrap();
        let (w2, _, _) = weights(&p, &t, &g, 2e-4).unwrap();
        let ratio = w2 / w1;
        assert!((ratio - 4.0).abs() < 0.01, "quadratic contact, got ratio {ratio}");
    }

    #[test]
    fn kernel_s_is_one_at_sigma_a() {
        let (p, t) = (p710(), tp());
        let s = kernel_s(&p, &t, p.a(), c64(0.3, 0.1), c64(0.7, -0.2)).unwrap();
        assert!(rel_err(s, c64(1.0, 0.0)) < 1e-12);
        let sr = kernel_s_real(&p, &t, p.a(), 0.3, 0.7).unwrap();
        assert!((sr - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kernel_s_series_matches_product() {
        let (p, t) = (p710(), tp());
        for sigma in [0.2, 0.55, 1.3] {
            for (x, y) in [(0.31, 0.87), (0.11, 1.41)] {
                let a = kernel_s_real(&p, &t, sigma, x, y).unwrap();
                let b = kernel_s(&p, &t, sigma, c64(x, 0.0), c64(y, 0.0)).unwrap();
                assert!(rel_err(c64(a, 0.0), b) < 1e-12, "sigma {sigma}");
            }
        }
    }

    #[test]
    fn kernel_s_sigma_k_reduction() {
        let (p, t) = (p710(), tp());
        // K = 1: S(a - a_s/2; x, y) = 1/[R_l(x+y) R_l(x-y)]
        let sigma1 = p.a() - 0.5 * p.a_small();
        let (x, y) = (c64(0.41, 0.0), c64(0.93, 0.0));
        let got = kernel_s(&p, &t, sigma1, x, y).unwrap();
        let want = 1.0
            / (specfun::eval_r_large(&p, &t, x + y).unwrap()
                * specfun::eval_r_large(&p, &t, x - y).unwrap());
        assert!(rel_err(got, want) < 1e-11);
    }

    #[test]
    fn kernel_d_vanishes_at_crux_points() {
        let (p, t) = (p710(), tp());
        let sigma = 0.46;
        for tau in [0u8, 1u8] {
            for j in 1..=p.level_count_or_zero() {
                let x = x_tau(&p, tau) + 0.5 * I * (j as f64 * p.a_small());
                for y in [0.17, 0.62, 1.02] {
                    let d = kernel_d(&p, &t, j, sigma, x, c64(y, 0.0)).unwrap();
                    let scale = kernel_s(&p, &t, sigma, x_tau(&p, tau) - 0.5 * I * (j as f64 * p.a_small()), c64(y, 0.0))
                        .unwrap()
                        .norm();
                    assert!(d.norm() / scale < 1e-11, "tau {tau} j {j} y {y}: {}", d.norm() / scale);
                }
            }
        }
        // generic x: nonzero
        let d = kernel_d(&p, &t, 1, sigma, c64(0.4, 0.3), c64(0.6, 0.0)).unwrap();
        assert!(d.norm() > 1e-6);
    }

    #[test]
    fn kernel_d_vanishes_for_larger_level_counts() {
        let p = Params::new(1.0, 0.4, 1.5).unwrap();
        let t = tp();
        assert_eq!(p.level_count(), Some(3));
        let sigma = 0.53;
        for tau in [0u8, 1u8] {
            for j in 1..=3 {
                let x = x_tau(&p, tau) + 0.5 * I * (j as f64 * p.a_small());
                let d = kernel_d(&p, &t, j, sigma, x, c64(0.44, 0.0)).unwrap();
                let scale = kernel_s(&p, &t, sigma, x - I * (j as f64 * p.a_small()), c64(0.44, 0.0))
                    .unwrap()
                    .norm();
                assert!(d.norm() / scale < 1e-11, "tau {tau} j {j}");
            }
        }
    }

    #[test]
    fn kernel_identity_closed_form() {
        let (p, t) = (p710(), tp());
        for gamma in [generic_real(&p), coupling::gamma_s(&p).unwrap()] {
            let sigma = gamma.sigma();
            let dual = gamma.dual();
            for delta in [Sign::Plus, Sign::Minus] {
                let beta = p.a_sign(delta.other());
                for (x, y) in [(c64(0.31, 0.04), c64(0.87, -0.06)), (c64(1.13, 0.09), c64(0.41, 0.02))] {
                    let apply_x = coef_v(&p, &t, delta, &gamma, x).unwrap()
                        * kernel_s(&p, &t, sigma, x - I * beta, y).unwrap()
                        + coef_v(&p, &t, delta, &gamma, -x).unwrap()
                            * kernel_s(&p, &t, sigma, x + I * beta, y).unwrap()
                        + coef_vb(&p, &t, delta, &gamma, x).unwrap()
                            * kernel_s(&p, &t, sigma, x, y).unwrap();
                    let apply_y = coef_v(&p, &t, delta, &dual, y).unwrap()
                        * kernel_s(&p, &t, sigma, x, y - I * beta).unwrap()
                        + coef_v(&p, &t, delta, &dual, -y).unwrap()
                            * kernel_s(&p, &t, sigma, x, y + I * beta).unwrap()
                        + coef_vb(&p, &t, delta, &dual, y).unwrap()
                            * kernel_s(&p, &t, sigma, x, y).unwrap();
                    let err = rel_err(apply_x, apply_y);
                    assert!(err < 1e-10, "delta {delta:?} err {err}");
                }
            }
        }
    }

    #[test]
    fn free_coupling_coefficients() {
        let (p, t) = (p710(), tp());
        let gf = coupling::gamma_free(&p);
        for delta in [Sign::Plus, Sign::Minus] {
            for &x in &[c64(0.37, 0.0), c64(0.81, 0.13)] {
                let v = coef_v(&p, &t, delta, &gf, x).unwrap();
                assert!(rel_err(v, c64(1.0, 0.0)) < 1e-10, "V = {v}");
                let va = coef_va(&p, &t, delta, &gf, x).unwrap();
                assert!(rel_err(va, c64(1.0, 0.0)) < 1e-10);
                let vb = coef_vb(&p, &t, delta, &gf, x).unwrap();
                assert!(vb.norm() < 1e-10, "V_b = {vb}");
            }
        }
    }

    #[test]
    fn lame_coupling_coefficients() {
        let (p, t) = (p710(), tp());
        // gamma_L(a_-): V_{a,+} = e^{-4 r a_-}, V_{a,-} = e^{-4 r a_+},
        // V_- = e^{8irx} e^{2 r a_+}, V_{b,±} = 0
        let gl = coupling::gamma_lame(&p, p.a_minus).unwrap(); // sigma = a - a_- < 0, coefficient-level only
        let x = c64(0.43, 0.0);
        let vap = coef_va(&p, &t, Sign::Plus, &gl, x).unwrap();
        assert!(rel_err(vap, c64((-4.0 * p.a_minus).exp(), 0.0)) < 1e-10, "{vap}");
        let vam = coef_va(&p, &t, Sign::Minus, &gl, x).unwrap();
        assert!(rel_err(vam, c64((-4.0 * p.a_plus).exp(), 0.0)) < 1e-10);
        let vm = coef_v(&p, &t, Sign::Minus, &gl, x).unwrap();
        let want = (8.0 * I * p.r * x).exp() * (2.0 * p.a_plus).exp();
        assert!(rel_err(vm, want) < 1e-10, "{vm} vs {want}");
        for delta in [Sign::Plus, Sign::Minus] {
            let vb = coef_vb(&p, &t, delta, &gl, x).unwrap();
            assert!(vb.norm() < 1e-10);
        }
        // gamma-dot: V_{a,delta} = e^{-4 r a_{-delta}} (free Lame)
        let gd = coupling::gamma_dot(&p).unwrap();
        let vad = coef_va(&p, &t, Sign::Plus, &gd, x).unwrap();
        assert!(rel_err(vad, c64((-4.0 * p.a_minus).exp(), 0.0)) < 1e-10);
    }

    #[test]
    fn vb_is_real_on_interval_and_min_is_finite() {
        let (p, t) = (p710(), tp());
        let g = generic_real(&p);
        let m_s = vb_min(&p, &t, Shift::Small, &g).unwrap();
        let m_l = vb_min(&p, &t, Shift::Large, &g).unwrap();
        assert!(m_s.is_finite() && m_l.is_finite());
    }

    #[test]
    fn identity_suite_generic_couplings() {
        let (p, t) = (p710(), tp());
        let pts = [c64(0.31, 0.07), c64(0.72, -0.11), c64(1.21, 0.05)];
        for gamma in [generic_real(&p), coupling::gamma_s(&p).unwrap()] {
            let rep = identity_suite(&p, &t, &gamma, &pts).unwrap();
            for (name, err) in &rep.entries {
                assert!(*err < 1e-10, "{name}: {err:.3e}");
            }
        }
    }

    #[test]
    fn self_duality_of_recipe_couplings() {
        let (p, t) = (p710(), tp());
        let c1 = coupling::pi_rs1(&p, 0.4, [-0.6, -0.5, -0.35, -0.25]).unwrap();
        let c2 = coupling::pi_rs2(&p, 0.21, [-0.5, -0.3, -0.45, -0.25]).unwrap();
        for c in [c1, c2] {
            for &x in &[c64(0.27, 0.0), c64(0.64, 0.09)] {
                let a = c_func(&p, &t, &c, x).unwrap();
                let b = c_func(&p, &t, &c.dual(), x).unwrap();
                assert!(rel_err(a, b) < 1e-11);
            }
        }
    }

    #[test]
    fn d8_invariance_of_va_and_vh() {
        let (p, t) = (p710(), tp());
        let g = generic_real(&p);
        let perm = g.permute(&[3, 1, 4, 0, 2, 7, 5, 6]);
        let flip = g.flip(0b0011_0000);
        let x = c64(0.53, 0.08);
        for delta in [Sign::Plus, Sign::Minus] {
            let base_va = coef_va(&p, &t, delta, &g, x).unwrap();
            let base_vh = coef_vh(&p, &t, delta, &g, x).unwrap();
            for img in [&perm, &flip] {
                assert!(rel_err(base_va, coef_va(&p, &t, delta, img, x).unwrap()) < 1e-11);
                assert!(rel_err(base_vh, coef_vh(&p, &t, delta, img, x).unwrap()) < 1e-11);
            }
            // V_b needs EVEN flips (p_2 flips sign under odd ones)
            let base_vb = coef_vb(&p, &t, delta, &g, x).unwrap();
            assert!(rel_err(base_vb, coef_vb(&p, &t, delta, &flip, x).unwrap()) < 1e-11);
        }
    }

    #[test]
    fn conjugation_of_va_and_vb() {
        let (p, t) = (p710(), tp());
        let g = generic_real(&p);
        let x = c64(0.44, 0.19);
        for delta in [Sign::Plus, Sign::Minus] {
            // V*_a(x) = V_a(-x)
            let star = coef_va(&p, &t, delta, &g, x.conj()).unwrap().conj();
            let want = coef_va(&p, &t, delta, &g, -x).unwrap();
            assert!(rel_err(star, want) < 1e-11);
            // V_b real on the real line
            let vb = coef_vb(&p, &t, delta, &g, c64(0.37, 0.0)).unwrap();
            assert!(vb.im.abs() < 1e-11 * vb.norm().max(1e-10));
        }
    }

    #[test]
    fn mu_edge_zeros_and_sigma_k_vanishing() {
        let (p, t) = (p710(), tp());
        let g = generic_real(&p); // sigma = 0.295
        let sigma = g.sigma();
        // (edgezero): mu_ell vanishes at i sigma + i ell a_s + k pi/2r
        for ell in 0..=1u32 {
            let base = I * (sigma + ell as f64 * p.a_small());
            for k in 0..2 {
                let x = base + c64(k as f64 * 0.5 * p.half_period() * 2.0, 0.0) + c64(1e-6, 0.0);
                let m = mu_ell(&p, &t, &g, ell, x).unwrap();
                let m_ref = mu_ell(&p, &t, &g, ell, x + c64(0.1, 0.0)).unwrap();
                assert!(
                    m.norm() < 1e-4 * m_ref.norm().max(1e-12),
                    "ell {ell} k {k}: {} vs {}",
                    m.norm(),
                    m_ref.norm()
                );
            }
        }
        // (muvan): sigma = sigma_K kills mu_ell for ell >= K; K = 1 here
        let sig1 = p.a() - 0.5 * p.a_small(); // 0.55
        let lower = [-0.6, -0.5, -0.42, -0.31];
        let gk = coupling::pi_rs1(&p, sig1, lower).unwrap();
        assert!((gk.sigma() - sig1).abs() < 1e-12);
        let x = c64(0.37, sig1 + 1.05 * p.a_small());
        let m1 = mu_ell(&p, &t, &gk, 1, x).unwrap();
        let m0 = mu_ell(&p, &t, &gk, 0, x).unwrap();
        assert!(m1.norm() < 1e-9 * m0.norm().max(1e-12), "m1 {} m0 {}", m1.norm(), m0.norm());
    }

    #[test]
    fn mu_quotient_limit_matches_pi_factor() {
        let (p, t) = (p710(), tp());
        let g = generic_real(&p);
        let sigma = g.sigma();
        // lim_{x->x_tau} mu_{k+j}/mu_k at x + i sigma + i(2k+j) a_s/2 = -pi_{j,tau}
        let (k, j) = (0u32, 1u32);
        for tau in [0u8, 1u8] {
            let quot_at = |h: f64| {
                let arg =
                    x_tau(&p, tau) + c64(h, 0.0) + I * (sigma + 0.5 * (2 * k + j) as f64 * p.a_small());
                mu_ell(&p, &t, &g, k + j, arg).unwrap() / mu_ell(&p, &t, &g, k, arg).unwrap()
            };
            let got = 2.0 * quot_at(0.5e-6) - quot_at(1e-6);
            let want = -pi_j_tau(&p, &g, j, tau);
            assert!(
                rel_err(got, c64(want, 0.0)) < 1e-4,
                "tau {tau}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn p_ratio_limit_lemma() {
        let (p, t) = (p710(), tp());
        let g = generic_real(&p);
        let dual = g.dual();
        let j = 1u32;
        for tau in [0u8, 1u8] {
            let ja = 0.5 * I * (j as f64 * p.a_small());
            let ratio_at = |h: f64| {
                let x = x_tau(&p, tau) + c64(h, 0.0);
                p_func(&p, &t, &dual, x + ja).unwrap() / p_func(&p, &t, &dual, x - ja).unwrap()
            };
            // one-step Richardson removes the linear offset error
            let got = 2.0 * ratio_at(0.5e-6) - ratio_at(1e-6);
            let mut want = 1.0;
            let sign = if tau == 0 { 1.0 } else { -1.0 };
            for mu in 0..8 {
                for m in 1..=j {
                    let e = 2.0
                        * (dual.gamma_mu(mu)
                            + 0.5 * (j as f64 + 1.0 - 2.0 * m as f64) * p.a_small());
                    want *= 1.0 - sign * e.exp().re;
                }
            }
            assert!(rel_err(got, c64(want, 0.0)) < 1e-6, "tau {tau}: {got} vs {want}");
        }
    }

    #[test]
    fn kappa_reference_value_and_ratio() {
        let (p, t) = (p710(), tp());
        let k3 = kappa_n(&p, &t, 0.4, 3).unwrap();
        assert!((k3 - 0.52506931643410375204).abs() < 1e-12 * k3.abs());
        let k4 = kappa_n(&p, &t, 0.4, 4).unwrap();
        assert!((k4 / k3 - (-2.0 * 0.4f64).exp()).abs() < 1e-12);
        assert!(kappa_n(&p, &t, 1.2, 0).is_err());
    }

    #[test]
    fn ratio_guard_blocks_bad_shift_ratio() {
        let t = tp();
        let p = Params::new(1.0, 0.55, 1.1).unwrap(); // a_s/a_l = 1/2
        let g = Coupling::real(&p, [-0.3, -0.2, -0.1, -0.15, -0.05, -0.12, 0.08, -0.06]).unwrap();
        assert!(matches!(
            coef_v(&p, &t, p.sign_of_shift(Shift::Small), &g, c64(0.3, 0.0)),
            Err(VdError::RatioGuard(_))
        ));
    }
}
