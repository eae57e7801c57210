//! The elliptic gamma function `G`, its entire factor `E`, the renormalized
//! theta functions `R_+/-` and `s_+/-`, and the trigonometric gamma `G_t`.
//!
//! Every function offers the exponential-series form inside its convergence
//! strip and the defining double/single product elsewhere; the two routes
//! agree within the truncation budget and are cross-checked in the tests.

use crate::error::{Result, VdError};
use crate::params::{Params, Sign, TruncationPolicy};
use num_complex::Complex64;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Fractional part of the switchover margin: series is used for
/// |Im z| < a (1 - SERIES_MARGIN), products beyond.
const SERIES_MARGIN: f64 = 0.05;

/// Distance from `x` to the nearest point of the lattice `step * Z`.
fn dist_to_lattice(x: f64, step: f64) -> f64 {
    let m = (x / step).round();
    (x - m * step).abs()
}

/// Distance from z to the pole lattice of G:
/// p_{klm} = -i(a + k a_+ + l a_-) + m pi/r, with k, l >= 0.
pub fn dist_to_g_poles(params: &Params, z: Complex64) -> f64 {
    let dx = dist_to_lattice(z.re, params.period());
    let y = -z.im - params.a(); // want y = k a_+ + l a_-, k,l >= 0
    if y < 0.0 {
        return (dx * dx + y * y).sqrt();
    }
    let mut best = f64::INFINITY;
    let kmax = (y / params.a_plus).floor() as i64 + 1;
    for k in 0..=kmax {
        let rem = y - k as f64 * params.a_plus;
        let l = (rem / params.a_minus).round().max(0.0);
        let dy = (rem - l * params.a_minus).abs();
        let d = (dx * dx + dy * dy).sqrt();
        if d < best {
            best = d;
        }
    }
    best
}

/// Distance from z to the zero lattice of G (mirror of the poles).
pub fn dist_to_g_zeros(params: &Params, z: Complex64) -> f64 {
    dist_to_g_poles(params, -z)
}

/// Distance from z to the poles of G_t(r, alpha; .): z = -i(2n+1)alpha/2 + m pi/r.
pub fn dist_to_gt_poles(params: &Params, alpha: f64, z: Complex64) -> f64 {
    let dx = dist_to_lattice(z.re, params.period());
    let y = -z.im;
    if y < 0.0 {
        return (dx * dx + (y - 0.5 * alpha) * (y - 0.5 * alpha)).sqrt();
    }
    let n = (y / alpha - 0.5).round().max(0.0);
    let dy = (y - (2.0 * n + 1.0) * 0.5 * alpha).abs();
    (dx * dx + dy * dy).sqrt()
}

fn check_g_pole(params: &Params, z: Complex64) -> Result<()> {
    let guard = params.pole_guard();
    let d = dist_to_g_poles(params, z);
    if d < guard {
        return Err(VdError::PoleProximity {
            re: z.re,
            im: z.im,
            dist: d,
            guard,
        });
    }
    Ok(())
}

fn check_im_sane(params: &Params, z: Complex64) -> Result<()> {
    if !z.re.is_finite() || !z.im.is_finite() || z.im.abs() > 60.0 / params.r {
        return Err(VdError::Domain(format!(
            "argument ({}, {}) outside the supported band",
            z.re, z.im
        )));
    }
    Ok(())
}

/// i g(z) = sum_n (w_+^n - w_-^n) / (n D_n) with w_± = e^{±2irz - 2ra},
/// D_n = (1 - q_+^{2n})(1 - q_-^{2n}); valid for |Im z| < a.
fn ig_series(params: &Params, tp: &TruncationPolicy, z: Complex64) -> Result<Complex64> {
    let r = params.r;
    let wp = (2.0 * I * r * z - c64(2.0 * r * params.a(), 0.0)).exp();
    let wm = (-2.0 * I * r * z - c64(2.0 * r * params.a(), 0.0)).exp();
    let q2p = (-2.0 * r * params.a_plus).exp();
    let q2m = (-2.0 * r * params.a_minus).exp();
    let mut acc = Complex64::default();
    let (mut tp_pow, mut tm_pow) = (wp, wm);
    let (mut qp_pow, mut qm_pow) = (q2p, q2m);
    for n in 1..=tp.max_terms {
        let dn = (1.0 - qp_pow) * (1.0 - qm_pow);
        acc += (tp_pow - tm_pow) / (n as f64 * dn);
        if tp_pow.norm() < tp.eps && tm_pow.norm() < tp.eps {
            return Ok(acc);
        }
        tp_pow *= wp;
        tm_pow *= wm;
        qp_pow *= q2p;
        qm_pow *= q2m;
    }
    Err(VdError::NonConvergent {
        max_terms: tp.max_terms,
    })
}

/// log E(z) = -sum_n w_-^n / (n D_n); valid for Im z < a.
fn log_e_series(params: &Params, tp: &TruncationPolicy, z: Complex64) -> Result<Complex64> {
    let r = params.r;
    let wm = (-2.0 * I * r * z - c64(2.0 * r * params.a(), 0.0)).exp();
    let q2p = (-2.0 * r * params.a_plus).exp();
    let q2m = (-2.0 * r * params.a_minus).exp();
    let mut acc = Complex64::default();
    let mut t_pow = wm;
    let (mut qp_pow, mut qm_pow) = (q2p, q2m);
    for n in 1..=tp.max_terms {
        let dn = (1.0 - qp_pow) * (1.0 - qm_pow);
        acc -= t_pow / (n as f64 * dn);
        if t_pow.norm() < tp.eps {
            return Ok(acc);
        }
        t_pow *= wm;
        qp_pow *= q2p;
        qm_pow *= q2m;
    }
    Err(VdError::NonConvergent {
        max_terms: tp.max_terms,
    })
}

/// Defining double product of E(z).
fn e_product(params: &Params, tp: &TruncationPolicy, z: Complex64) -> Result<Complex64> {
    let r = params.r;
    let w = (-2.0 * I * r * z).exp(); // e^{-2irz}
    let wmag = w.norm();
    let (qp, qm) = ((-r * params.a_plus).exp(), (-r * params.a_minus).exp());
    let (qp2, qm2) = (qp * qp, qm * qm);
    let mut acc = c64(1.0, 0.0);
    let mut row = qp * qm; // e^{-(2m+1) r a_+ - r a_-} at m = 0, n = 0
    for _m in 0..tp.max_terms {
        if row * wmag.max(1.0) < tp.eps {
            return Ok(acc);
        }
        let mut b = row;
        for _n in 0..tp.max_terms {
            acc *= 1.0 - b * w;
            b *= qm2;
            if b * wmag.max(1.0) < tp.eps {
                break;
            }
        }
        row *= qp2;
    }
    Err(VdError::NonConvergent {
        max_terms: tp.max_terms,
    })
}

/// E(r, a_+, a_-; z): entire, zeros at i(a + k a_+ + l a_-) + m pi/r.
pub fn eval_e(params: &Params, tp: &TruncationPolicy, z: Complex64) -> Result<Complex64> {
    check_im_sane(params, z)?;
    if z.im < params.a() * (1.0 - SERIES_MARGIN) {
        Ok(log_e_series(params, tp, z)?.exp())
    } else {
        e_product(params, tp, z)
    }
}

/// The elliptic gamma function G(r, a_+, a_-; z).
pub fn eval_g(params: &Params, tp: &TruncationPolicy, z: Complex64) -> Result<Complex64> {
    check_im_sane(params, z)?;
    check_g_pole(params, z)?;
    if z.im.abs() < params.a() * (1.0 - SERIES_MARGIN) {
        Ok(ig_series(params, tp, z)?.exp())
    } else {
        // G = E(z)/E(-z); one of the two factors is always within the series strip
        let num = eval_e(params, tp, z)?;
        let den = eval_e(params, tp, -z)?;
        Ok(num / den)
    }
}

/// R(r, alpha; z), entire, even, pi/r-periodic.
pub fn eval_r_alpha(
    params: &Params,
    tp: &TruncationPolicy,
    alpha: f64,
    z: Complex64,
) -> Result<Complex64> {
    check_im_sane(params, z)?;
    let r = params.r;
    if z.im.abs() < 0.5 * alpha * (1.0 - SERIES_MARGIN) {
        // log R = -sum (v_+^n + v_-^n)/(n (1 - q^{2n})), v_± = e^{±2irz - r alpha}
        let vp = (2.0 * I * r * z - c64(r * alpha, 0.0)).exp();
        let vm = (-2.0 * I * r * z - c64(r * alpha, 0.0)).exp();
        let q2 = (-2.0 * r * alpha).exp();
        let mut acc = Complex64::default();
        let (mut pp, mut pm, mut qq) = (vp, vm, q2);
        for n in 1..=tp.max_terms {
            acc -= (pp + pm) / (n as f64 * (1.0 - qq));
            if pp.norm() < tp.eps && pm.norm() < tp.eps {
                return Ok(acc.exp());
            }
            pp *= vp;
            pm *= vm;
            qq *= q2;
        }
        Err(VdError::NonConvergent {
            max_terms: tp.max_terms,
        })
    } else {
        let w = (2.0 * I * r * z).exp();
        let winv = c64(1.0, 0.0) / w;
        let q2 = (-2.0 * r * alpha).exp();
        let mut acc = c64(1.0, 0.0);
        let mut ck = (-r * alpha).exp();
        let big = w.norm().max(winv.norm());
        for _k in 0..tp.max_terms {
            acc *= (1.0 - ck * w) * (1.0 - ck * winv);
            ck *= q2;
            if ck * big < tp.eps {
                return Ok(acc);
            }
        }
        Err(VdError::NonConvergent {
            max_terms: tp.max_terms,
        })
    }
}

/// R_delta(z) = R(r, a_delta; z).
pub fn eval_r(params: &Params, tp: &TruncationPolicy, delta: Sign, z: Complex64) -> Result<Complex64> {
    eval_r_alpha(params, tp, params.a_sign(delta), z)
}

pub fn eval_r_small(params: &Params, tp: &TruncationPolicy, z: Complex64) -> Result<Complex64> {
    eval_r_alpha(params, tp, params.a_small(), z)
}

pub fn eval_r_large(params: &Params, tp: &TruncationPolicy, z: Complex64) -> Result<Complex64> {
    eval_r_alpha(params, tp, params.a_large(), z)
}

/// d/dz R(r, alpha; z), numerically stable also at the zeros of R.
///
/// Uses prefix/suffix products over the factors so a single vanishing factor
/// contributes exactly its derivative.
pub fn eval_r_alpha_deriv(
    params: &Params,
    tp: &TruncationPolicy,
    alpha: f64,
    z: Complex64,
) -> Result<Complex64> {
    let r = params.r;
    let w = (2.0 * I * r * z).exp();
    let winv = c64(1.0, 0.0) / w;
    let q2 = (-2.0 * r * alpha).exp();
    let big = w.norm().max(winv.norm());
    let mut factors: Vec<Complex64> = Vec::new();
    let mut dfactors: Vec<Complex64> = Vec::new();
    let mut ck = (-r * alpha).exp();
    for _k in 0..tp.max_terms {
        // f = (1 - c w), f' = -2ir c w ; g = (1 - c/w), g' = +2ir c/w
        factors.push(1.0 - ck * w);
        dfactors.push(-2.0 * I * r * ck * w);
        factors.push(1.0 - ck * winv);
        dfactors.push(2.0 * I * r * ck * winv);
        ck *= q2;
        if ck * big < tp.eps {
            break;
        }
    }
    let m = factors.len();
    let mut prefix = vec![c64(1.0, 0.0); m + 1];
    for k in 0..m {
        prefix[k + 1] = prefix[k] * factors[k];
    }
    let mut suffix = vec![c64(1.0, 0.0); m + 1];
    for k in (0..m).rev() {
        suffix[k] = suffix[k + 1] * factors[k];
    }
    let mut acc = Complex64::default();
    for k in 0..m {
        acc += dfactors[k] * prefix[k] * suffix[k + 1];
    }
    Ok(acc)
}

/// s_delta(z) = -i e^{irz} R_delta(z + i a_delta/2) / p_delta: entire, odd,
/// pi/r-antiperiodic.
pub fn eval_s(params: &Params, tp: &TruncationPolicy, delta: Sign, z: Complex64) -> Result<Complex64> {
    let a_d = params.a_sign(delta);
    let rz = eval_r_alpha(params, tp, a_d, z + 0.5 * I * a_d)?;
    Ok(-I * (I * params.r * z).exp() * rz / params.p_sign(delta))
}

pub fn eval_s_small(params: &Params, tp: &TruncationPolicy, z: Complex64) -> Result<Complex64> {
    let a_d = params.a_small();
    let rz = eval_r_alpha(params, tp, a_d, z + 0.5 * I * a_d)?;
    Ok(-I * (I * params.r * z).exp() * rz / params.p_small())
}

pub fn eval_s_large(params: &Params, tp: &TruncationPolicy, z: Complex64) -> Result<Complex64> {
    let a_d = params.a_large();
    let rz = eval_r_alpha(params, tp, a_d, z + 0.5 * I * a_d)?;
    Ok(-I * (I * params.r * z).exp() * rz / params.p_large())
}

/// The trigonometric gamma function G_t(r, alpha; z).
pub fn eval_gt(
    params: &Params,
    tp: &TruncationPolicy,
    alpha: f64,
    z: Complex64,
) -> Result<Complex64> {
    check_im_sane(params, z)?;
    let guard = params.pole_guard();
    let d = dist_to_gt_poles(params, alpha, z);
    if d < guard {
        return Err(VdError::PoleProximity {
            re: z.re,
            im: z.im,
            dist: d,
            guard,
        });
    }
    let r = params.r;
    let q = (-alpha * r).exp();
    if z.im > -0.5 * alpha * (1.0 - SERIES_MARGIN) {
        // log G_t = sum u^n / (n (1 - q^{2n})), u = e^{2irz - alpha r}
        let u = (2.0 * I * r * z - c64(alpha * r, 0.0)).exp();
        let q2 = q * q;
        let mut acc = Complex64::default();
        let (mut up, mut qq) = (u, q2);
        for n in 1..=tp.max_terms {
            acc += up / (n as f64 * (1.0 - qq));
            if up.norm() < tp.eps {
                return Ok(acc.exp());
            }
            up *= u;
            qq *= q2;
        }
        Err(VdError::NonConvergent {
            max_terms: tp.max_terms,
        })
    } else {
        let w = (2.0 * I * r * z).exp();
        let q2 = q * q;
        let mut den = c64(1.0, 0.0);
        let mut c = q;
        let wmag = w.norm().max(1.0);
        for _n in 0..tp.max_terms {
            den *= 1.0 - c * w;
            c *= q2;
            if c * wmag < tp.eps {
                return Ok(c64(1.0, 0.0) / den);
            }
        }
        Err(VdError::NonConvergent {
            max_terms: tp.max_terms,
        })
    }
}

/// Residue r_k of G at the simple pole -i a - i k a_s, for 0 <= k <= L.
///
/// r_0 comes from the closed form; the ratios r_0/r_k are products of
/// R_l-values.
pub fn residue_r(params: &Params, tp: &TruncationPolicy, k: u32) -> Result<Complex64> {
    let lmax = params.level_count_or_zero();
    if k > lmax {
        return Err(VdError::OutOfRange {
            index: k as usize,
            limit: lmax as usize,
        });
    }
    let r0 = I / (2.0 * params.r * params.qprod_sign(Sign::Plus) * params.qprod_sign(Sign::Minus));
    let mut acc = r0;
    for j in 1..=k {
        let arg = I * (0.5 * params.a_large() + j as f64 * params.a_small());
        acc /= eval_r_large(params, tp, arg)?;
    }
    Ok(acc)
}

/// Conjugate function M*(z) = conj(M(conj(z))) of an evaluator.
pub fn conj_eval<F>(f: F, z: Complex64) -> Result<Complex64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    Ok(f(z.conj())?.conj())
}
