//! Nystrom discretization of the Hilbert-Schmidt operators, singular value
//! decomposition with the fixed sign/ordering conventions, and analytic
//! continuation of the joint eigenfunctions into the complex plane.

use crate::coupling::Coupling;
use crate::error::{Result, VdError};
use crate::params::{Params, TruncationPolicy};
use crate::quad::{gauss_rule, QuadratureRule};
use crate::specfun::{c64, I};
use crate::vdcore;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

/// Which member of the dual pair (gamma, gamma') a quantity refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Primal,
    Dual,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Primal => Side::Dual,
            Side::Dual => Side::Primal,
        }
    }
}

/// Relative scale below which trailing singular values count as unresolved.
const RANK_CUTOFF: f64 = 1e-13;
/// Relative gap under which neighbouring singular values form a degenerate block.
const DEGENERACY_TOL: f64 = 1e-9;

/// The symmetrized Nystrom matrix of I(gamma):
/// M_ij = sqrt(q_i q_j) w(gamma;x_i)^{1/2} S(sigma;x_i,x_j) w(gamma';x_j)^{1/2}.
pub fn build_i_matrix(
    params: &Params,
    tp: &TruncationPolicy,
    gamma: &Coupling,
    rule: &QuadratureRule,
) -> Result<DMatrix<f64>> {
    gamma.require_pi_r(params)?;
    let n = rule.len();
    let wh_p = weight_sqrt_nodes(params, tp, gamma, rule)?;
    let wh_d = weight_sqrt_nodes(params, tp, &gamma.dual(), rule)?;
    let s = kernel_matrix(params, tp, gamma.sigma(), rule)?;
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = (rule.weights[i] * rule.weights[j]).sqrt() * wh_p[i] * s[(i, j)] * wh_d[j];
        }
    }
    Ok(m)
}

/// S(sigma; x_i, x_j) on the grid, through the cosine double series.
pub fn kernel_matrix(
    params: &Params,
    tp: &TruncationPolicy,
    sigma: f64,
    rule: &QuadratureRule,
) -> Result<DMatrix<f64>> {
    let coeffs = vdcore::kernel_s_series_coeffs(params, tp, sigma)?;
    let n = rule.len();
    let terms = coeffs.len();
    // K_{t,i} = sqrt(c_t) * cos(2 (t+1) r x_i) with sign carried separately
    let mut k = DMatrix::zeros(terms, n);
    for t in 0..terms {
        let scale = coeffs[t].abs().sqrt();
        for i in 0..n {
            k[(t, i)] = scale * (2.0 * (t + 1) as f64 * params.r * rule.nodes[i]).cos();
        }
    }
    let signs: Vec<f64> = coeffs.iter().map(|c| c.signum()).collect();
    let mut logs = DMatrix::zeros(n, n);
    for t in 0..terms {
        let row = k.row(t);
        for i in 0..n {
            let ki = row[i] * signs[t];
            for j in 0..n {
                logs[(i, j)] += ki * row[j];
            }
        }
    }
    Ok(logs.map(|v: f64| v.exp()))
}

/// w(gamma; x_j)^{1/2} at the quadrature nodes (positive square roots).
pub fn weight_sqrt_nodes(
    params: &Params,
    tp: &TruncationPolicy,
    gamma: &Coupling,
    rule: &QuadratureRule,
) -> Result<Vec<f64>> {
    rule.nodes
        .iter()
        .map(|&x| {
            let (w, _, _) = vdcore::weights(params, tp, gamma, x)?;
            if w < 0.0 {
                return Err(VdError::Domain(format!("negative weight at x = {x}")));
            }
            Ok(w.sqrt())
        })
        .collect()
}

/// The c-gauge Nystrom matrix of the operator I(gamma):
/// A_ij = q_j S(sigma;x_i,x_j) / (c(gamma;x_i) c(gamma';-x_j)).
pub fn i_matrix_c_gauge(
    params: &Params,
    tp: &TruncationPolicy,
    gamma: &Coupling,
    rule: &QuadratureRule,
) -> Result<DMatrix<Complex64>> {
    gamma.require_pi_r(params)?;
    let n = rule.len();
    let s = kernel_matrix(params, tp, gamma.sigma(), rule)?;
    let dual = gamma.dual();
    let c_p: Vec<Complex64> = rule
        .nodes
        .iter()
        .map(|&x| vdcore::c_func(params, tp, gamma, c64(x, 0.0)))
        .collect::<Result<_>>()?;
    let c_d: Vec<Complex64> = rule
        .nodes
        .iter()
        .map(|&x| vdcore::c_func(params, tp, &dual, c64(-x, 0.0)))
        .collect::<Result<_>>()?;
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = rule.weights[j] * s[(i, j)] / (c_p[i] * c_d[j]);
        }
    }
    Ok(m)
}

/// Discretized trace-class operator T(gamma) = I(gamma) I(gamma') in the
/// c-function gauge.
pub fn t_matrix_c_gauge(
    params: &Params,
    tp: &TruncationPolicy,
    gamma: &Coupling,
    rule: &QuadratureRule,
) -> Result<DMatrix<Complex64>> {
    let a = i_matrix_c_gauge(params, tp, gamma, rule)?;
    let b = i_matrix_c_gauge(params, tp, &gamma.dual(), rule)?;
    Ok(a * b)
}

/// Singular value decomposition of the discretized integral operator with the
/// fixed sign and ordering conventions applied.
#[derive(Debug)]
pub struct SpectralDecomposition {
    pub params: Params,
    pub tp: TruncationPolicy,
    pub rule: QuadratureRule,
    pub primal: Coupling,
    pub dual: Coupling,
    pub sigma: f64,
    /// Decreasing singular values of the discrete operator.
    pub lambdas: Vec<f64>,
    /// Modes with lambda_n/lambda_0 above the cutoff.
    pub resolved_rank: usize,
    /// Half-open index ranges of degenerate blocks (len >= 2).
    pub degenerate_blocks: Vec<(usize, usize)>,
    /// Modes where the dual-side sign convention clashed with the SVD pairing.
    pub sign_clash: Vec<usize>,
    e_primal: Vec<Vec<f64>>,
    e_dual: Vec<Vec<f64>>,
    wh_primal: Vec<f64>,
    wh_dual: Vec<f64>,
    c_primal: Vec<Complex64>,
    c_dual: Vec<Complex64>,
    kernel_rows: std::sync::Mutex<std::collections::HashMap<(u64, u64), std::sync::Arc<Vec<Complex64>>>>,
    contour_f: std::sync::Mutex<std::collections::HashMap<(bool, usize, u64), std::sync::Arc<Vec<Complex64>>>>,
}

/// Decompose I(gamma): singular values and both eigenvector families.
pub fn decompose(
    params: &Params,
    tp: &TruncationPolicy,
    gamma: &Coupling,
    rule: &QuadratureRule,
) -> Result<SpectralDecomposition> {
    let m = build_i_matrix(params, tp, gamma, rule)?;
    let n = rule.len();
    let svd = m.clone().svd(true, true);
    let u = svd.u.as_ref().expect("svd with u");
    let vt = svd.v_t.as_ref().expect("svd with v_t");

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));

    let lambdas: Vec<f64> = order.iter().map(|&k| svd.singular_values[k]).collect();
    let resolved_rank = lambdas
        .iter()
        .take_while(|&&l| l > RANK_CUTOFF * lambdas[0])
        .count();

    let wh_p = weight_sqrt_nodes(params, tp, gamma, rule)?;
    let dual = gamma.dual();
    let wh_d = weight_sqrt_nodes(params, tp, &dual, rule)?;

    let mut e_primal = Vec::with_capacity(resolved_rank);
    let mut e_dual = Vec::with_capacity(resolved_rank);
    let mut sign_clash = Vec::new();
    for (nn, &k) in order.iter().take(resolved_rank).enumerate() {
        let mut ep: Vec<f64> = (0..n).map(|j| u[(j, k)] / rule.weights[j].sqrt()).collect();
        let mut ed: Vec<f64> = (0..n).map(|j| vt[(k, j)] / rule.weights[j].sqrt()).collect();
        // sign convention: e_n > 0 as x -> 0+
        if leading_sign(&ep) < 0.0 {
            for v in ep.iter_mut() {
                *v = -*v;
            }
            for v in ed.iter_mut() {
                *v = -*v;
            }
        }
        if leading_sign(&ed) < 0.0 {
            sign_clash.push(nn);
        }
        e_primal.push(ep);
        e_dual.push(ed);
    }

    // Krein-Rutman: the ground mode is positive on the open interval
    if resolved_rank > 0 && e_primal[0].iter().any(|&v| v < 0.0) {
        return Err(VdError::IllConditioned(
            "ground eigenvector not positive; discretization unresolved".into(),
        ));
    }

    let mut degenerate_blocks = Vec::new();
    let mut start = 0;
    for k in 1..=resolved_rank {
        let open = k < resolved_rank && (lambdas[k - 1] - lambdas[k]) < DEGENERACY_TOL * lambdas[k - 1];
        if !open {
            if k - start >= 2 {
                degenerate_blocks.push((start, k));
            }
            start = k;
        }
    }

    let c_primal: Vec<Complex64> = rule
        .nodes
        .iter()
        .map(|&x| vdcore::c_func(params, tp, gamma, c64(x, 0.0)))
        .collect::<Result<_>>()?;
    let c_dual: Vec<Complex64> = rule
        .nodes
        .iter()
        .map(|&x| vdcore::c_func(params, tp, &dual, c64(x, 0.0)))
        .collect::<Result<_>>()?;

    Ok(SpectralDecomposition {
        params: params.clone(),
        tp: *tp,
        rule: rule.clone(),
        primal: gamma.clone(),
        dual,
        sigma: gamma.sigma(),
        lambdas,
        resolved_rank,
        degenerate_blocks,
        sign_clash,
        e_primal,
        e_dual,
        wh_primal: wh_p,
        wh_dual: wh_d,
        c_primal,
        c_dual,
        kernel_rows: std::sync::Mutex::new(std::collections::HashMap::new()),
        contour_f: std::sync::Mutex::new(std::collections::HashMap::new()),
    })
}

fn leading_sign(e: &[f64]) -> f64 {
    let max = e.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for &v in e {
        if v.abs() > 1e-3 * max {
            return v.signum();
        }
    }
    1.0
}

impl SpectralDecomposition {
    pub fn coupling(&self, side: Side) -> &Coupling {
        match side {
            Side::Primal => &self.primal,
            Side::Dual => &self.dual,
        }
    }

    pub fn e_samples(&self, side: Side, n: usize) -> &[f64] {
        match side {
            Side::Primal => &self.e_primal[n],
            Side::Dual => &self.e_dual[n],
        }
    }

    pub fn weight_sqrt(&self, side: Side) -> &[f64] {
        match side {
            Side::Primal => &self.wh_primal,
            Side::Dual => &self.wh_dual,
        }
    }

    pub fn c_nodes(&self, side: Side) -> &[Complex64] {
        match side {
            Side::Primal => &self.c_primal,
            Side::Dual => &self.c_dual,
        }
    }

    /// Grid samples of f_n(side; x_j) = e_n(x_j) / (w^{1/2} c)(x_j).
    pub fn f_samples(&self, side: Side, n: usize) -> Vec<Complex64> {
        let e = self.e_samples(side, n);
        let wh = self.weight_sqrt(side);
        let c = self.c_nodes(side);
        (0..e.len()).map(|j| e[j] / (wh[j] * c[j])).collect()
    }

    /// Grid samples of F_n(side; x_j) = e_n(x_j) / w^{1/2}(x_j).
    pub fn big_f_samples(&self, side: Side, n: usize) -> Vec<Complex64> {
        let e = self.e_samples(side, n);
        let wh = self.weight_sqrt(side);
        (0..e.len()).map(|j| c64(e[j] / wh[j], 0.0)).collect()
    }

    fn require_mode(&self, n: usize) -> Result<()> {
        if n >= self.resolved_rank {
            return Err(VdError::IllConditioned(format!(
                "mode {n} beyond resolved rank {}",
                self.resolved_rank
            )));
        }
        Ok(())
    }

    /// lambda_n F_n(side; x) by analytic continuation.
    ///
    /// Inside |Im x| < sigma the direct integral representation applies. Each
    /// time Im x crosses a level sigma + ell a_s a kernel pole pair crosses
    /// the integration line and contributes a residue correction. Away from
    /// the levels the contour stays on the real grid (full residue weights);
    /// within `guard` of a level the integration line is shifted to an
    /// optimized height c, the just-crossing pole pair entering with weight
    /// one half.
    pub fn lambda_f(&self, side: Side, n: usize, x: Complex64) -> Result<Complex64> {
        self.require_mode(n)?;
        let x = if x.im < 0.0 { -x } else { x };
        let h = x.im;
        let sigma = self.sigma;
        let a_l = self.params.a_large();
        let strip = sigma + a_l;
        if h >= strip - 1e-9 {
            return Err(VdError::OutOfStrip { im: h, limit: strip });
        }

        let asx = self.params.a_small();
        let lmax = self.params.level_count_or_zero();
        let src = side.other();
        let guard = 0.06f64.min(sigma / 3.0);
        if guard < 2e-3 {
            return Err(VdError::CriticalPole(format!(
                "sigma = {sigma:.4} too small for stable continuation"
            )));
        }

        if h < sigma - guard {
            return self.quad_term_real(src, n, x);
        }

        let level = |ell: u32| sigma + ell as f64 * asx;
        let dist0 = (0..=lmax)
            .map(|ell| (h - level(ell)).abs())
            .fold(f64::INFINITY, f64::min);

        let c = if dist0 >= guard {
            0.0
        } else {
            // near a crossing level: shift the contour to an optimized height
            let d_src = self.coupling(src).d_gamma(&self.params);
            let c_max = (0.95 * sigma.min(d_src).min(asx)).min(sigma - 1.2 * guard);
            let mut best = (0.0, -1.0);
            for k in 1..=96 {
                let c = c_max * k as f64 / 96.0;
                let mut d = sigma.min(d_src) - c;
                for ell in 0..=lmax {
                    let p = h - level(ell);
                    d = d.min((p - c).abs()).min((p + c).abs());
                }
                if d > best.1 {
                    best = (c, d);
                }
            }
            if best.1 < 5e-4 {
                return Err(VdError::CriticalPole(format!(
                    "no admissible contour height at Im x = {h:.6} (best distance {:.2e})",
                    best.1
                )));
            }
            best.0
        };

        let mut acc = if c == 0.0 {
            self.quad_term_real(src, n, x)?
        } else {
            self.quad_term_contour(src, n, x, c)?
        };
        for ell in 0..=lmax {
            let lv = level(ell);
            let w_ell = if h < lv - c {
                0.0
            } else if h <= lv + c {
                0.5
            } else {
                1.0
            };
            if w_ell == 0.0 {
                continue;
            }
            match self.residue_term(src, n, ell, lv, x) {
                Ok(t) if t.is_finite() => acc += w_ell * t,
                Ok(_) | Err(VdError::PoleProximity { .. }) => {
                    // a pole of one factor colliding with a zero of the other:
                    // the term itself is analytic, so recover its value by a
                    // Richardson-extrapolated symmetric offset average
                    let eps = 1e-5 * self.params.half_period();
                    let avg = |e: f64| -> Result<Complex64> {
                        let a = self.residue_term(src, n, ell, lv, x + c64(e, 0.0))?;
                        let b = self.residue_term(src, n, ell, lv, x - c64(e, 0.0))?;
                        // an odd blow-up marks a genuine pole of the term
                        if (a - b).norm() > 10.0 * (a + b).norm() + 1e3 {
                            return Err(VdError::CriticalPole(format!(
                                "eigenfunction pole at ({}, {})",
                                x.re, x.im
                            )));
                        }
                        Ok(0.5 * (a + b))
                    };
                    let t = (4.0 * avg(eps)? - avg(2.0 * eps)?) / 3.0;
                    if !t.is_finite() {
                        return Err(VdError::CriticalPole(format!(
                            "residue term ell = {ell} singular at ({}, {})",
                            x.re, x.im
                        )));
                    }
                    acc += w_ell * t;
                }
                Err(e) => return Err(e),
            }
        }
        Ok(acc)
    }

    /// One residue correction nu_ell(source; x) F_n(source; x - i level).
    fn residue_term(
        &self,
        src: Side,
        n: usize,
        ell: u32,
        level: f64,
        x: Complex64,
    ) -> Result<Complex64> {
        let nu = vdcore::nu_ell(&self.params, &self.tp, self.coupling(src), ell, x)?;
        let f_child = self.lambda_f(src, n, x - I * level)? / self.lambdas[n];
        Ok(nu * f_child)
    }

    /// Direct representation: integral over [0, pi/2r] against the grid data.
    fn quad_term_real(&self, src: Side, n: usize, x: Complex64) -> Result<Complex64> {
        let row = self.kernel_row(x)?;
        let e = self.e_samples(src, n);
        let wh = self.weight_sqrt(src);
        let mut acc = Complex64::default();
        for j in 0..self.rule.len() {
            acc += self.rule.weights[j] * row[j] * wh[j] * e[j];
        }
        Ok(acc)
    }

    /// S(sigma; x, x_j) over the grid, cached per evaluation point.
    fn kernel_row(&self, x: Complex64) -> Result<std::sync::Arc<Vec<Complex64>>> {
        let key = (x.re.to_bits(), x.im.to_bits());
        if let Some(row) = self.kernel_rows.lock().unwrap().get(&key) {
            return Ok(row.clone());
        }
        let mut row = Vec::with_capacity(self.rule.len());
        for &t in &self.rule.nodes {
            row.push(vdcore::kernel_s(&self.params, &self.tp, self.sigma, x, c64(t, 0.0))?);
        }
        let row = std::sync::Arc::new(row);
        self.kernel_rows.lock().unwrap().insert(key, row.clone());
        Ok(row)
    }

    /// Half of the full-period integral along Im y = c.
    fn quad_term_contour(&self, src: Side, n: usize, x: Complex64, c: f64) -> Result<Complex64> {
        let m = 2 * self.rule.len();
        let (xs, ws) = crate::quad::legendre_nodes(m);
        let period = self.params.period();
        let start = -0.25 * period;
        // w(src; y_k) F_n(src; y_k) along the contour is x-independent
        let key = (matches!(src, Side::Primal), n, c.to_bits());
        let cached = self.contour_f.lock().unwrap().get(&key).cloned();
        let wf = match cached {
            Some(v) => v,
            None => {
                let mut v = Vec::with_capacity(m);
                for k in 0..m {
                    let t = start + 0.5 * period * (xs[k] + 1.0);
                    let y = c64(t, c);
                    let w = vdcore::w_complex(&self.params, &self.tp, self.coupling(src), y)?;
                    let f = self.lambda_f(src, n, y)? / self.lambdas[n];
                    v.push(w * f);
                }
                let v = std::sync::Arc::new(v);
                self.contour_f.lock().unwrap().insert(key, v.clone());
                v
            }
        };
        let mut acc = Complex64::default();
        for k in 0..m {
            let t = start + 0.5 * period * (xs[k] + 1.0);
            let wt = 0.5 * period * ws[k];
            let y = c64(t, c);
            let s = vdcore::kernel_s(&self.params, &self.tp, self.sigma, x, y)?;
            acc += 0.5 * wt * s * wf[k] * c64(1.0, 0.0);
        }
        Ok(acc)
    }

    /// F_n(side; x) by continuation.
    pub fn f_value(&self, side: Side, n: usize, x: Complex64) -> Result<Complex64> {
        Ok(self.lambda_f(side, n, x)? / self.lambdas[n])
    }

    /// H_n(side; x) = P(coupling; x) F_n(side; x).
    pub fn h_value(&self, side: Side, n: usize, x: Complex64) -> Result<Complex64> {
        let p = vdcore::p_func(&self.params, &self.tp, self.coupling(side), x)?;
        Ok(p * self.f_value(side, n, x)?)
    }

    /// Conjugate function H_n^*(x) = conj(H_n(conj x)).
    pub fn h_star(&self, side: Side, n: usize, x: Complex64) -> Result<Complex64> {
        Ok(self.h_value(side, n, x.conj())?.conj())
    }

    /// Scale of H_n along the real interval (maximum over the grid).
    pub fn h_scale(&self, side: Side, n: usize) -> Result<f64> {
        let f = self.big_f_samples(side, n);
        let mut best = 0.0f64;
        for (j, &x) in self.rule.nodes.iter().enumerate() {
            let p = vdcore::p_func(&self.params, &self.tp, self.coupling(side), c64(x, 0.0))?;
            best = best.max((p * f[j]).norm());
        }
        Ok(best)
    }

    /// Gram matrix residual max_{m,n} |<e_m, e_n> - delta_{mn}| over the
    /// resolved modes below `count`.
    pub fn orthonormality_residual(&self, side: Side, count: usize) -> f64 {
        let count = count.min(self.resolved_rank);
        let mut worst = 0.0f64;
        for m in 0..count {
            for n in 0..count {
                let em = self.e_samples(side, m);
                let en = self.e_samples(side, n);
                let dot: f64 = (0..em.len())
                    .map(|j| self.rule.weights[j] * em[j] * en[j])
                    .sum();
                let want = if m == n { 1.0 } else { 0.0 };
                worst = worst.max((dot - want).abs());
            }
        }
        worst
    }
}

/// Convergence report comparing singular values at N and 2N nodes.
pub fn doubling_check(
    params: &Params,
    tp: &TruncationPolicy,
    gamma: &Coupling,
    n_nodes: usize,
    modes: usize,
) -> Result<Vec<f64>> {
    let r1 = gauss_rule(params, n_nodes)?;
    let r2 = gauss_rule(params, 2 * n_nodes)?;
    let d1 = decompose(params, tp, gamma, &r1)?;
    let d2 = decompose(params, tp, gamma, &r2)?;
    let modes = modes.min(d1.resolved_rank).min(d2.resolved_rank);
    Ok((0..modes)
        .map(|n| (d1.lambdas[n] - d2.lambdas[n]).abs() / d2.lambdas[n])
        .collect())
}

/// Normalized Frobenius commutator of the discretized trace-class operators
/// of two couplings: ||[T1, T2]||_F / (||T1||_F ||T2||_F).
pub fn commutator_norm(t1: &DMatrix<Complex64>, t2: &DMatrix<Complex64>) -> f64 {
    let ab = t1 * t2;
    let ba = t2 * t1;
    let diff = &ab - &ba;
    let fro = |m: &DMatrix<Complex64>| m.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    fro(&diff) / (fro(t1) * fro(t2))
}

/// Apply the c-gauge operator I(gamma) to grid samples in parallel-friendly form.
pub fn apply_i_c_gauge(m: &DMatrix<Complex64>, v: &[Complex64]) -> Vec<Complex64> {
    (0..m.nrows())
        .into_par_iter()
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)] * v[j]).sum())
        .collect()
}
