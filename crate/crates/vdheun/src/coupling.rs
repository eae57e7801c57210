//! Coupling vectors, parameter-space predicates, the dual map and presets.

use crate::error::{Result, VdError};
use crate::params::Params;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Real,
    Mixed,
}

/// A coupling vector gamma in C^8.
///
/// Real parts are stored directly; imaginary parts are stored as integer
/// multiples of pi/2r (`units`), which keeps the admissible regimes exact and
/// makes the JSON serialization lossless.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    g: [f64; 8],
    units: [i8; 8],
    r: f64,
    regime: Regime,
}

/// Wire format: `{gamma_re, gamma_im_units_pi_over_2r, regime}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CouplingJson {
    pub gamma_re: [f64; 8],
    pub gamma_im_units_pi_over_2r: [i8; 8],
    pub regime: Regime,
}

impl Serialize for Coupling {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CouplingJson {
            gamma_re: self.g,
            gamma_im_units_pi_over_2r: self.units,
            regime: self.regime,
        }
        .serialize(s)
    }
}

impl Coupling {
    pub fn real(params: &Params, g: [f64; 8]) -> Result<Self> {
        if g.iter().any(|v| !v.is_finite()) {
            return Err(VdError::Domain("coupling components must be finite".into()));
        }
        Ok(Coupling {
            g,
            units: [0; 8],
            r: params.r,
            regime: Regime::Real,
        })
    }

    /// Second regime: Im gamma_mu = 0 for mu = 0..3 and +/- pi/2r for mu = 4..7,
    /// with vanishing imaginary-part sum.
    pub fn mixed(params: &Params, g: [f64; 8], units: [i8; 8]) -> Result<Self> {
        if g.iter().any(|v| !v.is_finite()) {
            return Err(VdError::Domain("coupling components must be finite".into()));
        }
        if units[..4].iter().any(|&u| u != 0) {
            return Err(VdError::Domain(
                "mixed regime requires real gamma_0..gamma_3".into(),
            ));
        }
        if units[4..].iter().any(|&u| u != 1 && u != -1) {
            return Err(VdError::Domain(
                "mixed regime requires Im gamma_mu = +/- pi/2r for mu = 4..7".into(),
            ));
        }
        if units.iter().map(|&u| u as i32).sum::<i32>() != 0 {
            return Err(VdError::Domain("imaginary parts must sum to zero".into()));
        }
        Ok(Coupling {
            g,
            units,
            r: params.r,
            regime: Regime::Mixed,
        })
    }

    pub fn from_json(params: &Params, j: &CouplingJson) -> Result<Self> {
        match j.regime {
            Regime::Real => {
                if j.gamma_im_units_pi_over_2r.iter().any(|&u| u != 0) {
                    return Err(VdError::Domain(
                        "real regime requires zero imaginary units".into(),
                    ));
                }
                Coupling::real(params, j.gamma_re)
            }
            Regime::Mixed => Coupling::mixed(params, j.gamma_re, j.gamma_im_units_pi_over_2r),
        }
    }

    pub fn to_json(&self) -> CouplingJson {
        CouplingJson {
            gamma_re: self.g,
            gamma_im_units_pi_over_2r: self.units,
            regime: self.regime,
        }
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn g(&self) -> [f64; 8] {
        self.g
    }

    pub fn units(&self) -> [i8; 8] {
        self.units
    }

    /// The complex coupling vector.
    pub fn gamma(&self) -> [Complex64; 8] {
        let step = 0.5 * std::f64::consts::PI / self.r;
        std::array::from_fn(|m| Complex64::new(self.g[m], self.units[m] as f64 * step))
    }

    pub fn gamma_mu(&self, mu: usize) -> Complex64 {
        let step = 0.5 * std::f64::consts::PI / self.r;
        Complex64::new(self.g[mu], self.units[mu] as f64 * step)
    }

    /// sigma(gamma) = -(1/4) sum_mu gamma_mu; real by construction.
    pub fn sigma(&self) -> f64 {
        -0.25 * self.g.iter().sum::<f64>()
    }

    /// Dual coupling gamma' = -J gamma, componentwise -gamma_mu - sigma.
    pub fn dual(&self) -> Coupling {
        let sigma = self.sigma();
        let g = std::array::from_fn(|m| -self.g[m] - sigma);
        let units = std::array::from_fn(|m| -self.units[m]);
        Coupling {
            g,
            units,
            r: self.r,
            regime: self.regime,
        }
    }

    /// Image under the E8 reflection J = 1 - (1/4) zeta (x) zeta.
    pub fn reflect_j(&self) -> Coupling {
        let sigma = self.sigma();
        let g = std::array::from_fn(|m| self.g[m] + sigma);
        Coupling {
            g,
            units: self.units,
            r: self.r,
            regime: self.regime,
        }
    }

    /// Flip the signs of the components selected by `mask` (bit mu = component mu).
    ///
    /// In the mixed regime a flip may leave the imaginary-part sum at
    /// +/- 2 pi/r; such images are reduced back to the canonical sum-zero
    /// representative by shifting two components over i pi/r, which leaves
    /// every coupling-dependent function unchanged.
    pub fn flip(&self, mask: u8) -> Coupling {
        let g = std::array::from_fn(|m| if mask & (1 << m) != 0 { -self.g[m] } else { self.g[m] });
        let mut units: [i8; 8] = std::array::from_fn(|m| {
            if mask & (1 << m) != 0 {
                -self.units[m]
            } else {
                self.units[m]
            }
        });
        let mut sum: i32 = units.iter().map(|&u| u as i32).sum();
        for m in 4..8 {
            if sum == 0 {
                break;
            }
            if sum > 0 && units[m] == 1 {
                units[m] = -1;
                sum -= 2;
            } else if sum < 0 && units[m] == -1 {
                units[m] = 1;
                sum += 2;
            }
        }
        Coupling {
            g,
            units,
            r: self.r,
            regime: self.regime,
        }
    }

    pub fn permute(&self, perm: &[usize; 8]) -> Coupling {
        let g = std::array::from_fn(|m| self.g[perm[m]]);
        let units = std::array::from_fn(|m| self.units[perm[m]]);
        Coupling {
            g,
            units,
            r: self.r,
            regime: self.regime,
        }
    }

    /// Whether a sign-flip mask is admissible for this coupling's regime.
    ///
    /// Flips must be even. In the mixed regime the flipped image must admit
    /// the canonical sum-zero reduction, which requires an even number of
    /// flips among the components carrying imaginary parts; the strictly
    /// sum-preserving flips form the 48-element subgroup.
    pub fn flip_admissible(&self, mask: u8) -> bool {
        if mask.count_ones() % 2 != 0 {
            return false;
        }
        match self.regime {
            Regime::Real => true,
            Regime::Mixed => (mask >> 4).count_ones() % 2 == 0,
        }
    }

    /// Admissible and leaving the imaginary-part sum unchanged without
    /// reduction (membership in the restricted 48-element flip group).
    pub fn flip_strictly_balanced(&self, mask: u8) -> bool {
        if mask.count_ones() % 2 != 0 {
            return false;
        }
        let s: i32 = (4..8)
            .filter(|&m| mask & (1 << m) != 0)
            .map(|m| self.units[m] as i32)
            .sum();
        s == 0
    }

    /// |g_mu| < a for all mu.
    pub fn in_pi_tilde(&self, params: &Params) -> bool {
        let a = params.a();
        self.g.iter().all(|&v| v.abs() < a)
    }

    /// g and g' both in Pi-tilde.
    pub fn in_pi(&self, params: &Params) -> bool {
        self.in_pi_tilde(params) && self.dual().in_pi_tilde(params)
    }

    /// in Pi and sigma in (0, a).
    pub fn in_pi_r(&self, params: &Params) -> bool {
        let s = self.sigma();
        self.in_pi(params) && s > 0.0 && s < params.a()
    }

    pub fn require_pi_tilde(&self, params: &Params) -> Result<()> {
        if self.in_pi_tilde(params) {
            Ok(())
        } else {
            Err(VdError::Domain(format!(
                "coupling not in Pi-tilde: max|g| = {:.6} >= a = {:.6}",
                self.g.iter().cloned().fold(0.0, |m, v| v.abs().max(m)),
                params.a()
            )))
        }
    }

    pub fn require_pi_r(&self, params: &Params) -> Result<()> {
        if self.in_pi_r(params) {
            Ok(())
        } else {
            Err(VdError::Domain(format!(
                "coupling not in Pi_r (sigma = {:.6}, a = {:.6})",
                self.sigma(),
                params.a()
            )))
        }
    }

    /// d(gamma) = min_mu (g_mu + a).
    pub fn d_gamma(&self, params: &Params) -> f64 {
        self.g
            .iter()
            .map(|&v| v + params.a())
            .fold(f64::INFINITY, f64::min)
    }

    /// m(gamma) = min(a_s, d(gamma), sigma(gamma)).
    pub fn m_gamma(&self, params: &Params) -> f64 {
        params.a_small().min(self.d_gamma(params)).min(self.sigma())
    }

    /// Euclidean norm of the real part.
    pub fn ell2_norm(&self) -> f64 {
        self.g.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// The free coupling gamma^f (boundary of Pi-tilde, sigma = a).
pub fn gamma_free(params: &Params) -> Coupling {
    let a = params.a();
    let g = [
        -a,
        -0.5 * params.a_minus,
        -0.5 * params.a_plus,
        0.0,
        -a,
        -0.5 * params.a_minus,
        -0.5 * params.a_plus,
        0.0,
    ];
    let units = [0, 0, 0, 0, 1, 1, -1, -1];
    Coupling {
        g,
        units,
        r: params.r,
        regime: Regime::Mixed,
    }
}

/// The Lame family gamma_L(b) = gamma^f + b zeta / 2 with sigma = a - b.
/// Membership in Pi_r requires b in (0, a); values up to 2a are accepted for
/// coefficient-level work.
pub fn gamma_lame(params: &Params, b: f64) -> Result<Coupling> {
    if !(b > 0.0 && b < 2.0 * params.a()) {
        return Err(VdError::Domain(format!(
            "Lame parameter b must lie in (0, 2a), got {b}"
        )));
    }
    let base = gamma_free(params);
    let g = std::array::from_fn(|m| base.g[m] + 0.5 * b);
    Ok(Coupling {
        g,
        units: base.units,
        r: params.r,
        regime: Regime::Mixed,
    })
}

/// The free Lame coupling gamma-dot = gamma_L(a_s); sigma = (a_l - a_s)/2.
pub fn gamma_dot(params: &Params) -> Result<Coupling> {
    if params.a_small() == params.a_large() {
        return Err(VdError::Domain(
            "gamma-dot needs distinct shift parameters".into(),
        ));
    }
    gamma_lame(params, params.a_small())
}

/// Cluster member with sigma = a_l/2 (flip of components 3, 6, 7 of gamma-dot).
pub fn gamma_l(params: &Params) -> Result<Coupling> {
    Ok(gamma_dot(params)?.flip(0b1100_1000))
}

/// Cluster member with sigma = a_s/2 (flip of components 1, 3, 5, 7 of gamma-dot).
pub fn gamma_s(params: &Params) -> Result<Coupling> {
    Ok(gamma_dot(params)?.flip(0b1010_1010))
}

/// Self-dual couplings of the first regime: choose
/// -a < g0 <= g1 <= g2 <= g3 <= -sigma/2 and mirror with g_{7-mu} = -g_mu - sigma.
pub fn pi_rs1(params: &Params, sigma: f64, lower: [f64; 4]) -> Result<Coupling> {
    if !(sigma > 0.0 && sigma < params.a()) {
        return Err(VdError::Domain(format!("sigma must lie in (0, a), got {sigma}")));
    }
    let mut g = [0.0; 8];
    for mu in 0..4 {
        if lower[mu] <= -params.a() || lower[mu] > -0.5 * sigma {
            return Err(VdError::Domain(format!(
                "pi_rs1 component {mu} = {} outside (-a, -sigma/2]",
                lower[mu]
            )));
        }
        g[mu] = lower[mu];
        g[7 - mu] = -lower[mu] - sigma;
    }
    let c = Coupling::real(params, g)?;
    c.require_pi_r(params)?;
    Ok(c)
}

/// Self-dual couplings of the second regime: g_{3-mu} = -g_mu - sigma for
/// mu = 0,1 and g_{7-mu} = -g_{mu+4} - sigma within the mixed imaginary pattern.
pub fn pi_rs2(params: &Params, sigma: f64, lower: [f64; 4]) -> Result<Coupling> {
    if !(sigma > 0.0 && sigma < params.a()) {
        return Err(VdError::Domain(format!("sigma must lie in (0, a), got {sigma}")));
    }
    let [g0, g1, g4, g5] = lower;
    for (mu, v) in [(0, g0), (1, g1), (4, g4), (5, g5)] {
        if v <= -params.a() || v > -0.5 * sigma {
            return Err(VdError::Domain(format!(
                "pi_rs2 component {mu} = {v} outside (-a, -sigma/2]"
            )));
        }
    }
    let g = [g0, g1, -g1 - sigma, -g0 - sigma, g4, g5, -g5 - sigma, -g4 - sigma];
    let c = Coupling::mixed(params, g, [0, 0, 0, 0, 1, 1, -1, -1])?;
    c.require_pi_r(params)?;
    Ok(c)
}

/// All couplings in Pi_r related to `base` by an admissible even sign flip
/// (the gamma-cluster), deduplicated; `base` is the first entry.
pub fn cluster_members(params: &Params, base: &Coupling) -> Result<Vec<Coupling>> {
    base.require_pi_r(params)?;
    let mut out: Vec<Coupling> = Vec::new();
    for mask in 0u16..256 {
        let mask = mask as u8;
        if !base.flip_admissible(mask) {
            continue;
        }
        let img = base.flip(mask);
        if !img.in_pi_r(params) {
            continue;
        }
        if !out.iter().any(|c| couplings_equal(c, &img)) {
            out.push(img);
        }
    }
    out.sort_by(|a, b| {
        couplings_equal(b, base)
            .cmp(&couplings_equal(a, base))
            .then(a.g.partial_cmp(&b.g).unwrap())
    });
    Ok(out)
}

/// Equality of couplings as evaluation data: equal real parts and regime.
/// Mixed-regime unit patterns with the same zero sum are interchangeable
/// (they differ by sum-preserving i pi/r shifts).
pub fn couplings_equal(a: &Coupling, b: &Coupling) -> bool {
    a.regime == b.regime
        && a.g
            .iter()
            .zip(b.g.iter())
            .all(|(x, y)| (x - y).abs() < 1e-14)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p710() -> Params {
        Params::new(1.0, 0.7, 1.1).unwrap()
    }

    #[test]
    fn sigma_and_dual_involution() {
        let p = p710();
        let g = [-0.41, -0.27, -0.16, -0.35, 0.12, -0.22, 0.19, -0.08];
        let c = Coupling::real(&p, g).unwrap();
        assert!((c.sigma() - 0.295).abs() < 1e-12);
        let d = c.dual();
        assert!((d.sigma() - c.sigma()).abs() < 1e-12);
        let dd = d.dual();
        for mu in 0..8 {
            assert!((dd.g()[mu] - c.g()[mu]).abs() < 1e-12);
        }
        assert!(c.in_pi_r(&p));
        assert!(d.in_pi_r(&p));
    }

    #[test]
    fn gamma_dot_matches_explicit_components() {
        let p = p710();
        let c = gamma_dot(&p).unwrap();
        let (al, asx) = (1.1, 0.7);
        let want = [
            -al / 2.0,
            -al / 2.0 + asx / 2.0,
            0.0,
            asx / 2.0,
            -al / 2.0,
            -al / 2.0 + asx / 2.0,
            0.0,
            asx / 2.0,
        ];
        for mu in 0..8 {
            assert!((c.g()[mu] - want[mu]).abs() < 1e-14, "mu = {mu}");
        }
        assert_eq!(c.units(), [0, 0, 0, 0, 1, 1, -1, -1]);
        assert!((c.sigma() - 0.5 * (al - asx)).abs() < 1e-14);
        assert!(c.in_pi_r(&p));
    }

    #[test]
    fn flipped_presets_have_documented_sigmas() {
        let p = p710();
        assert!((gamma_l(&p).unwrap().sigma() - 0.55).abs() < 1e-14);
        assert!((gamma_s(&p).unwrap().sigma() - 0.35).abs() < 1e-14);
        // flipping component 0 (paired with the zero component 2) gives
        // sigma = a_l/4 - a_s/2, negative unless a_l > 2 a_s
        let c0 = gamma_dot(&p).unwrap().flip(0b0000_0101);
        assert!((c0.sigma() - (1.1 / 4.0 - 0.35)).abs() < 1e-14);
        assert!(!c0.in_pi_r(&p));
        // gamma^(p): flips 1, 5, 6 (even via the zero component 2) -> sigma = 0
        let cp = gamma_dot(&p).unwrap().flip(0b0110_0110);
        assert!(cp.sigma().abs() < 1e-14);
        assert!(!cp.in_pi_r(&p));
    }

    #[test]
    fn cluster_of_gamma_dot_contains_gamma_l_and_gamma_s() {
        let p = p710();
        let base = gamma_dot(&p).unwrap();
        let members = cluster_members(&p, &base).unwrap();
        let gl = gamma_l(&p).unwrap();
        let gs = gamma_s(&p).unwrap();
        assert!(couplings_equal(&members[0], &base));
        assert!(members.iter().any(|c| couplings_equal(c, &gl)));
        assert!(members.iter().any(|c| couplings_equal(c, &gs)));
        let cp = gamma_dot(&p).unwrap().flip(0b0110_0110);
        assert!(!members.iter().any(|c| couplings_equal(c, &cp)));
        // the restricted flip group bounds the count by 24; the reduction
        // moves admit at most 32
        assert!(
            members.len() >= 4 && members.len() <= 32,
            "mixed-regime cluster size {} outside [4, 32]",
            members.len()
        );
    }

    #[test]
    fn single_component_coupling_has_trivial_cluster() {
        let p = p710();
        let c = Coupling::real(&p, [-0.85, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(c.in_pi_r(&p));
        let members = cluster_members(&p, &c).unwrap();
        assert_eq!(members.len(), 1);
    }

    #[test]
    fn real_cluster_bounds() {
        let p = p710();
        let g = [-0.41, -0.07, -0.16, -0.11, 0.12, -0.22, 0.19, -0.08];
        let c = Coupling::real(&p, g).unwrap();
        let members = cluster_members(&p, &c).unwrap();
        assert!(!members.is_empty() && members.len() <= 64);
    }

    #[test]
    fn mixed_regime_validation() {
        let p = p710();
        assert!(Coupling::mixed(&p, [0.0; 8], [0, 0, 0, 0, 1, 1, -1, -1]).is_ok());
        assert!(Coupling::mixed(&p, [0.0; 8], [0, 0, 0, 0, 1, 1, 1, -1]).is_err());
        assert!(Coupling::mixed(&p, [0.0; 8], [1, 0, 0, 0, 1, 1, -1, -1]).is_err());
        assert!(Coupling::mixed(&p, [0.0; 8], [0, 0, 0, 0, 1, 1, -1, 0]).is_err());
    }

    #[test]
    fn mixed_cluster_flip_group_size() {
        let p = p710();
        let c = gamma_dot(&p).unwrap();
        let balanced = (0u16..256)
            .filter(|&m| c.flip_strictly_balanced(m as u8))
            .count();
        assert_eq!(balanced, 48);
        let admissible = (0u16..256).filter(|&m| c.flip_admissible(m as u8)).count();
        assert_eq!(admissible, 64);
    }

    #[test]
    fn json_round_trip() {
        let p = p710();
        let c = gamma_dot(&p).unwrap();
        let s = serde_json::to_string(&c).unwrap();
        assert!(s.contains("gamma_im_units_pi_over_2r"));
        let j: CouplingJson = serde_json::from_str(&s).unwrap();
        let c2 = Coupling::from_json(&p, &j).unwrap();
        assert!(couplings_equal(&c, &c2));
    }

    #[test]
    fn reflect_j_properties() {
        let p = p710();
        let g = [-0.2, -0.1, 0.05, -0.15, 0.08, -0.12, 0.03, -0.09];
        let c = Coupling::real(&p, g).unwrap();
        let j = c.reflect_j();
        assert!((j.sigma() + c.sigma()).abs() < 1e-12);
        let jj = j.reflect_j();
        for mu in 0..8 {
            assert!((jj.g()[mu] - c.g()[mu]).abs() < 1e-12);
        }
        let d = c.dual();
        for mu in 0..8 {
            assert!((d.g()[mu] + j.g()[mu]).abs() < 1e-12);
        }
    }

    #[test]
    fn pi_rs_recipes_are_self_dual_shape() {
        let p = p710();
        let c1 = pi_rs1(&p, 0.4, [-0.6, -0.5, -0.35, -0.25]).unwrap();
        let d1 = c1.dual();
        // dual is the reversal permutation of the original
        for mu in 0..8 {
            assert!((d1.g()[7 - mu] - c1.g()[mu]).abs() < 1e-12);
        }
        let c2 = pi_rs2(&p, 0.21, [-0.5, -0.3, -0.45, -0.25]).unwrap();
        let d2 = c2.dual();
        for mu in 0..4 {
            assert!((d2.g()[3 - mu] - c2.g()[mu]).abs() < 1e-12);
            assert!((d2.g()[7 - mu] - c2.g()[mu + 4]).abs() < 1e-12);
        }
    }
}
