//! Period/shift parameters and truncation control.

use crate::error::{Result, VdError};
use serde::{Deserialize, Serialize};

/// Relative tolerance used by the shift-ratio guards.
pub const RATIO_TOL: f64 = 1e-6;

/// One of the two shift signs `+`/`-` labelling the modular pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn other(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

/// Operator label by shift length: the operator shifting by `i a_s` or by `i a_l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Shift {
    Small,
    Large,
}

impl Shift {
    pub fn other(self) -> Shift {
        match self {
            Shift::Small => Shift::Large,
            Shift::Large => Shift::Small,
        }
    }
}

/// The period/shift triple `(r, a_+, a_-)` with the derived quantities used everywhere.
///
/// Constructing a `Params` precomputes the q-products that recur in the
/// special-function formulas.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Params {
    pub r: f64,
    pub a_plus: f64,
    pub a_minus: f64,
    #[serde(skip, default)]
    derived: Derived,
}

#[derive(Debug, Clone, Default)]
struct Derived {
    /// prod_{k>=1} (1 - e^{-2 k r a_+})
    qprod_plus: f64,
    /// prod_{k>=1} (1 - e^{-2 k r a_-})
    qprod_minus: f64,
    /// p_+ = 2 r prod (1 - e^{-2 k r a_+})^2
    p_plus: f64,
    p_minus: f64,
}

fn qprod(r: f64, alpha: f64) -> f64 {
    let mut acc = 1.0;
    let q2 = (-2.0 * r * alpha).exp();
    let mut t = q2;
    while t > 1e-18 {
        acc *= 1.0 - t;
        t *= q2;
    }
    acc
}

impl Params {
    pub fn new(r: f64, a_plus: f64, a_minus: f64) -> Result<Self> {
        if !(r > 0.0 && a_plus > 0.0 && a_minus > 0.0)
            || !r.is_finite()
            || !a_plus.is_finite()
            || !a_minus.is_finite()
        {
            return Err(VdError::Domain(format!(
                "r, a_plus, a_minus must be positive finite, got ({r}, {a_plus}, {a_minus})"
            )));
        }
        let derived = Derived {
            qprod_plus: qprod(r, a_plus),
            qprod_minus: qprod(r, a_minus),
            p_plus: 2.0 * r * qprod(r, a_plus).powi(2),
            p_minus: 2.0 * r * qprod(r, a_minus).powi(2),
        };
        Ok(Params {
            r,
            a_plus,
            a_minus,
            derived,
        })
    }

    /// Rehydrate the derived constants after deserialization.
    pub fn validated(self) -> Result<Self> {
        Params::new(self.r, self.a_plus, self.a_minus)
    }

    /// Period average a = (a_+ + a_-)/2.
    pub fn a(&self) -> f64 {
        0.5 * (self.a_plus + self.a_minus)
    }

    pub fn a_small(&self) -> f64 {
        self.a_plus.min(self.a_minus)
    }

    pub fn a_large(&self) -> f64 {
        self.a_plus.max(self.a_minus)
    }

    pub fn a_sign(&self, s: Sign) -> f64 {
        match s {
            Sign::Plus => self.a_plus,
            Sign::Minus => self.a_minus,
        }
    }

    pub fn a_shift(&self, s: Shift) -> f64 {
        match s {
            Shift::Small => self.a_small(),
            Shift::Large => self.a_large(),
        }
    }

    /// The `+/-` index whose *coefficient functions* belong to the operator with
    /// the given shift: its shift parameter is the other period, a_{-sign} = shift.
    pub fn sign_of_shift(&self, s: Shift) -> Sign {
        let target = match s {
            // shift a_s <=> a_{-delta} = a_s <=> a_delta = a_l
            Shift::Small => self.a_large(),
            Shift::Large => self.a_small(),
        };
        if (self.a_plus - target).abs() <= (self.a_minus - target).abs() {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    /// Real period pi/r.
    pub fn period(&self) -> f64 {
        std::f64::consts::PI / self.r
    }

    /// Interval length pi/2r of the base interval `[0, pi/2r]`.
    pub fn half_period(&self) -> f64 {
        0.5 * std::f64::consts::PI / self.r
    }

    /// Unique positive integer with `L a_s < a_l <= (L+1) a_s`; `None` when a_s = a_l.
    pub fn level_count(&self) -> Option<u32> {
        let (asx, alx) = (self.a_small(), self.a_large());
        if asx == alx {
            return None;
        }
        let mut l = (alx / asx).floor() as u32;
        // exact multiples: a_l = L a_s must map to L-1 since the bound is strict
        if (l as f64) * asx >= alx {
            l -= 1;
        }
        debug_assert!((l as f64) * asx < alx && (l as f64 + 1.0) * asx >= alx);
        Some(l.max(1))
    }

    /// L as used in band bookkeeping; zero when the shifts coincide.
    pub fn level_count_or_zero(&self) -> u32 {
        self.level_count().unwrap_or(0)
    }

    /// a_s/a_l avoids {1, 1/2} within the relative tolerance.
    pub fn ratio_ok_small(&self) -> bool {
        let rho = self.a_small() / self.a_large();
        (rho - 1.0).abs() > RATIO_TOL && (rho - 0.5).abs() > RATIO_TOL
    }

    /// a_s/a_l avoids {1/k : k >= 1} within the relative tolerance.
    pub fn ratio_ok_large(&self) -> bool {
        let rho = self.a_small() / self.a_large();
        let kmax = (1.0 / rho).ceil() as u32 + 1;
        (1..=kmax).all(|k| (rho - 1.0 / k as f64).abs() > RATIO_TOL)
    }

    pub fn ratio_ok(&self, s: Shift) -> bool {
        match s {
            Shift::Small => self.ratio_ok_small(),
            Shift::Large => self.ratio_ok_large(),
        }
    }

    pub fn require_ratio_ok(&self, s: Shift) -> Result<()> {
        if self.ratio_ok(s) {
            Ok(())
        } else {
            Err(VdError::RatioGuard(format!(
                "a_s/a_l = {:.9} excluded for the {:?}-shift operator",
                self.a_small() / self.a_large(),
                s
            )))
        }
    }

    /// prod_{k>=1}(1 - e^{-2 k r a_delta}).
    pub fn qprod_sign(&self, s: Sign) -> f64 {
        match s {
            Sign::Plus => self.derived.qprod_plus,
            Sign::Minus => self.derived.qprod_minus,
        }
    }

    pub fn qprod_small(&self) -> f64 {
        if self.a_plus <= self.a_minus {
            self.derived.qprod_plus
        } else {
            self.derived.qprod_minus
        }
    }

    pub fn qprod_large(&self) -> f64 {
        if self.a_plus <= self.a_minus {
            self.derived.qprod_minus
        } else {
            self.derived.qprod_plus
        }
    }

    /// p_delta = 2 r prod (1 - e^{-2 k r a_delta})^2.
    pub fn p_sign(&self, s: Sign) -> f64 {
        match s {
            Sign::Plus => self.derived.p_plus,
            Sign::Minus => self.derived.p_minus,
        }
    }

    pub fn p_small(&self) -> f64 {
        2.0 * self.r * self.qprod_small().powi(2)
    }

    pub fn p_large(&self) -> f64 {
        2.0 * self.r * self.qprod_large().powi(2)
    }

    /// Guard distance below which an evaluation counts as sitting on a pole.
    pub fn pole_guard(&self) -> f64 {
        1e-8 * self.a_small().min(self.period())
    }
}

/// Controls absolute accuracy targets of the log-factors and the term caps.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TruncationPolicy {
    pub eps: f64,
    pub max_terms: usize,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy {
            eps: 1e-15,
            max_terms: 4096,
        }
    }
}

impl TruncationPolicy {
    pub fn new(eps: f64, max_terms: usize) -> Result<Self> {
        if !(eps > 0.0 && eps <= 1e-6) {
            return Err(VdError::Domain(format!("eps must lie in (0, 1e-6], got {eps}")));
        }
        if max_terms < 16 {
            return Err(VdError::Domain(format!("max_terms must be >= 16, got {max_terms}")));
        }
        Ok(TruncationPolicy { eps, max_terms })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_count_default_params() {
        let p = Params::new(1.0, 0.7, 1.1).unwrap();
        assert_eq!(p.level_count(), Some(1));
        assert_eq!(p.a(), 0.9);
        assert_eq!(p.a_small(), 0.7);
        assert_eq!(p.a_large(), 1.1);
    }

    #[test]
    fn level_count_larger_ratio() {
        let p = Params::new(1.0, 0.4, 1.5).unwrap();
        // 3*0.4 = 1.2 < 1.5 <= 4*0.4 = 1.6
        assert_eq!(p.level_count(), Some(3));
        let p = Params::new(1.0, 0.5, 1.0).unwrap();
        // exact multiple: 1*0.5 < 1.0 <= 2*0.5
        assert_eq!(p.level_count(), Some(1));
    }

    #[test]
    fn ratio_guards() {
        let p = Params::new(1.0, 0.7, 1.1).unwrap();
        assert!(p.ratio_ok_small() && p.ratio_ok_large());
        let p = Params::new(1.0, 0.55, 1.1).unwrap();
        assert!(!p.ratio_ok_small());
        assert!(!p.ratio_ok_large());
        let p = Params::new(1.0, 1.1 / 3.0, 1.1).unwrap();
        assert!(p.ratio_ok_small());
        assert!(!p.ratio_ok_large());
    }

    #[test]
    fn sign_of_shift_maps_to_other_period() {
        let p = Params::new(1.0, 0.7, 1.1).unwrap();
        // shift a_s = a_+ belongs to the '-' operator whose coefficients use R_- = R(a_-)
        assert_eq!(p.sign_of_shift(Shift::Small), Sign::Minus);
        assert_eq!(p.sign_of_shift(Shift::Large), Sign::Plus);
        assert_eq!(p.a_sign(p.sign_of_shift(Shift::Small).other()), p.a_small());
    }

    #[test]
    fn rejects_bad_params() {
        assert!(Params::new(0.0, 1.0, 1.0).is_err());
        assert!(Params::new(1.0, -0.1, 1.0).is_err());
        assert!(TruncationPolicy::new(1e-3, 100).is_err());
        assert!(TruncationPolicy::new(1e-12, 8).is_err());
    }
}
