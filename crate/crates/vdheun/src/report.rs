//! Machine-readable outputs (JSON report, CSV tables) and seeded sampling of
//! evaluation points and couplings.

use crate::coupling::{Coupling, Regime};
use crate::error::{Result, VdError};
use crate::params::Params;
use crate::specfun::{self, c64};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::io::Write;
use std::path::Path;

/// Outcome of one named check.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub max_err: f64,
    pub tol: f64,
    pub details: String,
}

impl CheckResult {
    pub fn new(name: &str, max_err: f64, tol: f64, details: impl Into<String>) -> Self {
        CheckResult {
            name: name.into(),
            pass: max_err.is_finite() && max_err < tol,
            max_err,
            tol,
            details: details.into(),
        }
    }

    pub fn from_flag(name: &str, pass: bool, details: impl Into<String>) -> Self {
        CheckResult {
            name: name.into(),
            pass,
            max_err: if pass { 0.0 } else { f64::NAN },
            tol: f64::NAN,
            details: details.into(),
        }
    }
}

/// Top-level report written as report.json.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub subcommand: String,
    pub seed: u64,
    pub nodes: usize,
    pub params: Params,
    pub checks: Vec<CheckResult>,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn write_json(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut f = std::fs::File::create(dir.join("report.json"))?;
        let body =
            serde_json::to_string_pretty(self).map_err(|e| VdError::Io(e.to_string()))?;
        f.write_all(body.as_bytes())?;
        f.write_all(b"\n")?;
        Ok(())
    }
}

/// Write a CSV table with a fixed float format so identical runs produce
/// byte-identical files.
pub fn write_csv(dir: &Path, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join(name)).map_err(|e| VdError::Io(e.to_string()))?;
    w.write_record(header)
        .map_err(|e| VdError::Io(e.to_string()))?;
    for row in rows {
        w.write_record(row).map_err(|e| VdError::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.17e}")
}

/// Seeded complex points in the holomorphy strip |Im z| < frac * a, rejecting
/// points near the pole and zero lattices of G.
pub fn sample_strip_points(
    params: &Params,
    rng: &mut ChaCha8Rng,
    count: usize,
    strip_fraction: f64,
    min_dist: f64,
) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(count);
    let a = params.a();
    while out.len() < count {
        let re = rng.gen_range(-1.0..1.0) * params.period();
        let im = rng.gen_range(-strip_fraction..strip_fraction) * a;
        let z = c64(re, im);
        if specfun::dist_to_g_poles(params, z) > min_dist
            && specfun::dist_to_g_zeros(params, z) > min_dist
        {
            out.push(z);
        }
    }
    out
}

/// Seeded generic Pi_r coupling of the requested regime, with the sum
/// parameter kept clear of the continuation band edges and the half-shift
/// lattice, and the pole alignments reasonably generic.
pub fn sample_pi_r_coupling(
    params: &Params,
    rng: &mut ChaCha8Rng,
    regime: Regime,
) -> Result<Coupling> {
    let a = params.a();
    for _ in 0..20_000 {
        let g: [f64; 8] = std::array::from_fn(|_| rng.gen_range(-0.72 * a..0.5 * a));
        let c = match regime {
            Regime::Real => Coupling::real(params, g)?,
            Regime::Mixed => Coupling::mixed(params, g, [0, 0, 0, 0, 1, 1, -1, -1])?,
        };
        if !c.in_pi_r(params) {
            continue;
        }
        let sigma = c.sigma();
        // keep the large-shift probe height a_l - sigma away from the band
        // boundary at a_s, and sigma itself generic
        let in_window = (0.25..=0.34).contains(&sigma) || (0.46..=0.55).contains(&sigma);
        if !in_window {
            continue;
        }
        if sigma_lattice_distance(params, sigma) < 0.02 {
            continue;
        }
        if c.d_gamma(params) < 0.2 || c.dual().d_gamma(params) < 0.2 {
            continue;
        }
        return Ok(c);
    }
    Err(VdError::Domain(
        "could not sample a generic Pi_r coupling".into(),
    ))
}

/// Distance of sigma from the half-shift lattice {k a_s / 2}.
pub fn sigma_lattice_distance(params: &Params, sigma: f64) -> f64 {
    let step = 0.5 * params.a_small();
    let k = (sigma / step).round();
    (sigma - k * step).abs()
}

/// Seeded pairs of complex points with small imaginary parts for the kernel
/// identity checks.
pub fn sample_kernel_pairs(
    params: &Params,
    rng: &mut ChaCha8Rng,
    count: usize,
) -> Vec<(Complex64, Complex64)> {
    let l = params.half_period();
    (0..count)
        .map(|_| {
            (
                c64(rng.gen_range(0.1 * l..0.9 * l), rng.gen_range(-0.1..0.1)),
                c64(rng.gen_range(0.1 * l..0.9 * l), rng.gen_range(-0.1..0.1)),
            )
        })
        .collect()
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
