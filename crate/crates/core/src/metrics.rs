//! Mainlobe geometry and sidelobe metrics over magnitude grids.
//!
//! The mainlobe of `|E A|` is the parallelogram bounded by the first zeros
//! of `sinc(2c1Nτ + ν)` (at `±1`) and of the Dirichlet factor (at `τ = ±1`).
//! Every other lattice point is a sidelobe point.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::AmbiguityGrid;
use crate::modulator::{AfdmConfig, Rational};

/// Returned instead of −∞ when the sidelobe energy or peak is exactly zero.
pub const DB_FLOOR: f64 = -300.0;

/// Slack on the closed region boundary, absorbing lattice rounding.
pub const BOUNDARY_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct MainlobeRegion {
    /// `2·c1·N`
    pub two_c1_n: Rational,
    slope: f64,
}

impl MainlobeRegion {
    pub fn new(two_c1_n: Rational) -> Self {
        let slope = *two_c1_n.numer() as f64 / *two_c1_n.denom() as f64;
        MainlobeRegion { two_c1_n, slope }
    }

    /// `|τ| ≤ 1` and `|2c1Nτ + ν| ≤ 1`, boundary included.
    pub fn contains(&self, tau: f64, nu: f64) -> bool {
        tau.abs() <= 1.0 + BOUNDARY_SLACK && (self.slope * tau + nu).abs() <= 1.0 + BOUNDARY_SLACK
    }

    /// `(1, 1−2c1N)`, `(1, −1−2c1N)`, `(−1, 2c1N+1)`, `(−1, 2c1N−1)`.
    pub fn vertices(&self) -> [(Rational, Rational); 4] {
        let one = Rational::from_integer(1);
        let k = self.two_c1_n;
        [(one, one - k), (one, -one - k), (-one, k + one), (-one, k - one)]
    }

    pub fn vertices_f64(&self) -> [(f64, f64); 4] {
        let f = |r: Rational| *r.numer() as f64 / *r.denom() as f64;
        self.vertices().map(|(t, v)| (f(t), f(v)))
    }
}

pub fn mainlobe_region(cfg: &AfdmConfig) -> MainlobeRegion {
    MainlobeRegion::new(cfg.two_c1_n())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SidelobePeak {
    pub pslr_db: f64,
    pub tau: f64,
    pub nu: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensingMetrics {
    pub pslr_db: f64,
    pub islr_db: f64,
    pub peak_sidelobe_tau: f64,
    pub peak_sidelobe_nu: f64,
}

fn to_db(ratio: f64, factor: f64) -> f64 {
    if ratio > 0.0 {
        (factor * ratio.log10()).max(DB_FLOOR)
    } else {
        DB_FLOOR
    }
}

fn magnitude_values(grid: &AmbiguityGrid) -> Result<Vec<f64>> {
    let v = grid.magnitudes();
    if v.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(Error::Numeric("magnitude grid holds negative or non-finite values".into()));
    }
    Ok(v)
}

/// Location key for the tie-break: smaller |τ|, then smaller |ν|, then
/// smaller τ, then smaller ν.
fn tie_key(tau: f64, nu: f64) -> (f64, f64, f64, f64) {
    (tau.abs(), nu.abs(), tau, nu)
}

/// `20 log10(max_S |A| / |A(0,0)|)` and where the maximum sits.
pub fn pslr(grid: &AmbiguityGrid, region: &MainlobeRegion) -> Result<SidelobePeak> {
    let values = magnitude_values(grid)?;
    let reference = values[grid.spec.origin_index()];
    if reference <= 0.0 {
        return Err(Error::DegenerateGrid);
    }
    let taus = grid.spec.tau_axis().coords();
    let nus = grid.spec.nu_axis().coords();
    let mut best: Option<(f64, f64, f64)> = None;
    for (i, &tau) in taus.iter().enumerate() {
        for (j, &nu) in nus.iter().enumerate() {
            if region.contains(tau, nu) {
                continue;
            }
            let v = values[i * nus.len() + j];
            let better = match best {
                None => true,
                Some((bv, bt, bn)) => v > bv || (v == bv && tie_key(tau, nu) < tie_key(bt, bn)),
            };
            if better {
                best = Some((v, tau, nu));
            }
        }
    }
    let (v, tau, nu) = best.ok_or(Error::RegionCoversGrid)?;
    Ok(SidelobePeak { pslr_db: to_db(v / reference, 20.0), tau, nu })
}

/// `10 log10(Σ_S |A|² ΔτΔν / Σ_M |A|² ΔτΔν)`.
pub fn islr(grid: &AmbiguityGrid, region: &MainlobeRegion) -> Result<f64> {
    let values = magnitude_values(grid)?;
    let taus = grid.spec.tau_axis().coords();
    let nus = grid.spec.nu_axis().coords();
    let cell = grid.spec.tau_step * grid.spec.nu_step;
    let (mut side, mut main) = (0.0, 0.0);
    let mut side_points = 0usize;
    for (i, &tau) in taus.iter().enumerate() {
        for (j, &nu) in nus.iter().enumerate() {
            let e = values[i * nus.len() + j].powi(2) * cell;
            if region.contains(tau, nu) {
                main += e;
            } else {
                side += e;
                side_points += 1;
            }
        }
    }
    if side_points == 0 {
        return Err(Error::RegionCoversGrid);
    }
    if main <= 0.0 {
        return Err(Error::DegenerateGrid);
    }
    Ok(to_db(side / main, 10.0))
}

pub fn sensing_metrics(grid: &AmbiguityGrid, region: &MainlobeRegion) -> Result<SensingMetrics> {
    let peak = pslr(grid, region)?;
    Ok(SensingMetrics {
        pslr_db: peak.pslr_db,
        islr_db: islr(grid, region)?,
        peak_sidelobe_tau: peak.tau,
        peak_sidelobe_nu: peak.nu,
    })
}
