//! Monte-Carlo trials, analytic grids, and AFDM-vs-OFDM experiment plans.
//!
//! Trials are grouped into fixed blocks of [`TRIALS_PER_BLOCK`]. Each block
//! runs its trials in index order into private accumulators; blocks are then
//! merged strictly in block order. The partition depends only on the trial
//! count, so results are bit-identical for any number of worker threads.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ambiguity::ambiguity_grid_capped;
use crate::constellation::make_constellation;
use crate::error::{Error, Result};
use crate::grid::{AmbiguityGrid, GridKind, GridSpec, DEFAULT_MAX_POINTS};
use crate::metrics::{mainlobe_region, sensing_metrics, SensingMetrics};
use crate::modulator::{AfdmConfig, Rational};
use crate::rng::{trial_seed, RNG_NAME};
use crate::statistics::{rice_mean, rice_params, MomentRow};

pub const TRIALS_PER_BLOCK: usize = 8;

/// Blocks evaluated concurrently before folding into the running total.
const BLOCKS_PER_WAVE: usize = 8;

/// Per-point running statistics of `A` over a set of trials.
#[derive(Debug, Clone)]
struct Accumulator {
    count: u64,
    mean_abs: Vec<f64>,
    mean: Vec<Complex64>,
    /// Sum of `|A − mean|²`.
    m2: Vec<f64>,
}

impl Accumulator {
    fn new(points: usize) -> Self {
        Accumulator {
            count: 0,
            mean_abs: vec![0.0; points],
            mean: vec![Complex64::new(0.0, 0.0); points],
            m2: vec![0.0; points],
        }
    }

    /// Welford update with one trial.
    fn push(&mut self, values: &[Complex64]) {
        self.count += 1;
        let n = self.count as f64;
        for (i, &a) in values.iter().enumerate() {
            self.mean_abs[i] += (a.norm() - self.mean_abs[i]) / n;
            let delta = a - self.mean[i];
            self.mean[i] += delta / n;
            self.m2[i] += (delta.conj() * (a - self.mean[i])).re;
        }
    }

    /// Chan's pairwise combination; `other` covers the later trials.
    fn merge(&mut self, other: &Accumulator) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = other.clone();
            return;
        }
        let (na, nb) = (self.count as f64, other.count as f64);
        let n = na + nb;
        for i in 0..self.mean.len() {
            self.mean_abs[i] += (other.mean_abs[i] - self.mean_abs[i]) * (nb / n);
            let delta = other.mean[i] - self.mean[i];
            self.mean[i] += delta * (nb / n);
            self.m2[i] += other.m2[i] + delta.norm_sqr() * (na * nb / n);
        }
        self.count += other.count;
    }
}

/// Output of [`run_trials`].
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalGrids {
    /// Average of `|A|`.
    pub mean_magnitude: AmbiguityGrid,
    /// `|average of A|`.
    pub magnitude_of_mean: AmbiguityGrid,
    /// Unbiased per-point sample variance `Σ|A − Ā|²/(T − 1)`; zero when T = 1.
    pub variance: AmbiguityGrid,
    /// Complex `A` of trial 0.
    pub first_trial: AmbiguityGrid,
    pub trials: usize,
    pub base_seed: u64,
}

pub fn run_trials(cfg: &AfdmConfig, grid: &GridSpec, trials: usize, base_seed: u64) -> Result<EmpiricalGrids> {
    run_trials_capped(cfg, grid, trials, base_seed, DEFAULT_MAX_POINTS)
}

pub fn run_trials_capped(
    cfg: &AfdmConfig,
    grid: &GridSpec,
    trials: usize,
    base_seed: u64,
    max_points: usize,
) -> Result<EmpiricalGrids> {
    if trials == 0 {
        return Err(Error::InvalidConfig("trials must be at least 1".into()));
    }
    cfg.validate()?;
    grid.validate()?;
    grid.check_cap(max_points)?;
    let constellation = make_constellation(cfg.order)?;
    let points = grid.num_points();

    let trial_grid = |t: usize| -> Result<AmbiguityGrid> {
        let x = constellation.draw_symbols(cfg.n, trial_seed(base_seed, t as u64));
        ambiguity_grid_capped(&x, cfg, grid, max_points)
    };
    let first_trial = trial_grid(0)?;

    let run_block = |b: usize| -> Result<Accumulator> {
        let mut acc = Accumulator::new(points);
        for t in b * TRIALS_PER_BLOCK..((b + 1) * TRIALS_PER_BLOCK).min(trials) {
            let g = if t == 0 { first_trial.clone() } else { trial_grid(t)? };
            acc.push(g.as_complex().expect("ambiguity grids are complex"));
        }
        Ok(acc)
    };

    let blocks = trials.div_ceil(TRIALS_PER_BLOCK);
    let mut total = Accumulator::new(points);
    for wave in (0..blocks).step_by(BLOCKS_PER_WAVE) {
        let partial: Vec<Result<Accumulator>> =
            (wave..(wave + BLOCKS_PER_WAVE).min(blocks)).into_par_iter().map(run_block).collect();
        for acc in partial {
            total.merge(&acc?);
        }
    }

    let denom = if trials > 1 { (trials - 1) as f64 } else { 1.0 };
    Ok(EmpiricalGrids {
        mean_magnitude: AmbiguityGrid::real(*grid, GridKind::EmpiricalMeanMagnitude, total.mean_abs)?,
        magnitude_of_mean: AmbiguityGrid::real(
            *grid,
            GridKind::EmpiricalMagnitudeOfMean,
            total.mean.iter().map(|z| z.norm()).collect(),
        )?,
        variance: AmbiguityGrid::real(
            *grid,
            GridKind::EmpiricalVariance,
            total.m2.iter().map(|v| v / denom).collect(),
        )?,
        first_trial,
        trials,
        base_seed,
    })
}

/// Output of [`analytic_grids`].
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticGrids {
    pub mean: AmbiguityGrid,
    pub std: AmbiguityGrid,
    pub rice_mean: AmbiguityGrid,
}

pub fn analytic_grids(cfg: &AfdmConfig, grid: &GridSpec) -> Result<AnalyticGrids> {
    analytic_grids_capped(cfg, grid, DEFAULT_MAX_POINTS)
}

pub fn analytic_grids_capped(cfg: &AfdmConfig, grid: &GridSpec, max_points: usize) -> Result<AnalyticGrids> {
    cfg.validate()?;
    grid.validate()?;
    grid.check_cap(max_points)?;
    let kurtosis = make_constellation(cfg.order)?.kurtosis();
    let taus = grid.tau_axis().coords();
    let nus = grid.nu_axis().coords();
    let rows: Vec<Result<Vec<(f64, f64, f64)>>> = taus
        .par_iter()
        .map(|&tau| {
            let row = MomentRow::new(cfg, tau);
            nus.iter()
                .map(|&nu| {
                    let mp = row.at(cfg, nu, kurtosis);
                    let rice = rice_mean(&rice_params(&mp)?);
                    Ok((mp.mean.norm(), mp.variance.sqrt(), rice))
                })
                .collect()
        })
        .collect();
    let mut mean = Vec::with_capacity(grid.num_points());
    let mut std = Vec::with_capacity(grid.num_points());
    let mut rice = Vec::with_capacity(grid.num_points());
    for row in rows {
        for (m, s, r) in row? {
            mean.push(m);
            std.push(s);
            rice.push(r);
        }
    }
    Ok(AnalyticGrids {
        mean: AmbiguityGrid::real(*grid, GridKind::AnalyticMean, mean)?,
        std: AmbiguityGrid::real(*grid, GridKind::AnalyticStd, std)?,
        rice_mean: AmbiguityGrid::real(*grid, GridKind::RiceMean, rice)?,
    })
}

/// Mean of `|a − b|` over all lattice points.
pub fn mean_abs_deviation(a: &AmbiguityGrid, b: &AmbiguityGrid) -> Result<f64> {
    if a.spec != b.spec {
        return Err(Error::InvalidGrid("grids are sampled on different lattices".into()));
    }
    let (va, vb) = (a.magnitudes(), b.magnitudes());
    Ok(va.iter().zip(&vb).map(|(x, y)| (x - y).abs()).sum::<f64>() / va.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub cfgs: Vec<AfdmConfig>,
    pub grid: GridSpec,
    pub trials: usize,
    pub base_seed: u64,
    /// Grids to produce. Metrics are computed for every magnitude kind.
    pub outputs: Vec<GridKind>,
    #[serde(default = "default_max_points")]
    pub max_points: usize,
}

fn default_max_points() -> usize {
    DEFAULT_MAX_POINTS
}

impl ExperimentPlan {
    /// Every grid kind, default cap.
    pub fn new(cfgs: Vec<AfdmConfig>, grid: GridSpec, trials: usize, base_seed: u64) -> Self {
        ExperimentPlan { cfgs, grid, trials, base_seed, outputs: all_kinds(), max_points: DEFAULT_MAX_POINTS }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if self.cfgs.is_empty() {
            return Err(Error::InvalidConfig("plan has no configurations".into()));
        }
        for (i, a) in self.cfgs.iter().enumerate() {
            a.validate()?;
            if self.cfgs[..i].contains(a) {
                return Err(Error::InvalidConfig(format!("configuration {} appears twice", a.label())));
            }
        }
        self.grid.validate()?;
        self.grid.check_cap(self.max_points)
    }

    fn wants_empirical(&self) -> bool {
        self.outputs.iter().any(|k| {
            matches!(
                k,
                GridKind::ComplexSingleTrial
                    | GridKind::EmpiricalMeanMagnitude
                    | GridKind::EmpiricalMagnitudeOfMean
                    | GridKind::EmpiricalVariance
            )
        })
    }

    fn wants_analytic(&self) -> bool {
        self.outputs.iter().any(|k| matches!(k, GridKind::AnalyticMean | GridKind::AnalyticStd | GridKind::RiceMean))
    }
}

pub fn all_kinds() -> Vec<GridKind> {
    GridKind::ALL.to_vec()
}

/// The kinds PSLR/ISLR apply to.
pub fn magnitude_kinds() -> Vec<GridKind> {
    GridKind::ALL.into_iter().filter(|k| k.is_magnitude()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KindMetrics {
    pub grid_kind: GridKind,
    pub metrics: SensingMetrics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigResult {
    pub cfg: AfdmConfig,
    /// In the order requested by the plan.
    pub grids: Vec<AmbiguityGrid>,
    pub metrics: Vec<KindMetrics>,
}

impl ConfigResult {
    pub fn grid(&self, kind: GridKind) -> Option<&AmbiguityGrid> {
        self.grids.iter().find(|g| g.kind == kind)
    }

    pub fn metrics_for(&self, kind: GridKind) -> Option<&SensingMetrics> {
        self.metrics.iter().find(|m| m.grid_kind == kind).map(|m| &m.metrics)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub base_seed: u64,
    pub trials: usize,
    pub rng_name: String,
    pub software: String,
    pub version: String,
}

impl Provenance {
    fn for_plan(plan: &ExperimentPlan) -> Self {
        Provenance {
            base_seed: plan.base_seed,
            trials: plan.trials,
            rng_name: RNG_NAME.to_string(),
            software: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub plan: ExperimentPlan,
    pub configs: Vec<ConfigResult>,
    pub provenance: Provenance,
}

/// Runs every configuration of the plan with the same trial seeds, so the
/// waveforms are compared on identical symbol draws.
pub fn compare(plan: &ExperimentPlan) -> Result<ExperimentResult> {
    plan.validate()?;
    let mut configs = Vec::with_capacity(plan.cfgs.len());
    for cfg in &plan.cfgs {
        let empirical = if plan.wants_empirical() {
            Some(run_trials_capped(cfg, &plan.grid, plan.trials, plan.base_seed, plan.max_points)?)
        } else {
            None
        };
        let analytic = if plan.wants_analytic() {
            Some(analytic_grids_capped(cfg, &plan.grid, plan.max_points)?)
        } else {
            None
        };
        let mut grids = Vec::with_capacity(plan.outputs.len());
        for &kind in &plan.outputs {
            let (e, a) = (empirical.as_ref(), analytic.as_ref());
            let g = match kind {
                GridKind::ComplexSingleTrial => e.map(|e| e.first_trial.clone()),
                GridKind::EmpiricalMeanMagnitude => e.map(|e| e.mean_magnitude.clone()),
                GridKind::EmpiricalMagnitudeOfMean => e.map(|e| e.magnitude_of_mean.clone()),
                GridKind::EmpiricalVariance => e.map(|e| e.variance.clone()),
                GridKind::AnalyticMean => a.map(|a| a.mean.clone()),
                GridKind::AnalyticStd => a.map(|a| a.std.clone()),
                GridKind::RiceMean => a.map(|a| a.rice_mean.clone()),
            };
            grids.push(g.expect("requested family was computed"));
        }
        let region = mainlobe_region(cfg);
        let metrics = grids
            .iter()
            .filter(|g| g.kind.is_magnitude())
            .map(|g| Ok(KindMetrics { grid_kind: g.kind, metrics: sensing_metrics(g, &region)? }))
            .collect::<Result<Vec<_>>>()?;
        configs.push(ConfigResult { cfg: cfg.clone(), grids, metrics });
    }
    Ok(ExperimentResult { plan: plan.clone(), configs, provenance: Provenance::for_plan(plan) })
}

/// `template` with N and M replaced by every combination, each followed by
/// its OFDM counterpart when `with_ofdm` is set. Duplicates are dropped.
pub fn sweep_configs(template: &AfdmConfig, ns: &[usize], orders: &[u32], with_ofdm: bool) -> Result<Vec<AfdmConfig>> {
    let mut cfgs: Vec<AfdmConfig> = Vec::new();
    for &n in ns {
        for &order in orders {
            let cfg = AfdmConfig { n, order, ..template.clone() };
            make_constellation(order)?;
            cfg.validate()?;
            let ofdm = AfdmConfig { c1: Rational::from_integer(0), c2: 0.0, ..cfg.clone() };
            for c in std::iter::once(cfg).chain(with_ofdm.then_some(ofdm)) {
                if !cfgs.contains(&c) {
                    cfgs.push(c);
                }
            }
        }
    }
    Ok(cfgs)
}
