//! Rectangular delay-Doppler lattices and the values sampled on them.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on lattice size for grid evaluation.
pub const DEFAULT_MAX_POINTS: usize = 10_000_000;

/// Axis-aligned lattice in normalized delay τ (units of Ts) and normalized
/// Doppler ν (units of Δf).
///
/// Lattice points are integer multiples of the step, so `(0, 0)` is always
/// on the lattice; `min`/`max` are clipped inward to the nearest multiple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub tau_min: f64,
    pub tau_max: f64,
    pub tau_step: f64,
    pub nu_min: f64,
    pub nu_max: f64,
    pub nu_step: f64,
}

impl Default for GridSpec {
    /// τ ∈ [−16, 16], ν ∈ [−8, 8], both with step 0.1.
    fn default() -> Self {
        GridSpec { tau_min: -16.0, tau_max: 16.0, tau_step: 0.1, nu_min: -8.0, nu_max: 8.0, nu_step: 0.1 }
    }
}

/// One lattice axis: integer indices `lo..=hi` mapped to coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub lo: i64,
    pub hi: i64,
    pub step: f64,
    /// `1/step` when it is an integer, so coordinates are exact quotients.
    inv_step: Option<f64>,
}

impl Axis {
    fn new(min: f64, max: f64, step: f64) -> Self {
        let slack = 1e-9;
        let lo = (min / step - slack).ceil() as i64;
        let hi = (max / step + slack).floor() as i64;
        let inv = (1.0 / step).round();
        let inv_step = ((inv * step - 1.0).abs() < 1e-12).then_some(inv);
        Axis { lo, hi, step, inv_step }
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo + 1).max(0) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn coord(&self, index: usize) -> f64 {
        let i = (self.lo + index as i64) as f64;
        match self.inv_step {
            Some(inv) => i / inv,
            None => i * self.step,
        }
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.coord(i)).collect()
    }

    /// Position of the zero coordinate.
    pub fn zero_index(&self) -> usize {
        (-self.lo) as usize
    }
}

impl GridSpec {
    pub fn new(tau: (f64, f64, f64), nu: (f64, f64, f64)) -> Result<Self> {
        let g = GridSpec {
            tau_min: tau.0,
            tau_max: tau.1,
            tau_step: tau.2,
            nu_min: nu.0,
            nu_max: nu.1,
            nu_step: nu.2,
        };
        g.validate()?;
        Ok(g)
    }

    /// Same delay span as the default, Doppler sampled at integer ν.
    pub fn integer_doppler() -> Self {
        GridSpec { nu_step: 1.0, ..GridSpec::default() }
    }

    /// The single point `(0, 0)`.
    pub fn origin() -> Self {
        GridSpec { tau_min: 0.0, tau_max: 0.0, tau_step: 1.0, nu_min: 0.0, nu_max: 0.0, nu_step: 1.0 }
    }

    /// Both steps divided by two, same extent.
    pub fn refined(&self) -> Self {
        GridSpec { tau_step: self.tau_step / 2.0, nu_step: self.nu_step / 2.0, ..*self }
    }

    pub fn validate(&self) -> Result<()> {
        let vals = [self.tau_min, self.tau_max, self.tau_step, self.nu_min, self.nu_max, self.nu_step];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid("bounds and steps must be finite".into()));
        }
        if self.tau_step <= 0.0 || self.nu_step <= 0.0 {
            return Err(Error::InvalidGrid("steps must be positive".into()));
        }
        if self.tau_min > self.tau_max || self.nu_min > self.nu_max {
            return Err(Error::InvalidGrid("min must not exceed max".into()));
        }
        if self.tau_min > 0.0 || self.tau_max < 0.0 || self.nu_min > 0.0 || self.nu_max < 0.0 {
            return Err(Error::InvalidGrid("grid must contain the origin (0, 0)".into()));
        }
        Ok(())
    }

    pub fn tau_axis(&self) -> Axis {
        Axis::new(self.tau_min, self.tau_max, self.tau_step)
    }

    pub fn nu_axis(&self) -> Axis {
        Axis::new(self.nu_min, self.nu_max, self.nu_step)
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.tau_axis().len(), self.nu_axis().len())
    }

    pub fn num_points(&self) -> usize {
        let (a, b) = self.shape();
        a * b
    }

    pub fn check_cap(&self, cap: usize) -> Result<()> {
        let points = self.num_points();
        if points > cap {
            return Err(Error::Resource { points, cap });
        }
        Ok(())
    }

    /// Row-major index of the origin.
    pub fn origin_index(&self) -> usize {
        self.tau_axis().zero_index() * self.nu_axis().len() + self.nu_axis().zero_index()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKind {
    ComplexSingleTrial,
    /// Average of |A| over trials.
    EmpiricalMeanMagnitude,
    /// |average of A| over trials.
    EmpiricalMagnitudeOfMean,
    /// Per-point sample variance of A over trials.
    EmpiricalVariance,
    /// |μ_A| from the trace formula.
    AnalyticMean,
    /// σ_A from the variance formula.
    AnalyticStd,
    /// Mean of the Rice approximation of |A|.
    RiceMean,
}

impl GridKind {
    pub fn name(&self) -> &'static str {
        match self {
            GridKind::ComplexSingleTrial => "complex_single_trial",
            GridKind::EmpiricalMeanMagnitude => "empirical_mean_magnitude",
            GridKind::EmpiricalMagnitudeOfMean => "empirical_magnitude_of_mean",
            GridKind::EmpiricalVariance => "empirical_variance",
            GridKind::AnalyticMean => "analytic_mean",
            GridKind::AnalyticStd => "analytic_std",
            GridKind::RiceMean => "rice_mean",
        }
    }

    pub fn from_name(name: &str) -> Option<GridKind> {
        GridKind::ALL.into_iter().find(|k| k.name() == name)
    }

    pub const ALL: [GridKind; 7] = [
        GridKind::ComplexSingleTrial,
        GridKind::EmpiricalMeanMagnitude,
        GridKind::EmpiricalMagnitudeOfMean,
        GridKind::EmpiricalVariance,
        GridKind::AnalyticMean,
        GridKind::AnalyticStd,
        GridKind::RiceMean,
    ];

    /// Whether the grid is a magnitude surface that sidelobe metrics apply to.
    pub fn is_magnitude(&self) -> bool {
        matches!(
            self,
            GridKind::EmpiricalMeanMagnitude
                | GridKind::EmpiricalMagnitudeOfMean
                | GridKind::AnalyticMean
                | GridKind::RiceMean
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GridValues {
    Complex(Vec<Complex64>),
    Real(Vec<f64>),
}

/// Values on a [`GridSpec`] lattice, row-major with τ outer and ν inner.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbiguityGrid {
    pub spec: GridSpec,
    pub kind: GridKind,
    pub values: GridValues,
}

impl AmbiguityGrid {
    pub fn real(spec: GridSpec, kind: GridKind, values: Vec<f64>) -> Result<Self> {
        Self::checked(spec, kind, GridValues::Real(values))
    }

    pub fn complex(spec: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        Self::checked(spec, GridKind::ComplexSingleTrial, GridValues::Complex(values))
    }

    fn checked(spec: GridSpec, kind: GridKind, values: GridValues) -> Result<Self> {
        let len = match &values {
            GridValues::Complex(v) => v.len(),
            GridValues::Real(v) => v.len(),
        };
        if len != spec.num_points() {
            return Err(Error::Dimension { expected: spec.num_points(), got: len });
        }
        Ok(AmbiguityGrid { spec, kind, values })
    }

    pub fn shape(&self) -> (usize, usize) {
        self.spec.shape()
    }

    /// Real values, or magnitudes of complex ones.
    pub fn magnitudes(&self) -> Vec<f64> {
        match &self.values {
            GridValues::Real(v) => v.clone(),
            GridValues::Complex(v) => v.iter().map(|z| z.norm()).collect(),
        }
    }

    pub fn as_real(&self) -> Option<&[f64]> {
        match &self.values {
            GridValues::Real(v) => Some(v),
            GridValues::Complex(_) => None,
        }
    }

    pub fn as_complex(&self) -> Option<&[Complex64]> {
        match &self.values {
            GridValues::Complex(v) => Some(v),
            GridValues::Real(_) => None,
        }
    }

    /// Same lattice, values replaced by magnitudes, tagged with `kind`.
    pub fn to_magnitude(&self, kind: GridKind) -> AmbiguityGrid {
        AmbiguityGrid { spec: self.spec, kind, values: GridValues::Real(self.magnitudes()) }
    }

    /// `(τ, ν)` of the flat index `idx`.
    pub fn coords_of(&self, idx: usize) -> (f64, f64) {
        let nu = self.spec.nu_axis();
        (self.spec.tau_axis().coord(idx / nu.len()), nu.coord(idx % nu.len()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_lattice_shape() {
        let g = GridSpec::default();
        assert_eq!(g.shape(), (321, 161));
        let taus = g.tau_axis().coords();
        assert_eq!(taus[160], 0.0);
        assert_eq!(taus[0], -16.0);
        assert_eq!(*taus.last().unwrap(), 16.0);
        // Integral coordinates are exact.
        assert_eq!(taus[160 + 70], 7.0);
        assert_eq!(g.origin_index(), 160 * 161 + 80);
    }

    #[test]
    fn lattice_is_anchored_at_zero() {
        let g = GridSpec::new((-1.05, 2.0, 0.25), (-0.3, 0.3, 0.2)).unwrap();
        assert_eq!(g.tau_axis().coords(), vec![-1.0, -0.75, -0.5, -0.25, 0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0]);
        assert_eq!(g.nu_axis().coords(), vec![-0.2, 0.0, 0.2]);
        let a = g.nu_axis();
        assert_eq!(a.coord(a.zero_index()), 0.0);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(GridSpec::new((-1.0, 1.0, 0.0), (-1.0, 1.0, 0.1)).is_err());
        assert!(GridSpec::new((1.0, -1.0, 0.1), (-1.0, 1.0, 0.1)).is_err());
        assert!(GridSpec::new((0.5, 1.0, 0.1), (-1.0, 1.0, 0.1)).is_err());
        assert!(GridSpec::new((-1.0, 1.0, f64::NAN), (-1.0, 1.0, 0.1)).is_err());
    }

    #[test]
    fn cap_is_enforced() {
        let g = GridSpec::default();
        assert!(g.check_cap(DEFAULT_MAX_POINTS).is_ok());
        assert!(matches!(g.check_cap(1000), Err(Error::Resource { points: 51681, cap: 1000 })));
    }

    #[test]
    fn grid_dimension_check() {
        assert!(AmbiguityGrid::real(GridSpec::origin(), GridKind::RiceMean, vec![1.0, 2.0]).is_err());
        let g = AmbiguityGrid::real(GridSpec::origin(), GridKind::RiceMean, vec![1.0]).unwrap();
        assert_eq!(g.coords_of(0), (0.0, 0.0));
    }
}
