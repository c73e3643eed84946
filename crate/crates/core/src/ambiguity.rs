//! Normalized sampled ambiguity function of an AFDM symbol block.
//!
//! For symbols `x` and normalized delay/Doppler `(τ, ν)`:
//!
//! ```text
//! A(τ,ν) = (1/N) Σ_{m,m'} x_m x*_{m'} sinc(β_{m,m'}) exp(jΨ_{m,m'})
//! β = 2c1Nτ + ν + (m − m')
//! Φ = c2(m² − m'²) − c1τ² + (m'/N − q)τ
//! Ψ = 2πΦ + πβ
//! ```
//!
//! [`ambiguity_point`] evaluates the double sum directly. [`ambiguity_grid`]
//! groups summands by the diagonal `k = m − m'`: the inner sum over `m'` does
//! not depend on ν, so each τ-row costs O(N²) once plus O(N) per ν sample.

use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::Zero;
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::constellation::SymbolVector;
use crate::error::{Error, Result};
use crate::grid::{AmbiguityGrid, GridSpec, DEFAULT_MAX_POINTS};
use crate::modulator::{AfdmConfig, Rational};
use crate::special::{cis_cycles, sinc};

pub fn beta(m: usize, mp: usize, tau: f64, nu: f64, cfg: &AfdmConfig) -> f64 {
    2.0 * cfg.c1_f64() * cfg.n as f64 * tau + nu + (m as f64 - mp as f64)
}

/// `(Φ, Ψ)` for the pair `(m, m')`.
pub fn phase_terms(m: usize, mp: usize, tau: f64, nu: f64, cfg: &AfdmConfig) -> (f64, f64) {
    let (mf, mpf) = (m as f64, mp as f64);
    let phi = cfg.c2 * (mf * mf - mpf * mpf) - cfg.c1_f64() * tau * tau
        + (mpf / cfg.n as f64 - cfg.q as f64) * tau;
    let psi = 2.0 * PI * phi + PI * beta(m, mp, tau, nu, cfg);
    (phi, psi)
}

/// `sinc(β) e^{jΨ}` for one `(m, m')` pair, with the phase reduced in cycles.
pub(crate) fn kernel_entry(m: usize, mp: usize, tau: f64, nu: f64, cfg: &AfdmConfig) -> Complex64 {
    let b = beta(m, mp, tau, nu, cfg);
    let (mf, mpf) = (m as f64, mp as f64);
    let chirp = (cfg.c2 * (mf * mf - mpf * mpf)).rem_euclid(1.0);
    let cycles = chirp - cfg.c1_f64() * tau * tau + (mpf / cfg.n as f64 - cfg.q as f64) * tau + 0.5 * b;
    cis_cycles(cycles) * sinc(b)
}

fn check_len(x: &SymbolVector, cfg: &AfdmConfig) -> Result<()> {
    if x.len() != cfg.n {
        return Err(Error::Dimension { expected: cfg.n, got: x.len() });
    }
    Ok(())
}

/// Direct O(N²) evaluation of `A(τ, ν)`.
pub fn ambiguity_point(x: &SymbolVector, cfg: &AfdmConfig, tau: f64, nu: f64) -> Result<Complex64> {
    check_len(x, cfg)?;
    let mut acc = Complex64::zero();
    for (m, &xm) in x.symbols.iter().enumerate() {
        for (mp, &xmp) in x.symbols.iter().enumerate() {
            acc += xm * xmp.conj() * kernel_entry(m, mp, tau, nu, cfg);
        }
    }
    Ok(acc / cfg.n as f64)
}

/// Per-block precomputation shared by all rows of a grid.
pub(crate) struct DiagonalKernel<'a> {
    cfg: &'a AfdmConfig,
    /// `x_m · exp(j2π c2 m²)`
    chirped: Vec<Complex64>,
    two_c1_n: f64,
}

impl<'a> DiagonalKernel<'a> {
    pub(crate) fn new(x: &SymbolVector, cfg: &'a AfdmConfig) -> Self {
        let chirped = x
            .symbols
            .iter()
            .enumerate()
            .map(|(m, &xm)| xm * cis_cycles((cfg.c2 * (m * m) as f64).rem_euclid(1.0)))
            .collect();
        DiagonalKernel { cfg, chirped, two_c1_n: 2.0 * cfg.c1_f64() * cfg.n as f64 }
    }

    /// `g_k(τ) = Σ_{m'} y_{m'+k} y*_{m'} e^{j2π m'τ/N}` for `k = −(N−1)..=N−1`,
    /// stored at `k + N − 1`.
    pub(crate) fn diagonals(&self, tau: f64, out: &mut Vec<Complex64>, scratch: &mut Vec<Complex64>) {
        let n = self.cfg.n;
        scratch.clear();
        scratch.extend(self.chirped.iter().enumerate().map(|(mp, y)| {
            y.conj() * cis_cycles(mp as f64 * tau / n as f64)
        }));
        out.clear();
        out.resize(2 * n - 1, Complex64::zero());
        for k in -(n as isize - 1)..=(n as isize - 1) {
            let (start, end) = if k >= 0 { (0, n - k as usize) } else { ((-k) as usize, n) };
            let lo = (start as isize + k) as usize;
            let acc: Complex64 = self.chirped[lo..lo + (end - start)]
                .iter()
                .zip(&scratch[start..end])
                .map(|(a, b)| a * b)
                .sum();
            out[(k + n as isize - 1) as usize] = acc;
        }
    }

    /// Fills `row[j] = A(τ, ν_j)` given the diagonals for τ.
    pub(crate) fn row(&self, tau: f64, nus: &[f64], diag: &[Complex64], row: &mut [Complex64]) {
        let n = self.cfg.n as i64;
        let common = cis_cycles(-self.cfg.c1_f64() * tau * tau - self.cfg.q as f64 * tau) / n as f64;
        let b0 = self.two_c1_n * tau;
        for (out, &nu) in row.iter_mut().zip(nus) {
            let b = b0 + nu;
            let r = b.round();
            let f = b - r;
            let s_over_pi = (PI * f).sin() / PI;
            // sinc(b+k) e^{jπ(b+k)} = e^{jπf} · sin(πf)/(π(b+k)), or e^{jπf} sinc(f) at b+k = f.
            let r = r as i64;
            let mut acc = Complex64::zero();
            if s_over_pi != 0.0 {
                for (idx, g) in diag.iter().enumerate() {
                    let j = r + idx as i64 - (n - 1);
                    if j != 0 {
                        acc += g * (s_over_pi / (j as f64 + f));
                    }
                }
            }
            let center = -r + (n - 1);
            if (0..2 * n - 1).contains(&center) {
                acc += diag[center as usize] * sinc(f);
            }
            *out = common * cis_cycles(0.5 * f) * acc;
        }
    }
}

/// `A(τ, ν)` on every lattice point, via the diagonal fast path.
pub fn ambiguity_grid(x: &SymbolVector, cfg: &AfdmConfig, grid: &GridSpec) -> Result<AmbiguityGrid> {
    ambiguity_grid_capped(x, cfg, grid, DEFAULT_MAX_POINTS)
}

pub fn ambiguity_grid_capped(
    x: &SymbolVector,
    cfg: &AfdmConfig,
    grid: &GridSpec,
    max_points: usize,
) -> Result<AmbiguityGrid> {
    check_len(x, cfg)?;
    grid.validate()?;
    grid.check_cap(max_points)?;
    let kernel = DiagonalKernel::new(x, cfg);
    let taus = grid.tau_axis().coords();
    let nus = grid.nu_axis().coords();
    let mut values = vec![Complex64::zero(); taus.len() * nus.len()];
    values
        .par_chunks_mut(nus.len())
        .zip(taus.par_iter())
        .for_each_init(
            || (Vec::new(), Vec::new()),
            |(diag, scratch), (row, &tau)| {
                kernel.diagonals(tau, diag, scratch);
                kernel.row(tau, &nus, diag, row);
            },
        );
    AmbiguityGrid::complex(*grid, values)
}

/// Fast-path `A(τ, ν)` at scattered points.
pub fn ambiguity_points(x: &SymbolVector, cfg: &AfdmConfig, points: &[(f64, f64)]) -> Result<Vec<Complex64>> {
    check_len(x, cfg)?;
    let kernel = DiagonalKernel::new(x, cfg);
    let (mut diag, mut scratch) = (Vec::new(), Vec::new());
    let mut out = vec![Complex64::zero(); 1];
    Ok(points
        .iter()
        .map(|&(tau, nu)| {
            kernel.diagonals(tau, &mut diag, &mut scratch);
            kernel.row(tau, &[nu], &diag, &mut out);
            out[0]
        })
        .collect())
}

/// Dirichlet ratio `|sin(πτ)| / |sin(πτ/N)|`, equal to N at multiples of N.
pub fn dirichlet_ratio(tau: f64, n: usize) -> f64 {
    let nf = n as f64;
    let eps = tau - nf * (tau / nf).round();
    nf * sinc(eps).abs() / sinc(eps / nf).abs()
}

/// `|E A(τ,ν)| = (1/N)|sinc(2c1Nτ + ν)| · |sin(πτ)|/|sin(πτ/N)|`.
pub fn expected_magnitude_closed_form(cfg: &AfdmConfig, tau: f64, nu: f64) -> f64 {
    let b = 2.0 * cfg.c1_f64() * cfg.n as f64 * tau + nu;
    sinc(b).abs() * dirichlet_ratio(tau, cfg.n) / cfg.n as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensingFailure {
    pub tau: i64,
    /// `2·c1·N·τ`
    pub value: Rational,
    pub not_integer: bool,
    pub below_n: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensingReport {
    pub two_c1_n: Rational,
    pub n: usize,
    pub tau_max: i64,
    pub failures: Vec<SensingFailure>,
}

impl SensingReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Tests `2c1Nτ ∈ ℤ_{≥N}` for every integer `τ ∈ [1, tau_max]`, exactly.
pub fn check_sensing_condition(cfg: &AfdmConfig, tau_max: i64) -> SensingReport {
    let two_c1_n = cfg.two_c1_n();
    let n = Ratio::from_integer(cfg.n as i64);
    let failures = (1..=tau_max)
        .filter_map(|tau| {
            let value = two_c1_n * Ratio::from_integer(tau);
            let not_integer = !value.is_integer();
            let below_n = value < n;
            (not_integer || below_n).then_some(SensingFailure { tau, value, not_integer, below_n })
        })
        .collect();
    SensingReport { two_c1_n, n: cfg.n, tau_max, failures }
}
