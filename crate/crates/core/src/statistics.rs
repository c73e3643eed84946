//! Mean, variance and Rice approximation of `A(τ,ν)` over random QAM data.
//!
//! Writing `A = (1/N) xᴴ W x`, with `W[i][j] = sinc(β_{j,i}) e^{jΨ_{j,i}}`
//! (the transpose of the summand kernel indexed `(m, m')`), properness and
//! unit power of the symbols give
//!
//! ```text
//! μ_A  = tr(W) / N
//! σ²_A = (tr(W Wᴴ) + (κ − 2)‖diag W‖²) / N²
//! ```
//!
//! where κ = E|x|⁴. Treating `A` as complex Gaussian, `|A|` is Rice with
//! `s = |μ_A|` and `σ²_R = σ²_A / 2`.

use num_complex::Complex64;
use num_traits::Zero;
use std::f64::consts::PI;

use crate::ambiguity::kernel_entry;
use crate::error::{Error, Result};
use crate::modulator::AfdmConfig;
use crate::special::{bessel_i0e, bessel_i1e, cis_cycles, sinc};

/// Negative variances down to this are rounding noise and clamp to zero.
pub const VARIANCE_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct WMatrix {
    pub n: usize,
    pub tau: f64,
    pub nu: f64,
    /// Row-major N×N.
    pub entries: Vec<Complex64>,
}

impl WMatrix {
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.n + j]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    /// `tr(W Wᴴ)`, the squared Frobenius norm.
    pub fn gram_trace(&self) -> f64 {
        self.entries.iter().map(|w| w.norm_sqr()).sum()
    }

    /// `‖diag W‖²`
    pub fn diag_energy(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i).norm_sqr()).sum()
    }

    /// `(1/N) xᴴ W x`
    pub fn quadratic_form(&self, x: &[Complex64]) -> Result<Complex64> {
        if x.len() != self.n {
            return Err(Error::Dimension { expected: self.n, got: x.len() });
        }
        let mut acc = Complex64::zero();
        for (i, xi) in x.iter().enumerate() {
            let row: Complex64 = (0..self.n).map(|j| self.get(i, j) * x[j]).sum();
            acc += xi.conj() * row;
        }
        Ok(acc / self.n as f64)
    }
}

pub fn build_w(cfg: &AfdmConfig, tau: f64, nu: f64) -> WMatrix {
    let n = cfg.n;
    let mut entries = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            entries.push(kernel_entry(j, i, tau, nu, cfg));
        }
    }
    WMatrix { n, tau, nu, entries }
}

/// `μ_A = tr(W)/N`, summed over the diagonal without building W.
pub fn analytic_mean(cfg: &AfdmConfig, tau: f64, nu: f64) -> Complex64 {
    let trace: Complex64 = (0..cfg.n).map(|m| kernel_entry(m, m, tau, nu, cfg)).sum();
    trace / cfg.n as f64
}

/// `(tr(W Wᴴ), ‖diag W‖²)`. Both depend only on `b = 2c1Nτ + ν`: the
/// k-th diagonal of W has N − |k| entries of magnitude |sinc(b + k)|.
pub(crate) fn trace_terms(n: usize, b: f64) -> (f64, f64) {
    let r = b.round();
    let f = b - r;
    let s = (PI * f).sin() / PI;
    let s2 = s * s;
    let r = r as i64;
    let n_i = n as i64;
    let mut gram = 0.0;
    for k in -(n_i - 1)..n_i {
        let j = r + k;
        let weight = (n_i - k.abs()) as f64;
        gram += weight * if j == 0 { sinc(f).powi(2) } else { s2 / (j as f64 + f).powi(2) };
    }
    let diag = n as f64 * sinc(b).powi(2);
    (gram, diag)
}

fn clamp_variance(v: f64) -> f64 {
    if (-VARIANCE_CLAMP..0.0).contains(&v) {
        0.0
    } else {
        v
    }
}

/// `σ²_A = (tr(W Wᴴ) + (κ − 2)‖diag W‖²)/N²`.
pub fn analytic_variance(cfg: &AfdmConfig, tau: f64, nu: f64, kurtosis: f64) -> f64 {
    let b = 2.0 * cfg.c1_f64() * cfg.n as f64 * tau + nu;
    let (gram, diag) = trace_terms(cfg.n, b);
    let n2 = (cfg.n * cfg.n) as f64;
    clamp_variance((gram + (kurtosis - 2.0) * diag) / n2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentPair {
    pub mean: Complex64,
    pub variance: f64,
}

pub fn analytic_moments(cfg: &AfdmConfig, tau: f64, nu: f64, kurtosis: f64) -> MomentPair {
    MomentPair { mean: analytic_mean(cfg, tau, nu), variance: analytic_variance(cfg, tau, nu, kurtosis) }
}

/// Row evaluator for grids: shares the ν-independent part of the mean.
pub(crate) struct MomentRow {
    /// `e^{j2π(−c1τ² − qτ)} Σ_m e^{j2πmτ/N} / N`
    diagonal_sum: Complex64,
    b0: f64,
}

impl MomentRow {
    pub(crate) fn new(cfg: &AfdmConfig, tau: f64) -> Self {
        let n = cfg.n as f64;
        let phasors: Complex64 = (0..cfg.n).map(|m| cis_cycles(m as f64 * tau / n)).sum();
        let common = cis_cycles(-cfg.c1_f64() * tau * tau - cfg.q as f64 * tau);
        MomentRow { diagonal_sum: common * phasors / n, b0: 2.0 * cfg.c1_f64() * n * tau }
    }

    pub(crate) fn at(&self, cfg: &AfdmConfig, nu: f64, kurtosis: f64) -> MomentPair {
        let b = self.b0 + nu;
        let f = b - b.round();
        let mean = self.diagonal_sum * sinc(b) * cis_cycles(0.5 * f) * if (b.round() as i64) % 2 == 0 { 1.0 } else { -1.0 };
        let (gram, diag) = trace_terms(cfg.n, b);
        let n2 = (cfg.n * cfg.n) as f64;
        MomentPair { mean, variance: clamp_variance((gram + (kurtosis - 2.0) * diag) / n2) }
    }
}

/// `E(x_i* x_j x_k x_l*)` for i.i.d. proper unit-power symbols:
/// `δ_ij δ_kl + δ_ik δ_jl + (κ − 2) δ_ij δ_jk δ_kl`.
pub fn fourth_moment(i: usize, j: usize, k: usize, l: usize, kurtosis: f64) -> f64 {
    let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    d(i, j) * d(k, l) + d(i, k) * d(j, l) + (kurtosis - 2.0) * d(i, j) * d(j, k) * d(k, l)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiceParams {
    /// Noncentrality `s`.
    pub s: f64,
    /// Per-component variance `σ²`.
    pub sigma2: f64,
}

pub fn rice_params(mp: &MomentPair) -> Result<RiceParams> {
    if mp.variance < -VARIANCE_CLAMP || !mp.variance.is_finite() {
        return Err(Error::Numeric(format!("negative variance {}", mp.variance)));
    }
    Ok(RiceParams { s: mp.mean.norm(), sigma2: mp.variance.max(0.0) / 2.0 })
}

/// `E|R| = σ√(π/2) · L_{1/2}(−s²/(2σ²))`, with the Laguerre function written
/// through exponentially scaled Bessel functions so it never overflows.
pub fn rice_mean(p: &RiceParams) -> f64 {
    if p.sigma2 <= 0.0 {
        return p.s;
    }
    let x = p.s * p.s / (4.0 * p.sigma2);
    // z = −2x; e^{z/2}[(1−z)I₀(x) − z I₁(x)] = (1+2x)I₀e(x) + 2x I₁e(x)
    let laguerre = (1.0 + 2.0 * x) * bessel_i0e(x) + 2.0 * x * bessel_i1e(x);
    (p.sigma2 * PI / 2.0).sqrt() * laguerre
}

/// `(r/σ²) exp(−(r²+s²)/(2σ²)) I₀(rs/σ²)`.
pub fn rice_pdf(p: &RiceParams, r: f64) -> Result<f64> {
    if p.sigma2 <= 0.0 {
        return Err(Error::DegenerateDistribution);
    }
    if r < 0.0 {
        return Ok(0.0);
    }
    let arg = r * p.s / p.sigma2;
    Ok(r / p.sigma2 * (-(r - p.s).powi(2) / (2.0 * p.sigma2)).exp() * bessel_i0e(arg))
}
