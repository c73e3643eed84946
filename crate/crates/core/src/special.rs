//! Special functions: normalized sinc, unit phasors, and modified Bessel
//! functions of the first kind (orders 0 and 1), plain and exponentially
//! scaled.

use num_complex::Complex64;
use std::f64::consts::PI;

/// `sin(πu)/(πu)` with `sinc(0) = 1`.
pub fn sinc(u: f64) -> f64 {
    if u == 0.0 {
        return 1.0;
    }
    let x = PI * u;
    if x.abs() < 1e-4 {
        // Taylor to x⁴; the next term is below 1e-18 here.
        let x2 = x * x;
        return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
    }
    // Reduce u to [-1/2, 1/2] so sin sees a small argument for large |u|.
    let r = u.round();
    let f = u - r;
    let s = (PI * f).sin();
    let sign = if (r as i64).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    sign * s / x
}

/// `exp(j2π·cycles)`, reducing the argument modulo one cycle first.
pub fn cis_cycles(cycles: f64) -> Complex64 {
    let c = cycles - cycles.round();
    let (s, co) = (2.0 * PI * c).sin_cos();
    Complex64::new(co, s)
}

/// Arguments below this use the power series; above it the asymptotic
/// expansion of `e^{-x} I_ν(x)`.
pub const BESSEL_SERIES_LIMIT: f64 = 15.0;

const SERIES_MAX_TERMS: usize = 500;
const ASYMPTOTIC_MAX_TERMS: usize = 60;

/// Power series `Σ (x/2)^{2k+ν} / (k! (k+ν)!)` for ν ∈ {0, 1}.
fn bessel_series(order: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let q = half * half;
    let mut term = if order == 0 { 1.0 } else { half };
    let mut sum = term;
    for k in 1..SERIES_MAX_TERMS {
        let k = k as f64;
        term *= q / (k * (k + order as f64));
        sum += term;
        if term <= sum * 1e-17 {
            break;
        }
    }
    sum
}

/// Asymptotic series of `√(2πx) e^{-x} I_ν(x)`, truncated at the smallest term.
fn bessel_asymptotic_scaled(order: u32, x: f64) -> f64 {
    let mu = 4.0 * (order * order) as f64;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..ASYMPTOTIC_MAX_TERMS {
        let odd = (2 * k - 1) as f64;
        let next = -term * (mu - odd * odd) / (k as f64 * 8.0 * x);
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() <= sum.abs() * 1e-17 {
            break;
        }
    }
    sum / (2.0 * PI * x).sqrt()
}

fn bessel_scaled(order: u32, x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax < BESSEL_SERIES_LIMIT {
        bessel_series(order, ax) * (-ax).exp()
    } else {
        bessel_asymptotic_scaled(order, ax)
    };
    // I₁ is odd, I₀ even.
    if order == 1 && x < 0.0 {
        -v
    } else {
        v
    }
}

/// `e^{-|x|} I₀(x)`.
pub fn bessel_i0e(x: f64) -> f64 {
    bessel_scaled(0, x)
}

/// `e^{-|x|} I₁(x)`.
pub fn bessel_i1e(x: f64) -> f64 {
    bessel_scaled(1, x)
}

pub fn bessel_i0(x: f64) -> f64 {
    if x.abs() < BESSEL_SERIES_LIMIT {
        bessel_series(0, x.abs())
    } else {
        bessel_i0e(x) * x.abs().exp()
    }
}

pub fn bessel_i1(x: f64) -> f64 {
    if x.abs() < BESSEL_SERIES_LIMIT {
        bessel_series(1, x.abs()).copysign(x)
    } else {
        bessel_i1e(x) * x.abs().exp()
    }
}
