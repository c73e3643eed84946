//! Square M-ary QAM alphabets normalized to unit average power.
//!
//! The alphabet is the lattice `{±1, ±3, …, ±(√M−1)}²` scaled by
//! `1/√(2(M−1)/3)`. It is proper (zero mean, zero pseudo-variance), so the
//! only constellation statistic that survives in the second moment of the
//! ambiguity function is the fourth moment `E|x|⁴`, called kurtosis here.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::symbol_rng;

#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    order: u32,
    points: Vec<Complex64>,
    kurtosis: f64,
}

/// Integer square root of `m` when `m` is a perfect square.
fn exact_sqrt(m: u32) -> Option<u32> {
    let r = (m as f64).sqrt().round() as u32;
    (r.checked_mul(r) == Some(m)).then_some(r)
}

pub fn make_constellation(order: u32) -> Result<Constellation> {
    let side = match exact_sqrt(order) {
        Some(s) if order >= 4 => s,
        _ => return Err(Error::InvalidOrder(order)),
    };
    let scale = 1.0 / (2.0 * (order as f64 - 1.0) / 3.0).sqrt();
    let levels: Vec<f64> = (0..side)
        .map(|i| (2 * i as i64 - (side as i64 - 1)) as f64)
        .collect();
    let points: Vec<Complex64> = levels
        .iter()
        .flat_map(|&re| levels.iter().map(move |&im| Complex64::new(re, im) * scale))
        .collect();
    // Exact on the integer lattice: E|x|⁴ = 9·Σ|a+jb|⁴ / (M·4(M−1)²).
    let fourth: u128 = levels
        .iter()
        .flat_map(|&re| levels.iter().map(move |&im| (re * re + im * im) as u128))
        .map(|e| e * e)
        .sum();
    let m = order as u128;
    let kurtosis = (9 * fourth) as f64 / (4 * m * (m - 1) * (m - 1)) as f64;
    Ok(Constellation { order, points, kurtosis })
}

/// Closed-form `E|x|⁴` of unit-power square QAM: `(7M − 13)/(5M − 5)`.
///
/// Exact for square alphabets, which is the only kind [`make_constellation`]
/// builds.
pub fn kurtosis_formula(order: u32) -> f64 {
    let m = order as f64;
    (7.0 * m - 13.0) / (5.0 * m - 5.0)
}

impl Constellation {
    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    /// Enumerated `E|x|⁴` over the alphabet.
    pub fn kurtosis(&self) -> f64 {
        self.kurtosis
    }

    pub fn draw_symbols(&self, len: usize, seed: u64) -> SymbolVector {
        let mut rng = symbol_rng(seed);
        let symbols = (0..len)
            .map(|_| self.points[rng.random_range(0..self.points.len())])
            .collect();
        SymbolVector { symbols, seed }
    }
}

/// A block of `N` data symbols together with the seed that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolVector {
    pub symbols: Vec<Complex64>,
    pub seed: u64,
}

impl SymbolVector {
    /// Wraps caller-supplied symbols. The seed is recorded as 0.
    pub fn from_symbols(symbols: Vec<Complex64>) -> Self {
        SymbolVector { symbols, seed: 0 }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn energy(&self) -> f64 {
        self.symbols.iter().map(|x| x.norm_sqr()).sum()
    }
}

pub fn draw_symbols(c: &Constellation, len: usize, seed: u64) -> SymbolVector {
    c.draw_symbols(len, seed)
}
