//! Discrete AFDM transmit chain: IDAFT modulation, chirp-periodic prefix,
//! and the DAFT that inverts it.

use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::constellation::SymbolVector;
use crate::error::{Error, Result};
use crate::special::cis_cycles;

pub type Rational = Ratio<i64>;

/// Parses `"3"`, `"-1/128"` or `" 2 / 4 "` into a reduced rational.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let bad = || Error::Usage(format!("malformed rational '{text}'"));
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text.trim(), "1"),
    };
    let num: i64 = num.parse().map_err(|_| bad())?;
    let den: i64 = den.parse().map_err(|_| bad())?;
    if den == 0 {
        return Err(bad());
    }
    Ok(Rational::new(num, den))
}

pub fn format_rational(r: &Rational) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Fractional part of `r·k` in cycles, computed exactly in integers.
pub(crate) fn rational_cycles(r: &Rational, k: i128) -> f64 {
    let den = *r.denom() as i128;
    let rem = (*r.numer() as i128 * k).rem_euclid(den);
    rem as f64 / den as f64
}

/// Waveform parameters.
///
/// `c1` is kept as an exact rational so the integrality questions behind the
/// sensing condition are decided in integer arithmetic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AfdmConfig {
    pub n: usize,
    #[serde(with = "rational_str")]
    pub c1: Rational,
    pub c2: f64,
    /// Constellation order M.
    pub order: u32,
    pub cpp_len: usize,
    /// Chirp-segment index entering Φ as a common phase `−qτ`.
    pub q: i64,
    /// Optional occupied bandwidth B in Hz, used only for display units.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bandwidth_hz: Option<f64>,
}

mod rational_str {
    use super::{format_rational, parse_rational, Rational};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text).map_err(serde::de::Error::custom)
    }
}

impl AfdmConfig {
    pub fn new(n: usize, c1: Rational, c2: f64, order: u32) -> Result<Self> {
        let cfg = AfdmConfig { n, c1, c2, order, cpp_len: 0, q: 0, bandwidth_hz: None };
        cfg.validate()?;
        Ok(cfg)
    }

    /// AFDM with `c1 = 1`, `c2 = 0`.
    pub fn afdm(n: usize, order: u32) -> Result<Self> {
        Self::new(n, Rational::from_integer(1), 0.0, order)
    }

    /// OFDM is the `c1 = c2 = 0` special case.
    pub fn ofdm(n: usize, order: u32) -> Result<Self> {
        Self::new(n, Rational::zero(), 0.0, order)
    }

    pub fn with_cpp(mut self, cpp_len: usize) -> Result<Self> {
        self.cpp_len = cpp_len;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidConfig(format!("N = {} must be >= 2", self.n)));
        }
        if self.cpp_len >= self.n {
            return Err(Error::InvalidConfig(format!(
                "CPP length {} must be < N = {}",
                self.cpp_len, self.n
            )));
        }
        if !self.c2.is_finite() {
            return Err(Error::InvalidConfig("c2 must be finite".into()));
        }
        Ok(())
    }

    pub fn is_ofdm(&self) -> bool {
        self.c1.is_zero() && self.c2 == 0.0
    }

    /// `2·c1·N` as an exact rational: the Doppler shift per unit delay.
    pub fn two_c1_n(&self) -> Rational {
        self.c1 * Rational::from_integer(2 * self.n as i64)
    }

    pub fn c1_f64(&self) -> f64 {
        *self.c1.numer() as f64 / *self.c1.denom() as f64
    }

    /// Subcarrier spacing Δf = B/N, when a bandwidth is set.
    pub fn subcarrier_spacing_hz(&self) -> Option<f64> {
        self.bandwidth_hz.map(|b| b / self.n as f64)
    }

    /// Useful symbol duration T = 1/Δf.
    pub fn symbol_duration_s(&self) -> Option<f64> {
        self.subcarrier_spacing_hz().map(|df| 1.0 / df)
    }

    /// Sampling time Ts = 1/B.
    pub fn sample_time_s(&self) -> Option<f64> {
        self.bandwidth_hz.map(|b| 1.0 / b)
    }

    /// Short label such as `N64_M4_c1-1_c2-0`, safe as a directory name.
    pub fn label(&self) -> String {
        let c1 = format_rational(&self.c1).replace('/', "over");
        format!("N{}_M{}_c1-{}_c2-{}", self.n, self.order, c1, self.c2)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSignal {
    pub samples: Vec<Complex64>,
    pub has_cpp: bool,
}

/// Phase in cycles of the IDAFT kernel entry `(n, m)`.
fn kernel_cycles(cfg: &AfdmConfig, n: usize, m: usize) -> f64 {
    let nn = cfg.n as u128;
    let chirp_n = rational_cycles(&cfg.c1, (n as i128) * (n as i128));
    let chirp_m = (cfg.c2 * (m as f64) * (m as f64)).rem_euclid(1.0);
    let dft = ((n as u128 * m as u128) % nn) as f64 / cfg.n as f64;
    chirp_n + chirp_m + dft
}

/// The N×N IDAFT matrix, row index n (time), column index m (chirp).
pub fn idaft_matrix(cfg: &AfdmConfig) -> Vec<Vec<Complex64>> {
    let scale = 1.0 / (cfg.n as f64).sqrt();
    (0..cfg.n)
        .map(|n| (0..cfg.n).map(|m| cis_cycles(kernel_cycles(cfg, n, m)) * scale).collect())
        .collect()
}

/// `s[n] = N^{-1/2} Σ_m x_m exp(j2π(c1 n² + c2 m² + nm/N))`.
pub fn idaft_modulate(x: &SymbolVector, cfg: &AfdmConfig) -> Result<TimeSignal> {
    if x.len() != cfg.n {
        return Err(Error::Dimension { expected: cfg.n, got: x.len() });
    }
    let scale = 1.0 / (cfg.n as f64).sqrt();
    let samples = (0..cfg.n)
        .map(|n| {
            x.symbols
                .iter()
                .enumerate()
                .map(|(m, &xm)| xm * cis_cycles(kernel_cycles(cfg, n, m)))
                .sum::<Complex64>()
                * scale
        })
        .collect();
    Ok(TimeSignal { samples, has_cpp: false })
}

/// Prepends `cpp_len` samples `s[n] = s[N+n]·exp(−j2π c1 N(N² + 2Nn))`,
/// `n = −Lcp, …, −1`.
pub fn add_cpp(s: &TimeSignal, cfg: &AfdmConfig) -> Result<TimeSignal> {
    if s.has_cpp {
        return Err(Error::State("signal already carries a chirp-periodic prefix"));
    }
    if s.samples.len() != cfg.n {
        return Err(Error::Dimension { expected: cfg.n, got: s.samples.len() });
    }
    let n_len = cfg.n as i128;
    let mut out = Vec::with_capacity(cfg.n + cfg.cpp_len);
    for n in -(cfg.cpp_len as i128)..0 {
        let k = n_len * (n_len * n_len + 2 * n_len * n);
        let phase = cis_cycles(-rational_cycles(&cfg.c1, k));
        out.push(s.samples[(n_len + n) as usize] * phase);
    }
    out.extend_from_slice(&s.samples);
    Ok(TimeSignal { samples: out, has_cpp: true })
}

/// Inverse of [`idaft_modulate`].
pub fn daft_demodulate(s: &TimeSignal, cfg: &AfdmConfig) -> Result<SymbolVector> {
    if s.has_cpp {
        return Err(Error::State("remove the chirp-periodic prefix before the DAFT"));
    }
    if s.samples.len() != cfg.n {
        return Err(Error::Dimension { expected: cfg.n, got: s.samples.len() });
    }
    let scale = 1.0 / (cfg.n as f64).sqrt();
    let symbols = (0..cfg.n)
        .map(|m| {
            s.samples
                .iter()
                .enumerate()
                .map(|(n, &sn)| sn * cis_cycles(-kernel_cycles(cfg, n, m)))
                .sum::<Complex64>()
                * scale
        })
        .collect();
    Ok(SymbolVector::from_symbols(symbols))
}

/// Strips a prefix added by [`add_cpp`].
pub fn remove_cpp(s: &TimeSignal, cfg: &AfdmConfig) -> Result<TimeSignal> {
    if !s.has_cpp {
        return Err(Error::State("signal has no chirp-periodic prefix"));
    }
    if s.samples.len() != cfg.n + cfg.cpp_len {
        return Err(Error::Dimension { expected: cfg.n + cfg.cpp_len, got: s.samples.len() });
    }
    Ok(TimeSignal { samples: s.samples[cfg.cpp_len..].to_vec(), has_cpp: false })
}

impl TimeSignal {
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum()
    }
}
