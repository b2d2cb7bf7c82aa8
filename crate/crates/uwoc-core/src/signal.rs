//! Bit sources and M-QAM symbol mapping.
//!
//! Four constellation geometries are supported, all normalized to unit mean
//! symbol energy:
//!
//! - 8QAM — rectangular 4×2 grid, {±1, ±3} × {±1}, scaled by 1/√6
//! - 16QAM — square grid {±1, ±3}², scaled by 1/√10
//! - 32QAM — 6×6 cross with the four corners removed, scaled by 1/√20
//! - 64QAM — square grid {±1, …, ±7}², scaled by 1/√42
//!
//! Grid constellations are Gray-labeled per axis. The 32QAM cross is labeled
//! along a row-serpentine Gray sequence, so most geometric neighbors differ
//! in one bit but corner transitions may not; bit labels never influence the
//! rendered images, only mapping and demapping.

use num_complex::Complex64;

use crate::rng::Prng;
use crate::{Error, Result};

/// The four supported M-QAM modulation formats.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModulationFormat {
    Qam8,
    Qam16,
    Qam32,
    Qam64,
}

impl ModulationFormat {
    /// All formats in label order (one-hot position 0 through 3).
    pub const ALL: [ModulationFormat; 4] = [
        ModulationFormat::Qam8,
        ModulationFormat::Qam16,
        ModulationFormat::Qam32,
        ModulationFormat::Qam64,
    ];

    /// Constellation order M.
    pub fn order(self) -> usize {
        match self {
            ModulationFormat::Qam8 => 8,
            ModulationFormat::Qam16 => 16,
            ModulationFormat::Qam32 => 32,
            ModulationFormat::Qam64 => 64,
        }
    }

    /// Bits carried per symbol, log2(M).
    pub fn bits_per_symbol(self) -> usize {
        match self {
            ModulationFormat::Qam8 => 3,
            ModulationFormat::Qam16 => 4,
            ModulationFormat::Qam32 => 5,
            ModulationFormat::Qam64 => 6,
        }
    }

    /// Class index used by labels and the one-hot encoding
    /// (8QAM → 0 … 64QAM → 3).
    pub fn label_index(self) -> usize {
        match self {
            ModulationFormat::Qam8 => 0,
            ModulationFormat::Qam16 => 1,
            ModulationFormat::Qam32 => 2,
            ModulationFormat::Qam64 => 3,
        }
    }

    pub fn from_label_index(idx: usize) -> Result<Self> {
        Self::ALL
            .get(idx)
            .copied()
            .ok_or_else(|| Error::invalid_argument(format!("format index {idx} out of range")))
    }

    pub fn name(self) -> &'static str {
        match self {
            ModulationFormat::Qam8 => "8QAM",
            ModulationFormat::Qam16 => "16QAM",
            ModulationFormat::Qam32 => "32QAM",
            ModulationFormat::Qam64 => "64QAM",
        }
    }
}

/// A frame of complex baseband symbols and the format that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct IQFrame {
    pub format: ModulationFormat,
    pub symbols: Vec<Complex64>,
}

impl IQFrame {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// Deterministic pseudo-random bit sequence. Same seed, same bits.
pub fn generate_prbs(seed: u64, n_bits: usize) -> Result<Vec<bool>> {
    if n_bits == 0 {
        return Err(Error::invalid_argument("n_bits must be positive"));
    }
    let mut rng = Prng::new(seed);
    let mut bits = Vec::with_capacity(n_bits);
    let mut word = 0u64;
    let mut left = 0u32;
    for _ in 0..n_bits {
        if left == 0 {
            word = rng.next_u64();
            left = 64;
        }
        bits.push(word & 1 == 1);
        word >>= 1;
        left -= 1;
    }
    Ok(bits)
}

/// Gray code of `v`.
fn gray(v: usize) -> usize {
    v ^ (v >> 1)
}

/// Inverse Gray code.
fn gray_decode(mut g: usize) -> usize {
    let mut v = g;
    while g > 0 {
        g >>= 1;
        v ^= g;
    }
    v
}

/// Amplitude of axis level `i` out of `n` levels: …, -3, -1, 1, 3, …
fn level_amplitude(i: usize, n: usize) -> f64 {
    2.0 * i as f64 - (n - 1) as f64
}

/// The M constellation points, indexed by bit pattern (MSB-first within a
/// symbol). Mean power over the alphabet is exactly 1.
pub fn constellation_points(format: ModulationFormat) -> Vec<Complex64> {
    match format {
        ModulationFormat::Qam8 => grid_alphabet(2, 1, 6.0),
        ModulationFormat::Qam16 => grid_alphabet(2, 2, 10.0),
        ModulationFormat::Qam32 => cross32_alphabet(),
        ModulationFormat::Qam64 => grid_alphabet(3, 3, 42.0),
    }
}

/// Rectangular grid with `i_bits` Gray-coded bits on the in-phase axis and
/// `q_bits` on the quadrature axis. `energy` is the mean |s|² of the
/// unscaled grid.
fn grid_alphabet(i_bits: usize, q_bits: usize, energy: f64) -> Vec<Complex64> {
    let scale = 1.0 / energy.sqrt();
    let (ni, nq) = (1 << i_bits, 1 << q_bits);
    let m = ni * nq;
    let mut points = vec![Complex64::new(0.0, 0.0); m];
    for pattern in 0..m {
        let gi = pattern >> q_bits;
        let gq = pattern & (nq - 1);
        let li = gray_decode(gi);
        let lq = gray_decode(gq);
        points[pattern] = Complex64::new(
            level_amplitude(li, ni) * scale,
            level_amplitude(lq, nq) * scale,
        );
    }
    points
}

/// 6×6 cross minus corners, labeled along a bottom-to-top serpentine path
/// with a Gray sequence. Unscaled mean energy is 20.
fn cross32_alphabet() -> Vec<Complex64> {
    let scale = 1.0 / 20.0f64.sqrt();
    let mut points = vec![Complex64::new(0.0, 0.0); 32];
    let mut seq = 0usize;
    for qi in 0..6 {
        let cols: Vec<usize> = if qi % 2 == 0 {
            (0..6).collect()
        } else {
            (0..6).rev().collect()
        };
        for ii in cols {
            let corner = (qi == 0 || qi == 5) && (ii == 0 || ii == 5);
            if corner {
                continue;
            }
            points[gray(seq)] = Complex64::new(
                level_amplitude(ii, 6) * scale,
                level_amplitude(qi, 6) * scale,
            );
            seq += 1;
        }
    }
    points
}

/// Map a bit sequence onto constellation symbols. The bit count must be a
/// multiple of the format's bits per symbol.
pub fn map_symbols(bits: &[bool], format: ModulationFormat) -> Result<IQFrame> {
    let bps = format.bits_per_symbol();
    if bits.is_empty() || bits.len() % bps != 0 {
        return Err(Error::invalid_argument(format!(
            "bit count {} is not a positive multiple of {} ({})",
            bits.len(),
            bps,
            format.name()
        )));
    }
    let alphabet = constellation_points(format);
    let symbols = bits
        .chunks(bps)
        .map(|chunk| {
            let pattern = chunk.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
            alphabet[pattern]
        })
        .collect();
    Ok(IQFrame { format, symbols })
}

/// Hard-decision demapping: nearest constellation point, bits MSB-first.
/// Inverse of [`map_symbols`] on noiseless frames.
pub fn demap_nearest(frame: &IQFrame) -> Vec<bool> {
    let alphabet = constellation_points(frame.format);
    let bps = frame.format.bits_per_symbol();
    let mut bits = Vec::with_capacity(frame.len() * bps);
    for s in &frame.symbols {
        let mut best = 0usize;
        let mut best_d = f64::INFINITY;
        for (pattern, p) in alphabet.iter().enumerate() {
            let d = (s - p).norm_sqr();
            if d < best_d {
                best_d = d;
                best = pattern;
            }
        }
        for k in (0..bps).rev() {
            bits.push((best >> k) & 1 == 1);
        }
    }
    bits
}
