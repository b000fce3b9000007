//! Gray-coded QAM64 on OFDM subcarriers.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{invalid, Result};

pub const BITS_PER_SYMBOL: usize = 6;

/// `√42`: average energy of the 8×8 grid with odd-integer coordinates.
const QAM64_SCALE: f64 = 6.480_740_698_407_86;

fn pam8(bits3: u8) -> f64 {
    // Gray code to natural index
    let mut idx = bits3;
    idx ^= idx >> 1;
    idx ^= idx >> 2;
    (2.0 * idx as f64 - 7.0) / QAM64_SCALE
}

fn pam8_decide(y: f64) -> u8 {
    let idx = ((y * QAM64_SCALE + 7.0) / 2.0).round().clamp(0.0, 7.0) as u8;
    idx ^ (idx >> 1)
}

/// Maps six bits (low six of `word`; I from the upper three) to a
/// unit-average-energy QAM64 point.
pub fn qam64_map(word: u8) -> Complex64 {
    Complex64::new(pam8((word >> 3) & 7), pam8(word & 7))
}

/// Nearest-point hard decision, inverse of [`qam64_map`].
pub fn qam64_demap(y: Complex64) -> u8 {
    (pam8_decide(y.re) << 3) | pam8_decide(y.im)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OfdmConfig {
    pub n_fft: usize,
    /// Subcarriers `0..used` carry data; the rest are zero.
    pub used: usize,
}

impl Default for OfdmConfig {
    fn default() -> Self {
        Self {
            n_fft: 256,
            used: 256,
        }
    }
}

impl OfdmConfig {
    pub fn new(n_fft: usize, used: usize) -> Result<Self> {
        if !n_fft.is_power_of_two() || n_fft < 2 {
            return Err(invalid(format!(
                "FFT size must be a power of two >= 2, got {n_fft}"
            )));
        }
        if used == 0 || used > n_fft {
            return Err(invalid(format!(
                "used subcarriers must be 1..={n_fft}, got {used}"
            )));
        }
        Ok(Self { n_fft, used })
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.used * BITS_PER_SYMBOL
    }
}

/// Planned transforms for one geometry; cheap to share across threads.
#[derive(Clone)]
pub struct OfdmModem {
    config: OfdmConfig,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for OfdmModem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OfdmModem")
            .field("config", &self.config)
            .finish()
    }
}

impl OfdmModem {
    pub fn new(config: OfdmConfig) -> Result<Self> {
        let config = OfdmConfig::new(config.n_fft, config.used)?;
        let mut planner = FftPlanner::new();
        Ok(Self {
            config,
            forward: planner.plan_fft_forward(config.n_fft),
            inverse: planner.plan_fft_inverse(config.n_fft),
        })
    }

    pub fn config(&self) -> OfdmConfig {
        self.config
    }

    /// Time-domain samples with unit average power.
    pub fn modulate(&self, symbols: &[Complex64]) -> Result<Vec<Complex64>> {
        if symbols.len() != self.config.used {
            return Err(invalid(format!(
                "expected {} subcarrier symbols, got {}",
                self.config.used,
                symbols.len()
            )));
        }
        let mut buf = vec![Complex64::new(0.0, 0.0); self.config.n_fft];
        buf[..symbols.len()].copy_from_slice(symbols);
        self.inverse.process(&mut buf);
        let scale = 1.0 / (self.config.used as f64).sqrt();
        buf.iter_mut().for_each(|z| *z *= scale);
        Ok(buf)
    }

    /// Inverse of [`modulate`](Self::modulate): subcarrier values `0..used`.
    pub fn demodulate(&self, samples: &[Complex64]) -> Result<Vec<Complex64>> {
        if samples.len() != self.config.n_fft {
            return Err(invalid(format!(
                "expected {} time samples, got {}",
                self.config.n_fft,
                samples.len()
            )));
        }
        let mut buf = samples.to_vec();
        self.forward.process(&mut buf);
        let scale = (self.config.used as f64).sqrt() / self.config.n_fft as f64;
        buf.truncate(self.config.used);
        buf.iter_mut().for_each(|z| *z *= scale);
        Ok(buf)
    }
}
