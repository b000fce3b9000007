//! Equivalent model of a quantizer driven by a desired signal plus Gaussian noise.
//!
//! The noisy quantizer output splits into `s_O = g_O·s_I + w_O + n_O`: a scaled
//! copy of the desired input, a nonlinear distortion `w_O` that depends on the
//! desired input only, and an equivalent output noise `n_O` that is white and
//! uncorrelated with both.

mod bussgang;
mod montecarlo;
mod quadrature;
mod transfer;

pub use bussgang::{
    bussgang_gain, decompose, equiv_noise_var, low_snr_limit, nld_var, total_output_power,
};
pub use montecarlo::{monte_carlo_stats, MonteCarloStats};
pub use quadrature::QuadratureGrid;
pub(crate) use transfer::transfer_and_energy;
pub use transfer::{
    energy_function, energy_function_quadrature, level_probabilities, transfer_function,
    transfer_function_quadrature, transfer_slope_at_zero,
};

use serde::Serialize;

use crate::error::{invalid, Result};

/// Per-real-dimension standard deviations of the input noise and the desired signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OperatingPoint {
    sigma_n: f64,
    sigma_s: f64,
}

impl OperatingPoint {
    pub fn new(sigma_n: f64, sigma_s: f64) -> Result<Self> {
        if !(sigma_n.is_finite() && sigma_n > 0.0) {
            return Err(invalid(format!(
                "sigma_n must be finite and > 0, got {sigma_n}"
            )));
        }
        if !(sigma_s.is_finite() && sigma_s >= 0.0) {
            return Err(invalid(format!(
                "sigma_s must be finite and >= 0, got {sigma_s}"
            )));
        }
        Ok(Self { sigma_n, sigma_s })
    }

    pub fn sigma_n(&self) -> f64 {
        self.sigma_n
    }

    pub fn sigma_s(&self) -> f64 {
        self.sigma_s
    }

    /// Per-ADC input SNR `σ_S²/σ_N²`.
    pub fn snr_in(&self) -> f64 {
        (self.sigma_s / self.sigma_n).powi(2)
    }
}

/// Bussgang triple of the equivalent model at one operating point.
///
/// All variances are per real dimension; the complex ADC pair sees twice these.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquivalentStats {
    pub gain: f64,
    pub noise_var: f64,
    pub nld_var: f64,
}

impl EquivalentStats {
    pub fn complex_noise_var(&self) -> f64 {
        2.0 * self.noise_var
    }

    pub fn complex_nld_var(&self) -> f64 {
        2.0 * self.nld_var
    }

    /// `g_O²σ_S² + σ_WO² + σ_NO²`, which equals the total output power.
    pub fn decomposed_power(&self, sigma_s: f64) -> f64 {
        self.gain * self.gain * sigma_s * sigma_s + self.nld_var + self.noise_var
    }
}
