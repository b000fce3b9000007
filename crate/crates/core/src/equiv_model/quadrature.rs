use crate::error::{invalid, Result};

use super::OperatingPoint;

/// Upper bound on the number of nodes a single grid may have.
const MAX_NODES: usize = 4_000_001;

/// Uniform integration grid on `[-half_width, half_width]`.
///
/// The same type serves the signal axis (expectations over the desired-signal
/// density) and the noise axis (direct convolution with the noise density).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureGrid {
    half_width: f64,
    step: f64,
}

impl QuadratureGrid {
    pub fn new(half_width: f64, step: f64) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(invalid(format!(
                "grid half-width must be finite and > 0, got {half_width}"
            )));
        }
        if !(step.is_finite() && step > 0.0) {
            return Err(invalid(format!(
                "grid step must be finite and > 0, got {step}"
            )));
        }
        if step > half_width {
            return Err(invalid(format!(
                "grid step {step} exceeds half-width {half_width}"
            )));
        }
        if 2.0 * (half_width / step).ceil() + 1.0 > MAX_NODES as f64 {
            return Err(invalid(format!(
                "grid with half-width {half_width} and step {step} exceeds {MAX_NODES} nodes"
            )));
        }
        Ok(Self { half_width, step })
    }

    /// Signal-axis grid for an operating point: step `0.01·min(σ_S, σ_N)` floored
    /// at `1e-4·half_width`, span `±8σ_S`.
    pub fn for_point(point: &OperatingPoint) -> Result<Self> {
        let sigma_s = point.sigma_s();
        if sigma_s <= 0.0 {
            return Err(crate::Error::DegenerateInput(
                "signal-axis grid needs sigma_s > 0".into(),
            ));
        }
        let half_width = 8.0 * sigma_s;
        let step = (0.01 * sigma_s.min(point.sigma_n())).max(1e-4 * half_width);
        Self::new(half_width, step)
    }

    /// Noise-axis grid: `±10σ_N` with step `0.01σ_N`.
    pub fn for_noise(sigma_n: f64) -> Result<Self> {
        if !(sigma_n.is_finite() && sigma_n > 0.0) {
            return Err(invalid(format!(
                "sigma_n must be finite and > 0, got {sigma_n}"
            )));
        }
        Self::new(10.0 * sigma_n, 0.01 * sigma_n)
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Number of intervals on each side of zero; the actual spacing is
    /// `half_width / intervals()`, never larger than `step`.
    pub fn intervals(&self) -> usize {
        (self.half_width / self.step).ceil() as usize
    }

    pub fn nodes(&self) -> usize {
        2 * self.intervals() + 1
    }
}
