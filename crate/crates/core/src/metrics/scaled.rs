use serde::Serialize;

use crate::equiv_model::OperatingPoint;
use crate::error::{invalid, Result};
use crate::quantizer::QuantizerSpec;

/// Operating point expressed through the scaling factor
/// `SF = R²/(σ_S² + σ_N²)` and the input SNRs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaledPoint {
    pub sf: f64,
    pub snr_adc_in: f64,
    pub m: usize,
    pub snr_cum_in: f64,
}

impl ScaledPoint {
    /// From the per-ADC input SNR; `snr_cum_in = m·snr_adc_in`.
    pub fn from_adc(sf: f64, snr_adc_in: f64, m: usize) -> Result<Self> {
        validate(sf, snr_adc_in, m)?;
        Ok(Self {
            sf,
            snr_adc_in,
            m,
            snr_cum_in: m as f64 * snr_adc_in,
        })
    }

    /// From the cumulative input SNR of an `m`-ADC array.
    pub fn from_cumulative(sf: f64, snr_cum_in: f64, m: usize) -> Result<Self> {
        validate(sf, snr_cum_in, m)?;
        Ok(Self {
            sf,
            snr_adc_in: snr_cum_in / m as f64,
            m,
            snr_cum_in,
        })
    }

    /// Inverse of [`to_operating_point`].
    pub fn from_operating_point(
        spec: &QuantizerSpec,
        point: &OperatingPoint,
        m: usize,
    ) -> Result<Self> {
        let total = point.sigma_s().powi(2) + point.sigma_n().powi(2);
        Self::from_adc(spec.r().powi(2) / total, point.snr_in(), m)
    }
}

fn validate(sf: f64, snr: f64, m: usize) -> Result<()> {
    if !(sf.is_finite() && sf > 0.0) {
        return Err(invalid(format!(
            "scaling factor must be finite and > 0, got {sf}"
        )));
    }
    if !(snr.is_finite() && snr >= 0.0) {
        return Err(invalid(format!(
            "input SNR must be finite and >= 0, got {snr}"
        )));
    }
    if m == 0 {
        return Err(invalid("observation count must be >= 1"));
    }
    Ok(())
}

/// `σ_N = R/√(SF·(1 + SNR_ADC,In))`, `σ_S = σ_N·√SNR_ADC,In`.
pub fn to_operating_point(spec: &QuantizerSpec, scaled: &ScaledPoint) -> Result<OperatingPoint> {
    validate(scaled.sf, scaled.snr_adc_in, scaled.m)?;
    let sigma_n = spec.r() / (scaled.sf * (1.0 + scaled.snr_adc_in)).sqrt();
    OperatingPoint::new(sigma_n, sigma_n * scaled.snr_adc_in.sqrt())
}
