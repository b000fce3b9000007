//! Worst-case noise figure of an array of `M` ADCs behind an MRC receiver.
//!
//! When every antenna sees the same desired signal up to a `{±1, ±j}` rotation
//! the per-antenna distortion adds coherently after combining while the
//! equivalent noise averages down, giving
//! `NF = (σ_NO² + M·σ_WO²) / (g_O²·σ_N²)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::equiv_model::{
    decompose, low_snr_limit, EquivalentStats, OperatingPoint, QuadratureGrid,
};
use crate::error::{invalid, Result};
use crate::quantizer::QuantizerSpec;

use super::adc::{optimal_sf, SfObjective, SfOptimum};
use super::scaled::{to_operating_point, ScaledPoint};
use super::{from_db, to_db};

/// Decomposition at `point` on its default grid, or the vanishing-signal
/// limit when `σ_S = 0`.
pub fn stats_at(spec: &QuantizerSpec, point: &OperatingPoint) -> Result<EquivalentStats> {
    if point.sigma_s() == 0.0 {
        low_snr_limit(spec, point.sigma_n())
    } else {
        decompose(spec, point, &QuadratureGrid::for_point(point)?)
    }
}

pub fn nf_from_stats(stats: &EquivalentStats, sigma_n: f64, m: usize) -> f64 {
    (stats.noise_var + m as f64 * stats.nld_var) / (stats.gain * stats.gain * sigma_n * sigma_n)
}

/// Linear worst-case NF at scaling factor `sf` and cumulative input SNR
/// `snr_cum_in` (both linear).
pub fn nf_max(spec: &QuantizerSpec, sf: f64, snr_cum_in: f64, m: usize) -> Result<f64> {
    let scaled = ScaledPoint::from_cumulative(sf, snr_cum_in, m)?;
    let point = to_operating_point(spec, &scaled)?;
    Ok(nf_from_stats(&stats_at(spec, &point)?, point.sigma_n(), m))
}

/// Cumulative output SINAD `snr_cum_in / NF`.
pub fn cumulative_sinad(spec: &QuantizerSpec, sf: f64, snr_cum_in: f64, m: usize) -> Result<f64> {
    Ok(snr_cum_in / nf_max(spec, sf, snr_cum_in, m)?)
}

/// NF minimized over the scaling-factor grid.
pub fn min_nf(spec: &QuantizerSpec, snr_cum_in: f64, m: usize) -> Result<SfOptimum> {
    if m == 0 {
        return Err(invalid("observation count must be >= 1"));
    }
    optimal_sf(spec, snr_cum_in / m as f64, SfObjective::MinimizeNf, m)
}

/// One row of the cumulative SINAD / NF curves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NFCurvePoint {
    pub bits: u32,
    pub m: usize,
    pub snr_cum_in_db: f64,
    pub sf_opt_db: f64,
    pub nf_db: f64,
    pub sinad_cum_out_db: f64,
}

/// NF and cumulative SINAD at the NF-optimal SF for each cumulative input SNR.
/// Rows come back in sweep order.
pub fn nf_curve(
    spec: &QuantizerSpec,
    m: usize,
    snr_cum_in_db: &[f64],
) -> Result<Vec<NFCurvePoint>> {
    snr_cum_in_db
        .par_iter()
        .map(|&snr_db| {
            let opt = min_nf(spec, from_db(snr_db), m)?;
            let nf_db = to_db(opt.value);
            Ok(NFCurvePoint {
                bits: spec.bits(),
                m,
                snr_cum_in_db: snr_db,
                sf_opt_db: opt.sf_db,
                nf_db,
                sinad_cum_out_db: snr_db - nf_db,
            })
        })
        .collect()
}
