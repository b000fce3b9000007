//! Cumulative-SNR thresholds and the resolution they imply.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::quantizer::{QuantizerSpec, MAX_BITS};

use super::array::min_nf;
use super::{from_db, to_db};

/// Cumulative input SNR range searched, dB.
pub const THRESHOLD_SEARCH_DB: (f64, f64) = (-20.0, 80.0);
pub const THRESHOLD_TOLERANCE_DB: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdPoint {
    pub snr_cum_in_db: f64,
    /// NF-optimal SF at the returned SNR.
    pub sf_opt_db: f64,
    pub nf_db: f64,
    /// The NF stays below the limit across the whole search range; the
    /// threshold is at least `snr_cum_in_db`.
    pub capped: bool,
}

fn min_nf_db(spec: &QuantizerSpec, m: usize, snr_db: f64) -> Result<(f64, f64)> {
    let opt = min_nf(spec, from_db(snr_db), m)?;
    Ok((to_db(opt.value), opt.sf_db))
}

/// Cumulative input SNR at which the SF-optimized NF reaches `nf_limit_db`.
///
/// Bisection on the dB axis; relies on the minimum NF being nondecreasing in
/// the input SNR. The returned point is the lower end of the final bracket, so
/// its NF is still within the limit.
pub fn snr_threshold(spec: &QuantizerSpec, m: usize, nf_limit_db: f64) -> Result<ThresholdPoint> {
    if !(nf_limit_db.is_finite() && nf_limit_db > 0.0) {
        return Err(invalid(format!(
            "NF limit must be positive dB, got {nf_limit_db}"
        )));
    }
    if m == 0 {
        return Err(invalid("observation count must be >= 1"));
    }
    let (mut lo, mut hi) = THRESHOLD_SEARCH_DB;
    let (floor_db, _) = min_nf_db(spec, m, f64::NEG_INFINITY)?;
    let (lo_nf, mut lo_sf) = min_nf_db(spec, m, lo)?;
    if floor_db >= nf_limit_db || lo_nf > nf_limit_db {
        return Err(Error::NoSolution {
            reason: format!(
                "{}-bit, M={m}: NF floor {floor_db:.3} dB is not below the {nf_limit_db} dB limit",
                spec.bits()
            ),
            best_nf_db: Some(floor_db),
        });
    }
    let mut lo_nf = lo_nf;
    let (hi_nf, hi_sf) = min_nf_db(spec, m, hi)?;
    if hi_nf <= nf_limit_db {
        return Ok(ThresholdPoint {
            snr_cum_in_db: hi,
            sf_opt_db: hi_sf,
            nf_db: hi_nf,
            capped: true,
        });
    }
    while hi - lo > THRESHOLD_TOLERANCE_DB {
        let mid = 0.5 * (lo + hi);
        let (nf, sf) = min_nf_db(spec, m, mid)?;
        if nf <= nf_limit_db {
            lo = mid;
            lo_nf = nf;
            lo_sf = sf;
        } else {
            hi = mid;
        }
    }
    Ok(ThresholdPoint {
        snr_cum_in_db: lo,
        sf_opt_db: lo_sf,
        nf_db: lo_nf,
        capped: false,
    })
}

/// Smallest resolution whose SF-optimized NF at `snr_cum_in_db` is within
/// `nf_limit_db`. Equivalent to the first `bits` whose threshold is at least
/// `snr_cum_in_db`, without the bisection tolerance.
pub fn resolution_for(
    m: usize,
    snr_cum_in_db: f64,
    nf_limit_db: f64,
    max_bits: u32,
) -> Result<u32> {
    if !(1..=MAX_BITS).contains(&max_bits) {
        return Err(invalid(format!(
            "max_bits must be 1..={MAX_BITS}, got {max_bits}"
        )));
    }
    if !(nf_limit_db.is_finite() && nf_limit_db > 0.0) {
        return Err(invalid(format!(
            "NF limit must be positive dB, got {nf_limit_db}"
        )));
    }
    if snr_cum_in_db.is_nan() || snr_cum_in_db == f64::INFINITY {
        return Err(invalid(format!(
            "cumulative SNR must be finite or -inf dB, got {snr_cum_in_db}"
        )));
    }
    let mut best = f64::INFINITY;
    for bits in 1..=max_bits {
        let (nf_db, _) = min_nf_db(&QuantizerSpec::new(bits)?, m, snr_cum_in_db)?;
        if nf_db <= nf_limit_db {
            return Ok(bits);
        }
        best = best.min(nf_db);
    }
    Err(Error::NoSolution {
        reason: format!(
            "no resolution up to {max_bits} bits keeps the NF within {nf_limit_db} dB at {snr_cum_in_db} dB, M={m}"
        ),
        best_nf_db: Some(best),
    })
}

/// `Σσ² / max σ²`: the number of antennas that would give the same worst-case
/// distortion build-up if all had the strongest antenna's signal power.
pub fn effective_antenna_count(signal_vars: &[f64]) -> Result<f64> {
    if signal_vars.is_empty() {
        return Err(invalid("need at least one antenna"));
    }
    if signal_vars.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(invalid("signal variances must be finite and >= 0"));
    }
    let max = signal_vars.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return Err(invalid("all signal variances are zero"));
    }
    Ok(signal_vars.iter().sum::<f64>() / max)
}
