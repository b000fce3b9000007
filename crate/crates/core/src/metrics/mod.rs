//! Operating-point algebra, single-ADC output ratios, scaling-factor search,
//! worst-case array noise figure and the resolution-threshold solver.

mod adc;
mod array;
mod scaled;
mod threshold;

pub use adc::{
    adc_metrics_at_optimum, adc_output_metrics, optimal_sf, sf_grid_db, AdcMetrics, SfObjective,
    SfOptimum,
};
pub use array::{
    cumulative_sinad, min_nf, nf_curve, nf_from_stats, nf_max, stats_at, NFCurvePoint,
};
pub use scaled::{to_operating_point, ScaledPoint};
pub use threshold::{
    effective_antenna_count, resolution_for, snr_threshold, ThresholdPoint, THRESHOLD_SEARCH_DB,
    THRESHOLD_TOLERANCE_DB,
};

/// `10·log10` of a linear power ratio.
pub fn to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

pub fn from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn db_round_trip() {
        assert_eq!(to_db(100.0), 20.0);
        assert!((from_db(to_db(std::f64::consts::PI)) - std::f64::consts::PI).abs() < 1e-14);
        assert_eq!(from_db(f64::NEG_INFINITY), 0.0);
    }
}
