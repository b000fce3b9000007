use rayon::prelude::*;
use serde::Serialize;

use crate::equiv_model::{decompose, OperatingPoint, QuadratureGrid};
use crate::error::{invalid, Error, Result};
use crate::quantizer::QuantizerSpec;

use super::array::{nf_from_stats, stats_at};
use super::scaled::{to_operating_point, ScaledPoint};
use super::{from_db, to_db};

/// Objective values closer than this (relative) count as a tie; ties go to the
/// smaller scaling factor.
const TIE_RELATIVE: f64 = 1e-10;

/// Single-ADC output ratios (linear).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdcMetrics {
    pub snr_out: f64,
    pub sdr_out: f64,
    pub sinad_out: f64,
    /// Set when a denominator vanished and the matching ratio is +∞.
    pub unbounded: bool,
}

pub fn adc_output_metrics(
    spec: &QuantizerSpec,
    point: &OperatingPoint,
    grid: &QuadratureGrid,
) -> Result<AdcMetrics> {
    let st = decompose(spec, point, grid)?;
    let signal = st.gain * st.gain * point.sigma_s().powi(2);
    let ratio = |den: f64| {
        if den > 0.0 {
            signal / den
        } else {
            f64::INFINITY
        }
    };
    Ok(AdcMetrics {
        snr_out: ratio(st.noise_var),
        sdr_out: ratio(st.nld_var),
        sinad_out: ratio(st.noise_var + st.nld_var),
        unbounded: st.noise_var <= 0.0 || st.nld_var <= 0.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SfObjective {
    MaximizeSinad,
    MinimizeNf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SfOptimum {
    pub sf_db: f64,
    pub sf: f64,
    /// Objective at the optimum: linear SINAD or linear NF.
    pub value: f64,
}

/// Scaling factors searched: 0 to 30 dB in 0.1 dB steps.
pub fn sf_grid_db() -> Vec<f64> {
    (0..=300).map(|k| k as f64 / 10.0).collect()
}

fn objective_value(
    spec: &QuantizerSpec,
    snr_adc_in: f64,
    objective: SfObjective,
    m: usize,
    sf: f64,
) -> Result<f64> {
    let scaled = ScaledPoint::from_adc(sf, snr_adc_in, m)?;
    let point = to_operating_point(spec, &scaled)?;
    match objective {
        SfObjective::MaximizeSinad => {
            let grid = QuadratureGrid::for_point(&point)?;
            Ok(adc_output_metrics(spec, &point, &grid)?.sinad_out)
        }
        SfObjective::MinimizeNf => Ok(nf_from_stats(&stats_at(spec, &point)?, point.sigma_n(), m)),
    }
}

/// Grid search over [`sf_grid_db`].
pub fn optimal_sf(
    spec: &QuantizerSpec,
    snr_adc_in: f64,
    objective: SfObjective,
    m: usize,
) -> Result<SfOptimum> {
    if !(snr_adc_in.is_finite() && snr_adc_in >= 0.0) {
        return Err(invalid(format!(
            "input SNR must be finite and >= 0, got {snr_adc_in}"
        )));
    }
    if objective == SfObjective::MaximizeSinad && snr_adc_in == 0.0 {
        return Err(Error::DegenerateInput(
            "SINAD is zero at zero input SNR".into(),
        ));
    }
    let grid = sf_grid_db();
    let values: Vec<f64> = grid
        .par_iter()
        .map(|&db| objective_value(spec, snr_adc_in, objective, m, from_db(db)))
        .collect::<Result<_>>()?;
    let better = |candidate: f64, best: f64| match objective {
        SfObjective::MaximizeSinad => candidate > best * (1.0 + TIE_RELATIVE),
        SfObjective::MinimizeNf => candidate < best * (1.0 - TIE_RELATIVE),
    };
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if better(v, values[best]) {
            best = i;
        }
    }
    Ok(SfOptimum {
        sf_db: grid[best],
        sf: from_db(grid[best]),
        value: values[best],
    })
}

/// [`adc_output_metrics`] at the SINAD-optimal scaling factor.
pub fn adc_metrics_at_optimum(
    spec: &QuantizerSpec,
    snr_adc_in: f64,
) -> Result<(SfOptimum, AdcMetrics)> {
    let opt = optimal_sf(spec, snr_adc_in, SfObjective::MaximizeSinad, 1)?;
    let point = to_operating_point(spec, &ScaledPoint::from_adc(opt.sf, snr_adc_in, 1)?)?;
    let metrics = adc_output_metrics(spec, &point, &QuadratureGrid::for_point(&point)?)?;
    debug_assert!((to_db(metrics.sinad_out) - to_db(opt.value)).abs() < 1e-9);
    Ok((opt, metrics))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn q(bits: u32) -> QuantizerSpec {
        QuantizerSpec::new(bits).unwrap()
    }

    #[test]
    fn harmonic_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let bits = rng.random_range(1..=5);
            let p = OperatingPoint::new(rng.random_range(0.05..5.0), rng.random_range(0.05..5.0))
                .unwrap();
            let m =
                adc_output_metrics(&q(bits), &p, &QuadratureGrid::for_point(&p).unwrap()).unwrap();
            let lhs = 1.0 / m.sinad_out;
            let rhs = 1.0 / m.snr_out + 1.0 / m.sdr_out;
            assert!((lhs - rhs).abs() <= 1e-12 * lhs, "{m:?}");
        }
    }

    #[test]
    fn grid_shape() {
        let g = sf_grid_db();
        assert_eq!(g.len(), 301);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[300], 30.0);
        assert_eq!(g[73], 7.3);
    }

    #[test]
    fn optimum_is_local_on_grid() {
        for (bits, snr_db, objective, m) in [
            (2, 0.0, SfObjective::MaximizeSinad, 1),
            (3, 10.0, SfObjective::MaximizeSinad, 1),
            (2, -10.0, SfObjective::MinimizeNf, 100),
            (4, 5.0, SfObjective::MinimizeNf, 10),
        ] {
            let spec = q(bits);
            let snr = from_db(snr_db);
            let opt = optimal_sf(&spec, snr, objective, m).unwrap();
            for step in [-0.1, 0.1] {
                let db = opt.sf_db + step;
                if !(0.0..=30.0).contains(&db) {
                    continue;
                }
                let v = objective_value(&spec, snr, objective, m, from_db(db)).unwrap();
                match objective {
                    SfObjective::MaximizeSinad => assert!(opt.value >= v * (1.0 - 1e-10)),
                    SfObjective::MinimizeNf => assert!(opt.value <= v * (1.0 + 1e-10)),
                }
            }
        }
    }

    #[test]
    fn single_observation_objectives_agree() {
        // with M = 1, NF = SNR_in / SINAD_out
        for bits in [1, 2, 3] {
            for snr_db in [-5.0, 5.0, 15.0] {
                let snr = from_db(snr_db);
                let a = optimal_sf(&q(bits), snr, SfObjective::MaximizeSinad, 1).unwrap();
                let b = optimal_sf(&q(bits), snr, SfObjective::MinimizeNf, 1).unwrap();
                assert_eq!(a.sf_db, b.sf_db, "bits={bits} snr={snr_db}");
                assert!((a.value * b.value - snr).abs() <= 1e-9 * snr);
            }
        }
    }

    #[test]
    fn brute_force_agrees() {
        let spec = q(3);
        let opt = optimal_sf(&spec, 1.0 / 100.0, SfObjective::MinimizeNf, 100).unwrap();
        let mut best = (f64::INFINITY, 0.0);
        for k in 0..=300 {
            let db = k as f64 / 10.0;
            let v =
                objective_value(&spec, 0.01, SfObjective::MinimizeNf, 100, from_db(db)).unwrap();
            if v < best.0 * (1.0 - TIE_RELATIVE) {
                best = (v, db);
            }
        }
        assert_eq!(opt.sf_db, best.1);
        assert_eq!(opt.value, best.0);
    }

    #[test]
    fn sinad_at_zero_snr_is_degenerate() {
        assert!(matches!(
            optimal_sf(&q(2), 0.0, SfObjective::MaximizeSinad, 1),
            Err(Error::DegenerateInput(_))
        ));
        assert!(optimal_sf(&q(2), 0.0, SfObjective::MinimizeNf, 1).is_ok());
    }

    #[test]
    fn one_bit_distortion_trend() {
        // SDR falls with input SNR toward an asymptote while SNR_out rises
        let mut prev: Option<AdcMetrics> = None;
        let mut sdr_db = Vec::new();
        for k in 0..=8 {
            let snr_db = -10.0 + 5.0 * k as f64;
            let (_, m) = adc_metrics_at_optimum(&q(1), from_db(snr_db)).unwrap();
            if let Some(p) = prev {
                assert!(m.sdr_out < p.sdr_out, "SDR not decreasing at {snr_db} dB");
                assert!(
                    m.snr_out > p.snr_out,
                    "SNR_out not increasing at {snr_db} dB"
                );
            }
            sdr_db.push(to_db(m.sdr_out));
            prev = Some(m);
        }
        let n = sdr_db.len();
        let last_drop = sdr_db[n - 2] - sdr_db[n - 1];
        let first_drop = sdr_db[0] - sdr_db[1];
        assert!(last_drop < 0.1 * first_drop, "{sdr_db:?}");
    }
}
