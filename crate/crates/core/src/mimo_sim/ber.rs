use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::metrics::{from_db, min_nf, stats_at, to_operating_point, ScaledPoint};
use crate::quantizer::QuantizerSpec;

use super::channel::{los_channel, Channel};
use super::nf::stream_rng;
use super::ofdm::{qam64_demap, qam64_map, OfdmConfig, OfdmModem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelScenario {
    /// Broadside arrival, α = 0: every antenna sees the same input.
    WorstCase,
    /// α uniform on (0, π), redrawn every OFDM symbol.
    Average,
}

#[derive(Debug, Clone, Copy)]
pub struct BerSetup {
    pub spec: QuantizerSpec,
    pub m: usize,
    pub scenario: ChannelScenario,
    pub ofdm: OfdmConfig,
    /// Stop a sweep point once this many bit errors are seen...
    pub min_errors: u64,
    /// ...or after this many OFDM symbols.
    pub max_trials: usize,
}

impl BerSetup {
    pub fn new(spec: QuantizerSpec, m: usize, scenario: ChannelScenario) -> Self {
        Self {
            spec,
            m,
            scenario,
            ofdm: OfdmConfig::default(),
            min_errors: 100,
            max_trials: 20_000,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BerPoint {
    pub snr_cum_in_db: f64,
    /// NF-optimal scaling factor the ADCs were set to.
    pub sf_db: f64,
    pub g_o: f64,
    pub trials: usize,
    pub bits: u64,
    pub bit_errors: u64,
    pub ber: f64,
    /// 95% Wilson interval.
    pub ci_low: f64,
    pub ci_high: f64,
}

/// OFDM symbols simulated between stopping-rule checks. Fixed, so the stopping
/// point does not depend on scheduling.
const BATCH: usize = 32;

/// Widest noise window, in boundaries, for which the shared-input sampler is used.
const MAX_SHARED_BOUNDARIES: f64 = 64.0;

const Z95: f64 = 1.959_963_984_540_054;

pub fn wilson_interval(errors: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let (k, n) = (errors as f64, n as f64);
    let p = k / n;
    let z2 = Z95 * Z95;
    let den = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / den;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / den;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// `Σ_m Q(s + n_m)` over `m` antennas sharing the input `s`, with independent
/// `n_m ~ N(0, σ²)`. Draws the nested counts `N_j = #{m : s + n_m ≥ b_j}` over
/// the decision boundaries `b_j` within ±10σ of `s` as a chain of binomials,
/// which has the same law as quantizing each antenna separately up to the
/// < 1e−23 tail mass outside the window.
pub(crate) fn shared_input_sum<R: Rng>(
    spec: &QuantizerSpec,
    s: f64,
    sigma: f64,
    m: u64,
    rng: &mut R,
) -> f64 {
    let half_r = spec.levels_count() as i64 / 2;
    let width = 10.0 * sigma;
    // boundaries b_j = 2j − R, j = 1..R−1
    let j_lo = (((s - width) / 2.0).ceil() as i64 + half_r).max(1);
    let j_hi = (((s + width) / 2.0).floor() as i64 + half_r).min(2 * half_r - 1);
    if j_lo > j_hi {
        return m as f64 * spec.quantize_finite(s);
    }
    let mut total = m as f64 * spec.level((j_lo - 1) as usize);
    let mut n_prev = m;
    let mut upper_prev = 1.0;
    let scale = 1.0 / (std::f64::consts::SQRT_2 * sigma);
    for j in j_lo..=j_hi {
        let b = (2 * j - 2 * half_r) as f64;
        let upper = 0.5 * libm::erfc((b - s) * scale);
        let p = if upper_prev > 0.0 {
            (upper / upper_prev).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let n = if p >= 1.0 {
            n_prev
        } else if p <= 0.0 {
            0
        } else {
            Binomial::new(n_prev, p)
                .expect("valid binomial")
                .sample(rng)
        };
        total += 2.0 * n as f64;
        if n == 0 {
            break;
        }
        n_prev = n;
        upper_prev = upper;
    }
    total
}

struct PointPlan {
    sigma_x: f64,
    sigma_n: f64,
    g_o: f64,
}

fn combine_direct<R: Rng>(
    spec: &QuantizerSpec,
    channel: &Channel,
    x: &[Complex64],
    sigma_n: f64,
    rng: &mut R,
) -> Vec<Complex64> {
    let mut y = vec![Complex64::new(0.0, 0.0); x.len()];
    for c in channel.steering(0) {
        for (acc, xi) in y.iter_mut().zip(x) {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            let s = c * xi + Complex64::new(sigma_n * re, sigma_n * im);
            *acc += c.conj() * spec.quantize_complex_finite(s);
        }
    }
    y
}

/// One OFDM symbol through the array; returns (bit errors, bits).
fn run_trial<R: Rng>(
    setup: &BerSetup,
    modem: &OfdmModem,
    plan: &PointPlan,
    rng: &mut R,
) -> Result<(u64, u64)> {
    let used = setup.ofdm.used;
    let words: Vec<u8> = (0..used).map(|_| rng.random_range(0..64u8)).collect();
    let symbols: Vec<Complex64> = words.iter().map(|&w| qam64_map(w)).collect();
    let amp = std::f64::consts::SQRT_2 * plan.sigma_x;
    let x: Vec<Complex64> = modem
        .modulate(&symbols)?
        .into_iter()
        .map(|z| z * amp)
        .collect();

    let m = setup.m;
    let y = match setup.scenario {
        ChannelScenario::WorstCase if 10.0 * plan.sigma_n <= MAX_SHARED_BOUNDARIES => x
            .iter()
            .map(|xi| {
                let re = shared_input_sum(&setup.spec, xi.re, plan.sigma_n, m as u64, rng);
                let im = shared_input_sum(&setup.spec, xi.im, plan.sigma_n, m as u64, rng);
                Complex64::new(re, im)
            })
            .collect(),
        ChannelScenario::WorstCase => {
            let ch = los_channel(m, &[Complex64::new(1.0, 0.0)], &[0.0])?;
            combine_direct(&setup.spec, &ch, &x, plan.sigma_n, rng)
        }
        ChannelScenario::Average => {
            let aoa = rng.random_range(0.0..std::f64::consts::PI);
            let ch = los_channel(m, &[Complex64::new(1.0, 0.0)], &[aoa])?;
            combine_direct(&setup.spec, &ch, &x, plan.sigma_n, rng)
        }
    };
    let norm = 1.0 / (plan.g_o * m as f64 * amp);
    let y: Vec<Complex64> = y.into_iter().map(|z| z * norm).collect();
    let est = modem.demodulate(&y)?;
    let errors = words
        .iter()
        .zip(&est)
        .map(|(&w, &z)| (w ^ qam64_demap(z)).count_ones() as u64)
        .sum();
    Ok((errors, setup.ofdm.bits_per_symbol() as u64))
}

/// Uncoded QAM64-OFDM bit error rate of a single user received by `m`
/// quantized antennas and an MRC combiner normalized by the model ADC gain.
///
/// Each sweep point sets the ADCs to the NF-optimal scaling factor for its
/// cumulative input SNR. Quantization acts on time-domain samples; combining
/// is done before the FFT, which is the same as per-subcarrier MRC on a flat
/// channel. Trial `t` of point `i` draws from ChaCha stream `(i << 32) | t`.
pub fn ber_sim(setup: &BerSetup, snr_sweep_db: &[f64], seed: u64) -> Result<Vec<BerPoint>> {
    if setup.m == 0 {
        return Err(invalid("need at least one antenna"));
    }
    if setup.max_trials == 0 || setup.max_trials >= 1 << 32 {
        return Err(invalid(format!(
            "max_trials must be 1..2^32, got {}",
            setup.max_trials
        )));
    }
    if snr_sweep_db.iter().any(|s| !s.is_finite()) {
        return Err(invalid("SNR sweep values must be finite"));
    }
    let modem = OfdmModem::new(setup.ofdm)?;
    snr_sweep_db
        .iter()
        .enumerate()
        .map(|(idx, &snr_db)| {
            let snr = from_db(snr_db);
            let opt = min_nf(&setup.spec, snr, setup.m)?;
            let point = to_operating_point(
                &setup.spec,
                &ScaledPoint::from_cumulative(opt.sf, snr, setup.m)?,
            )?;
            let plan = PointPlan {
                sigma_x: point.sigma_s(),
                sigma_n: point.sigma_n(),
                g_o: stats_at(&setup.spec, &point)?.gain,
            };
            if plan.sigma_x == 0.0 {
                return Err(Error::DegenerateInput("zero signal power".into()));
            }
            let (mut errors, mut bits, mut trials) = (0u64, 0u64, 0usize);
            while trials < setup.max_trials && errors < setup.min_errors {
                let end = (trials + BATCH).min(setup.max_trials);
                let counts: Vec<(u64, u64)> = (trials..end)
                    .into_par_iter()
                    .map(|t| {
                        let mut rng = stream_rng(seed, ((idx as u64) << 32) | t as u64);
                        run_trial(setup, &modem, &plan, &mut rng)
                    })
                    .collect::<Result<_>>()?;
                for (e, b) in counts {
                    errors += e;
                    bits += b;
                }
                trials = end;
            }
            let (ci_low, ci_high) = wilson_interval(errors, bits);
            Ok(BerPoint {
                snr_cum_in_db: snr_db,
                sf_db: opt.sf_db,
                g_o: plan.g_o,
                trials,
                bits,
                bit_errors: errors,
                ber: errors as f64 / bits as f64,
                ci_low,
                ci_high,
            })
        })
        .collect()
}

/// SNR of the BER minimum over a sweep in increasing SNR order: the discrete
/// minimum (later point on ties), refined by the vertex of a parabola through
/// it and its neighbours in `log10(BER)`. Points without errors make the
/// refinement impossible; the discrete minimum is returned then.
pub fn ber_minimum(points: &[BerPoint]) -> Result<f64> {
    if points.is_empty() {
        return Err(invalid("empty BER sweep"));
    }
    if points
        .windows(2)
        .any(|w| w[1].snr_cum_in_db <= w[0].snr_cum_in_db)
    {
        return Err(invalid("BER sweep must be strictly increasing in SNR"));
    }
    let mut best = 0;
    for (i, p) in points.iter().enumerate() {
        if p.ber <= points[best].ber {
            best = i;
        }
    }
    if best == 0 || best + 1 == points.len() {
        return Ok(points[best].snr_cum_in_db);
    }
    let trio = &points[best - 1..=best + 1];
    if trio.iter().any(|p| p.bit_errors == 0) {
        return Ok(points[best].snr_cum_in_db);
    }
    let (x0, x1, x2) = (
        trio[0].snr_cum_in_db,
        trio[1].snr_cum_in_db,
        trio[2].snr_cum_in_db,
    );
    let (y0, y1, y2) = (
        trio[0].ber.log10(),
        trio[1].ber.log10(),
        trio[2].ber.log10(),
    );
    let num = (x1 - x0).powi(2) * (y1 - y2) - (x1 - x2).powi(2) * (y1 - y0);
    let den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
    if den == 0.0 {
        return Ok(x1);
    }
    Ok((x1 - 0.5 * num / den).clamp(x0, x2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn q(bits: u32) -> QuantizerSpec {
        QuantizerSpec::new(bits).unwrap()
    }

    #[test]
    fn wilson_examples() {
        let (lo, hi) = wilson_interval(0, 1000);
        assert!(lo < 1e-15);
        assert!(hi > 0.0 && hi < 0.004);
        let (lo, hi) = wilson_interval(50, 100);
        assert!((lo + hi - 1.0).abs() < 1e-12);
        assert!(lo > 0.39 && hi < 0.61);
    }

    /// Moments of the shared-input sampler against per-antenna quantization.
    #[test]
    fn shared_input_sum_matches_direct() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (bits, s, sigma, m) in [
            (1, 0.3, 1.0, 100u64),
            (3, 2.7, 0.8, 50),
            (2, -5.0, 0.3, 10),
            (4, 0.0, 3.0, 7),
        ] {
            let spec = q(bits);
            let trials = 20_000;
            let (mut a1, mut a2, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0);
            for _ in 0..trials {
                let a = shared_input_sum(&spec, s, sigma, m, &mut rng);
                let b: f64 = (0..m)
                    .map(|_| {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        spec.quantize_finite(s + sigma * z)
                    })
                    .sum();
                a1 += a;
                a2 += a * a;
                b1 += b;
                b2 += b * b;
            }
            let n = trials as f64;
            let (ma, mb) = (a1 / n, b1 / n);
            let (va, vb) = (a2 / n - ma * ma, b2 / n - mb * mb);
            let se = ((va + vb) / n).sqrt();
            assert!(
                (ma - mb).abs() < 4.0 * se + 1e-12,
                "bits={bits} mean {ma} vs {mb}"
            );
            let want_mean =
                m as f64 * crate::equiv_model::transfer_function(&spec, sigma, s).unwrap();
            assert!((ma - want_mean).abs() < 4.0 * (va / n).sqrt() + 1e-12);
            if vb == 0.0 {
                assert_eq!(va, 0.0);
            } else {
                assert!((va / vb - 1.0).abs() < 0.06, "bits={bits} var {va} vs {vb}");
            }
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let mut setup = BerSetup::new(q(2), 16, ChannelScenario::Average);
        setup.max_trials = 40;
        setup.min_errors = u64::MAX;
        let a = ber_sim(&setup, &[20.0, 30.0], 9).unwrap();
        let b = ber_sim(&setup, &[20.0, 30.0], 9).unwrap();
        assert_eq!(a.len(), 2);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.bit_errors, y.bit_errors);
            assert_eq!(x.trials, 40);
        }
    }

    #[test]
    fn near_ideal_link_is_clean() {
        let mut setup = BerSetup::new(q(16), 4, ChannelScenario::WorstCase);
        setup.max_trials = 200;
        let p = ber_sim(&setup, &[40.0], 1).unwrap();
        assert!(p[0].ber < 1e-5, "{:?}", p[0]);
        assert!(p[0].bits >= 200 * 1536);
    }

    #[test]
    fn stopping_rule() {
        let mut setup = BerSetup::new(q(1), 8, ChannelScenario::WorstCase);
        setup.min_errors = 100;
        setup.max_trials = 10_000;
        let p = ber_sim(&setup, &[0.0], 2).unwrap();
        assert!(p[0].bit_errors >= 100);
        assert!(p[0].trials <= BATCH);
        assert!(p[0].ci_low <= p[0].ber && p[0].ber <= p[0].ci_high);
    }

    fn pt(snr: f64, ber: f64) -> BerPoint {
        BerPoint {
            snr_cum_in_db: snr,
            sf_db: 0.0,
            g_o: 1.0,
            trials: 1,
            bits: 1_000_000,
            bit_errors: (ber * 1e6) as u64,
            ber,
            ci_low: 0.0,
            ci_high: 1.0,
        }
    }

    #[test]
    fn minimum_location() {
        // log10 BER = (x − 3.3)² − 5 sampled at integers
        let pts: Vec<BerPoint> = (0..7)
            .map(|x| pt(x as f64, 10f64.powf((x as f64 - 3.3).powi(2) - 5.0)))
            .collect();
        assert!((ber_minimum(&pts).unwrap() - 3.3).abs() < 1e-9);
        let edge = vec![pt(0.0, 0.1), pt(1.0, 0.2)];
        assert_eq!(ber_minimum(&edge).unwrap(), 0.0);
        let ties = vec![pt(0.0, 0.1), pt(1.0, 0.0), pt(2.0, 0.0), pt(3.0, 0.1)];
        assert_eq!(ber_minimum(&ties).unwrap(), 2.0);
        assert!(ber_minimum(&[]).is_err());
        assert!(ber_minimum(&[pt(1.0, 0.1), pt(0.0, 0.1)]).is_err());
    }

    #[test]
    fn rejects_bad_geometry() {
        let mut setup = BerSetup::new(q(1), 8, ChannelScenario::WorstCase);
        setup.ofdm = OfdmConfig {
            n_fft: 100,
            used: 10,
        };
        assert!(ber_sim(&setup, &[0.0], 0).is_err());
    }
}
