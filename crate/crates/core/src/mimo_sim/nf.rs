use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::equiv_model::transfer_and_energy;
use crate::error::{invalid, Error, Result};
use crate::metrics::to_db;

use super::channel::ArrayConfig;
use super::receiver::{antenna_inputs, complex_normal, draw_snapshot, mrc_estimate};

pub const MIN_TRIALS: usize = 1_000;

/// Trials per independent ChaCha stream.
const BLOCK: usize = 1_024;

pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn blocks(trials: usize) -> impl IndexedParallelIterator<Item = (usize, usize)> {
    (0..trials.div_ceil(BLOCK))
        .into_par_iter()
        .map(move |b| (b, (trials - b * BLOCK).min(BLOCK)))
}

/// `(Σa/k)/√(Σ|a|²/k)` for a complex sum.
fn self_normalized(sum: Complex64, sum_sq: f64, count: f64) -> f64 {
    if sum_sq > 0.0 {
        sum.norm() / (count * sum_sq).sqrt()
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct UserReport {
    /// Linear ratio of quantized to ideal MRC error power.
    pub nf: f64,
    pub nf_db: f64,
    pub nf_db_se: f64,
    /// `E|x|² / E|x̂ − x|²` of the quantized receiver.
    pub sinad_db: f64,
    /// Self-normalized correlation of the quantized-receiver residual with `x`.
    pub residual_corr: f64,
    /// Self-normalized mean of the residual.
    pub residual_mean: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimReport {
    pub trials: usize,
    pub seed: u64,
    /// Model gain used to normalize the quantized receiver.
    pub g_o: f64,
    pub users: Vec<UserReport>,
    pub worst_user: usize,
    pub worst_nf_db: f64,
}

#[derive(Debug, Clone, Copy, Default)]
struct UserSums {
    q: f64,
    q2: f64,
    i: f64,
    i2: f64,
    qi: f64,
    x2: f64,
    ex: Complex64,
    ex2: f64,
    e: Complex64,
}

impl UserSums {
    fn add(&mut self, o: &UserSums) {
        self.q += o.q;
        self.q2 += o.q2;
        self.i += o.i;
        self.i2 += o.i2;
        self.qi += o.qi;
        self.x2 += o.x2;
        self.ex += o.ex;
        self.ex2 += o.ex2;
        self.e += o.e;
    }
}

/// Monte-Carlo noise figure of the MRC receiver: quantized-receiver error
/// power over ideal-receiver error power, both driven by the same noise.
pub fn empirical_nf(config: &ArrayConfig, trials: usize, seed: u64) -> Result<SimReport> {
    if trials < MIN_TRIALS {
        return Err(invalid(format!(
            "empirical_nf needs at least {MIN_TRIALS} trials, got {trials}"
        )));
    }
    let g_o = config.model_stats()?.gain;
    let k = config.k();
    let parts: Vec<Result<Vec<UserSums>>> = blocks(trials)
        .map(|(b, len)| {
            let mut rng = stream_rng(seed, b as u64);
            let mut acc = vec![UserSums::default(); k];
            for _ in 0..len {
                let s = draw_snapshot(config, &mut rng);
                let ideal: Vec<Complex64> = s.s_i.iter().zip(&s.n_i).map(|(a, n)| a + n).collect();
                let est_i = mrc_estimate(config, &ideal, 1.0)?;
                let est_q = mrc_estimate(config, &s.s_o, g_o)?;
                for (u, a) in acc.iter_mut().enumerate() {
                    let eq = est_q[u] - s.x[u];
                    let (q, i) = (eq.norm_sqr(), (est_i[u] - s.x[u]).norm_sqr());
                    let x2 = s.x[u].norm_sqr();
                    a.q += q;
                    a.q2 += q * q;
                    a.i += i;
                    a.i2 += i * i;
                    a.qi += q * i;
                    a.x2 += x2;
                    a.ex += eq * s.x[u].conj();
                    a.ex2 += q * x2;
                    a.e += eq;
                }
            }
            Ok(acc)
        })
        .collect();
    let mut tot = vec![UserSums::default(); k];
    for p in parts {
        for (t, s) in tot.iter_mut().zip(p?) {
            t.add(&s);
        }
    }

    let n = trials as f64;
    let users: Vec<UserReport> = tot
        .iter()
        .map(|t| {
            let (mq, mi) = (t.q / n, t.i / n);
            let nf = mq / mi;
            let var_q = t.q2 / n - mq * mq;
            let var_i = t.i2 / n - mi * mi;
            let cov = t.qi / n - mq * mi;
            // delta method for a ratio of means
            let var_ratio = (var_q / (mi * mi) - 2.0 * mq * cov / mi.powi(3)
                + mq * mq * var_i / mi.powi(4))
                / n;
            UserReport {
                nf,
                nf_db: to_db(nf),
                nf_db_se: 10.0 / std::f64::consts::LN_10 * var_ratio.max(0.0).sqrt() / nf,
                sinad_db: to_db(t.x2 / t.q),
                residual_corr: self_normalized(t.ex, t.ex2, n),
                residual_mean: self_normalized(t.e, t.q, n),
            }
        })
        .collect();
    if users
        .iter()
        .any(|u| !(u.nf.is_finite() && u.nf_db_se.is_finite()))
    {
        return Err(Error::InternalConsistency(
            "non-finite noise-figure estimate".into(),
        ));
    }
    let worst_user = (0..k)
        .max_by(|&a, &b| users[a].nf.total_cmp(&users[b].nf))
        .unwrap_or(0);
    Ok(SimReport {
        trials,
        seed,
        g_o,
        worst_nf_db: users[worst_user].nf_db,
        worst_user,
        users,
    })
}

/// Correlation of the de-rotated distortion `c(m)*·w_O(m)` with that of the
/// first antenna.
#[derive(Debug, Clone, Serialize)]
pub struct CoherenceProfile {
    pub trials: usize,
    pub seed: u64,
    /// `corr[m]` for antennas `m = 1..M` (zero-based here); `corr[0] = 1`.
    pub corr: Vec<Complex64>,
    pub se: Vec<f64>,
    /// `|mean over m ≥ 2 of corr[m]|`: how much of the distortion adds
    /// coherently after combining.
    pub coherent_fraction: f64,
    /// Mean over `m ≥ 2` of `|corr[m]|`.
    pub mean_abs_corr: f64,
}

/// Estimates the distortion coherence across antennas for a single user.
/// `w_O(m) = F(s_I(m)) − g_O·s_I(m)` is evaluated per real dimension from the
/// noiseless antenna input.
pub fn nld_coherence_probe(
    config: &ArrayConfig,
    trials: usize,
    seed: u64,
) -> Result<CoherenceProfile> {
    if config.k() != 1 {
        return Err(invalid(format!(
            "coherence probe needs a single user, got {}",
            config.k()
        )));
    }
    if trials < MIN_TRIALS {
        return Err(invalid(format!(
            "coherence probe needs at least {MIN_TRIALS} trials, got {trials}"
        )));
    }
    if config.sigma_x == 0.0 {
        return Err(Error::DegenerateInput(
            "no desired signal, distortion is identically zero".into(),
        ));
    }
    let g_o = config.model_stats()?.gain;
    let m = config.m();
    let spec = config.spec;
    let sigma_n = config.sigma_n;
    let steer = config.channel.steering(0);
    let w = |z: f64| transfer_and_energy(&spec, sigma_n, z).0 - g_o * z;

    // per antenna: Σ a_m·a_1*, Σ|a_m|², Σ|a_m|²|a_1|²
    let parts: Vec<(Vec<Complex64>, Vec<f64>, Vec<f64>)> = blocks(trials)
        .map(|(b, len)| {
            let mut rng = stream_rng(seed, b as u64);
            let mut cross = vec![Complex64::new(0.0, 0.0); m];
            let mut pow = vec![0.0; m];
            let mut pow_cross = vec![0.0; m];
            for _ in 0..len {
                let x = [complex_normal(&mut rng, config.sigma_x)];
                let s_i = antenna_inputs(&config.channel, &x);
                let a: Vec<Complex64> = s_i
                    .iter()
                    .zip(steer)
                    .map(|(s, c)| c.conj() * Complex64::new(w(s.re), w(s.im)))
                    .collect();
                let p1 = a[0].norm_sqr();
                for i in 0..m {
                    cross[i] += a[i] * a[0].conj();
                    pow[i] += a[i].norm_sqr();
                    pow_cross[i] += a[i].norm_sqr() * p1;
                }
            }
            (cross, pow, pow_cross)
        })
        .collect();
    let mut cross = vec![Complex64::new(0.0, 0.0); m];
    let mut pow = vec![0.0; m];
    let mut pow_cross = vec![0.0; m];
    for (c, p, pc) in parts {
        for i in 0..m {
            cross[i] += c[i];
            pow[i] += p[i];
            pow_cross[i] += pc[i];
        }
    }
    let n = trials as f64;
    let corr: Vec<Complex64> = (0..m)
        .map(|i| cross[i] / (pow[i] * pow[0]).sqrt())
        .collect();
    // (1 − |ρ|²)/√n for the magnitude, floored by the self-normalized
    // sampling scale √(E|a_m|²|a_1|²)/(√n·√(E|a_m|²E|a_1|²)) when ρ is small
    let se: Vec<f64> = (0..m)
        .map(|i| {
            let r2 = corr[i].norm_sqr().min(1.0);
            let scale = (pow_cross[i] / n).sqrt() / ((pow[i] / n) * (pow[0] / n)).sqrt();
            (1.0 - r2) * scale / n.sqrt()
        })
        .collect();
    let others = (m - 1).max(1) as f64;
    let (coherent_fraction, mean_abs_corr) = if m > 1 {
        (
            (corr[1..].iter().sum::<Complex64>() / others).norm(),
            corr[1..].iter().map(|c| c.norm()).sum::<f64>() / others,
        )
    } else {
        (1.0, 1.0)
    };
    Ok(CoherenceProfile {
        trials,
        seed,
        corr,
        se,
        coherent_fraction,
        mean_abs_corr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{from_db, min_nf};
    use crate::mimo_sim::los_channel;
    use crate::quantizer::QuantizerSpec;
    use std::f64::consts::FRAC_PI_2;

    fn q(bits: u32) -> QuantizerSpec {
        QuantizerSpec::new(bits).unwrap()
    }

    fn worst(bits: u32, m: usize, snr_cum_db: f64) -> (ArrayConfig, f64) {
        let opt = min_nf(&q(bits), from_db(snr_cum_db), m).unwrap();
        let cfg = ArrayConfig::single_user(q(bits), m, 0.0, from_db(snr_cum_db), opt.sf).unwrap();
        (cfg, to_db(opt.value))
    }

    #[test]
    fn rejects_short_runs() {
        let (cfg, _) = worst(1, 4, 0.0);
        assert!(empirical_nf(&cfg, 999, 0).is_err());
        assert!(nld_coherence_probe(&cfg, 999, 0).is_err());
    }

    #[test]
    fn one_bit_low_snr_floor() {
        let (cfg, analytic) = worst(1, 100, -20.0);
        let r = empirical_nf(&cfg, 20_000, 1).unwrap();
        assert!((r.worst_nf_db - 1.9612).abs() < 0.1, "{r:?}");
        assert!((r.worst_nf_db - analytic).abs() < 4.0 * r.users[0].nf_db_se + 0.02);
        let n = 20_000f64;
        assert!(r.users[0].residual_mean < 4.0 / n.sqrt());
        assert!(r.users[0].residual_corr < 4.0 / n.sqrt());
    }

    #[test]
    fn matches_analytic_worst_case() {
        for (bits, snr) in [(2, 10.0), (3, 20.0)] {
            let (cfg, analytic) = worst(bits, 100, snr);
            let r = empirical_nf(&cfg, 10_000, 2).unwrap();
            assert!(
                (r.worst_nf_db - analytic).abs() < 0.2,
                "bits={bits}: {} vs {analytic}",
                r.worst_nf_db
            );
        }
    }

    #[test]
    fn generic_angle_beats_worst_case() {
        let snr = 25.0;
        let (cfg, analytic) = worst(1, 100, snr);
        for aoa in [0.37, 1.1, 2.3] {
            let generic = ArrayConfig::single_user(q(1), 100, aoa, from_db(snr), cfg.sf()).unwrap();
            let r = empirical_nf(&generic, 4_000, 3).unwrap();
            assert!(
                r.worst_nf_db <= analytic,
                "α={aoa}: {} > {analytic}",
                r.worst_nf_db
            );
        }
    }

    #[test]
    fn multi_user_report() {
        let ch = los_channel(
            16,
            &[Complex64::new(1.0, 0.0), Complex64::new(0.5, 0.5)],
            &[0.2, -0.7],
        )
        .unwrap();
        let cfg = ArrayConfig::new(q(3), ch, 1.0, 2.0).unwrap();
        let r = empirical_nf(&cfg, 2_000, 4).unwrap();
        assert_eq!(r.users.len(), 2);
        assert_eq!(
            r.worst_nf_db,
            r.users.iter().map(|u| u.nf_db).fold(f64::MIN, f64::max)
        );
        let again = empirical_nf(&cfg, 2_000, 4).unwrap();
        assert_eq!(r.worst_nf_db, again.worst_nf_db);
    }

    #[test]
    fn coherence_profiles() {
        for aoa in [0.0, FRAC_PI_2] {
            let cfg = ArrayConfig::single_user(q(1), 100, aoa, from_db(20.0), 1.0).unwrap();
            let p = nld_coherence_probe(&cfg, 4_000, 5).unwrap();
            for (c, se) in p.corr.iter().zip(&p.se) {
                assert!(
                    (c - Complex64::new(1.0, 0.0)).norm() <= (3.0 * se).max(1e-12),
                    "{c} ± {se}"
                );
            }
        }
    }

    /// At low SNR the distortion is cubic. For a circular input its radial
    /// part `(3/4)·ρ(ρ² − 2σ²)·e^{jφ}` does not depend on the steering phase
    /// and carries 3/4 of the power; the `e^{−j3φ}` part averages out across a
    /// generic array. The antenna-averaged correlation therefore tends to 3/4.
    #[test]
    fn generic_angle_keeps_radial_distortion_coherent() {
        for bits in [1, 3] {
            let cfg = ArrayConfig::single_user(q(bits), 100, 0.3, from_db(-20.0), 1.0).unwrap();
            let p = nld_coherence_probe(&cfg, 20_000, 6).unwrap();
            assert!(
                (p.coherent_fraction - 0.75).abs() < 0.03,
                "bits={bits}: {}",
                p.coherent_fraction
            );
        }
        let cfg = ArrayConfig::single_user(q(1), 100, 0.3, from_db(20.0), 1.0).unwrap();
        let p = nld_coherence_probe(&cfg, 4_000, 5).unwrap();
        assert!(p.coherent_fraction < 0.9 && p.mean_abs_corr < 0.9);
    }
}
