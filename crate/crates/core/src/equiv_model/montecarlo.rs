//! Sampling estimate of the equivalent-model statistics, used as an oracle for
//! the quadrature path and for the whiteness/orthogonality properties.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::quantizer::QuantizerSpec;

use super::transfer::transfer_and_energy;
use super::{decompose, EquivalentStats, OperatingPoint, QuadratureGrid};

pub const MIN_SAMPLES: usize = 10_000;

/// Draws per independent sub-stream. Fixed so that results do not depend on
/// how blocks are scheduled.
const BLOCK: usize = 1 << 16;

/// Estimates plus diagnostics.
///
/// The correlation diagnostics are self-normalized: `E[ab]/√E[a²b²]`. For
/// independent `a`, `b` this is the ordinary correlation coefficient; for
/// uncorrelated but dependent pairs (the distortion is a function of the
/// signal) it keeps a sampling standard error of `1/√n`.
#[derive(Debug, Clone, Serialize)]
pub struct MonteCarloStats {
    pub samples: usize,
    pub seed: u64,
    /// `gain` is the sample Bussgang gain `Σ s_I·s_O / Σ s_I²`; the variances
    /// are sample powers of `n_O` and `w_O`.
    pub estimate: EquivalentStats,
    /// Model gain used to form `w_O`.
    pub model_gain: f64,
    pub gain_se: f64,
    pub noise_var_se: f64,
    pub nld_var_se: f64,
    pub noise_mean: f64,
    pub nld_mean: f64,
    pub corr_noise_signal: f64,
    pub corr_nld_signal: f64,
    pub corr_noise_nld: f64,
    /// Lag-1 autocorrelation of `n_O` over consecutive independent draws.
    pub noise_lag1: f64,
}

impl MonteCarloStats {
    /// Largest magnitude among the quantities that should vanish.
    pub fn max_abs_correlation(&self) -> f64 {
        self.diagnostics()
            .iter()
            .fold(0.0f64, |acc, (_, v)| acc.max(v.abs()))
    }

    pub fn diagnostics(&self) -> [(&'static str, f64); 6] {
        [
            ("mean(n_O)", self.noise_mean),
            ("mean(w_O)", self.nld_mean),
            ("corr(n_O, s_I)", self.corr_noise_signal),
            ("corr(w_O, s_I)", self.corr_nld_signal),
            ("corr(n_O, w_O)", self.corr_noise_nld),
            ("lag1(n_O)", self.noise_lag1),
        ]
    }
}

fn block_rng(seed: u64, block: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block as u64);
    rng
}

fn block_len(n: usize, block: usize) -> usize {
    (n - block * BLOCK).min(BLOCK)
}

#[derive(Debug, Default, Clone, Copy)]
struct Sums {
    s2: f64,
    s_out: f64,
    s4: f64,
    s3_out: f64,
    s2_out2: f64,
    n1: f64,
    n2: f64,
    n4: f64,
    w1: f64,
    w2: f64,
    w4: f64,
    ns: f64,
    ns2: f64,
    ws: f64,
    ws2: f64,
    nw: f64,
    nw2: f64,
    lag: f64,
    lag2: f64,
    lag_pairs: f64,
}

impl Sums {
    fn add(mut self, o: &Sums) -> Sums {
        self.s2 += o.s2;
        self.s_out += o.s_out;
        self.s4 += o.s4;
        self.s3_out += o.s3_out;
        self.s2_out2 += o.s2_out2;
        self.n1 += o.n1;
        self.n2 += o.n2;
        self.n4 += o.n4;
        self.w1 += o.w1;
        self.w2 += o.w2;
        self.w4 += o.w4;
        self.ns += o.ns;
        self.ns2 += o.ns2;
        self.ws += o.ws;
        self.ws2 += o.ws2;
        self.nw += o.nw;
        self.nw2 += o.nw2;
        self.lag += o.lag;
        self.lag2 += o.lag2;
        self.lag_pairs += o.lag_pairs;
        self
    }
}

/// Draws `s_I ~ N(0, σ_S²)` and `n_I ~ N(0, σ_N²)`, forms `s_O`,
/// `n_O = s_O − F(s_I)` and `w_O = F(s_I) − g_O·s_I`, with `g_O` the model
/// gain from [`decompose`].
///
/// Deterministic for a given `(seed, n_samples)` regardless of thread count:
/// the draws are split into fixed blocks, each with its own ChaCha stream, and
/// block sums are combined in block order.
pub fn monte_carlo_stats(
    spec: &QuantizerSpec,
    point: &OperatingPoint,
    n_samples: usize,
    seed: u64,
) -> Result<MonteCarloStats> {
    if n_samples < MIN_SAMPLES {
        return Err(invalid(format!(
            "monte_carlo_stats needs at least {MIN_SAMPLES} samples, got {n_samples}"
        )));
    }
    let model_gain = decompose(spec, point, &QuadratureGrid::for_point(point)?)?.gain;
    let blocks = n_samples.div_ceil(BLOCK);
    let sigma_n = point.sigma_n();
    let sigma_s = point.sigma_s();

    let parts: Vec<Sums> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = block_rng(seed, b);
            let mut acc = Sums::default();
            let mut prev: Option<f64> = None;
            for _ in 0..block_len(n_samples, b) {
                let a: f64 = StandardNormal.sample(&mut rng);
                let z: f64 = StandardNormal.sample(&mut rng);
                let s = sigma_s * a;
                let out = spec.quantize_finite(s + sigma_n * z);
                let (f, _) = transfer_and_energy(spec, sigma_n, s);
                let n = out - f;
                let w = f - model_gain * s;
                acc.s2 += s * s;
                acc.s_out += s * out;
                acc.s4 += s.powi(4);
                acc.s3_out += s.powi(3) * out;
                acc.s2_out2 += s * s * out * out;
                acc.n1 += n;
                acc.n2 += n * n;
                acc.n4 += n.powi(4);
                acc.w1 += w;
                acc.w2 += w * w;
                acc.w4 += w.powi(4);
                acc.ns += n * s;
                acc.ns2 += (n * s).powi(2);
                acc.ws += w * s;
                acc.ws2 += (w * s).powi(2);
                acc.nw += n * w;
                acc.nw2 += (n * w).powi(2);
                if let Some(p) = prev {
                    acc.lag += p * n;
                    acc.lag2 += (p * n).powi(2);
                    acc.lag_pairs += 1.0;
                }
                prev = Some(n);
            }
            acc
        })
        .collect();
    let t = parts.iter().fold(Sums::default(), |acc, p| acc.add(p));

    let nf = n_samples as f64;
    let m_s2 = t.s2 / nf;
    let gain = t.s_out / t.s2;
    // delta-method variance of the sample gain: Var(s·s_O − ĝ·s²) / (n·E[s²]²)
    let gain_terms = (t.s2_out2 - 2.0 * gain * t.s3_out + gain * gain * t.s4) / nf;
    let gain_se = (gain_terms.max(0.0) / nf).sqrt() / m_s2;
    let noise_var = t.n2 / nf;
    let nld_var = t.w2 / nf;
    let se_of_power = |m2: f64, m4: f64| ((m4 - m2 * m2).max(0.0) / nf).sqrt();
    // (Σx/k) / √(Σx²/k)
    let normalized = |sum: f64, sum_sq: f64, count: f64| {
        if sum_sq > 0.0 {
            sum / (count * sum_sq).sqrt()
        } else {
            0.0
        }
    };
    Ok(MonteCarloStats {
        samples: n_samples,
        seed,
        estimate: EquivalentStats {
            gain,
            noise_var,
            nld_var,
        },
        model_gain,
        gain_se,
        noise_var_se: se_of_power(noise_var, t.n4 / nf),
        nld_var_se: se_of_power(nld_var, t.w4 / nf),
        noise_mean: normalized(t.n1, t.n2, nf),
        nld_mean: normalized(t.w1, t.w2, nf),
        corr_noise_signal: normalized(t.ns, t.ns2, nf),
        corr_nld_signal: normalized(t.ws, t.ws2, nf),
        corr_noise_nld: normalized(t.nw, t.nw2, nf),
        noise_lag1: normalized(t.lag, t.lag2, t.lag_pairs),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_runs() {
        let spec = QuantizerSpec::new(2).unwrap();
        let p = OperatingPoint::new(1.0, 1.0).unwrap();
        assert!(monte_carlo_stats(&spec, &p, 9_999, 0).is_err());
    }

    #[test]
    fn deterministic_per_seed() {
        let spec = QuantizerSpec::new(3).unwrap();
        let p = OperatingPoint::new(0.8, 1.1).unwrap();
        let a = monte_carlo_stats(&spec, &p, 200_000, 42).unwrap();
        let b = monte_carlo_stats(&spec, &p, 200_000, 42).unwrap();
        let c = monte_carlo_stats(&spec, &p, 200_000, 43).unwrap();
        assert_eq!(a.estimate, b.estimate);
        assert_eq!(a.noise_lag1, b.noise_lag1);
        assert_ne!(a.estimate, c.estimate);
    }

    #[test]
    fn whiteness_and_self_consistency() {
        let n = 1_000_000;
        let spec = QuantizerSpec::new(2).unwrap();
        let p = OperatingPoint::new(0.6, 0.9).unwrap();
        let mc = monte_carlo_stats(&spec, &p, n, 1).unwrap();
        let tol = 4.0 / (n as f64).sqrt();
        assert!(mc.max_abs_correlation() <= tol, "{mc:?}");
        let st = decompose(&spec, &p, &QuadratureGrid::for_point(&p).unwrap()).unwrap();
        assert!((mc.estimate.gain - st.gain).abs() <= 4.0 * mc.gain_se);
        assert!((mc.estimate.noise_var - st.noise_var).abs() <= 4.0 * mc.noise_var_se);
        assert!((mc.estimate.nld_var - st.nld_var).abs() <= 4.0 * mc.nld_var_se);
    }
}
