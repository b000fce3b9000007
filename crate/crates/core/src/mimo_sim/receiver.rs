use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Error, Result};

use super::channel::{ArrayConfig, Channel};

/// One channel use: user symbols, noiseless antenna inputs, noise and ADC outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub x: Vec<Complex64>,
    pub s_i: Vec<Complex64>,
    pub n_i: Vec<Complex64>,
    pub s_o: Vec<Complex64>,
}

pub(crate) fn complex_normal<R: Rng>(rng: &mut R, sigma: f64) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(sigma * re, sigma * im)
}

/// `s_I(m) = Σ_k h_k(m)·x_k`.
pub(crate) fn antenna_inputs(channel: &Channel, x: &[Complex64]) -> Vec<Complex64> {
    (0..channel.m())
        .map(|m| (0..channel.k()).map(|k| channel.entry(m, k) * x[k]).sum())
        .collect()
}

pub(crate) fn draw_snapshot<R: Rng>(config: &ArrayConfig, rng: &mut R) -> Snapshot {
    let x: Vec<Complex64> = (0..config.k())
        .map(|_| complex_normal(rng, config.sigma_x))
        .collect();
    let s_i = antenna_inputs(&config.channel, &x);
    let n_i: Vec<Complex64> = (0..config.m())
        .map(|_| complex_normal(rng, config.sigma_n))
        .collect();
    let s_o = s_i
        .iter()
        .zip(&n_i)
        .map(|(s, n)| config.spec.quantize_complex_finite(s + n))
        .collect();
    Snapshot { x, s_i, n_i, s_o }
}

/// Circular Gaussian users with variance `σ_X²` per real dimension, Gaussian
/// noise with `σ_N²` per real dimension, complex quantization per antenna.
pub fn simulate_snapshot(config: &ArrayConfig, seed: u64) -> Snapshot {
    draw_snapshot(config, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn check_len(config: &ArrayConfig, s_o: &[Complex64]) -> Result<()> {
    if s_o.len() != config.m() {
        return Err(invalid(format!(
            "expected {} observations, got {}",
            config.m(),
            s_o.len()
        )));
    }
    Ok(())
}

fn check_gain(g_o: f64) -> Result<()> {
    if !(g_o.is_finite() && g_o > 0.0) {
        return Err(invalid(format!(
            "ADC gain must be finite and > 0, got {g_o}"
        )));
    }
    Ok(())
}

/// Per-user matched filter normalized by the ADC gain `g_o` (1 for an ideal ADC):
/// `x̂_k = g_k*/(g_o·M·|g_k|²) · Σ_m c_k(m)*·s_O(m)`.
pub fn mrc_estimate(config: &ArrayConfig, s_o: &[Complex64], g_o: f64) -> Result<Vec<Complex64>> {
    check_len(config, s_o)?;
    check_gain(g_o)?;
    let ch = &config.channel;
    (0..ch.k())
        .map(|k| {
            let g = ch.gains()[k];
            if g.norm_sqr() == 0.0 {
                return Err(invalid(format!("user {k} has zero channel gain")));
            }
            let acc: Complex64 = ch
                .steering(k)
                .iter()
                .zip(s_o)
                .map(|(c, s)| c.conj() * s)
                .sum();
            Ok(acc * g.conj() / (g_o * ch.m() as f64 * g.norm_sqr()))
        })
        .collect()
}

fn channel_matrix(ch: &Channel) -> DMatrix<Complex64> {
    DMatrix::from_fn(ch.m(), ch.k(), |m, k| ch.entry(m, k))
}

fn regularized_solve(
    config: &ArrayConfig,
    s_o: &[Complex64],
    g_o: f64,
    diag: f64,
) -> Result<Vec<Complex64>> {
    check_len(config, s_o)?;
    check_gain(g_o)?;
    let k = config.k();
    if k > config.m() {
        return Err(Error::NumericalRank(format!(
            "{k} users exceed {} antennas",
            config.m()
        )));
    }
    let h = channel_matrix(&config.channel);
    let hh = h.adjoint();
    let normal = &hh * &h + DMatrix::<Complex64>::identity(k, k) * Complex64::new(diag, 0.0);
    let sv = normal.singular_values();
    let (lo, hi) = (sv.min(), sv.max());
    if !(hi > 0.0) || lo <= hi * 1e-12 {
        return Err(Error::NumericalRank(format!(
            "normal matrix is singular (singular values {lo:e} .. {hi:e})"
        )));
    }
    let front = &hh * DVector::from_column_slice(s_o);
    let sol = normal
        .lu()
        .solve(&front)
        .ok_or_else(|| Error::NumericalRank("LU solve failed".into()))?;
    Ok(sol.iter().map(|z| z / g_o).collect())
}

/// Zero forcing on the MRC front end, `(HᴴH)⁻¹·Hᴴ·s_O / g_o`.
pub fn zf_estimate(config: &ArrayConfig, s_o: &[Complex64], g_o: f64) -> Result<Vec<Complex64>> {
    regularized_solve(config, s_o, g_o, 0.0)
}

/// `(HᴴH + I·noise_over_signal)⁻¹·Hᴴ·s_O / g_o`.
pub fn mmse_estimate(
    config: &ArrayConfig,
    s_o: &[Complex64],
    g_o: f64,
    noise_over_signal: f64,
) -> Result<Vec<Complex64>> {
    if !(noise_over_signal.is_finite() && noise_over_signal >= 0.0) {
        return Err(invalid(format!(
            "noise-to-signal ratio must be >= 0, got {noise_over_signal}"
        )));
    }
    regularized_solve(config, s_o, g_o, noise_over_signal)
}
