//! Bussgang decomposition of the equivalent transfer function over a Gaussian
//! desired signal: gain `g_O`, equivalent noise variance `σ_NO²` and nonlinear
//! distortion variance `σ_WO²`.

use crate::error::{Error, Result};
use crate::quantizer::QuantizerSpec;

use super::transfer::{energy_function, transfer_and_energy, transfer_slope_at_zero};
use super::{EquivalentStats, OperatingPoint, QuadratureGrid};

/// Variances down to this (relative) negative value are rounding noise.
const NEGATIVE_SLACK: f64 = 1e-10;

/// Expectations over `s_I ~ N(0, σ_S²)` needed by the decomposition.
#[derive(Debug, Clone, Copy)]
struct SignalMoments {
    /// E[s²]
    s2: f64,
    /// E[s·F(s)]
    sf: f64,
    /// E[F(s)²]
    f2: f64,
    /// E[V(s)]
    v: f64,
}

/// Trapezoidal expectations on the grid nodes, weighted by the Gaussian
/// density and normalized by the total weight. `F` is odd and `V` even, so all
/// four integrands are even and only the nonnegative half is evaluated.
fn signal_moments(
    spec: &QuantizerSpec,
    point: &OperatingPoint,
    grid: &QuadratureGrid,
) -> SignalMoments {
    let sigma_s = point.sigma_s();
    let sigma_n = point.sigma_n();
    let n = grid.intervals();
    let h = grid.half_width() / n as f64;
    let (mut w_sum, mut s2, mut sf, mut f2, mut v) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for k in 0..=n {
        let s = h * k as f64;
        let z = s / sigma_s;
        let mut w = (-0.5 * z * z).exp();
        if k == n {
            w *= 0.5;
        }
        if k > 0 {
            w *= 2.0;
        }
        let (fk, vk) = transfer_and_energy(spec, sigma_n, s);
        w_sum += w;
        s2 += w * s * s;
        sf += w * s * fk;
        f2 += w * fk * fk;
        v += w * vk;
    }
    SignalMoments {
        s2: s2 / w_sum,
        sf: sf / w_sum,
        f2: f2 / w_sum,
        v: v / w_sum,
    }
}

fn clamp_variance(value: f64, scale: f64, what: &str) -> Result<f64> {
    if value >= 0.0 {
        Ok(value)
    } else if value >= -NEGATIVE_SLACK * scale.max(1.0) {
        Ok(0.0)
    } else {
        Err(Error::InternalConsistency(format!(
            "{what} evaluated to {value}, below the rounding slack"
        )))
    }
}

fn require_signal(point: &OperatingPoint) -> Result<()> {
    if point.sigma_s() > 0.0 {
        Ok(())
    } else {
        Err(Error::DegenerateInput(
            "sigma_s = 0; use low_snr_limit for the vanishing-signal values".into(),
        ))
    }
}

fn stats_from_moments(m: &SignalMoments) -> Result<EquivalentStats> {
    let gain = m.sf / m.s2;
    let noise_var = clamp_variance(m.v - m.f2, m.v, "equivalent noise variance")?;
    let nld_var = clamp_variance(m.f2 - gain * m.sf, m.v, "distortion variance")?;
    Ok(EquivalentStats {
        gain,
        noise_var,
        nld_var,
    })
}

/// `g_O = E[s_I·F(s_I)] / E[s_I²]`.
pub fn bussgang_gain(
    spec: &QuantizerSpec,
    point: &OperatingPoint,
    grid: &QuadratureGrid,
) -> Result<f64> {
    require_signal(point)?;
    let m = signal_moments(spec, point, grid);
    Ok(m.sf / m.s2)
}

/// `σ_NO² = E[V(s_I) − F(s_I)²]`. At `σ_S = 0` this is `V(σ_N, 0)` and the
/// grid is not used.
pub fn equiv_noise_var(
    spec: &QuantizerSpec,
    point: &OperatingPoint,
    grid: &QuadratureGrid,
) -> Result<f64> {
    if point.sigma_s() == 0.0 {
        return energy_function(spec, point.sigma_n(), 0.0);
    }
    let m = signal_moments(spec, point, grid);
    clamp_variance(m.v - m.f2, m.v, "equivalent noise variance")
}

/// `σ_WO² = E[F(s_I)²] − g_O²·σ_S²`.
pub fn nld_var(spec: &QuantizerSpec, point: &OperatingPoint, grid: &QuadratureGrid) -> Result<f64> {
    require_signal(point)?;
    Ok(stats_from_moments(&signal_moments(spec, point, grid))?.nld_var)
}

/// All three quantities from a single pass over the grid.
pub fn decompose(
    spec: &QuantizerSpec,
    point: &OperatingPoint,
    grid: &QuadratureGrid,
) -> Result<EquivalentStats> {
    require_signal(point)?;
    stats_from_moments(&signal_moments(spec, point, grid))
}

/// `E[V(s_I)]`, the total quantizer output power per real dimension.
pub fn total_output_power(
    spec: &QuantizerSpec,
    point: &OperatingPoint,
    grid: &QuadratureGrid,
) -> Result<f64> {
    if point.sigma_s() == 0.0 {
        return energy_function(spec, point.sigma_n(), 0.0);
    }
    Ok(signal_moments(spec, point, grid).v)
}

/// Limit of the decomposition as `σ_S → 0`: `g_O → F'(0)`, `σ_NO² → V(0)`,
/// `σ_WO² → 0`. For one bit this is `(√(2/(πσ_N²)), 1, 0)`.
pub fn low_snr_limit(spec: &QuantizerSpec, sigma_n: f64) -> Result<EquivalentStats> {
    Ok(EquivalentStats {
        gain: transfer_slope_at_zero(spec, sigma_n)?,
        noise_var: energy_function(spec, sigma_n, 0.0)?,
        nld_var: 0.0,
    })
}
