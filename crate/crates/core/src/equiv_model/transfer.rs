//! Equivalent transfer function `F(σ_N, s) = E[s_O | s_I = s]` and energy
//! function `V(σ_N, s) = E[s_O² | s_I = s]` for Gaussian input noise.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use crate::error::{invalid, Result};
use crate::quantizer::{QuantizerSpec, STEP};

use super::QuadratureGrid;

/// Boundaries further than this many noise deviations from the input are
/// treated as certainly below/above it (`erfc(9/√2) ≈ 2e-19`).
const WINDOW_SIGMAS: f64 = 9.0;

fn check_noise(sigma_n: f64) -> Result<()> {
    if sigma_n.is_finite() && sigma_n > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!(
            "sigma_n must be finite and > 0, got {sigma_n}"
        )))
    }
}

fn check_input(s_i: f64) -> Result<()> {
    if s_i.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("desired input must be finite, got {s_i}")))
    }
}

/// `Pr(s_O = q_r | s_I)` for every level, from the erf expressions for the
/// bottom, interior and top cells.
pub fn level_probabilities(spec: &QuantizerSpec, sigma_n: f64, s_i: f64) -> Result<Vec<f64>> {
    check_noise(sigma_n)?;
    check_input(s_i)?;
    let scale = 1.0 / (SQRT_2 * sigma_n);
    let r = spec.levels_count();
    let erf_at = |edge: f64| libm::erf((edge - s_i) * scale);
    let probs = (0..r)
        .map(|idx| {
            let q = spec.level(idx);
            let half = STEP / 2.0;
            if r == 1 {
                1.0
            } else if idx == 0 {
                0.5 * (1.0 + erf_at(q + half))
            } else if idx == r - 1 {
                0.5 * (1.0 - erf_at(q - half))
            } else {
                0.5 * (erf_at(q + half) - erf_at(q - half))
            }
        })
        .collect();
    Ok(probs)
}

/// `F` and `V` together. Written as a sum over decision boundaries
/// (summation by parts of `Σ q_r·Pr(q_r)`), limited to the boundaries within
/// `WINDOW_SIGMAS` noise deviations of `s_i`.
#[inline]
pub(crate) fn transfer_and_energy(spec: &QuantizerSpec, sigma_n: f64, s_i: f64) -> (f64, f64) {
    let r = spec.r();
    let reach = WINDOW_SIGMAS * sigma_n;
    // boundary j (1..R-1) sits at 2j - R; it is the lower edge of level j
    let lo = ((s_i - reach + r) / STEP).ceil().max(1.0);
    let hi = ((s_i + reach + r) / STEP).floor().min(r - 1.0);
    let hi_idx = if hi < 0.0 { 0 } else { hi as usize };
    let q_hi = spec.level(hi_idx);
    let mut f = q_hi;
    let mut v = q_hi * q_hi;
    if lo <= hi {
        let scale = FRAC_1_SQRT_2 / sigma_n;
        for j in (lo as usize)..=hi_idx {
            let b = spec.boundary_below(j);
            // Pr(s_I + n_I < b)
            let below = 0.5 * libm::erfc((s_i - b) * scale);
            f -= STEP * below;
            v -= 2.0 * STEP * b * below;
        }
    }
    (f, v)
}

/// Closed-form equivalent transfer function `F(σ_N, s_I)`.
pub fn transfer_function(spec: &QuantizerSpec, sigma_n: f64, s_i: f64) -> Result<f64> {
    check_noise(sigma_n)?;
    check_input(s_i)?;
    Ok(transfer_and_energy(spec, sigma_n, s_i).0)
}

/// Closed-form energy function `V(σ_N, s_I)`.
pub fn energy_function(spec: &QuantizerSpec, sigma_n: f64, s_i: f64) -> Result<f64> {
    check_noise(sigma_n)?;
    check_input(s_i)?;
    Ok(transfer_and_energy(spec, sigma_n, s_i).1)
}

/// `∂F/∂s_I` at `s_I = 0`: the sum of the noise density over all boundaries,
/// times the step.
pub fn transfer_slope_at_zero(spec: &QuantizerSpec, sigma_n: f64) -> Result<f64> {
    check_noise(sigma_n)?;
    let norm = 1.0 / ((2.0 * PI).sqrt() * sigma_n);
    let slope = (1..spec.levels_count())
        .map(|j| {
            let z = spec.boundary_below(j) / sigma_n;
            STEP * norm * (-0.5 * z * z).exp()
        })
        .sum();
    Ok(slope)
}

/// Composite Simpson integral of the `N(0, σ²)` density over `[a, b]` with
/// panels no wider than `max_step`.
fn gaussian_mass(a: f64, b: f64, sigma: f64, max_step: f64) -> f64 {
    let width = b - a;
    if width <= 0.0 {
        return 0.0;
    }
    let mut panels = (width / max_step).ceil() as usize;
    panels = panels.max(2);
    if panels % 2 == 1 {
        panels += 1;
    }
    let h = width / panels as f64;
    let norm = 1.0 / ((2.0 * PI).sqrt() * sigma);
    let density = |x: f64| {
        let z = x / sigma;
        norm * (-0.5 * z * z).exp()
    };
    let mut acc = density(a) + density(b);
    for i in 1..panels {
        let x = a + h * i as f64;
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * density(x);
    }
    acc * h / 3.0
}

/// Direct quadrature of `∫Q(s_I + n)^k·p_N(n) dn` for k = 1, 2 over the noise
/// axis of `grid`. The axis is split at the quantizer decision boundaries so
/// that each piece integrates a smooth density.
fn quadrature_moments(
    spec: &QuantizerSpec,
    sigma_n: f64,
    s_i: f64,
    grid: &QuadratureGrid,
) -> (f64, f64) {
    let h = grid.half_width();
    let mut cuts = vec![-h];
    for j in 1..spec.levels_count() {
        let n = spec.boundary_below(j) - s_i;
        if n > -h && n < h {
            cuts.push(n);
        }
    }
    cuts.push(h);
    let mut first = 0.0;
    let mut second = 0.0;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let q = spec.quantize_finite(s_i + 0.5 * (a + b));
        let mass = gaussian_mass(a, b, sigma_n, grid.step());
        first += q * mass;
        second += q * q * mass;
    }
    (first, second)
}

/// `F(σ_N, s_I)` by numerical integration of the noise convolution; an
/// independent cross-check of [`transfer_function`].
pub fn transfer_function_quadrature(
    spec: &QuantizerSpec,
    sigma_n: f64,
    s_i: f64,
    grid: &QuadratureGrid,
) -> Result<f64> {
    check_noise(sigma_n)?;
    check_input(s_i)?;
    Ok(quadrature_moments(spec, sigma_n, s_i, grid).0)
}

/// `V(σ_N, s_I)` by numerical integration; cross-check of [`energy_function`].
pub fn energy_function_quadrature(
    spec: &QuantizerSpec,
    sigma_n: f64,
    s_i: f64,
    grid: &QuadratureGrid,
) -> Result<f64> {
    check_noise(sigma_n)?;
    check_input(s_i)?;
    Ok(quadrature_moments(spec, sigma_n, s_i, grid).1)
}
