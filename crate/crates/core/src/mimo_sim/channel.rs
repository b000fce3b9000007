use num_complex::Complex64;

use crate::equiv_model::{EquivalentStats, OperatingPoint};
use crate::error::{invalid, Result};
use crate::metrics::{stats_at, to_operating_point, ScaledPoint};
use crate::quantizer::QuantizerSpec;

/// Per-user channel gains and per-antenna steering, `h_k(m) = g_k·c_k(m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    m: usize,
    gains: Vec<Complex64>,
    /// `steering[k][m]`, unit modulus.
    steering: Vec<Vec<Complex64>>,
}

/// `exp(jπ·t)`, exact when `t` is a multiple of 1/2.
fn unit_phasor(t: f64) -> Complex64 {
    let t = t.rem_euclid(2.0);
    let quarter = t * 2.0;
    if quarter == quarter.round() {
        return match quarter as u8 {
            0 | 4 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    let (s, c) = (std::f64::consts::PI * t).sin_cos();
    Complex64::new(c, s)
}

/// Line-of-sight uniform linear array with half-wavelength spacing:
/// `c_k(m) = exp(jπ·m·sin α_k)` for `m = 1..M`.
pub fn los_channel(m: usize, gains: &[Complex64], aoas: &[f64]) -> Result<Channel> {
    if m == 0 {
        return Err(invalid("need at least one antenna"));
    }
    if gains.is_empty() || gains.len() != aoas.len() {
        return Err(invalid(format!(
            "need one gain per angle of arrival and at least one user, got {} gains and {} angles",
            gains.len(),
            aoas.len()
        )));
    }
    if aoas.iter().any(|a| !a.is_finite()) || gains.iter().any(|g| !g.is_finite()) {
        return Err(invalid("gains and angles must be finite"));
    }
    let steering = aoas
        .iter()
        .map(|&a| {
            let s = a.sin();
            (1..=m).map(|i| unit_phasor(i as f64 * s)).collect()
        })
        .collect();
    Channel::new(m, gains.to_vec(), steering)
}

impl Channel {
    /// Arbitrary steering; every entry must have unit modulus.
    pub fn new(m: usize, gains: Vec<Complex64>, steering: Vec<Vec<Complex64>>) -> Result<Self> {
        if m == 0 || gains.is_empty() || steering.len() != gains.len() {
            return Err(invalid(
                "channel needs m >= 1 and one steering vector per user",
            ));
        }
        for c in &steering {
            if c.len() != m {
                return Err(invalid(format!(
                    "steering vector of length {} for {m} antennas",
                    c.len()
                )));
            }
            if c.iter().any(|z| (z.norm() - 1.0).abs() > 1e-12) {
                return Err(invalid("steering entries must have unit modulus"));
            }
        }
        Ok(Self { m, gains, steering })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.gains.len()
    }

    pub fn gains(&self) -> &[Complex64] {
        &self.gains
    }

    pub fn steering(&self, user: usize) -> &[Complex64] {
        &self.steering[user]
    }

    pub fn entry(&self, antenna: usize, user: usize) -> Complex64 {
        self.gains[user] * self.steering[user][antenna]
    }
}

/// A quantized array: channel, user-signal and noise levels (per real
/// dimension) and the ADC.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayConfig {
    pub channel: Channel,
    pub sigma_x: f64,
    pub sigma_n: f64,
    pub spec: QuantizerSpec,
}

impl ArrayConfig {
    pub fn new(spec: QuantizerSpec, channel: Channel, sigma_x: f64, sigma_n: f64) -> Result<Self> {
        if !(sigma_x.is_finite() && sigma_x >= 0.0) {
            return Err(invalid(format!(
                "sigma_x must be finite and >= 0, got {sigma_x}"
            )));
        }
        if !(sigma_n.is_finite() && sigma_n > 0.0) {
            return Err(invalid(format!(
                "sigma_n must be finite and > 0, got {sigma_n}"
            )));
        }
        Ok(Self {
            channel,
            sigma_x,
            sigma_n,
            spec,
        })
    }

    /// Single user with unit gain at angle `aoa`, scaled to cumulative input SNR
    /// `snr_cum_in` (linear) at scaling factor `sf`.
    pub fn single_user(
        spec: QuantizerSpec,
        m: usize,
        aoa: f64,
        snr_cum_in: f64,
        sf: f64,
    ) -> Result<Self> {
        let channel = los_channel(m, &[Complex64::new(1.0, 0.0)], &[aoa])?;
        let point = to_operating_point(&spec, &ScaledPoint::from_cumulative(sf, snr_cum_in, m)?)?;
        Self::new(spec, channel, point.sigma_s(), point.sigma_n())
    }

    pub fn m(&self) -> usize {
        self.channel.m()
    }

    pub fn k(&self) -> usize {
        self.channel.k()
    }

    /// Desired-signal std per real dimension at each antenna, `√(Σ|g_k|²)·σ_X`.
    pub fn sigma_s(&self) -> f64 {
        self.channel
            .gains()
            .iter()
            .map(|g| g.norm_sqr())
            .sum::<f64>()
            .sqrt()
            * self.sigma_x
    }

    /// `R² / (σ_S² + σ_N²)`.
    pub fn sf(&self) -> f64 {
        self.spec.r().powi(2) / (self.sigma_s().powi(2) + self.sigma_n.powi(2))
    }

    pub fn operating_point(&self) -> Result<OperatingPoint> {
        OperatingPoint::new(self.sigma_n, self.sigma_s())
    }

    /// Equivalent-model statistics of one ADC at this operating point.
    pub fn model_stats(&self) -> Result<EquivalentStats> {
        stats_at(&self.spec, &self.operating_point()?)
    }
}
