//! Uniform mid-rise quantizer with `R = 2^bits` levels and step `Δ = 2`.
//!
//! Levels sit at the odd integers `q_r = (2r − R − 1)·Δ/2`, `r = 1..R`, and the
//! decision boundaries at the even integers `−(R−2), …, R−2`. Inputs exactly on
//! a boundary go to the upper cell, so `Q(0) = +1`.

use num_complex::Complex64;

use crate::error::{invalid, Result};

/// Quantization step. Fixed; every other scale in the crate is relative to it.
pub const STEP: f64 = 2.0;

pub const MAX_BITS: u32 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QuantizerSpec {
    bits: u32,
}

impl QuantizerSpec {
    pub fn new(bits: u32) -> Result<Self> {
        if !(1..=MAX_BITS).contains(&bits) {
            return Err(invalid(format!(
                "quantizer resolution must be 1..={MAX_BITS} bits, got {bits}"
            )));
        }
        Ok(Self { bits })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// Number of output levels `R`.
    pub fn levels_count(&self) -> usize {
        1usize << self.bits
    }

    /// `R` as a float, as it appears in the scaling-factor definition.
    pub fn r(&self) -> f64 {
        self.levels_count() as f64
    }

    pub fn step(&self) -> f64 {
        STEP
    }

    /// Saturation level `(R−1)·Δ/2`.
    pub fn top_level(&self) -> f64 {
        (self.r() - 1.0) * STEP / 2.0
    }

    /// Value of the level with zero-based index `idx`.
    pub fn level(&self, idx: usize) -> f64 {
        (2.0 * idx as f64 + 1.0 - self.r()) * STEP / 2.0
    }

    pub fn levels(&self) -> Vec<f64> {
        (0..self.levels_count()).map(|i| self.level(i)).collect()
    }

    /// Lower edge of the cell of level `idx` (`q − Δ/2`). For `idx = 0` the cell
    /// actually extends to −∞.
    pub fn boundary_below(&self, idx: usize) -> f64 {
        self.level(idx) - STEP / 2.0
    }

    /// Zero-based index of the level `s` maps to.
    pub fn level_index(&self, s: f64) -> usize {
        let half = (self.levels_count() / 2) as f64;
        let idx = (s / STEP).floor() + half;
        idx.clamp(0.0, self.r() - 1.0) as usize
    }

    pub fn quantize(&self, s: f64) -> Result<f64> {
        if !s.is_finite() {
            return Err(invalid(format!("quantizer input must be finite, got {s}")));
        }
        Ok(self.quantize_finite(s))
    }

    /// Hot-path variant for callers that already guarantee a finite input.
    #[inline]
    pub(crate) fn quantize_finite(&self, s: f64) -> f64 {
        self.level(self.level_index(s))
    }

    /// Quantizes the real and imaginary parts independently.
    pub fn quantize_complex(&self, s: Complex64) -> Result<Complex64> {
        Ok(Complex64::new(self.quantize(s.re)?, self.quantize(s.im)?))
    }

    #[inline]
    pub(crate) fn quantize_complex_finite(&self, s: Complex64) -> Complex64 {
        Complex64::new(self.quantize_finite(s.re), self.quantize_finite(s.im))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(bits: u32) -> QuantizerSpec {
        QuantizerSpec::new(bits).unwrap()
    }

    #[test]
    fn level_sets() {
        assert_eq!(q(2).levels(), vec![-3.0, -1.0, 1.0, 3.0]);
        assert_eq!(q(1).levels(), vec![-1.0, 1.0]);
        assert_eq!(q(3).top_level(), 7.0);
    }

    #[test]
    fn resolution_range_is_checked() {
        assert!(matches!(
            QuantizerSpec::new(0),
            Err(crate::Error::InvalidArgument(_))
        ));
        assert!(QuantizerSpec::new(17).is_err());
        assert!(QuantizerSpec::new(16).is_ok());
    }

    #[test]
    fn scalar_examples() {
        assert_eq!(q(2).quantize(0.5).unwrap(), 1.0);
        assert_eq!(q(2).quantize(100.0).unwrap(), 3.0);
        assert_eq!(q(2).quantize(-0.5).unwrap(), -1.0);
        assert_eq!(q(2).quantize(-100.0).unwrap(), -3.0);
        // saturation thresholds are symmetric: ±(R−2)·Δ/2 = ±2
        assert_eq!(q(2).quantize(2.0).unwrap(), 3.0);
        assert_eq!(q(2).quantize(-2.0).unwrap(), -1.0);
        assert_eq!(q(2).quantize(-2.000001).unwrap(), -3.0);
        assert_eq!(q(1).quantize(0.0).unwrap(), 1.0);
        assert_eq!(q(1).quantize(-1e-300).unwrap(), -1.0);
        assert!(q(2).quantize(f64::NAN).is_err());
        assert!(q(2).quantize(f64::INFINITY).is_err());
    }

    #[test]
    fn complex_examples() {
        let c = |re, im| Complex64::new(re, im);
        assert_eq!(q(2).quantize_complex(c(0.5, -0.5)).unwrap(), c(1.0, -1.0));
        assert_eq!(q(1).quantize_complex(c(-3.0, 7.0)).unwrap(), c(-1.0, 1.0));
        assert_eq!(q(2).quantize_complex(c(0.0, 0.0)).unwrap(), c(1.0, 1.0));
        assert!(q(2).quantize_complex(c(0.0, f64::NAN)).is_err());
    }

    #[test]
    fn sixteen_bit_extremes() {
        let spec = q(16);
        assert_eq!(spec.quantize(1e9).unwrap(), 65535.0);
        assert_eq!(spec.quantize(-1e9).unwrap(), -65535.0);
        assert_eq!(spec.quantize(0.3).unwrap(), 1.0);
    }

    fn off_boundary(s: f64) -> bool {
        (s / STEP - (s / STEP).round()).abs() > 1e-9
    }

    proptest! {
        #[test]
        fn odd_symmetry(bits in 1u32..=8, s in -300.0f64..300.0) {
            prop_assume!(off_boundary(s));
            let spec = q(bits);
            prop_assert_eq!(spec.quantize(-s).unwrap(), -spec.quantize(s).unwrap());
        }

        #[test]
        fn idempotent_on_levels(bits in 1u32..=10, frac in 0.0f64..1.0) {
            let spec = q(bits);
            let idx = ((spec.levels_count() - 1) as f64 * frac).round() as usize;
            let level = spec.level(idx);
            prop_assert_eq!(spec.quantize(level).unwrap(), level);
        }

        #[test]
        fn monotone(bits in 1u32..=8, a in -300.0f64..300.0, b in -300.0f64..300.0) {
            let spec = q(bits);
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(spec.quantize(lo).unwrap() <= spec.quantize(hi).unwrap());
        }

        #[test]
        fn output_is_a_level(bits in 1u32..=8, s in -1e6f64..1e6) {
            let spec = q(bits);
            let out = spec.quantize(s).unwrap();
            prop_assert!(spec.levels().contains(&out));
            prop_assert!(out.abs() <= spec.top_level());
        }

        #[test]
        fn complex_rotation(bits in 1u32..=6, re in -40.0f64..40.0, im in -40.0f64..40.0) {
            prop_assume!(off_boundary(re) && off_boundary(im));
            let spec = q(bits);
            let s = Complex64::new(re, im);
            let j = Complex64::i();
            prop_assert_eq!(
                spec.quantize_complex(j * s).unwrap(),
                j * spec.quantize_complex(s).unwrap()
            );
        }
    }
}
