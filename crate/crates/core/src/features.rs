//! Spectral preconditioning: profiles are resampled to a fixed transform
//! length, transformed with a radix-2 FFT, and the real parts of the lowest
//! bins become the classifier input.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stroke::{resample_values, PressureProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    /// Divide by the largest absolute component.
    Linf,
}

/// Feature extraction settings; persisted inside the model file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub fft_len: usize,
    pub n_features: usize,
    #[serde(rename = "norm")]
    pub normalization: Normalization,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            fft_len: 512,
            n_features: 50,
            normalization: Normalization::Linf,
        }
    }
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.fft_len.is_power_of_two() || self.fft_len < 2 {
            return Err(Error::param(format!(
                "fft_len must be a power of two >= 2, got {}",
                self.fft_len
            )));
        }
        if self.n_features == 0 || self.n_features > self.fft_len / 2 {
            return Err(Error::param(format!(
                "n_features must be in [1, fft_len/2], got {}",
                self.n_features
            )));
        }
        Ok(())
    }
}

/// Classifier input vector.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    pub fn new(components: Vec<f64>) -> Self {
        Self(components)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// In-place iterative radix-2 decimation-in-time FFT, forward direction
/// (`exp(-2 pi i k n / N)` kernel). `buf.len()` must be a power of two.
pub fn fft_in_place(buf: &mut [Complex64]) -> Result<()> {
    let n = buf.len();
    if n == 0 {
        return Err(Error::EmptyProfile);
    }
    if !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    let bits = n.trailing_zeros();
    if bits == 0 {
        return Ok(());
    }
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            buf.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let step = -2.0 * std::f64::consts::PI / len as f64;
        for start in (0..n).step_by(len) {
            for k in 0..half {
                // twiddles computed directly rather than by recurrence to keep error ~1 ulp
                let w = Complex64::from_polar(1.0, step * k as f64);
                let a = buf[start + k];
                let b = buf[start + k + half] * w;
                buf[start + k] = a + b;
                buf[start + k + half] = a - b;
            }
        }
        len <<= 1;
    }
    Ok(())
}

/// Real part of the DFT of a real signal, all `len` bins.
pub fn dft_real(signal: &[f64]) -> Result<Vec<f64>> {
    if signal.is_empty() {
        return Err(Error::EmptyProfile);
    }
    let mut buf: Vec<Complex64> = signal.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fft_in_place(&mut buf)?;
    Ok(buf.into_iter().map(|c| c.re).collect())
}

/// Resample to `fft_len`, transform, keep the first `n_features` real parts
/// and scale so the largest magnitude is 1.
pub fn extract_features(profile: &PressureProfile, cfg: &FeatureConfig) -> Result<FeatureVector> {
    cfg.validate()?;
    let resampled = resample_values(profile.values(), cfg.fft_len);
    let spectrum = dft_real(&resampled)?;
    let mut feats: Vec<f64> = spectrum[..cfg.n_features].to_vec();
    match cfg.normalization {
        Normalization::Linf => {
            let peak = feats.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if peak > 0.0 {
                for v in &mut feats {
                    *v /= peak;
                }
            }
        }
    }
    Ok(FeatureVector(feats))
}
