//! Stroke records, pressure profiles and curve classes.
//!
//! A [`RawStroke`] is the engine's input: timed screen samples carrying a
//! normalized pen pressure. Every downstream stage works on the pressure
//! channel alone, extracted as a [`PressureProfile`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One pen sample: screen position in pixels, pressure in `[0, 1]`,
/// timestamp in milliseconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrokeSample {
    pub x: f64,
    pub y: f64,
    pub p: f64,
    pub t: f64,
}

/// A validated stroke: at least two samples, finite coordinates, pressure in
/// `[0, 1]` and non-decreasing timestamps.
#[derive(Debug, Clone, PartialEq)]
pub struct RawStroke {
    samples: Vec<StrokeSample>,
}

impl RawStroke {
    /// Validates `samples`. Out-of-range pressure is clamped into `[0, 1]`;
    /// NaN or infinite fields are rejected.
    pub fn new(mut samples: Vec<StrokeSample>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyStroke);
        }
        if samples.len() < 2 {
            return Err(Error::TooFewSamples(samples.len()));
        }
        let mut prev_t = f64::NEG_INFINITY;
        for (index, s) in samples.iter_mut().enumerate() {
            let bad = |reason: &str| Error::InvalidSample {
                index,
                reason: reason.to_string(),
            };
            if !s.x.is_finite() || !s.y.is_finite() {
                return Err(bad("non-finite coordinate"));
            }
            if !s.p.is_finite() {
                return Err(bad("non-finite pressure"));
            }
            if !s.t.is_finite() || s.t < 0.0 {
                return Err(bad("timestamp must be finite and non-negative"));
            }
            if s.t < prev_t {
                return Err(bad("timestamps must be non-decreasing"));
            }
            prev_t = s.t;
            s.p = s.p.clamp(0.0, 1.0);
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[StrokeSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Ordered sequence of normalized pressure values, non-empty, each in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PressureProfile(Vec<f64>);

impl PressureProfile {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyProfile);
        }
        if let Some((index, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(Error::PressureOutOfRange { index, value });
        }
        Ok(Self(values))
    }

    /// Builds a profile from arbitrary finite values by clamping into `[0, 1]`.
    pub fn from_clamped(values: Vec<f64>) -> Result<Self> {
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::PressureOutOfRange { index, value });
        }
        Self::new(values.into_iter().map(|v| v.clamp(0.0, 1.0)).collect())
    }

    /// Wraps values already known to be valid. Used by filters whose output is
    /// in range by construction.
    pub(crate) fn from_valid(values: Vec<f64>) -> Self {
        debug_assert!(!values.is_empty());
        debug_assert!(values.iter().all(|v| (0.0..=1.0).contains(v)));
        Self(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// The three stroke families the classifier distinguishes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveClass {
    Spiral,
    Forward,
    Backward,
}

impl CurveClass {
    /// Tie-break order for decoding is this order.
    pub const ALL: [CurveClass; 3] = [CurveClass::Spiral, CurveClass::Forward, CurveClass::Backward];

    pub fn index(self) -> usize {
        match self {
            CurveClass::Spiral => 0,
            CurveClass::Forward => 1,
            CurveClass::Backward => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    /// Target code: spiral 100, forward 010, backward 001.
    pub fn one_hot(self) -> [f64; 3] {
        let mut code = [0.0; 3];
        code[self.index()] = 1.0;
        code
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CurveClass::Spiral => "spiral",
            CurveClass::Forward => "forward",
            CurveClass::Backward => "backward",
        }
    }
}

impl fmt::Display for CurveClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CurveClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spiral" => Ok(CurveClass::Spiral),
            "forward" => Ok(CurveClass::Forward),
            "backward" => Ok(CurveClass::Backward),
            other => Err(Error::param(format!("unknown curve class `{other}`"))),
        }
    }
}

/// Projects a stroke onto its pressure channel.
pub fn extract_profile(stroke: &RawStroke) -> PressureProfile {
    PressureProfile::from_valid(stroke.samples().iter().map(|s| s.p).collect())
}

/// Linear resampling to `n` points over uniformly spaced normalized indices.
///
/// Endpoints are copied exactly and resampling a length-`n` profile to `n`
/// is the identity.
pub fn resample_profile(profile: &PressureProfile, n: usize) -> Result<PressureProfile> {
    if n < 2 {
        return Err(Error::param(format!("resample length must be >= 2, got {n}")));
    }
    Ok(PressureProfile::from_valid(resample_values(profile.values(), n)))
}

pub(crate) fn resample_values(x: &[f64], n: usize) -> Vec<f64> {
    let m = x.len();
    if m == 1 {
        return vec![x[0]; n];
    }
    let span = (m - 1) as u128;
    let denom = (n - 1) as u128;
    (0..n)
        .map(|i| {
            // position i*(m-1)/(n-1), split into integer and fractional parts
            // without rounding the integer part
            let num = i as u128 * span;
            let k = (num / denom) as usize;
            let rem = num % denom;
            if rem == 0 {
                return x[k];
            }
            let f = rem as f64 / denom as f64;
            let (a, b) = (x[k], x[k + 1]);
            (a + (b - a) * f).clamp(a.min(b), a.max(b))
        })
        .collect()
}

/// Affine rescale onto `[0, 1]`; a constant profile maps to all zeros.
pub fn normalize_minmax(profile: &PressureProfile) -> PressureProfile {
    let (lo, hi) = (profile.min(), profile.max());
    let values = if hi > lo {
        profile
            .values()
            .iter()
            .map(|v| ((v - lo) / (hi - lo)).clamp(0.0, 1.0))
            .collect()
    } else {
        vec![0.0; profile.len()]
    };
    PressureProfile::from_valid(values)
}
