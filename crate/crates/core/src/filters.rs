//! Pressure filter kernels: low-pass, hysteresis, median, moving average,
//! fisheye and the contrast/threshold sigmoid gate.
//!
//! Every filter is length-preserving and maps a valid profile to a valid
//! profile.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stroke::PressureProfile;

/// First-order exponential smoothing coefficient, `0 < alpha <= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowPassParams {
    pub alpha: f64,
}

impl LowPassParams {
    pub fn validate(&self) -> Result<()> {
        if self.alpha > 0.0 && self.alpha <= 1.0 {
            Ok(())
        } else {
            Err(Error::param(format!("low-pass alpha must be in (0, 1], got {}", self.alpha)))
        }
    }
}

/// Dead-band half-width for the ratchet filter, `0 <= band < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HysteresisParams {
    pub band: f64,
}

impl Default for HysteresisParams {
    fn default() -> Self {
        Self { band: 0.05 }
    }
}

impl HysteresisParams {
    pub fn validate(&self) -> Result<()> {
        if (0.0..1.0).contains(&self.band) {
            Ok(())
        } else {
            Err(Error::param(format!("hysteresis band must be in [0, 1), got {}", self.band)))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FisheyeMode {
    Discrete,
    Continuous,
}

/// Fisheye transfer parameters.
///
/// `levels` only matters in discrete mode. The radii enter only through the
/// ratio `outer_radius / inner_radius`, which sets how quickly the local gain
/// falls from 1 at the focus to `scale` away from it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FisheyeParams {
    pub levels: u32,
    pub outer_radius: f64,
    pub inner_radius: f64,
    pub scale: f64,
    pub displacement: f64,
    pub mode: FisheyeMode,
}

impl FisheyeParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.inner_radius > 0.0 && self.outer_radius > self.inner_radius) {
            return Err(Error::param(format!(
                "fisheye radii need 0 < r < R, got r={} R={}",
                self.inner_radius, self.outer_radius
            )));
        }
        if !(self.scale > 0.0 && self.scale <= 1.0) {
            return Err(Error::param(format!("fisheye scale must be in (0, 1], got {}", self.scale)));
        }
        if !(0.0..=1.0).contains(&self.displacement) {
            return Err(Error::param(format!(
                "fisheye displacement must be in [0, 1], got {}",
                self.displacement
            )));
        }
        if self.levels < 1 || (self.mode == FisheyeMode::Discrete && self.levels < 2) {
            return Err(Error::param(format!("fisheye levels too small: {}", self.levels)));
        }
        Ok(())
    }

    /// Local gain at pressure `p`: 1 at the focus, decaying to `scale`.
    pub fn gain(&self, p: f64) -> f64 {
        let k = self.outer_radius / self.inner_radius;
        let z = k * (p - self.displacement);
        self.scale + (1.0 - self.scale) * (-z * z).exp()
    }

    /// Continuous transfer curve: the integral of [`gain`](Self::gain) from
    /// the focus. Strictly increasing, fixed at the focus and contracting
    /// towards it.
    pub fn transfer(&self, p: f64) -> f64 {
        let d = self.displacement;
        let k = self.outer_radius / self.inner_radius;
        let z = p - d;
        if z == 0.0 {
            return d;
        }
        let bell = 0.5 * std::f64::consts::PI.sqrt() * libm::erf(k * z) / k;
        let out = d + self.scale * z + (1.0 - self.scale) * bell;
        // the closed form is already inside [min(p,d), max(p,d)]; clamp guards rounding
        out.clamp(p.min(d), p.max(d)).clamp(0.0, 1.0)
    }
}

/// Contrast/threshold sigmoid gate parameters. `steepness` is the fixed base
/// gain that `contrast` multiplies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmoidParams {
    pub contrast: f64,
    pub threshold: f64,
    pub steepness: f64,
}

pub const DEFAULT_SIGMOID_STEEPNESS: f64 = 12.0;

impl SigmoidParams {
    pub fn new(contrast: f64, threshold: f64) -> Self {
        Self {
            contrast,
            threshold,
            steepness: DEFAULT_SIGMOID_STEEPNESS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.contrast > 0.0 && self.steepness > 0.0 && (0.0..=1.0).contains(&self.threshold)) {
            return Err(Error::param(format!(
                "sigmoid needs contrast > 0, steepness > 0, threshold in [0, 1]; got {self:?}"
            )));
        }
        Ok(())
    }

    pub fn apply(&self, p: f64) -> f64 {
        logistic(self.contrast * self.steepness * (p - self.threshold))
    }
}

/// Centered window width in samples (odd, at least 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowParams {
    pub width: usize,
}

impl WindowParams {
    pub const DEFAULT_MEDIAN: WindowParams = WindowParams { width: 5 };
    pub const DEFAULT_MOVING_AVERAGE: WindowParams = WindowParams { width: 9 };

    pub fn validate(&self) -> Result<()> {
        if self.width >= 1 && self.width % 2 == 1 {
            Ok(())
        } else {
            Err(Error::param(format!("window width must be odd and >= 1, got {}", self.width)))
        }
    }

    fn range(&self, i: usize, n: usize) -> std::ops::Range<usize> {
        let half = self.width / 2;
        i.saturating_sub(half)..(i + half + 1).min(n)
    }
}

pub(crate) fn logistic(u: f64) -> f64 {
    1.0 / (1.0 + (-u).exp())
}

pub fn low_pass(profile: &PressureProfile, params: LowPassParams) -> Result<PressureProfile> {
    params.validate()?;
    Ok(PressureProfile::from_valid(low_pass_values(profile.values(), params.alpha)))
}

pub(crate) fn low_pass_values(x: &[f64], alpha: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len());
    let mut y = x[0];
    out.push(y);
    for &v in &x[1..] {
        y = alpha * v + (1.0 - alpha) * y;
        out.push(y);
    }
    bound(out, x)
}

/// Ratchet (backlash) filter: the output holds until the input leaves the
/// dead band around it, then trails the input by `band`.
pub fn hysteresis(profile: &PressureProfile, params: HysteresisParams) -> Result<PressureProfile> {
    params.validate()?;
    let x = profile.values();
    let mut out = Vec::with_capacity(x.len());
    let mut y = x[0];
    out.push(y);
    for &v in &x[1..] {
        let delta = v - y;
        if delta.abs() > params.band {
            y = (v - params.band * delta.signum()).clamp(0.0, 1.0);
        }
        out.push(y);
    }
    Ok(PressureProfile::from_valid(out))
}

/// Centered running median; even-sized boundary windows take the mean of
/// the two middle values.
pub fn median_filter(profile: &PressureProfile, params: WindowParams) -> Result<PressureProfile> {
    params.validate()?;
    Ok(PressureProfile::from_valid(median_values(profile.values(), params)))
}

pub(crate) fn median_values(x: &[f64], params: WindowParams) -> Vec<f64> {
    let mut window = Vec::with_capacity(params.width);
    (0..x.len())
        .map(|i| {
            window.clear();
            window.extend_from_slice(&x[params.range(i, x.len())]);
            window.sort_by(f64::total_cmp);
            let m = window.len();
            if m % 2 == 1 {
                window[m / 2]
            } else {
                0.5 * (window[m / 2 - 1] + window[m / 2])
            }
        })
        .collect()
}

/// Centered running mean, window truncated at the boundaries.
pub fn moving_average(profile: &PressureProfile, params: WindowParams) -> Result<PressureProfile> {
    params.validate()?;
    Ok(PressureProfile::from_valid(moving_average_values(profile.values(), params)))
}

pub(crate) fn moving_average_values(x: &[f64], params: WindowParams) -> Vec<f64> {
    let out = (0..x.len())
        .map(|i| {
            let w = &x[params.range(i, x.len())];
            w.iter().sum::<f64>() / w.len() as f64
        })
        .collect();
    bound(out, x)
}

pub fn fisheye(profile: &PressureProfile, params: FisheyeParams) -> Result<PressureProfile> {
    params.validate()?;
    let out = profile
        .values()
        .iter()
        .map(|&p| {
            let h = params.transfer(p);
            match params.mode {
                FisheyeMode::Continuous => h,
                FisheyeMode::Discrete => quantize(h, params.levels),
            }
        })
        .collect();
    Ok(PressureProfile::from_valid(out))
}

/// Snaps `v` to the nearest of `k / (levels - 1)`, ties going to the lower level.
pub fn quantize(v: f64, levels: u32) -> f64 {
    let steps = f64::from(levels - 1);
    let k = (v * steps - 0.5).ceil().clamp(0.0, steps);
    k / steps
}

pub fn sigmoid_gate(profile: &PressureProfile, params: SigmoidParams) -> Result<PressureProfile> {
    params.validate()?;
    Ok(PressureProfile::from_valid(
        profile.values().iter().map(|&p| params.apply(p)).collect(),
    ))
}

/// Clamps rounding excursions back into the input's range.
fn bound(mut out: Vec<f64>, x: &[f64]) -> Vec<f64> {
    let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    for v in &mut out {
        *v = v.clamp(lo, hi);
    }
    out
}
