//! Seeded synthetic pressure profiles for the three curve classes, with
//! optional hand tremor and landing/lifting artifacts.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::stroke::{CurveClass, PressureProfile, RawStroke, StrokeSample};

pub const MIN_LENGTH: usize = 300;
pub const MAX_LENGTH: usize = 1400;

/// Probability that a drawn item gets a landing ramp (and, independently,
/// a lifting tail).
pub const ARTIFACT_PROBABILITY: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub class: CurveClass,
    /// Total number of samples, artifacts included.
    pub length: usize,
    pub base: f64,
    pub peak: f64,
    pub tremor_sd: f64,
    /// Bump sharpness exponent for forward/backward shapes.
    pub gamma: f64,
    /// Spiral only: the right edge sits at `base + edge_offset`.
    pub edge_offset: f64,
    pub landing: bool,
    pub lifting: bool,
    pub seed: u64,
}

impl GenSpec {
    /// Artifact-free, noise-free spec with mid-range levels.
    pub fn clean(class: CurveClass, length: usize, seed: u64) -> Self {
        Self {
            class,
            length,
            base: 0.25,
            peak: 0.8,
            tremor_sd: 0.0,
            gamma: 2.0,
            edge_offset: 0.0,
            landing: false,
            lifting: false,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let in_range = (MIN_LENGTH..=MAX_LENGTH).contains(&self.length)
            && (0.0..=1.0).contains(&self.base)
            && (0.0..=1.0).contains(&self.peak)
            && self.base < self.peak
            && (0.0..=1.0).contains(&(self.base + self.edge_offset))
            && self.tremor_sd >= 0.0
            && self.gamma > 0.0;
        if !in_range {
            return Err(Error::param(format!("invalid generator spec {self:?}")));
        }
        Ok(())
    }
}

fn shape(spec: &GenSpec, u: f64) -> f64 {
    let amp = spec.peak - spec.base;
    match spec.class {
        CurveClass::Forward => spec.base + amp * (PI * u).sin().abs().powf(spec.gamma),
        CurveClass::Backward => spec.peak - amp * (PI * u).sin().abs().powf(spec.gamma),
        CurveClass::Spiral => {
            let right = spec.base + spec.edge_offset;
            if u <= 0.25 {
                spec.base
            } else if u >= 0.75 {
                right
            } else {
                let w = 0.5 * (1.0 - (4.0 * PI * (u - 0.25)).cos());
                let edge = if u < 0.5 { spec.base } else { right };
                edge + (spec.peak - edge) * w
            }
        }
    }
}

/// Builds one profile. The body keeps the class shape plus tremor; the
/// landing ramp (2-5% of the length) and lifting tail (2-8%) take their
/// samples out of the body so the total equals `spec.length`.
pub fn generate(spec: &GenSpec) -> Result<PressureProfile> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.length;
    let ramp_len = if spec.landing {
        rng.random_range(n * 2 / 100..=n * 5 / 100)
    } else {
        0
    };
    let tail_len = if spec.lifting {
        rng.random_range(n * 2 / 100..=n * 8 / 100)
    } else {
        0
    };
    let body_len = n - ramp_len - tail_len;
    let noise = Normal::new(0.0, spec.tremor_sd).map_err(|e| Error::param(e.to_string()))?;
    let body: Vec<f64> = (0..body_len)
        .map(|i| {
            let u = i as f64 / (body_len - 1) as f64;
            let jitter = if spec.tremor_sd > 0.0 { noise.sample(&mut rng) } else { 0.0 };
            (shape(spec, u) + jitter).clamp(0.0, 1.0)
        })
        .collect();

    let mut out = Vec::with_capacity(n);
    if ramp_len > 0 {
        let lo: f64 = rng.random_range(0.0..0.05);
        let hi = body[0];
        out.extend((0..ramp_len).map(|j| lo + (hi - lo) * j as f64 / ramp_len as f64));
    }
    out.extend_from_slice(&body);
    if tail_len > 0 {
        let last = body[body_len - 1];
        let rate = 50f64.ln() / tail_len as f64;
        out.extend((0..tail_len).map(|j| last * (-rate * (j + 1) as f64).exp()));
    }
    Ok(PressureProfile::from_valid(out))
}

/// Number of items per class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub spiral: usize,
    pub forward: usize,
    pub backward: usize,
}

impl ClassCounts {
    pub const TRAINING: ClassCounts = ClassCounts {
        spiral: 49,
        forward: 65,
        backward: 67,
    };
    pub const TEST: ClassCounts = ClassCounts {
        spiral: 100,
        forward: 100,
        backward: 100,
    };

    pub fn get(&self, class: CurveClass) -> usize {
        match class {
            CurveClass::Spiral => self.spiral,
            CurveClass::Forward => self.forward,
            CurveClass::Backward => self.backward,
        }
    }

    pub fn total(&self) -> usize {
        self.spiral + self.forward + self.backward
    }
}

/// Draws a random spec for `class` from the generator's parameter ranges.
pub fn random_spec(class: CurveClass, rng: &mut impl Rng) -> GenSpec {
    GenSpec {
        class,
        length: rng.random_range(MIN_LENGTH..=MAX_LENGTH),
        base: rng.random_range(0.1..=0.4),
        peak: rng.random_range(0.6..=0.95),
        tremor_sd: rng.random_range(0.0..=0.05),
        gamma: rng.random_range(1.0..=4.0),
        edge_offset: 0.0,
        landing: rng.random_bool(ARTIFACT_PROBABILITY),
        lifting: rng.random_bool(ARTIFACT_PROBABILITY),
        seed: rng.random(),
    }
}

/// Labeled dataset grouped by class in spiral, forward, backward order.
pub fn generate_dataset(counts: ClassCounts, seed: u64) -> Result<LabeledDataset> {
    if CurveClass::ALL.iter().any(|&c| counts.get(c) == 0) {
        return Err(Error::param(format!("all class counts must be positive, got {counts:?}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut items = Vec::with_capacity(counts.total());
    for class in CurveClass::ALL {
        for _ in 0..counts.get(class) {
            let spec = random_spec(class, &mut rng);
            items.push((generate(&spec)?, class));
        }
    }
    LabeledDataset::new(items)
}

/// Screen trajectory for a generated profile: a left-to-right arc for
/// forward/backward strokes, a straight run with a loop in the middle half
/// for spirals. Samples are 8 ms apart.
pub fn synth_stroke(profile: &PressureProfile, class: CurveClass) -> RawStroke {
    let n = profile.len();
    let width = 600.0;
    let radius = 80.0;
    let samples = profile
        .values()
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let u = if n > 1 { i as f64 / (n - 1) as f64 } else { 0.0 };
            let (x, y) = match class {
                CurveClass::Spiral if (0.25..=0.75).contains(&u) => {
                    let w = 2.0 * PI * (u - 0.25) / 0.5;
                    (width * u - radius * w.sin(), radius * (1.0 - w.cos()))
                }
                CurveClass::Spiral => (width * u, 0.0),
                _ => (width * u, 40.0 * (PI * u).sin()),
            };
            StrokeSample { x, y, p, t: 8.0 * i as f64 }
        })
        .collect();
    RawStroke::new(samples).expect("synthetic samples are valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn argmax(v: &[f64]) -> usize {
        (0..v.len()).fold(0, |b, i| if v[i] > v[b] { i } else { b })
    }

    fn argmin(v: &[f64]) -> usize {
        (0..v.len()).fold(0, |b, i| if v[i] < v[b] { i } else { b })
    }

    fn in_middle_third(i: usize, n: usize) -> bool {
        3 * i >= n && 3 * i <= 2 * n
    }

    fn mean(v: &[f64]) -> f64 {
        v.iter().sum::<f64>() / v.len() as f64
    }

    #[test]
    fn clean_forward_shape() {
        let spec = GenSpec::clean(CurveClass::Forward, 500, 1);
        let p = generate(&spec).unwrap();
        let v = p.values();
        assert!(in_middle_third(argmax(v), v.len()));
        assert!((v[0] - spec.base).abs() < 1e-12);
        assert!((v[v.len() - 1] - spec.base).abs() < 1e-12);
    }

    #[test]
    fn clean_backward_shape() {
        let spec = GenSpec::clean(CurveClass::Backward, 777, 1);
        let v = generate(&spec).unwrap().into_values();
        assert!(in_middle_third(argmin(&v), v.len()));
        assert!((v[0] - spec.peak).abs() < 1e-12);
        assert!((v[v.len() - 1] - spec.peak).abs() < 1e-12);
    }

    #[test]
    fn clean_spiral_edges_sit_at_base() {
        let spec = GenSpec::clean(CurveClass::Spiral, 1000, 1);
        let v = generate(&spec).unwrap().into_values();
        assert!((mean(&v[..100]) - spec.base).abs() < 1e-9);
        assert!((mean(&v[900..]) - spec.base).abs() < 1e-9);
    }

    #[test]
    fn artifacts_keep_length_and_shape_ends() {
        let spec = GenSpec {
            landing: true,
            lifting: true,
            ..GenSpec::clean(CurveClass::Backward, 1000, 9)
        };
        let v = generate(&spec).unwrap().into_values();
        assert_eq!(v.len(), 1000);
        assert!(v[0] < 0.05 + 1e-12);
        assert!(v[0] < v[1]);
        assert!(*v.last().unwrap() <= spec.peak / 50.0 + 1e-12);
    }

    #[test]
    fn default_counts() {
        let ds = generate_dataset(ClassCounts::TRAINING, 42).unwrap();
        assert_eq!(ds.len(), 181);
        assert_eq!(ds.class_counts(), [49, 65, 67]);
    }

    #[test]
    fn datasets_are_seeded() {
        let a = generate_dataset(ClassCounts::TEST, 5).unwrap();
        let b = generate_dataset(ClassCounts::TEST, 5).unwrap();
        assert_eq!(a, b);
        let c = generate_dataset(ClassCounts::TEST, 6).unwrap();
        assert_ne!(a, c);
        assert!(generate_dataset(ClassCounts { spiral: 0, ..ClassCounts::TEST }, 1).is_err());
    }

    #[test]
    fn ranges_hold() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for i in 0..300 {
            let spec = random_spec(CurveClass::ALL[i % 3], &mut rng);
            let p = generate(&spec).unwrap();
            assert!((MIN_LENGTH..=MAX_LENGTH).contains(&p.len()));
            assert!(p.values().iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn strokes_carry_the_profile() {
        let p = generate(&GenSpec::clean(CurveClass::Spiral, 400, 2)).unwrap();
        let s = synth_stroke(&p, CurveClass::Spiral);
        assert_eq!(s.len(), 400);
        let back: Vec<f64> = s.samples().iter().map(|x| x.p).collect();
        assert_eq!(back, p.values());
    }

    #[test]
    fn invalid_specs_rejected() {
        let mut s = GenSpec::clean(CurveClass::Forward, 200, 0);
        assert!(generate(&s).is_err());
        s.length = 400;
        s.base = 0.9;
        assert!(generate(&s).is_err());
    }
}
