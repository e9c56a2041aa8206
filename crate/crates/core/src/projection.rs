//! Pressure-to-depth projection of a stroke into a 3D polyline.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filters::{self, WindowParams};
use crate::pipeline::ProcessedProfile;
use crate::stroke::RawStroke;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionParams {
    /// World units per unit of pressure.
    pub depth_scale: f64,
    /// When set, full pressure maps to the far plane instead of the camera.
    pub invert: bool,
}

impl Default for ProjectionParams {
    fn default() -> Self {
        Self {
            depth_scale: 100.0,
            invert: false,
        }
    }
}

impl ProjectionParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.depth_scale.is_finite() && self.depth_scale > 0.0) {
            return Err(Error::param(format!("depth_scale must be positive, got {}", self.depth_scale)));
        }
        Ok(())
    }

    pub fn depth(&self, p: f64) -> f64 {
        if self.invert {
            p * self.depth_scale
        } else {
            (1.0 - p) * self.depth_scale
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve3D {
    points: Vec<[f64; 3]>,
}

impl Curve3D {
    pub fn new(points: Vec<[f64; 3]>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::TooFewSamples(points.len()));
        }
        if let Some(i) = points.iter().position(|p| p.iter().any(|c| !c.is_finite())) {
            return Err(Error::InvalidSample {
                index: i,
                reason: "non-finite coordinate".into(),
            });
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    pub fn into_points(self) -> Vec<[f64; 3]> {
        self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Maps sample `i` to `(x_i, y_i, depth(p_i))`.
pub fn project_values(stroke: &RawStroke, pressure: &[f64], params: &ProjectionParams) -> Result<Curve3D> {
    params.validate()?;
    if pressure.len() != stroke.len() {
        return Err(Error::DimensionMismatch {
            expected: stroke.len(),
            actual: pressure.len(),
        });
    }
    let points = stroke
        .samples()
        .iter()
        .zip(pressure)
        .map(|(s, &p)| [s.x, s.y, params.depth(p)])
        .collect();
    Curve3D::new(points)
}

pub fn project(stroke: &RawStroke, processed: &ProcessedProfile, params: &ProjectionParams) -> Result<Curve3D> {
    project_values(stroke, processed.values.values(), params)
}

/// Median then moving average over the y coordinates; x and z are copied.
pub fn lift_y(curve: &Curve3D, median: WindowParams, moving_average: WindowParams) -> Result<Curve3D> {
    let ys: Vec<f64> = curve.points.iter().map(|p| p[1]).collect();
    median.validate()?;
    moving_average.validate()?;
    let ys = filters::median_values(&ys, median);
    let ys = filters::moving_average_values(&ys, moving_average);
    let points = curve
        .points
        .iter()
        .zip(ys)
        .map(|(p, y)| [p[0], y, p[2]])
        .collect();
    Ok(Curve3D { points })
}
