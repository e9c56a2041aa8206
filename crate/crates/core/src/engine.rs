//! End-to-end stroke handling: classify, run the class chain, project to 3D
//! and smooth.

use crate::error::Result;
use crate::mlp::{Classification, MlpModel};
use crate::pipeline::{self, PipelineConfig, ProcessedProfile};
use crate::projection::{self, Curve3D, ProjectionParams};
use crate::smoothing::{self, SmoothingSpec};
use crate::stroke::{extract_profile, CurveClass, PressureProfile, RawStroke};

/// Everything produced for one stroke.
#[derive(Debug, Clone, PartialEq)]
pub struct StrokeResult {
    pub class: CurveClass,
    pub raw: PressureProfile,
    pub processed: ProcessedProfile,
    /// Projected curve, with the deferred y smoothing applied for spirals.
    pub curve: Curve3D,
    pub smoothing: SmoothingSpec,
    pub smoothed: Curve3D,
}

/// Processing for a stroke whose class is already known.
pub fn run_chain(
    stroke: &RawStroke,
    class: CurveClass,
    pipeline_cfg: &PipelineConfig,
    projection: &ProjectionParams,
    smoothing_spec: Option<SmoothingSpec>,
) -> Result<StrokeResult> {
    let raw = extract_profile(stroke);
    let processed = pipeline::process(&raw, class, pipeline_cfg)?;
    let mut curve = projection::project(stroke, &processed, projection)?;
    if let Some(lift) = processed.y_lift {
        curve = projection::lift_y(&curve, lift.median, lift.moving_average)?;
    }
    let spec = smoothing_spec.unwrap_or_else(|| smoothing::default_method_for(class));
    let smoothed = smoothing::smooth(&curve, &spec)?;
    Ok(StrokeResult {
        class,
        raw,
        processed,
        curve,
        smoothing: spec,
        smoothed,
    })
}

/// Trained model plus processing settings; immutable once built.
#[derive(Debug, Clone)]
pub struct Engine {
    model: MlpModel,
    pipeline: PipelineConfig,
    projection: ProjectionParams,
}

impl Engine {
    pub fn new(model: MlpModel, pipeline: PipelineConfig, projection: ProjectionParams) -> Result<Self> {
        pipeline.validate()?;
        projection.validate()?;
        Ok(Self {
            model,
            pipeline,
            projection,
        })
    }

    pub fn model(&self) -> &MlpModel {
        &self.model
    }

    pub fn pipeline(&self) -> &PipelineConfig {
        &self.pipeline
    }

    pub fn projection(&self) -> &ProjectionParams {
        &self.projection
    }

    pub fn classify(&self, stroke: &RawStroke) -> Result<Classification> {
        self.model.classify(&extract_profile(stroke))
    }

    pub fn process(&self, stroke: &RawStroke, smoothing_spec: Option<SmoothingSpec>) -> Result<(Classification, StrokeResult)> {
        let classification = self.classify(stroke)?;
        let result = run_chain(stroke, classification.class, &self.pipeline, &self.projection, smoothing_spec)?;
        Ok((classification, result))
    }
}
