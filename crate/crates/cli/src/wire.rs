//! JSON shapes shared by the service responses and the CLI's trace dumps.

use depthstroke_core::mlp::Classification;
use depthstroke_core::{CurveClass, StrokeResult};
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct TraceEntry<'a> {
    pub stage: &'a str,
    pub profile: &'a [f64],
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub deferred: bool,
}

pub fn trace_entries(result: &StrokeResult) -> Vec<TraceEntry<'_>> {
    result
        .processed
        .stage_trace
        .iter()
        .map(|s| TraceEntry {
            stage: s.stage,
            profile: s.profile.values(),
            deferred: s.deferred,
        })
        .collect()
}

#[derive(Debug, Serialize)]
pub struct ClassifyResponse {
    pub class: CurveClass,
    pub scores: [f64; 3],
}

impl From<&Classification> for ClassifyResponse {
    fn from(c: &Classification) -> Self {
        Self {
            class: c.class,
            scores: c.scores,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ProcessResponse<'a> {
    pub class: CurveClass,
    /// Classifier scores in spiral, forward, backward order; absent when the
    /// class was given rather than predicted.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scores: Option<[f64; 3]>,
    pub smoothing: &'static str,
    pub profile_raw: &'a [f64],
    pub profile_processed: &'a [f64],
    pub curve3d: &'a [[f64; 3]],
    pub smoothed: &'a [[f64; 3]],
    pub flags: &'a [String],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TraceEntry<'a>>>,
}

impl<'a> ProcessResponse<'a> {
    pub fn new(scores: Option<[f64; 3]>, result: &'a StrokeResult, with_trace: bool) -> Self {
        Self {
            class: result.class,
            scores,
            smoothing: result.smoothing.method.as_str(),
            profile_raw: result.raw.values(),
            profile_processed: result.processed.values.values(),
            curve3d: result.curve.points(),
            smoothed: result.smoothed.points(),
            flags: &result.processed.flags,
            trace: with_trace.then(|| trace_entries(result)),
        }
    }
}
