//! Pressure-driven 3D curve sketching.
//!
//! A pen stroke's pressure profile is classified as a spiral, forward or
//! backward curve by a small MLP over low-order Fourier coefficients, cleaned
//! up by a class-specific filter chain, mapped to depth and smoothed into a
//! 3D polyline.

pub mod dataset;
pub mod engine;
pub mod error;
pub mod features;
pub mod filters;
pub mod formats;
pub mod mlp;
pub mod pipeline;
pub mod projection;
pub mod smoothing;
pub mod stroke;
pub mod synth;

pub use dataset::LabeledDataset;
pub use engine::{run_chain, Engine, StrokeResult};
pub use error::{Error, Result};
pub use features::{extract_features, FeatureConfig, FeatureVector};
pub use mlp::{Classification, MlpModel, NetworkTopology, TrainingConfig};
pub use pipeline::{PipelineConfig, ProcessedProfile};
pub use projection::{Curve3D, ProjectionParams};
pub use smoothing::{SmoothingMethod, SmoothingSpec};
pub use stroke::{CurveClass, PressureProfile, RawStroke, StrokeSample};
