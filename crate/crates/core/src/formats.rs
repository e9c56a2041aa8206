//! Stroke and curve files.
//!
//! * stroke: `{"version":1,"samples":[{"x":..,"y":..,"p":..,"t":..},...]}`
//! * curve: `{"version":1,"points":[[x,y,z],...]}`
//!
//! Floats are written in shortest round-trip form, so reading a file written
//! by this module and writing it again yields the same bytes.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::projection::Curve3D;
use crate::stroke::{RawStroke, StrokeSample};

pub const STROKE_VERSION: u64 = 1;
pub const CURVE_VERSION: u64 = 1;

fn default_version() -> u64 {
    1
}

/// Wire form of a stroke; `version` defaults to 1 when absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrokeDocument {
    #[serde(default = "default_version")]
    pub version: u64,
    pub samples: Vec<StrokeSample>,
}

impl StrokeDocument {
    pub fn into_stroke(self) -> Result<RawStroke> {
        if self.version != STROKE_VERSION {
            return Err(Error::VersionMismatch {
                what: "stroke",
                found: self.version,
                expected: STROKE_VERSION,
            });
        }
        RawStroke::new(self.samples)
    }
}

#[derive(Serialize, Deserialize)]
struct CurveDocument {
    version: u64,
    points: Vec<[f64; 3]>,
}

pub fn stroke_from_json(text: &str) -> Result<RawStroke> {
    let doc: StrokeDocument = serde_json::from_str(text).map_err(|e| Error::Malformed {
        what: "stroke",
        reason: e.to_string(),
    })?;
    doc.into_stroke()
}

pub fn stroke_to_json(stroke: &RawStroke) -> String {
    let doc = StrokeDocument {
        version: STROKE_VERSION,
        samples: stroke.samples().to_vec(),
    };
    serde_json::to_string(&doc).expect("stroke serializes")
}

pub fn curve_from_json(text: &str) -> Result<Curve3D> {
    let doc: CurveDocument = serde_json::from_str(text).map_err(|e| Error::Malformed {
        what: "curve",
        reason: e.to_string(),
    })?;
    if doc.version != CURVE_VERSION {
        return Err(Error::VersionMismatch {
            what: "curve",
            found: doc.version,
            expected: CURVE_VERSION,
        });
    }
    Curve3D::new(doc.points)
}

pub fn curve_to_json(curve: &Curve3D) -> String {
    let doc = CurveDocument {
        version: CURVE_VERSION,
        points: curve.points().to_vec(),
    };
    serde_json::to_string(&doc).expect("curve serializes")
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Reads a stroke file; errors carry the file name.
pub fn load_stroke(path: &Path) -> Result<RawStroke> {
    stroke_from_json(&read(path)?).map_err(Error::in_file(path))
}

pub fn save_stroke(path: &Path, stroke: &RawStroke) -> Result<()> {
    write(path, &stroke_to_json(stroke))
}

pub fn load_curve(path: &Path) -> Result<Curve3D> {
    curve_from_json(&read(path)?).map_err(Error::in_file(path))
}

pub fn save_curve(path: &Path, curve: &Curve3D) -> Result<()> {
    write(path, &curve_to_json(curve))
}
