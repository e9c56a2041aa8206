//! Geometric smoothing of projected curves.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::projection::Curve3D;
use crate::stroke::CurveClass;

type Point = [f64; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SmoothingMethod {
    CatmullRom,
    /// Two rounds of Chaikin corner cutting.
    Chaikin4,
    /// Three rounds of Chaikin corner cutting.
    Chaikin8,
    #[serde(rename = "bspline")]
    BSpline,
    BezierQuadratic,
    BezierCubic,
    Hermite,
}

impl SmoothingMethod {
    pub const ALL: [SmoothingMethod; 7] = [
        SmoothingMethod::CatmullRom,
        SmoothingMethod::Chaikin4,
        SmoothingMethod::Chaikin8,
        SmoothingMethod::BSpline,
        SmoothingMethod::BezierQuadratic,
        SmoothingMethod::BezierCubic,
        SmoothingMethod::Hermite,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SmoothingMethod::CatmullRom => "catmull-rom",
            SmoothingMethod::Chaikin4 => "chaikin4",
            SmoothingMethod::Chaikin8 => "chaikin8",
            SmoothingMethod::BSpline => "bspline",
            SmoothingMethod::BezierQuadratic => "bezier-quadratic",
            SmoothingMethod::BezierCubic => "bezier-cubic",
            SmoothingMethod::Hermite => "hermite",
        }
    }

    /// Fewest control points the method accepts.
    pub fn min_points(self) -> usize {
        match self {
            SmoothingMethod::Chaikin4 | SmoothingMethod::Chaikin8 | SmoothingMethod::BezierQuadratic => 3,
            _ => 4,
        }
    }
}

impl fmt::Display for SmoothingMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SmoothingMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Self::ALL.iter().map(|m| m.as_str()).collect();
                Error::param(format!("unknown smoothing method `{s}`; expected one of {}", names.join(", ")))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmoothingSpec {
    pub method: SmoothingMethod,
    /// Evaluations per spline segment; ignored by Chaikin.
    pub samples_per_segment: usize,
}

pub const DEFAULT_SAMPLES_PER_SEGMENT: usize = 8;

impl SmoothingSpec {
    pub fn new(method: SmoothingMethod) -> Self {
        Self {
            method,
            samples_per_segment: DEFAULT_SAMPLES_PER_SEGMENT,
        }
    }
}

pub fn default_method_for(class: CurveClass) -> SmoothingSpec {
    SmoothingSpec::new(match class {
        CurveClass::Spiral => SmoothingMethod::BSpline,
        CurveClass::Forward | CurveClass::Backward => SmoothingMethod::CatmullRom,
    })
}

fn add(a: Point, b: Point) -> Point {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn scale(a: Point, s: f64) -> Point {
    [a[0] * s, a[1] * s, a[2] * s]
}

fn combo(terms: &[(f64, Point)]) -> Point {
    terms.iter().fold([0.0; 3], |acc, &(w, p)| add(acc, scale(p, w)))
}

/// Samples `segments` pieces at `t = k / samples` for `k < samples`, then
/// appends the end of the last piece.
fn sample_segments(segments: usize, samples: usize, eval: impl Fn(usize, f64) -> Point) -> Vec<Point> {
    let mut out = Vec::with_capacity(segments * samples + 1);
    for seg in 0..segments {
        for k in 0..samples {
            out.push(eval(seg, k as f64 / samples as f64));
        }
    }
    out.push(eval(segments - 1, 1.0));
    out
}

fn hermite(p0: Point, p1: Point, m0: Point, m1: Point, t: f64) -> Point {
    let t2 = t * t;
    let t3 = t2 * t;
    combo(&[
        (2.0 * t3 - 3.0 * t2 + 1.0, p0),
        (t3 - 2.0 * t2 + t, m0),
        (-2.0 * t3 + 3.0 * t2, p1),
        (t3 - t2, m1),
    ])
}

/// Central-difference tangents; the ends use the reflected neighbour, which
/// reduces to a one-sided difference.
fn tangents(pts: &[Point]) -> Vec<Point> {
    let n = pts.len();
    (0..n)
        .map(|i| {
            let prev = if i == 0 { add(scale(pts[0], 2.0), scale(pts[1], -1.0)) } else { pts[i - 1] };
            let next = if i == n - 1 {
                add(scale(pts[n - 1], 2.0), scale(pts[n - 2], -1.0))
            } else {
                pts[i + 1]
            };
            scale(add(next, scale(prev, -1.0)), 0.5)
        })
        .collect()
}

fn catmull_rom(pts: &[Point], samples: usize) -> Vec<Point> {
    let n = pts.len();
    let ext = |i: isize| -> Point {
        if i < 0 {
            add(scale(pts[0], 2.0), scale(pts[1], -1.0))
        } else if i as usize >= n {
            add(scale(pts[n - 1], 2.0), scale(pts[n - 2], -1.0))
        } else {
            pts[i as usize]
        }
    };
    sample_segments(n - 1, samples, |seg, t| {
        let i = seg as isize;
        let (p0, p1, p2, p3) = (ext(i - 1), ext(i), ext(i + 1), ext(i + 2));
        if t == 0.0 {
            return p1;
        }
        if t == 1.0 {
            return p2;
        }
        let t2 = t * t;
        let t3 = t2 * t;
        combo(&[
            (0.5 * (-t3 + 2.0 * t2 - t), p0),
            (0.5 * (3.0 * t3 - 5.0 * t2 + 2.0), p1),
            (0.5 * (-3.0 * t3 + 4.0 * t2 + t), p2),
            (0.5 * (t3 - t2), p3),
        ])
    })
}

fn hermite_spline(pts: &[Point], samples: usize) -> Vec<Point> {
    let m = tangents(pts);
    sample_segments(pts.len() - 1, samples, |seg, t| {
        hermite(pts[seg], pts[seg + 1], m[seg], m[seg + 1], t)
    })
}

/// One round of 1/4-3/4 corner cutting that keeps the two end points.
pub fn chaikin_round(pts: &[Point]) -> Vec<Point> {
    let n = pts.len();
    let mut out = Vec::with_capacity(2 * n);
    out.push(pts[0]);
    for w in pts.windows(2) {
        out.push(combo(&[(0.75, w[0]), (0.25, w[1])]));
        out.push(combo(&[(0.25, w[0]), (0.75, w[1])]));
    }
    out.push(pts[n - 1]);
    out
}

/// Uniform cubic B-spline with each end point tripled, so the curve starts
/// and ends on the end points.
fn bspline(pts: &[Point], samples: usize) -> Vec<Point> {
    let n = pts.len();
    let ctrl: Vec<Point> = std::iter::repeat_n(pts[0], 2)
        .chain(pts.iter().copied())
        .chain(std::iter::repeat_n(pts[n - 1], 2))
        .collect();
    let mut out = sample_segments(ctrl.len() - 3, samples, |seg, t| {
        let s = 1.0 - t;
        let t2 = t * t;
        let t3 = t2 * t;
        combo(&[
            (s * s * s / 6.0, ctrl[seg]),
            ((3.0 * t3 - 6.0 * t2 + 4.0) / 6.0, ctrl[seg + 1]),
            ((-3.0 * t3 + 3.0 * t2 + 3.0 * t + 1.0) / 6.0, ctrl[seg + 2]),
            (t3 / 6.0, ctrl[seg + 3]),
        ])
    });
    // pin the end samples exactly onto the end points
    let last = out.len() - 1;
    out[0] = pts[0];
    out[last] = pts[n - 1];
    out
}

fn de_casteljau(ctrl: &[Point], t: f64) -> Point {
    let mut work = ctrl.to_vec();
    for level in (1..work.len()).rev() {
        for i in 0..level {
            work[i] = combo(&[(1.0 - t, work[i]), (t, work[i + 1])]);
        }
    }
    work[0]
}

/// Piecewise Bezier of the given degree sharing end points between pieces;
/// a short remainder becomes a lower-degree piece.
fn bezier(pts: &[Point], degree: usize, samples: usize) -> Vec<Point> {
    let mut pieces = Vec::new();
    let mut start = 0;
    while start + 1 < pts.len() {
        let end = (start + degree).min(pts.len() - 1);
        pieces.push(&pts[start..=end]);
        start = end;
    }
    sample_segments(pieces.len(), samples, |seg, t| de_casteljau(pieces[seg], t))
}

pub fn smooth(curve: &Curve3D, spec: &SmoothingSpec) -> Result<Curve3D> {
    if spec.samples_per_segment == 0 {
        return Err(Error::param("samples_per_segment must be at least 1"));
    }
    let pts = curve.points();
    let min = spec.method.min_points();
    if pts.len() < min {
        return Err(Error::TooFewPoints {
            method: spec.method.as_str(),
            min,
            actual: pts.len(),
        });
    }
    let s = spec.samples_per_segment;
    let out = match spec.method {
        SmoothingMethod::CatmullRom => catmull_rom(pts, s),
        SmoothingMethod::Hermite => hermite_spline(pts, s),
        SmoothingMethod::Chaikin4 => chaikin_round(&chaikin_round(pts)),
        SmoothingMethod::Chaikin8 => chaikin_round(&chaikin_round(&chaikin_round(pts))),
        SmoothingMethod::BSpline => bspline(pts, s),
        SmoothingMethod::BezierQuadratic => bezier(pts, 2, s),
        SmoothingMethod::BezierCubic => bezier(pts, 3, s),
    };
    Curve3D::new(out)
}
