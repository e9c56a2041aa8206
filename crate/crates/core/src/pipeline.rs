//! Class-specific processing chains.
//!
//! * spiral: low-pass, baseline edge processing, fisheye; the median and
//!   moving average over the projected curve's y coordinate are deferred to
//!   [`crate::projection::lift_y`]
//! * forward: low-pass, sigmoid gate, fisheye
//! * backward: landing/lifting reassignment, low-pass, sigmoid gate, fisheye
//!
//! The defaults are the tuned per-class parameter sets. The
//! fisheye slot can be switched to hysteresis for comparison runs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filters::{
    self, FisheyeMode, FisheyeParams, HysteresisParams, LowPassParams, SigmoidParams, WindowParams,
};
use crate::stroke::{CurveClass, PressureProfile};

/// Tolerance under which consecutive samples count as a plateau when
/// tracing increasing/decreasing runs.
pub const PLATEAU_TOLERANCE: f64 = 1e-6;

/// Pressure suppression stage at the end of every chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Suppressor {
    Fisheye(FisheyeParams),
    Hysteresis(HysteresisParams),
}

impl Suppressor {
    fn stage_name(&self) -> &'static str {
        match self {
            Suppressor::Fisheye(_) => "fisheye",
            Suppressor::Hysteresis(_) => "hysteresis",
        }
    }

    fn apply(&self, p: &PressureProfile) -> Result<PressureProfile> {
        match *self {
            Suppressor::Fisheye(f) => filters::fisheye(p, f),
            Suppressor::Hysteresis(h) => filters::hysteresis(p, h),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Suppressor::Fisheye(f) => f.validate(),
            Suppressor::Hysteresis(h) => h.validate(),
        }
    }
}

/// Settings for pulling the spiral's flat edges onto the median baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineParams {
    /// Half-width of the band around the baseline that ends an edge trace.
    pub tolerance: f64,
    /// Fraction of each edge value's offset from the baseline that is kept.
    pub pull_factor: f64,
    pub median: WindowParams,
    pub moving_average: WindowParams,
}

impl Default for BaselineParams {
    fn default() -> Self {
        Self {
            tolerance: 0.05,
            pull_factor: 0.1,
            median: WindowParams::DEFAULT_MEDIAN,
            moving_average: WindowParams::DEFAULT_MOVING_AVERAGE,
        }
    }
}

impl BaselineParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance >= 0.0 && (0.0..1.0).contains(&self.pull_factor)) {
            return Err(Error::param(format!(
                "baseline needs tolerance >= 0 and pull factor in [0, 1); got {self:?}"
            )));
        }
        self.median.validate()?;
        self.moving_average.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpiralChain {
    pub low_pass: LowPassParams,
    pub baseline: BaselineParams,
    pub suppressor: Suppressor,
    pub y_median: WindowParams,
    pub y_moving_average: WindowParams,
}

/// Chain shared by forward and backward strokes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateChain {
    pub reassign_landing_lifting: bool,
    pub low_pass: LowPassParams,
    pub sigmoid: SigmoidParams,
    pub suppressor: Suppressor,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub spiral: SpiralChain,
    pub forward: GateChain,
    pub backward: GateChain,
}

fn table_fisheye(levels: u32, scale: f64, displacement: f64) -> Suppressor {
    Suppressor::Fisheye(FisheyeParams {
        levels,
        outer_radius: 600.0,
        inner_radius: 120.0,
        scale,
        displacement,
        mode: FisheyeMode::Continuous,
    })
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            spiral: SpiralChain {
                low_pass: LowPassParams { alpha: 0.075 },
                baseline: BaselineParams::default(),
                suppressor: table_fisheye(12, 1.0 / 7.0, 0.65),
                y_median: WindowParams::DEFAULT_MEDIAN,
                y_moving_average: WindowParams::DEFAULT_MOVING_AVERAGE,
            },
            forward: GateChain {
                reassign_landing_lifting: false,
                low_pass: LowPassParams { alpha: 0.1 },
                sigmoid: SigmoidParams::new(2.5, 0.85),
                suppressor: table_fisheye(10, 1.0 / 6.0, 0.0),
            },
            backward: GateChain {
                reassign_landing_lifting: true,
                low_pass: LowPassParams { alpha: 0.1 },
                sigmoid: SigmoidParams::new(1.0, 0.3),
                suppressor: table_fisheye(10, 1.0 / 5.0, 0.0),
            },
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        let s = &self.spiral;
        s.low_pass.validate()?;
        s.baseline.validate()?;
        s.suppressor.validate()?;
        s.y_median.validate()?;
        s.y_moving_average.validate()?;
        for g in [&self.forward, &self.backward] {
            g.low_pass.validate()?;
            g.sigmoid.validate()?;
            g.suppressor.validate()?;
        }
        Ok(())
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Malformed {
            what: "pipeline config",
            reason: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// One recorded stage of a chain.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceStage {
    pub stage: &'static str,
    pub profile: PressureProfile,
    /// Stage runs later on the projected curve; `profile` repeats the
    /// pressure it will be applied alongside.
    pub deferred: bool,
}

/// Windows for the deferred y-coordinate smoothing of the spiral chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct YLift {
    pub median: WindowParams,
    pub moving_average: WindowParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProcessedProfile {
    pub values: PressureProfile,
    pub stage_trace: Vec<TraceStage>,
    /// Degenerate-input notes, e.g. a spiral without an interior peak.
    pub flags: Vec<String>,
    pub y_lift: Option<YLift>,
}

/// Result of pulling the spiral's edges onto the baseline, before smoothing.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgePull {
    pub values: PressureProfile,
    pub baseline: f64,
    /// Inner span `[left, right]` left untouched.
    pub left: usize,
    pub right: usize,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpiralOutcome {
    pub profile: PressureProfile,
    pub edges: EdgePull,
}

fn median_of(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Traces outward from `peak` over `indices` for the first sample within
/// `tol` of `baseline`; falls back to the closest approach (nearest to the
/// peak on ties) when the band is never entered.
fn trace_to_baseline(x: &[f64], indices: impl Iterator<Item = usize>, baseline: f64, tol: f64) -> usize {
    let mut closest: Option<(usize, f64)> = None;
    for i in indices {
        let dist = (x[i] - baseline).abs();
        if dist <= tol {
            return i;
        }
        if closest.is_none_or(|(_, d)| dist < d) {
            closest = Some((i, dist));
        }
    }
    closest.expect("non-empty scan").0
}

/// Baseline detection and contrast enhancement of the spiral's horizontal
/// edges. The baseline is the median pressure; from the global peak the
/// profile is traced outward on both sides until it reaches the baseline
/// band, and every sample beyond those points is pulled towards the baseline.
pub fn spiral_edge_pull(profile: &PressureProfile, params: &BaselineParams) -> Result<EdgePull> {
    params.validate()?;
    let x = profile.values();
    let n = x.len();
    if n < 5 {
        return Err(Error::param(format!("spiral processing needs at least 5 samples, got {n}")));
    }
    let baseline = median_of(x);
    let mut peak = 0;
    for (i, &v) in x.iter().enumerate() {
        if v > x[peak] {
            peak = i;
        }
    }
    if !(x[peak] > x[0] && x[peak] > x[n - 1]) {
        return Ok(EdgePull {
            values: profile.clone(),
            baseline,
            left: 0,
            right: n - 1,
            degenerate: true,
        });
    }
    let left = trace_to_baseline(x, (0..=peak).rev(), baseline, params.tolerance);
    let right = trace_to_baseline(x, peak..n, baseline, params.tolerance);
    let k = params.pull_factor;
    let values = x
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            if i < left || i > right {
                baseline + k * (v - baseline)
            } else {
                v
            }
        })
        .collect();
    Ok(EdgePull {
        values: PressureProfile::from_valid(values),
        baseline,
        left,
        right,
        degenerate: false,
    })
}

/// Edge pull followed by median spike removal and moving-average smoothing
/// over the whole profile.
pub fn spiral_baseline_process(profile: &PressureProfile, params: &BaselineParams) -> Result<SpiralOutcome> {
    let edges = spiral_edge_pull(profile, params)?;
    let despiked = filters::median_filter(&edges.values, params.median)?;
    let smoothed = filters::moving_average(&despiked, params.moving_average)?;
    Ok(SpiralOutcome {
        profile: smoothed,
        edges,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reassigned {
    pub profile: PressureProfile,
    /// Length of the constant prefix, including the start-drawing sample.
    pub prefix_len: usize,
    /// Length of the constant suffix, including the stop-drawing sample.
    pub suffix_len: usize,
    pub degenerate: bool,
}

/// Landing/lifting reassignment.
///
/// The strictly increasing run from the first sample is replaced by the
/// value where the increase stops (start-drawing pressure); the strictly
/// decreasing run into the last sample is replaced by the value where that
/// decrease began (stop-drawing pressure). Profiles that are monotone
/// end-to-end are returned unchanged and flagged.
pub fn reassign_landing_lifting(profile: &PressureProfile) -> Result<Reassigned> {
    let x = profile.values();
    let n = x.len();
    if n < 3 {
        return Err(Error::param(format!("reassignment needs at least 3 samples, got {n}")));
    }
    let mut start = 0;
    while start + 1 < n && x[start + 1] > x[start] + PLATEAU_TOLERANCE {
        start += 1;
    }
    let mut stop = n - 1;
    while stop > 0 && x[stop - 1] > x[stop] + PLATEAU_TOLERANCE {
        stop -= 1;
    }
    if start == n - 1 || stop == 0 {
        return Ok(Reassigned {
            profile: profile.clone(),
            prefix_len: 1,
            suffix_len: 1,
            degenerate: true,
        });
    }
    let mut out = x.to_vec();
    let (start_p, stop_p) = (x[start], x[stop]);
    out[..start].fill(start_p);
    out[stop + 1..].fill(stop_p);
    Ok(Reassigned {
        profile: PressureProfile::from_valid(out),
        prefix_len: start + 1,
        suffix_len: n - stop,
        degenerate: false,
    })
}

struct Tracer {
    trace: Vec<TraceStage>,
    flags: Vec<String>,
}

impl Tracer {
    fn record(&mut self, stage: &'static str, profile: &PressureProfile) {
        self.trace.push(TraceStage {
            stage,
            profile: profile.clone(),
            deferred: false,
        });
    }
}

/// Runs the chain configured for `class`, recording every intermediate.
pub fn process(profile: &PressureProfile, class: CurveClass, cfg: &PipelineConfig) -> Result<ProcessedProfile> {
    let mut t = Tracer {
        trace: Vec::new(),
        flags: Vec::new(),
    };
    let mut y_lift = None;
    let values = match class {
        CurveClass::Spiral => {
            let c = &cfg.spiral;
            let p = filters::low_pass(profile, c.low_pass).map_err(Error::in_stage("low_pass"))?;
            t.record("low_pass", &p);
            let spiral = spiral_baseline_process(&p, &c.baseline).map_err(Error::in_stage("spiral_baseline_process"))?;
            if spiral.edges.degenerate {
                t.flags.push("spiral_baseline_process: no interior peak, edges left unprocessed".into());
            }
            t.record("spiral_baseline_process", &spiral.profile);
            let stage = c.suppressor.stage_name();
            let p = c.suppressor.apply(&spiral.profile).map_err(Error::in_stage(stage))?;
            t.record(stage, &p);
            c.y_median.validate().map_err(Error::in_stage("median_y"))?;
            c.y_moving_average.validate().map_err(Error::in_stage("moving_average_y"))?;
            for stage in ["median_y", "moving_average_y"] {
                t.trace.push(TraceStage {
                    stage,
                    profile: p.clone(),
                    deferred: true,
                });
            }
            y_lift = Some(YLift {
                median: c.y_median,
                moving_average: c.y_moving_average,
            });
            p
        }
        CurveClass::Forward | CurveClass::Backward => {
            let c = if class == CurveClass::Forward { &cfg.forward } else { &cfg.backward };
            let mut p = profile.clone();
            if c.reassign_landing_lifting {
                let r = reassign_landing_lifting(&p).map_err(Error::in_stage("reassign_landing_lifting"))?;
                if r.degenerate {
                    t.flags.push("reassign_landing_lifting: monotone profile left unchanged".into());
                }
                p = r.profile;
                t.record("reassign_landing_lifting", &p);
            }
            p = filters::low_pass(&p, c.low_pass).map_err(Error::in_stage("low_pass"))?;
            t.record("low_pass", &p);
            p = filters::sigmoid_gate(&p, c.sigmoid).map_err(Error::in_stage("sigmoid_gate"))?;
            t.record("sigmoid_gate", &p);
            let stage = c.suppressor.stage_name();
            p = c.suppressor.apply(&p).map_err(Error::in_stage(stage))?;
            t.record(stage, &p);
            p
        }
    };
    Ok(ProcessedProfile {
        values,
        stage_trace: t.trace,
        flags: t.flags,
        y_lift,
    })
}
