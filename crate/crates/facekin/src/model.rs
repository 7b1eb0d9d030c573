//! Core domain types shared by every pipeline stage.
//!
//! All types here are plain immutable values: they can be cloned, shared and
//! sent across threads freely. Validation is data, not control flow —
//! [`validate_trajectory`] reports every violation it finds instead of
//! stopping at the first one.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Number of landmarks per frame in the iBUG 300-W annotation scheme.
pub const LANDMARK_COUNT: usize = 68;

/// Landmark index table (0-based, iBUG 300-W ordering).
///
/// Regions for reference: 0–16 jawline, 17–26 brows, 27–35 nose,
/// 36–47 eyes, 48–59 outer lip contour, 60–67 inner lip contour.
///
/// The four mouth landmarks used throughout this crate sit on the outer lip
/// contour (vermillion-cutaneous junction) and at the oral commissures.
/// "Left"/"right" mean image-left/image-right (camera frame), not the
/// subject's anatomical side.
pub mod landmarks {
    /// Top midline of the outer upper lip.
    pub const LIP_TOP: usize = 51;
    /// Bottom midline of the outer lower lip.
    pub const LIP_BOTTOM: usize = 57;
    /// Image-left oral commissure.
    pub const MOUTH_LEFT: usize = 48;
    /// Image-right oral commissure.
    pub const MOUTH_RIGHT: usize = 54;
}

/// One landmark position.
///
/// For `D2` trajectories the first two components are pixel coordinates
/// (u, v) and the third is fixed at zero. For `D3` trajectories the three
/// components are world coordinates in meters.
pub type LandmarkPoint = [f64; 3];

/// Participant group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Group {
    #[serde(rename = "HC")]
    Hc,
    #[serde(rename = "PD")]
    Pd,
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Group::Hc => "HC",
            Group::Pd => "PD",
        })
    }
}

impl std::str::FromStr for Group {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "HC" => Ok(Group::Hc),
            "PD" => Ok(Group::Pd),
            other => Err(format!("unknown group {other:?} (expected HC or PD)")),
        }
    }
}

/// Recording task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Task {
    /// Sentence repetition ("Buy Bobby a Puppy").
    #[serde(rename = "BBP")]
    Bbp,
    /// Rapid /pa/ syllable repetition on a single breath.
    #[serde(rename = "PA")]
    Pa,
    /// Repeated maximal smile.
    #[serde(rename = "BIGSMILE")]
    BigSmile,
    /// Neutral expression, mouth closed; source of normalization factors.
    #[serde(rename = "REST")]
    Rest,
}

impl Task {
    /// The three feature-bearing tasks, in report order.
    pub const FEATURE_TASKS: [Task; 3] = [Task::Bbp, Task::Pa, Task::BigSmile];
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::Bbp => "BBP",
            Task::Pa => "PA",
            Task::BigSmile => "BIGSMILE",
            Task::Rest => "REST",
        })
    }
}

impl std::str::FromStr for Task {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "BBP" => Ok(Task::Bbp),
            "PA" => Ok(Task::Pa),
            "BIGSMILE" => Ok(Task::BigSmile),
            "REST" => Ok(Task::Rest),
            other => Err(format!(
                "unknown task {other:?} (expected BBP, PA, BIGSMILE or REST)"
            )),
        }
    }
}

/// Whether landmark positions are pixel-space (2D) or world-space (3D).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Dimensionality {
    #[serde(rename = "2D")]
    D2,
    #[serde(rename = "3D")]
    D3,
}

impl fmt::Display for Dimensionality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dimensionality::D2 => "2D",
            Dimensionality::D3 => "3D",
        })
    }
}

impl std::str::FromStr for Dimensionality {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "2D" | "2d" | "D2" => Ok(Dimensionality::D2),
            "3D" | "3d" | "D3" => Ok(Dimensionality::D3),
            other => Err(format!(
                "unknown dimensionality {other:?} (expected 2D or 3D)"
            )),
        }
    }
}

/// One video frame's landmarks.
///
/// `depth` holds per-landmark depth readings in meters, aligned to `points`;
/// a reading of exactly 0 encodes "no depth return" (the sentinel commodity
/// depth cameras emit for no-return pixels). `validity` flags landmarks that
/// downstream stages may use; absent means all valid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandmarkFrame {
    /// Seconds from the start of the recording.
    pub timestamp: f64,
    pub points: Vec<LandmarkPoint>,
    pub depth: Option<Vec<f64>>,
    pub validity: Option<Vec<bool>>,
}

impl LandmarkFrame {
    /// Pixel-space frame from (u, v) pairs.
    pub fn from_pixels(timestamp: f64, pixels: &[[f64; 2]]) -> Self {
        LandmarkFrame {
            timestamp,
            points: pixels.iter().map(|p| [p[0], p[1], 0.0]).collect(),
            depth: None,
            validity: None,
        }
    }

    /// True unless the validity mask explicitly marks landmark `i` invalid.
    pub fn is_valid(&self, i: usize) -> bool {
        match &self.validity {
            Some(v) => v.get(i).copied().unwrap_or(false),
            None => i < self.points.len(),
        }
    }
}

/// Pinhole camera parameters for the color stream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraIntrinsics {
    /// Focal lengths in pixels.
    pub fx: f64,
    pub fy: f64,
    /// Principal point in pixels.
    pub cx: f64,
    pub cy: f64,
    /// Sensor resolution in pixels.
    pub width: u32,
    pub height: u32,
}

impl CameraIntrinsics {
    /// Checks positivity of the focal lengths and that the principal point
    /// lies inside the sensor.
    pub fn validate(&self) -> Result<(), String> {
        if !(self.fx > 0.0 && self.fx.is_finite()) {
            return Err(format!("fx must be positive, got {}", self.fx));
        }
        if !(self.fy > 0.0 && self.fy.is_finite()) {
            return Err(format!("fy must be positive, got {}", self.fy));
        }
        if !(self.cx > 0.0 && self.cx < f64::from(self.width)) {
            return Err(format!(
                "principal point cx={} outside sensor width {}",
                self.cx, self.width
            ));
        }
        if !(self.cy > 0.0 && self.cy < f64::from(self.height)) {
            return Err(format!(
                "principal point cy={} outside sensor height {}",
                self.cy, self.height
            ));
        }
        Ok(())
    }
}

/// An ordered sequence of landmark frames for one (subject, task) recording,
/// or a slice of one (a repetition, a rest window).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub subject_id: String,
    pub group: Group,
    pub task: Task,
    pub dimensionality: Dimensionality,
    pub frames: Vec<LandmarkFrame>,
    /// Nominal capture rate in frames per second (typically ~30).
    pub nominal_fps: f64,
}

impl Trajectory {
    /// Recording span in seconds (0 for fewer than two frames).
    pub fn duration(&self) -> f64 {
        match (self.frames.first(), self.frames.last()) {
            (Some(a), Some(b)) => b.timestamp - a.timestamp,
            _ => 0.0,
        }
    }
}

/// One manually annotated repetition window within a recording.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepetitionAnnotation {
    pub task: Task,
    /// 1-based index within the recording.
    pub repetition_index: u32,
    /// Window bounds in seconds, inclusive on both ends.
    pub start: f64,
    pub end: f64,
}

/// The 13 per-repetition kinematic features.
///
/// All values are dimensionless (amplitudes relative to the subject's rest
/// pose) or per-second powers thereof (velocities 1/s, accelerations 1/s²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    /// Range of the vertical mouth opening.
    pub delta_tb: f64,
    pub max_vel_tb: f64,
    pub min_vel_tb: f64,
    pub max_acc_tb: f64,
    pub min_acc_tb: f64,
    /// Range of the horizontal mouth opening.
    pub delta_wm: f64,
    pub max_vel_wm: f64,
    pub min_vel_wm: f64,
    pub max_acc_wm: f64,
    pub min_acc_wm: f64,
    pub mean_area: f64,
    pub delta_area: f64,
    /// Concordance between left and right mouth areas, in [-1, 1].
    pub ccc_area: f64,
}

/// Canonical feature order used by tables, reports and group statistics.
pub const FEATURE_NAMES: [&str; 13] = [
    "delta_tb",
    "max_vel_tb",
    "min_vel_tb",
    "max_acc_tb",
    "min_acc_tb",
    "delta_wm",
    "max_vel_wm",
    "min_vel_wm",
    "max_acc_wm",
    "min_acc_wm",
    "mean_area",
    "delta_area",
    "ccc_area",
];

impl FeatureVector {
    /// Values in [`FEATURE_NAMES`] order.
    pub fn as_array(&self) -> [f64; 13] {
        [
            self.delta_tb,
            self.max_vel_tb,
            self.min_vel_tb,
            self.max_acc_tb,
            self.min_acc_tb,
            self.delta_wm,
            self.max_vel_wm,
            self.min_vel_wm,
            self.max_acc_wm,
            self.min_acc_wm,
            self.mean_area,
            self.delta_area,
            self.ccc_area,
        ]
    }

    /// Inverse of [`as_array`](Self::as_array).
    pub fn from_array(v: [f64; 13]) -> Self {
        FeatureVector {
            delta_tb: v[0],
            max_vel_tb: v[1],
            min_vel_tb: v[2],
            max_acc_tb: v[3],
            min_acc_tb: v[4],
            delta_wm: v[5],
            max_vel_wm: v[6],
            min_vel_wm: v[7],
            max_acc_wm: v[8],
            min_acc_wm: v[9],
            mean_area: v[10],
            delta_area: v[11],
            ccc_area: v[12],
        }
    }
}

/// A single invariant violation found in a trajectory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Frame index the violation occurred at, when frame-specific.
    pub frame: Option<usize>,
    pub message: String,
}

impl Violation {
    fn at(frame: usize, message: impl Into<String>) -> Self {
        Violation {
            frame: Some(frame),
            message: message.into(),
        }
    }

    fn global(message: impl Into<String>) -> Self {
        Violation {
            frame: None,
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.frame {
            Some(i) => write!(f, "{} @{}", self.message, i),
            None => f.write_str(&self.message),
        }
    }
}

/// Checks every trajectory invariant and returns all violations found.
///
/// Pure and idempotent; an empty result means the trajectory is valid.
/// Pixel-bound checks need the sensor resolution and live in
/// [`validate_bounds`].
pub fn validate_trajectory(t: &Trajectory) -> Vec<Violation> {
    let mut out = Vec::new();

    if !(t.nominal_fps >= 10.0 && t.nominal_fps <= 120.0) {
        out.push(Violation::global(format!(
            "nominal_fps {} outside [10, 120]",
            t.nominal_fps
        )));
    }

    let mut prev_t = f64::NEG_INFINITY;
    for (i, frame) in t.frames.iter().enumerate() {
        if !frame.timestamp.is_finite() || frame.timestamp < 0.0 {
            out.push(Violation::at(
                i,
                format!("invalid timestamp {}", frame.timestamp),
            ));
        }
        if frame.timestamp <= prev_t {
            out.push(Violation::at(i, "non-monotonic timestamp"));
        }
        prev_t = frame.timestamp;

        if frame.points.len() != LANDMARK_COUNT {
            out.push(Violation::at(
                i,
                format!("landmark count {} ≠ {}", frame.points.len(), LANDMARK_COUNT),
            ));
        }
        for (j, p) in frame.points.iter().enumerate() {
            if !p.iter().all(|c| c.is_finite()) {
                out.push(Violation::at(
                    i,
                    format!("non-finite coordinates at landmark {j}"),
                ));
            }
        }

        match t.dimensionality {
            Dimensionality::D2 => {
                if frame.points.iter().any(|p| p[2] != 0.0) {
                    out.push(Violation::at(
                        i,
                        "2D frame carries a nonzero third coordinate",
                    ));
                }
                if let Some(depth) = &frame.depth {
                    if depth.len() != LANDMARK_COUNT {
                        out.push(Violation::at(
                            i,
                            format!("depth count {} ≠ {}", depth.len(), LANDMARK_COUNT),
                        ));
                    }
                    for (j, &z) in depth.iter().enumerate() {
                        if !z.is_finite() || z < 0.0 {
                            out.push(Violation::at(
                                i,
                                format!("invalid depth {z} at landmark {j}"),
                            ));
                        }
                    }
                }
            }
            Dimensionality::D3 => {
                if frame.depth.is_some() {
                    out.push(Violation::at(i, "3D frame carries a separate depth array"));
                }
                for (j, p) in frame.points.iter().enumerate() {
                    if frame.is_valid(j) && p[2] <= 0.0 {
                        out.push(Violation::at(
                            i,
                            format!("non-positive world depth {} at valid landmark {j}", p[2]),
                        ));
                    }
                }
            }
        }

        if let Some(v) = &frame.validity {
            if v.len() != LANDMARK_COUNT {
                out.push(Violation::at(
                    i,
                    format!("validity count {} ≠ {}", v.len(), LANDMARK_COUNT),
                ));
            }
        }
    }

    out
}

/// Pixel-bound checks for a 2D trajectory against a declared resolution:
/// 0 ≤ u < width and 0 ≤ v < height for every valid landmark.
pub fn validate_bounds(t: &Trajectory, width: u32, height: u32) -> Vec<Violation> {
    let mut out = Vec::new();
    if t.dimensionality != Dimensionality::D2 {
        return out;
    }
    let (w, h) = (f64::from(width), f64::from(height));
    for (i, frame) in t.frames.iter().enumerate() {
        for (j, p) in frame.points.iter().enumerate() {
            if !frame.is_valid(j) {
                continue;
            }
            if p[0] < 0.0 || p[0] >= w || p[1] < 0.0 || p[1] >= h {
                out.push(Violation::at(
                    i,
                    format!(
                        "landmark {j} at ({}, {}) outside {width}x{height}",
                        p[0], p[1]
                    ),
                ));
            }
        }
    }
    out
}
