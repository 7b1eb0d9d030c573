//! Synthetic landmark trajectories and whole cohorts with analytically known
//! properties — the independent oracle for feature extraction and the
//! end-to-end effect-size pipeline.
//!
//! Mouth motion is sinusoidal because every one of the 13 features then has
//! a closed form. With the four measurement landmarks placed as a diamond
//! around the mouth center,
//!
//! * `TB(t) = TB₀·(1 + a·sin(ωt))`,
//! * the left/right commissure offsets oscillate with amplitudes `r·b` and
//!   `b` (`r` = asymmetry), so `WM(t) = WM₀·(1 + β·sin(ωt))` with
//!   `β = b·(1+r)/2`,
//! * normalized areas become `(1 + a·s)(1 + r·b·s)` and
//!   `(1 + a·s)(1 + b·s)` for `s = sin(ωt)`,
//!
//! and ranges, derivative extrema, mean area and the area concordance all
//! follow analytically (see [`GroundTruth`]). Asymmetry acts on the motion
//! amplitude rather than the static geometry: per-side REST normalization
//! divides out any constant left/right ratio, so only a dynamic imbalance
//! can push the concordance below 1.
//!
//! Seeded Gaussian pixel jitter models landmark-localization noise. All
//! generation is bit-for-bit deterministic for a fixed seed.

use crate::io::{self, CohortManifest, ManifestEntry};
use crate::model::{
    landmarks, CameraIntrinsics, Dimensionality, Group, LandmarkFrame, RepetitionAnnotation, Task,
    Trajectory, LANDMARK_COUNT,
};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid archetype: {0}")]
    InvalidArchetype(String),
    #[error("invalid cohort parameters: {0}")]
    InvalidParams(String),
    #[error("duration {duration} s at {fps} fps yields fewer than 5 samples")]
    TooShort { duration: f64, fps: f64 },
    #[error("failed writing {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Parameters of one synthetic mover.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotionArchetype {
    /// Vertical-opening oscillation amplitude as a fraction of the rest
    /// opening; must stay below 1 so the opening remains positive.
    pub tb_amplitude: f64,
    /// Horizontal-opening oscillation amplitude (right commissure).
    pub wm_amplitude: f64,
    /// Oscillation rate in Hz.
    pub rate: f64,
    /// Left/right motion-amplitude ratio in (0, 1]; 1 is symmetric.
    pub asymmetry: f64,
    /// Standard deviation of per-landmark Gaussian pixel jitter.
    pub jitter_sd: f64,
    pub seed: u64,
}

impl Default for MotionArchetype {
    fn default() -> Self {
        MotionArchetype {
            tb_amplitude: 0.45,
            wm_amplitude: 0.35,
            rate: 1.0,
            asymmetry: 0.85,
            jitter_sd: 0.5,
            seed: 0,
        }
    }
}

impl MotionArchetype {
    pub fn validate(&self) -> Result<(), SynthError> {
        let err = |m: String| Err(SynthError::InvalidArchetype(m));
        if !(0.0..1.0).contains(&self.tb_amplitude) {
            return err(format!("tb_amplitude {} outside [0, 1)", self.tb_amplitude));
        }
        if !(0.0..1.0).contains(&self.wm_amplitude) {
            return err(format!("wm_amplitude {} outside [0, 1)", self.wm_amplitude));
        }
        if !(self.rate > 0.0 && self.rate <= 5.0) {
            return err(format!("rate {} outside (0, 5] Hz", self.rate));
        }
        if !(self.asymmetry > 0.0 && self.asymmetry <= 1.0) {
            return err(format!("asymmetry {} outside (0, 1]", self.asymmetry));
        }
        if !(self.jitter_sd >= 0.0 && self.jitter_sd.is_finite()) {
            return err(format!(
                "jitter_sd {} must be finite and >= 0",
                self.jitter_sd
            ));
        }
        Ok(())
    }

    fn scaled_amplitudes(&self, factor: f64) -> MotionArchetype {
        MotionArchetype {
            tb_amplitude: (self.tb_amplitude * factor).min(0.9),
            wm_amplitude: (self.wm_amplitude * factor).min(0.9),
            ..*self
        }
    }
}

/// Closed-form expected values of the 13 features for a jitter-free,
/// full-period extraction of one archetype (normalized units).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundTruth {
    pub delta_tb: f64,
    pub max_vel_tb: f64,
    pub min_vel_tb: f64,
    pub max_acc_tb: f64,
    pub min_acc_tb: f64,
    pub delta_wm: f64,
    pub max_vel_wm: f64,
    pub min_vel_wm: f64,
    pub max_acc_wm: f64,
    pub min_acc_wm: f64,
    pub mean_area: f64,
    pub delta_area: f64,
    /// `None` when both areas are constant (no motion at all).
    pub ccc_area: Option<f64>,
}

impl GroundTruth {
    fn for_archetype(a: &MotionArchetype, animated: bool) -> GroundTruth {
        if !animated {
            return GroundTruth::static_face();
        }
        let amp_tb = a.tb_amplitude;
        let b_left = a.asymmetry * a.wm_amplitude;
        let b_right = a.wm_amplitude;
        let beta = (b_left + b_right) / 2.0;
        let omega = 2.0 * PI * a.rate;

        // Moments of x = (1 + a·s)(1 + b·s) over full periods of s = sin:
        // E[s] = E[s³] = 0, E[s²] = 1/2, E[s⁴] = 3/8.
        let cov =
            (amp_tb + b_left) * (amp_tb + b_right) / 2.0 + amp_tb * amp_tb * b_left * b_right / 8.0;
        let var_l = (amp_tb + b_left).powi(2) / 2.0 + (amp_tb * b_left).powi(2) / 8.0;
        let var_r = (amp_tb + b_right).powi(2) / 2.0 + (amp_tb * b_right).powi(2) / 8.0;
        let dmean = amp_tb * (b_left - b_right) / 2.0;
        let ccc_area = if var_l + var_r > 0.0 {
            Some(2.0 * cov / (var_l + var_r + dmean * dmean))
        } else {
            None
        };

        GroundTruth {
            delta_tb: 2.0 * amp_tb,
            max_vel_tb: amp_tb * omega,
            min_vel_tb: -amp_tb * omega,
            max_acc_tb: amp_tb * omega * omega,
            min_acc_tb: -amp_tb * omega * omega,
            delta_wm: 2.0 * beta,
            max_vel_wm: beta * omega,
            min_vel_wm: -beta * omega,
            max_acc_wm: beta * omega * omega,
            min_acc_wm: -beta * omega * omega,
            mean_area: 1.0 + amp_tb * beta / 2.0,
            delta_area: 2.0 * (amp_tb + beta),
            ccc_area,
        }
    }

    fn static_face() -> GroundTruth {
        GroundTruth {
            delta_tb: 0.0,
            max_vel_tb: 0.0,
            min_vel_tb: 0.0,
            max_acc_tb: 0.0,
            min_acc_tb: 0.0,
            delta_wm: 0.0,
            max_vel_wm: 0.0,
            min_vel_wm: 0.0,
            max_acc_wm: 0.0,
            min_acc_wm: 0.0,
            mean_area: 1.0,
            delta_area: 0.0,
            ccc_area: None,
        }
    }
}

/// Per-subject face placement; the canonical default sits centered in a VGA
/// frame.
#[derive(Debug, Clone, Copy, PartialEq)]
struct FaceGeometry {
    center: (f64, f64),
    /// Face half-width in pixels.
    scale: f64,
    /// Face-to-camera distance in meters (used when depth is emitted).
    depth_m: f64,
    /// Oscillation phase offset in radians.
    phase: f64,
}

impl Default for FaceGeometry {
    fn default() -> Self {
        FaceGeometry {
            center: (320.0, 220.0),
            scale: 90.0,
            depth_m: 0.40,
            phase: 0.0,
        }
    }
}

/// Neutral 68-landmark template plus the mouth animation.
///
/// Returns the landmark positions at oscillation value `s є [-1, 1]` for the
/// vertical opening and `(s_l, s_r)` for the commissure offsets.
fn face_at(geom: &FaceGeometry, a: &MotionArchetype, s: f64) -> Vec<[f64; 2]> {
    let (cx, cy) = geom.center;
    let sc = geom.scale;
    let mut pts = vec![[0.0_f64, 0.0_f64]; LANDMARK_COUNT];

    // jawline
    for (k, p) in pts.iter_mut().take(17).enumerate() {
        let phi = PI * (k as f64) / 16.0;
        *p = [cx - sc * phi.cos(), cy + 1.05 * sc * phi.sin()];
    }
    // brows
    for k in 0..5 {
        let arch = 0.06 * sc * (PI * k as f64 / 4.0).sin();
        pts[17 + k] = [cx - 0.70 * sc + 0.11 * sc * k as f64, cy - 0.50 * sc - arch];
        pts[22 + k] = [cx + 0.26 * sc + 0.11 * sc * k as f64, cy - 0.50 * sc - arch];
    }
    // nose bridge and base
    for k in 0..4 {
        pts[27 + k] = [cx, cy - 0.40 * sc + 0.14 * sc * k as f64];
    }
    for k in 0..5 {
        pts[31 + k] = [cx + 0.07 * sc * (k as f64 - 2.0), cy + 0.12 * sc];
    }
    // eyes (hexagons)
    for k in 0..6 {
        let ang = PI * (k as f64) / 3.0;
        let (dx, dy) = (0.12 * sc * ang.cos(), 0.06 * sc * ang.sin());
        pts[36 + k] = [cx - 0.40 * sc + dx, cy - 0.30 * sc + dy];
        pts[42 + k] = [cx + 0.40 * sc + dx, cy - 0.30 * sc + dy];
    }

    // mouth: diamond of the four measurement landmarks plus interpolated
    // lip contours
    let (mcx, mcy) = (cx, cy + 0.55 * sc);
    let tb0 = 0.22 * sc;
    let half_wm0 = 0.275 * sc;
    let tb = tb0 * (1.0 + a.tb_amplitude * s);
    let d_left = half_wm0 * (1.0 + a.asymmetry * a.wm_amplitude * s);
    let d_right = half_wm0 * (1.0 + a.wm_amplitude * s);

    for k in 0..12 {
        let theta = PI + PI * (k as f64) / 6.0;
        let d = if theta.cos() < -1e-12 {
            d_left
        } else {
            d_right
        };
        pts[48 + k] = [mcx + d * theta.cos(), mcy + (tb / 2.0) * theta.sin()];
    }
    for k in 0..8 {
        let theta = PI + PI * (k as f64) / 4.0;
        let d = if theta.cos() < -1e-12 {
            d_left
        } else {
            d_right
        };
        pts[60 + k] = [mcx + 0.6 * d * theta.cos(), mcy + 0.3 * tb * theta.sin()];
    }

    // pin the measurement landmarks to their exact analytic positions
    pts[landmarks::MOUTH_LEFT] = [mcx - d_left, mcy];
    pts[landmarks::MOUTH_RIGHT] = [mcx + d_right, mcy];
    pts[landmarks::LIP_TOP] = [mcx, mcy - tb / 2.0];
    pts[landmarks::LIP_BOTTOM] = [mcx, mcy + tb / 2.0];
    pts
}

/// How the mouth moves over a generated recording.
#[derive(Clone, Copy)]
enum Motion<'a> {
    /// Neutral face throughout (REST).
    Static,
    /// One continuous oscillation from phase 0 at t = 0.
    Continuous,
    /// Oscillation inside each window, neutral in between.
    Windows(&'a [(f64, f64)]),
}

fn gen_frames(
    a: &MotionArchetype,
    geom: &FaceGeometry,
    duration: f64,
    fps: f64,
    motion: Motion<'_>,
    with_depth: bool,
    rng: &mut ChaCha8Rng,
) -> Vec<LandmarkFrame> {
    let omega = 2.0 * PI * a.rate;
    let n = (duration * fps).round() as usize + 1;
    let jitter = if a.jitter_sd > 0.0 {
        Some(Normal::new(0.0, a.jitter_sd).expect("finite jitter sd"))
    } else {
        None
    };

    (0..n)
        .map(|i| {
            let t = i as f64 / fps;
            let s = match motion {
                Motion::Static => 0.0,
                Motion::Continuous => (omega * t + geom.phase).sin(),
                Motion::Windows(windows) => windows
                    .iter()
                    .find(|(start, end)| t >= *start && t <= *end)
                    .map(|(start, _)| (omega * (t - start) + geom.phase).sin())
                    .unwrap_or(0.0),
            };
            let mut pixels = face_at(geom, a, s);
            if let Some(dist) = &jitter {
                for p in &mut pixels {
                    p[0] += dist.sample(rng);
                    p[1] += dist.sample(rng);
                }
            }
            let mut frame = LandmarkFrame::from_pixels(t, &pixels);
            if with_depth {
                frame.depth = Some(vec![geom.depth_m; LANDMARK_COUNT]);
            }
            frame
        })
        .collect()
}

/// Generates one synthetic recording together with its analytic ground
/// truth.
///
/// The mouth oscillates from phase 0 at t = 0 (REST recordings stay static
/// regardless of the amplitudes). When `intrinsics` is given, every frame
/// carries a consistent per-landmark depth so 3D reconstruction can run on
/// the output; the face sits on a fronto-parallel plane, so normalized 3D
/// features share the 2D ground truth.
pub fn gen_trajectory(
    a: &MotionArchetype,
    task: Task,
    duration: f64,
    fps: f64,
    intrinsics: Option<&CameraIntrinsics>,
) -> Result<(Trajectory, GroundTruth), SynthError> {
    a.validate()?;
    if !(10.0..=120.0).contains(&fps) {
        return Err(SynthError::InvalidParams(format!(
            "fps {fps} outside [10, 120]"
        )));
    }
    if duration.is_nan() || duration <= 0.0 || duration * fps < 5.0 {
        return Err(SynthError::TooShort { duration, fps });
    }
    let animated = task != Task::Rest;
    let motion = if animated {
        Motion::Continuous
    } else {
        Motion::Static
    };
    let geom = FaceGeometry::default();
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let frames = gen_frames(
        a,
        &geom,
        duration,
        fps,
        motion,
        intrinsics.is_some(),
        &mut rng,
    );
    let trajectory = Trajectory {
        subject_id: "synthetic".into(),
        group: Group::Hc,
        task,
        dimensionality: Dimensionality::D2,
        frames,
        nominal_fps: fps,
    };
    Ok((trajectory, GroundTruth::for_archetype(a, animated)))
}

/// Cohort generation parameters. Defaults mirror the study layout: 12
/// healthy controls, 8 patients, 5 repetitions of each of the three tasks,
/// a 20 s REST recording, ~30 fps and depth emission enabled.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct CohortParams {
    pub hc: MotionArchetype,
    pub pd: MotionArchetype,
    pub n_hc: usize,
    pub n_pd: usize,
    pub reps_per_task: usize,
    pub tasks: Vec<Task>,
    pub seed: u64,
    /// Log-normal spread of per-subject amplitude draws.
    pub subject_spread: f64,
    pub rep_duration: f64,
    pub rep_gap: f64,
    /// Silence before the first and after the last repetition.
    pub lead: f64,
    pub rest_duration: f64,
    pub fps: f64,
    pub with_depth: bool,
}

impl Default for CohortParams {
    fn default() -> Self {
        let hc = MotionArchetype::default();
        CohortParams {
            hc,
            pd: MotionArchetype {
                rate: 0.85,
                asymmetry: 0.7,
                ..hc.scaled_amplitudes(0.65)
            },
            n_hc: 12,
            n_pd: 8,
            reps_per_task: 5,
            tasks: Task::FEATURE_TASKS.to_vec(),
            seed: 1,
            subject_spread: 0.25,
            rep_duration: 2.0,
            rep_gap: 0.5,
            lead: 0.5,
            rest_duration: 20.0,
            fps: 30.0,
            with_depth: true,
        }
    }
}

impl CohortParams {
    pub fn validate(&self) -> Result<(), SynthError> {
        self.hc.validate()?;
        self.pd.validate()?;
        let err = |m: String| Err(SynthError::InvalidParams(m));
        if self.n_hc < 2 || self.n_pd < 2 {
            return err(format!(
                "need at least 2 subjects per group, got {}/{}",
                self.n_hc, self.n_pd
            ));
        }
        if self.reps_per_task == 0 {
            return err("reps_per_task must be >= 1".into());
        }
        if self.tasks.is_empty() || self.tasks.contains(&Task::Rest) {
            return err("tasks must be a non-empty list of non-REST tasks".into());
        }
        if !(self.fps >= 10.0 && self.fps <= 120.0) {
            return err(format!("fps {} outside [10, 120]", self.fps));
        }
        if !(self.subject_spread >= 0.0 && self.subject_spread < 1.0) {
            return err(format!(
                "subject_spread {} outside [0, 1)",
                self.subject_spread
            ));
        }
        if !(self.rep_duration > 0.0 && self.rep_gap >= 0.0 && self.lead >= 0.0) {
            return err("rep_duration must be > 0 and gaps >= 0".into());
        }
        if self.rep_duration * self.fps < 5.0 {
            return err(format!(
                "rep_duration {} s at {} fps yields fewer than 5 frames",
                self.rep_duration, self.fps
            ));
        }
        if self.rest_duration < 5.0 {
            return err(format!(
                "rest_duration {} s is shorter than the 5 s window",
                self.rest_duration
            ));
        }
        Ok(())
    }
}

/// One synthetic recording with its annotations.
#[derive(Debug, Clone)]
pub struct TaskRecording {
    pub trajectory: Trajectory,
    pub annotations: Vec<RepetitionAnnotation>,
}

/// All recordings of one synthetic subject.
#[derive(Debug, Clone)]
pub struct SubjectData {
    pub subject_id: String,
    pub group: Group,
    /// The amplitudes this subject was actually generated with.
    pub archetype: MotionArchetype,
    pub rest: Trajectory,
    pub tasks: Vec<TaskRecording>,
}

/// A full in-memory cohort.
#[derive(Debug, Clone)]
pub struct CohortData {
    pub subjects: Vec<SubjectData>,
    pub intrinsics: Option<CameraIntrinsics>,
}

/// Standardizes draws to sample mean 0 and sample sd 1, so each group's
/// log-amplitude spread matches `subject_spread` exactly and identical
/// archetypes yield near-identical group statistics (a matched-moments
/// variance-reduction device; the marginals remain log-normal).
fn standardized_normals(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let unit = Normal::new(0.0, 1.0).unwrap();
    let mut z: Vec<f64> = (0..n).map(|_| unit.sample(rng)).collect();
    let m = z.iter().sum::<f64>() / n as f64;
    let ss: f64 = z.iter().map(|v| (v - m) * (v - m)).sum();
    let sd = (ss / (n as f64 - 1.0)).sqrt();
    if sd > 0.0 {
        for v in &mut z {
            *v = (*v - m) / sd;
        }
    } else {
        z.iter_mut().for_each(|v| *v = 0.0);
    }
    z
}

fn default_intrinsics() -> CameraIntrinsics {
    CameraIntrinsics {
        fx: 600.0,
        fy: 600.0,
        cx: 320.0,
        cy: 240.0,
        width: 640,
        height: 480,
    }
}

/// Generates a whole cohort in memory. Deterministic for fixed parameters.
pub fn gen_cohort_data(params: &CohortParams) -> Result<CohortData, SynthError> {
    params.validate()?;
    let mut master = ChaCha8Rng::seed_from_u64(params.seed);

    let task_total = params.lead * 2.0
        + params.reps_per_task as f64 * params.rep_duration
        + (params.reps_per_task.saturating_sub(1)) as f64 * params.rep_gap;

    let mut subjects = Vec::new();
    for (group, archetype, n, prefix) in [
        (Group::Hc, params.hc, params.n_hc, "hc"),
        (Group::Pd, params.pd, params.n_pd, "pd"),
    ] {
        let z = standardized_normals(n, &mut master);
        for (i, &zi) in z.iter().enumerate() {
            let factor = (params.subject_spread * zi).exp();
            let subject = MotionArchetype {
                seed: master.next_u64(),
                ..archetype.scaled_amplitudes(factor)
            };
            subject.validate()?;
            let geom = FaceGeometry {
                center: (320.0, 220.0),
                scale: master.random_range(80.0..100.0),
                depth_m: master.random_range(0.35..0.45),
                phase: master.random_range(0.0..2.0 * PI),
            };
            let mut subject_rng = ChaCha8Rng::seed_from_u64(subject.seed);

            let rest_frames = gen_frames(
                &subject,
                &geom,
                params.rest_duration,
                params.fps,
                Motion::Static,
                params.with_depth,
                &mut subject_rng,
            );
            let subject_id = format!("{prefix}-{:03}", i + 1);
            let rest = Trajectory {
                subject_id: subject_id.clone(),
                group,
                task: Task::Rest,
                dimensionality: Dimensionality::D2,
                frames: rest_frames,
                nominal_fps: params.fps,
            };

            let mut tasks = Vec::new();
            for &task in &params.tasks {
                let windows: Vec<(f64, f64)> = (0..params.reps_per_task)
                    .map(|k| {
                        let start = params.lead + k as f64 * (params.rep_duration + params.rep_gap);
                        (start, start + params.rep_duration)
                    })
                    .collect();
                let frames = gen_frames(
                    &subject,
                    &geom,
                    task_total,
                    params.fps,
                    Motion::Windows(&windows),
                    params.with_depth,
                    &mut subject_rng,
                );
                let annotations = windows
                    .iter()
                    .enumerate()
                    .map(|(k, &(start, end))| RepetitionAnnotation {
                        task,
                        repetition_index: k as u32 + 1,
                        start,
                        end,
                    })
                    .collect();
                tasks.push(TaskRecording {
                    trajectory: Trajectory {
                        subject_id: subject_id.clone(),
                        group,
                        task,
                        dimensionality: Dimensionality::D2,
                        frames,
                        nominal_fps: params.fps,
                    },
                    annotations,
                });
            }

            subjects.push(SubjectData {
                subject_id,
                group,
                archetype: subject,
                rest,
                tasks,
            });
        }
    }

    Ok(CohortData {
        subjects,
        intrinsics: params.with_depth.then(default_intrinsics),
    })
}

fn create(path: &Path) -> Result<std::io::BufWriter<std::fs::File>, SynthError> {
    let file = std::fs::File::create(path).map_err(|source| SynthError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(std::io::BufWriter::new(file))
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> SynthError + '_ {
    move |source| SynthError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Generates a cohort and writes it under `out_dir` in the crate's
/// interchange formats. Returns the manifest path.
///
/// Layout: `manifest.json`, optionally `intrinsics.json`, and per subject a
/// directory with `rest.jsonl` plus `<task>.jsonl` /
/// `<task>_annotations.jsonl`. Byte-identical for identical parameters.
pub fn gen_cohort(params: &CohortParams, out_dir: &Path) -> Result<PathBuf, SynthError> {
    let data = gen_cohort_data(params)?;
    std::fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;

    let intrinsics_rel = "intrinsics.json";
    if let Some(k) = &data.intrinsics {
        let path = out_dir.join(intrinsics_rel);
        io::write_intrinsics(k, create(&path)?).map_err(io_err(&path))?;
    }

    let mut entries = Vec::new();
    for subject in &data.subjects {
        let subject_dir = out_dir.join(&subject.subject_id);
        std::fs::create_dir_all(&subject_dir).map_err(io_err(&subject_dir))?;

        let rest_rel = format!("{}/rest.jsonl", subject.subject_id);
        let rest_path = out_dir.join(&rest_rel);
        io::write_landmark_stream(&subject.rest, create(&rest_path)?)
            .map_err(io_err(&rest_path))?;

        for recording in &subject.tasks {
            let task_tag = recording.trajectory.task.to_string().to_lowercase();
            let stream_rel = format!("{}/{}.jsonl", subject.subject_id, task_tag);
            let ann_rel = format!("{}/{}_annotations.jsonl", subject.subject_id, task_tag);
            let stream_path = out_dir.join(&stream_rel);
            let ann_path = out_dir.join(&ann_rel);
            io::write_landmark_stream(&recording.trajectory, create(&stream_path)?)
                .map_err(io_err(&stream_path))?;
            io::write_annotations(&recording.annotations, create(&ann_path)?)
                .map_err(io_err(&ann_path))?;

            entries.push(ManifestEntry {
                subject_id: subject.subject_id.clone(),
                group: subject.group,
                task: recording.trajectory.task,
                landmark_file: stream_rel,
                annotation_file: Some(ann_rel),
                intrinsics_file: data
                    .intrinsics
                    .is_some()
                    .then(|| intrinsics_rel.to_string()),
                rest_file: Some(rest_rel.clone()),
                nominal_fps: params.fps,
            });
        }
    }

    let manifest = CohortManifest { entries };
    let manifest_path = out_dir.join("manifest.json");
    io::write_manifest(&manifest, create(&manifest_path)?).map_err(io_err(&manifest_path))?;
    Ok(manifest_path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::{extract_features, rest_factors, FeatureOptions, MouthLandmarks};
    use crate::segmentation::rest_window;

    fn quiet(a: MotionArchetype) -> MotionArchetype {
        MotionArchetype {
            jitter_sd: 0.0,
            ..a
        }
    }

    fn extract_single(a: &MotionArchetype) -> (crate::model::FeatureVector, GroundTruth) {
        let (rep, truth) = gen_trajectory(a, Task::Bbp, 2.0, 30.0, None).unwrap();
        let (rest, _) = gen_trajectory(a, Task::Rest, 6.0, 30.0, None).unwrap();
        let window = rest_window(&rest, 5.0).unwrap();
        let factors = rest_factors(&window, &MouthLandmarks::default()).unwrap();
        let features = extract_features(&rep, &factors, &FeatureOptions::default()).unwrap();
        (features, truth)
    }

    fn assert_rel(label: &str, got: f64, want: f64, tol: f64) {
        let denom = want.abs().max(1e-12);
        assert!(
            (got - want).abs() / denom <= tol,
            "{label}: got {got}, want {want} (tol {tol})"
        );
    }

    #[test]
    fn jitter_free_features_match_ground_truth() {
        let a = quiet(MotionArchetype {
            tb_amplitude: 0.5,
            wm_amplitude: 0.3,
            rate: 1.0,
            ..Default::default()
        });
        let (f, t) = extract_single(&a);
        // range/mean features track the analytic values to grid resolution;
        // first derivatives add the central-difference factor, second
        // derivatives compound it
        assert_rel("delta_tb", f.delta_tb, t.delta_tb, 0.01);
        assert_rel("delta_wm", f.delta_wm, t.delta_wm, 0.01);
        assert_rel("delta_area", f.delta_area, t.delta_area, 0.01);
        assert_rel("mean_area", f.mean_area, t.mean_area, 0.01);
        assert_rel("max_vel_tb", f.max_vel_tb, t.max_vel_tb, 0.02);
        assert_rel("min_vel_tb", f.min_vel_tb, t.min_vel_tb, 0.02);
        assert_rel("max_vel_wm", f.max_vel_wm, t.max_vel_wm, 0.02);
        assert_rel("min_vel_wm", f.min_vel_wm, t.min_vel_wm, 0.02);
        assert_rel("max_acc_tb", f.max_acc_tb, t.max_acc_tb, 0.05);
        assert_rel("min_acc_tb", f.min_acc_tb, t.min_acc_tb, 0.05);
        assert_rel("max_acc_wm", f.max_acc_wm, t.max_acc_wm, 0.05);
        assert_rel("min_acc_wm", f.min_acc_wm, t.min_acc_wm, 0.05);
        assert_rel("ccc_area", f.ccc_area, t.ccc_area.unwrap(), 0.02);
    }

    #[test]
    fn symmetric_archetype_has_unit_concordance() {
        let a = quiet(MotionArchetype {
            asymmetry: 1.0,
            ..Default::default()
        });
        let (f, t) = extract_single(&a);
        assert!((t.ccc_area.unwrap() - 1.0).abs() < 1e-12);
        assert!((f.ccc_area - 1.0).abs() < 1e-9);
    }

    #[test]
    fn pure_width_motion_concordance_closed_form() {
        // tb_amplitude = 0 leaves x = 1 + r·b·s vs y = 1 + b·s, whose
        // concordance is 2r/(1+r²).
        let r = 0.6;
        let a = quiet(MotionArchetype {
            tb_amplitude: 0.0,
            wm_amplitude: 0.4,
            asymmetry: r,
            ..Default::default()
        });
        let (f, t) = extract_single(&a);
        let expected = 2.0 * r / (1.0 + r * r);
        assert!((t.ccc_area.unwrap() - expected).abs() < 1e-12);
        assert_rel("ccc_area", f.ccc_area, expected, 0.02);
    }

    #[test]
    fn zero_amplitude_ground_truth_is_static() {
        let a = quiet(MotionArchetype {
            tb_amplitude: 0.0,
            wm_amplitude: 0.0,
            ..Default::default()
        });
        let (_, t) = gen_trajectory(&a, Task::Bbp, 2.0, 30.0, None).unwrap();
        assert_eq!(t.delta_tb, 0.0);
        assert_eq!(t.max_vel_tb, 0.0);
        assert_eq!(t.min_acc_wm, 0.0);
        assert_eq!(t.delta_area, 0.0);
        assert_eq!(t.mean_area, 1.0);
        assert_eq!(t.ccc_area, None);
    }

    #[test]
    fn increasing_amplitude_strictly_increases_delta_tb() {
        let mut previous = f64::NEG_INFINITY;
        for amp in [0.1, 0.3, 0.5, 0.7] {
            let a = quiet(MotionArchetype {
                tb_amplitude: amp,
                ..Default::default()
            });
            let (f, _) = extract_single(&a);
            assert!(
                f.delta_tb > previous,
                "amp {amp}: {} <= {previous}",
                f.delta_tb
            );
            previous = f.delta_tb;
        }
    }

    #[test]
    fn identical_seeds_are_bit_identical() {
        let a = MotionArchetype {
            jitter_sd: 1.0,
            seed: 42,
            ..Default::default()
        };
        let (t1, _) = gen_trajectory(&a, Task::Bbp, 2.0, 30.0, None).unwrap();
        let (t2, _) = gen_trajectory(&a, Task::Bbp, 2.0, 30.0, None).unwrap();
        assert_eq!(t1, t2);
        let (t3, _) = gen_trajectory(
            &MotionArchetype { seed: 43, ..a },
            Task::Bbp,
            2.0,
            30.0,
            None,
        )
        .unwrap();
        assert_ne!(t1, t3);
    }

    #[test]
    fn depth_emission_is_flat_and_positive() {
        let k = default_intrinsics();
        let a = quiet(MotionArchetype::default());
        let (t, _) = gen_trajectory(&a, Task::Bbp, 2.0, 30.0, Some(&k)).unwrap();
        for frame in &t.frames {
            let depth = frame.depth.as_ref().unwrap();
            assert_eq!(depth.len(), LANDMARK_COUNT);
            assert!(depth.iter().all(|&z| z > 0.0));
        }
    }

    #[test]
    fn rest_task_is_static_even_with_amplitudes() {
        let a = quiet(MotionArchetype::default());
        let (t, truth) = gen_trajectory(&a, Task::Rest, 6.0, 30.0, None).unwrap();
        assert_eq!(truth, GroundTruth::static_face());
        let first = &t.frames[0].points;
        assert!(t.frames.iter().all(|f| &f.points == first));
    }

    #[test]
    fn invalid_archetypes_are_rejected() {
        let base = MotionArchetype::default();
        assert!(MotionArchetype { rate: 10.0, ..base }.validate().is_err());
        assert!(MotionArchetype {
            tb_amplitude: 1.0,
            ..base
        }
        .validate()
        .is_err());
        assert!(MotionArchetype {
            asymmetry: 0.0,
            ..base
        }
        .validate()
        .is_err());
        assert!(MotionArchetype {
            jitter_sd: -1.0,
            ..base
        }
        .validate()
        .is_err());
        assert!(gen_trajectory(&base, Task::Bbp, 0.1, 30.0, None).is_err());
    }

    fn small_params() -> CohortParams {
        CohortParams {
            n_hc: 12,
            n_pd: 8,
            reps_per_task: 5,
            tasks: vec![Task::Bbp],
            rest_duration: 5.5,
            rep_duration: 1.5,
            rep_gap: 0.3,
            lead: 0.3,
            seed: 7,
            ..Default::default()
        }
    }

    #[test]
    fn cohort_shape_matches_parameters() {
        let data = gen_cohort_data(&small_params()).unwrap();
        assert_eq!(data.subjects.len(), 20);
        assert_eq!(
            data.subjects
                .iter()
                .filter(|s| s.group == Group::Hc)
                .count(),
            12
        );
        for subject in &data.subjects {
            assert_eq!(subject.tasks.len(), 1);
            assert_eq!(subject.tasks[0].annotations.len(), 5);
            assert_eq!(subject.rest.task, Task::Rest);
        }
        assert!(data.intrinsics.is_some());
    }

    #[test]
    fn cohort_generation_is_deterministic() {
        let params = small_params();
        let a = gen_cohort_data(&params).unwrap();
        let b = gen_cohort_data(&params).unwrap();
        assert_eq!(a.subjects.len(), b.subjects.len());
        for (x, y) in a.subjects.iter().zip(&b.subjects) {
            assert_eq!(x.subject_id, y.subject_id);
            assert_eq!(x.rest, y.rest);
            assert_eq!(x.tasks[0].trajectory, y.tasks[0].trajectory);
        }
    }

    #[test]
    fn cohort_files_are_byte_identical_across_runs() {
        let params = CohortParams {
            n_hc: 2,
            n_pd: 2,
            reps_per_task: 2,
            ..small_params()
        };
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        let ma = gen_cohort(&params, dir_a.path()).unwrap();
        let mb = gen_cohort(&params, dir_b.path()).unwrap();
        let read_all = |root: &Path, manifest: &Path| {
            let mut files: Vec<(String, Vec<u8>)> = walk(root)
                .into_iter()
                .map(|p| {
                    let rel = p.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                    (rel, std::fs::read(&p).unwrap())
                })
                .collect();
            files.sort();
            assert!(manifest.exists());
            files
        };
        assert_eq!(read_all(dir_a.path(), &ma), read_all(dir_b.path(), &mb));
    }

    fn walk(root: &Path) -> Vec<PathBuf> {
        let mut out = Vec::new();
        let mut stack = vec![root.to_path_buf()];
        while let Some(dir) = stack.pop() {
            for entry in std::fs::read_dir(&dir).unwrap() {
                let path = entry.unwrap().path();
                if path.is_dir() {
                    stack.push(path);
                } else {
                    out.push(path);
                }
            }
        }
        out
    }

    #[test]
    fn equal_archetypes_give_matched_group_amplitudes() {
        let params = CohortParams {
            pd: CohortParams::default().hc,
            ..small_params()
        };
        let data = gen_cohort_data(&params).unwrap();
        let mean_amp = |g: Group| {
            let v: Vec<f64> = data
                .subjects
                .iter()
                .filter(|s| s.group == g)
                .map(|s| s.archetype.tb_amplitude)
                .collect();
            v.iter().sum::<f64>() / v.len() as f64
        };
        let (hc, pd) = (mean_amp(Group::Hc), mean_amp(Group::Pd));
        assert!((hc - pd).abs() / hc < 0.02, "hc {hc} pd {pd}");
    }
}
