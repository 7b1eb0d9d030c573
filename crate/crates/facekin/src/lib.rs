//! Orofacial kinematics from facial-landmark trajectories.
//!
//! Turns per-frame 68-point facial landmarks (with optional per-landmark
//! depth) into mouth kinematic features and cohort-level effect sizes, for
//! comparing healthy-control and Parkinson's-disease groups on speech and
//! non-speech tasks.
//!
//! The pipeline:
//!
//! 1. [`io`] parses landmark streams, camera intrinsics, repetition
//!    annotations and cohort manifests;
//! 2. [`reconstruction`] optionally back-projects pixels + depth into 3D
//!    world coordinates (pinhole model);
//! 3. [`segmentation`] cuts recordings into annotated repetitions and
//!    extracts the centered REST window;
//! 4. [`kinematics`] computes five per-frame mouth properties, normalizes
//!    them by the subject's REST means and extracts 13 features per
//!    repetition (ranges, velocity/acceleration extrema, mean area,
//!    left/right area concordance);
//! 5. [`statistics`] compares groups with the standardized mean difference
//!    and classifies magnitudes (0.5 / 0.8 breakpoints).
//!
//! [`synth`] generates sinusoidal cohorts with closed-form expected features
//! for testing, and [`pipeline`] wires the stages together. The `facekin`
//! binary exposes everything as `extract` / `analyze` / `synth` / `smd`
//! subcommands; the crate's `examples/` directory shows each capability as
//! a runnable program.
//!
//! ```
//! use facekin::kinematics::{extract_features, rest_factors, FeatureOptions, MouthLandmarks};
//! use facekin::segmentation::rest_window;
//! use facekin::synth::{gen_trajectory, MotionArchetype};
//! use facekin::model::Task;
//!
//! let archetype = MotionArchetype { jitter_sd: 0.0, ..Default::default() };
//! let (repetition, truth) = gen_trajectory(&archetype, Task::Bbp, 2.0, 30.0, None).unwrap();
//! let (rest, _) = gen_trajectory(&archetype, Task::Rest, 6.0, 30.0, None).unwrap();
//!
//! let window = rest_window(&rest, 5.0).unwrap();
//! let factors = rest_factors(&window, &MouthLandmarks::default()).unwrap();
//! let features = extract_features(&repetition, &factors, &FeatureOptions::default()).unwrap();
//! assert!((features.delta_tb - truth.delta_tb).abs() / truth.delta_tb < 0.01);
//! ```

pub mod cli;
pub mod io;
pub mod kinematics;
pub mod model;
pub mod pipeline;
pub mod reconstruction;
pub mod segmentation;
pub mod statistics;
pub mod synth;

pub use model::{
    CameraIntrinsics, Dimensionality, FeatureVector, Group, LandmarkFrame, RepetitionAnnotation,
    Task, Trajectory, FEATURE_NAMES, LANDMARK_COUNT,
};
