//! End-to-end extraction: manifest entries (or in-memory cohorts) through
//! optional 3D reconstruction, segmentation, REST normalization and feature
//! extraction, into feature-table rows.
//!
//! Entries are processed independently (in parallel when a rayon pool is
//! installed) and results are merged in manifest order, so output is
//! deterministic regardless of thread count. Per-entry failures are
//! collected rather than aborting the whole batch.

use crate::io::{self, FeatureRow, ManifestEntry, ParseError};
use crate::kinematics::{
    extract_features, rest_factors, FeatureOptions, KinematicsError, MouthLandmarks,
};
use crate::model::{
    validate_bounds, CameraIntrinsics, Dimensionality, RepetitionAnnotation, Task, Trajectory,
};
use crate::reconstruction::{reconstruct_trajectory, GapPolicy, ReconstructionError};
use crate::segmentation::{rest_window, split_repetitions, SegmentationError};
use crate::synth::CohortData;
use rayon::prelude::*;
use std::path::{Path, PathBuf};
use thiserror::Error;

/// Which feature dimensionalities to extract.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DimSelection {
    D2,
    D3,
    #[default]
    Both,
}

impl DimSelection {
    pub fn dims(&self) -> &'static [Dimensionality] {
        match self {
            DimSelection::D2 => &[Dimensionality::D2],
            DimSelection::D3 => &[Dimensionality::D3],
            DimSelection::Both => &[Dimensionality::D2, Dimensionality::D3],
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExtractOptions {
    pub dims: DimSelection,
    pub smooth: bool,
    pub landmarks: MouthLandmarks,
    pub gap_policy: GapPolicy,
    /// REST window length in seconds.
    pub rest_window: f64,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        ExtractOptions {
            dims: DimSelection::Both,
            smooth: false,
            landmarks: MouthLandmarks::default(),
            gap_policy: GapPolicy::default(),
            rest_window: crate::segmentation::REST_WINDOW_SECONDS,
        }
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: ParseError,
    },
    #[error("subject {subject} task {task}: 3D requested but no depth ({detail})")]
    DepthUnavailable {
        subject: String,
        task: Task,
        detail: String,
    },
    #[error("subject {subject} task {task}: {count} landmark(s) outside the declared resolution, first: {first}")]
    OutOfBounds {
        subject: String,
        task: Task,
        count: usize,
        first: String,
    },
    #[error("subject {subject} task {task}: {source}")]
    Reconstruction {
        subject: String,
        task: Task,
        #[source]
        source: ReconstructionError,
    },
    #[error("subject {subject} task {task}: {source}")]
    Segmentation {
        subject: String,
        task: Task,
        #[source]
        source: SegmentationError,
    },
    #[error("subject {subject} task {task}{}: {source}", fmt_rep(.repetition))]
    Kinematics {
        subject: String,
        task: Task,
        repetition: Option<u32>,
        #[source]
        source: KinematicsError,
    },
}

fn fmt_rep(repetition: &Option<u32>) -> String {
    match repetition {
        Some(r) => format!(" repetition {r}"),
        None => String::new(),
    }
}

impl PipelineError {
    /// True when the root cause is a filesystem/IO failure rather than bad
    /// data.
    pub fn is_io(&self) -> bool {
        matches!(
            self,
            PipelineError::Parse {
                source: ParseError::Io(_),
                ..
            }
        )
    }
}

/// Outcome of a batch extraction: the rows that succeeded plus every
/// per-entry failure.
#[derive(Debug, Default)]
pub struct ExtractReport {
    pub rows: Vec<FeatureRow>,
    pub errors: Vec<PipelineError>,
}

/// Extracts feature rows for one recording that is already in memory.
///
/// `recording` and `rest` must be pixel-space trajectories of the same
/// subject; `intrinsics` is required when `opts.dims` includes 3D.
pub fn extract_recording(
    recording: &Trajectory,
    rest: &Trajectory,
    annotations: &[RepetitionAnnotation],
    intrinsics: Option<&CameraIntrinsics>,
    opts: &ExtractOptions,
) -> Result<Vec<FeatureRow>, PipelineError> {
    let subject = recording.subject_id.clone();
    let task = recording.task;
    let mut rows = Vec::new();

    for &dim in opts.dims.dims() {
        let (task_t, rest_t) = match dim {
            Dimensionality::D2 => (recording.clone(), rest.clone()),
            Dimensionality::D3 => {
                let k = intrinsics.ok_or_else(|| PipelineError::DepthUnavailable {
                    subject: subject.clone(),
                    task,
                    detail: "no intrinsics available".into(),
                })?;
                let reconstruct = |t: &Trajectory| {
                    reconstruct_trajectory(t, k, &opts.gap_policy).map_err(|e| match e {
                        ReconstructionError::MissingDepth { frame } => {
                            PipelineError::DepthUnavailable {
                                subject: subject.clone(),
                                task,
                                detail: format!("frame {frame} has no depth array"),
                            }
                        }
                        other => PipelineError::Reconstruction {
                            subject: subject.clone(),
                            task,
                            source: other,
                        },
                    })
                };
                (reconstruct(recording)?, reconstruct(rest)?)
            }
        };

        let window = rest_window(&rest_t, opts.rest_window).map_err(|source| {
            PipelineError::Segmentation {
                subject: subject.clone(),
                task: Task::Rest,
                source,
            }
        })?;
        let factors =
            rest_factors(&window, &opts.landmarks).map_err(|source| PipelineError::Kinematics {
                subject: subject.clone(),
                task: Task::Rest,
                repetition: None,
                source,
            })?;
        let reps = split_repetitions(&task_t, annotations).map_err(|source| {
            PipelineError::Segmentation {
                subject: subject.clone(),
                task,
                source,
            }
        })?;
        let feature_opts = FeatureOptions {
            landmarks: opts.landmarks,
            smooth: opts.smooth,
        };
        for rep in reps {
            let features =
                extract_features(&rep.trajectory, &factors, &feature_opts).map_err(|source| {
                    PipelineError::Kinematics {
                        subject: subject.clone(),
                        task,
                        repetition: Some(rep.index),
                        source,
                    }
                })?;
            rows.push(FeatureRow {
                subject_id: subject.clone(),
                group: recording.group,
                task,
                dimensionality: dim,
                repetition: rep.index,
                features,
            });
        }
    }
    Ok(rows)
}

fn load_entry(
    entry: &ManifestEntry,
    base: &Path,
    opts: &ExtractOptions,
) -> Result<Vec<FeatureRow>, PipelineError> {
    let resolve = |rel: &str| {
        let p = Path::new(rel);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            base.join(p)
        }
    };
    let parse_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| PipelineError::Parse { path, source }
    };

    let meta = io::StreamMeta {
        subject_id: entry.subject_id.clone(),
        group: entry.group,
        task: entry.task,
        nominal_fps: entry.nominal_fps,
    };
    let stream_path = resolve(&entry.landmark_file);
    let recording = io::read_landmark_file(&stream_path, &meta).map_err(parse_err(&stream_path))?;

    // manifest validation guarantees these for non-REST entries
    let rest_rel = entry
        .rest_file
        .as_deref()
        .expect("validated manifest entry");
    let ann_rel = entry
        .annotation_file
        .as_deref()
        .expect("validated manifest entry");
    let rest_path = resolve(rest_rel);
    let rest_meta = io::StreamMeta {
        task: Task::Rest,
        ..meta.clone()
    };
    let rest = io::read_landmark_file(&rest_path, &rest_meta).map_err(parse_err(&rest_path))?;
    let ann_path = resolve(ann_rel);
    let annotations = io::read_annotations_file(&ann_path).map_err(parse_err(&ann_path))?;

    let intrinsics = match &entry.intrinsics_file {
        Some(rel) => {
            let path = resolve(rel);
            let k = io::read_intrinsics_file(&path).map_err(parse_err(&path))?;
            for t in [&recording, &rest] {
                let violations = validate_bounds(t, k.width, k.height);
                if !violations.is_empty() {
                    return Err(PipelineError::OutOfBounds {
                        subject: entry.subject_id.clone(),
                        task: t.task,
                        count: violations.len(),
                        first: violations[0].to_string(),
                    });
                }
            }
            Some(k)
        }
        None => None,
    };

    extract_recording(&recording, &rest, &annotations, intrinsics.as_ref(), opts)
}

/// Runs extraction for every non-REST manifest entry.
///
/// File paths resolve relative to `base_dir` (normally the manifest's
/// directory). Rows keep manifest order; failures are collected per entry.
pub fn extract_cohort(
    manifest: &io::CohortManifest,
    base_dir: &Path,
    opts: &ExtractOptions,
) -> ExtractReport {
    let results: Vec<Result<Vec<FeatureRow>, PipelineError>> = manifest
        .entries
        .par_iter()
        .filter(|e| e.task != Task::Rest)
        .map(|entry| load_entry(entry, base_dir, opts))
        .collect();

    let mut report = ExtractReport::default();
    for result in results {
        match result {
            Ok(rows) => report.rows.extend(rows),
            Err(e) => report.errors.push(e),
        }
    }
    report
}

/// Runs extraction over an in-memory synthetic cohort (same stages as
/// [`extract_cohort`], minus the file round-trip).
pub fn extract_cohort_data(data: &CohortData, opts: &ExtractOptions) -> ExtractReport {
    let results: Vec<Result<Vec<FeatureRow>, PipelineError>> = data
        .subjects
        .par_iter()
        .flat_map_iter(|subject| {
            subject.tasks.iter().map(|recording| {
                extract_recording(
                    &recording.trajectory,
                    &subject.rest,
                    &recording.annotations,
                    data.intrinsics.as_ref(),
                    opts,
                )
            })
        })
        .collect();

    let mut report = ExtractReport::default();
    for result in results {
        match result {
            Ok(rows) => report.rows.extend(rows),
            Err(e) => report.errors.push(e),
        }
    }
    report
}
