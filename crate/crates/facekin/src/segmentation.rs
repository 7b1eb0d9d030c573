//! Splitting recordings into single-repetition trajectories and extracting
//! the REST normalization window.
//!
//! Window boundaries are timestamp-based and inclusive on both edges, so
//! uneven sampling and non-30-fps recordings behave correctly; frame counts
//! (e.g. ~150 frames for a 5 s window at 30 fps) are a consequence, not a
//! rule.

use crate::model::{RepetitionAnnotation, Task, Trajectory};
use thiserror::Error;

/// Default REST window length in seconds.
pub const REST_WINDOW_SECONDS: f64 = 5.0;

/// Minimum frames a repetition must contain (derivatives need 3 samples).
pub const MIN_REPETITION_FRAMES: usize = 3;

#[derive(Debug, Error)]
pub enum SegmentationError {
    #[error("repetition {index} [{start}, {end}] contains {frames} frames (< {min} required)")]
    TooShortRepetition {
        index: u32,
        start: f64,
        end: f64,
        frames: usize,
        min: usize,
    },
    #[error("annotation {index} is for task {annotation_task}, recording is {recording_task}")]
    TaskMismatch {
        index: u32,
        annotation_task: Task,
        recording_task: Task,
    },
    #[error("cannot split a REST recording into repetitions")]
    RestHasNoRepetitions,
    #[error("recording spans {actual:.3} s, shorter than the {wanted} s rest window")]
    InsufficientRest { actual: f64, wanted: f64 },
    #[error("rest window requested on a {0} recording")]
    NotRestTask(Task),
}

/// One annotated repetition cut out of a recording.
#[derive(Debug, Clone, PartialEq)]
pub struct Repetition {
    /// 1-based index from the annotation.
    pub index: u32,
    pub trajectory: Trajectory,
}

/// Cuts a recording into per-repetition sub-trajectories.
///
/// Each output contains exactly the frames with
/// `start <= timestamp <= end` for its annotation; recording metadata is
/// copied. Annotations are assumed validated (see `io::parse_annotations`).
pub fn split_repetitions(
    t: &Trajectory,
    annotations: &[RepetitionAnnotation],
) -> Result<Vec<Repetition>, SegmentationError> {
    if t.task == Task::Rest {
        return Err(SegmentationError::RestHasNoRepetitions);
    }
    let mut out = Vec::with_capacity(annotations.len());
    for ann in annotations {
        if ann.task != t.task {
            return Err(SegmentationError::TaskMismatch {
                index: ann.repetition_index,
                annotation_task: ann.task,
                recording_task: t.task,
            });
        }
        let frames: Vec<_> = t
            .frames
            .iter()
            .filter(|f| f.timestamp >= ann.start && f.timestamp <= ann.end)
            .cloned()
            .collect();
        if frames.len() < MIN_REPETITION_FRAMES {
            return Err(SegmentationError::TooShortRepetition {
                index: ann.repetition_index,
                start: ann.start,
                end: ann.end,
                frames: frames.len(),
                min: MIN_REPETITION_FRAMES,
            });
        }
        out.push(Repetition {
            index: ann.repetition_index,
            trajectory: Trajectory {
                frames,
                ..t.clone()
            },
        });
    }
    Ok(out)
}

/// Extracts the centered window of `duration` seconds from a REST recording:
/// frames with timestamps in [mid − duration/2, mid + duration/2], where mid
/// is the midpoint of the recording. Boundary frames are included.
pub fn rest_window(t: &Trajectory, duration: f64) -> Result<Trajectory, SegmentationError> {
    if t.task != Task::Rest {
        return Err(SegmentationError::NotRestTask(t.task));
    }
    let span = t.duration();
    if t.frames.is_empty() || span < duration {
        return Err(SegmentationError::InsufficientRest {
            actual: span,
            wanted: duration,
        });
    }
    let mid = (t.frames[0].timestamp + t.frames[t.frames.len() - 1].timestamp) / 2.0;
    let (lo, hi) = (mid - duration / 2.0, mid + duration / 2.0);
    let frames: Vec<_> = t
        .frames
        .iter()
        .filter(|f| f.timestamp >= lo && f.timestamp <= hi)
        .cloned()
        .collect();
    Ok(Trajectory {
        frames,
        ..t.clone()
    })
}
