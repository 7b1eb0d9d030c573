//! Pinhole back-projection: pixel-space landmarks plus per-landmark depth
//! into 3D world coordinates.
//!
//! Streams are assumed rectified and depth-to-color registered upstream, so
//! no distortion model is applied here. Missing depth readings (z = 0) are
//! bridged by linear interpolation over short gaps; frames with longer gaps
//! are marked invalid and excluded from downstream property series, leaving
//! timestamps irregular rather than resampling.

use crate::model::{CameraIntrinsics, Dimensionality, LandmarkFrame, Trajectory, LANDMARK_COUNT};
use thiserror::Error;

/// A reconstructed landmark position in meters, camera-centered.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorldPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

#[derive(Debug, Error)]
pub enum ReconstructionError {
    #[error("invalid depth {z} (must be > 0)")]
    InvalidDepth { z: f64 },
    #[error("frame {frame} has no depth array")]
    MissingDepth { frame: usize },
    #[error("trajectory is not pixel-space")]
    NotPixelSpace,
    #[error(
        "reconstruction failed: {invalid} of {total} frames invalid \
         ({fraction:.1}% > {max:.1}% allowed); longest gap {longest_gap} frames"
    )]
    TooManyInvalid {
        invalid: usize,
        total: usize,
        fraction: f64,
        max: f64,
        longest_gap: usize,
    },
}

/// How missing depth readings are handled during reconstruction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapPolicy {
    /// Longest run of consecutive missing readings (per landmark) that is
    /// bridged by linear interpolation. Longer runs invalidate the frames.
    pub max_gap: usize,
    /// Abort when more than this fraction of frames ends up invalid.
    pub max_invalid_fraction: f64,
}

impl Default for GapPolicy {
    /// 5 frames (~0.17 s at 30 fps — short against mouth motion of a few Hz)
    /// and at most 20% invalid frames.
    fn default() -> Self {
        GapPolicy {
            max_gap: 5,
            max_invalid_fraction: 0.2,
        }
    }
}

/// Maps a pixel (u, v) with depth z through the intrinsics to a world point:
/// x = (u − cx)·z/fx, y = (v − cy)·z/fy.
pub fn back_project(
    u: f64,
    v: f64,
    z: f64,
    k: &CameraIntrinsics,
) -> Result<WorldPoint, ReconstructionError> {
    if z.is_nan() || z <= 0.0 {
        return Err(ReconstructionError::InvalidDepth { z });
    }
    Ok(WorldPoint {
        x: (u - k.cx) * z / k.fx,
        y: (v - k.cy) * z / k.fy,
        z,
    })
}

/// Inverse of [`back_project`]: u = fx·x/z + cx, v = fy·y/z + cy.
pub fn project(p: &WorldPoint, k: &CameraIntrinsics) -> Result<(f64, f64), ReconstructionError> {
    if p.z.is_nan() || p.z <= 0.0 {
        return Err(ReconstructionError::InvalidDepth { z: p.z });
    }
    Ok((k.fx * p.x / p.z + k.cx, k.fy * p.y / p.z + k.cy))
}

/// Back-projects a 2D-with-depth trajectory into a 3D trajectory.
///
/// A depth reading is usable when it is positive and the landmark is not
/// flagged invalid. Unusable readings form per-landmark gaps: interior gaps
/// of at most `policy.max_gap` frames are filled by linear interpolation of
/// the world coordinates (in time) between the bounding valid frames; any
/// other gap marks the affected frames invalid. Timestamps are preserved.
pub fn reconstruct_trajectory(
    t2d: &Trajectory,
    k: &CameraIntrinsics,
    policy: &GapPolicy,
) -> Result<Trajectory, ReconstructionError> {
    if t2d.dimensionality != Dimensionality::D2 {
        return Err(ReconstructionError::NotPixelSpace);
    }
    let n = t2d.frames.len();
    for (i, frame) in t2d.frames.iter().enumerate() {
        if frame.depth.is_none() {
            return Err(ReconstructionError::MissingDepth { frame: i });
        }
    }

    // world[i][j] = Some(point) where landmark j of frame i has usable depth
    let mut world: Vec<Vec<Option<WorldPoint>>> = Vec::with_capacity(n);
    for frame in &t2d.frames {
        let depth = frame.depth.as_ref().unwrap();
        let mut row = Vec::with_capacity(LANDMARK_COUNT);
        for (j, p) in frame.points.iter().enumerate() {
            let z = depth.get(j).copied().unwrap_or(0.0);
            let usable = z > 0.0 && frame.is_valid(j);
            row.push(if usable {
                Some(back_project(p[0], p[1], z, k)?)
            } else {
                None
            });
        }
        world.push(row);
    }

    let mut frame_valid = vec![true; n];
    let mut longest_gap = 0usize;
    let timestamps: Vec<f64> = t2d.frames.iter().map(|f| f.timestamp).collect();

    // per-landmark gap scan: j stays fixed while i walks the frames
    #[allow(clippy::needless_range_loop)]
    for j in 0..LANDMARK_COUNT {
        let mut i = 0;
        while i < n {
            if world[i][j].is_some() {
                i += 1;
                continue;
            }
            let gap_start = i;
            while i < n && world[i][j].is_none() {
                i += 1;
            }
            let gap_len = i - gap_start;
            longest_gap = longest_gap.max(gap_len);
            let interior = gap_start > 0 && i < n;
            if interior && gap_len <= policy.max_gap {
                let (t0, p0) = (timestamps[gap_start - 1], world[gap_start - 1][j].unwrap());
                let (t1, p1) = (timestamps[i], world[i][j].unwrap());
                for g in gap_start..i {
                    let alpha = (timestamps[g] - t0) / (t1 - t0);
                    world[g][j] = Some(WorldPoint {
                        x: p0.x + alpha * (p1.x - p0.x),
                        y: p0.y + alpha * (p1.y - p0.y),
                        z: p0.z + alpha * (p1.z - p0.z),
                    });
                }
            } else {
                for flag in frame_valid.iter_mut().take(i).skip(gap_start) {
                    *flag = false;
                }
            }
        }
    }

    let invalid = frame_valid.iter().filter(|v| !**v).count();
    if n > 0 {
        let fraction = invalid as f64 / n as f64;
        if fraction > policy.max_invalid_fraction {
            return Err(ReconstructionError::TooManyInvalid {
                invalid,
                total: n,
                fraction: 100.0 * fraction,
                max: 100.0 * policy.max_invalid_fraction,
                longest_gap,
            });
        }
    }

    let frames = t2d
        .frames
        .iter()
        .enumerate()
        .map(|(i, src)| {
            let points = (0..LANDMARK_COUNT)
                .map(|j| match world[i][j] {
                    Some(p) => [p.x, p.y, p.z],
                    // Placeholder on invalid frames; the validity mask
                    // excludes these from every downstream computation.
                    None => [0.0, 0.0, 1.0],
                })
                .collect();
            let validity = if frame_valid[i] {
                src.validity.clone()
            } else {
                Some(vec![false; LANDMARK_COUNT])
            };
            LandmarkFrame {
                timestamp: src.timestamp,
                points,
                depth: None,
                validity,
            }
        })
        .collect();

    Ok(Trajectory {
        subject_id: t2d.subject_id.clone(),
        group: t2d.group,
        task: t2d.task,
        dimensionality: Dimensionality::D3,
        frames,
        nominal_fps: t2d.nominal_fps,
    })
}
