//! Per-frame mouth properties, REST normalization, numerical derivatives,
//! the concordance correlation coefficient, and the 13 per-repetition
//! kinematic features.
//!
//! Five properties describe the mouth in each frame:
//!
//! * `TB` — vertical opening, distance between the outer-lip midline
//!   landmarks (top and bottom vermillion border);
//! * `WM` — horizontal opening, distance between the oral commissures;
//! * `AreaLeft`/`AreaRight` — triangle areas spanned by the two midline
//!   landmarks and the image-left / image-right commissure;
//! * `Area` — their sum.
//!
//! Properties are divided by the subject's REST-window means, which makes
//! every feature dimensionless (velocities in 1/s, accelerations in 1/s²)
//! and comparable across subjects and across 2D/3D extraction.

use crate::model::{
    landmarks, Dimensionality, FeatureVector, LandmarkFrame, LandmarkPoint, Trajectory,
    LANDMARK_COUNT,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum KinematicsError {
    #[error("series length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("{got} samples, need at least {need}")]
    TooFewSamples { got: usize, need: usize },
    #[error("timestamps not strictly increasing at index {index}")]
    NonMonotonicTimestamps { index: usize },
    #[error("degenerate rest: mean {property} = {value}, cannot be used as a divisor")]
    DegenerateRest { property: &'static str, value: f64 },
    #[error("dimensionality mismatch: series is {series}, factors are {factors}")]
    DimensionalityMismatch {
        series: Dimensionality,
        factors: Dimensionality,
    },
    #[error("series is already normalized")]
    AlreadyNormalized,
    #[error("series is not normalized")]
    NotNormalized,
    #[error("concordance undefined: both series are constant")]
    UndefinedCcc,
    #[error("invalid mouth landmark indices: {0}")]
    BadLandmarks(String),
}

/// Which landmark indices define the mouth measurements.
///
/// Defaults follow the iBUG 300-W outer lip contour (see
/// [`crate::model::landmarks`]); override for other annotation schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MouthLandmarks {
    pub lip_top: usize,
    pub lip_bottom: usize,
    pub mouth_left: usize,
    pub mouth_right: usize,
}

impl Default for MouthLandmarks {
    fn default() -> Self {
        MouthLandmarks {
            lip_top: landmarks::LIP_TOP,
            lip_bottom: landmarks::LIP_BOTTOM,
            mouth_left: landmarks::MOUTH_LEFT,
            mouth_right: landmarks::MOUTH_RIGHT,
        }
    }
}

impl MouthLandmarks {
    pub fn validate(&self) -> Result<(), KinematicsError> {
        let ix = [
            self.lip_top,
            self.lip_bottom,
            self.mouth_left,
            self.mouth_right,
        ];
        if ix.iter().any(|&i| i >= LANDMARK_COUNT) {
            return Err(KinematicsError::BadLandmarks(format!(
                "index out of range 0..{LANDMARK_COUNT}: {ix:?}"
            )));
        }
        for a in 0..4 {
            for b in (a + 1)..4 {
                if ix[a] == ix[b] {
                    return Err(KinematicsError::BadLandmarks(format!(
                        "duplicate index {}",
                        ix[a]
                    )));
                }
            }
        }
        Ok(())
    }
}

/// The five properties of a single frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MouthProperties {
    pub tb: f64,
    pub wm: f64,
    pub area_left: f64,
    pub area_right: f64,
    pub area: f64,
}

/// Time series of the five properties over the usable frames of one
/// trajectory segment.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertySeries {
    pub timestamps: Vec<f64>,
    pub tb: Vec<f64>,
    pub wm: Vec<f64>,
    pub area_left: Vec<f64>,
    pub area_right: Vec<f64>,
    pub area: Vec<f64>,
    pub dimensionality: Dimensionality,
    /// False for raw values (px / px² in 2D, m / m² in 3D); true once
    /// divided by rest means (dimensionless).
    pub normalized: bool,
}

impl PropertySeries {
    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }
}

/// Per-subject, per-dimensionality normalization divisors: the mean of each
/// property over the subject's REST window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationFactors {
    pub mean_tb: f64,
    pub mean_wm: f64,
    pub mean_area_left: f64,
    pub mean_area_right: f64,
    pub mean_area: f64,
    pub dimensionality: Dimensionality,
}

fn dist(a: &LandmarkPoint, b: &LandmarkPoint, dim: Dimensionality) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    match dim {
        Dimensionality::D2 => dx.hypot(dy),
        Dimensionality::D3 => {
            let dz = a[2] - b[2];
            (dx * dx + dy * dy + dz * dz).sqrt()
        }
    }
}

fn triangle_area(
    a: &LandmarkPoint,
    b: &LandmarkPoint,
    c: &LandmarkPoint,
    dim: Dimensionality,
) -> f64 {
    let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
    match dim {
        Dimensionality::D2 => (u[0] * v[1] - u[1] * v[0]).abs() / 2.0,
        Dimensionality::D3 => {
            let cx = u[1] * v[2] - u[2] * v[1];
            let cy = u[2] * v[0] - u[0] * v[2];
            let cz = u[0] * v[1] - u[1] * v[0];
            (cx * cx + cy * cy + cz * cz).sqrt() / 2.0
        }
    }
}

/// Computes the five properties of one frame, or `None` when any required
/// landmark is flagged invalid (such frames are dropped from series).
pub fn mouth_properties(
    frame: &LandmarkFrame,
    dim: Dimensionality,
    lm: &MouthLandmarks,
) -> Option<MouthProperties> {
    let needed = [lm.lip_top, lm.lip_bottom, lm.mouth_left, lm.mouth_right];
    if needed
        .iter()
        .any(|&i| i >= frame.points.len() || !frame.is_valid(i))
    {
        return None;
    }
    let top = &frame.points[lm.lip_top];
    let bottom = &frame.points[lm.lip_bottom];
    let left = &frame.points[lm.mouth_left];
    let right = &frame.points[lm.mouth_right];

    let area_left = triangle_area(top, bottom, left, dim);
    let area_right = triangle_area(top, bottom, right, dim);
    Some(MouthProperties {
        tb: dist(top, bottom, dim),
        wm: dist(left, right, dim),
        area_left,
        area_right,
        area: area_left + area_right,
    })
}

/// Evaluates [`mouth_properties`] over every usable frame of a trajectory.
pub fn property_series(t: &Trajectory, lm: &MouthLandmarks) -> PropertySeries {
    let mut s = PropertySeries {
        timestamps: Vec::new(),
        tb: Vec::new(),
        wm: Vec::new(),
        area_left: Vec::new(),
        area_right: Vec::new(),
        area: Vec::new(),
        dimensionality: t.dimensionality,
        normalized: false,
    };
    for frame in &t.frames {
        if let Some(p) = mouth_properties(frame, t.dimensionality, lm) {
            s.timestamps.push(frame.timestamp);
            s.tb.push(p.tb);
            s.wm.push(p.wm);
            s.area_left.push(p.area_left);
            s.area_right.push(p.area_right);
            s.area.push(p.area);
        }
    }
    s
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Normalization factors from a REST window trajectory: the arithmetic mean
/// of each property over its valid frames. Every mean must be positive.
pub fn rest_factors(
    rest: &Trajectory,
    lm: &MouthLandmarks,
) -> Result<NormalizationFactors, KinematicsError> {
    let series = property_series(rest, lm);
    rest_factors_from_series(&series)
}

/// Same as [`rest_factors`] but from an already-computed raw series.
pub fn rest_factors_from_series(
    series: &PropertySeries,
) -> Result<NormalizationFactors, KinematicsError> {
    if series.normalized {
        return Err(KinematicsError::AlreadyNormalized);
    }
    if series.len() < 3 {
        return Err(KinematicsError::TooFewSamples {
            got: series.len(),
            need: 3,
        });
    }
    let factors = NormalizationFactors {
        mean_tb: mean(&series.tb),
        mean_wm: mean(&series.wm),
        mean_area_left: mean(&series.area_left),
        mean_area_right: mean(&series.area_right),
        mean_area: mean(&series.area),
        dimensionality: series.dimensionality,
    };
    for (name, value) in [
        ("TB", factors.mean_tb),
        ("WM", factors.mean_wm),
        ("AreaLeft", factors.mean_area_left),
        ("AreaRight", factors.mean_area_right),
        ("Area", factors.mean_area),
    ] {
        if value.is_nan() || value <= 0.0 {
            return Err(KinematicsError::DegenerateRest {
                property: name,
                value,
            });
        }
    }
    Ok(factors)
}

/// Divides each property by its own rest mean, yielding a dimensionless
/// series. The series and factors must share dimensionality.
pub fn normalize(
    series: &PropertySeries,
    f: &NormalizationFactors,
) -> Result<PropertySeries, KinematicsError> {
    if series.normalized {
        return Err(KinematicsError::AlreadyNormalized);
    }
    if series.dimensionality != f.dimensionality {
        return Err(KinematicsError::DimensionalityMismatch {
            series: series.dimensionality,
            factors: f.dimensionality,
        });
    }
    let scale = |xs: &[f64], d: f64| xs.iter().map(|x| x / d).collect::<Vec<_>>();
    Ok(PropertySeries {
        timestamps: series.timestamps.clone(),
        tb: scale(&series.tb, f.mean_tb),
        wm: scale(&series.wm, f.mean_wm),
        area_left: scale(&series.area_left, f.mean_area_left),
        area_right: scale(&series.area_right, f.mean_area_right),
        area: scale(&series.area, f.mean_area),
        dimensionality: series.dimensionality,
        normalized: true,
    })
}

/// First derivative on a possibly uneven grid.
///
/// Interior points use the central difference
/// `(v[i+1] − v[i−1]) / (t[i+1] − t[i−1])`; the endpoints use one-sided
/// differences. The second derivative is this function applied twice, which
/// handles uneven timestamps uniformly; on uniform grids the repeated pass
/// equals the width-2h second-difference stencil and is exact through cubic
/// polynomials at interior points.
pub fn differentiate(values: &[f64], timestamps: &[f64]) -> Result<Vec<f64>, KinematicsError> {
    if values.len() != timestamps.len() {
        return Err(KinematicsError::LengthMismatch {
            left: values.len(),
            right: timestamps.len(),
        });
    }
    let n = values.len();
    if n < 3 {
        return Err(KinematicsError::TooFewSamples { got: n, need: 3 });
    }
    for i in 1..n {
        if timestamps[i] <= timestamps[i - 1] {
            return Err(KinematicsError::NonMonotonicTimestamps { index: i });
        }
    }
    let mut d = Vec::with_capacity(n);
    d.push((values[1] - values[0]) / (timestamps[1] - timestamps[0]));
    for i in 1..n - 1 {
        d.push((values[i + 1] - values[i - 1]) / (timestamps[i + 1] - timestamps[i - 1]));
    }
    d.push((values[n - 1] - values[n - 2]) / (timestamps[n - 1] - timestamps[n - 2]));
    Ok(d)
}

/// Concordance correlation coefficient between two equal-length series,
/// using population (1/n) moments:
///
/// `CCC = 2·cov(x,y) / (var(x) + var(y) + (mean(x) − mean(y))²)`
///
/// Result is in [-1, 1]; 1 means perfect agreement. Errors when both series
/// are constant.
pub fn ccc(x: &[f64], y: &[f64]) -> Result<f64, KinematicsError> {
    if x.len() != y.len() {
        return Err(KinematicsError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let n = x.len();
    if n < 2 {
        return Err(KinematicsError::TooFewSamples { got: n, need: 2 });
    }
    let (mx, my) = (mean(x), mean(y));
    let nf = n as f64;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    let mut cov = 0.0;
    for i in 0..n {
        let dx = x[i] - mx;
        let dy = y[i] - my;
        var_x += dx * dx;
        var_y += dy * dy;
        cov += dx * dy;
    }
    var_x /= nf;
    var_y /= nf;
    cov /= nf;
    if var_x == 0.0 && var_y == 0.0 {
        return Err(KinematicsError::UndefinedCcc);
    }
    let dm = mx - my;
    Ok(2.0 * cov / (var_x + var_y + dm * dm))
}

/// Centered moving average with window 3 (clipped at the ends).
pub fn smooth3(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(1);
            let hi = (i + 2).min(n);
            values[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect()
}

/// Options for feature extraction.
#[derive(Debug, Clone, Copy, Default)]
pub struct FeatureOptions {
    pub landmarks: MouthLandmarks,
    /// Apply [`smooth3`] to the normalized series before any feature is
    /// computed. Off by default.
    pub smooth: bool,
}

/// Minimum usable frames a repetition needs for feature extraction.
pub const MIN_FEATURE_FRAMES: usize = 5;

/// Extracts the 13 features from one repetition trajectory.
///
/// Pipeline per repetition: properties → normalize by rest means → ranges,
/// first/second-derivative extrema of TB and WM, mean and range of Area, and
/// the concordance between the normalized left and right areas. Extrema are
/// taken over the whole window including the one-sided endpoint derivative
/// values.
pub fn extract_features(
    rep: &Trajectory,
    factors: &NormalizationFactors,
    opts: &FeatureOptions,
) -> Result<FeatureVector, KinematicsError> {
    opts.landmarks.validate()?;
    let raw = property_series(rep, &opts.landmarks);
    features_from_series(&raw, factors, opts.smooth)
}

/// Same as [`extract_features`], starting from a raw property series.
pub fn features_from_series(
    raw: &PropertySeries,
    factors: &NormalizationFactors,
    smooth: bool,
) -> Result<FeatureVector, KinematicsError> {
    if raw.len() < MIN_FEATURE_FRAMES {
        return Err(KinematicsError::TooFewSamples {
            got: raw.len(),
            need: MIN_FEATURE_FRAMES,
        });
    }
    let mut series = normalize(raw, factors)?;
    if smooth {
        for channel in [
            &mut series.tb,
            &mut series.wm,
            &mut series.area_left,
            &mut series.area_right,
            &mut series.area,
        ] {
            *channel = smooth3(channel);
        }
    }

    let ts = &series.timestamps;
    let range = |xs: &[f64]| max_of(xs) - min_of(xs);

    let vel_tb = differentiate(&series.tb, ts)?;
    let acc_tb = differentiate(&vel_tb, ts)?;
    let vel_wm = differentiate(&series.wm, ts)?;
    let acc_wm = differentiate(&vel_wm, ts)?;

    Ok(FeatureVector {
        delta_tb: range(&series.tb),
        max_vel_tb: max_of(&vel_tb),
        min_vel_tb: min_of(&vel_tb),
        max_acc_tb: max_of(&acc_tb),
        min_acc_tb: min_of(&acc_tb),
        delta_wm: range(&series.wm),
        max_vel_wm: max_of(&vel_wm),
        min_vel_wm: min_of(&vel_wm),
        max_acc_wm: max_of(&acc_wm),
        min_acc_wm: min_of(&acc_wm),
        mean_area: mean(&series.area),
        delta_area: range(&series.area),
        ccc_area: ccc(&series.area_left, &series.area_right)?,
    })
}

fn max_of(xs: &[f64]) -> f64 {
    xs.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn min_of(xs: &[f64]) -> f64 {
    xs.iter().copied().fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Group, Task};
    use std::f64::consts::PI;

    fn frame_with_mouth(
        timestamp: f64,
        top: [f64; 3],
        bottom: [f64; 3],
        left: [f64; 3],
        right: [f64; 3],
    ) -> LandmarkFrame {
        let mut points = vec![[0.0, 0.0, 0.0]; LANDMARK_COUNT];
        points[landmarks::LIP_TOP] = top;
        points[landmarks::LIP_BOTTOM] = bottom;
        points[landmarks::MOUTH_LEFT] = left;
        points[landmarks::MOUTH_RIGHT] = right;
        LandmarkFrame {
            timestamp,
            points,
            depth: None,
            validity: None,
        }
    }

    #[test]
    fn symmetric_diamond_properties() {
        let f = frame_with_mouth(
            0.0,
            [0.0, 1.0, 0.0],
            [0.0, -1.0, 0.0],
            [-2.0, 0.0, 0.0],
            [2.0, 0.0, 0.0],
        );
        let p = mouth_properties(&f, Dimensionality::D2, &MouthLandmarks::default()).unwrap();
        assert_eq!(p.tb, 2.0);
        assert_eq!(p.wm, 4.0);
        assert_eq!(p.area_left, 2.0);
        assert_eq!(p.area_right, 2.0);
        assert_eq!(p.area, 4.0);
    }

    #[test]
    fn closed_mouth_degenerates_to_zero() {
        let f = frame_with_mouth(
            0.0,
            [1.0, 3.0, 0.0],
            [1.0, 3.0, 0.0],
            [-2.0, 3.0, 0.0],
            [2.0, 3.0, 0.0],
        );
        let p = mouth_properties(&f, Dimensionality::D2, &MouthLandmarks::default()).unwrap();
        assert_eq!(p.tb, 0.0);
        assert_eq!(p.area_left, 0.0);
        assert_eq!(p.area_right, 0.0);
        assert_eq!(p.area, 0.0);
    }

    #[test]
    fn world_space_mouth_in_meters() {
        let f = frame_with_mouth(
            0.0,
            [0.0, 0.01, 0.40],
            [0.0, -0.01, 0.40],
            [-0.02, 0.0, 0.40],
            [0.02, 0.0, 0.40],
        );
        let p = mouth_properties(&f, Dimensionality::D3, &MouthLandmarks::default()).unwrap();
        assert!((p.tb - 0.02).abs() < 1e-15);
        assert!((p.wm - 0.04).abs() < 1e-15);
        assert!((p.area - 4e-4).abs() < 1e-15);
    }

    #[test]
    fn invalid_required_landmark_drops_the_frame() {
        let mut f = frame_with_mouth(
            0.0,
            [0.0, 1.0, 0.0],
            [0.0, -1.0, 0.0],
            [-2.0, 0.0, 0.0],
            [2.0, 0.0, 0.0],
        );
        let mut mask = vec![true; LANDMARK_COUNT];
        mask[landmarks::LIP_TOP] = false;
        f.validity = Some(mask);
        assert!(mouth_properties(&f, Dimensionality::D2, &MouthLandmarks::default()).is_none());
    }

    /// TB oscillates as tb0·(1 + amp·sin(2π·rate·t)); everything else fixed.
    fn oscillating_trajectory(
        task: Task,
        tb0: f64,
        amp: f64,
        rate: f64,
        fps: f64,
        duration: f64,
    ) -> Trajectory {
        let n = (duration * fps).round() as usize + 1;
        let frames = (0..n)
            .map(|i| {
                let t = i as f64 / fps;
                let tb = tb0 * (1.0 + amp * (2.0 * PI * rate * t).sin());
                frame_with_mouth(
                    t,
                    [320.0, 240.0 - tb / 2.0, 0.0],
                    [320.0, 240.0 + tb / 2.0, 0.0],
                    [300.0, 240.0, 0.0],
                    [340.0, 240.0, 0.0],
                )
            })
            .collect();
        Trajectory {
            subject_id: "s01".into(),
            group: Group::Hc,
            task,
            dimensionality: Dimensionality::D2,
            frames,
            nominal_fps: fps,
        }
    }

    fn static_rest(tb0: f64) -> Trajectory {
        oscillating_trajectory(Task::Rest, tb0, 0.0, 1.0, 30.0, 6.0)
    }

    #[test]
    fn rest_factors_constant_and_alternating() {
        let rest = static_rest(12.0);
        let f = rest_factors(&rest, &MouthLandmarks::default()).unwrap();
        assert!((f.mean_tb - 12.0).abs() < 1e-12);
        assert!((f.mean_wm - 40.0).abs() < 1e-12);
        // Area = TB·WM/4 per side for the diamond: 12·40/4 = 120 each
        assert!((f.mean_area_left - 120.0).abs() < 1e-9);
        assert!((f.mean_area - 240.0).abs() < 1e-9);

        let mut alternating = PropertySeries {
            timestamps: vec![0.0, 0.1, 0.2, 0.3],
            tb: vec![1.0, 3.0, 1.0, 3.0],
            wm: vec![4.0; 4],
            area_left: vec![2.0; 4],
            area_right: vec![2.0; 4],
            area: vec![4.0; 4],
            dimensionality: Dimensionality::D2,
            normalized: false,
        };
        let f = rest_factors_from_series(&alternating).unwrap();
        assert!((f.mean_tb - 2.0).abs() < 1e-15);

        alternating.tb = vec![0.0; 4];
        let err = rest_factors_from_series(&alternating).unwrap_err();
        assert!(matches!(
            err,
            KinematicsError::DegenerateRest { property: "TB", .. }
        ));
    }

    #[test]
    fn normalize_divides_by_rest_means() {
        let series = PropertySeries {
            timestamps: vec![0.0, 0.1],
            tb: vec![2.0, 4.0],
            wm: vec![3.0, 3.0],
            area_left: vec![1.0, 2.0],
            area_right: vec![1.0, 2.0],
            area: vec![2.0, 4.0],
            dimensionality: Dimensionality::D2,
            normalized: false,
        };
        let f = NormalizationFactors {
            mean_tb: 2.0,
            mean_wm: 3.0,
            mean_area_left: 1.0,
            mean_area_right: 1.0,
            mean_area: 2.0,
            dimensionality: Dimensionality::D2,
        };
        let n = normalize(&series, &f).unwrap();
        assert_eq!(n.tb, vec![1.0, 2.0]);
        assert_eq!(n.wm, vec![1.0, 1.0]);
        assert!(n.normalized);

        let mismatched = NormalizationFactors {
            dimensionality: Dimensionality::D3,
            ..f
        };
        assert!(matches!(
            normalize(&series, &mismatched),
            Err(KinematicsError::DimensionalityMismatch { .. })
        ));
    }

    #[test]
    fn derivative_of_constant_is_zero() {
        let ts: Vec<f64> = (0..30).map(|i| i as f64 / 30.0).collect();
        let d = differentiate(&vec![5.0; 30], &ts).unwrap();
        assert!(d.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn derivative_of_linear_ramp_is_one_everywhere() {
        let ts: Vec<f64> = (0..30).map(|i| i as f64 / 30.0).collect();
        let d = differentiate(&ts.clone(), &ts).unwrap();
        for v in d {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn derivative_of_sine_peaks_near_angular_frequency() {
        let fps = 30.0;
        let ts: Vec<f64> = (0..=60).map(|i| i as f64 / fps).collect();
        let xs: Vec<f64> = ts.iter().map(|t| (2.0 * PI * t).sin()).collect();
        let d = differentiate(&xs, &ts).unwrap();
        let peak = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert!((peak - 2.0 * PI).abs() / (2.0 * PI) < 0.01, "peak {peak}");
    }

    #[test]
    fn repeated_differentiation_is_exact_for_quadratics_inside() {
        // v = 3t² - 2t + 1 on a uniform grid: second derivative is 6
        let ts: Vec<f64> = (0..40).map(|i| i as f64 / 30.0).collect();
        let vs: Vec<f64> = ts.iter().map(|t| 3.0 * t * t - 2.0 * t + 1.0).collect();
        let vel = differentiate(&vs, &ts).unwrap();
        let acc = differentiate(&vel, &ts).unwrap();
        for (i, a) in acc.iter().enumerate().take(38).skip(2) {
            assert!((a - 6.0).abs() < 1e-9, "acc[{i}] = {a}");
        }
        // matches the direct width-2h stencil (v[i+2] - 2v[i] + v[i-2]) / 4h²
        let h = 1.0 / 30.0;
        for i in 2..38 {
            let stencil = (vs[i + 2] - 2.0 * vs[i] + vs[i - 2]) / (4.0 * h * h);
            assert!((acc[i] - stencil).abs() < 1e-9);
        }
    }

    #[test]
    fn derivative_rejects_short_or_unsorted_input() {
        assert!(matches!(
            differentiate(&[1.0, 2.0], &[0.0, 0.1]),
            Err(KinematicsError::TooFewSamples { .. })
        ));
        assert!(matches!(
            differentiate(&[1.0, 2.0, 3.0], &[0.0, 0.2, 0.1]),
            Err(KinematicsError::NonMonotonicTimestamps { index: 2 })
        ));
    }

    #[test]
    fn ccc_identity_reversal_and_shift() {
        let x = vec![-1.0, 0.5, 2.0, -1.5];
        assert!((ccc(&x, &x).unwrap() - 1.0).abs() < 1e-15);

        let zero_mean = vec![-1.0, 1.0];
        let neg: Vec<f64> = zero_mean.iter().map(|v| -v).collect();
        assert!((ccc(&zero_mean, &neg).unwrap() + 1.0).abs() < 1e-15);

        // var = 1, shift c = 1: 2σ²/(2σ² + c²) = 2/3 exactly
        let shifted: Vec<f64> = zero_mean.iter().map(|v| v + 1.0).collect();
        assert!((ccc(&zero_mean, &shifted).unwrap() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn ccc_undefined_for_two_constants() {
        assert!(matches!(
            ccc(&[2.0, 2.0, 2.0], &[3.0, 3.0, 3.0]),
            Err(KinematicsError::UndefinedCcc)
        ));
    }

    #[test]
    fn sinusoid_features_match_analytics() {
        let (amp, rate, fps) = (0.5, 1.0, 30.0);
        let rep = oscillating_trajectory(Task::Bbp, 10.0, amp, rate, fps, 2.0);
        let rest = static_rest(10.0);
        let factors = rest_factors(&rest, &MouthLandmarks::default()).unwrap();
        let f = extract_features(&rep, &factors, &FeatureOptions::default()).unwrap();

        let omega = 2.0 * PI * rate;
        assert!(
            (f.delta_tb - 2.0 * amp).abs() / (2.0 * amp) < 0.01,
            "delta {}",
            f.delta_tb
        );
        assert!((f.max_vel_tb - amp * omega).abs() / (amp * omega) < 0.02);
        assert!((f.min_vel_tb + amp * omega).abs() / (amp * omega) < 0.02);
        assert!((f.max_acc_tb - amp * omega * omega).abs() / (amp * omega * omega) < 0.05);
        assert!((f.min_acc_tb + amp * omega * omega).abs() / (amp * omega * omega) < 0.05);
        // WM is static, left and right areas stay proportional
        assert!(f.delta_wm.abs() < 1e-9);
        assert!((f.ccc_area - 1.0).abs() < 1e-9);
        // Area ∝ TB here, so its normalized mean is the mean of 1 + amp·sin
        assert!((f.mean_area - 1.0).abs() < 0.01);
    }

    #[test]
    fn constant_repetition_surfaces_undefined_ccc() {
        let rep = oscillating_trajectory(Task::Bbp, 10.0, 0.0, 1.0, 30.0, 2.0);
        let rest = static_rest(10.0);
        let factors = rest_factors(&rest, &MouthLandmarks::default()).unwrap();
        let err = extract_features(&rep, &factors, &FeatureOptions::default()).unwrap_err();
        assert!(matches!(err, KinematicsError::UndefinedCcc));
    }

    #[test]
    fn symmetric_motion_has_unit_area_concordance() {
        let rep = oscillating_trajectory(Task::BigSmile, 8.0, 0.3, 1.5, 30.0, 2.0);
        let rest = static_rest(8.0);
        let factors = rest_factors(&rest, &MouthLandmarks::default()).unwrap();
        let f = extract_features(&rep, &factors, &FeatureOptions::default()).unwrap();
        assert!((f.ccc_area - 1.0).abs() < 1e-9);
    }

    #[test]
    fn too_few_frames_is_an_error() {
        let mut rep = oscillating_trajectory(Task::Bbp, 10.0, 0.5, 1.0, 30.0, 2.0);
        rep.frames.truncate(4);
        let factors = rest_factors(&static_rest(10.0), &MouthLandmarks::default()).unwrap();
        assert!(matches!(
            extract_features(&rep, &factors, &FeatureOptions::default()),
            Err(KinematicsError::TooFewSamples { got: 4, need: 5 })
        ));
    }

    #[test]
    fn smoothing_shrinks_derivative_extrema() {
        let rep = oscillating_trajectory(Task::Bbp, 10.0, 0.5, 1.0, 30.0, 2.0);
        let factors = rest_factors(&static_rest(10.0), &MouthLandmarks::default()).unwrap();
        let plain = extract_features(&rep, &factors, &FeatureOptions::default()).unwrap();
        let smoothed = extract_features(
            &rep,
            &factors,
            &FeatureOptions {
                smooth: true,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(smoothed.max_vel_tb < plain.max_vel_tb);
        assert!(smoothed.max_vel_tb > 0.8 * plain.max_vel_tb);
    }

    #[test]
    fn smooth3_preserves_length_and_constants() {
        assert_eq!(smooth3(&[2.0, 2.0, 2.0, 2.0]), vec![2.0; 4]);
        let s = smooth3(&[0.0, 3.0, 0.0]);
        assert_eq!(s.len(), 3);
        assert!((s[1] - 1.0).abs() < 1e-15);
        assert!((s[0] - 1.5).abs() < 1e-15);
    }

    #[test]
    fn landmark_config_validation() {
        assert!(MouthLandmarks::default().validate().is_ok());
        let dup = MouthLandmarks {
            lip_top: 51,
            lip_bottom: 51,
            mouth_left: 48,
            mouth_right: 54,
        };
        assert!(dup.validate().is_err());
        let oob = MouthLandmarks {
            lip_top: 99,
            ..MouthLandmarks::default()
        };
        assert!(oob.validate().is_err());
    }
}
