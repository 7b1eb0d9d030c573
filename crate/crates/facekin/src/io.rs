//! On-disk formats: landmark streams, intrinsics, annotations, cohort
//! manifests, feature tables and SMD reports.
//!
//! Frozen interchange formats:
//!
//! * **Landmark stream** — line-delimited JSON, one frame per line:
//!   `{"t": <seconds>, "pts": [[u, v] x 68], "z": [<meters> x 68]?, "valid": [<bool> x 68]?}`.
//!   Depth of exactly 0 means "no reading". Streams are always pixel-space;
//!   3D trajectories exist only in memory as reconstruction output.
//! * **Intrinsics** — a single JSON object
//!   `{"fx", "fy", "cx", "cy", "width", "height"}`.
//! * **Annotations** — line-delimited JSON records
//!   `{"task", "repetition_index", "start", "end"}`.
//! * **Cohort manifest** — JSON object `{"entries": [...]}`, one entry per
//!   (subject, task) recording.
//! * **Feature table** — comma-delimited text, header
//!   `subject_id,group,task,dimensionality,repetition` followed by the 13
//!   feature columns in canonical order; numbers carry 6 significant digits.
//! * **SMD report** — either a delimited table mirroring the published
//!   layout (3D and 2D side by side per task/feature) or a structured JSON
//!   array of the underlying rows.
//!
//! Numbers are always rendered locale-independently with a period decimal
//! separator. Parsers return structured errors with line numbers and never
//! panic on arbitrary bytes.

use crate::model::{
    validate_trajectory, CameraIntrinsics, Dimensionality, FeatureVector, Group, LandmarkFrame,
    RepetitionAnnotation, Task, Trajectory, Violation, FEATURE_NAMES, LANDMARK_COUNT,
};
use crate::statistics::SmdRow;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use thiserror::Error;

/// Significant digits used for numeric fields in feature tables.
pub const TABLE_SIG_DIGITS: usize = 6;

/// Parse failure for any of the crate's text formats.
#[derive(Debug, Error)]
pub enum ParseError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: malformed record: {source}")]
    Malformed {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("line {line}: {message}")]
    Schema { line: usize, message: String },
    #[error("{what}: {message}")]
    Invalid { what: &'static str, message: String },
    #[error("validation failed: {}", format_violations(.0))]
    Validation(Vec<Violation>),
}

fn format_violations(violations: &[Violation]) -> String {
    let shown: Vec<String> = violations.iter().take(5).map(|v| v.to_string()).collect();
    let mut s = shown.join("; ");
    if violations.len() > 5 {
        s.push_str(&format!(" (+{} more)", violations.len() - 5));
    }
    s
}

// ---------------------------------------------------------------------------
// Landmark streams
// ---------------------------------------------------------------------------

/// Recording metadata that the landmark-stream format itself does not carry.
#[derive(Debug, Clone)]
pub struct StreamMeta {
    pub subject_id: String,
    pub group: Group,
    pub task: Task,
    pub nominal_fps: f64,
}

#[derive(Serialize, Deserialize)]
struct FrameRecord {
    t: f64,
    pts: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    z: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    valid: Option<Vec<bool>>,
}

/// Parses a line-delimited landmark stream into a validated 2D trajectory.
///
/// Frames keep file order; timestamps must be strictly increasing.
pub fn parse_landmark_stream<R: BufRead>(
    reader: R,
    meta: &StreamMeta,
) -> Result<Trajectory, ParseError> {
    let mut frames = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: FrameRecord =
            serde_json::from_str(&line).map_err(|source| ParseError::Malformed {
                line: line_no,
                source,
            })?;
        if rec.pts.len() != LANDMARK_COUNT {
            return Err(ParseError::Schema {
                line: line_no,
                message: format!(
                    "\"pts\": {} entries, expected {}",
                    rec.pts.len(),
                    LANDMARK_COUNT
                ),
            });
        }
        if let Some(z) = &rec.z {
            if z.len() != LANDMARK_COUNT {
                return Err(ParseError::Schema {
                    line: line_no,
                    message: format!("\"z\": {} entries, expected {}", z.len(), LANDMARK_COUNT),
                });
            }
        }
        if let Some(valid) = &rec.valid {
            if valid.len() != LANDMARK_COUNT {
                return Err(ParseError::Schema {
                    line: line_no,
                    message: format!(
                        "\"valid\": {} entries, expected {}",
                        valid.len(),
                        LANDMARK_COUNT
                    ),
                });
            }
        }
        let mut frame = LandmarkFrame::from_pixels(rec.t, &rec.pts);
        frame.depth = rec.z;
        frame.validity = rec.valid;
        frames.push(frame);
    }

    let trajectory = Trajectory {
        subject_id: meta.subject_id.clone(),
        group: meta.group,
        task: meta.task,
        dimensionality: Dimensionality::D2,
        frames,
        nominal_fps: meta.nominal_fps,
    };
    let violations = validate_trajectory(&trajectory);
    if violations.is_empty() {
        Ok(trajectory)
    } else {
        Err(ParseError::Validation(violations))
    }
}

/// Writes a 2D trajectory in the landmark-stream format.
pub fn write_landmark_stream<W: Write>(t: &Trajectory, mut sink: W) -> std::io::Result<()> {
    if t.dimensionality != Dimensionality::D2 {
        return Err(std::io::Error::new(
            std::io::ErrorKind::InvalidData,
            "landmark streams are pixel-space; cannot serialize a 3D trajectory",
        ));
    }
    for frame in &t.frames {
        let rec = FrameRecord {
            t: frame.timestamp,
            pts: frame.points.iter().map(|p| [p[0], p[1]]).collect(),
            z: frame.depth.clone(),
            valid: frame.validity.clone(),
        };
        serde_json::to_writer(&mut sink, &rec)?;
        sink.write_all(b"\n")?;
    }
    Ok(())
}

/// Reads a landmark stream from a file path.
pub fn read_landmark_file(path: &Path, meta: &StreamMeta) -> Result<Trajectory, ParseError> {
    let file = std::fs::File::open(path)?;
    parse_landmark_stream(BufReader::new(file), meta)
}

// ---------------------------------------------------------------------------
// Intrinsics
// ---------------------------------------------------------------------------

/// Parses and validates a single-record intrinsics file.
pub fn parse_intrinsics<R: BufRead>(reader: R) -> Result<CameraIntrinsics, ParseError> {
    let k: CameraIntrinsics = serde_json::from_reader(reader)
        .map_err(|source| ParseError::Malformed { line: 1, source })?;
    k.validate().map_err(|message| ParseError::Invalid {
        what: "intrinsics",
        message,
    })?;
    Ok(k)
}

pub fn write_intrinsics<W: Write>(k: &CameraIntrinsics, mut sink: W) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut sink, k)?;
    sink.write_all(b"\n")
}

pub fn read_intrinsics_file(path: &Path) -> Result<CameraIntrinsics, ParseError> {
    let file = std::fs::File::open(path)?;
    parse_intrinsics(BufReader::new(file))
}

// ---------------------------------------------------------------------------
// Annotations
// ---------------------------------------------------------------------------

/// Parses line-delimited repetition annotations.
///
/// The result is ordered by repetition index. Windows of the same task must
/// not overlap; indices must be unique. An empty file yields an empty list.
pub fn parse_annotations<R: BufRead>(reader: R) -> Result<Vec<RepetitionAnnotation>, ParseError> {
    let mut anns: Vec<RepetitionAnnotation> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let ann: RepetitionAnnotation =
            serde_json::from_str(&line).map_err(|source| ParseError::Malformed {
                line: line_no,
                source,
            })?;
        if !(ann.start.is_finite() && ann.end.is_finite() && ann.start < ann.end) {
            return Err(ParseError::Schema {
                line: line_no,
                message: format!(
                    "repetition {} has start {} >= end {}",
                    ann.repetition_index, ann.start, ann.end
                ),
            });
        }
        if ann.repetition_index == 0 {
            return Err(ParseError::Schema {
                line: line_no,
                message: "repetition_index must be >= 1".into(),
            });
        }
        anns.push(ann);
    }

    anns.sort_by_key(|a| (a.task, a.repetition_index));
    for pair in anns.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if a.task != b.task {
            continue;
        }
        if a.repetition_index == b.repetition_index {
            return Err(ParseError::Invalid {
                what: "annotations",
                message: format!(
                    "duplicate repetition index {} for task {}",
                    a.repetition_index, a.task
                ),
            });
        }
        if b.start < a.end {
            return Err(ParseError::Invalid {
                what: "annotations",
                message: format!(
                    "repetitions {} and {} overlap ([{}, {}] vs [{}, {}])",
                    a.repetition_index, b.repetition_index, a.start, a.end, b.start, b.end
                ),
            });
        }
    }
    Ok(anns)
}

pub fn write_annotations<W: Write>(
    anns: &[RepetitionAnnotation],
    mut sink: W,
) -> std::io::Result<()> {
    for ann in anns {
        serde_json::to_writer(&mut sink, ann)?;
        sink.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_annotations_file(path: &Path) -> Result<Vec<RepetitionAnnotation>, ParseError> {
    let file = std::fs::File::open(path)?;
    parse_annotations(BufReader::new(file))
}

// ---------------------------------------------------------------------------
// Cohort manifest
// ---------------------------------------------------------------------------

/// One recording in a cohort: where its files live and who it belongs to.
///
/// Paths are interpreted relative to the manifest's own directory unless
/// absolute.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub subject_id: String,
    pub group: Group,
    pub task: Task,
    pub landmark_file: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annotation_file: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intrinsics_file: Option<String>,
    /// The subject's REST recording, source of normalization factors.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rest_file: Option<String>,
    #[serde(default = "default_fps")]
    pub nominal_fps: f64,
}

fn default_fps() -> f64 {
    30.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CohortManifest {
    pub entries: Vec<ManifestEntry>,
}

impl CohortManifest {
    /// Structural checks: unique (subject, task) keys; every non-REST entry
    /// carries annotation and rest files; REST entries carry no annotations.
    pub fn validate(&self) -> Result<(), String> {
        let mut seen = HashSet::new();
        for e in &self.entries {
            if !seen.insert((e.subject_id.clone(), e.task)) {
                return Err(format!(
                    "duplicate entry for subject {} task {}",
                    e.subject_id, e.task
                ));
            }
            if e.task == Task::Rest {
                if e.annotation_file.is_some() {
                    return Err(format!(
                        "REST entry for subject {} must not reference an annotation file",
                        e.subject_id
                    ));
                }
            } else {
                if e.rest_file.is_none() {
                    return Err(format!(
                        "entry for subject {} task {} has no rest_file",
                        e.subject_id, e.task
                    ));
                }
                if e.annotation_file.is_none() {
                    return Err(format!(
                        "entry for subject {} task {} has no annotation_file",
                        e.subject_id, e.task
                    ));
                }
            }
        }
        Ok(())
    }
}

pub fn parse_manifest<R: BufRead>(reader: R) -> Result<CohortManifest, ParseError> {
    let manifest: CohortManifest = serde_json::from_reader(reader)
        .map_err(|source| ParseError::Malformed { line: 1, source })?;
    manifest.validate().map_err(|message| ParseError::Invalid {
        what: "manifest",
        message,
    })?;
    Ok(manifest)
}

pub fn write_manifest<W: Write>(m: &CohortManifest, mut sink: W) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut sink, m)?;
    sink.write_all(b"\n")
}

pub fn read_manifest_file(path: &Path) -> Result<CohortManifest, ParseError> {
    let file = std::fs::File::open(path)?;
    parse_manifest(BufReader::new(file))
}

// ---------------------------------------------------------------------------
// Feature tables
// ---------------------------------------------------------------------------

/// One feature-table row: the 13 features of one repetition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub subject_id: String,
    pub group: Group,
    pub task: Task,
    pub dimensionality: Dimensionality,
    pub repetition: u32,
    pub features: FeatureVector,
}

/// Renders `v` with `sig` significant digits, `%g`-style: plain decimal for
/// moderate magnitudes, scientific notation otherwise.
pub fn format_sig(v: f64, sig: usize) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sig = sig.max(1);
    let exp = v.abs().log10().floor() as i32;
    if exp < -4 || exp >= sig as i32 {
        format!("{:.*e}", sig - 1, v)
    } else {
        let decimals = (sig as i32 - 1 - exp).max(0) as usize;
        format!("{v:.decimals$}")
    }
}

fn table_header() -> String {
    let mut cols = vec![
        "subject_id",
        "group",
        "task",
        "dimensionality",
        "repetition",
    ];
    cols.extend_from_slice(&FEATURE_NAMES);
    cols.join(",")
}

/// Writes a feature table with the frozen header and column order.
///
/// Numeric fields carry [`TABLE_SIG_DIGITS`] significant digits; re-parsing
/// the output reproduces the input to that precision.
pub fn write_feature_table<W: Write>(rows: &[FeatureRow], mut sink: W) -> std::io::Result<()> {
    writeln!(sink, "{}", table_header())?;
    for row in rows {
        for field in [&row.subject_id] {
            if field.contains([',', '\n', '\r', '"']) {
                return Err(std::io::Error::new(
                    std::io::ErrorKind::InvalidData,
                    format!("subject_id {field:?} contains a delimiter"),
                ));
            }
        }
        let values: Vec<String> = row
            .features
            .as_array()
            .iter()
            .map(|&v| format_sig(v, TABLE_SIG_DIGITS))
            .collect();
        writeln!(
            sink,
            "{},{},{},{},{},{}",
            row.subject_id,
            row.group,
            row.task,
            row.dimensionality,
            row.repetition,
            values.join(",")
        )?;
    }
    Ok(())
}

/// Parses a feature table produced by [`write_feature_table`].
pub fn parse_feature_table<R: BufRead>(reader: R) -> Result<Vec<FeatureRow>, ParseError> {
    let expected_header = table_header();
    let mut rows = Vec::new();
    let mut lines = reader.lines().enumerate();

    let header = match lines.next() {
        Some((_, line)) => line?,
        None => {
            return Err(ParseError::Schema {
                line: 1,
                message: "empty file, expected header".into(),
            })
        }
    };
    if header.trim_end() != expected_header {
        return Err(ParseError::Schema {
            line: 1,
            message: format!("unexpected header {:?}", header.trim_end()),
        });
    }

    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 + FEATURE_NAMES.len() {
            return Err(ParseError::Schema {
                line: line_no,
                message: format!(
                    "{} fields, expected {}",
                    fields.len(),
                    5 + FEATURE_NAMES.len()
                ),
            });
        }
        let schema = |message: String| ParseError::Schema {
            line: line_no,
            message,
        };
        let group: Group = fields[1].parse().map_err(schema)?;
        let task: Task = fields[2].parse().map_err(schema)?;
        let dimensionality: Dimensionality = fields[3].parse().map_err(schema)?;
        let repetition: u32 = fields[4]
            .parse()
            .map_err(|e| schema(format!("bad repetition {:?}: {e}", fields[4])))?;
        let mut values = [0.0_f64; 13];
        for (i, value) in values.iter_mut().enumerate() {
            *value = fields[5 + i].parse().map_err(|e| {
                schema(format!(
                    "bad number {:?} in column {}: {e}",
                    fields[5 + i],
                    FEATURE_NAMES[i]
                ))
            })?;
        }
        rows.push(FeatureRow {
            subject_id: fields[0].to_string(),
            group,
            task,
            dimensionality,
            repetition,
            features: FeatureVector::from_array(values),
        });
    }
    Ok(rows)
}

pub fn read_feature_table_file(path: &Path) -> Result<Vec<FeatureRow>, ParseError> {
    let file = std::fs::File::open(path)?;
    parse_feature_table(BufReader::new(file))
}

/// Structured (JSON array) variant of the feature table. Unlike the
/// delimited form this round-trips values exactly.
pub fn write_feature_table_json<W: Write>(rows: &[FeatureRow], mut sink: W) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut sink, rows)?;
    sink.write_all(b"\n")
}

pub fn parse_feature_table_json<R: BufRead>(reader: R) -> Result<Vec<FeatureRow>, ParseError> {
    serde_json::from_reader(reader).map_err(|source| ParseError::Malformed { line: 1, source })
}

// ---------------------------------------------------------------------------
// SMD reports
// ---------------------------------------------------------------------------

/// Output flavor for [`write_smd_report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    /// Delimited table, 3D and 2D columns side by side per (task, feature).
    Delimited,
    /// JSON array of the raw per-dimensionality rows.
    Structured,
}

const REPORT_HEADER: &str = "task,feature,d3_hc,d3_pd,d3_hc_n,d3_pd_n,d3_smd,d3_magnitude,d2_hc,d2_pd,d2_hc_n,d2_pd_n,d2_smd,d2_magnitude";

fn feature_order(name: &str) -> usize {
    FEATURE_NAMES
        .iter()
        .position(|&n| n == name)
        .unwrap_or(FEATURE_NAMES.len())
}

fn mean_sd(mean: f64, sd: f64) -> String {
    format!("{}±{}", format_sig(mean, 4), format_sig(sd, 4))
}

/// Writes the group-statistics report.
///
/// The delimited layout mirrors the published table: one line per
/// (task, feature) with HC/PD summaries, SMD and magnitude class for each
/// dimensionality present. Cells of an absent dimensionality stay empty.
pub fn write_smd_report<W: Write>(
    rows: &[SmdRow],
    mut sink: W,
    format: ReportFormat,
) -> std::io::Result<()> {
    match format {
        ReportFormat::Structured => {
            let mut sorted: Vec<&SmdRow> = rows.iter().collect();
            sorted.sort_by(|a, b| {
                (a.task, feature_order(&a.feature), a.dimensionality).cmp(&(
                    b.task,
                    feature_order(&b.feature),
                    b.dimensionality,
                ))
            });
            serde_json::to_writer_pretty(&mut sink, &sorted)?;
            sink.write_all(b"\n")
        }
        ReportFormat::Delimited => {
            writeln!(sink, "{REPORT_HEADER}")?;
            let mut keys: Vec<(Task, String)> =
                rows.iter().map(|r| (r.task, r.feature.clone())).collect();
            keys.sort_by_key(|(task, feature)| (*task, feature_order(feature)));
            keys.dedup();
            for (task, feature) in keys {
                let find = |dim| {
                    rows.iter()
                        .find(|r| r.task == task && r.feature == feature && r.dimensionality == dim)
                };
                let cells = |row: Option<&SmdRow>| match row {
                    Some(r) => format!(
                        "{},{},{},{},{:.2},{}",
                        mean_sd(r.hc_mean, r.hc_sd),
                        mean_sd(r.pd_mean, r.pd_sd),
                        r.hc_n,
                        r.pd_n,
                        r.smd,
                        r.magnitude
                    ),
                    None => ",,,,,".to_string(),
                };
                writeln!(
                    sink,
                    "{task},{feature},{},{}",
                    cells(find(Dimensionality::D3)),
                    cells(find(Dimensionality::D2))
                )?;
            }
            Ok(())
        }
    }
}
