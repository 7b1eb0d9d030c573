//! Group-level analysis: per-subject aggregation, standardized mean
//! difference (SMD), magnitude classification and report rows.
//!
//! The SMD between two groups is the difference of means over the pooled
//! sample standard deviation:
//!
//! `SMD = (μ₁ − μ₂) / sqrt(((n₁−1)s₁² + (n₂−1)s₂²) / (n₁ + n₂ − 2))`
//!
//! with s the sample (1/(n−1)) standard deviation, consistent with the
//! (n−1) weights of the pooled term. Group 1 is always HC, group 2 PD.
//! |SMD| < 0.5 counts as small, 0.5 ≤ |SMD| < 0.8 as medium and
//! |SMD| ≥ 0.8 as large.

use crate::io::FeatureRow;
use crate::model::{Dimensionality, Group, Task, FEATURE_NAMES};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("group has {got} element(s), need at least {need}")]
    GroupTooSmall { got: usize, need: usize },
    #[error("degenerate groups: pooled variance is zero{}", fmt_context(.context))]
    DegenerateGroups { context: Option<String> },
    #[error("task {task} has {got} {unit} in group {group}, need at least 2")]
    InsufficientGroup {
        task: Task,
        group: Group,
        got: usize,
        unit: &'static str,
    },
}

fn fmt_context(context: &Option<String>) -> String {
    match context {
        Some(c) => format!(" ({c})"),
        None => String::new(),
    }
}

/// Effect-size magnitude class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Magnitude {
    Small,
    Medium,
    Large,
}

impl fmt::Display for Magnitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Magnitude::Small => "small",
            Magnitude::Medium => "medium",
            Magnitude::Large => "large",
        })
    }
}

/// Classifies an SMD value by magnitude of |v|; breakpoints at exactly 0.5
/// and 0.8.
pub fn classify_smd(v: f64) -> Magnitude {
    let a = v.abs();
    if a < 0.5 {
        Magnitude::Small
    } else if a < 0.8 {
        Magnitude::Medium
    } else {
        Magnitude::Large
    }
}

fn sample_mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// SMD between two groups of raw values (group 1 minus group 2).
pub fn smd(g1: &[f64], g2: &[f64]) -> Result<f64, StatsError> {
    for g in [g1, g2] {
        if g.len() < 2 {
            return Err(StatsError::GroupTooSmall {
                got: g.len(),
                need: 2,
            });
        }
    }
    let (m1, s1) = sample_mean_sd(g1);
    let (m2, s2) = sample_mean_sd(g2);
    smd_from_summary(m1, s1, g1.len(), m2, s2, g2.len())
}

/// SMD evaluated directly from summary statistics.
pub fn smd_from_summary(
    mu1: f64,
    sd1: f64,
    n1: usize,
    mu2: f64,
    sd2: f64,
    n2: usize,
) -> Result<f64, StatsError> {
    if n1 < 2 || n2 < 2 {
        return Err(StatsError::GroupTooSmall {
            got: n1.min(n2),
            need: 2,
        });
    }
    let (n1f, n2f) = (n1 as f64, n2 as f64);
    let pooled_var = ((n1f - 1.0) * sd1 * sd1 + (n2f - 1.0) * sd2 * sd2) / (n1f + n2f - 2.0);
    if pooled_var.is_nan() || pooled_var <= 0.0 {
        return Err(StatsError::DegenerateGroups { context: None });
    }
    Ok((mu1 - mu2) / pooled_var.sqrt())
}

/// Per-(task, feature, dimensionality) group statistics and effect size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmdRow {
    pub task: Task,
    /// One of [`FEATURE_NAMES`].
    pub feature: String,
    pub dimensionality: Dimensionality,
    pub hc_mean: f64,
    pub hc_sd: f64,
    pub hc_n: usize,
    pub pd_mean: f64,
    pub pd_sd: f64,
    pub pd_n: usize,
    pub smd: f64,
    pub magnitude: Magnitude,
}

/// How repetition rows are pooled before computing group statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Aggregation {
    /// Average each subject's repetitions first; subjects are the
    /// statistical unit (default — repetitions are not independent).
    #[default]
    PerSubject,
    /// Pool every repetition as an independent observation.
    PerRepetition,
}

/// Which rows a report keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RowFilter {
    #[default]
    All,
    /// Keep a (task, feature) only when some dimensionality reached at
    /// least a medium difference — the published table's inclusion rule.
    MediumLarge,
}

/// Group comparison for every (task, feature, dimensionality) present in
/// `rows`. HC is group 1, PD group 2.
///
/// Under [`Aggregation::PerSubject`] each subject contributes the mean of
/// their repetitions; under [`Aggregation::PerRepetition`] every repetition
/// counts. Each group needs at least two units for every (task,
/// dimensionality) analyzed.
pub fn cohort_analysis(
    rows: &[FeatureRow],
    aggregation: Aggregation,
) -> Result<Vec<SmdRow>, StatsError> {
    // (task, dim) -> (subject, group) -> list of feature arrays
    type SubjectCells = BTreeMap<(String, Group), Vec<[f64; 13]>>;
    let mut cells: BTreeMap<(Task, Dimensionality), SubjectCells> = BTreeMap::new();
    for row in rows {
        cells
            .entry((row.task, row.dimensionality))
            .or_default()
            .entry((row.subject_id.clone(), row.group))
            .or_default()
            .push(row.features.as_array());
    }

    let mut out = Vec::new();
    for ((task, dim), subjects) in cells {
        for (fi, name) in FEATURE_NAMES.iter().enumerate() {
            let mut hc = Vec::new();
            let mut pd = Vec::new();
            for ((_, group), reps) in &subjects {
                let values = reps.iter().map(|a| a[fi]);
                let push_to = |v: f64, hc: &mut Vec<f64>, pd: &mut Vec<f64>| match group {
                    Group::Hc => hc.push(v),
                    Group::Pd => pd.push(v),
                };
                match aggregation {
                    Aggregation::PerSubject => {
                        let m = values.clone().sum::<f64>() / reps.len() as f64;
                        push_to(m, &mut hc, &mut pd);
                    }
                    Aggregation::PerRepetition => {
                        for v in values {
                            push_to(v, &mut hc, &mut pd);
                        }
                    }
                }
            }
            let unit = match aggregation {
                Aggregation::PerSubject => "subject(s)",
                Aggregation::PerRepetition => "repetition(s)",
            };
            if hc.len() < 2 {
                return Err(StatsError::InsufficientGroup {
                    task,
                    group: Group::Hc,
                    got: hc.len(),
                    unit,
                });
            }
            if pd.len() < 2 {
                return Err(StatsError::InsufficientGroup {
                    task,
                    group: Group::Pd,
                    got: pd.len(),
                    unit,
                });
            }
            let (hc_mean, hc_sd) = sample_mean_sd(&hc);
            let (pd_mean, pd_sd) = sample_mean_sd(&pd);
            let smd_value = smd_from_summary(hc_mean, hc_sd, hc.len(), pd_mean, pd_sd, pd.len())
                .map_err(|e| match e {
                    StatsError::DegenerateGroups { .. } => StatsError::DegenerateGroups {
                        context: Some(format!("task {task}, feature {name}, {dim}")),
                    },
                    other => other,
                })?;
            out.push(SmdRow {
                task,
                feature: (*name).to_string(),
                dimensionality: dim,
                hc_mean,
                hc_sd,
                hc_n: hc.len(),
                pd_mean,
                pd_sd,
                pd_n: pd.len(),
                smd: smd_value,
                magnitude: classify_smd(smd_value),
            });
        }
    }
    Ok(out)
}

/// Applies the report inclusion rule to analysis rows.
pub fn filter_rows(rows: Vec<SmdRow>, filter: RowFilter) -> Vec<SmdRow> {
    match filter {
        RowFilter::All => rows,
        RowFilter::MediumLarge => {
            let keep: std::collections::HashSet<(Task, String)> = rows
                .iter()
                .filter(|r| r.magnitude >= Magnitude::Medium)
                .map(|r| (r.task, r.feature.clone()))
                .collect();
            rows.into_iter()
                .filter(|r| keep.contains(&(r.task, r.feature.clone())))
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FeatureVector;

    #[test]
    fn identical_groups_give_zero() {
        let g = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(smd(&g, &g).unwrap(), 0.0);
    }

    #[test]
    fn unit_pooled_sd_gives_mean_difference() {
        // both groups have sample sd exactly 1
        let g1 = [1.0, 1.0, 2.0, 3.0, 3.0]; // mean 2
        let g2 = [0.0, 0.0, 1.0, 2.0, 2.0]; // mean 1
        assert!((smd(&g1, &g2).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn published_summary_spot_checks() {
        // max velocity TB, 2D
        let v = smd_from_summary(19.2, 6.2, 12, 14.1, 4.7, 8).unwrap();
        assert!((v - 0.90).abs() < 0.01, "{v}");
        // CCC area, BIGSMILE 2D
        let v = smd_from_summary(0.8, 0.2, 12, 0.5, 0.3, 8).unwrap();
        assert!((v - 1.23).abs() < 0.01, "{v}");
        // delta TB, 3D, 12/8 convention
        let v = smd_from_summary(1.7, 0.9, 12, 1.1, 0.3, 8).unwrap();
        assert!((v - 0.82).abs() < 0.01, "{v}");
        // identical summaries
        assert_eq!(smd_from_summary(3.2, 0.4, 10, 3.2, 0.4, 10).unwrap(), 0.0);
    }

    #[test]
    fn degenerate_and_small_groups_error() {
        assert!(matches!(
            smd_from_summary(1.0, 0.0, 5, 2.0, 0.0, 5),
            Err(StatsError::DegenerateGroups { .. })
        ));
        assert!(matches!(
            smd(&[1.0], &[1.0, 2.0]),
            Err(StatsError::GroupTooSmall { got: 1, .. })
        ));
    }

    #[test]
    fn classification_breakpoints() {
        assert_eq!(classify_smd(0.4999), Magnitude::Small);
        assert_eq!(classify_smd(0.5), Magnitude::Medium);
        assert_eq!(classify_smd(0.7999), Magnitude::Medium);
        assert_eq!(classify_smd(0.8), Magnitude::Large);
        assert_eq!(classify_smd(0.90), Magnitude::Large);
        assert_eq!(classify_smd(-0.9), Magnitude::Large);
        assert_eq!(classify_smd(0.0), Magnitude::Small);
    }

    fn row(subject: &str, group: Group, rep: u32, value: f64) -> FeatureRow {
        FeatureRow {
            subject_id: subject.into(),
            group,
            task: Task::Bbp,
            dimensionality: Dimensionality::D2,
            repetition: rep,
            features: FeatureVector::from_array([value; 13]),
        }
    }

    #[test]
    fn single_repetition_per_subject_matches_both_aggregations() {
        let rows = vec![
            row("h1", Group::Hc, 1, 2.0),
            row("h2", Group::Hc, 1, 2.5),
            row("h3", Group::Hc, 1, 3.0),
            row("p1", Group::Pd, 1, 1.0),
            row("p2", Group::Pd, 1, 1.5),
        ];
        let a = cohort_analysis(&rows, Aggregation::PerSubject).unwrap();
        let b = cohort_analysis(&rows, Aggregation::PerRepetition).unwrap();
        assert_eq!(a.len(), 13);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.smd, y.smd);
            assert_eq!(x.hc_n, y.hc_n);
        }
    }

    #[test]
    fn per_subject_averages_repetitions_first() {
        let rows = vec![
            row("h1", Group::Hc, 1, 1.0),
            row("h1", Group::Hc, 2, 3.0), // h1 mean 2.0
            row("h2", Group::Hc, 1, 4.0),
            row("p1", Group::Pd, 1, 1.0),
            row("p2", Group::Pd, 1, 2.0),
        ];
        let a = cohort_analysis(&rows, Aggregation::PerSubject).unwrap();
        assert_eq!(a[0].hc_n, 2);
        assert!((a[0].hc_mean - 3.0).abs() < 1e-12); // mean of {2.0, 4.0}
        let b = cohort_analysis(&rows, Aggregation::PerRepetition).unwrap();
        assert_eq!(b[0].hc_n, 3);
    }

    #[test]
    fn insufficient_group_is_an_error() {
        let rows = vec![
            row("h1", Group::Hc, 1, 2.0),
            row("h2", Group::Hc, 1, 2.5),
            row("p1", Group::Pd, 1, 1.0),
        ];
        assert!(matches!(
            cohort_analysis(&rows, Aggregation::PerSubject),
            Err(StatsError::InsufficientGroup {
                group: Group::Pd,
                got: 1,
                ..
            })
        ));
    }

    #[test]
    fn row_count_is_tasks_by_features_by_dims() {
        let mut rows = Vec::new();
        for (subject, group, value) in [
            ("h1", Group::Hc, 2.0),
            ("h2", Group::Hc, 2.2),
            ("p1", Group::Pd, 1.0),
            ("p2", Group::Pd, 1.3),
        ] {
            for task in [Task::Bbp, Task::BigSmile] {
                for dim in [Dimensionality::D2, Dimensionality::D3] {
                    rows.push(FeatureRow {
                        subject_id: subject.into(),
                        group,
                        task,
                        dimensionality: dim,
                        repetition: 1,
                        features: FeatureVector::from_array([value; 13]),
                    });
                }
            }
        }
        let out = cohort_analysis(&rows, Aggregation::PerSubject).unwrap();
        assert_eq!(out.len(), 2 * 13 * 2);
    }

    #[test]
    fn medium_large_filter_keeps_pairs_by_union_over_dims() {
        let mk = |dim, smd_value: f64| SmdRow {
            task: Task::Bbp,
            feature: "delta_tb".into(),
            dimensionality: dim,
            hc_mean: 0.0,
            hc_sd: 1.0,
            hc_n: 12,
            pd_mean: 0.0,
            pd_sd: 1.0,
            pd_n: 8,
            smd: smd_value,
            magnitude: classify_smd(smd_value),
        };
        // 2D large, 3D small: both survive (published inclusion rule)
        let rows = vec![mk(Dimensionality::D2, 0.9), mk(Dimensionality::D3, 0.2)];
        let kept = filter_rows(rows, RowFilter::MediumLarge);
        assert_eq!(kept.len(), 2);

        let rows = vec![mk(Dimensionality::D2, 0.3), mk(Dimensionality::D3, 0.2)];
        assert!(filter_rows(rows, RowFilter::MediumLarge).is_empty());
    }
}
