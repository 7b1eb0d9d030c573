//! Batch command-line front end.
//!
//! One binary, four subcommands:
//!
//! * `extract` — manifest in, feature table out (optionally through 3D
//!   reconstruction);
//! * `analyze` — feature table + manifest in, SMD report out;
//! * `synth` — write a synthetic cohort;
//! * `smd` — effect size from summary statistics.
//!
//! Exit codes are a frozen contract: 0 success, 1 usage, 2 data/validation,
//! 3 I/O. Progress and errors go to standard error; standard output carries
//! data only. Every command is deterministic given its inputs and flags.

use crate::io::{self, ReportFormat};
use crate::kinematics::MouthLandmarks;
use crate::model::Group;
use crate::pipeline::{extract_cohort, DimSelection, ExtractOptions};
use crate::reconstruction::GapPolicy;
use crate::statistics::{
    classify_smd, cohort_analysis, filter_rows, smd_from_summary, Aggregation, RowFilter,
};
use crate::synth::{gen_cohort, CohortParams};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Environment variable holding the default worker count.
pub const JOBS_ENV: &str = "FACEKIN_JOBS";

const EXIT_USAGE: i32 = 1;
const EXIT_DATA: i32 = 2;
const EXIT_IO: i32 = 3;

#[derive(Parser)]
#[command(
    name = "facekin",
    version,
    about = "Orofacial kinematic features and cohort effect sizes from facial-landmark streams"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract per-repetition features for every manifest entry
    Extract(ExtractArgs),
    /// Group-level SMD report from a feature table
    Analyze(AnalyzeArgs),
    /// Generate a synthetic cohort
    Synth(SynthArgs),
    /// Effect size from summary statistics
    Smd(SmdArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum DimArg {
    #[value(name = "2d")]
    D2,
    #[value(name = "3d")]
    D3,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum AggregationArg {
    PerSubject,
    PerRepetition,
}

#[derive(Clone, Copy, ValueEnum)]
enum FilterArg {
    All,
    MediumLarge,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Delimited,
    Structured,
}

#[derive(Args)]
struct ExtractArgs {
    /// Cohort manifest
    #[arg(long)]
    manifest: PathBuf,
    /// Landmark space to extract features in
    #[arg(long, value_enum, default_value = "both")]
    dim: DimArg,
    /// Smooth normalized series (centered moving average, window 3)
    #[arg(long)]
    smooth: bool,
    /// Longest missing-depth run bridged by interpolation (frames)
    #[arg(long, default_value_t = 5)]
    gap_max: usize,
    /// Abort a recording when more than this fraction of frames is invalid
    #[arg(long, default_value_t = 0.2)]
    max_invalid: f64,
    /// REST window length in seconds
    #[arg(long, default_value_t = 5.0)]
    rest_window: f64,
    /// Landmark indices of the mouth measurements (0-based)
    #[arg(long, default_value_t = crate::model::landmarks::LIP_TOP)]
    lip_top: usize,
    #[arg(long, default_value_t = crate::model::landmarks::LIP_BOTTOM)]
    lip_bottom: usize,
    #[arg(long, default_value_t = crate::model::landmarks::MOUTH_LEFT)]
    mouth_left: usize,
    #[arg(long, default_value_t = crate::model::landmarks::MOUTH_RIGHT)]
    mouth_right: usize,
    /// Worker threads (default: FACEKIN_JOBS or all cores)
    #[arg(long)]
    jobs: Option<usize>,
    /// Output file (standard output when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Feature table produced by `extract`
    #[arg(long)]
    features: PathBuf,
    /// Cohort manifest (cross-checks subject/group assignments)
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, value_enum, default_value = "per-subject")]
    aggregation: AggregationArg,
    /// Row filter; medium-large reproduces the published inclusion rule
    #[arg(long, value_enum, default_value = "all")]
    filter: FilterArg,
    #[arg(long, value_enum, default_value = "delimited")]
    format: FormatArg,
    /// Output file (standard output when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    /// Cohort parameters (JSON); defaults mirror the 12 HC / 8 PD layout
    #[arg(long)]
    params: Option<PathBuf>,
    /// Overrides the seed from the params file
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SmdArgs {
    #[arg(long)]
    mu1: f64,
    #[arg(long)]
    sd1: f64,
    #[arg(long)]
    n1: usize,
    #[arg(long)]
    mu2: f64,
    #[arg(long)]
    sd2: f64,
    #[arg(long)]
    n2: usize,
}

struct CliError {
    code: i32,
    message: String,
}

impl CliError {
    fn data(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_DATA,
            message: message.into(),
        }
    }

    fn io(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_IO,
            message: message.into(),
        }
    }

    fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn from_parse(path: &Path, e: io::ParseError) -> Self {
        match e {
            io::ParseError::Io(source) => CliError::io(format!("{}: {source}", path.display())),
            other => CliError::data(format!("{}: {other}", path.display())),
        }
    }
}

/// Parses the process arguments, runs the selected command and returns the
/// process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Extract(args) => cmd_extract(args),
        Command::Analyze(args) => cmd_analyze(args),
        Command::Synth(args) => cmd_synth(args),
        Command::Smd(args) => cmd_smd(args),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    match out {
        None => Ok(Box::new(std::io::stdout().lock())),
        Some(path) => {
            let file = std::fs::File::create(path)
                .map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
            Ok(Box::new(std::io::BufWriter::new(file)))
        }
    }
}

fn thread_pool(jobs: Option<usize>) -> Result<rayon::ThreadPool, CliError> {
    let jobs = jobs.or_else(|| std::env::var(JOBS_ENV).ok().and_then(|v| v.parse().ok()));
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::usage(format!("cannot build thread pool: {e}")))
}

fn cmd_extract(args: ExtractArgs) -> Result<(), CliError> {
    let manifest = io::read_manifest_file(&args.manifest)
        .map_err(|e| CliError::from_parse(&args.manifest, e))?;
    let base = args
        .manifest
        .parent()
        .unwrap_or_else(|| Path::new("."))
        .to_path_buf();

    let landmarks = MouthLandmarks {
        lip_top: args.lip_top,
        lip_bottom: args.lip_bottom,
        mouth_left: args.mouth_left,
        mouth_right: args.mouth_right,
    };
    landmarks
        .validate()
        .map_err(|e| CliError::usage(e.to_string()))?;
    if !(args.max_invalid >= 0.0 && args.max_invalid <= 1.0) {
        return Err(CliError::usage(format!(
            "--max-invalid {} outside [0, 1]",
            args.max_invalid
        )));
    }
    let opts = ExtractOptions {
        dims: match args.dim {
            DimArg::D2 => DimSelection::D2,
            DimArg::D3 => DimSelection::D3,
            DimArg::Both => DimSelection::Both,
        },
        smooth: args.smooth,
        landmarks,
        gap_policy: GapPolicy {
            max_gap: args.gap_max,
            max_invalid_fraction: args.max_invalid,
        },
        rest_window: args.rest_window,
    };

    let pool = thread_pool(args.jobs)?;
    let report = pool.install(|| extract_cohort(&manifest, &base, &opts));

    eprintln!(
        "extracted {} row(s) from {} entr(ies), {} error(s)",
        report.rows.len(),
        manifest
            .entries
            .iter()
            .filter(|e| e.task != crate::model::Task::Rest)
            .count(),
        report.errors.len()
    );
    if !report.errors.is_empty() {
        for e in &report.errors {
            eprintln!("  {e}");
        }
        let code = if report.errors.iter().any(|e| e.is_io()) {
            EXIT_IO
        } else {
            EXIT_DATA
        };
        return Err(CliError {
            code,
            message: format!("{} entr(ies) failed", report.errors.len()),
        });
    }

    let mut out = sink(&args.out)?;
    io::write_feature_table(&report.rows, &mut out)
        .and_then(|()| out.flush())
        .map_err(|e| CliError::io(e.to_string()))
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<(), CliError> {
    let rows = io::read_feature_table_file(&args.features)
        .map_err(|e| CliError::from_parse(&args.features, e))?;
    let manifest = io::read_manifest_file(&args.manifest)
        .map_err(|e| CliError::from_parse(&args.manifest, e))?;

    let groups: HashMap<&str, Group> = manifest
        .entries
        .iter()
        .map(|e| (e.subject_id.as_str(), e.group))
        .collect();
    for row in &rows {
        match groups.get(row.subject_id.as_str()) {
            None => {
                return Err(CliError::data(format!(
                    "subject {} appears in the feature table but not in the manifest",
                    row.subject_id
                )))
            }
            Some(&g) if g != row.group => {
                return Err(CliError::data(format!(
                    "subject {} is {} in the feature table but {} in the manifest",
                    row.subject_id, row.group, g
                )))
            }
            _ => {}
        }
    }

    let aggregation = match args.aggregation {
        AggregationArg::PerSubject => Aggregation::PerSubject,
        AggregationArg::PerRepetition => Aggregation::PerRepetition,
    };
    let analysis =
        cohort_analysis(&rows, aggregation).map_err(|e| CliError::data(e.to_string()))?;
    let filtered = filter_rows(
        analysis,
        match args.filter {
            FilterArg::All => RowFilter::All,
            FilterArg::MediumLarge => RowFilter::MediumLarge,
        },
    );
    let format = match args.format {
        FormatArg::Delimited => ReportFormat::Delimited,
        FormatArg::Structured => ReportFormat::Structured,
    };
    let mut out = sink(&args.out)?;
    io::write_smd_report(&filtered, &mut out, format)
        .and_then(|()| out.flush())
        .map_err(|e| CliError::io(e.to_string()))
}

fn cmd_synth(args: SynthArgs) -> Result<(), CliError> {
    let mut params = match &args.params {
        None => CohortParams::default(),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?
        }
    };
    if let Some(seed) = args.seed {
        params.seed = seed;
    }
    params
        .validate()
        .map_err(|e| CliError::data(e.to_string()))?;

    let manifest_path = gen_cohort(&params, &args.out_dir).map_err(|e| match e {
        crate::synth::SynthError::Io { .. } => CliError::io(e.to_string()),
        other => CliError::data(other.to_string()),
    })?;
    eprintln!(
        "wrote {} subject(s) x {} task(s), seed {}",
        params.n_hc + params.n_pd,
        params.tasks.len(),
        params.seed
    );
    println!("{}", manifest_path.display());
    Ok(())
}

fn cmd_smd(args: SmdArgs) -> Result<(), CliError> {
    let line = smd_line(args.mu1, args.sd1, args.n1, args.mu2, args.sd2, args.n2)
        .map_err(CliError::data)?;
    println!("{line}");
    Ok(())
}

/// Formats the one-line `smd` output: `SMD=<v> class=<c>`.
pub fn smd_line(
    mu1: f64,
    sd1: f64,
    n1: usize,
    mu2: f64,
    sd2: f64,
    n2: usize,
) -> Result<String, String> {
    let value = smd_from_summary(mu1, sd1, n1, mu2, sd2, n2).map_err(|e| e.to_string())?;
    Ok(format!("SMD={value:.2} class={}", classify_smd(value)))
}
