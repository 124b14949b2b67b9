//! Command-line front end. Every subcommand is deterministic given its flags
//! and input files.

use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::eval::{self, EvalParams, Evaluator, FitOn, L2Normalize, Labeled, Metric};
use crate::io::{self, ReportFormat, TextReport};
use crate::isotropy;
use crate::linalg::Matrix;
use crate::postprocess;
use crate::synth::{self, SynthSpec};

/// Exit code for command-line usage errors.
pub const USAGE_EXIT: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "featpost",
    version,
    about = "Feature postprocessing: mean removal plus projection away from dominating directions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a labeled synthetic feature set with planted offset and spikes.
    Synth(SynthArgs),
    /// Fit a postprocessing model and print a spectrum summary.
    Fit(FitArgs),
    /// Apply a fitted model to a feature file.
    Transform(TransformArgs),
    /// Print a one-line description of a feature set.
    Spectrum(SpectrumArgs),
    /// Report isotropy measures of a feature set.
    Isotropy(IsotropyArgs),
    /// Compare downstream accuracy before and after postprocessing.
    Eval(EvalArgs),
    /// Pair verification accuracy before and after postprocessing.
    Verify(VerifyArgs),
    /// Accuracy and isotropy for every t from 0 to --t-max.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    /// key = value lines (delimited table for sweep)
    Text,
    /// JSON
    Machine,
}

impl From<FormatArg> for ReportFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Text => ReportFormat::Text,
            FormatArg::Machine => ReportFormat::Machine,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EvaluatorArg {
    #[value(name = "nearest_centroid", alias = "nearest-centroid")]
    NearestCentroid,
    #[value(name = "knn")]
    Knn,
    #[value(name = "pair_verify", alias = "pair-verify")]
    PairVerify,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MetricArg {
    Euclidean,
    Cosine,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FitOnArg {
    Train,
    All,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum NormalizeArg {
    None,
    Before,
    After,
}

/// Feature input: an FPF1 file, `-` for stdin, or a `.csv` file.
#[derive(Debug, Args)]
struct InputArgs {
    /// Feature file (FPF1 binary, `-` for stdin, or *.csv)
    #[arg(long)]
    input: PathBuf,
    /// CSV input has a header row
    #[arg(long)]
    has_header: bool,
    /// CSV column holding class labels (header name or zero-based index)
    #[arg(long)]
    label_column: Option<String>,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Feature file to write (`-` for stdout)
    #[arg(long)]
    output: PathBuf,
    /// Label file to write
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(long, default_value_t = 500)]
    n_per_class: usize,
    #[arg(long, default_value_t = 4)]
    n_classes: usize,
    #[arg(long, default_value_t = 32)]
    dim: usize,
    /// Norm of the planted common vector
    #[arg(long, default_value_t = 5.0)]
    offset_norm: f64,
    /// Comma-separated variances of planted dominating directions
    #[arg(long, value_delimiter = ',', default_value = "50,20")]
    spikes: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    base_variance: f64,
    /// Distance between class centroids
    #[arg(long, default_value_t = 6.0)]
    class_sep: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct FitArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Model file to write
    #[arg(long)]
    model: PathBuf,
    /// Number of dominating directions to remove
    #[arg(long, default_value_t = 1)]
    t: usize,
    /// Components PCA may keep (default: feature dimension)
    #[arg(long)]
    pca_dim: Option<usize>,
    #[arg(long, value_enum, default_value = "text")]
    format: FormatArg,
}

#[derive(Debug, Args)]
struct TransformArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Model file produced by `fit`
    #[arg(long)]
    model: PathBuf,
    /// Feature file to write (`-` for stdout)
    #[arg(long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct SpectrumArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Number of leading eigenvalues to report (default: min(10, dim))
    #[arg(long)]
    k: Option<usize>,
    /// Row name (default: input file stem)
    #[arg(long)]
    name: Option<String>,
    /// Report file (default: stdout)
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    format: FormatArg,
}

#[derive(Debug, Args)]
struct IsotropyArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Report file (default: stdout)
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    format: FormatArg,
}

#[derive(Debug, Args)]
struct CommonEvalArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Label file (FPL1); not needed with --label-column
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Components PCA may keep (default: feature dimension)
    #[arg(long)]
    pca_dim: Option<usize>,
    /// Split seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.3)]
    test_fraction: f64,
    /// Rows the model is fitted on
    #[arg(long, value_enum, default_value = "train")]
    fit_on: FitOnArg,
    /// Row L2 normalization relative to postprocessing
    #[arg(long, value_enum, default_value = "none")]
    l2_normalize: NormalizeArg,
    /// Report file (default: stdout)
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    format: FormatArg,
}

#[derive(Debug, Args)]
struct ClassifierArgs {
    #[arg(long, value_enum, default_value = "nearest_centroid")]
    evaluator: EvaluatorArg,
    /// Neighbors for knn
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[arg(long, value_enum, default_value = "euclidean")]
    metric: MetricArg,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[command(flatten)]
    common: CommonEvalArgs,
    #[command(flatten)]
    classifier: ClassifierArgs,
    /// Number of dominating directions to remove
    #[arg(long, default_value_t = 1)]
    t: usize,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: CommonEvalArgs,
    /// Number of dominating directions to remove
    #[arg(long, default_value_t = 1)]
    t: usize,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonEvalArgs,
    #[command(flatten)]
    classifier: ClassifierArgs,
    /// Largest t in the sweep
    #[arg(long, default_value_t = 10)]
    t_max: usize,
}

fn is_stdio(p: &Path) -> bool {
    p.as_os_str() == "-"
}

struct Loaded {
    features: Matrix<f64>,
    labels: Option<Vec<usize>>,
    stem: String,
}

fn load(input: &InputArgs) -> Result<Loaded> {
    let path = &input.input;
    let stem = path.file_stem().map_or_else(
        || "features".to_string(),
        |s| s.to_string_lossy().into_owned(),
    );
    if is_stdio(path) {
        let mut buf = Vec::new();
        std::io::stdin()
            .read_to_end(&mut buf)
            .map_err(|e| Error::io("<stdin>", e))?;
        return Ok(Loaded {
            features: io::decode_features(&buf)?,
            labels: None,
            stem: "stdin".into(),
        });
    }
    let is_csv = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv {
        let c = io::read_csv(path, input.has_header, input.label_column.as_deref())?;
        return Ok(Loaded {
            features: c.features,
            labels: c.labels,
            stem,
        });
    }
    if input.label_column.is_some() {
        return Err(Error::InvalidArgument(
            "--label-column only applies to CSV input".into(),
        ));
    }
    Ok(Loaded {
        features: io::read_features(path)?,
        labels: None,
        stem,
    })
}

fn emit(out: &mut dyn Write, path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) if !is_stdio(p) => std::fs::write(p, bytes).map_err(|e| Error::io(p, e)),
        _ => out.write_all(bytes).map_err(|e| Error::io("<stdout>", e)),
    }
}

fn labeled(common: &CommonEvalArgs) -> Result<Labeled<f64>> {
    let loaded = load(&common.input)?;
    let labels = match (&common.labels, loaded.labels) {
        (Some(p), _) => io::read_labels(p)?,
        (None, Some(l)) => l,
        (None, None) => {
            return Err(Error::InvalidArgument(
                "labels required: pass --labels or a CSV --label-column".into(),
            ))
        }
    };
    Labeled::new(loaded.features, labels)
}

fn params(
    common: &CommonEvalArgs,
    evaluator: Evaluator,
    c: Option<&ClassifierArgs>,
) -> Result<EvalParams> {
    if !(common.test_fraction > 0.0 && common.test_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "--test-fraction must be in (0, 1), got {}",
            common.test_fraction
        )));
    }
    Ok(EvalParams {
        evaluator,
        k: c.map_or(5, |c| c.k),
        metric: match c.map_or(MetricArg::Euclidean, |c| c.metric) {
            MetricArg::Euclidean => Metric::Euclidean,
            MetricArg::Cosine => Metric::Cosine,
        },
        test_fraction: common.test_fraction,
        seed: common.seed,
        fit_on: match common.fit_on {
            FitOnArg::Train => FitOn::Train,
            FitOnArg::All => FitOn::All,
        },
        pca_dim: common.pca_dim,
        l2_normalize: match common.l2_normalize {
            NormalizeArg::None => L2Normalize::None,
            NormalizeArg::Before => L2Normalize::Before,
            NormalizeArg::After => L2Normalize::After,
        },
    })
}

fn evaluator_of(c: &ClassifierArgs) -> Evaluator {
    match c.evaluator {
        EvaluatorArg::NearestCentroid => Evaluator::NearestCentroid,
        EvaluatorArg::Knn => Evaluator::Knn,
        EvaluatorArg::PairVerify => Evaluator::PairVerify,
    }
}

fn execute(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    match cmd {
        Command::Synth(a) => {
            let spec = SynthSpec {
                n_per_class: a.n_per_class,
                n_classes: a.n_classes,
                dim: a.dim,
                offset_norm: a.offset_norm,
                spike_variances: a.spikes,
                base_variance: a.base_variance,
                class_sep: a.class_sep,
                seed: a.seed,
            };
            spec.validate()?;
            if a.labels.as_deref().is_some_and(is_stdio) && is_stdio(&a.output) {
                return Err(Error::InvalidArgument(
                    "features and labels cannot both go to stdout".into(),
                ));
            }
            let (f, labels) = synth::generate(&spec)?;
            emit(out, Some(&a.output), &io::encode_features(&f)?)?;
            if let Some(p) = &a.labels {
                emit(out, Some(p), &io::encode_labels(&labels)?)?;
            }
        }
        Command::Fit(a) => {
            let loaded = load(&a.input)?;
            let f = &loaded.features;
            let pca_dim = a.pca_dim.unwrap_or(f.cols());
            let model = postprocess::fit(f, a.t, pca_dim)?;
            let summary = postprocess::spectrum_summary(f, a.t.max(1).min(f.cols()))?;
            io::write_model(&a.model, &model)?;
            let text = match a.format {
                FormatArg::Text => format!("{}\n", summary.table_row(&loaded.stem)),
                FormatArg::Machine => summary.render(ReportFormat::Machine),
            };
            out.write_all(text.as_bytes())
                .map_err(|e| Error::io("<stdout>", e))?;
        }
        Command::Transform(a) => {
            let model = io::read_model(&a.model)?;
            let loaded = load(&a.input)?;
            let g = postprocess::transform(&loaded.features, &model)?;
            emit(out, Some(&a.output), &io::encode_features(&g)?)?;
        }
        Command::Spectrum(a) => {
            let loaded = load(&a.input)?;
            let k = a.k.unwrap_or(loaded.features.cols().min(10));
            let summary = postprocess::spectrum_summary(&loaded.features, k)?;
            let name = a.name.unwrap_or(loaded.stem);
            let text = match a.format {
                FormatArg::Text => format!("{}\n", summary.table_row(&name)),
                FormatArg::Machine => summary.render(ReportFormat::Machine),
            };
            emit(out, a.output.as_deref(), text.as_bytes())?;
        }
        Command::Isotropy(a) => {
            let loaded = load(&a.input)?;
            let report = isotropy::isotropy_report(&loaded.features)?;
            emit(
                out,
                a.output.as_deref(),
                report.render(a.format.into()).as_bytes(),
            )?;
        }
        Command::Eval(a) => {
            let p = params(&a.common, evaluator_of(&a.classifier), Some(&a.classifier))?;
            let data = labeled(&a.common)?;
            let report = eval::compare(&data, a.t, &p)?;
            emit(
                out,
                a.common.output.as_deref(),
                report.render(a.common.format.into()).as_bytes(),
            )?;
        }
        Command::Verify(a) => {
            let p = params(&a.common, Evaluator::PairVerify, None)?;
            let data = labeled(&a.common)?;
            let report = eval::compare(&data, a.t, &p)?;
            emit(
                out,
                a.common.output.as_deref(),
                report.render(a.common.format.into()).as_bytes(),
            )?;
        }
        Command::Sweep(a) => {
            let p = params(&a.common, evaluator_of(&a.classifier), Some(&a.classifier))?;
            let data = labeled(&a.common)?;
            let pca_dim = p.pca_dim.unwrap_or(data.features.cols());
            let t_max = if a.t_max > pca_dim {
                writeln!(
                    err,
                    "featpost: warning: --t-max {} capped at pca_dim {pca_dim}",
                    a.t_max
                )
                .map_err(|e| Error::io("<stderr>", e))?;
                pca_dim
            } else {
                a.t_max
            };
            let rows = eval::sweep(&data, t_max, &p)?;
            let text = io::render_sweep(&rows, a.common.format.into());
            emit(out, a.common.output.as_deref(), text.as_bytes())?;
        }
    }
    Ok(())
}

/// Parses `argv` (including the program name) and runs the subcommand.
/// Returns the process exit code; diagnostics go to `err`.
pub fn run<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { USAGE_EXIT } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(rendered.as_bytes())
            } else {
                err.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    match execute(cli.command, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "featpost: error: {e}");
            e.exit_code()
        }
    }
}
