//! Batch command-line frontend: ingestion, extraction, splitting, training,
//! evaluation, prediction, descriptor ablation, and fixture generation.
//!
//! Every command prints its fully resolved configuration to standard error
//! before doing any work; data and results go to files or standard output
//! only. Exit codes: 0 success, 1 internal error, 2 usage or input error.

use std::collections::BTreeMap;
use std::ops::Range;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::classify::{
    evaluate, knn_train, load_model, nb_train, save_model, save_report, stratified_split, Metric,
};
use crate::error::{Error, Result};
use crate::features::{
    extract_table, read_csv, write_csv, ExtractionConfig, FeatureTable, FEATURE_LEN, GLCM_BLOCK,
    LBP_BLOCK, LTP_LOWER_BLOCK, LTP_UPPER_BLOCK,
};
use crate::fixture::{generate_fixture, DEFAULT_FIXTURE_SEED};
use crate::glcm::VarianceMode;
use crate::imageio::{ingest_dataset, load_gray, LabeledPatch, PatchSource};

#[derive(Parser)]
#[command(
    name = "texfeat",
    version,
    about = "Joint LBP/LTP/GLCM texture descriptors with KNN and naive-Bayes classification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract feature vectors from a dataset directory or a single image
    Extract(ExtractArgs),
    /// Split a feature CSV into stratified train/test CSVs
    Split(SplitArgs),
    /// Train a classifier on a feature CSV
    Train(TrainArgs),
    /// Evaluate a trained model against a feature CSV
    Evaluate(EvaluateArgs),
    /// Predict the class of a single image
    Predict(PredictArgs),
    /// Compare descriptor blocks (lbp/ltp/glcm/all) on one dataset
    Ablate(AblateArgs),
    /// Generate the bundled synthetic texture corpus
    Fixture(FixtureArgs),
}

#[derive(clap::Args)]
struct ExtractArgs {
    /// Dataset directory (`root/<class>/<images>`) or a single image file
    #[arg(long)]
    input: PathBuf,
    /// Output feature CSV
    #[arg(long)]
    out: PathBuf,
    /// Side length of the square patches cut from each image
    #[arg(long, default_value_t = 128)]
    patch_size: u32,
    /// LTP dead-zone threshold
    #[arg(long, default_value_t = 5)]
    ltp_t: u8,
    /// Gray levels for GLCM quantization
    #[arg(long, default_value_t = 256)]
    glcm_levels: u16,
    /// GLCM pair distance
    #[arg(long, default_value_t = 1)]
    glcm_distance: u32,
    /// Store raw histogram counts instead of frequencies
    #[arg(long, default_value_t = false)]
    raw_histograms: bool,
    /// GLCM variance formula: "paper" or "standard"
    #[arg(long, default_value = "paper")]
    variance_mode: String,
    /// Class label for single-file input (ignored for directories)
    #[arg(long)]
    label: Option<String>,
}

#[derive(clap::Args)]
struct SplitArgs {
    /// Input feature CSV
    #[arg(long)]
    features: PathBuf,
    /// Fraction of each class that goes to the train CSV (ceiling rule)
    #[arg(long, default_value_t = 0.5)]
    train_frac: f64,
    /// Shuffle seed (ChaCha8)
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    out_train: PathBuf,
    #[arg(long)]
    out_test: PathBuf,
}

#[derive(clap::Args)]
struct TrainArgs {
    /// Training feature CSV
    #[arg(long)]
    features: PathBuf,
    /// Classifier kind: "knn" or "nb"
    #[arg(long)]
    model: String,
    /// Neighbor count for knn (odd)
    #[arg(long, default_value_t = 3)]
    k: usize,
    /// Distance for knn: "euclidean" or "manhattan"
    #[arg(long, default_value = "euclidean")]
    metric: String,
    /// Output model JSON
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args)]
struct EvaluateArgs {
    /// Trained model JSON
    #[arg(long)]
    model: PathBuf,
    /// Test feature CSV
    #[arg(long)]
    features: PathBuf,
    /// Output report JSON
    #[arg(long)]
    report: PathBuf,
}

#[derive(clap::Args)]
struct PredictArgs {
    /// Trained model JSON
    #[arg(long)]
    model: PathBuf,
    /// Image to classify (features use the model's extraction config)
    #[arg(long)]
    image: PathBuf,
}

#[derive(clap::Args)]
struct AblateArgs {
    /// Dataset directory (`root/<class>/<images>`)
    #[arg(long)]
    input: PathBuf,
    /// Comma-separated blocks to evaluate: lbp, ltp, glcm, all
    #[arg(long, default_value = "lbp,ltp,glcm,all")]
    blocks: String,
    /// Split seed
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Output comparison JSON
    #[arg(long)]
    report: PathBuf,
}

#[derive(clap::Args)]
struct FixtureArgs {
    /// Directory to create the corpus under
    #[arg(long)]
    out: PathBuf,
    /// Corpus generation seed
    #[arg(long, default_value_t = DEFAULT_FIXTURE_SEED)]
    seed: u64,
}

/// Accuracy of KNN (K=3, euclidean) per descriptor block on one
/// stratified split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblateReport {
    pub seed: u64,
    pub train_fraction: f64,
    pub k: usize,
    pub metric: Metric,
    pub config: ExtractionConfig,
    /// Block name -> test accuracy.
    pub accuracies: BTreeMap<String, f64>,
}

/// Parses the CLI and runs the selected command, mapping errors to the
/// documented exit codes. Library errors are usage/input errors (2); panics
/// are internal errors (1).
pub fn main_with_exit_code() -> i32 {
    let cli = Cli::parse();
    let outcome = std::panic::catch_unwind(|| run(cli.command));
    match outcome {
        Ok(Ok(())) => 0,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            2
        }
        Err(_) => {
            eprintln!("internal error: unexpected panic (this is a bug)");
            1
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Extract(args) => cmd_extract(args),
        Command::Split(args) => cmd_split(args),
        Command::Train(args) => cmd_train(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Predict(args) => cmd_predict(args),
        Command::Ablate(args) => cmd_ablate(args),
        Command::Fixture(args) => cmd_fixture(args),
    }
}

fn config_from_flags(
    ltp_t: u8,
    glcm_levels: u16,
    glcm_distance: u32,
    raw_histograms: bool,
    variance_mode: &str,
) -> Result<ExtractionConfig> {
    Ok(ExtractionConfig {
        ltp_t,
        glcm_levels,
        glcm_distance,
        histogram_normalize: !raw_histograms,
        variance_mode: VarianceMode::from_str(variance_mode)?,
    })
}

fn trace_config(command: &str, fields: &[(&str, String)]) {
    let rendered: Vec<String> = fields.iter().map(|(k, v)| format!("{k}={v}")).collect();
    eprintln!("texfeat {command}: {}", rendered.join(" "));
}

fn cmd_extract(args: ExtractArgs) -> Result<()> {
    let cfg = config_from_flags(
        args.ltp_t,
        args.glcm_levels,
        args.glcm_distance,
        args.raw_histograms,
        &args.variance_mode,
    )?;
    trace_config(
        "extract",
        &[
            ("input", args.input.display().to_string()),
            ("out", args.out.display().to_string()),
            ("patch_size", args.patch_size.to_string()),
            ("ltp_t", cfg.ltp_t.to_string()),
            ("glcm_levels", cfg.glcm_levels.to_string()),
            ("glcm_distance", cfg.glcm_distance.to_string()),
            ("histogram_normalize", cfg.histogram_normalize.to_string()),
            ("variance_mode", cfg.variance_mode.to_string()),
            ("label", args.label.clone().unwrap_or_else(|| "-".into())),
        ],
    );

    let patches: Vec<LabeledPatch> = if args.input.is_dir() {
        let ingest = ingest_dataset(&args.input, args.patch_size)?;
        for warning in &ingest.warnings {
            eprintln!("warning: {warning}");
        }
        if ingest.patches.is_empty() {
            return Err(Error::Dataset(format!(
                "{}: no patches extracted",
                args.input.display()
            )));
        }
        ingest.patches
    } else {
        // single image: the whole file is one sample, no tiling
        let image = load_gray(&args.input)?;
        let label = args.label.clone().ok_or_else(|| {
            Error::Parameter("--label is required for single-file input".into())
        })?;
        vec![LabeledPatch {
            image,
            label,
            source: PatchSource {
                origin: args.input.display().to_string(),
                grid_row: 0,
                grid_col: 0,
            },
        }]
    };

    let table = extract_table(&patches, &cfg)?;
    write_csv(&table, &args.out)?;
    eprintln!("extracted {} rows -> {}", table.len(), args.out.display());
    Ok(())
}

fn cmd_split(args: SplitArgs) -> Result<()> {
    trace_config(
        "split",
        &[
            ("features", args.features.display().to_string()),
            ("train_frac", args.train_frac.to_string()),
            ("seed", args.seed.to_string()),
            ("out_train", args.out_train.display().to_string()),
            ("out_test", args.out_test.display().to_string()),
        ],
    );
    let table = read_csv(&args.features)?;
    let (mut train, mut test) = stratified_split(&table, args.train_frac, args.seed)?;
    for part in [&mut train, &mut test] {
        part.extra_metadata
            .insert("split_seed".into(), args.seed.to_string());
        part.extra_metadata
            .insert("split_train_frac".into(), args.train_frac.to_string());
    }
    write_csv(&train, &args.out_train)?;
    write_csv(&test, &args.out_test)?;
    eprintln!(
        "split {} rows -> {} train, {} test",
        table.len(),
        train.len(),
        test.len()
    );
    Ok(())
}

fn cmd_train(args: TrainArgs) -> Result<()> {
    trace_config(
        "train",
        &[
            ("features", args.features.display().to_string()),
            ("model", args.model.clone()),
            ("k", args.k.to_string()),
            ("metric", args.metric.clone()),
            ("out", args.out.display().to_string()),
        ],
    );
    let table = read_csv(&args.features)?;
    let model = match args.model.as_str() {
        "knn" => knn_train(&table, args.k, Metric::from_str(&args.metric)?)?,
        "nb" => nb_train(&table)?,
        other => {
            return Err(Error::Parameter(format!(
                "unknown model kind {other:?} (expected \"knn\" or \"nb\")"
            )))
        }
    };
    save_model(&model, &args.out)?;
    eprintln!(
        "trained {} on {} rows -> {}",
        model.kind_name(),
        table.len(),
        args.out.display()
    );
    Ok(())
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<()> {
    trace_config(
        "evaluate",
        &[
            ("model", args.model.display().to_string()),
            ("features", args.features.display().to_string()),
            ("report", args.report.display().to_string()),
        ],
    );
    let model = load_model(&args.model)?;
    let table = read_csv(&args.features)?;
    let report = evaluate(&model, &table)?;
    save_report(&report, &args.report)?;
    eprintln!(
        "evaluated {} rows: accuracy {:.4} -> {}",
        table.len(),
        report.accuracy,
        args.report.display()
    );
    Ok(())
}

fn cmd_predict(args: PredictArgs) -> Result<()> {
    trace_config(
        "predict",
        &[
            ("model", args.model.display().to_string()),
            ("image", args.image.display().to_string()),
        ],
    );
    let model = load_model(&args.model)?;
    let image = load_gray(&args.image)?;
    let features = crate::features::extract(&image, &model.config)?;
    let label = model.predict(&features)?;
    println!("{label}");
    Ok(())
}

/// Column ranges of the named descriptor blocks.
pub fn block_range(name: &str) -> Result<Range<usize>> {
    match name {
        "lbp" => Ok(LBP_BLOCK),
        "ltp" => Ok(LTP_UPPER_BLOCK.start..LTP_LOWER_BLOCK.end),
        "glcm" => Ok(GLCM_BLOCK),
        "all" => Ok(0..FEATURE_LEN),
        other => Err(Error::Parameter(format!(
            "unknown block {other:?} (expected lbp, ltp, glcm, or all)"
        ))),
    }
}

/// Runs the shared ablation protocol: one extraction, one stratified split,
/// then KNN (K=3, euclidean) per requested block.
pub fn run_ablation(
    table: &FeatureTable,
    blocks: &[String],
    seed: u64,
) -> Result<AblateReport> {
    const K: usize = 3;
    const TRAIN_FRACTION: f64 = 0.5;
    let (train, test) = stratified_split(table, TRAIN_FRACTION, seed)?;
    let mut accuracies = BTreeMap::new();
    for block in blocks {
        let range = block_range(block)?;
        let train_block = train.subset_columns(range.clone())?;
        let test_block = test.subset_columns(range)?;
        let model = knn_train(&train_block, K, Metric::Euclidean)?;
        let report = evaluate(&model, &test_block)?;
        accuracies.insert(block.clone(), report.accuracy);
    }
    Ok(AblateReport {
        seed,
        train_fraction: TRAIN_FRACTION,
        k: K,
        metric: Metric::Euclidean,
        config: table.config.clone(),
        accuracies,
    })
}

fn cmd_ablate(args: AblateArgs) -> Result<()> {
    const PATCH_SIZE: u32 = 128;
    let cfg = ExtractionConfig::default();
    trace_config(
        "ablate",
        &[
            ("input", args.input.display().to_string()),
            ("blocks", args.blocks.clone()),
            ("seed", args.seed.to_string()),
            ("report", args.report.display().to_string()),
            ("patch_size", PATCH_SIZE.to_string()),
            ("ltp_t", cfg.ltp_t.to_string()),
            ("glcm_levels", cfg.glcm_levels.to_string()),
            ("glcm_distance", cfg.glcm_distance.to_string()),
            ("histogram_normalize", cfg.histogram_normalize.to_string()),
            ("variance_mode", cfg.variance_mode.to_string()),
            ("train_frac", "0.5".into()),
            ("k", "3".into()),
            ("metric", "euclidean".into()),
        ],
    );
    let blocks: Vec<String> = args
        .blocks
        .split(',')
        .map(|b| b.trim().to_string())
        .filter(|b| !b.is_empty())
        .collect();
    if blocks.is_empty() {
        return Err(Error::Parameter("--blocks lists no blocks".into()));
    }
    for block in &blocks {
        block_range(block)?;
    }

    let ingest = ingest_dataset(&args.input, PATCH_SIZE)?;
    for warning in &ingest.warnings {
        eprintln!("warning: {warning}");
    }
    let table = extract_table(&ingest.patches, &cfg)?;
    let report = run_ablation(&table, &blocks, args.seed)?;
    for (block, accuracy) in &report.accuracies {
        eprintln!("block {block}: accuracy {accuracy:.4}");
    }
    let mut json = serde_json::to_string_pretty(&report)
        .map_err(|e| Error::Format(format!("report serialization failed: {e}")))?;
    json.push('\n');
    std::fs::write(&args.report, json).map_err(|e| Error::io(&args.report, e))?;
    eprintln!("ablation report -> {}", args.report.display());
    Ok(())
}

fn cmd_fixture(args: FixtureArgs) -> Result<()> {
    trace_config(
        "fixture",
        &[
            ("out", args.out.display().to_string()),
            ("seed", args.seed.to_string()),
        ],
    );
    let files = generate_fixture(&args.out, args.seed)?;
    eprintln!("wrote {} class images under {}", files.len(), args.out.display());
    Ok(())
}
