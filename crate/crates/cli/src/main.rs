//! Command-line front end for the detection toolkit.
//!
//! Subcommands cover the whole workflow: `generate` synthesizes labeled
//! behavior logs, `train` fits a detector (fixed k, selected k, or the
//! global baseline), `evaluate` scores a model against labeled logs,
//! `predict` classifies every player in a log, and `experiments` drives the
//! multi-seed comparison grid. Every command writes a run manifest next to
//! its artifacts recording the flags, seeds, paths, toolkit version, and
//! wall-clock duration of the run.
//!
//! Exit codes: 0 on success, 2 on usage errors, 1 on runtime failures. The
//! env var `BOTSENSE_THREADS` caps internal parallelism; outputs never
//! depend on the thread count.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use botsense::datagen::{default_mix, generate};
use botsense::experiments::{run_grid, run_style_breakdown, SALT_UNDERSAMPLE};
use botsense::features::{aggregate_groups, FeatureSetId, PlayerVector};
use botsense::logmodel::{group_by_player, parse_log, write_log, LogFormat};
use botsense::metrics::{confusion, scores, style_report, EvaluationReport};
use botsense::pipeline::{
    classify_detailed, load_model, save_model, select_k, train_ensemble, train_global,
    undersample, EnsembleModel,
};
use botsense::seed::derive_seed;

type CliError = Box<dyn std::error::Error>;

/// Behavioral bot detection: cluster players by play style and train one
/// detector per cluster.
#[derive(Parser)]
#[command(name = "botsense", version, propagate_version = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic labeled behavior log.
    Generate(GenerateArgs),
    /// Train a detector from a labeled log.
    Train(TrainArgs),
    /// Score a trained model against a labeled log.
    Evaluate(EvaluateArgs),
    /// Classify every player in a log.
    Predict(PredictArgs),
    /// Multi-seed comparison runs over feature sets and methods.
    #[command(subcommand)]
    Experiments(ExperimentsCmd),
}

/// Log file format flag; when absent the file extension decides.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Jsonl,
}

impl From<FormatArg> for LogFormat {
    fn from(f: FormatArg) -> LogFormat {
        match f {
            FormatArg::Csv => LogFormat::Csv,
            FormatArg::Jsonl => LogFormat::Jsonl,
        }
    }
}

#[derive(Args)]
struct GenerateArgs {
    /// Total players, split over the eight style cells by the default census.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    players: u64,
    /// Generator seed; every player's stream derives from it.
    #[arg(long)]
    seed: u64,
    /// Output log path.
    #[arg(long)]
    out: PathBuf,
    /// Output format; inferred from the extension of --out when omitted.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Args)]
struct TrainArgs {
    /// Labeled behavior log to train on.
    #[arg(long)]
    logs: PathBuf,
    /// Feature set: f17, f12, f5, fb, fm, or fc.
    #[arg(long)]
    feature_set: FeatureSetId,
    /// Training seed; all internal randomness derives from it.
    #[arg(long)]
    seed: u64,
    /// Model output path (versioned JSON).
    #[arg(long)]
    out: PathBuf,
    /// Log format; inferred from the extension of --logs when omitted.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    #[command(flatten)]
    mode: ModeArgs,
}

/// Exactly one training mode must be chosen.
#[derive(Args)]
#[group(required = true, multiple = false)]
struct ModeArgs {
    /// Fixed cluster count.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    k: Option<u64>,
    /// Pick the cluster count by nested cross-validation; also writes a
    /// selection report next to the model.
    #[arg(long)]
    select_k: bool,
    /// Single-classifier baseline over the whole population.
    #[arg(long)]
    global: bool,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Trained model file.
    #[arg(long)]
    model: PathBuf,
    /// Labeled behavior log to score against.
    #[arg(long)]
    logs: PathBuf,
    /// Directory for report.json and report.txt.
    #[arg(long)]
    out_dir: PathBuf,
    /// Log format; inferred from the extension of --logs when omitted.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Args)]
struct PredictArgs {
    /// Trained model file.
    #[arg(long)]
    model: PathBuf,
    /// Behavior log; labels optional and ignored.
    #[arg(long)]
    logs: PathBuf,
    /// Output CSV path (player_id,predicted,cluster,decision_value).
    #[arg(long)]
    out: PathBuf,
    /// Log format; inferred from the extension of --logs when omitted.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Subcommand)]
enum ExperimentsCmd {
    /// Run the feature-set x method grid over several generator seeds.
    Grid(GridArgs),
    /// Render the per-style breakdown from stored grid artifacts.
    Styles(StylesArgs),
}

#[derive(Args)]
struct GridArgs {
    /// Number of generator seeds, consecutive from --first-seed.
    #[arg(long, value_parser = clap::value_parser!(u64).range(3..))]
    seeds: u64,
    /// First seed value.
    #[arg(long, default_value_t = 21)]
    first_seed: u64,
    /// Players per seed.
    #[arg(long, default_value_t = 2000, value_parser = clap::value_parser!(u64).range(1..))]
    players: u64,
    /// Directory for cell artifacts and rendered reports.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct StylesArgs {
    /// Directory holding a completed grid run.
    #[arg(long)]
    in_dir: PathBuf,
}

/// Record of one CLI run, written next to the artifacts it produced.
/// Reruns with identical flags and inputs differ only in the timestamp and
/// duration fields.
#[derive(Serialize)]
struct RunManifest {
    command: String,
    flags: BTreeMap<String, String>,
    seeds: Vec<u64>,
    inputs: Vec<String>,
    outputs: Vec<String>,
    toolkit_version: String,
    started_unix_seconds: u64,
    duration_seconds: f64,
}

/// Everything a command reports back for its manifest.
struct RunInfo {
    command: &'static str,
    flags: BTreeMap<String, String>,
    seeds: Vec<u64>,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
    manifest_path: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    let started = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let clock = Instant::now();
    match run(cli.command) {
        Ok(info) => {
            let manifest = RunManifest {
                command: info.command.to_string(),
                flags: info.flags,
                seeds: info.seeds,
                inputs: info.inputs.iter().map(|p| p.display().to_string()).collect(),
                outputs: info.outputs.iter().map(|p| p.display().to_string()).collect(),
                toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
                started_unix_seconds: started,
                duration_seconds: clock.elapsed().as_secs_f64(),
            };
            if let Err(e) = write_pretty_json(&info.manifest_path, &manifest) {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

/// Cap the global thread pool when BOTSENSE_THREADS is set. Parallel
/// sections are order-independent, so the cap never changes outputs.
fn configure_threads() -> Result<(), String> {
    match std::env::var("BOTSENSE_THREADS") {
        Err(_) => Ok(()),
        Ok(raw) => {
            let n: usize = raw
                .trim()
                .parse()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| format!("BOTSENSE_THREADS must be a positive integer, got '{raw}'"))?;
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| e.to_string())
        }
    }
}

fn run(command: Command) -> Result<RunInfo, CliError> {
    match command {
        Command::Generate(args) => cmd_generate(args),
        Command::Train(args) => cmd_train(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Predict(args) => cmd_predict(args),
        Command::Experiments(ExperimentsCmd::Grid(args)) => cmd_grid(args),
        Command::Experiments(ExperimentsCmd::Styles(args)) => cmd_styles(args),
    }
}

/// Resolve the log format: an explicit flag wins, otherwise the extension.
fn resolve_format(path: &Path, flag: Option<FormatArg>) -> Result<LogFormat, CliError> {
    if let Some(f) = flag {
        return Ok(f.into());
    }
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => Ok(LogFormat::Csv),
        Some("jsonl") => Ok(LogFormat::Jsonl),
        _ => Err(format!(
            "cannot infer log format from '{}'; pass --format csv|jsonl",
            path.display()
        )
        .into()),
    }
}

fn format_name(format: LogFormat) -> &'static str {
    match format {
        LogFormat::Csv => "csv",
        LogFormat::Jsonl => "jsonl",
    }
}

/// Ingest a log file and aggregate it to one vector per player.
fn load_vectors(path: &Path, flag: Option<FormatArg>) -> Result<Vec<PlayerVector>, CliError> {
    let format = resolve_format(path, flag)?;
    let file = File::open(path).map_err(|e| format!("open {}: {e}", path.display()))?;
    let rows = parse_log(BufReader::new(file), format)
        .map_err(|e| format!("{}: {e}", path.display()))?;
    let groups = group_by_player(&rows).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(aggregate_groups(&groups))
}

fn load_model_file(path: &Path) -> Result<EnsembleModel, CliError> {
    let file = File::open(path).map_err(|e| format!("open {}: {e}", path.display()))?;
    Ok(load_model(BufReader::new(file)).map_err(|e| format!("{}: {e}", path.display()))?)
}

fn write_pretty_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| format!("write {}: {e}", path.display()).into())
}

/// Manifest path for a file artifact: the artifact path plus a suffix, so
/// `model.json` gets `model.json.manifest.json` beside it.
fn manifest_beside(artifact: &Path) -> PathBuf {
    let mut name = artifact.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    artifact.with_file_name(name)
}

fn cmd_generate(args: GenerateArgs) -> Result<RunInfo, CliError> {
    let format = resolve_format(&args.out, args.format)?;
    let cfg = default_mix(args.players, args.seed);
    let rows = generate(&cfg)?;
    if let Some(dir) = args.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| format!("create {}: {e}", dir.display()))?;
    }
    let file = File::create(&args.out).map_err(|e| format!("write {}: {e}", args.out.display()))?;
    write_log(BufWriter::new(file), &rows, format)
        .map_err(|e| format!("write {}: {e}", args.out.display()))?;

    let flags = BTreeMap::from([
        ("players".to_string(), args.players.to_string()),
        ("seed".to_string(), args.seed.to_string()),
        ("out".to_string(), args.out.display().to_string()),
        ("format".to_string(), format_name(format).to_string()),
    ]);
    Ok(RunInfo {
        command: "generate",
        flags,
        seeds: vec![args.seed],
        inputs: vec![],
        outputs: vec![args.out.clone()],
        manifest_path: manifest_beside(&args.out),
    })
}

fn cmd_train(args: TrainArgs) -> Result<RunInfo, CliError> {
    let vectors = load_vectors(&args.logs, args.format)?;
    let balanced = undersample(&vectors, derive_seed(args.seed, &[SALT_UNDERSAMPLE]))?;

    let (model, selection, mode_flag) = if let Some(k) = args.mode.k {
        let model = train_ensemble(&balanced, args.feature_set, k as usize, args.seed)?;
        (model, None, ("k".to_string(), k.to_string()))
    } else if args.mode.global {
        let model = train_global(&balanced, args.feature_set, args.seed)?;
        (model, None, ("global".to_string(), "true".to_string()))
    } else {
        let (model, report) = select_k(&balanced, args.feature_set, args.seed)?;
        (model, Some(report), ("select-k".to_string(), "true".to_string()))
    };

    if let Some(dir) = args.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| format!("create {}: {e}", dir.display()))?;
    }
    let file = File::create(&args.out).map_err(|e| format!("write {}: {e}", args.out.display()))?;
    save_model(&model, BufWriter::new(file))
        .map_err(|e| format!("write {}: {e}", args.out.display()))?;

    let mut outputs = vec![args.out.clone()];
    if let Some(report) = &selection {
        let report_path = args.out.with_extension("selection.json");
        write_pretty_json(&report_path, report)?;
        outputs.push(report_path);
    }

    let mut flags = BTreeMap::from([
        ("logs".to_string(), args.logs.display().to_string()),
        ("feature-set".to_string(), args.feature_set.to_string()),
        ("seed".to_string(), args.seed.to_string()),
        ("out".to_string(), args.out.display().to_string()),
    ]);
    flags.insert(mode_flag.0, mode_flag.1);
    Ok(RunInfo {
        command: "train",
        flags,
        seeds: vec![args.seed],
        inputs: vec![args.logs.clone()],
        outputs,
        manifest_path: manifest_beside(&args.out),
    })
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<RunInfo, CliError> {
    let model = load_model_file(&args.model)?;
    let vectors = load_vectors(&args.logs, args.format)?;
    if vectors.is_empty() {
        return Err(format!("no players in {}", args.logs.display()).into());
    }

    let mut pairs = Vec::with_capacity(vectors.len());
    let mut styled = Vec::new();
    let mut assignments = Vec::new();
    for v in &vectors {
        let actual = v.label.ok_or_else(|| {
            format!("evaluation requires labels: player '{}' is unlabeled", v.player_id)
        })?;
        let detail = classify_detailed(&model, v);
        pairs.push((detail.label, actual));
        if let Some(style) = v.style {
            styled.push((detail.label, actual, style));
            assignments.push((style, detail.cluster));
        }
    }
    let cm = confusion(&pairs);
    let report = EvaluationReport {
        confusion: cm,
        scores: scores(&cm),
        style: (!styled.is_empty())
            .then(|| style_report(&styled, &assignments, model.kmeans.centroids.len())),
    };

    fs::create_dir_all(&args.out_dir)
        .map_err(|e| format!("create {}: {e}", args.out_dir.display()))?;
    let json_path = args.out_dir.join("report.json");
    let text_path = args.out_dir.join("report.txt");
    write_pretty_json(&json_path, &report)?;
    fs::write(&text_path, report.render_text())
        .map_err(|e| format!("write {}: {e}", text_path.display()))?;

    let flags = BTreeMap::from([
        ("model".to_string(), args.model.display().to_string()),
        ("logs".to_string(), args.logs.display().to_string()),
        ("out-dir".to_string(), args.out_dir.display().to_string()),
    ]);
    Ok(RunInfo {
        command: "evaluate",
        flags,
        seeds: vec![],
        inputs: vec![args.model.clone(), args.logs.clone()],
        outputs: vec![json_path, text_path],
        manifest_path: args.out_dir.join("manifest.json"),
    })
}

fn cmd_predict(args: PredictArgs) -> Result<RunInfo, CliError> {
    let model = load_model_file(&args.model)?;
    let vectors = load_vectors(&args.logs, args.format)?;

    if let Some(dir) = args.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| format!("create {}: {e}", dir.display()))?;
    }
    let file = File::create(&args.out).map_err(|e| format!("write {}: {e}", args.out.display()))?;
    let mut out = csv::Writer::from_writer(BufWriter::new(file));
    out.write_record(["player_id", "predicted", "cluster", "decision_value"])
        .map_err(|e| format!("write {}: {e}", args.out.display()))?;
    for v in &vectors {
        let detail = classify_detailed(&model, v);
        let decision = detail.decision_value.map(|d| d.to_string()).unwrap_or_default();
        out.write_record([
            v.player_id.as_str(),
            &detail.label.to_string(),
            &detail.cluster.to_string(),
            &decision,
        ])
        .map_err(|e| format!("write {}: {e}", args.out.display()))?;
    }
    out.flush().map_err(|e| format!("write {}: {e}", args.out.display()))?;

    let flags = BTreeMap::from([
        ("model".to_string(), args.model.display().to_string()),
        ("logs".to_string(), args.logs.display().to_string()),
        ("out".to_string(), args.out.display().to_string()),
    ]);
    Ok(RunInfo {
        command: "predict",
        flags,
        seeds: vec![],
        inputs: vec![args.model.clone(), args.logs.clone()],
        outputs: vec![args.out.clone()],
        manifest_path: manifest_beside(&args.out),
    })
}

fn cmd_grid(args: GridArgs) -> Result<RunInfo, CliError> {
    let seeds: Vec<u64> = (0..args.seeds).map(|i| args.first_seed + i).collect();
    let base = default_mix(args.players, 0);
    let report = run_grid(&base, &seeds, &args.out_dir)?;

    let mut summary = String::new();
    let _ = writeln!(
        summary,
        "grid complete: {} seeds x {} feature sets x 2 methods -> {}",
        seeds.len(),
        report.tables[0].rows.len(),
        args.out_dir.join("grid_report.txt").display()
    );
    print!("{summary}");

    let flags = BTreeMap::from([
        ("seeds".to_string(), args.seeds.to_string()),
        ("first-seed".to_string(), args.first_seed.to_string()),
        ("players".to_string(), args.players.to_string()),
        ("out-dir".to_string(), args.out_dir.display().to_string()),
    ]);
    Ok(RunInfo {
        command: "experiments grid",
        flags,
        seeds,
        inputs: vec![],
        outputs: vec![
            args.out_dir.join("grid_report.json"),
            args.out_dir.join("grid_report.txt"),
        ],
        manifest_path: args.out_dir.join("grid_manifest.json"),
    })
}

fn cmd_styles(args: StylesArgs) -> Result<RunInfo, CliError> {
    run_style_breakdown(&args.in_dir)?;
    println!(
        "styles report -> {}",
        args.in_dir.join("styles_report.txt").display()
    );
    let flags = BTreeMap::from([(
        "in-dir".to_string(),
        args.in_dir.display().to_string(),
    )]);
    Ok(RunInfo {
        command: "experiments styles",
        flags,
        seeds: vec![],
        inputs: vec![args.in_dir.join("grid_report.json")],
        outputs: vec![
            args.in_dir.join("styles_report.json"),
            args.in_dir.join("styles_report.txt"),
        ],
        manifest_path: args.in_dir.join("styles_manifest.json"),
    })
}
