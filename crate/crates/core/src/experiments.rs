//! Scripted experiment harness: the feature-set × method grid and the
//! per-style breakdown, each aggregated over several generator seeds.
//!
//! Each (seed, feature set, method) cell is computed once and stored as a
//! JSON artifact in the output directory; reruns load existing artifacts
//! instead of recomputing, and the rendered tables are produced solely from
//! the stored artifacts. The two methods are trained on identical folds: the
//! baseline ignores the validation fold the proposed method uses for picking
//! its cluster count, so both fit exactly the same three training folds per
//! rotation.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::datagen::{generate, GenError, GeneratorConfig};
use crate::features::{aggregate_groups, FeatureSetId, PlayerVector};
use crate::logmodel::{group_by_player, GroupError, Label, ParseError, Style};
use crate::metrics::{
    confusion, mean_scores, percent, scores, std_scores, style_report, ConfusionMatrix, Scores,
    StyleReport,
};
use crate::pipeline::select::{
    candidate_seed, protocol_folds, rotation_layout, FOLD_COUNT,
};
use crate::pipeline::{
    classify, classify_detailed, train_ensemble, train_global, undersample, EnsembleModel,
    PipelineError,
};
use crate::seed::derive_seed;

// Experiment-level seed namespaces, disjoint from the pipeline's.
/// Seed namespace for the 1:1 under-sampling step; public so a standalone
/// training run balances classes exactly like a grid cell with that seed.
pub const SALT_UNDERSAMPLE: u64 = 10;
const SALT_BASELINE: u64 = 11;

/// The two training strategies under comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// One classifier over the whole population.
    Baseline,
    /// Per-cluster classifiers with a selected cluster count.
    Proposed,
}

impl Method {
    pub const ALL: [Method; 2] = [Method::Baseline, Method::Proposed];

    pub fn name(self) -> &'static str {
        match self {
            Method::Baseline => "baseline",
            Method::Proposed => "proposed",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("need at least 3 seeds, got {0}")]
    TooFewSeeds(usize),
    #[error("experiment io at {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("artifact {path}: {source}")]
    Artifact { path: PathBuf, source: serde_json::Error },
    #[error("artifact {0} is missing; run the grid first")]
    MissingArtifact(PathBuf),
    #[error("player '{0}' has no style label; the breakdown needs styles")]
    MissingStyle(String),
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// One player's outcome in a held-out test fold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictionRecord {
    pub predicted: Label,
    pub actual: Label,
    pub style: Style,
}

/// Which cluster one player routes to, with their style.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssignmentRecord {
    pub style: Style,
    pub cluster: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellRotation {
    pub rotation: usize,
    /// Cluster count actually trained; always 1 for the baseline.
    pub chosen_k: usize,
    pub test_confusion: ConfusionMatrix,
    pub test: Scores,
}

/// Everything one grid cell produced. Stored as one JSON artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellArtifact {
    pub seed: u64,
    pub feature_set: FeatureSetId,
    pub method: Method,
    pub rotations: Vec<CellRotation>,
    /// Mean test scores over the rotations.
    pub mean: Scores,
    /// Every balanced player exactly once, from the rotation whose test fold
    /// held them.
    pub pooled: Vec<PredictionRecord>,
    /// Routing of every balanced player through the first rotation's model.
    pub assignments: Vec<AssignmentRecord>,
    /// Cluster count of the model behind `assignments`.
    pub assignment_k: usize,
}

/// One rendered row: a feature set under one method, across seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridRow {
    pub feature_set: FeatureSetId,
    /// Aligned with the report's seed list.
    pub per_seed: Vec<Scores>,
    pub mean: Scores,
    pub std: Scores,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodTable {
    pub method: Method,
    pub rows: Vec<GridRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridReport {
    pub seeds: Vec<u64>,
    pub players_per_seed: u64,
    pub tables: Vec<MethodTable>,
}

fn cell_path(dir: &Path, seed: u64, fs: FeatureSetId, method: Method) -> PathBuf {
    dir.join(format!("cell_s{seed}_{fs}_{method}.json"))
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Io { path: path.to_path_buf(), source }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), ExperimentError> {
    let mut text = serde_json::to_string_pretty(value).expect("artifact serialization");
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, ExperimentError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text)
        .map_err(|source| ExperimentError::Artifact { path: path.to_path_buf(), source })
}

fn style_of(v: &PlayerVector) -> Result<Style, ExperimentError> {
    v.style.ok_or_else(|| ExperimentError::MissingStyle(v.player_id.clone()))
}

/// The balanced vector set one seed contributes to every cell.
fn balanced_vectors(
    base: &GeneratorConfig,
    seed: u64,
) -> Result<Vec<PlayerVector>, ExperimentError> {
    let mut cfg = base.clone();
    cfg.seed = seed;
    let rows = generate(&cfg)?;
    let vectors = aggregate_groups(&group_by_player(&rows)?);
    Ok(undersample(&vectors, derive_seed(seed, &[SALT_UNDERSAMPLE]))?)
}

fn route_all(
    model: &EnsembleModel,
    vectors: &[PlayerVector],
) -> Result<Vec<AssignmentRecord>, ExperimentError> {
    vectors
        .iter()
        .map(|v| {
            Ok(AssignmentRecord {
                style: style_of(v)?,
                cluster: classify_detailed(model, v).cluster,
            })
        })
        .collect()
}

/// Test-fold predictions of one trained model, with styles.
fn predict_fold(
    model: &EnsembleModel,
    test: &[PlayerVector],
) -> Result<(Vec<PredictionRecord>, ConfusionMatrix, Scores), ExperimentError> {
    let mut records = Vec::with_capacity(test.len());
    for v in test {
        let actual = v.label.ok_or_else(|| PipelineError::Unlabeled(v.player_id.clone()))?;
        records.push(PredictionRecord {
            predicted: classify(model, v),
            actual,
            style: style_of(v)?,
        });
    }
    let cm = confusion(&records.iter().map(|r| (r.predicted, r.actual)).collect::<Vec<_>>());
    Ok((records, cm, scores(&cm)))
}

fn compute_cell(
    vectors: &[PlayerVector],
    seed: u64,
    fs: FeatureSetId,
    method: Method,
) -> Result<CellArtifact, ExperimentError> {
    let folds = protocol_folds(vectors.len(), seed);
    let take = |which: &[usize]| -> Vec<PlayerVector> {
        which.iter().flat_map(|&f| folds[f].iter().map(|&i| vectors[i].clone())).collect()
    };

    let mut rotations = Vec::with_capacity(FOLD_COUNT);
    let mut pooled = Vec::with_capacity(vectors.len());
    let mut assignments = Vec::new();
    let mut assignment_k = 0;
    for rotation in 0..FOLD_COUNT {
        let layout = rotation_layout(rotation);
        let train = take(&layout.train_folds);
        let test = take(&[layout.test_fold]);

        let (model, chosen_k) = match method {
            Method::Baseline => {
                let model =
                    train_global(&train, fs, derive_seed(seed, &[SALT_BASELINE, rotation as u64]))?;
                (model, 1)
            }
            Method::Proposed => {
                // Reproduce the candidate the selection protocol would pick:
                // train every k on these folds, pick by validation accuracy.
                let validation = take(&[layout.validation_fold]);
                let mut best: Option<(usize, f64, EnsembleModel)> = None;
                for k in crate::pipeline::select::K_RANGE {
                    let model = train_ensemble(&train, fs, k, candidate_seed(seed, rotation, k))?;
                    let (_, val) = crate::pipeline::evaluate_model(&model, &validation)?;
                    if best.as_ref().is_none_or(|(_, acc, _)| val.accuracy > *acc) {
                        best = Some((k, val.accuracy, model));
                    }
                }
                let (k, _, model) = best.expect("candidate range is non-empty");
                (model, k)
            }
        };

        let (records, cm, test_scores) = predict_fold(&model, &test)?;
        pooled.extend(records);
        rotations.push(CellRotation {
            rotation,
            chosen_k,
            test_confusion: cm,
            test: test_scores,
        });
        if rotation == 0 {
            assignments = route_all(&model, vectors)?;
            assignment_k = chosen_k;
        }
    }

    let mean = mean_scores(&rotations.iter().map(|r| r.test).collect::<Vec<_>>());
    Ok(CellArtifact {
        seed,
        feature_set: fs,
        method,
        rotations,
        mean,
        pooled,
        assignments,
        assignment_k,
    })
}

/// Load a cell artifact, or compute and store it if absent.
fn load_or_compute_cell(
    out_dir: &Path,
    vectors: &[PlayerVector],
    seed: u64,
    fs: FeatureSetId,
    method: Method,
) -> Result<CellArtifact, ExperimentError> {
    let path = cell_path(out_dir, seed, fs, method);
    if path.exists() {
        return read_json(&path);
    }
    let cell = compute_cell(vectors, seed, fs, method)?;
    write_json(&path, &cell)?;
    Ok(cell)
}

/// Run the full grid: every (seed, feature set, method) cell, resumable via
/// stored artifacts, plus `grid_report.json` and `grid_report.txt` rendered
/// from those artifacts.
pub fn run_grid(
    base: &GeneratorConfig,
    seeds: &[u64],
    out_dir: &Path,
) -> Result<GridReport, ExperimentError> {
    if seeds.len() < 3 {
        return Err(ExperimentError::TooFewSeeds(seeds.len()));
    }
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;

    let mut cells: BTreeMap<(Method, FeatureSetId, u64), CellArtifact> = BTreeMap::new();
    for &seed in seeds {
        // Skip generation entirely when every cell of this seed is stored.
        let all_present = FeatureSetId::ALL.iter().all(|&fs| {
            Method::ALL.iter().all(|&m| cell_path(out_dir, seed, fs, m).exists())
        });
        let vectors = if all_present { Vec::new() } else { balanced_vectors(base, seed)? };
        for fs in FeatureSetId::ALL {
            for method in Method::ALL {
                let cell = load_or_compute_cell(out_dir, &vectors, seed, fs, method)?;
                cells.insert((method, fs, seed), cell);
            }
        }
    }

    let players_per_seed = base.cells.iter().map(|c| c.count).sum();
    let report = render_grid_report(seeds, players_per_seed, &cells);
    write_json(&out_dir.join("grid_report.json"), &report)?;
    fs::write(out_dir.join("grid_report.txt"), render_grid_text(&report))
        .map_err(io_err(&out_dir.join("grid_report.txt")))?;
    Ok(report)
}

fn render_grid_report(
    seeds: &[u64],
    players_per_seed: u64,
    cells: &BTreeMap<(Method, FeatureSetId, u64), CellArtifact>,
) -> GridReport {
    let tables = Method::ALL
        .iter()
        .map(|&method| MethodTable {
            method,
            rows: FeatureSetId::ALL
                .iter()
                .map(|&fs| {
                    let per_seed: Vec<Scores> =
                        seeds.iter().map(|&s| cells[&(method, fs, s)].mean).collect();
                    GridRow {
                        feature_set: fs,
                        mean: mean_scores(&per_seed),
                        std: std_scores(&per_seed),
                        per_seed,
                    }
                })
                .collect(),
        })
        .collect();
    GridReport { seeds: seeds.to_vec(), players_per_seed, tables }
}

fn render_grid_text(report: &GridReport) -> String {
    let mut out = String::new();
    let seeds: Vec<String> = report.seeds.iter().map(u64::to_string).collect();
    let _ = writeln!(
        out,
        "feature-set grid: {} players per seed, seeds [{}], scores in % as mean +/- std over seeds",
        report.players_per_seed,
        seeds.join(", ")
    );
    for table in &report.tables {
        let _ = writeln!(out, "\nmethod: {}", table.method);
        let _ = writeln!(
            out,
            "{:<12} {:>16} {:>16} {:>16} {:>16}",
            "feature_set", "accuracy", "precision", "recall", "f1"
        );
        for row in &table.rows {
            let cell = |mean: f64, std: f64| format!("{} +/- {}", percent(mean), percent(std));
            let _ = writeln!(
                out,
                "{:<12} {:>16} {:>16} {:>16} {:>16}",
                row.feature_set.to_string(),
                cell(row.mean.accuracy, row.std.accuracy),
                cell(row.mean.precision, row.std.precision),
                cell(row.mean.recall, row.std.recall),
                cell(row.mean.f1, row.std.f1),
            );
        }
    }
    out
}

/// Per-seed style report of one (method, feature set) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedStyle {
    pub seed: u64,
    pub report: StyleReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StyleRow {
    pub method: Method,
    pub feature_set: FeatureSetId,
    pub per_seed: Vec<SeedStyle>,
    /// Mean accuracy per style over the seeds where the style is present.
    pub mean_per_style: BTreeMap<Style, f64>,
    /// Mean Dev over seeds with a defined Dev; `None` if no seed has one.
    pub mean_dev: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StylesReport {
    pub seeds: Vec<u64>,
    pub rows: Vec<StyleRow>,
}

/// Build the per-style breakdown from stored grid artifacts; writes
/// `styles_report.json` and `styles_report.txt` next to them.
pub fn run_style_breakdown(dir: &Path) -> Result<StylesReport, ExperimentError> {
    let grid: GridReport = {
        let path = dir.join("grid_report.json");
        if !path.exists() {
            return Err(ExperimentError::MissingArtifact(path));
        }
        read_json(&path)?
    };

    let mut rows = Vec::new();
    for method in Method::ALL {
        for fs in FeatureSetId::ALL {
            let mut per_seed = Vec::new();
            for &seed in &grid.seeds {
                let path = cell_path(dir, seed, fs, method);
                if !path.exists() {
                    return Err(ExperimentError::MissingArtifact(path));
                }
                let cell: CellArtifact = read_json(&path)?;
                let predictions: Vec<(Label, Label, Style)> =
                    cell.pooled.iter().map(|r| (r.predicted, r.actual, r.style)).collect();
                let assignments: Vec<(Style, usize)> =
                    cell.assignments.iter().map(|a| (a.style, a.cluster)).collect();
                let report = style_report(&predictions, &assignments, cell.assignment_k);
                per_seed.push(SeedStyle { seed, report });
            }

            let mut mean_per_style = BTreeMap::new();
            for style in Style::ALL {
                let values: Vec<f64> = per_seed
                    .iter()
                    .filter_map(|s| s.report.per_style_accuracy.get(&style).copied())
                    .collect();
                if !values.is_empty() {
                    mean_per_style
                        .insert(style, values.iter().sum::<f64>() / values.len() as f64);
                }
            }
            let devs: Vec<f64> = per_seed.iter().filter_map(|s| s.report.dev).collect();
            let mean_dev =
                (!devs.is_empty()).then(|| devs.iter().sum::<f64>() / devs.len() as f64);
            rows.push(StyleRow { method, feature_set: fs, per_seed, mean_per_style, mean_dev });
        }
    }

    let report = StylesReport { seeds: grid.seeds.clone(), rows };
    write_json(&dir.join("styles_report.json"), &report)?;
    fs::write(dir.join("styles_report.txt"), render_styles_text(&report))
        .map_err(io_err(&dir.join("styles_report.txt")))?;
    Ok(report)
}

fn render_styles_text(report: &StylesReport) -> String {
    let mut out = String::new();
    let seeds: Vec<String> = report.seeds.iter().map(u64::to_string).collect();
    let _ = writeln!(
        out,
        "per-style accuracy (%) and Dev, means over seeds [{}]",
        seeds.join(", ")
    );
    let _ = writeln!(
        out,
        "{:<10} {:<12} {:>8} {:>9} {:>9} {:>10} {:>7}",
        "method", "feature_set", "killer", "achiever", "explorer", "remainder", "dev"
    );
    for row in &report.rows {
        let style_cell = |style: Style| {
            row.mean_per_style.get(&style).map_or_else(|| "-".to_string(), |&v| percent(v))
        };
        let _ = writeln!(
            out,
            "{:<10} {:<12} {:>8} {:>9} {:>9} {:>10} {:>7}",
            row.method.to_string(),
            row.feature_set.to_string(),
            style_cell(Style::Killer),
            style_cell(Style::Achiever),
            style_cell(Style::Explorer),
            style_cell(Style::Remainder),
            row.mean_dev.map_or_else(|| "-".to_string(), percent),
        );
    }

    // Representative clustering: the proposed method's full-vector model on
    // the first seed.
    if let Some(row) = report
        .rows
        .iter()
        .find(|r| r.method == Method::Proposed && r.feature_set == FeatureSetId::F17)
    {
        if let Some(first) = row.per_seed.first() {
            let _ = writeln!(
                out,
                "\ncluster composition, proposed/f17, seed {} (typed members only, %):",
                first.seed
            );
            let _ = writeln!(
                out,
                "{:<8} {:>13} {:>8} {:>9} {:>9}",
                "cluster", "typed_members", "killer", "achiever", "explorer"
            );
            for comp in &first.report.per_cluster_composition {
                match &comp.ratios {
                    Some(r) => {
                        let _ = writeln!(
                            out,
                            "{:<8} {:>13} {:>8} {:>9} {:>9}",
                            comp.cluster,
                            comp.typed_members,
                            percent(r.killer),
                            percent(r.achiever),
                            percent(r.explorer),
                        );
                    }
                    None => {
                        let _ = writeln!(
                            out,
                            "{:<8} {:>13} (no typed members)",
                            comp.cluster, comp.typed_members
                        );
                    }
                }
            }
        }
    }
    out
}
