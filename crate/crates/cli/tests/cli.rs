//! End-to-end tests of the `botsense` binary: exit codes, artifact shapes,
//! determinism, and the recorded run manifests.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::Path;
use std::process::{Command, Output};

use botsense::datagen::{default_mix, generate};
use botsense::features::{fit_scaler, FeatureSetId, PlayerVector, FEATURE_COUNT};
use botsense::logmodel::{group_by_player, parse_log, write_log, Label, LogFormat};
use botsense::pipeline::{save_model, EnsembleModel, MODEL_FORMAT_VERSION};
use botsense::svm::SvmModel;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_botsense"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn botsense")
}

fn assert_ok(out: &Output) {
    assert!(
        out.status.success(),
        "expected success, got {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn path_str(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).display().to_string()
}

fn generate_log(dir: &TempDir, name: &str, players: u64, seed: u64) -> String {
    let out = path_str(dir, name);
    assert_ok(&run(&[
        "generate",
        "--players",
        &players.to_string(),
        "--seed",
        &seed.to_string(),
        "--out",
        &out,
    ]));
    out
}

#[test]
fn generate_is_deterministic_and_manifested() {
    let dir = TempDir::new().unwrap();
    let a = generate_log(&dir, "a.csv", 120, 7);
    let b = generate_log(&dir, "b.csv", 120, 7);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(format!("{a}.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "generate");
    assert_eq!(manifest["flags"]["players"], "120");
    assert_eq!(manifest["seeds"], serde_json::json!([7]));
    assert!(manifest["duration_seconds"].is_f64());
}

#[test]
fn rerun_manifests_differ_only_in_time_fields() {
    let dir = TempDir::new().unwrap();
    let out = path_str(&dir, "a.csv");
    let manifest_path = format!("{out}.manifest.json");
    let mut snapshots = Vec::new();
    for _ in 0..2 {
        assert_ok(&run(&["generate", "--players", "60", "--seed", "3", "--out", &out]));
        let mut m: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(&manifest_path).unwrap()).unwrap();
        let obj = m.as_object_mut().unwrap();
        obj.remove("started_unix_seconds").unwrap();
        obj.remove("duration_seconds").unwrap();
        snapshots.push(m);
    }
    assert_eq!(snapshots[0], snapshots[1]);
}

#[test]
fn zero_players_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let out = run(&["generate", "--players", "0", "--seed", "1", "--out", &path_str(&dir, "z.csv")]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn jsonl_output_parses_back_to_the_same_players() {
    let dir = TempDir::new().unwrap();
    let out = path_str(&dir, "log.jsonl");
    assert_ok(&run(&["generate", "--players", "1000", "--seed", "11", "--out", &out]));
    let rows = parse_log(BufReader::new(File::open(&out).unwrap()), LogFormat::Jsonl).unwrap();
    let groups = group_by_player(&rows).unwrap();
    assert_eq!(groups.len(), 1000);
}

#[test]
fn global_and_k1_train_byte_identical_models() {
    let dir = TempDir::new().unwrap();
    let logs = generate_log(&dir, "train.csv", 200, 5);
    let g = path_str(&dir, "g.json");
    let k1 = path_str(&dir, "k1.json");
    assert_ok(&run(&[
        "train", "--logs", &logs, "--feature-set", "f17", "--seed", "9", "--global", "--out", &g,
    ]));
    assert_ok(&run(&[
        "train", "--logs", &logs, "--feature-set", "f17", "--seed", "9", "--k", "1", "--out", &k1,
    ]));
    assert_eq!(fs::read(&g).unwrap(), fs::read(&k1).unwrap());

    // Same models, same predictions.
    let pg = path_str(&dir, "pg.csv");
    let pk = path_str(&dir, "pk.csv");
    assert_ok(&run(&["predict", "--model", &g, "--logs", &logs, "--out", &pg]));
    assert_ok(&run(&["predict", "--model", &k1, "--logs", &logs, "--out", &pk]));
    assert_eq!(fs::read(&pg).unwrap(), fs::read(&pk).unwrap());

    // The manifests record the differing mode flags.
    let flags = |p: &str| -> serde_json::Value {
        serde_json::from_str::<serde_json::Value>(
            &fs::read_to_string(format!("{p}.manifest.json")).unwrap(),
        )
        .unwrap()["flags"]
            .clone()
    };
    assert_eq!(flags(&g)["global"], "true");
    assert_eq!(flags(&k1)["k"], "1");
}

#[test]
fn select_k_writes_a_selection_report_in_range() {
    let dir = TempDir::new().unwrap();
    let logs = generate_log(&dir, "train.csv", 200, 6);
    let model = path_str(&dir, "model.json");
    assert_ok(&run(&[
        "train", "--logs", &logs, "--feature-set", "f12", "--seed", "4", "--select-k", "--out",
        &model,
    ]));
    let report: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(dir.path().join("model.selection.json")).unwrap(),
    )
    .unwrap();
    let chosen = report["chosen_k"].as_u64().unwrap();
    assert!((4..=14).contains(&chosen), "chosen_k {chosen} out of range");
    assert_eq!(report["rotations"].as_array().unwrap().len(), 5);
}

#[test]
fn train_flag_validation_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let logs = generate_log(&dir, "train.csv", 60, 2);
    let out = path_str(&dir, "m.json");
    // Missing --feature-set.
    let missing = run(&["train", "--logs", &logs, "--seed", "1", "--k", "2", "--out", &out]);
    assert_eq!(missing.status.code(), Some(2));
    // No mode flag at all.
    let none = run(&["train", "--logs", &logs, "--feature-set", "f17", "--seed", "1", "--out", &out]);
    assert_eq!(none.status.code(), Some(2));
    // Two mode flags together.
    let both = run(&[
        "train", "--logs", &logs, "--feature-set", "f17", "--seed", "1", "--k", "2", "--global",
        "--out", &out,
    ]);
    assert_eq!(both.status.code(), Some(2));
}

#[test]
fn train_runtime_failures_name_the_cause() {
    let dir = TempDir::new().unwrap();
    // Single-class data.
    let cfg = default_mix(40, 3);
    let mut rows = generate(&cfg).unwrap();
    for row in &mut rows {
        row.label = Some(Label::Human);
    }
    let logs = dir.path().join("humans.csv");
    write_log(BufWriter::new(File::create(&logs).unwrap()), &rows, LogFormat::Csv).unwrap();
    let single = run(&[
        "train", "--logs", logs.to_str().unwrap(), "--feature-set", "f17", "--seed", "1", "--k",
        "2", "--out", &path_str(&dir, "m.json"),
    ]);
    assert_eq!(single.status.code(), Some(1));
    assert!(stderr(&single).contains("single-class"), "stderr: {}", stderr(&single));

    // k larger than the training set.
    let logs = generate_log(&dir, "small.csv", 40, 3);
    let too_big = run(&[
        "train", "--logs", &logs, "--feature-set", "f17", "--seed", "1", "--k", "500", "--out",
        &path_str(&dir, "m.json"),
    ]);
    assert_eq!(too_big.status.code(), Some(1));
    assert!(stderr(&too_big).contains("cannot support k=500"), "stderr: {}", stderr(&too_big));
}

#[test]
fn evaluate_writes_reports_and_requires_labels() {
    let dir = TempDir::new().unwrap();
    let logs = generate_log(&dir, "data.csv", 200, 8);
    let model = path_str(&dir, "m.json");
    assert_ok(&run(&[
        "train", "--logs", &logs, "--feature-set", "f17", "--seed", "2", "--k", "3", "--out",
        &model,
    ]));
    let out_dir = path_str(&dir, "eval");
    assert_ok(&run(&["evaluate", "--model", &model, "--logs", &logs, "--out-dir", &out_dir]));
    let report: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(Path::new(&out_dir).join("report.json")).unwrap(),
    )
    .unwrap();
    for key in ["accuracy", "precision", "recall", "f1"] {
        let v = report["scores"][key].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&v));
    }
    assert!(report["style"]["dev"].is_f64());
    assert!(report["style"]["per_cluster_composition"].as_array().unwrap().len() == 3);
    let text = fs::read_to_string(Path::new(&out_dir).join("report.txt")).unwrap();
    assert!(text.contains("confusion") && text.contains("dev"));

    // Strip the labels and expect a label-requirement failure.
    let rows = parse_log(BufReader::new(File::open(&logs).unwrap()), LogFormat::Csv).unwrap();
    let stripped: Vec<_> = rows
        .into_iter()
        .map(|mut r| {
            r.label = None;
            r.style = None;
            r
        })
        .collect();
    let unlabeled = dir.path().join("unlabeled.csv");
    write_log(BufWriter::new(File::create(&unlabeled).unwrap()), &stripped, LogFormat::Csv)
        .unwrap();
    let failed = run(&[
        "evaluate", "--model", &model, "--logs", unlabeled.to_str().unwrap(), "--out-dir",
        &path_str(&dir, "eval2"),
    ]);
    assert_eq!(failed.status.code(), Some(1));
    assert!(stderr(&failed).contains("evaluation requires labels"));
}

/// A model whose single cluster always answers `Bot`, built directly so the
/// evaluate report's scores can be checked against hand-computed values.
fn constant_bot_model(vectors: &[PlayerVector]) -> EnsembleModel {
    use botsense::clustering::{KMeansConfig, KMeansModel};
    EnsembleModel {
        version: MODEL_FORMAT_VERSION.to_string(),
        feature_set: FeatureSetId::F17,
        scaler: fit_scaler(vectors).unwrap(),
        kmeans: KMeansModel {
            centroids: vec![vec![0.0; FEATURE_COUNT]],
            inertia: 0.0,
            iterations_run: 0,
            inertia_history: Vec::new(),
            config: KMeansConfig::new(1, 0),
        },
        cluster_models: vec![SvmModel::constant(Label::Bot)],
        training_seed: 0,
    }
}

#[test]
fn constant_bot_on_balanced_data_scores_half_accuracy_full_recall() {
    let dir = TempDir::new().unwrap();
    let logs = generate_log(&dir, "balanced.csv", 300, 7);
    let rows = parse_log(BufReader::new(File::open(&logs).unwrap()), LogFormat::Csv).unwrap();
    let groups = group_by_player(&rows).unwrap();
    let vectors = botsense::features::aggregate_groups(&groups);
    let bots = vectors.iter().filter(|v| v.label == Some(Label::Bot)).count();
    assert_eq!(bots * 2, vectors.len(), "default census is balanced");

    let model_path = dir.path().join("const.json");
    save_model(&constant_bot_model(&vectors), BufWriter::new(File::create(&model_path).unwrap()))
        .unwrap();
    let out_dir = path_str(&dir, "eval");
    assert_ok(&run(&[
        "evaluate", "--model", model_path.to_str().unwrap(), "--logs", &logs, "--out-dir",
        &out_dir,
    ]));
    let report: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(Path::new(&out_dir).join("report.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(report["scores"]["accuracy"].as_f64().unwrap(), 0.5);
    assert_eq!(report["scores"]["recall"].as_f64().unwrap(), 1.0);
    assert_eq!(report["scores"]["precision"].as_f64().unwrap(), 0.5);

    // Fallback clusters leave the decision column empty.
    let preds = path_str(&dir, "p.csv");
    assert_ok(&run(&[
        "predict", "--model", model_path.to_str().unwrap(), "--logs", &logs, "--out", &preds,
    ]));
    let text = fs::read_to_string(&preds).unwrap();
    for line in text.lines().skip(1) {
        assert!(line.ends_with(",bot,0,"), "unexpected row: {line}");
    }
}

#[test]
fn predict_covers_every_player_with_valid_fields() {
    let dir = TempDir::new().unwrap();
    let logs = generate_log(&dir, "data.csv", 150, 4);
    let model = path_str(&dir, "m.json");
    assert_ok(&run(&[
        "train", "--logs", &logs, "--feature-set", "fb", "--seed", "3", "--k", "4", "--out",
        &model,
    ]));
    let preds = path_str(&dir, "p.csv");
    assert_ok(&run(&["predict", "--model", &model, "--logs", &logs, "--out", &preds]));

    let text = fs::read_to_string(&preds).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("player_id,predicted,cluster,decision_value"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 150);
    for row in rows {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 4);
        assert!(fields[1] == "human" || fields[1] == "bot");
        assert!(fields[2].parse::<usize>().unwrap() < 4);
    }
}

#[test]
fn missing_input_is_a_runtime_failure() {
    let dir = TempDir::new().unwrap();
    let gone = path_str(&dir, "missing.csv");
    let out = run(&[
        "train", "--logs", &gone, "--feature-set", "f17", "--seed", "1", "--k", "2", "--out",
        &path_str(&dir, "m.json"),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("missing.csv"));
}

#[test]
fn thread_cap_never_changes_outputs() {
    let dir = TempDir::new().unwrap();
    let one = path_str(&dir, "one.csv");
    let four = path_str(&dir, "four.csv");
    let gen = |threads: &str, out: &str| {
        let mut cmd = bin();
        cmd.env("BOTSENSE_THREADS", threads);
        cmd.args(["generate", "--players", "200", "--seed", "13", "--out", out]);
        assert_ok(&cmd.output().unwrap());
    };
    gen("1", &one);
    gen("4", &four);
    assert_eq!(fs::read(&one).unwrap(), fs::read(&four).unwrap());

    let bad = bin()
        .env("BOTSENSE_THREADS", "zero")
        .args(["generate", "--players", "10", "--seed", "1", "--out", &path_str(&dir, "t.csv")])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn experiments_grid_resumes_and_feeds_the_style_breakdown() {
    let dir = TempDir::new().unwrap();
    let out_dir = path_str(&dir, "grid");
    let grid = |first_run: bool| {
        let out = run(&[
            "experiments", "grid", "--seeds", "3", "--players", "120", "--out-dir", &out_dir,
        ]);
        assert_ok(&out);
        if first_run {
            let cells = fs::read_dir(&out_dir)
                .unwrap()
                .filter(|e| {
                    e.as_ref().unwrap().file_name().to_string_lossy().starts_with("cell_")
                })
                .count();
            assert_eq!(cells, 3 * 6 * 2);
        }
    };
    grid(true);
    let first = fs::read(Path::new(&out_dir).join("grid_report.json")).unwrap();
    grid(false);
    let second = fs::read(Path::new(&out_dir).join("grid_report.json")).unwrap();
    assert_eq!(first, second, "resumed grid reproduces the report");

    assert_ok(&run(&["experiments", "styles", "--in-dir", &out_dir]));
    let styles: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(Path::new(&out_dir).join("styles_report.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(styles["rows"].as_array().unwrap().len(), 12);
    let manifest: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(Path::new(&out_dir).join("grid_manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["seeds"], serde_json::json!([21, 22, 23]));

    let few = run(&["experiments", "grid", "--seeds", "2", "--out-dir", &out_dir]);
    assert_eq!(few.status.code(), Some(2), "fewer than 3 seeds is a usage error");
}
