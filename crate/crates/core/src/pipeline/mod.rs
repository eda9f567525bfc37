//! Pipeline orchestration: under-sampling, per-cluster ensemble training,
//! the global baseline, and nearest-centroid routing at prediction time.
//!
//! The deployable artifact is an [`EnsembleModel`]: a scaler fitted on the
//! training players, a k-means grouping in the projected feature space, and
//! one classifier per cluster. Every sub-seed is derived from the single
//! training seed, so training is a pure function of (vectors, config).

pub mod persist;
pub mod select;

pub use persist::{load_model, model_to_json, save_model};
pub use select::{select_k, FoldLayout, RotationReport, SelectionReport};

use rand::seq::SliceRandom;
use thiserror::Error;

use crate::clustering::{fit_kmeans, nearest_cluster, ClusterError, KMeansConfig, KMeansModel};
use crate::features::{project, FeatureSetId, PlayerVector, ZScoreScaler};
use crate::logmodel::Label;
use crate::metrics::{confusion, scores, ConfusionMatrix, Scores};
use crate::seed::{derive_seed, seeded_rng};
use crate::svm::{decision_value, label_to_y, train_svm, SvmConfig, SvmError, SvmModel};

/// Format version written into model files.
pub const MODEL_FORMAT_VERSION: &str = "1";

// Seed-derivation salts; each randomized sub-step draws from its own
// namespace of the training seed.
const SALT_KMEANS: u64 = 1;
const SALT_SVM: u64 = 2;
pub(crate) const SALT_FOLD_SHUFFLE: u64 = 3;
pub(crate) const SALT_CANDIDATE: u64 = 4;

/// Scaler, grouping, and per-cluster classifiers over one feature set.
#[derive(Debug, Clone)]
pub struct EnsembleModel {
    pub version: String,
    pub feature_set: FeatureSetId,
    pub scaler: ZScoreScaler,
    pub kmeans: KMeansModel,
    /// Index-aligned with the centroids.
    pub cluster_models: Vec<SvmModel>,
    pub training_seed: u64,
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("empty training set")]
    Empty,
    #[error("single-class input: need both human and bot players")]
    SingleClass,
    #[error("player '{0}' has no label")]
    Unlabeled(String),
    #[error("{n} training vectors cannot support k={k}")]
    TooFewForK { n: usize, k: usize },
    #[error("fold {fold} is single-class; re-shuffle with a different seed")]
    SingleClassFold { fold: usize },
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error(transparent)]
    Svm(#[from] SvmError),
}

/// Balance classes 1:1: keep every minority-class vector plus a seeded
/// uniform subset of the majority class, preserving input order.
pub fn undersample(
    vectors: &[PlayerVector],
    seed: u64,
) -> Result<Vec<PlayerVector>, PipelineError> {
    let mut bots = Vec::new();
    let mut humans = Vec::new();
    for (idx, v) in vectors.iter().enumerate() {
        match v.label {
            Some(Label::Bot) => bots.push(idx),
            Some(Label::Human) => humans.push(idx),
            None => return Err(PipelineError::Unlabeled(v.player_id.clone())),
        }
    }
    if bots.is_empty() || humans.is_empty() {
        return Err(PipelineError::SingleClass);
    }

    let (minority, majority) = if bots.len() <= humans.len() { (bots, humans) } else { (humans, bots) };
    let mut keep: Vec<bool> = vec![false; vectors.len()];
    for &idx in &minority {
        keep[idx] = true;
    }
    let mut shuffled = majority;
    shuffled.shuffle(&mut seeded_rng(seed));
    for &idx in shuffled.iter().take(minority.len()) {
        keep[idx] = true;
    }
    Ok(vectors
        .iter()
        .zip(&keep)
        .filter(|(_, &kept)| kept)
        .map(|(v, _)| v.clone())
        .collect())
}

fn standardized_points(
    scaler: &ZScoreScaler,
    vectors: &[PlayerVector],
    fs: FeatureSetId,
) -> Vec<Vec<f64>> {
    vectors.iter().map(|v| project(&scaler.apply(&v.values), fs)).collect()
}

/// Train the per-cluster ensemble: fit the scaler on the training vectors,
/// group the standardized projections with k-means, then train one
/// classifier per cluster on that cluster's members. A cluster with fewer
/// than two players of either class gets a constant fallback predicting its
/// majority label (ties go to bot).
pub fn train_ensemble(
    vectors: &[PlayerVector],
    fs: FeatureSetId,
    k: usize,
    seed: u64,
) -> Result<EnsembleModel, PipelineError> {
    if vectors.is_empty() {
        return Err(PipelineError::Empty);
    }
    if vectors.len() < k {
        return Err(PipelineError::TooFewForK { n: vectors.len(), k });
    }
    let labels: Vec<Label> = vectors
        .iter()
        .map(|v| v.label.ok_or_else(|| PipelineError::Unlabeled(v.player_id.clone())))
        .collect::<Result<_, _>>()?;

    let scaler = crate::features::fit_scaler(vectors).expect("vectors checked non-empty");
    let points = standardized_points(&scaler, vectors, fs);

    let kmeans_cfg = KMeansConfig::new(k, derive_seed(seed, &[SALT_KMEANS]));
    let (kmeans, assignments) = fit_kmeans(&points, &kmeans_cfg)?;

    let mut cluster_models = Vec::with_capacity(k);
    for cluster in 0..k {
        let members: Vec<usize> =
            (0..points.len()).filter(|&i| assignments[i] == cluster).collect();
        let bots = members.iter().filter(|&&i| labels[i] == Label::Bot).count();
        let humans = members.len() - bots;
        if bots < 2 || humans < 2 {
            let majority = if bots >= humans { Label::Bot } else { Label::Human };
            cluster_models.push(SvmModel::constant(majority));
            continue;
        }
        let xs: Vec<Vec<f64>> = members.iter().map(|&i| points[i].clone()).collect();
        let ys: Vec<f64> = members.iter().map(|&i| label_to_y(labels[i])).collect();
        let cfg = SvmConfig::new(derive_seed(seed, &[SALT_SVM, cluster as u64]));
        cluster_models.push(train_svm(&xs, &ys, &cfg)?);
    }

    Ok(EnsembleModel {
        version: MODEL_FORMAT_VERSION.to_string(),
        feature_set: fs,
        scaler,
        kmeans,
        cluster_models,
        training_seed: seed,
    })
}

/// The baseline: one classifier over the whole population (k = 1).
pub fn train_global(
    vectors: &[PlayerVector],
    fs: FeatureSetId,
    seed: u64,
) -> Result<EnsembleModel, PipelineError> {
    train_ensemble(vectors, fs, 1, seed)
}

/// Classification detail: the routed cluster and the margin (absent for
/// fallback clusters).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Classification {
    pub label: Label,
    pub cluster: usize,
    pub decision_value: Option<f64>,
}

/// Standardize, project, route to the nearest centroid, and let that
/// cluster's classifier decide.
pub fn classify_detailed(model: &EnsembleModel, v: &PlayerVector) -> Classification {
    let point = project(&model.scaler.apply(&v.values), model.feature_set);
    let cluster =
        nearest_cluster(&model.kmeans, &point).expect("projection matches centroid dimension");
    let local = &model.cluster_models[cluster];
    if let Some(label) = local.fallback {
        return Classification { label, cluster, decision_value: None };
    }
    let dv = decision_value(local, &point).expect("cluster model dimension matches projection");
    let label = if dv >= 0.0 { Label::Bot } else { Label::Human };
    Classification { label, cluster, decision_value: Some(dv) }
}

/// Predicted class of one player.
pub fn classify(model: &EnsembleModel, v: &PlayerVector) -> Label {
    classify_detailed(model, v).label
}

/// Confusion matrix and scores of a model over labeled vectors.
pub fn evaluate_model(
    model: &EnsembleModel,
    vectors: &[PlayerVector],
) -> Result<(ConfusionMatrix, Scores), PipelineError> {
    let mut pairs = Vec::with_capacity(vectors.len());
    for v in vectors {
        let actual = v.label.ok_or_else(|| PipelineError::Unlabeled(v.player_id.clone()))?;
        pairs.push((classify(model, v), actual));
    }
    let cm = confusion(&pairs);
    Ok((cm, scores(&cm)))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::features::FEATURE_COUNT;
    use crate::logmodel::Style;

    pub(crate) fn vector(
        id: usize,
        label: Label,
        style: Style,
        center: [f64; 2],
        offset: f64,
    ) -> PlayerVector {
        // Two informative columns; the rest constant so they standardize
        // away.
        let mut values = [0.0; FEATURE_COUNT];
        values[0] = center[0] + offset;
        values[1] = center[1] - offset;
        PlayerVector {
            player_id: format!("p{id:04}"),
            values,
            sample_count: 1,
            label: Some(label),
            style: Some(style),
        }
    }

    /// Two well-separated blobs per class: bots near +5, humans near -5 on
    /// both informative columns. Every point is distinct.
    pub(crate) fn separable_set(n_per_class: usize) -> Vec<PlayerVector> {
        let mut out = Vec::new();
        for i in 0..n_per_class {
            let wiggle = (i % 7) as f64 * 0.1 + i as f64 * 1e-3;
            out.push(vector(i, Label::Bot, Style::Killer, [5.0, 5.0], wiggle));
            out.push(vector(
                n_per_class + i,
                Label::Human,
                Style::Remainder,
                [-5.0, -5.0],
                wiggle,
            ));
        }
        out
    }

    #[test]
    fn undersample_balances_to_the_minority() {
        let mut vectors = separable_set(10); // 10 bots + 10 humans
        vectors.truncate(2 * 10);
        // Add 20 more bots to unbalance 30:10.
        for i in 0..20 {
            vectors.push(vector(100 + i, Label::Bot, Style::Killer, [5.0, 5.0], 0.3));
        }
        let balanced = undersample(&vectors, 7).unwrap();
        let bots = balanced.iter().filter(|v| v.label == Some(Label::Bot)).count();
        let humans = balanced.len() - bots;
        assert_eq!((bots, humans), (10, 10));
        // Deterministic under the seed.
        assert_eq!(undersample(&vectors, 7).unwrap(), balanced);
        assert_ne!(undersample(&vectors, 8).unwrap(), balanced);
    }

    #[test]
    fn undersample_keeps_balanced_input_unchanged() {
        let vectors = separable_set(5);
        assert_eq!(undersample(&vectors, 3).unwrap(), vectors);
    }

    #[test]
    fn undersample_rejects_single_class() {
        let vectors: Vec<PlayerVector> =
            (0..4).map(|i| vector(i, Label::Bot, Style::Killer, [0.0, 0.0], i as f64)).collect();
        assert!(matches!(undersample(&vectors, 0), Err(PipelineError::SingleClass)));
    }

    #[test]
    fn single_cluster_ensemble_equals_the_global_baseline() {
        let vectors = separable_set(12);
        let ensemble = train_ensemble(&vectors, FeatureSetId::F17, 1, 99).unwrap();
        let global = train_global(&vectors, FeatureSetId::F17, 99).unwrap();
        for i in 0..100 {
            let probe = vector(
                1000 + i,
                Label::Bot,
                Style::Killer,
                [(i as f64) * 0.2 - 10.0, 10.0 - (i as f64) * 0.2],
                0.0,
            );
            assert_eq!(classify(&ensemble, &probe), classify(&global, &probe));
        }
    }

    #[test]
    fn single_class_cluster_falls_back_to_its_majority() {
        // A far-away all-bot blob and a mixed blob: k=2 isolates the bots.
        let mut vectors = Vec::new();
        for i in 0..6 {
            vectors.push(vector(i, Label::Bot, Style::Killer, [50.0, 50.0], (i % 3) as f64 * 0.1));
        }
        for i in 0..4 {
            let label = if i % 2 == 0 { Label::Bot } else { Label::Human };
            vectors.push(vector(10 + i, label, Style::Remainder, [0.0, 0.0], i as f64 * 0.1));
        }
        let model = train_ensemble(&vectors, FeatureSetId::F17, 2, 5).unwrap();
        let fallbacks: Vec<Option<Label>> =
            model.cluster_models.iter().map(|m| m.fallback).collect();
        // The isolated blob must be constant-bot; the mixed blob has fewer
        // than 2 per class, so it is a fallback as well.
        assert!(fallbacks.contains(&Some(Label::Bot)));
        for v in &vectors {
            if v.values[0] > 10.0 {
                assert_eq!(classify(&model, v), Label::Bot);
            }
        }
    }

    #[test]
    fn training_vectors_route_to_their_training_cluster() {
        let vectors = separable_set(20);
        let model = train_ensemble(&vectors, FeatureSetId::F17, 3, 17).unwrap();
        let points = standardized_points(&model.scaler, &vectors, model.feature_set);
        // Refit assignments are what the ensemble trained on; routing must
        // agree for every training vector.
        for (v, p) in vectors.iter().zip(&points) {
            let routed = classify_detailed(&model, v).cluster;
            assert_eq!(routed, nearest_cluster(&model.kmeans, p).unwrap());
            assert!(routed < model.cluster_models.len());
        }
    }

    #[test]
    fn separable_training_data_is_classified_perfectly() {
        let vectors = separable_set(15);
        let model = train_global(&vectors, FeatureSetId::F17, 1).unwrap();
        let (cm, s) = evaluate_model(&model, &vectors).unwrap();
        assert_eq!(cm.fp + cm.fn_, 0, "{cm:?}");
        assert_eq!(s.accuracy, 1.0);
    }

    #[test]
    fn unlabeled_vectors_are_rejected() {
        let mut vectors = separable_set(5);
        vectors[0].label = None;
        assert!(matches!(
            train_global(&vectors, FeatureSetId::F17, 0),
            Err(PipelineError::Unlabeled(_))
        ));
        let trained = train_global(&separable_set(5), FeatureSetId::F17, 0).unwrap();
        assert!(matches!(
            evaluate_model(&trained, &vectors),
            Err(PipelineError::Unlabeled(_))
        ));
    }

    #[test]
    fn too_small_inputs_are_rejected() {
        let vectors = separable_set(2);
        assert!(matches!(
            train_ensemble(&vectors, FeatureSetId::F17, 9, 0),
            Err(PipelineError::TooFewForK { n: 4, k: 9 })
        ));
        assert!(matches!(
            train_ensemble(&[], FeatureSetId::F17, 1, 0),
            Err(PipelineError::Empty)
        ));
    }
}
