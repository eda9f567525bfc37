//! Nested model selection for the cluster count.
//!
//! The labeled, balanced vectors are shuffled once and split into 5 folds of
//! near-equal size. Each of the 5 rotations holds out one fold as the test
//! set; of the remaining folds, the last one in shuffled order is the
//! validation set and the other three are the training set. Every candidate
//! cluster count in [`K_RANGE`] trains an ensemble on the training folds;
//! the one with the best validation accuracy (ties to the smallest k) is
//! kept as-is, never retrained, and scored once on the test fold.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::features::{FeatureSetId, PlayerVector};
use crate::logmodel::Label;
use crate::metrics::{ConfusionMatrix, Scores};
use crate::pipeline::{
    evaluate_model, train_ensemble, EnsembleModel, PipelineError, SALT_CANDIDATE,
    SALT_FOLD_SHUFFLE,
};
use crate::seed::{derive_seed, seeded_rng};

/// Candidate cluster counts evaluated by [`select_k`].
pub const K_RANGE: RangeInclusive<usize> = 4..=14;

/// Number of cross-validation folds.
pub const FOLD_COUNT: usize = 5;

/// Which fold plays which role in one rotation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldLayout {
    pub test_fold: usize,
    pub validation_fold: usize,
    pub train_folds: Vec<usize>,
}

/// Outcome of one rotation: validation accuracy per candidate k, the pick,
/// and the held-out test scores of the picked model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotationReport {
    pub layout: FoldLayout,
    pub per_k: BTreeMap<usize, Scores>,
    pub chosen_k: usize,
    pub test_confusion: ConfusionMatrix,
    pub test: Scores,
}

/// Full protocol record. The top-level `per_k`, `chosen_k`, and
/// `fold_layout` describe the first rotation, whose model is the deployable
/// artifact; `rotations` holds all five.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub fold_layout: FoldLayout,
    pub per_k: BTreeMap<usize, Scores>,
    pub chosen_k: usize,
    pub rotations: Vec<RotationReport>,
    pub mean_test: Scores,
}

/// Split indices 0..n into `FOLD_COUNT` folds whose sizes differ by at most
/// one, in shuffled order.
fn make_folds(n: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seeded_rng(seed));
    let base = n / FOLD_COUNT;
    let extra = n % FOLD_COUNT;
    let mut folds = Vec::with_capacity(FOLD_COUNT);
    let mut cursor = 0;
    for fold in 0..FOLD_COUNT {
        let len = base + usize::from(fold < extra);
        folds.push(order[cursor..cursor + len].to_vec());
        cursor += len;
    }
    folds
}

/// The exact fold split [`select_k`] derives from a protocol seed, exposed
/// so comparison runs can train on identical folds.
pub fn protocol_folds(n: usize, protocol_seed: u64) -> Vec<Vec<usize>> {
    make_folds(n, derive_seed(protocol_seed, &[SALT_FOLD_SHUFFLE]))
}

/// The training seed [`select_k`] gives the candidate with cluster count `k`
/// in one rotation. Retraining with it reproduces the candidate bit for bit.
pub fn candidate_seed(protocol_seed: u64, rotation: usize, k: usize) -> u64 {
    derive_seed(protocol_seed, &[SALT_CANDIDATE, rotation as u64, k as u64])
}

/// Fold roles for one rotation: the rotation's fold is the test set and the
/// last remaining fold in shuffled order is the validation set.
pub fn rotation_layout(rotation: usize) -> FoldLayout {
    let remaining: Vec<usize> = (0..FOLD_COUNT).filter(|&f| f != rotation).collect();
    let (&validation_fold, train_folds) =
        remaining.split_last().expect("FOLD_COUNT > 1 leaves folds to train on");
    FoldLayout { test_fold: rotation, validation_fold, train_folds: train_folds.to_vec() }
}

fn gather(vectors: &[PlayerVector], folds: &[Vec<usize>], which: &[usize]) -> Vec<PlayerVector> {
    which
        .iter()
        .flat_map(|&f| folds[f].iter().map(|&i| vectors[i].clone()))
        .collect()
}

/// Run the nested selection protocol and return the first rotation's chosen
/// model, the full report, and the mean test scores across rotations.
pub fn select_k(
    vectors: &[PlayerVector],
    fs: FeatureSetId,
    seed: u64,
) -> Result<(EnsembleModel, SelectionReport), PipelineError> {
    let folds = protocol_folds(vectors.len(), seed);
    for (fold, members) in folds.iter().enumerate() {
        let bots = members
            .iter()
            .filter(|&&i| vectors[i].label == Some(Label::Bot))
            .count();
        if bots == 0 || bots == members.len() {
            return Err(PipelineError::SingleClassFold { fold });
        }
    }

    let mut rotations = Vec::with_capacity(FOLD_COUNT);
    let mut deployable: Option<EnsembleModel> = None;
    for rotation in 0..FOLD_COUNT {
        let layout = rotation_layout(rotation);
        let train = gather(vectors, &folds, &layout.train_folds);
        let validation = gather(vectors, &folds, &[layout.validation_fold]);
        let test = gather(vectors, &folds, &[layout.test_fold]);

        let mut per_k = BTreeMap::new();
        let mut best: Option<(usize, f64, EnsembleModel)> = None;
        for k in K_RANGE {
            let model = train_ensemble(&train, fs, k, candidate_seed(seed, rotation, k))?;
            let (_, val_scores) = evaluate_model(&model, &validation)?;
            per_k.insert(k, val_scores);
            // Strict > with ascending k keeps the smallest k on ties.
            if best.as_ref().is_none_or(|(_, acc, _)| val_scores.accuracy > *acc) {
                best = Some((k, val_scores.accuracy, model));
            }
        }
        let (chosen_k, _, model) = best.expect("K_RANGE is non-empty");

        let (test_confusion, test_scores) = evaluate_model(&model, &test)?;
        rotations.push(RotationReport {
            layout,
            per_k,
            chosen_k,
            test_confusion,
            test: test_scores,
        });
        if rotation == 0 {
            deployable = Some(model);
        }
    }

    let mean_test = crate::metrics::mean_scores(
        &rotations.iter().map(|r| r.test).collect::<Vec<_>>(),
    );
    let first = &rotations[0];
    let report = SelectionReport {
        fold_layout: first.layout.clone(),
        per_k: first.per_k.clone(),
        chosen_k: first.chosen_k,
        rotations,
        mean_test,
    };
    Ok((deployable.expect("rotation 0 always runs"), report))
}
