//! Versioned JSON persistence for trained ensembles.
//!
//! The file stores exactly what prediction needs: the scaler, the feature
//! set, the centroids, and each cluster's classifier. Loading validates the
//! version, the feature-name list, and every dimension before handing back a
//! usable model, so a stale or hand-edited file fails loudly instead of
//! predicting garbage.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clustering::{KMeansConfig, KMeansModel};
use crate::features::{FeatureSetId, ZScoreScaler, FEATURE_COUNT, FEATURE_NAMES};
use crate::logmodel::Label;
use crate::pipeline::{EnsembleModel, MODEL_FORMAT_VERSION};
use crate::svm::{Kernel, SvmModel};

#[derive(Debug, Error)]
pub enum PersistError {
    #[error("model io: {0}")]
    Io(#[from] std::io::Error),
    #[error("model json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid model file: {0}")]
    Invalid(String),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClusterModelFile {
    kernel: Kernel,
    gamma: Option<f64>,
    c: f64,
    bias: f64,
    support_vectors: Vec<Vec<f64>>,
    dual_coefs: Vec<f64>,
    fallback: Option<Label>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    version: String,
    feature_set: FeatureSetId,
    feature_names: Vec<String>,
    scaler: ZScoreScaler,
    k: usize,
    centroids: Vec<Vec<f64>>,
    cluster_models: Vec<ClusterModelFile>,
    training_seed: u64,
}

fn to_file(model: &EnsembleModel) -> ModelFile {
    ModelFile {
        version: model.version.clone(),
        feature_set: model.feature_set,
        feature_names: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
        scaler: model.scaler.clone(),
        k: model.kmeans.centroids.len(),
        centroids: model.kmeans.centroids.clone(),
        cluster_models: model
            .cluster_models
            .iter()
            .map(|m| ClusterModelFile {
                kernel: m.kernel,
                gamma: m.gamma,
                c: m.c,
                bias: m.bias,
                support_vectors: m.support_vectors.clone(),
                dual_coefs: m.dual_coefs.clone(),
                fallback: m.fallback,
            })
            .collect(),
        training_seed: model.training_seed,
    }
}

/// Serialize a model to its canonical JSON text.
pub fn model_to_json(model: &EnsembleModel) -> String {
    let mut text = serde_json::to_string_pretty(&to_file(model))
        .expect("model file serialization is infallible");
    text.push('\n');
    text
}

/// Write a model to any sink as canonical JSON.
pub fn save_model<W: Write>(model: &EnsembleModel, mut writer: W) -> Result<(), PersistError> {
    writer.write_all(model_to_json(model).as_bytes())?;
    Ok(())
}

fn invalid(msg: impl Into<String>) -> PersistError {
    PersistError::Invalid(msg.into())
}

/// Read and validate a model file.
pub fn load_model<R: Read>(mut reader: R) -> Result<EnsembleModel, PersistError> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    let file: ModelFile = serde_json::from_str(&text)?;

    if file.version != MODEL_FORMAT_VERSION {
        return Err(invalid(format!(
            "unsupported model version '{}', expected '{MODEL_FORMAT_VERSION}'",
            file.version
        )));
    }
    if file.feature_names != FEATURE_NAMES {
        return Err(invalid("feature name list does not match this build"));
    }
    if file.scaler.means.len() != FEATURE_COUNT || file.scaler.stds.len() != FEATURE_COUNT {
        return Err(invalid("scaler must cover all 17 features"));
    }
    if file.k == 0 || file.centroids.len() != file.k {
        return Err(invalid(format!(
            "centroid count {} does not match k={}",
            file.centroids.len(),
            file.k
        )));
    }
    if file.cluster_models.len() != file.k {
        return Err(invalid(format!(
            "cluster model count {} does not match k={}",
            file.cluster_models.len(),
            file.k
        )));
    }
    let dim = file.feature_set.dim();
    for (i, c) in file.centroids.iter().enumerate() {
        if c.len() != dim {
            return Err(invalid(format!(
                "centroid {i} has dimension {}, feature set {} needs {dim}",
                c.len(),
                file.feature_set
            )));
        }
        if c.iter().any(|x| !x.is_finite()) {
            return Err(invalid(format!("centroid {i} has a non-finite coordinate")));
        }
    }
    for (i, m) in file.cluster_models.iter().enumerate() {
        if m.support_vectors.len() != m.dual_coefs.len() {
            return Err(invalid(format!(
                "cluster {i}: {} support vectors but {} coefficients",
                m.support_vectors.len(),
                m.dual_coefs.len()
            )));
        }
        if m.fallback.is_none() && m.support_vectors.is_empty() {
            return Err(invalid(format!(
                "cluster {i} has neither support vectors nor a fallback label"
            )));
        }
        if let Some(sv) = m.support_vectors.iter().find(|sv| sv.len() != dim) {
            return Err(invalid(format!(
                "cluster {i}: support vector dimension {} does not match feature set {}",
                sv.len(),
                file.feature_set
            )));
        }
    }

    // The clustering trace is not persisted; prediction needs only the
    // centroids.
    let kmeans = KMeansModel {
        centroids: file.centroids,
        inertia: 0.0,
        iterations_run: 0,
        inertia_history: Vec::new(),
        config: KMeansConfig::new(file.k, file.training_seed),
    };
    Ok(EnsembleModel {
        version: file.version,
        feature_set: file.feature_set,
        scaler: file.scaler,
        kmeans,
        cluster_models: file
            .cluster_models
            .into_iter()
            .map(|m| SvmModel {
                kernel: m.kernel,
                gamma: m.gamma,
                c: m.c,
                bias: m.bias,
                support_vectors: m.support_vectors,
                dual_coefs: m.dual_coefs,
                fallback: m.fallback,
            })
            .collect(),
        training_seed: file.training_seed,
    })
}
