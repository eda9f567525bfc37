//! K-means clustering over standardized feature vectors, written from first
//! principles: seeded greedy k-means++ initialization, Lloyd iterations with
//! a single-point exchange refinement between stationary states, and
//! empty-cluster repair so every cluster can host a classifier.
//!
//! All tie-breaks go to the lowest cluster index and all randomness flows
//! from the config seed, so a fit is a pure function of (points, config).

use thiserror::Error;

use crate::seed::seeded_rng;
use rand::Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansConfig {
    pub k: usize,
    pub max_iterations: usize,
    /// Stop once the total centroid movement of an update falls to or below
    /// this threshold.
    pub tolerance: f64,
    pub seed: u64,
}

impl KMeansConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        KMeansConfig { k, max_iterations: 300, tolerance: 1e-6, seed }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansModel {
    pub centroids: Vec<Vec<f64>>,
    /// Sum of squared distances from each point to its assigned centroid,
    /// recomputed against the final centroids.
    pub inertia: f64,
    pub iterations_run: usize,
    /// Inertia after each assignment pass; non-increasing by construction.
    pub inertia_history: Vec<f64>,
    pub config: KMeansConfig,
}

#[derive(Debug, Error, PartialEq)]
pub enum ClusterError {
    #[error("k must be at least 1")]
    ZeroK,
    #[error("{n} points cannot support k={k}")]
    TooFewPoints { n: usize, k: usize },
    #[error("only {distinct} distinct points; k={k} needs at least k distinct")]
    TooFewDistinct { distinct: usize, k: usize },
    #[error("point {index} is non-finite")]
    NonFinite { index: usize },
    #[error("expected dimension {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Nearest centroid by squared Euclidean distance; ties go to the lowest
/// index.
fn nearest(centroids: &[Vec<f64>], point: &[f64]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (idx, c) in centroids.iter().enumerate() {
        let d = dist2(c, point);
        if d < best_d {
            best_d = d;
            best = idx;
        }
    }
    best
}

fn validate(points: &[Vec<f64>], cfg: &KMeansConfig) -> Result<usize, ClusterError> {
    if cfg.k == 0 {
        return Err(ClusterError::ZeroK);
    }
    if points.len() < cfg.k {
        return Err(ClusterError::TooFewPoints { n: points.len(), k: cfg.k });
    }
    let d = points[0].len();
    for (index, p) in points.iter().enumerate() {
        if p.len() != d {
            return Err(ClusterError::DimensionMismatch { expected: d, found: p.len() });
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(ClusterError::NonFinite { index });
        }
    }
    Ok(d)
}

/// Seeded greedy k-means++: the first seed is uniform; each later seed is
/// picked from a few candidates drawn proportional to the squared distance
/// from the nearest already-chosen seed, keeping the candidate that leaves
/// the smallest total potential. Duplicate points carry zero weight, so
/// seeds are always distinct.
fn plus_plus_init(points: &[Vec<f64>], cfg: &KMeansConfig) -> Result<Vec<Vec<f64>>, ClusterError> {
    let n = points.len();
    let mut rng = seeded_rng(cfg.seed);
    let mut centroids: Vec<Vec<f64>> = Vec::with_capacity(cfg.k);
    centroids.push(points[rng.random_range(0..n)].clone());

    let trials = 2 + (cfg.k as f64).ln().floor() as usize;
    let mut weights: Vec<f64> = points.iter().map(|p| dist2(p, &centroids[0])).collect();
    while centroids.len() < cfg.k {
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(ClusterError::TooFewDistinct { distinct: centroids.len(), k: cfg.k });
        }
        let mut best: Option<(usize, f64)> = None;
        for _ in 0..trials {
            let target = rng.random::<f64>() * total;
            let mut cumulative = 0.0;
            let mut chosen = None;
            for (idx, &w) in weights.iter().enumerate() {
                if w <= 0.0 {
                    continue;
                }
                cumulative += w;
                if cumulative > target {
                    chosen = Some(idx);
                    break;
                }
            }
            // Rounding can push the walk past the last positive weight.
            let chosen = chosen
                .or_else(|| weights.iter().rposition(|&w| w > 0.0))
                .expect("total > 0 implies a positive weight");
            let potential: f64 = weights
                .iter()
                .enumerate()
                .map(|(idx, &w)| w.min(dist2(&points[idx], &points[chosen])))
                .sum();
            if best.is_none_or(|(_, p)| potential < p) {
                best = Some((chosen, potential));
            }
        }
        let (chosen, _) = best.expect("trials >= 1 always records a candidate");
        let seed_point = points[chosen].clone();
        for (idx, w) in weights.iter_mut().enumerate() {
            *w = w.min(dist2(&points[idx], &seed_point));
        }
        centroids.push(seed_point);
    }
    Ok(centroids)
}

/// Assign every point to its nearest centroid, reseeding any empty cluster
/// to the point farthest from its own centroid (drawn from a cluster that
/// can spare a member) until all k clusters are populated.
fn assign_with_repair(
    points: &[Vec<f64>],
    centroids: &mut [Vec<f64>],
) -> Result<Vec<usize>, ClusterError> {
    let k = centroids.len();
    for _round in 0..=k {
        let assignments: Vec<usize> = points.iter().map(|p| nearest(centroids, p)).collect();
        let mut sizes = vec![0usize; k];
        for &a in &assignments {
            sizes[a] += 1;
        }
        let empties: Vec<usize> = (0..k).filter(|&c| sizes[c] == 0).collect();
        if empties.is_empty() {
            return Ok(assignments);
        }
        let mut taken = vec![false; points.len()];
        for c in empties {
            let mut donor = None;
            let mut donor_d = -1.0;
            for (idx, p) in points.iter().enumerate() {
                if taken[idx] || sizes[assignments[idx]] <= 1 {
                    continue;
                }
                let d = dist2(p, &centroids[assignments[idx]]);
                if d > donor_d {
                    donor_d = d;
                    donor = Some(idx);
                }
            }
            match donor {
                Some(idx) => {
                    taken[idx] = true;
                    sizes[assignments[idx]] -= 1;
                    sizes[c] += 1;
                    centroids[c] = points[idx].clone();
                }
                // Every populated cluster is a singleton: there are fewer
                // distinct points than k.
                None => {
                    return Err(ClusterError::TooFewDistinct {
                        distinct: k - 1,
                        k,
                    })
                }
            }
        }
    }
    // Repair failed to stabilize within k rounds; only duplicate-heavy
    // degenerate inputs can reach this.
    Err(ClusterError::TooFewDistinct { distinct: k - 1, k })
}

fn inertia_of(points: &[Vec<f64>], centroids: &[Vec<f64>], assignments: &[usize]) -> f64 {
    points
        .iter()
        .zip(assignments)
        .map(|(p, &a)| dist2(p, &centroids[a]))
        .sum()
}

/// Find the single-point move with the largest exact inertia decrease from a
/// Lloyd-stationary assignment, if any. Moving a point between clusters
/// changes the objective by size-weighted terms (the donor mean chases the
/// leaver, the recipient mean absorbs it), so a move can pay off even though
/// plain nearest-centroid routing is already stable; after the move the point
/// is strictly nearer its new mean, so resuming Lloyd never undoes it.
fn improving_exchange(points: &[Vec<f64>], assignments: &[usize], k: usize) -> Option<(usize, usize)> {
    let d = points[0].len();
    let mut sums = vec![vec![0.0; d]; k];
    let mut sizes = vec![0usize; k];
    for (p, &a) in points.iter().zip(assignments) {
        sizes[a] += 1;
        for (slot, v) in sums[a].iter_mut().zip(p) {
            *slot += v;
        }
    }
    let means: Vec<Vec<f64>> = sums
        .iter()
        .zip(&sizes)
        .map(|(s, &n)| s.iter().map(|v| v / n as f64).collect())
        .collect();

    let mut best: Option<(usize, usize, f64)> = None;
    for (idx, p) in points.iter().enumerate() {
        let from = assignments[idx];
        // A singleton donor would leave an empty cluster behind.
        if sizes[from] <= 1 {
            continue;
        }
        let n_from = sizes[from] as f64;
        let leave = n_from / (n_from - 1.0) * dist2(p, &means[from]);
        for to in 0..k {
            if to == from {
                continue;
            }
            let n_to = sizes[to] as f64;
            let join = n_to / (n_to + 1.0) * dist2(p, &means[to]);
            let delta = join - leave;
            // Strict improvement beyond rounding noise on the two terms.
            if delta < -(join + leave) * 1e-12 && best.is_none_or(|(.., b)| delta < b) {
                best = Some((idx, to, delta));
            }
        }
    }
    best.map(|(idx, to, _)| (idx, to))
}

/// Lloyd iterations from explicit starting centroids, restarting past each
/// stationary state while an inertia-decreasing single-point exchange exists.
/// Exposed so callers can study the optimizer separately from the seeded
/// initialization.
pub fn fit_kmeans_from(
    points: &[Vec<f64>],
    initial_centroids: Vec<Vec<f64>>,
    cfg: &KMeansConfig,
) -> Result<(KMeansModel, Vec<usize>), ClusterError> {
    let d = validate(points, cfg)?;
    if initial_centroids.len() != cfg.k {
        return Err(ClusterError::TooFewPoints { n: initial_centroids.len(), k: cfg.k });
    }
    for c in &initial_centroids {
        if c.len() != d {
            return Err(ClusterError::DimensionMismatch { expected: d, found: c.len() });
        }
    }

    let mut centroids = initial_centroids;
    let mut assignments = assign_with_repair(points, &mut centroids)?;
    let mut inertia_history = vec![inertia_of(points, &centroids, &assignments)];
    let mut iterations_run = 0;

    while iterations_run < cfg.max_iterations {
        // Means of the current assignment; every cluster is nonempty after
        // repair.
        let mut sums = vec![vec![0.0; d]; cfg.k];
        let mut counts = vec![0usize; cfg.k];
        for (p, &a) in points.iter().zip(&assignments) {
            counts[a] += 1;
            for (slot, v) in sums[a].iter_mut().zip(p) {
                *slot += v;
            }
        }
        let mut movement = 0.0;
        for c in 0..cfg.k {
            for slot in sums[c].iter_mut() {
                *slot /= counts[c] as f64;
            }
            movement += dist2(&sums[c], &centroids[c]).sqrt();
        }
        centroids = sums;
        iterations_run += 1;

        assignments = assign_with_repair(points, &mut centroids)?;
        let inertia = inertia_of(points, &centroids, &assignments);
        let prev = *inertia_history.last().unwrap();
        assert!(
            inertia <= prev + prev.abs() * 1e-12 + 1e-9,
            "inertia increased: {prev} -> {inertia}"
        );
        inertia_history.push(inertia);

        if movement <= cfg.tolerance {
            // Lloyd is stationary; resume after one cost-decreasing exchange
            // when the iteration budget still covers the follow-up pass.
            let exchange = if iterations_run < cfg.max_iterations {
                improving_exchange(points, &assignments, cfg.k)
            } else {
                None
            };
            match exchange {
                Some((idx, to)) => assignments[idx] = to,
                None => break,
            }
        }
    }

    let inertia = *inertia_history.last().unwrap();
    let model = KMeansModel {
        centroids,
        inertia,
        iterations_run,
        inertia_history,
        config: cfg.clone(),
    };
    Ok((model, assignments))
}

/// Fit k-means on the given points. Deterministic: identical (points, cfg)
/// give bit-identical models. The returned assignments always agree with
/// [`nearest_cluster`] against the final centroids.
pub fn fit_kmeans(
    points: &[Vec<f64>],
    cfg: &KMeansConfig,
) -> Result<(KMeansModel, Vec<usize>), ClusterError> {
    validate(points, cfg)?;
    let initial = plus_plus_init(points, cfg)?;
    fit_kmeans_from(points, initial, cfg)
}

/// Route a point to the cluster with the Euclidean-nearest centroid; ties go
/// to the lowest index.
pub fn nearest_cluster(model: &KMeansModel, point: &[f64]) -> Result<usize, ClusterError> {
    let d = model.centroids[0].len();
    if point.len() != d {
        return Err(ClusterError::DimensionMismatch { expected: d, found: point.len() });
    }
    Ok(nearest(&model.centroids, point))
}
