//! Binary soft-margin SVM trained by sequential minimal optimization,
//! written from first principles.
//!
//! Labels are +1 for bot and -1 for human; a decision value of exactly 0
//! predicts bot. Training is deterministic under the config seed: the only
//! randomness is the second-choice partner heuristic.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::logmodel::Label;
use crate::seed::seeded_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kernel {
    Linear,
    Rbf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmConfig {
    /// Box constraint on every dual variable.
    pub c: f64,
    pub kernel: Kernel,
    /// RBF width; `None` resolves to 1/d at training time. Ignored for the
    /// linear kernel.
    pub gamma: Option<f64>,
    /// KKT slack below which a point does not count as a violator.
    pub kkt_tolerance: f64,
    /// Consecutive violation-free full sweeps required to stop.
    pub max_passes: usize,
    pub seed: u64,
}

impl SvmConfig {
    pub fn new(seed: u64) -> Self {
        SvmConfig {
            c: 1.0,
            kernel: Kernel::Rbf,
            gamma: None,
            kkt_tolerance: 1e-3,
            max_passes: 10,
            seed,
        }
    }
}

/// A trained classifier: the kernel expansion over support vectors, or a
/// constant fallback when a training subset was degenerate.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub kernel: Kernel,
    /// Resolved RBF width; `None` for linear models.
    pub gamma: Option<f64>,
    pub c: f64,
    pub bias: f64,
    pub support_vectors: Vec<Vec<f64>>,
    /// alpha_i * y_i per support vector.
    pub dual_coefs: Vec<f64>,
    pub fallback: Option<Label>,
}

impl SvmModel {
    /// Constant classifier used for clusters that cannot host a real SVM.
    pub fn constant(label: Label) -> SvmModel {
        SvmModel {
            kernel: Kernel::Linear,
            gamma: None,
            c: 0.0,
            bias: 0.0,
            support_vectors: Vec::new(),
            dual_coefs: Vec::new(),
            fallback: Some(label),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SvmError {
    #[error("degenerate training set: only one class present")]
    DegenerateTrainingSet,
    #[error("empty training set")]
    Empty,
    #[error("points must have at least one dimension")]
    ZeroDim,
    #[error("{xs} points but {ys} labels")]
    LengthMismatch { xs: usize, ys: usize },
    #[error("label {index} is not +1 or -1")]
    BadLabel { index: usize },
    #[error("point {index} is non-finite")]
    NonFinite { index: usize },
    #[error("gamma must be positive")]
    BadGamma,
    #[error("c must be positive")]
    BadC,
    #[error("expected dimension {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("constant model has no margin")]
    ConstantModel,
}

/// Map a class to its numeric training label.
pub fn label_to_y(label: Label) -> f64 {
    match label {
        Label::Bot => 1.0,
        Label::Human => -1.0,
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn kernel_eval(kernel: Kernel, gamma: f64, a: &[f64], b: &[f64]) -> f64 {
    match kernel {
        Kernel::Linear => dot(a, b),
        Kernel::Rbf => (-gamma * dist2(a, b)).exp(),
    }
}

/// Per-run training diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainStats {
    /// Dual objective value after each accepted step (starting at 0);
    /// non-decreasing.
    pub objective_history: Vec<f64>,
    pub sweeps: usize,
    /// Final dual variable per training point.
    pub alphas: Vec<f64>,
}

// Precompute the Gram matrix up to this many points; beyond it, kernel rows
// are evaluated on demand.
const GRAM_LIMIT: usize = 2048;
// Bail out of pathological float cycling; never reached on sane inputs.
const SWEEP_CAP: usize = 10_000;
// Reject alpha steps smaller than this relative change.
const STEP_EPS: f64 = 1e-7;

struct Solver<'a> {
    xs: &'a [Vec<f64>],
    ys: &'a [f64],
    c: f64,
    kernel: Kernel,
    gamma: f64,
    tol: f64,
    n: usize,
    alphas: Vec<f64>,
    bias: f64,
    /// errors[i] = f(x_i) - y_i, maintained incrementally.
    errors: Vec<f64>,
    gram: Option<Vec<f64>>,
    rng: rand_chacha::ChaCha8Rng,
    objective: f64,
    objective_history: Vec<f64>,
}

impl<'a> Solver<'a> {
    fn k(&self, i: usize, j: usize) -> f64 {
        match &self.gram {
            Some(g) => g[i * self.n + j],
            None => kernel_eval(self.kernel, self.gamma, &self.xs[i], &self.xs[j]),
        }
    }

    fn non_bound(&self, i: usize) -> bool {
        self.alphas[i] > 0.0 && self.alphas[i] < self.c
    }

    /// Try to optimize the pair (i, j). Returns false when the pair cannot
    /// make progress.
    fn take_step(&mut self, i: usize, j: usize) -> bool {
        if i == j {
            return false;
        }
        let (yi, yj) = (self.ys[i], self.ys[j]);
        let (ai, aj) = (self.alphas[i], self.alphas[j]);
        let (ei, ej) = (self.errors[i], self.errors[j]);
        let s = yi * yj;

        let (lo, hi) = if yi != yj {
            ((aj - ai).max(0.0), (self.c + aj - ai).min(self.c))
        } else {
            ((ai + aj - self.c).max(0.0), (ai + aj).min(self.c))
        };
        if hi - lo < 1e-12 {
            return false;
        }

        let k_ii = self.k(i, i);
        let k_jj = self.k(j, j);
        let k_ij = self.k(i, j);
        let eta = k_ii + k_jj - 2.0 * k_ij;

        let mut aj_new = if eta > 0.0 {
            (aj + yj * (ei - ej) / eta).clamp(lo, hi)
        } else {
            // Non-positive curvature: the objective along the constraint
            // line is linear or concave, so the best move is an endpoint.
            let f1 = yi * (ei + self.bias) - ai * k_ii - s * aj * k_ij;
            let f2 = yj * (ej + self.bias) - s * ai * k_ij - aj * k_jj;
            let l1 = ai + s * (aj - lo);
            let h1 = ai + s * (aj - hi);
            let psi_lo =
                l1 * f1 + lo * f2 + 0.5 * l1 * l1 * k_ii + 0.5 * lo * lo * k_jj + s * lo * l1 * k_ij;
            let psi_hi =
                h1 * f1 + hi * f2 + 0.5 * h1 * h1 * k_ii + 0.5 * hi * hi * k_jj + s * hi * h1 * k_ij;
            if psi_lo < psi_hi - 1e-12 {
                lo
            } else if psi_lo > psi_hi + 1e-12 {
                hi
            } else {
                return false;
            }
        };
        if (aj_new - aj).abs() < STEP_EPS * (aj_new + aj + STEP_EPS) {
            return false;
        }
        // Keep the equality constraint exact: alpha_i moves by -s times the
        // move of alpha_j.
        if aj_new < 0.0 {
            aj_new = 0.0;
        } else if aj_new > self.c {
            aj_new = self.c;
        }
        let ai_new = (ai + s * (aj - aj_new)).clamp(0.0, self.c);

        let di = ai_new - ai;
        let dj = aj_new - aj;

        let b1 = self.bias - ei - yi * di * k_ii - yj * dj * k_ij;
        let b2 = self.bias - ej - yi * di * k_ij - yj * dj * k_jj;
        let b_new = if ai_new > 0.0 && ai_new < self.c {
            b1
        } else if aj_new > 0.0 && aj_new < self.c {
            b2
        } else {
            (b1 + b2) / 2.0
        };
        let db = b_new - self.bias;

        // Dual objective increment; u_l = f(x_l) with the old variables.
        // The bias terms cancel because yi*di + yj*dj = 0.
        let ui = ei + yi;
        let uj = ej + yj;
        let dw = di + dj
            - yi * di * ui
            - yj * dj * uj
            - 0.5 * di * di * k_ii
            - 0.5 * dj * dj * k_jj
            - s * di * dj * k_ij;
        assert!(
            dw >= -1e-9 * (1.0 + self.objective.abs()),
            "dual objective decreased by {dw}"
        );
        self.objective += dw;
        self.objective_history.push(self.objective);

        self.alphas[i] = ai_new;
        self.alphas[j] = aj_new;
        self.bias = b_new;
        for l in 0..self.n {
            self.errors[l] += yi * di * self.k(i, l) + yj * dj * self.k(j, l) + db;
        }
        true
    }

    /// Examine point i; when it violates the KKT conditions, pick a random
    /// non-bound partner, then fall back to scanning the non-bound set and
    /// finally every index, each from a random start.
    fn examine(&mut self, i: usize) -> bool {
        let r = self.errors[i] * self.ys[i];
        let violates =
            (r < -self.tol && self.alphas[i] < self.c) || (r > self.tol && self.alphas[i] > 0.0);
        if !violates {
            return false;
        }

        let non_bound: Vec<usize> = (0..self.n).filter(|&l| l != i && self.non_bound(l)).collect();
        if !non_bound.is_empty() {
            let pick = non_bound[self.rng.random_range(0..non_bound.len())];
            if self.take_step(i, pick) {
                return true;
            }
            let start = self.rng.random_range(0..non_bound.len());
            for offset in 0..non_bound.len() {
                let j = non_bound[(start + offset) % non_bound.len()];
                if self.take_step(i, j) {
                    return true;
                }
            }
        }
        let start = self.rng.random_range(0..self.n);
        for offset in 0..self.n {
            let j = (start + offset) % self.n;
            if self.take_step(i, j) {
                return true;
            }
        }
        false
    }

    fn run(&mut self, max_passes: usize) -> usize {
        let mut clean_full_sweeps = 0;
        let mut examine_all = true;
        let mut sweeps = 0;
        while clean_full_sweeps < max_passes && sweeps < SWEEP_CAP {
            let mut changed = 0usize;
            if examine_all {
                for i in 0..self.n {
                    if self.examine(i) {
                        changed += 1;
                    }
                }
            } else {
                for i in 0..self.n {
                    if self.non_bound(i) && self.examine(i) {
                        changed += 1;
                    }
                }
            }
            sweeps += 1;
            if examine_all {
                if changed == 0 {
                    clean_full_sweeps += 1;
                } else {
                    clean_full_sweeps = 0;
                    examine_all = false;
                }
            } else if changed == 0 {
                examine_all = true;
            }
        }
        sweeps
    }
}

fn validate_training_input(
    xs: &[Vec<f64>],
    ys: &[f64],
    cfg: &SvmConfig,
) -> Result<usize, SvmError> {
    if xs.len() != ys.len() {
        return Err(SvmError::LengthMismatch { xs: xs.len(), ys: ys.len() });
    }
    if xs.is_empty() {
        return Err(SvmError::Empty);
    }
    let d = xs[0].len();
    if d == 0 {
        return Err(SvmError::ZeroDim);
    }
    for (index, x) in xs.iter().enumerate() {
        if x.len() != d {
            return Err(SvmError::DimensionMismatch { expected: d, found: x.len() });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(SvmError::NonFinite { index });
        }
    }
    for (index, &y) in ys.iter().enumerate() {
        if y != 1.0 && y != -1.0 {
            return Err(SvmError::BadLabel { index });
        }
    }
    if ys.iter().all(|&y| y == 1.0) || ys.iter().all(|&y| y == -1.0) {
        return Err(SvmError::DegenerateTrainingSet);
    }
    if cfg.c <= 0.0 {
        return Err(SvmError::BadC);
    }
    if matches!(cfg.gamma, Some(g) if g <= 0.0) {
        return Err(SvmError::BadGamma);
    }
    Ok(d)
}

/// Train and return the model together with optimizer diagnostics.
pub fn train_svm_with_stats(
    xs: &[Vec<f64>],
    ys: &[f64],
    cfg: &SvmConfig,
) -> Result<(SvmModel, TrainStats), SvmError> {
    let d = validate_training_input(xs, ys, cfg)?;
    let n = xs.len();
    let gamma = match cfg.kernel {
        Kernel::Rbf => cfg.gamma.unwrap_or(1.0 / d as f64),
        Kernel::Linear => 0.0,
    };

    let gram = (n <= GRAM_LIMIT).then(|| {
        let mut g = vec![0.0; n * n];
        for i in 0..n {
            g[i * n + i] = kernel_eval(cfg.kernel, gamma, &xs[i], &xs[i]);
            for j in 0..i {
                let v = kernel_eval(cfg.kernel, gamma, &xs[i], &xs[j]);
                g[i * n + j] = v;
                g[j * n + i] = v;
            }
        }
        g
    });

    let mut solver = Solver {
        xs,
        ys,
        c: cfg.c,
        kernel: cfg.kernel,
        gamma,
        tol: cfg.kkt_tolerance,
        n,
        alphas: vec![0.0; n],
        bias: 0.0,
        // With all alphas zero, f(x) = 0, so E_i = -y_i.
        errors: ys.iter().map(|&y| -y).collect(),
        gram,
        rng: seeded_rng(cfg.seed),
        objective: 0.0,
        objective_history: vec![0.0],
    };
    let sweeps = solver.run(cfg.max_passes);

    let mut support_vectors = Vec::new();
    let mut dual_coefs = Vec::new();
    for i in 0..n {
        if solver.alphas[i] > 0.0 {
            support_vectors.push(xs[i].clone());
            dual_coefs.push(solver.alphas[i] * ys[i]);
        }
    }
    let model = SvmModel {
        kernel: cfg.kernel,
        gamma: match cfg.kernel {
            Kernel::Rbf => Some(gamma),
            Kernel::Linear => None,
        },
        c: cfg.c,
        bias: solver.bias,
        support_vectors,
        dual_coefs,
        fallback: None,
    };
    let stats = TrainStats {
        objective_history: solver.objective_history,
        sweeps,
        alphas: solver.alphas,
    };
    Ok((model, stats))
}

/// Train a classifier; see [`train_svm_with_stats`] for diagnostics.
pub fn train_svm(xs: &[Vec<f64>], ys: &[f64], cfg: &SvmConfig) -> Result<SvmModel, SvmError> {
    train_svm_with_stats(xs, ys, cfg).map(|(model, _)| model)
}

/// Signed kernel-expansion value. Errors on fallback models, which have no
/// margin.
pub fn decision_value(model: &SvmModel, x: &[f64]) -> Result<f64, SvmError> {
    if model.fallback.is_some() {
        return Err(SvmError::ConstantModel);
    }
    let d = model.support_vectors.first().map_or(0, Vec::len);
    if x.len() != d {
        return Err(SvmError::DimensionMismatch { expected: d, found: x.len() });
    }
    let gamma = model.gamma.unwrap_or(0.0);
    let sum: f64 = model
        .support_vectors
        .iter()
        .zip(&model.dual_coefs)
        .map(|(sv, coef)| coef * kernel_eval(model.kernel, gamma, sv, x))
        .sum();
    Ok(sum + model.bias)
}

/// Classify a point; a decision value of exactly 0 counts as bot. Fallback
/// models return their constant class for every input.
pub fn predict(model: &SvmModel, x: &[f64]) -> Result<Label, SvmError> {
    if let Some(label) = model.fallback {
        return Ok(label);
    }
    Ok(if decision_value(model, x)? >= 0.0 { Label::Bot } else { Label::Human })
}

/// Worst KKT residuals over a training set, split by the three dual-variable
/// cases. Each value is how far the corresponding condition is exceeded;
/// all three at or below the training tolerance certifies convergence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktSummary {
    /// max(1 - y*f) over points with alpha = 0 (should be <= tol).
    pub worst_zero: f64,
    /// max|y*f - 1| over points with 0 < alpha < C.
    pub worst_interior: f64,
    /// max(y*f - 1) over points with alpha = C.
    pub worst_bound: f64,
}

impl KktSummary {
    pub fn max(&self) -> f64 {
        self.worst_zero.max(self.worst_interior).max(self.worst_bound)
    }
}

/// Evaluate the KKT conditions of a trained model against its training data.
/// `alphas` come from [`TrainStats`]. Bound cases are classified with a
/// small epsilon so float noise cannot flip a case.
pub fn kkt_summary(
    model: &SvmModel,
    xs: &[Vec<f64>],
    ys: &[f64],
    alphas: &[f64],
) -> Result<KktSummary, SvmError> {
    let eps = 1e-9 * model.c.max(1.0);
    let mut summary = KktSummary { worst_zero: 0.0, worst_interior: 0.0, worst_bound: 0.0 };
    for ((x, &y), &alpha) in xs.iter().zip(ys).zip(alphas) {
        let yf = y * decision_value(model, x)?;
        if alpha <= eps {
            summary.worst_zero = summary.worst_zero.max(1.0 - yf);
        } else if alpha >= model.c - eps {
            summary.worst_bound = summary.worst_bound.max(yf - 1.0);
        } else {
            summary.worst_interior = summary.worst_interior.max((yf - 1.0).abs());
        }
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn linear_cfg(c: f64, seed: u64) -> SvmConfig {
        SvmConfig { kernel: Kernel::Linear, c, ..SvmConfig::new(seed) }
    }

    #[test]
    fn two_point_line_splits_at_the_midpoint() {
        let xs = vec![vec![0.0], vec![1.0]];
        let ys = vec![-1.0, 1.0];
        let (model, stats) = train_svm_with_stats(&xs, &ys, &linear_cfg(1000.0, 1)).unwrap();
        assert_eq!(predict(&model, &[0.4]).unwrap(), Label::Human);
        assert_eq!(predict(&model, &[0.6]).unwrap(), Label::Bot);
        // Maximum-margin separator of two points: f(x) = 2x - 1.
        assert!(decision_value(&model, &[0.5]).unwrap().abs() < 1e-6);
        assert!((decision_value(&model, &[1.0]).unwrap() - 1.0).abs() < 1e-6);
        assert!((decision_value(&model, &[0.0]).unwrap() + 1.0).abs() < 1e-6);
        assert_eq!(model.support_vectors.len(), 2);
        let kkt = kkt_summary(&model, &xs, &ys, &stats.alphas).unwrap();
        assert!(kkt.max() <= 1e-3, "{kkt:?}");
    }

    #[test]
    fn xor_is_learned_with_the_rbf_kernel() {
        let xs = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]];
        let ys = vec![-1.0, -1.0, 1.0, 1.0];
        let cfg = SvmConfig { c: 10.0, gamma: Some(1.0), ..SvmConfig::new(3) };
        let model = train_svm(&xs, &ys, &cfg).unwrap();
        for (x, &y) in xs.iter().zip(&ys) {
            let want = if y > 0.0 { Label::Bot } else { Label::Human };
            assert_eq!(predict(&model, x).unwrap(), want);
        }
    }

    #[test]
    fn dual_constraint_holds() {
        let xs: Vec<Vec<f64>> =
            (0..30).map(|i| vec![(i % 6) as f64, ((i * 3) % 7) as f64]).collect();
        let ys: Vec<f64> = (0..30).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let model = train_svm(&xs, &ys, &SvmConfig::new(5)).unwrap();
        let sum: f64 = model.dual_coefs.iter().sum();
        assert!(sum.abs() <= 1e-6, "{sum}");
        assert!(model.dual_coefs.iter().all(|&c| c.abs() <= model.c + 1e-12));
    }

    #[test]
    fn objective_history_is_non_decreasing() {
        let xs: Vec<Vec<f64>> =
            (0..40).map(|i| vec![((i * 7) % 11) as f64 / 3.0, ((i * 5) % 13) as f64 / 4.0]).collect();
        let ys: Vec<f64> = (0..40).map(|i| if (i * 7) % 11 >= 5 { 1.0 } else { -1.0 }).collect();
        let (_, stats) = train_svm_with_stats(&xs, &ys, &SvmConfig::new(8)).unwrap();
        assert!(stats.objective_history.len() > 1);
        for w in stats.objective_history.windows(2) {
            assert!(w[1] >= w[0] - 1e-9 * (1.0 + w[0].abs()));
        }
    }

    #[test]
    fn training_is_deterministic_under_a_seed() {
        let xs: Vec<Vec<f64>> =
            (0..25).map(|i| vec![(i % 5) as f64, (i / 5) as f64]).collect();
        let ys: Vec<f64> = (0..25).map(|i| if (i % 5) >= 2 { 1.0 } else { -1.0 }).collect();
        let cfg = SvmConfig::new(11);
        let a = train_svm(&xs, &ys, &cfg).unwrap();
        let b = train_svm(&xs, &ys, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn degenerate_and_malformed_inputs_error() {
        let cfg = SvmConfig::new(0);
        assert_eq!(
            train_svm(&[vec![0.0], vec![1.0]], &[1.0, 1.0], &cfg).unwrap_err(),
            SvmError::DegenerateTrainingSet
        );
        assert_eq!(train_svm(&[], &[], &cfg).unwrap_err(), SvmError::Empty);
        assert_eq!(
            train_svm(&[vec![0.0]], &[1.0, -1.0], &cfg).unwrap_err(),
            SvmError::LengthMismatch { xs: 1, ys: 2 }
        );
        assert_eq!(
            train_svm(&[vec![0.0], vec![f64::NAN]], &[1.0, -1.0], &cfg).unwrap_err(),
            SvmError::NonFinite { index: 1 }
        );
        assert_eq!(
            train_svm(&[vec![0.0], vec![1.0]], &[1.0, 0.5], &cfg).unwrap_err(),
            SvmError::BadLabel { index: 1 }
        );
    }

    #[test]
    fn fallback_models_are_constant() {
        let model = SvmModel::constant(Label::Bot);
        assert_eq!(predict(&model, &[1.0, 2.0]).unwrap(), Label::Bot);
        assert_eq!(predict(&model, &[]).unwrap(), Label::Bot);
        assert_eq!(decision_value(&model, &[1.0]).unwrap_err(), SvmError::ConstantModel);
    }

    #[test]
    fn interior_support_vectors_sit_on_the_margin() {
        let xs = vec![vec![0.0], vec![1.0]];
        let ys = vec![-1.0, 1.0];
        let (model, stats) = train_svm_with_stats(&xs, &ys, &linear_cfg(1000.0, 2)).unwrap();
        for (i, &alpha) in stats.alphas.iter().enumerate() {
            if alpha > 1e-9 && alpha < model.c - 1e-9 {
                let margin = decision_value(&model, &xs[i]).unwrap().abs();
                assert!((margin - 1.0).abs() <= 1e-3, "{margin}");
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn rbf_kernel_values_stay_in_unit_interval(
            a in proptest::collection::vec(-10.0f64..10.0, 4),
            b in proptest::collection::vec(-10.0f64..10.0, 4),
            gamma in 0.01f64..5.0,
        ) {
            let v = kernel_eval(Kernel::Rbf, gamma, &a, &b);
            // Mathematically in (0, 1]; exp underflows to +0 at extreme
            // distances.
            prop_assert!((0.0..=1.0).contains(&v));
            if gamma * dist2(&a, &b) < 700.0 {
                prop_assert!(v > 0.0);
            }
            let self_v = kernel_eval(Kernel::Rbf, gamma, &a, &a);
            prop_assert!((self_v - 1.0).abs() < 1e-15);
        }

        #[test]
        fn prediction_sign_matches_decision_value(seed in 0u64..50) {
            let mut rng = seeded_rng(seed);
            let xs: Vec<Vec<f64>> = (0..20)
                .map(|_| vec![rng.random::<f64>() * 4.0 - 2.0, rng.random::<f64>() * 4.0 - 2.0])
                .collect();
            let ys: Vec<f64> =
                xs.iter().map(|x| if x[0] + x[1] > 0.0 { 1.0 } else { -1.0 }).collect();
            prop_assume!(ys.iter().any(|&y| y > 0.0) && ys.iter().any(|&y| y < 0.0));
            let model = train_svm(&xs, &ys, &SvmConfig::new(seed)).unwrap();
            for _ in 0..20 {
                let x = vec![rng.random::<f64>() * 6.0 - 3.0, rng.random::<f64>() * 6.0 - 3.0];
                let value = decision_value(&model, &x).unwrap();
                let predicted = predict(&model, &x).unwrap();
                prop_assert_eq!(predicted == Label::Bot, value >= 0.0);
            }
        }
    }
}
