//! Detection metrics and play-style reporting.
//!
//! Bot is the positive class throughout. Score files store reals in [0, 1];
//! rendered text shows percentages. Every ratio with a zero denominator
//! evaluates to 0 so reports stay total.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::logmodel::{Label, Style};

/// Counts of (predicted, actual) outcomes; `fn_` is serialized as `fn`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }
}

/// Tally (predicted, actual) pairs: tp = (bot, bot), tn = (human, human),
/// fp = (bot, human), fn = (human, bot).
pub fn confusion(pairs: &[(Label, Label)]) -> ConfusionMatrix {
    let mut cm = ConfusionMatrix::default();
    for &(predicted, actual) in pairs {
        match (predicted, actual) {
            (Label::Bot, Label::Bot) => cm.tp += 1,
            (Label::Human, Label::Human) => cm.tn += 1,
            (Label::Bot, Label::Human) => cm.fp += 1,
            (Label::Human, Label::Bot) => cm.fn_ += 1,
        }
    }
    cm
}

/// The four headline scores, stored in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scores {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn safe_div(num: f64, den: f64) -> f64 {
    if den == 0.0 { 0.0 } else { num / den }
}

/// Accuracy, precision, recall, and their harmonic mean; 0/0 cases are 0.
pub fn scores(cm: &ConfusionMatrix) -> Scores {
    let tp = cm.tp as f64;
    let accuracy = safe_div(tp + cm.tn as f64, cm.total() as f64);
    let precision = safe_div(tp, tp + cm.fp as f64);
    let recall = safe_div(tp, tp + cm.fn_ as f64);
    // Harmonic mean of precision and recall, computed from the counts in a
    // single division so the result is correctly rounded.
    let f1 = safe_div(2.0 * tp, 2.0 * tp + cm.fp as f64 + cm.fn_ as f64);
    Scores { accuracy, precision, recall, f1 }
}

/// Component-wise mean of score records; zeros on empty input.
pub fn mean_scores(xs: &[Scores]) -> Scores {
    let n = xs.len() as f64;
    Scores {
        accuracy: safe_div(xs.iter().map(|s| s.accuracy).sum(), n),
        precision: safe_div(xs.iter().map(|s| s.precision).sum(), n),
        recall: safe_div(xs.iter().map(|s| s.recall).sum(), n),
        f1: safe_div(xs.iter().map(|s| s.f1).sum(), n),
    }
}

/// Component-wise population standard deviation; zeros on empty input.
pub fn std_scores(xs: &[Scores]) -> Scores {
    if xs.is_empty() {
        return Scores { accuracy: 0.0, precision: 0.0, recall: 0.0, f1: 0.0 };
    }
    let pick = |f: fn(&Scores) -> f64| population_std(&xs.iter().map(f).collect::<Vec<_>>());
    Scores {
        accuracy: pick(|s| s.accuracy),
        precision: pick(|s| s.precision),
        recall: pick(|s| s.recall),
        f1: pick(|s| s.f1),
    }
}

/// Styles entering the Dev statistic. Explorer is excluded: its stratum is
/// too small to give a stable accuracy.
pub const DEV_STYLES: [Style; 3] = [Style::Killer, Style::Achiever, Style::Remainder];

/// Killer/Achiever/Explorer shares among a cluster's typed members
/// (Remainder does not count as typed).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StyleRatios {
    pub killer: f64,
    pub achiever: f64,
    pub explorer: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterComposition {
    pub cluster: usize,
    pub typed_members: u64,
    /// `None` flags a cluster with no typed members.
    pub ratios: Option<StyleRatios>,
}

/// Per-style accuracy, the Dev stability statistic, and per-cluster style
/// composition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StyleReport {
    /// Accuracy per style; styles with zero evaluated players are omitted.
    pub per_style_accuracy: BTreeMap<Style, f64>,
    /// Population std of the accuracies over `dev_styles`; `None` when no
    /// Dev style has any players.
    pub dev: Option<f64>,
    /// The Dev styles actually present. Shorter than [`DEV_STYLES`] flags an
    /// incomplete Dev.
    pub dev_styles: Vec<Style>,
    pub per_cluster_composition: Vec<ClusterComposition>,
}

fn population_std(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt()
}

/// Build the style report from per-player (predicted, actual, style) triples
/// and the fitted model's (style, cluster) training assignments. `k` is the
/// cluster count; clusters never assigned a typed member are flagged.
pub fn style_report(
    predictions: &[(Label, Label, Style)],
    cluster_assignments: &[(Style, usize)],
    k: usize,
) -> StyleReport {
    let mut correct: BTreeMap<Style, u64> = BTreeMap::new();
    let mut totals: BTreeMap<Style, u64> = BTreeMap::new();
    for &(predicted, actual, style) in predictions {
        *totals.entry(style).or_default() += 1;
        if predicted == actual {
            *correct.entry(style).or_default() += 1;
        }
    }
    let per_style_accuracy: BTreeMap<Style, f64> = totals
        .iter()
        .map(|(&style, &total)| {
            (style, correct.get(&style).copied().unwrap_or(0) as f64 / total as f64)
        })
        .collect();

    let dev_styles: Vec<Style> = DEV_STYLES
        .into_iter()
        .filter(|style| per_style_accuracy.contains_key(style))
        .collect();
    let dev = if dev_styles.is_empty() {
        None
    } else {
        let values: Vec<f64> = dev_styles.iter().map(|s| per_style_accuracy[s]).collect();
        Some(population_std(&values))
    };

    let mut counts = vec![[0u64; 3]; k];
    for &(style, cluster) in cluster_assignments {
        if cluster >= k {
            continue;
        }
        match style {
            Style::Killer => counts[cluster][0] += 1,
            Style::Achiever => counts[cluster][1] += 1,
            Style::Explorer => counts[cluster][2] += 1,
            Style::Remainder => {}
        }
    }
    let per_cluster_composition = counts
        .into_iter()
        .enumerate()
        .map(|(cluster, c)| {
            let typed_members = c.iter().sum();
            let ratios = (typed_members > 0).then(|| {
                let t = typed_members as f64;
                StyleRatios {
                    killer: c[0] as f64 / t,
                    achiever: c[1] as f64 / t,
                    explorer: c[2] as f64 / t,
                }
            });
            ClusterComposition { cluster, typed_members, ratios }
        })
        .collect();

    StyleReport { per_style_accuracy, dev, dev_styles, per_cluster_composition }
}

/// Full evaluation output for one model on one labeled dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluationReport {
    pub confusion: ConfusionMatrix,
    pub scores: Scores,
    /// Present when any evaluated player carried a style tag.
    pub style: Option<StyleReport>,
}

/// Render a real in [0, 1] as a percentage with two decimals.
pub fn percent(x: f64) -> String {
    format!("{:.2}", 100.0 * x)
}

impl EvaluationReport {
    /// Human-readable rendering; scores as percentages.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let cm = &self.confusion;
        writeln!(out, "confusion   tp={} tn={} fp={} fn={}", cm.tp, cm.tn, cm.fp, cm.fn_)
            .unwrap();
        writeln!(out, "accuracy    {}", percent(self.scores.accuracy)).unwrap();
        writeln!(out, "precision   {}", percent(self.scores.precision)).unwrap();
        writeln!(out, "recall      {}", percent(self.scores.recall)).unwrap();
        writeln!(out, "f1          {}", percent(self.scores.f1)).unwrap();
        if let Some(style) = &self.style {
            out.push('\n');
            out.push_str(&style.render_text());
        }
        out
    }
}

impl StyleReport {
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{:<12}accuracy", "style").unwrap();
        for (style, accuracy) in &self.per_style_accuracy {
            writeln!(out, "{:<12}{}", style.to_string(), percent(*accuracy)).unwrap();
        }
        match self.dev {
            Some(dev) => {
                let styles: Vec<String> =
                    self.dev_styles.iter().map(|s| s.to_string()).collect();
                writeln!(out, "dev         {} (over {})", percent(dev), styles.join("/"))
                    .unwrap();
            }
            None => writeln!(out, "dev         undefined (no typed players)").unwrap(),
        }
        out.push('\n');
        writeln!(out, "{:<9}{:<8}{:<10}{:<10}explorer", "cluster", "typed", "killer", "achiever").unwrap();
        for comp in &self.per_cluster_composition {
            match &comp.ratios {
                Some(r) => writeln!(
                    out,
                    "{:<9}{:<8}{:<10}{:<10}{}",
                    comp.cluster,
                    comp.typed_members,
                    percent(r.killer),
                    percent(r.achiever),
                    percent(r.explorer),
                )
                .unwrap(),
                None => {
                    writeln!(out, "{:<9}{:<8}no typed members", comp.cluster, 0).unwrap()
                }
            }
        }
        out
    }
}
