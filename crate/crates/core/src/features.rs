//! Per-interval feature derivation and per-player aggregation.
//!
//! Every five-minute sample expands to 17 features: the 12 raw log fields in
//! schema order, then five derived behavior ratios. A player's vector is the
//! per-feature mean over their samples, and a fitted scaler standardizes each
//! column to zero mean and unit variance before any model sees it.

use std::fmt;
use std::io::{BufRead, Write};
use std::ops::Range;
use std::str::FromStr;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::logmodel::{BehaviorSample, Label, LabeledSample, ParseError, Style};

/// Number of features in the full vector.
pub const FEATURE_COUNT: usize = 17;

/// Canonical feature order: raw schema fields, then derived ratios. This
/// order is fixed across scalers, models, and persisted files.
pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "hunting",
    "attack",
    "hit",
    "defense",
    "avoidance",
    "recovery",
    "item",
    "collection",
    "drop",
    "x",
    "y",
    "portal",
    "combat_ability_1",
    "combat_ability_2",
    "combat_ability_3",
    "collect_pattern",
    "move_pattern",
];

const COMBAT_3: usize = 14;
const MOVE_PATTERN: usize = 16;

/// A contiguous slice of the canonical feature vector used for modeling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureSetId {
    /// All 17 features.
    F17,
    /// The 12 raw log fields.
    F12,
    /// The 5 derived ratios.
    F5,
    /// Battle counts: hunting through recovery.
    Fb,
    /// Movement fields: x, y, portal.
    Fm,
    /// Collection counts: item, collection, drop.
    Fc,
}

impl FeatureSetId {
    pub const ALL: [FeatureSetId; 6] = [
        FeatureSetId::F17,
        FeatureSetId::F12,
        FeatureSetId::F5,
        FeatureSetId::Fb,
        FeatureSetId::Fm,
        FeatureSetId::Fc,
    ];

    /// Column range into the canonical 17-wide vector.
    pub fn columns(self) -> Range<usize> {
        match self {
            FeatureSetId::F17 => 0..17,
            FeatureSetId::F12 => 0..12,
            FeatureSetId::F5 => 12..17,
            FeatureSetId::Fb => 0..6,
            FeatureSetId::Fm => 9..12,
            FeatureSetId::Fc => 6..9,
        }
    }

    pub fn dim(self) -> usize {
        self.columns().len()
    }
}

impl fmt::Display for FeatureSetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeatureSetId::F17 => "f17",
            FeatureSetId::F12 => "f12",
            FeatureSetId::F5 => "f5",
            FeatureSetId::Fb => "fb",
            FeatureSetId::Fm => "fm",
            FeatureSetId::Fc => "fc",
        })
    }
}

impl FromStr for FeatureSetId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "f17" => Ok(FeatureSetId::F17),
            "f12" => Ok(FeatureSetId::F12),
            "f5" => Ok(FeatureSetId::F5),
            "fb" => Ok(FeatureSetId::Fb),
            "fm" => Ok(FeatureSetId::Fm),
            "fc" => Ok(FeatureSetId::Fc),
            other => Err(format!("unknown feature set '{other}'")),
        }
    }
}

/// The 17 feature values of one interval. The two motion-derived features
/// need the previous sample's position; `motion_defined` is false on a
/// player's first interval and those two slots hold 0 and must be skipped
/// when averaging.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalFeatures {
    pub values: [f64; FEATURE_COUNT],
    pub motion_defined: bool,
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 { 0.0 } else { num / den }
}

/// Expand one sample to its 17 interval features. `previous` is the same
/// player's immediately preceding sample, if any.
pub fn derive_interval_features(
    current: &BehaviorSample,
    previous: Option<&BehaviorSample>,
) -> IntervalFeatures {
    let s = current;
    let mut v = [0.0; FEATURE_COUNT];
    v[0] = s.hunting as f64;
    v[1] = s.attack as f64;
    v[2] = s.hit as f64;
    v[3] = s.defense as f64;
    v[4] = s.avoidance as f64;
    v[5] = s.recovery as f64;
    v[6] = s.item as f64;
    v[7] = s.collection as f64;
    v[8] = s.drop as f64;
    v[9] = s.x;
    v[10] = s.y;
    v[11] = s.portal as f64;

    // Attack efficiency plus defense efficiency; each term drops out when
    // its denominator is zero.
    v[12] = ratio(s.hunting as f64, s.attack as f64) + ratio(s.avoidance as f64, s.defense as f64);
    // Potions per kill.
    v[13] = ratio(s.recovery as f64, s.hunting as f64);
    // Item turnover relative to held inventory.
    v[15] = if s.item == 0 {
        0.0
    } else {
        (s.collection + s.drop) as f64 / (2.0 * s.item as f64)
    };

    let motion_defined = if let Some(prev) = previous {
        let dist = (s.x - prev.x).hypot(s.y - prev.y);
        // Kills per unit of ground covered.
        v[COMBAT_3] = ratio(s.hunting as f64, dist);
        v[MOVE_PATTERN] = dist;
        true
    } else {
        false
    };

    IntervalFeatures { values: v, motion_defined }
}

/// One player's aggregated feature vector plus their ground truth, if known.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerVector {
    pub player_id: String,
    pub values: [f64; FEATURE_COUNT],
    pub sample_count: u64,
    pub label: Option<Label>,
    pub style: Option<Style>,
}

/// Aggregate one player's time-ordered samples into a single vector: the
/// per-feature mean, where the two motion features average only over
/// intervals that have a predecessor. A player with a single sample gets 0
/// for both motion features. Empty input yields `None`.
pub fn aggregate_player(player_id: &str, samples: &[LabeledSample]) -> Option<PlayerVector> {
    if samples.is_empty() {
        return None;
    }

    let mut sums = [0.0; FEATURE_COUNT];
    let mut motion_rows = 0usize;
    for (idx, row) in samples.iter().enumerate() {
        let prev = idx.checked_sub(1).map(|p| &samples[p].sample);
        let iv = derive_interval_features(&row.sample, prev);
        for (col, value) in iv.values.iter().enumerate() {
            sums[col] += value;
        }
        if iv.motion_defined {
            motion_rows += 1;
        }
    }

    let n = samples.len() as f64;
    let mut values = [0.0; FEATURE_COUNT];
    for col in 0..FEATURE_COUNT {
        let denom = if col == COMBAT_3 || col == MOVE_PATTERN { motion_rows as f64 } else { n };
        values[col] = if denom == 0.0 { 0.0 } else { sums[col] / denom };
    }

    let label = samples.iter().find_map(|r| r.label);
    let style = samples.iter().find_map(|r| r.style);
    Some(PlayerVector {
        player_id: player_id.to_string(),
        values,
        sample_count: samples.len() as u64,
        label,
        style,
    })
}

/// Aggregate every player of a grouped log, preserving group order.
pub fn aggregate_groups(groups: &IndexMap<String, Vec<LabeledSample>>) -> Vec<PlayerVector> {
    groups
        .iter()
        .filter_map(|(id, samples)| aggregate_player(id, samples))
        .collect()
}

/// Column-wise standardization parameters fitted on training vectors.
///
/// `stds` holds the population standard deviation (divide by N). A constant
/// column keeps its zero std and standardizes to 0 for every input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZScoreScaler {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

/// Fit standardization parameters on the training vectors. `None` when
/// `vectors` is empty.
pub fn fit_scaler(vectors: &[PlayerVector]) -> Option<ZScoreScaler> {
    if vectors.is_empty() {
        return None;
    }
    let n = vectors.len() as f64;
    let mut means = vec![0.0; FEATURE_COUNT];
    for v in vectors {
        for (col, value) in v.values.iter().enumerate() {
            means[col] += value;
        }
    }
    for mean in &mut means {
        *mean /= n;
    }
    let mut vars = vec![0.0; FEATURE_COUNT];
    for v in vectors {
        for (col, value) in v.values.iter().enumerate() {
            let d = value - means[col];
            vars[col] += d * d;
        }
    }
    let stds = vars.into_iter().map(|s| (s / n).sqrt()).collect();
    Some(ZScoreScaler { means, stds })
}

impl ZScoreScaler {
    /// Standardize a raw 17-wide value array.
    pub fn apply(&self, values: &[f64; FEATURE_COUNT]) -> [f64; FEATURE_COUNT] {
        let mut out = [0.0; FEATURE_COUNT];
        for col in 0..FEATURE_COUNT {
            out[col] = if self.stds[col] == 0.0 {
                0.0
            } else {
                (values[col] - self.means[col]) / self.stds[col]
            };
        }
        out
    }
}

/// Standardize a player vector, preserving identity and ground truth.
pub fn standardize(scaler: &ZScoreScaler, v: &PlayerVector) -> PlayerVector {
    PlayerVector { values: scaler.apply(&v.values), ..v.clone() }
}

/// Project a standardized full vector onto a feature set's columns.
pub fn project(values: &[f64; FEATURE_COUNT], set: FeatureSetId) -> Vec<f64> {
    values[set.columns()].to_vec()
}

fn vectors_header() -> Vec<String> {
    let mut cols = vec!["player_id".to_string()];
    cols.extend(FEATURE_NAMES.iter().map(|s| s.to_string()));
    cols.push("sample_count".to_string());
    cols.push("label".to_string());
    cols.push("style".to_string());
    cols
}

/// Write aggregated vectors as CSV: `player_id`, the 17 feature columns,
/// then `sample_count,label,style`. Values round-trip exactly through the
/// shortest f64 form.
pub fn write_vectors_csv<W: Write>(out: W, vectors: &[PlayerVector]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(vectors_header())?;
    for v in vectors {
        let mut record = vec![v.player_id.clone()];
        record.extend(v.values.iter().map(|f| f.to_string()));
        record.push(v.sample_count.to_string());
        record.push(v.label.map(|l| l.to_string()).unwrap_or_default());
        record.push(v.style.map(|s| s.to_string()).unwrap_or_default());
        w.write_record(&record)?;
    }
    w.flush()
}

/// Parse a vector CSV written by [`write_vectors_csv`].
pub fn read_vectors_csv<R: BufRead>(reader: R) -> Result<Vec<PlayerVector>, ParseError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(reader);

    let expected = vectors_header().join(",");
    let headers = match rdr.headers() {
        Ok(h) if h.is_empty() || (h.len() == 1 && h[0].is_empty()) => return Ok(Vec::new()),
        Ok(h) => h.clone(),
        Err(e) => {
            let line = e.position().map_or(0, |p| p.line());
            return Err(ParseError::Row { line, reason: e.to_string() });
        }
    };
    let found = headers.iter().collect::<Vec<_>>().join(",");
    if found != expected {
        return Err(ParseError::Header { expected, found });
    }

    let width = 4 + FEATURE_COUNT;
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            ParseError::Row { line, reason: e.to_string() }
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != width {
            return Err(ParseError::Row {
                line,
                reason: format!("expected {width} columns, found {}", record.len()),
            });
        }
        let mut values = [0.0; FEATURE_COUNT];
        for (col, slot) in values.iter_mut().enumerate() {
            let raw = &record[1 + col];
            *slot = raw.parse::<f64>().map_err(|_| ParseError::Row {
                line,
                reason: format!("column '{}': invalid real '{raw}'", FEATURE_NAMES[col]),
            })?;
            if !slot.is_finite() {
                return Err(ParseError::Row {
                    line,
                    reason: format!("column '{}': non-finite value '{raw}'", FEATURE_NAMES[col]),
                });
            }
        }
        let sample_count = record[1 + FEATURE_COUNT].parse::<u64>().map_err(|_| {
            ParseError::Row {
                line,
                reason: format!(
                    "column 'sample_count': invalid count '{}'",
                    &record[1 + FEATURE_COUNT]
                ),
            }
        })?;
        let label = match &record[2 + FEATURE_COUNT] {
            "" => None,
            token => {
                Some(Label::from_str(token).map_err(|e| ParseError::Row { line, reason: e })?)
            }
        };
        let style = match &record[3 + FEATURE_COUNT] {
            "" => None,
            token => {
                Some(Style::from_str(token).map_err(|e| ParseError::Row { line, reason: e })?)
            }
        };
        out.push(PlayerVector { player_id: record[0].to_string(), values, sample_count, label, style });
    }
    Ok(out)
}

/// Serialize vectors to an in-memory CSV string.
pub fn vectors_to_string(vectors: &[PlayerVector]) -> String {
    let mut buf = Vec::new();
    write_vectors_csv(&mut buf, vectors).expect("in-memory write cannot fail");
    String::from_utf8(buf).expect("vector serialization is UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample(x: f64, y: f64) -> BehaviorSample {
        BehaviorSample {
            player_id: "p".to_string(),
            timestamp: 0,
            hunting: 5,
            attack: 10,
            hit: 7,
            defense: 4,
            avoidance: 2,
            recovery: 0,
            item: 2,
            collection: 3,
            drop: 1,
            x,
            y,
            portal: 0,
        }
    }

    #[test]
    fn derived_features_match_hand_computation() {
        let prev = sample(0.0, 0.0);
        let cur = sample(3.0, 4.0);
        let iv = derive_interval_features(&cur, Some(&prev));
        assert!(iv.motion_defined);
        // hunting/attack + avoidance/defense = 5/10 + 2/4
        assert_eq!(iv.values[12], 1.0);
        // recovery/hunting = 0/5
        assert_eq!(iv.values[13], 0.0);
        // hunting/dist = 5/5
        assert_eq!(iv.values[14], 1.0);
        // (collection+drop)/(2*item) = 4/4
        assert_eq!(iv.values[15], 1.0);
        // hypot(3,4)
        assert_eq!(iv.values[16], 5.0);
    }

    #[test]
    fn zero_denominators_yield_zero() {
        let mut cur = sample(0.0, 0.0);
        cur.attack = 0;
        cur.hit = 0;
        cur.defense = 0;
        cur.avoidance = 0;
        cur.hunting = 0;
        cur.recovery = 0;
        cur.item = 0;
        cur.collection = 0;
        cur.drop = 0;
        let prev = sample(0.0, 0.0);
        let iv = derive_interval_features(&cur, Some(&prev));
        assert_eq!(iv.values[12], 0.0);
        assert_eq!(iv.values[13], 0.0);
        assert_eq!(iv.values[14], 0.0); // zero distance
        assert_eq!(iv.values[15], 0.0);
        assert_eq!(iv.values[16], 0.0);
    }

    #[test]
    fn combat1_terms_drop_independently() {
        let mut cur = sample(0.0, 0.0);
        cur.attack = 0;
        cur.hit = 0;
        // avoidance/defense survives alone: 2/4.
        let iv = derive_interval_features(&cur, None);
        assert_eq!(iv.values[12], 0.5);
    }

    #[test]
    fn first_interval_has_no_motion() {
        let iv = derive_interval_features(&sample(3.0, 4.0), None);
        assert!(!iv.motion_defined);
        assert_eq!(iv.values[14], 0.0);
        assert_eq!(iv.values[16], 0.0);
    }

    fn labeled(x: f64, y: f64, t: i64) -> LabeledSample {
        let mut s = sample(x, y);
        s.timestamp = t;
        LabeledSample { sample: s, label: Some(Label::Bot), style: Some(Style::Killer) }
    }

    #[test]
    fn aggregation_averages_motion_over_defined_rows_only() {
        // Distances: undefined, 5, 0. Mean move_pattern is (5+0)/2.
        let rows = vec![labeled(0.0, 0.0, 0), labeled(3.0, 4.0, 300), labeled(3.0, 4.0, 600)];
        let v = aggregate_player("p", &rows).unwrap();
        assert_eq!(v.values[16], 2.5);
        assert_eq!(v.values[0], 5.0); // hunting mean over all 3 rows
        assert_eq!(v.sample_count, 3);
        assert_eq!(v.label, Some(Label::Bot));
        assert_eq!(v.style, Some(Style::Killer));
    }

    #[test]
    fn single_sample_player_gets_zero_motion_features() {
        let rows = vec![labeled(3.0, 4.0, 0)];
        let v = aggregate_player("p", &rows).unwrap();
        assert_eq!(v.values[14], 0.0);
        assert_eq!(v.values[16], 0.0);
        assert_eq!(v.values[1], 10.0); // attack mean of one sample
        assert!(aggregate_player("p", &[]).is_none());
    }

    fn vector_with(values: [f64; FEATURE_COUNT]) -> PlayerVector {
        PlayerVector {
            player_id: "p".to_string(),
            values,
            sample_count: 1,
            label: None,
            style: None,
        }
    }

    #[test]
    fn scaler_matches_hand_computation() {
        let mut rows = vec![[0.0; FEATURE_COUNT]; 3];
        rows[0][0] = 1.0;
        rows[1][0] = 2.0;
        rows[2][0] = 3.0;
        let vectors: Vec<PlayerVector> = rows.into_iter().map(vector_with).collect();
        let scaler = fit_scaler(&vectors).unwrap();
        assert_eq!(scaler.means[0], 2.0);
        let expected_std = (2.0f64 / 3.0).sqrt();
        assert!((scaler.stds[0] - expected_std).abs() < 1e-12);
        let z = standardize(&scaler, &vectors[2]);
        assert!((z.values[0] - 1.224_744_871_391_589).abs() < 1e-12, "{}", z.values[0]);
        // Constant columns standardize to zero, not NaN.
        assert_eq!(z.values[1], 0.0);
        assert_eq!(z.player_id, "p");
        assert!(fit_scaler(&[]).is_none());
    }

    #[test]
    fn single_vector_fit_is_degenerate() {
        let v = vector_with([3.5; FEATURE_COUNT]);
        let scaler = fit_scaler(std::slice::from_ref(&v)).unwrap();
        assert!(scaler.means.iter().all(|&m| m == 3.5));
        assert!(scaler.stds.iter().all(|&s| s == 0.0));
        assert!(standardize(&scaler, &v).values.iter().all(|&z| z == 0.0));
    }

    #[test]
    fn feature_set_columns_partition_as_documented() {
        assert_eq!(FeatureSetId::F17.columns(), 0..17);
        assert_eq!(FeatureSetId::F12.columns(), 0..12);
        assert_eq!(FeatureSetId::F5.columns(), 12..17);
        assert_eq!(FeatureSetId::Fb.columns(), 0..6);
        assert_eq!(FeatureSetId::Fm.columns(), 9..12);
        assert_eq!(FeatureSetId::Fc.columns(), 6..9);
        for set in FeatureSetId::ALL {
            assert_eq!(set, set.to_string().parse().unwrap());
        }
    }

    #[test]
    fn single_aspect_sets_partition_the_raw_set() {
        let mut values = [0.0; FEATURE_COUNT];
        for (i, f) in values.iter_mut().enumerate() {
            *f = (i * i) as f64;
        }
        let mut joined = project(&values, FeatureSetId::Fb);
        joined.extend(project(&values, FeatureSetId::Fc));
        joined.extend(project(&values, FeatureSetId::Fm));
        let mut raw = project(&values, FeatureSetId::F12);
        joined.sort_by(f64::total_cmp);
        raw.sort_by(f64::total_cmp);
        assert_eq!(joined, raw);
    }

    #[test]
    fn vectors_csv_round_trips() {
        let vectors = vec![
            PlayerVector {
                player_id: "p1".to_string(),
                values: {
                    let mut f = [0.0; FEATURE_COUNT];
                    f[0] = 1.5;
                    f[16] = -0.000123456789;
                    f
                },
                sample_count: 42,
                label: Some(Label::Human),
                style: Some(Style::Explorer),
            },
            PlayerVector {
                player_id: "p2".to_string(),
                values: [0.25; FEATURE_COUNT],
                sample_count: 1,
                label: None,
                style: None,
            },
        ];
        let text = vectors_to_string(&vectors);
        let parsed = read_vectors_csv(text.as_bytes()).unwrap();
        assert_eq!(parsed, vectors);
    }

    proptest! {
        #[test]
        fn derived_features_are_finite(
            hunting in 0u64..1000, attack in 0u64..1000, defense in 0u64..1000,
            recovery in 0u64..1000, item in 0u64..1000, collection in 0u64..1000,
            dropped in 0u64..1000,
            x in -1e6f64..1e6, y in -1e6f64..1e6,
            px in -1e6f64..1e6, py in -1e6f64..1e6,
        ) {
            let cur = BehaviorSample {
                player_id: "p".to_string(), timestamp: 300,
                hunting, attack, hit: attack.min(hunting), defense,
                avoidance: defense / 2, recovery, item, collection,
                drop: dropped, x, y, portal: 0,
            };
            let prev = BehaviorSample { x: px, y: py, timestamp: 0, ..cur.clone() };
            let iv = derive_interval_features(&cur, Some(&prev));
            for value in iv.values {
                prop_assert!(value.is_finite());
            }
        }

        #[test]
        fn derived_features_ignore_coordinate_translation(
            dx in -1e3f64..1e3, dy in -1e3f64..1e3,
        ) {
            let prev = sample(1.0, 2.0);
            let cur = sample(4.0, 6.0);
            let mut prev_shifted = prev.clone();
            let mut cur_shifted = cur.clone();
            prev_shifted.x += dx;
            prev_shifted.y += dy;
            cur_shifted.x += dx;
            cur_shifted.y += dy;
            let base = derive_interval_features(&cur, Some(&prev));
            let shifted = derive_interval_features(&cur_shifted, Some(&prev_shifted));
            // x/y move with the shift; everything else is invariant.
            for col in [12usize, 13, 14, 15, 16] {
                prop_assert!((base.values[col] - shifted.values[col]).abs() < 1e-9);
            }
        }

        #[test]
        fn standardized_training_columns_have_zero_mean_unit_std(
            raw in proptest::collection::vec(
                proptest::collection::vec(-100.0f64..100.0, FEATURE_COUNT),
                2..40,
            )
        ) {
            let vectors: Vec<PlayerVector> = raw
                .iter()
                .map(|r| vector_with(<[f64; FEATURE_COUNT]>::try_from(r.as_slice()).unwrap()))
                .collect();
            let scaler = fit_scaler(&vectors).unwrap();
            let standardized: Vec<PlayerVector> =
                vectors.iter().map(|v| standardize(&scaler, v)).collect();
            let n = vectors.len() as f64;
            for col in 0..FEATURE_COUNT {
                let mean: f64 = standardized.iter().map(|v| v.values[col]).sum::<f64>() / n;
                prop_assert!(mean.abs() < 1e-9, "col {col} mean {mean}");
                if scaler.stds[col] > 1e-9 {
                    let var: f64 = standardized
                        .iter()
                        .map(|v| (v.values[col] - mean).powi(2))
                        .sum::<f64>() / n;
                    prop_assert!((var - 1.0).abs() < 1e-6, "col {col} var {var}");
                }
            }
        }

        #[test]
        fn standardize_is_affine_per_feature(a in 0.0f64..1.0) {
            let x = vector_with([2.0; FEATURE_COUNT]);
            let y = vector_with([7.0; FEATURE_COUNT]);
            let basis = vec![
                vector_with([0.0; FEATURE_COUNT]),
                vector_with([4.0; FEATURE_COUNT]),
                vector_with([10.0; FEATURE_COUNT]),
            ];
            let scaler = fit_scaler(&basis).unwrap();
            let mut mixed = [0.0; FEATURE_COUNT];
            for (col, slot) in mixed.iter_mut().enumerate() {
                *slot = a * x.values[col] + (1.0 - a) * y.values[col];
            }
            let lhs = scaler.apply(&mixed);
            let zx = scaler.apply(&x.values);
            let zy = scaler.apply(&y.values);
            for col in 0..FEATURE_COUNT {
                let rhs = a * zx[col] + (1.0 - a) * zy[col];
                prop_assert!((lhs[col] - rhs).abs() < 1e-9);
            }
        }

        #[test]
        fn projection_matches_columns(set_idx in 0usize..6) {
            let set = FeatureSetId::ALL[set_idx];
            let mut values = [0.0; FEATURE_COUNT];
            for (i, f) in values.iter_mut().enumerate() {
                *f = i as f64;
            }
            let projected = project(&values, set);
            prop_assert_eq!(projected.len(), set.dim());
            for (offset, col) in set.columns().enumerate() {
                prop_assert_eq!(projected[offset], col as f64);
            }
        }

        #[test]
        fn aggregated_hit_mean_never_exceeds_attack_mean(
            pairs in proptest::collection::vec((0u64..50, 0u64..50), 1..20)
        ) {
            let rows: Vec<LabeledSample> = pairs
                .iter()
                .enumerate()
                .map(|(i, &(attack, hit_raw))| {
                    let mut s = sample(i as f64, 0.0);
                    s.timestamp = (i as i64) * 300;
                    s.attack = attack;
                    s.hit = hit_raw.min(attack);
                    LabeledSample { sample: s, label: None, style: None }
                })
                .collect();
            let v = aggregate_player("p", &rows).unwrap();
            prop_assert!(v.values[2] <= v.values[1] + 1e-12);
        }
    }
}
