//! Raw behavior-log schema and ingestion.
//!
//! A log row is one five-minute sample of a player's activity: battle counts,
//! inventory counts, and a map position. Rows arrive as CSV or JSONL, may
//! carry a ground-truth class label (`human`/`bot`) and a play-style tag, and
//! are validated on the way in so the rest of the pipeline can assume the
//! schema invariants hold.

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Ground-truth class of a player. `Bot` is the positive detection class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "human")]
    Human,
    #[serde(rename = "bot")]
    Bot,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Human => "human",
            Label::Bot => "bot",
        })
    }
}

impl FromStr for Label {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "human" => Ok(Label::Human),
            "bot" => Ok(Label::Bot),
            other => Err(format!("unknown label '{other}'")),
        }
    }
}

/// Play-style archetype. `Remainder` marks players with no strong type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Style {
    Killer,
    Achiever,
    Explorer,
    Remainder,
}

impl Style {
    pub const ALL: [Style; 4] = [Style::Killer, Style::Achiever, Style::Explorer, Style::Remainder];
}

impl fmt::Display for Style {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Style::Killer => "Killer",
            Style::Achiever => "Achiever",
            Style::Explorer => "Explorer",
            Style::Remainder => "Remainder",
        })
    }
}

impl FromStr for Style {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Killer" => Ok(Style::Killer),
            "Achiever" => Ok(Style::Achiever),
            "Explorer" => Ok(Style::Explorer),
            "Remainder" => Ok(Style::Remainder),
            other => Err(format!("unknown style '{other}'")),
        }
    }
}

/// One five-minute behavior sample for one player.
///
/// Count fields accumulate over the sampling interval except `item`, which is
/// the inventory size at sample time. `x`/`y` are the map position at sample
/// time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BehaviorSample {
    pub player_id: String,
    /// Seconds since epoch; intervals are nominally 300 s apart but gaps and
    /// jitter are accepted.
    pub timestamp: i64,
    /// NPCs hunted in the interval.
    pub hunting: u64,
    /// Attacks in the interval.
    pub attack: u64,
    /// Successful attacks; never exceeds `attack`.
    pub hit: u64,
    /// Defenses in the interval.
    pub defense: u64,
    /// Successful defenses; never exceeds `defense`.
    pub avoidance: u64,
    /// Healing-potion uses in the interval.
    pub recovery: u64,
    /// Items held at sample time.
    pub item: u64,
    /// Items collected in the interval.
    pub collection: u64,
    /// Items dropped in the interval.
    pub drop: u64,
    pub x: f64,
    pub y: f64,
    /// Portal-item uses in the interval.
    pub portal: u64,
}

impl BehaviorSample {
    /// Check the schema invariants: success counts bounded by their attempt
    /// counts, coordinates finite.
    pub fn validate(&self) -> Result<(), String> {
        if self.hit > self.attack {
            return Err(format!("hit ({}) exceeds attack ({})", self.hit, self.attack));
        }
        if self.avoidance > self.defense {
            return Err(format!(
                "avoidance ({}) exceeds defense ({})",
                self.avoidance, self.defense
            ));
        }
        if !self.x.is_finite() {
            return Err(format!("non-finite coordinate x ({})", self.x));
        }
        if !self.y.is_finite() {
            return Err(format!("non-finite coordinate y ({})", self.y));
        }
        Ok(())
    }
}

/// A behavior sample plus optional ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSample {
    pub sample: BehaviorSample,
    pub label: Option<Label>,
    /// Play style; only meaningful together with a label.
    pub style: Option<Style>,
}

impl LabeledSample {
    pub fn validate(&self) -> Result<(), String> {
        self.sample.validate()?;
        if let (Some(style), None) = (self.style, self.label) {
            return Err(format!("style '{style}' present without label"));
        }
        Ok(())
    }
}

/// Input format of a log stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogFormat {
    Csv,
    Jsonl,
}

/// Exact CSV column order of the log schema.
pub const CSV_HEADER: &str = "player_id,timestamp,hunting,attack,hit,defense,avoidance,recovery,item,collection,drop,x,y,portal,label,style";

const CSV_COLUMNS: [&str; 16] = [
    "player_id",
    "timestamp",
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
    "label",
    "style",
];

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: {reason}")]
    Row { line: u64, reason: String },
    #[error("header mismatch: expected `{expected}`, found `{found}`")]
    Header { expected: String, found: String },
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl ParseError {
    fn row(line: u64, reason: impl Into<String>) -> Self {
        ParseError::Row { line, reason: reason.into() }
    }
}

/// Tracks the first label seen per player so a later disagreeing row is
/// rejected at its own line number.
#[derive(Default)]
struct ConflictGuard {
    seen: HashMap<String, Label>,
}

impl ConflictGuard {
    fn check(&mut self, row: &LabeledSample, line: u64) -> Result<(), ParseError> {
        let Some(label) = row.label else { return Ok(()) };
        match self.seen.get(&row.sample.player_id) {
            Some(&first) if first != label => Err(ParseError::row(
                line,
                format!(
                    "conflicting labels for player '{}': {first} vs {label}",
                    row.sample.player_id
                ),
            )),
            Some(_) => Ok(()),
            None => {
                self.seen.insert(row.sample.player_id.clone(), label);
                Ok(())
            }
        }
    }
}

/// Parse a log stream in the given format. Returns all rows in input order;
/// the first malformed row aborts with its line number and reason. A row
/// whose label disagrees with an earlier row of the same player is
/// malformed.
pub fn parse_log<R: BufRead>(reader: R, format: LogFormat) -> Result<Vec<LabeledSample>, ParseError> {
    match format {
        LogFormat::Csv => parse_csv(reader),
        LogFormat::Jsonl => parse_jsonl(reader),
    }
}

/// Convenience wrapper over [`parse_log`] for in-memory text.
pub fn parse_log_str(text: &str, format: LogFormat) -> Result<Vec<LabeledSample>, ParseError> {
    parse_log(text.as_bytes(), format)
}

fn parse_csv<R: BufRead>(reader: R, ) -> Result<Vec<LabeledSample>, ParseError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);

    // Empty input is a valid empty log; anything else must start with the
    // exact header.
    let headers = match rdr.headers() {
        Ok(h) if h.is_empty() || (h.len() == 1 && h[0].is_empty()) => return Ok(Vec::new()),
        Ok(h) => h.clone(),
        Err(e) => return Err(csv_error(e)),
    };
    if headers.iter().ne(CSV_COLUMNS.iter().copied()) {
        return Err(ParseError::Header {
            expected: CSV_HEADER.to_string(),
            found: headers.iter().collect::<Vec<_>>().join(","),
        });
    }

    let mut out = Vec::new();
    let mut guard = ConflictGuard::default();
    for record in rdr.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != CSV_COLUMNS.len() {
            return Err(ParseError::row(
                line,
                format!("expected {} columns, found {}", CSV_COLUMNS.len(), record.len()),
            ));
        }
        let row = row_from_fields(&record, line)?;
        guard.check(&row, line)?;
        out.push(row);
    }
    Ok(out)
}

fn csv_error(e: csv::Error) -> ParseError {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => ParseError::Io(io),
        other => ParseError::row(line, format!("{other:?}")),
    }
}

fn row_from_fields(record: &csv::StringRecord, line: u64) -> Result<LabeledSample, ParseError> {
    fn count(record: &csv::StringRecord, idx: usize, line: u64) -> Result<u64, ParseError> {
        let raw = &record[idx];
        raw.parse::<u64>().map_err(|_| {
            ParseError::row(line, format!("column '{}': invalid count '{raw}'", CSV_COLUMNS[idx]))
        })
    }
    fn real(record: &csv::StringRecord, idx: usize, line: u64) -> Result<f64, ParseError> {
        let raw = &record[idx];
        raw.parse::<f64>().map_err(|_| {
            ParseError::row(line, format!("column '{}': invalid real '{raw}'", CSV_COLUMNS[idx]))
        })
    }

    let timestamp = record[1].parse::<i64>().map_err(|_| {
        ParseError::row(line, format!("column 'timestamp': invalid integer '{}'", &record[1]))
    })?;
    let sample = BehaviorSample {
        player_id: record[0].to_string(),
        timestamp,
        hunting: count(record, 2, line)?,
        attack: count(record, 3, line)?,
        hit: count(record, 4, line)?,
        defense: count(record, 5, line)?,
        avoidance: count(record, 6, line)?,
        recovery: count(record, 7, line)?,
        item: count(record, 8, line)?,
        collection: count(record, 9, line)?,
        drop: count(record, 10, line)?,
        x: real(record, 11, line)?,
        y: real(record, 12, line)?,
        portal: count(record, 13, line)?,
    };

    let label = match &record[14] {
        "" => None,
        token => Some(Label::from_str(token).map_err(|e| ParseError::row(line, e))?),
    };
    let style = match &record[15] {
        "" => None,
        token => Some(Style::from_str(token).map_err(|e| ParseError::row(line, e))?),
    };

    let row = LabeledSample { sample, label, style };
    row.validate().map_err(|reason| ParseError::row(line, reason))?;
    Ok(row)
}

/// JSONL row mirror of [`LabeledSample`]; `label`/`style` keys are omitted
/// when absent and unknown keys are rejected.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonRow {
    player_id: String,
    timestamp: i64,
    hunting: u64,
    attack: u64,
    hit: u64,
    defense: u64,
    avoidance: u64,
    recovery: u64,
    item: u64,
    collection: u64,
    drop: u64,
    x: f64,
    y: f64,
    portal: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<Label>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    style: Option<Style>,
}

impl From<&LabeledSample> for JsonRow {
    fn from(row: &LabeledSample) -> Self {
        let s = &row.sample;
        JsonRow {
            player_id: s.player_id.clone(),
            timestamp: s.timestamp,
            hunting: s.hunting,
            attack: s.attack,
            hit: s.hit,
            defense: s.defense,
            avoidance: s.avoidance,
            recovery: s.recovery,
            item: s.item,
            collection: s.collection,
            drop: s.drop,
            x: s.x,
            y: s.y,
            portal: s.portal,
            label: row.label,
            style: row.style,
        }
    }
}

impl JsonRow {
    fn into_labeled(self) -> LabeledSample {
        LabeledSample {
            sample: BehaviorSample {
                player_id: self.player_id,
                timestamp: self.timestamp,
                hunting: self.hunting,
                attack: self.attack,
                hit: self.hit,
                defense: self.defense,
                avoidance: self.avoidance,
                recovery: self.recovery,
                item: self.item,
                collection: self.collection,
                drop: self.drop,
                x: self.x,
                y: self.y,
                portal: self.portal,
            },
            label: self.label,
            style: self.style,
        }
    }
}

fn parse_jsonl<R: BufRead>(reader: R) -> Result<Vec<LabeledSample>, ParseError> {
    let mut out = Vec::new();
    let mut guard = ConflictGuard::default();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = (idx + 1) as u64;
        let text = line?;
        if text.trim().is_empty() {
            continue;
        }
        let row: JsonRow = serde_json::from_str(&text)
            .map_err(|e| ParseError::row(line_no, e.to_string()))?;
        let row = row.into_labeled();
        row.validate().map_err(|reason| ParseError::row(line_no, reason))?;
        guard.check(&row, line_no)?;
        out.push(row);
    }
    Ok(out)
}

/// Write samples in the given format. CSV always includes the header row.
pub fn write_log<W: Write>(
    out: W,
    samples: &[LabeledSample],
    format: LogFormat,
) -> std::io::Result<()> {
    match format {
        LogFormat::Csv => write_csv(out, samples),
        LogFormat::Jsonl => write_jsonl(out, samples),
    }
}

/// Serialize samples to an in-memory string.
pub fn log_to_string(samples: &[LabeledSample], format: LogFormat) -> String {
    let mut buf = Vec::new();
    write_log(&mut buf, samples, format).expect("in-memory write cannot fail");
    String::from_utf8(buf).expect("log serialization is UTF-8")
}

fn write_csv<W: Write>(out: W, samples: &[LabeledSample]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for row in samples {
        let s = &row.sample;
        w.write_record([
            s.player_id.as_str(),
            &s.timestamp.to_string(),
            &s.hunting.to_string(),
            &s.attack.to_string(),
            &s.hit.to_string(),
            &s.defense.to_string(),
            &s.avoidance.to_string(),
            &s.recovery.to_string(),
            &s.item.to_string(),
            &s.collection.to_string(),
            &s.drop.to_string(),
            &s.x.to_string(),
            &s.y.to_string(),
            &s.portal.to_string(),
            &row.label.map(|l| l.to_string()).unwrap_or_default(),
            &row.style.map(|st| st.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()
}

fn write_jsonl<W: Write>(mut out: W, samples: &[LabeledSample]) -> std::io::Result<()> {
    for row in samples {
        serde_json::to_writer(&mut out, &JsonRow::from(row))?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[derive(Debug, Error, PartialEq)]
pub enum GroupError {
    #[error("conflicting labels for player '{player_id}': {first} vs {second}")]
    ConflictingLabels { player_id: String, first: Label, second: Label },
    #[error("conflicting styles for player '{player_id}': {first} vs {second}")]
    ConflictingStyles { player_id: String, first: Style, second: Style },
}

/// Group samples by player, each player's sequence sorted ascending by
/// timestamp (ties keep input order). Players appear in first-seen order.
///
/// All labeled samples of one player must agree on the label (and style);
/// unlabeled rows may mix with labeled ones.
pub fn group_by_player(
    samples: &[LabeledSample],
) -> Result<IndexMap<String, Vec<LabeledSample>>, GroupError> {
    let mut groups: IndexMap<String, Vec<LabeledSample>> = IndexMap::new();
    let mut seen: HashMap<String, (Option<Label>, Option<Style>)> = HashMap::new();

    for row in samples {
        let id = &row.sample.player_id;
        let entry = seen.entry(id.clone()).or_insert((None, None));
        if let Some(label) = row.label {
            match entry.0 {
                Some(prev) if prev != label => {
                    return Err(GroupError::ConflictingLabels {
                        player_id: id.clone(),
                        first: prev,
                        second: label,
                    });
                }
                _ => entry.0 = Some(label),
            }
        }
        if let Some(style) = row.style {
            match entry.1 {
                Some(prev) if prev != style => {
                    return Err(GroupError::ConflictingStyles {
                        player_id: id.clone(),
                        first: prev,
                        second: style,
                    });
                }
                _ => entry.1 = Some(style),
            }
        }
        groups.entry(id.clone()).or_default().push(row.clone());
    }

    for seq in groups.values_mut() {
        seq.sort_by_key(|row| row.sample.timestamp);
    }
    Ok(groups)
}
