//! Parsing and validation of participant profiles and raw responses.
//!
//! Row-level problems never abort a parse: each rejected row yields an
//! [`IngestError`] and every well-formed row is kept.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::questionnaire::{QuestionnaireItem, SCALE_MAX, SCALE_MIN};

/// Whole-document failure.
#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("unreadable document: {0}")]
    UnreadableDocument(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DocumentFormat {
    Csv,
    Json,
}

impl DocumentFormat {
    /// Guesses the format from the first non-whitespace byte.
    pub fn sniff(text: &str) -> DocumentFormat {
        match text
            .trim_start_matches('\u{feff}')
            .trim_start()
            .chars()
            .next()
        {
            Some('[') | Some('{') => DocumentFormat::Json,
            _ => DocumentFormat::Csv,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum IngestErrorKind {
    UnknownItem,
    UnknownParticipant,
    OutOfRange,
    NonInteger,
    Duplicate,
    Malformed,
}

/// One rejected row. `row` is the 1-based data row (header excluded).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IngestError {
    pub row: usize,
    pub kind: IngestErrorKind,
    pub message: String,
}

impl fmt::Display for IngestError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "row {}: {:?}: {}", self.row, self.kind, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ResponseRecord {
    pub participant_id: String,
    pub item_id: String,
    pub raw_rating: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum YearsAbroad {
    #[serde(rename = "<1")]
    LessThanOne,
    #[serde(rename = "1-5")]
    OneToFive,
    #[serde(rename = "6-10")]
    SixToTen,
    #[serde(rename = ">10")]
    MoreThanTen,
    #[serde(rename = "unknown")]
    Unknown,
}

impl YearsAbroad {
    pub fn as_str(self) -> &'static str {
        match self {
            YearsAbroad::LessThanOne => "<1",
            YearsAbroad::OneToFive => "1-5",
            YearsAbroad::SixToTen => "6-10",
            YearsAbroad::MoreThanTen => ">10",
            YearsAbroad::Unknown => "unknown",
        }
    }
}

impl FromStr for YearsAbroad {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm: String = s
            .trim()
            .chars()
            .map(|c| {
                if matches!(c, '\u{2013}' | '\u{2014}') {
                    '-'
                } else {
                    c
                }
            })
            .filter(|c| !c.is_whitespace())
            .collect();
        match norm.to_ascii_lowercase().as_str() {
            "<1" => Ok(YearsAbroad::LessThanOne),
            "1-5" => Ok(YearsAbroad::OneToFive),
            "6-10" => Ok(YearsAbroad::SixToTen),
            ">10" => Ok(YearsAbroad::MoreThanTen),
            "" | "unknown" => Ok(YearsAbroad::Unknown),
            _ => Err(format!("unknown years-abroad bucket `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParticipantProfile {
    pub participant_id: String,
    pub ilr_local: u8,
    pub ilr_english: u8,
    pub years_abroad_bucket: YearsAbroad,
}

impl ParticipantProfile {
    /// Proficiency weight: sum of the two ILR self-ratings.
    pub fn ilr_weight(&self) -> f64 {
        f64::from(self.ilr_local) + f64::from(self.ilr_english)
    }
}

const ILR_MAX: i64 = 5;

/// Generic row view shared by the CSV and JSON readers.
type RawRow = HashMap<String, String>;

fn read_rows(
    text: &str,
    format: DocumentFormat,
    required: &[&str],
) -> Result<Vec<Result<RawRow, String>>, DocumentError> {
    let text = text.trim_start_matches('\u{feff}');
    match format {
        DocumentFormat::Csv => {
            let mut reader = csv::ReaderBuilder::new()
                .flexible(true)
                .trim(csv::Trim::All)
                .from_reader(text.as_bytes());
            let headers = reader
                .headers()
                .map_err(|e| DocumentError::UnreadableDocument(e.to_string()))?
                .clone();
            for col in required {
                if !headers.iter().any(|h| h == *col) {
                    return Err(DocumentError::UnreadableDocument(format!(
                        "missing column `{col}`"
                    )));
                }
            }
            let mut rows = Vec::new();
            for rec in reader.records() {
                rows.push(match rec {
                    Err(e) => Err(e.to_string()),
                    Ok(rec) if rec.len() != headers.len() => Err(format!(
                        "expected {} fields, found {}",
                        headers.len(),
                        rec.len()
                    )),
                    Ok(rec) => Ok(headers
                        .iter()
                        .zip(rec.iter())
                        .map(|(h, v)| (h.to_string(), v.to_string()))
                        .collect()),
                });
            }
            Ok(rows)
        }
        DocumentFormat::Json => {
            let value: Value = serde_json::from_str(text)
                .map_err(|e| DocumentError::UnreadableDocument(e.to_string()))?;
            let array = match value {
                Value::Array(a) => a,
                _ => {
                    return Err(DocumentError::UnreadableDocument(
                        "expected a top-level JSON array".into(),
                    ))
                }
            };
            Ok(array
                .into_iter()
                .map(|v| match v {
                    Value::Object(map) => Ok(map
                        .into_iter()
                        .map(|(k, v)| {
                            let s = match v {
                                Value::String(s) => s,
                                other => other.to_string(),
                            };
                            (k, s)
                        })
                        .collect()),
                    other => Err(format!("expected an object, found `{other}`")),
                })
                .collect())
        }
    }
}

fn field<'a>(row: &'a RawRow, name: &str) -> Result<&'a str, String> {
    match row.get(name).map(|s| s.trim()) {
        Some(s) if !s.is_empty() => Ok(s),
        _ => Err(format!("missing `{name}`")),
    }
}

enum IntError {
    NonInteger(String),
    Malformed(String),
}

fn parse_int(raw: &str, name: &str) -> Result<i64, IntError> {
    if let Ok(v) = raw.parse::<i64>() {
        return Ok(v);
    }
    if raw.parse::<f64>().is_ok() {
        return Err(IntError::NonInteger(format!(
            "`{name}` must be an integer, found `{raw}`"
        )));
    }
    Err(IntError::Malformed(format!(
        "`{name}` is not a number: `{raw}`"
    )))
}

/// Parses a responses document (`participant_id,item_id,rating`) against the
/// questionnaire. Rejected rows are reported, never dropped silently.
pub fn parse_responses(
    text: &str,
    format: DocumentFormat,
    items: &[QuestionnaireItem],
) -> Result<(Vec<ResponseRecord>, Vec<IngestError>), DocumentError> {
    let known: HashSet<&str> = items.iter().map(|i| i.item_id.as_str()).collect();
    let rows = read_rows(text, format, &["participant_id", "item_id", "rating"])?;

    let mut records = Vec::new();
    let mut errors = Vec::new();
    let mut seen: HashSet<(String, String)> = HashSet::new();
    for (i, row) in rows.into_iter().enumerate() {
        let row_no = i + 1;
        let reject = |kind, message: String| IngestError {
            row: row_no,
            kind,
            message,
        };
        let row = match row {
            Ok(r) => r,
            Err(m) => {
                errors.push(reject(IngestErrorKind::Malformed, m));
                continue;
            }
        };
        let parsed = (|| {
            let participant_id =
                field(&row, "participant_id").map_err(|m| reject(IngestErrorKind::Malformed, m))?;
            let item_id =
                field(&row, "item_id").map_err(|m| reject(IngestErrorKind::Malformed, m))?;
            let rating_raw =
                field(&row, "rating").map_err(|m| reject(IngestErrorKind::Malformed, m))?;
            let rating = parse_int(rating_raw, "rating").map_err(|e| match e {
                IntError::NonInteger(m) => reject(IngestErrorKind::NonInteger, m),
                IntError::Malformed(m) => reject(IngestErrorKind::Malformed, m),
            })?;
            if !known.contains(item_id) {
                return Err(reject(
                    IngestErrorKind::UnknownItem,
                    format!("unknown item_id `{item_id}`"),
                ));
            }
            if !(i64::from(SCALE_MIN)..=i64::from(SCALE_MAX)).contains(&rating) {
                return Err(reject(
                    IngestErrorKind::OutOfRange,
                    format!("rating {rating} outside {SCALE_MIN}..={SCALE_MAX}"),
                ));
            }
            Ok(ResponseRecord {
                participant_id: participant_id.to_string(),
                item_id: item_id.to_string(),
                raw_rating: rating as u8,
            })
        })();
        match parsed {
            Ok(rec) => {
                if seen.insert((rec.participant_id.clone(), rec.item_id.clone())) {
                    records.push(rec);
                } else {
                    errors.push(reject(
                        IngestErrorKind::Duplicate,
                        format!(
                            "duplicate response for ({}, {})",
                            rec.participant_id, rec.item_id
                        ),
                    ));
                }
            }
            Err(e) => errors.push(e),
        }
    }
    Ok((records, errors))
}

/// Parses a participants document
/// (`participant_id,ilr_local,ilr_english,years_abroad_bucket`).
pub fn parse_participants(
    text: &str,
    format: DocumentFormat,
) -> Result<(Vec<ParticipantProfile>, Vec<IngestError>), DocumentError> {
    let rows = read_rows(
        text,
        format,
        &["participant_id", "ilr_local", "ilr_english"],
    )?;
    let mut profiles = Vec::new();
    let mut errors = Vec::new();
    let mut seen = HashSet::new();
    for (i, row) in rows.into_iter().enumerate() {
        let row_no = i + 1;
        let reject = |kind, message: String| IngestError {
            row: row_no,
            kind,
            message,
        };
        let row = match row {
            Ok(r) => r,
            Err(m) => {
                errors.push(reject(IngestErrorKind::Malformed, m));
                continue;
            }
        };
        let parsed = (|| {
            let participant_id =
                field(&row, "participant_id").map_err(|m| reject(IngestErrorKind::Malformed, m))?;
            let ilr = |name: &str| -> Result<u8, IngestError> {
                let raw = field(&row, name).map_err(|m| reject(IngestErrorKind::Malformed, m))?;
                let v = parse_int(raw, name).map_err(|e| match e {
                    IntError::NonInteger(m) => reject(IngestErrorKind::NonInteger, m),
                    IntError::Malformed(m) => reject(IngestErrorKind::Malformed, m),
                })?;
                if !(0..=ILR_MAX).contains(&v) {
                    return Err(reject(
                        IngestErrorKind::OutOfRange,
                        format!("`{name}` {v} outside 0..={ILR_MAX}"),
                    ));
                }
                Ok(v as u8)
            };
            let ilr_local = ilr("ilr_local")?;
            let ilr_english = ilr("ilr_english")?;
            let years_abroad_bucket = row
                .get("years_abroad_bucket")
                .map(|s| s.parse::<YearsAbroad>())
                .unwrap_or(Ok(YearsAbroad::Unknown))
                .map_err(|m| reject(IngestErrorKind::Malformed, m))?;
            Ok(ParticipantProfile {
                participant_id: participant_id.to_string(),
                ilr_local,
                ilr_english,
                years_abroad_bucket,
            })
        })();
        match parsed {
            Ok(p) if !seen.insert(p.participant_id.clone()) => errors.push(reject(
                IngestErrorKind::Duplicate,
                format!("duplicate participant `{}`", p.participant_id),
            )),
            Ok(p) => profiles.push(p),
            Err(e) => errors.push(e),
        }
    }
    Ok((profiles, errors))
}

pub fn responses_to_csv(records: &[ResponseRecord]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["participant_id", "item_id", "rating"])
        .expect("in-memory csv write");
    for r in records {
        w.write_record([
            r.participant_id.as_str(),
            r.item_id.as_str(),
            &r.raw_rating.to_string(),
        ])
        .expect("in-memory csv write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

pub fn participants_to_csv(profiles: &[ParticipantProfile]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "participant_id",
        "ilr_local",
        "ilr_english",
        "years_abroad_bucket",
    ])
    .expect("in-memory csv write");
    for p in profiles {
        w.write_record([
            p.participant_id.as_str(),
            &p.ilr_local.to_string(),
            &p.ilr_english.to_string(),
            p.years_abroad_bucket.as_str(),
        ])
        .expect("in-memory csv write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

/// Participant ids from profiles and records, sorted and deduplicated.
pub fn participant_ids(records: &[ResponseRecord], profiles: &[ParticipantProfile]) -> Vec<String> {
    let set: BTreeSet<&str> = records
        .iter()
        .map(|r| r.participant_id.as_str())
        .chain(profiles.iter().map(|p| p.participant_id.as_str()))
        .collect();
    set.into_iter().map(str::to_string).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParticipantCoverage {
    pub participant_id: String,
    pub answered: usize,
    pub total: usize,
    pub coverage: f64,
    pub missing: Vec<String>,
    pub below_threshold: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ItemCount {
    pub item_id: String,
    pub responses: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompletenessReport {
    pub threshold: f64,
    pub participants: Vec<ParticipantCoverage>,
    pub items: Vec<ItemCount>,
}

impl CompletenessReport {
    pub fn flagged(&self) -> impl Iterator<Item = &ParticipantCoverage> {
        self.participants.iter().filter(|p| p.below_threshold)
    }
}

pub const DEFAULT_COMPLETENESS_THRESHOLD: f64 = 1.0;

pub fn completeness_report(
    records: &[ResponseRecord],
    items: &[QuestionnaireItem],
    participants: &[String],
    threshold: f64,
) -> CompletenessReport {
    let mut answered: HashMap<&str, HashSet<&str>> = HashMap::new();
    let mut per_item: BTreeMap<&str, usize> = BTreeMap::new();
    for r in records {
        answered
            .entry(&r.participant_id)
            .or_default()
            .insert(&r.item_id);
        *per_item.entry(&r.item_id).or_default() += 1;
    }
    let total = items.len();
    let participants = participants
        .iter()
        .map(|pid| {
            let got = answered.get(pid.as_str());
            let missing: Vec<String> = items
                .iter()
                .filter(|it| !got.is_some_and(|g| g.contains(it.item_id.as_str())))
                .map(|it| it.item_id.clone())
                .collect();
            let answered = total - missing.len();
            let coverage = if total == 0 {
                1.0
            } else {
                answered as f64 / total as f64
            };
            ParticipantCoverage {
                participant_id: pid.clone(),
                answered,
                total,
                coverage,
                missing,
                below_threshold: coverage < threshold,
            }
        })
        .collect();
    let items = items
        .iter()
        .map(|it| ItemCount {
            item_id: it.item_id.clone(),
            responses: per_item.get(it.item_id.as_str()).copied().unwrap_or(0),
        })
        .collect();
    CompletenessReport {
        threshold,
        participants,
        items,
    }
}
