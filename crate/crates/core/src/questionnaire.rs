//! Questionnaire generation: item taxonomy, prompt rendering and export.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circumplex::{Attribute, CircumplexError, Direction};

pub const SCALE_MIN: u8 = 0;
pub const SCALE_MAX: u8 = 10;

const AGREE_MIN_LABEL: &str = "fully disagree";
const AGREE_MAX_LABEL: &str = "fully agree";

#[derive(Debug, Error)]
pub enum QuestionnaireError {
    #[error("candidate id `{0}` appears more than once")]
    DuplicateCandidateId(String),
    #[error("candidate set is empty")]
    EmptyCandidateSet,
    #[error("no items to export")]
    EmptyItemList,
    #[error("unsupported export format `{0}`")]
    UnsupportedFormat(String),
    #[error("candidates row {row}: {message}")]
    InvalidCandidate { row: usize, message: String },
    #[error("candidates file is unreadable: {0}")]
    Unreadable(String),
}

/// A local-language translation candidate for one source attribute.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateTranslation {
    pub id: String,
    pub attribute: Attribute,
    pub local_text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transliteration: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
}

impl CandidateTranslation {
    pub fn new(id: impl Into<String>, attribute: Attribute, local_text: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            attribute,
            local_text: local_text.into(),
            transliteration: None,
            notes: None,
        }
    }

    /// Local text followed by the transliteration, when one is known.
    pub fn label(&self) -> String {
        match &self.transliteration {
            Some(t) => format!("{} {}", self.local_text, t),
            None => self.local_text.clone(),
        }
    }

    fn validate(&self) -> Result<(), String> {
        if self.id.trim().is_empty() {
            return Err("candidate id is empty".into());
        }
        if self.id.contains('.') || self.id.chars().any(char::is_whitespace) {
            return Err(format!(
                "candidate id `{}` must not contain dots or whitespace",
                self.id
            ));
        }
        if self.local_text.trim().is_empty() {
            return Err(format!("candidate `{}` has empty local text", self.id));
        }
        if self
            .local_text
            .chars()
            .any(|c| c.is_control() || matches!(c, '[' | ']' | '"'))
        {
            return Err(format!(
                "candidate `{}` local text contains brackets, quotes or control characters",
                self.id
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[allow(clippy::upper_case_acronyms, non_camel_case_types)]
pub enum ItemKind {
    APPR,
    UNDR,
    ASSO_CCW,
    ASSO_CW,
    ANTO,
    BIAS,
    IMPL_CCW,
    IMPL_CW,
}

impl ItemKind {
    pub const ALL: [ItemKind; 8] = [
        ItemKind::APPR,
        ItemKind::UNDR,
        ItemKind::ASSO_CCW,
        ItemKind::ASSO_CW,
        ItemKind::ANTO,
        ItemKind::BIAS,
        ItemKind::IMPL_CCW,
        ItemKind::IMPL_CW,
    ];

    /// Kinds asked for a candidate of `attribute`, in emission order.
    pub fn for_attribute(attribute: Attribute) -> impl Iterator<Item = ItemKind> {
        let main = attribute.is_main_axis();
        Self::ALL
            .into_iter()
            .filter(move |k| main || !matches!(k, ItemKind::ANTO | ItemKind::BIAS))
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ItemKind::APPR => "APPR",
            ItemKind::UNDR => "UNDR",
            ItemKind::ASSO_CCW => "ASSO_CCW",
            ItemKind::ASSO_CW => "ASSO_CW",
            ItemKind::ANTO => "ANTO",
            ItemKind::BIAS => "BIAS",
            ItemKind::IMPL_CCW => "IMPL_CCW",
            ItemKind::IMPL_CW => "IMPL_CW",
        }
    }

    fn referenced(self, source: Attribute) -> Result<Vec<Attribute>, CircumplexError> {
        use Direction::*;
        Ok(match self {
            ItemKind::APPR => vec![source],
            ItemKind::UNDR => vec![],
            ItemKind::ASSO_CCW | ItemKind::IMPL_CCW => vec![source.adjacent(Counterclockwise)],
            ItemKind::ASSO_CW | ItemKind::IMPL_CW => vec![source.adjacent(Clockwise)],
            ItemKind::ANTO => vec![source.antipodal()],
            ItemKind::BIAS => vec![
                source.orthogonal(Counterclockwise)?,
                source.orthogonal(Clockwise)?,
            ],
        })
    }
}

impl fmt::Display for ItemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ItemKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown item kind `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionnaireItem {
    pub item_id: String,
    pub kind: ItemKind,
    pub candidate: CandidateTranslation,
    pub source_attribute: Attribute,
    pub referenced_attributes: Vec<Attribute>,
    pub prompt_text: String,
    pub scale_min_label: String,
    pub scale_max_label: String,
}

pub fn item_id(attribute: Attribute, candidate_id: &str, kind: ItemKind) -> String {
    format!("{attribute}.{candidate_id}.{kind}")
}

/// Builds the full item list: eight kinds per main-axis candidate, six per
/// derived-axis candidate, candidates in input order.
pub fn generate_items(
    candidates: &[CandidateTranslation],
    local_language_name: &str,
) -> Result<Vec<QuestionnaireItem>, QuestionnaireError> {
    if candidates.is_empty() {
        return Err(QuestionnaireError::EmptyCandidateSet);
    }
    let mut seen = HashSet::new();
    for (row, c) in candidates.iter().enumerate() {
        c.validate()
            .map_err(|message| QuestionnaireError::InvalidCandidate {
                row: row + 1,
                message,
            })?;
        if !seen.insert(c.id.as_str()) {
            return Err(QuestionnaireError::DuplicateCandidateId(c.id.clone()));
        }
    }

    let mut items = Vec::with_capacity(candidates.len() * 8);
    for candidate in candidates {
        let source = candidate.attribute;
        for kind in ItemKind::for_attribute(source) {
            let referenced = kind.referenced(source).expect("kind filtered by axis");
            let (scale_min_label, scale_max_label) = match kind {
                // 0 is the counterclockwise orthogonal end of the axis.
                ItemKind::BIAS => (
                    referenced[0].name().to_string(),
                    referenced[1].name().to_string(),
                ),
                _ => (AGREE_MIN_LABEL.to_string(), AGREE_MAX_LABEL.to_string()),
            };
            let mut item = QuestionnaireItem {
                item_id: item_id(source, &candidate.id, kind),
                kind,
                candidate: candidate.clone(),
                source_attribute: source,
                referenced_attributes: referenced,
                prompt_text: String::new(),
                scale_min_label,
                scale_max_label,
            };
            item.prompt_text = render_prompt(&item, local_language_name);
            items.push(item);
        }
    }
    Ok(items)
}

/// Renders the English prompt with the candidate's local text quoted.
pub fn render_prompt(item: &QuestionnaireItem, local_language_name: &str) -> String {
    let loc = format!("\"{}\"", item.candidate.local_text);
    let r = &item.referenced_attributes;
    match item.kind {
        ItemKind::APPR => format!(
            "To what extent do you agree/disagree that {loc} is an appropriate translation of {}?",
            r[0]
        ),
        ItemKind::UNDR => format!(
            "To what extent do you agree/disagree that {loc} is easily understood by a typical general {local_language_name} speaker?"
        ),
        ItemKind::ASSO_CCW | ItemKind::ASSO_CW => format!(
            "To what extent do you agree/disagree that {loc} is more often associated as a translation of {}?",
            r[0]
        ),
        ItemKind::ANTO => format!(
            "To what extent do you agree/disagree that {loc} is a direct antonym of {}?",
            r[0]
        ),
        ItemKind::BIAS => format!(
            "To what extent is {loc} (as a description of an acoustic environment) biased with respect to the {}\u{2013}{} axis?",
            r[0], r[1]
        ),
        ItemKind::IMPL_CCW | ItemKind::IMPL_CW => format!(
            "To what extent do you agree/disagree that {loc} (as a description of an acoustic environment) implies that the environment is also {}?",
            r[0]
        ),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExportFormat {
    Csv,
    Json,
}

impl FromStr for ExportFormat {
    type Err = QuestionnaireError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ExportFormat::Csv),
            "json" => Ok(ExportFormat::Json),
            _ => Err(QuestionnaireError::UnsupportedFormat(s.to_string())),
        }
    }
}

#[derive(Serialize)]
struct ExportRow<'a> {
    item_id: &'a str,
    kind: ItemKind,
    candidate_id: &'a str,
    attribute: Attribute,
    prompt: &'a str,
    scale_min: u8,
    scale_max: u8,
    scale_min_label: &'a str,
    scale_max_label: &'a str,
}

#[derive(Serialize)]
struct JsonScale {
    min: u8,
    max: u8,
    points: u8,
}

#[derive(Serialize)]
struct JsonExport<'a> {
    scale: JsonScale,
    items: Vec<ExportRow<'a>>,
}

/// Serializes the questionnaire, optionally in a seeded shuffled order.
pub fn export_questionnaire(
    items: &[QuestionnaireItem],
    format: ExportFormat,
    shuffle_seed: Option<u64>,
) -> Result<String, QuestionnaireError> {
    if items.is_empty() {
        return Err(QuestionnaireError::EmptyItemList);
    }
    let mut order: Vec<&QuestionnaireItem> = items.iter().collect();
    if let Some(seed) = shuffle_seed {
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    let rows: Vec<ExportRow<'_>> = order
        .into_iter()
        .map(|it| ExportRow {
            item_id: &it.item_id,
            kind: it.kind,
            candidate_id: &it.candidate.id,
            attribute: it.source_attribute,
            prompt: &it.prompt_text,
            scale_min: SCALE_MIN,
            scale_max: SCALE_MAX,
            scale_min_label: &it.scale_min_label,
            scale_max_label: &it.scale_max_label,
        })
        .collect();

    match format {
        ExportFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for row in &rows {
                w.serialize(row).expect("in-memory csv write");
            }
            let bytes = w.into_inner().expect("in-memory csv flush");
            Ok(String::from_utf8(bytes).expect("utf-8 input stays utf-8"))
        }
        ExportFormat::Json => {
            let doc = JsonExport {
                scale: JsonScale {
                    min: SCALE_MIN,
                    max: SCALE_MAX,
                    points: SCALE_MAX - SCALE_MIN + 1,
                },
                items: rows,
            };
            let mut s = serde_json::to_string_pretty(&doc).expect("json serialization");
            s.push('\n');
            Ok(s)
        }
    }
}

#[derive(Deserialize)]
struct CandidateRow {
    id: String,
    attribute: String,
    local_text: String,
    #[serde(default)]
    transliteration: Option<String>,
    #[serde(default)]
    notes: Option<String>,
}

/// Reads a candidates CSV (`id,attribute,local_text,transliteration,notes`).
pub fn parse_candidates(text: &str) -> Result<Vec<CandidateTranslation>, QuestionnaireError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::Headers)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| QuestionnaireError::Unreadable(e.to_string()))?
        .clone();
    for required in ["id", "attribute", "local_text"] {
        if !headers.iter().any(|h| h == required) {
            return Err(QuestionnaireError::Unreadable(format!(
                "missing column `{required}`"
            )));
        }
    }
    let mut out = Vec::new();
    for (i, row) in reader.deserialize::<CandidateRow>().enumerate() {
        let row_no = i + 1;
        let row = row.map_err(|e| QuestionnaireError::InvalidCandidate {
            row: row_no,
            message: e.to_string(),
        })?;
        let attribute = row.attribute.parse::<Attribute>().map_err(|e| {
            QuestionnaireError::InvalidCandidate {
                row: row_no,
                message: e.to_string(),
            }
        })?;
        let non_empty =
            |v: Option<String>| v.map(|s| s.trim().to_string()).filter(|s| !s.is_empty());
        let candidate = CandidateTranslation {
            id: row.id.trim().to_string(),
            attribute,
            local_text: row.local_text.trim().to_string(),
            transliteration: non_empty(row.transliteration),
            notes: non_empty(row.notes),
        };
        candidate
            .validate()
            .map_err(|message| QuestionnaireError::InvalidCandidate {
                row: row_no,
                message,
            })?;
        out.push(candidate);
    }
    Ok(out)
}

pub fn candidates_to_csv(candidates: &[CandidateTranslation]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["id", "attribute", "local_text", "transliteration", "notes"])
        .expect("in-memory csv write");
    for c in candidates {
        w.write_record([
            c.id.as_str(),
            c.attribute.name(),
            c.local_text.as_str(),
            c.transliteration.as_deref().unwrap_or(""),
            c.notes.as_deref().unwrap_or(""),
        ])
        .expect("in-memory csv write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}
