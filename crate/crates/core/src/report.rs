//! Score tables with significance markers, ordered pairwise-test listings,
//! rating distributions and the recommendation report.
//!
//! Markers follow the pairwise rejections *won* by a candidate, i.e. pairs in
//! which it is the higher-mean side:
//!
//! * `**` – every other candidate beaten at the strong level,
//! * `*`  – every other candidate beaten at the weak level, not all strongly,
//! * `⊕n` – `n` wins at the strong level when not all pairs are won,
//! * `+n` – `n` wins at the weak level only,
//! * nothing – no posthoc test ran, or no wins.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_width::UnicodeWidthStr;

use crate::circumplex::{Attribute, AxisKind};
use crate::ingest::ResponseRecord;
use crate::questionnaire::{CandidateTranslation, ItemKind, QuestionnaireItem, SCALE_MAX};
use crate::scoring::{Criterion, ScoreSummary};
use crate::stats::{OmnibusResult, PosthocResult};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReportError {
    #[error(
        "posthoc results for {attribute}/{criterion} reference unknown candidate `{candidate}`"
    )]
    InconsistentFamily {
        attribute: Attribute,
        criterion: Criterion,
        candidate: String,
    },
    #[error("{criterion} is not a column of the {layout:?} layout (candidate `{candidate}`)")]
    LayoutMismatch {
        layout: Layout,
        criterion: Criterion,
        candidate: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Text,
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Text => "txt",
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

impl std::str::FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "text" | "txt" => Ok(OutputFormat::Text),
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(format!("unknown output format `{s}`")),
        }
    }
}

/// Significance levels used for markers and stars.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub strong: f64,
    pub weak: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            strong: 0.01,
            weak: 0.05,
        }
    }
}

impl Thresholds {
    pub fn stars(&self, p: f64) -> &'static str {
        if p < self.strong {
            "**"
        } else if p < self.weak {
            "*"
        } else {
            ""
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Glyphs {
    #[default]
    Unicode,
    Ascii,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Marker {
    DoubleStar,
    Star,
    /// Wins at the strong level (`opus`) and at the weak level only (`plus`)
    /// when not every pair is won.
    Partial {
        opus: usize,
        plus: usize,
    },
    Nothing,
}

impl Marker {
    pub fn render(self, glyphs: Glyphs) -> String {
        let opus_glyph = match glyphs {
            Glyphs::Unicode => "\u{2295}",
            Glyphs::Ascii => "o",
        };
        match self {
            Marker::DoubleStar => "**".into(),
            Marker::Star => "*".into(),
            Marker::Nothing => String::new(),
            Marker::Partial { opus, plus } => {
                let mut s = String::new();
                if opus > 0 {
                    let _ = write!(s, "{opus_glyph}{opus}");
                }
                if plus > 0 {
                    let _ = write!(s, "+{plus}");
                }
                s
            }
        }
    }

    /// Boldface accompanies the "better than all" markers.
    pub fn bold(self) -> bool {
        matches!(self, Marker::DoubleStar | Marker::Star)
    }
}

/// Omnibus and (when gated in) posthoc results for one attribute × criterion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFamily {
    pub attribute: Attribute,
    pub criterion: Criterion,
    /// Candidate ids in group order.
    pub candidates: Vec<String>,
    /// Per-candidate mean score, aligned with `candidates`.
    pub means: Vec<f64>,
    pub omnibus: OmnibusResult,
    /// `None` when the omnibus test was not significant at the gate level.
    pub posthoc: Option<Vec<PosthocResult>>,
}

impl TestFamily {
    fn validate(&self) -> Result<(), ReportError> {
        for r in self.posthoc.iter().flatten() {
            for c in [&r.hi, &r.lo] {
                if !self.candidates.contains(c) {
                    return Err(ReportError::InconsistentFamily {
                        attribute: self.attribute,
                        criterion: self.criterion,
                        candidate: c.clone(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Significant wins and losses of `candidate`, at (strong, weak-only).
    fn record(&self, candidate: &str, t: &Thresholds) -> WinLoss {
        let mut wl = WinLoss::default();
        for r in self.posthoc.iter().flatten() {
            let level = if r.p_adj < t.strong {
                Some(true)
            } else if r.p_adj < t.weak {
                Some(false)
            } else {
                None
            };
            let Some(strong) = level else { continue };
            if r.hi == candidate {
                if strong {
                    wl.strong_wins += 1;
                } else {
                    wl.weak_wins += 1;
                }
            } else if r.lo == candidate {
                wl.losses.push(r.hi.clone());
            }
        }
        wl
    }
}

#[derive(Debug, Default)]
struct WinLoss {
    strong_wins: usize,
    weak_wins: usize,
    losses: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkedScore {
    pub candidate_id: String,
    pub attribute: Attribute,
    pub criterion: Criterion,
    #[serde(rename = "S")]
    pub score: f64,
    pub n: usize,
    pub marker: Marker,
    pub bold: bool,
}

fn family_index(families: &[TestFamily]) -> HashMap<(Attribute, Criterion), &TestFamily> {
    families
        .iter()
        .map(|f| ((f.attribute, f.criterion), f))
        .collect()
}

pub fn assign_markers(
    summaries: &[ScoreSummary],
    families: &[TestFamily],
    thresholds: &Thresholds,
) -> Result<Vec<MarkedScore>, ReportError> {
    for f in families {
        f.validate()?;
    }
    let index = family_index(families);
    Ok(summaries
        .iter()
        .map(|s| {
            let marker = match index.get(&(s.attribute, s.criterion)) {
                Some(f) if f.posthoc.is_some() && f.candidates.contains(&s.candidate_id) => {
                    let others = f.candidates.len() - 1;
                    let wl = f.record(&s.candidate_id, thresholds);
                    let wins = wl.strong_wins + wl.weak_wins;
                    if others > 0 && wl.strong_wins == others {
                        Marker::DoubleStar
                    } else if others > 0 && wins == others {
                        Marker::Star
                    } else if wins > 0 {
                        Marker::Partial {
                            opus: wl.strong_wins,
                            plus: wl.weak_wins,
                        }
                    } else {
                        Marker::Nothing
                    }
                }
                _ => Marker::Nothing,
            };
            MarkedScore {
                candidate_id: s.candidate_id.clone(),
                attribute: s.attribute,
                criterion: s.criterion,
                score: s.score,
                n: s.n,
                marker,
                bold: marker.bold(),
            }
        })
        .collect())
}

/// Rounds half away from zero to three decimals, judged on the shortest
/// decimal representation so that e.g. `0.8675` renders `0.868`.
pub fn format_score(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let repr = format!("{:e}", x.abs());
    let (mantissa, exp) = repr.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    // value = 0.d1d2d3… × 10^(exp+1); scale to thousandths.
    let point = exp + 1 + 3;
    let (int_part, rest) = if point <= 0 {
        (
            0u128,
            format!("{}{}", "0".repeat((-point) as usize), digits),
        )
    } else if point as usize >= digits.len() {
        let padded = format!("{digits}{}", "0".repeat(point as usize - digits.len()));
        (padded.parse().expect("digits"), String::new())
    } else {
        let (a, b) = digits.split_at(point as usize);
        (a.parse().expect("digits"), b.to_string())
    };
    let round_up = rest.chars().next().is_some_and(|c| c >= '5');
    let thousandths = int_part + u128::from(round_up);
    let sign = if x < 0.0 && thousandths != 0 { "-" } else { "" };
    format!("{sign}{}.{:03}", thousandths / 1000, thousandths % 1000)
}

/// p-value display: `<0.001`, `≈1.000`, otherwise three significant digits.
pub fn format_p(p: f64) -> String {
    if p < 0.001 {
        "<0.001".into()
    } else if p >= 0.9995 {
        "\u{2248}1.000".into()
    } else {
        let decimals = (2 - p.log10().floor() as i32).max(0) as usize;
        format!("{p:.decimals$}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Layout {
    MainAxes,
    DerivedAxes,
}

impl Layout {
    pub fn columns(self) -> &'static [Criterion] {
        match self {
            Layout::MainAxes => Criterion::applicable(Attribute::Pleasant),
            Layout::DerivedAxes => Criterion::applicable(Attribute::Vibrant),
        }
    }

    fn axis(self) -> AxisKind {
        match self {
            Layout::MainAxes => AxisKind::Main,
            Layout::DerivedAxes => AxisKind::Derived,
        }
    }
}

fn pad(s: &str, width: usize) -> String {
    let w = UnicodeWidthStr::width(s);
    format!("{s}{}", " ".repeat(width.saturating_sub(w)))
}

fn pad_left(s: &str, width: usize) -> String {
    let w = UnicodeWidthStr::width(s);
    format!("{}{s}", " ".repeat(width.saturating_sub(w)))
}

fn render_aligned(header: &[String], rows: &[Vec<String>], right_from: usize) -> String {
    let mut widths: Vec<usize> = header
        .iter()
        .map(|h| UnicodeWidthStr::width(h.as_str()))
        .collect();
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(UnicodeWidthStr::width(cell.as_str()));
        }
    }
    let line = |cells: &[String]| {
        let parts: Vec<String> = cells
            .iter()
            .enumerate()
            .map(|(i, c)| {
                if i >= right_from {
                    pad_left(c, widths[i])
                } else {
                    pad(c, widths[i])
                }
            })
            .collect();
        parts.join("  ").trim_end().to_string()
    };
    let mut out = String::new();
    out.push_str(&line(header));
    out.push('\n');
    out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1)));
    out.push('\n');
    for row in rows {
        out.push_str(&line(row));
        out.push('\n');
    }
    out
}

fn csv_string(rows: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.write_record(&row).expect("in-memory csv write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

fn json_string<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("json serialization");
    s.push('\n');
    s
}

fn candidate_lookup(candidates: &[CandidateTranslation]) -> HashMap<&str, &CandidateTranslation> {
    candidates.iter().map(|c| (c.id.as_str(), c)).collect()
}

fn label_of(lookup: &HashMap<&str, &CandidateTranslation>, id: &str) -> String {
    lookup
        .get(id)
        .map(|c| c.label())
        .unwrap_or_else(|| id.to_string())
}

/// Attributes in order of first appearance among the candidates.
fn attribute_order(candidates: &[CandidateTranslation]) -> Vec<Attribute> {
    let mut out = Vec::new();
    for c in candidates {
        if !out.contains(&c.attribute) {
            out.push(c.attribute);
        }
    }
    out
}

#[derive(Serialize)]
struct ScoreCellJson<'a> {
    criterion: Criterion,
    #[serde(rename = "S")]
    score: f64,
    display: String,
    n: usize,
    marker: &'a Marker,
    marker_text: String,
    bold: bool,
}

#[derive(Serialize)]
struct ScoreRowJson<'a> {
    attribute: Attribute,
    candidate_id: &'a str,
    local_text: &'a str,
    transliteration: Option<&'a str>,
    scores: Vec<ScoreCellJson<'a>>,
}

/// Renders one score table: a row per candidate of the layout's axis,
/// criteria as columns, three-decimal scores with marker prefixes.
pub fn emit_score_table(
    marked: &[MarkedScore],
    candidates: &[CandidateTranslation],
    layout: Layout,
    format: OutputFormat,
    glyphs: Glyphs,
) -> Result<String, ReportError> {
    let columns = layout.columns();
    for m in marked
        .iter()
        .filter(|m| m.attribute.axis_kind() == layout.axis())
    {
        if !columns.contains(&m.criterion) {
            return Err(ReportError::LayoutMismatch {
                layout,
                criterion: m.criterion,
                candidate: m.candidate_id.clone(),
            });
        }
    }
    let cell: HashMap<(&str, Criterion), &MarkedScore> = marked
        .iter()
        .map(|m| ((m.candidate_id.as_str(), m.criterion), m))
        .collect();
    let rows_for: Vec<&CandidateTranslation> = attribute_order(candidates)
        .into_iter()
        .filter(|a| a.axis_kind() == layout.axis())
        .flat_map(|a| candidates.iter().filter(move |c| c.attribute == a))
        .collect();

    let render_cell = |m: &MarkedScore| {
        let marker = m.marker.render(glyphs);
        let value = format_score(m.score);
        match m.marker {
            Marker::Partial { .. } => format!("{marker} {value}"),
            _ => format!("{marker}{value}"),
        }
    };

    Ok(match format {
        OutputFormat::Text => {
            let mut header = vec!["Attribute".to_string(), "Candidate".to_string()];
            header.extend(columns.iter().map(|c| c.to_string()));
            let mut rows = Vec::new();
            let mut last_attr = None;
            for c in &rows_for {
                let attr = if last_attr == Some(c.attribute) {
                    String::new()
                } else {
                    c.attribute.to_string()
                };
                last_attr = Some(c.attribute);
                let mut row = vec![attr, c.label()];
                for &crit in columns {
                    row.push(
                        cell.get(&(c.id.as_str(), crit))
                            .map_or("-".to_string(), |m| render_cell(m)),
                    );
                }
                rows.push(row);
            }
            render_aligned(&header, &rows, 2)
        }
        OutputFormat::Csv => {
            let mut rows = vec![[
                "attribute",
                "candidate_id",
                "local_text",
                "criterion",
                "S",
                "display",
                "n",
                "marker",
                "bold",
            ]
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()];
            for c in &rows_for {
                for &crit in columns {
                    if let Some(m) = cell.get(&(c.id.as_str(), crit)) {
                        rows.push(vec![
                            c.attribute.to_string(),
                            c.id.clone(),
                            c.local_text.clone(),
                            crit.to_string(),
                            m.score.to_string(),
                            format_score(m.score),
                            m.n.to_string(),
                            m.marker.render(glyphs),
                            m.bold.to_string(),
                        ]);
                    }
                }
            }
            csv_string(rows)
        }
        OutputFormat::Json => {
            let rows: Vec<ScoreRowJson<'_>> = rows_for
                .iter()
                .map(|c| ScoreRowJson {
                    attribute: c.attribute,
                    candidate_id: &c.id,
                    local_text: &c.local_text,
                    transliteration: c.transliteration.as_deref(),
                    scores: columns
                        .iter()
                        .filter_map(|&crit| cell.get(&(c.id.as_str(), crit)))
                        .map(|m| ScoreCellJson {
                            criterion: m.criterion,
                            score: m.score,
                            display: format_score(m.score),
                            n: m.n,
                            marker: &m.marker,
                            marker_text: m.marker.render(glyphs),
                            bold: m.bold,
                        })
                        .collect(),
                })
                .collect();
            json_string(&serde_json::json!({ "layout": layout, "columns": columns, "rows": rows }))
        }
    })
}

/// Posthoc rows of a family sorted ascending by adjusted p (stable).
pub fn sorted_posthoc(family: &TestFamily) -> Vec<&PosthocResult> {
    let mut rows: Vec<&PosthocResult> = family.posthoc.iter().flatten().collect();
    rows.sort_by(|a, b| a.p_adj.total_cmp(&b.p_adj));
    rows
}

#[derive(Serialize)]
struct PosthocJson<'a> {
    cand_hi: &'a str,
    cand_lo: &'a str,
    t: f64,
    p_raw: f64,
    p_adj: f64,
    p_display: String,
    stars: &'static str,
}

#[derive(Serialize)]
struct FamilyJson<'a> {
    attribute: Attribute,
    criterion: Criterion,
    #[serde(rename = "H")]
    h: f64,
    df: u32,
    p: f64,
    p_display: String,
    stars: &'static str,
    posthoc_performed: bool,
    posthoc: Vec<PosthocJson<'a>>,
}

/// Omnibus row per family followed by its posthoc rows in ascending p order,
/// higher-mean candidate on the left.
pub fn emit_test_table(
    families: &[TestFamily],
    candidates: &[CandidateTranslation],
    thresholds: &Thresholds,
    format: OutputFormat,
) -> String {
    let lookup = candidate_lookup(candidates);
    match format {
        OutputFormat::Text => {
            let mut out = String::new();
            for f in families {
                let o = &f.omnibus;
                let line = format!(
                    "{} / {}  H = {:.3}  df = {}  p = {} {}",
                    f.attribute,
                    f.criterion,
                    o.h,
                    o.df,
                    format_p(o.p),
                    thresholds.stars(o.p)
                );
                let _ = writeln!(out, "{}", line.trim_end());
                match &f.posthoc {
                    None => out.push_str("    no posthoc test (omnibus not significant)\n"),
                    Some(_) => {
                        let rows: Vec<Vec<String>> = sorted_posthoc(f)
                            .into_iter()
                            .map(|r| {
                                vec![
                                    label_of(&lookup, &r.hi),
                                    "vs".into(),
                                    label_of(&lookup, &r.lo),
                                    format!("t = {:.3}", r.t_stat),
                                    format!("p = {}", format_p(r.p_adj)),
                                    thresholds.stars(r.p_adj).to_string(),
                                ]
                            })
                            .collect();
                        let mut widths = [0usize; 6];
                        for row in &rows {
                            for (i, c) in row.iter().enumerate() {
                                widths[i] = widths[i].max(UnicodeWidthStr::width(c.as_str()));
                            }
                        }
                        for row in &rows {
                            let cells: Vec<String> = row
                                .iter()
                                .enumerate()
                                .map(|(i, c)| pad(c, widths[i]))
                                .collect();
                            let _ = writeln!(out, "    {}", cells.join("  ").trim_end());
                        }
                    }
                }
                out.push('\n');
            }
            out
        }
        OutputFormat::Csv => {
            let mut rows = vec![[
                "row",
                "attribute",
                "criterion",
                "H",
                "df",
                "p",
                "cand_hi",
                "cand_lo",
                "t",
                "p_raw",
                "p_adj",
                "p_display",
                "stars",
            ]
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()];
            for f in families {
                let o = &f.omnibus;
                rows.push(vec![
                    "omnibus".into(),
                    f.attribute.to_string(),
                    f.criterion.to_string(),
                    o.h.to_string(),
                    o.df.to_string(),
                    o.p.to_string(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    format_p(o.p),
                    thresholds.stars(o.p).into(),
                ]);
                for r in sorted_posthoc(f) {
                    rows.push(vec![
                        "posthoc".into(),
                        f.attribute.to_string(),
                        f.criterion.to_string(),
                        String::new(),
                        String::new(),
                        String::new(),
                        r.hi.clone(),
                        r.lo.clone(),
                        r.t_stat.to_string(),
                        r.p_raw.to_string(),
                        r.p_adj.to_string(),
                        format_p(r.p_adj),
                        thresholds.stars(r.p_adj).into(),
                    ]);
                }
            }
            csv_string(rows)
        }
        OutputFormat::Json => {
            let fams: Vec<FamilyJson<'_>> = families
                .iter()
                .map(|f| FamilyJson {
                    attribute: f.attribute,
                    criterion: f.criterion,
                    h: f.omnibus.h,
                    df: f.omnibus.df,
                    p: f.omnibus.p,
                    p_display: format_p(f.omnibus.p),
                    stars: thresholds.stars(f.omnibus.p),
                    posthoc_performed: f.posthoc.is_some(),
                    posthoc: sorted_posthoc(f)
                        .into_iter()
                        .map(|r| PosthocJson {
                            cand_hi: &r.hi,
                            cand_lo: &r.lo,
                            t: r.t_stat,
                            p_raw: r.p_raw,
                            p_adj: r.p_adj,
                            p_display: format_p(r.p_adj),
                            stars: thresholds.stars(r.p_adj),
                        })
                        .collect(),
                })
                .collect();
            json_string(&fams)
        }
    }
}

/// `attribute,criterion,H,df,p`
pub fn omnibus_csv(families: &[TestFamily]) -> String {
    let mut rows = vec![vec![
        "attribute".into(),
        "criterion".into(),
        "H".into(),
        "df".into(),
        "p".into(),
    ]];
    for f in families {
        rows.push(vec![
            f.attribute.to_string(),
            f.criterion.to_string(),
            f.omnibus.h.to_string(),
            f.omnibus.df.to_string(),
            f.omnibus.p.to_string(),
        ]);
    }
    csv_string(rows)
}

/// `attribute,criterion,cand_hi,cand_lo,t,p_raw,p_adj`
pub fn posthoc_csv(families: &[TestFamily]) -> String {
    let mut rows: Vec<Vec<String>> = vec![[
        "attribute",
        "criterion",
        "cand_hi",
        "cand_lo",
        "t",
        "p_raw",
        "p_adj",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()];
    for f in families {
        for r in sorted_posthoc(f) {
            rows.push(vec![
                f.attribute.to_string(),
                f.criterion.to_string(),
                r.hi.clone(),
                r.lo.clone(),
                r.t_stat.to_string(),
                r.p_raw.to_string(),
                r.p_adj.to_string(),
            ]);
        }
    }
    csv_string(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ItemDistribution {
    pub item_id: String,
    pub kind: ItemKind,
    pub candidate_id: String,
    pub attribute: Attribute,
    pub bins: [usize; SCALE_MAX as usize + 1],
    pub n: usize,
    pub mean_normalized: f64,
}

/// Per-item rating histograms for every item that received a response.
pub fn distributions(
    records: &[ResponseRecord],
    items: &[QuestionnaireItem],
) -> Vec<ItemDistribution> {
    let mut bins: HashMap<&str, [usize; SCALE_MAX as usize + 1]> = HashMap::new();
    for r in records {
        if let Some(slot) = bins
            .entry(&r.item_id)
            .or_default()
            .get_mut(r.raw_rating as usize)
        {
            *slot += 1;
        }
    }
    items
        .iter()
        .filter_map(|it| {
            let b = bins.get(it.item_id.as_str())?;
            let n: usize = b.iter().sum();
            let total: usize = b.iter().enumerate().map(|(r, c)| r * c).sum();
            Some(ItemDistribution {
                item_id: it.item_id.clone(),
                kind: it.kind,
                candidate_id: it.candidate.id.clone(),
                attribute: it.source_attribute,
                bins: *b,
                n,
                mean_normalized: total as f64 / (n as f64 * f64::from(SCALE_MAX)),
            })
        })
        .collect()
}

/// CSV of [`distributions`]; empty when there are no records.
pub fn distribution_summary(records: &[ResponseRecord], items: &[QuestionnaireItem]) -> String {
    let dists = distributions(records, items);
    if dists.is_empty() {
        return String::new();
    }
    let mut header: Vec<String> = ["item_id", "kind", "candidate_id", "attribute", "n"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend((0..=SCALE_MAX).map(|r| format!("r{r}")));
    header.push("mean_normalized".into());
    let mut rows = vec![header];
    for d in dists {
        let mut row = vec![
            d.item_id,
            d.kind.to_string(),
            d.candidate_id,
            d.attribute.to_string(),
            d.n.to_string(),
        ];
        row.extend(d.bins.iter().map(|c| c.to_string()));
        row.push(format!("{:.6}", d.mean_normalized));
        rows.push(row);
    }
    csv_string(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionNote {
    pub criterion: Criterion,
    pub marker: Marker,
    /// 1-based rank of the candidate's score within the criterion.
    pub rank: usize,
    pub rationale: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecommendationEntry {
    pub candidate_id: String,
    pub label: String,
    /// 1-based; tied candidates share a rank.
    pub rank: usize,
    pub tied: bool,
    pub top_criteria: usize,
    pub worst_criteria: usize,
    pub mean_score: f64,
    pub strengths: Vec<CriterionNote>,
    pub weaknesses: Vec<CriterionNote>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecommendationReport {
    pub attribute: Attribute,
    pub disclaimer: String,
    pub policy: String,
    pub no_significant_differences: bool,
    pub entries: Vec<RecommendationEntry>,
}

const DISCLAIMER: &str =
    "Decision support only, not a verdict: review the per-criterion notes before choosing.";
const POLICY: &str = "Candidates are ordered by (1) the number of criteria where they have the top score and at least \
one significant pairwise win, (2) fewest criteria where they have the lowest score and at least one significant \
pairwise loss, (3) mean score over applicable criteria; remaining ties keep input order.";

/// Ranks the candidates of one attribute with the transparent default policy.
pub fn recommend(
    attribute: Attribute,
    candidates: &[CandidateTranslation],
    marked: &[MarkedScore],
    families: &[TestFamily],
    thresholds: &Thresholds,
) -> RecommendationReport {
    let cands: Vec<&CandidateTranslation> = candidates
        .iter()
        .filter(|c| c.attribute == attribute)
        .collect();
    let lookup = candidate_lookup(candidates);
    let index = family_index(families);
    let scores: HashMap<(&str, Criterion), &MarkedScore> = marked
        .iter()
        .filter(|m| m.attribute == attribute)
        .map(|m| ((m.candidate_id.as_str(), m.criterion), m))
        .collect();

    let any_posthoc = Criterion::applicable(attribute).iter().any(|c| {
        index
            .get(&(attribute, *c))
            .is_some_and(|f| f.posthoc.is_some())
    });

    let mut entries: Vec<RecommendationEntry> = cands
        .iter()
        .map(|cand| {
            let mut top = 0;
            let mut worst = 0;
            let mut strengths = Vec::new();
            let mut weaknesses = Vec::new();
            let mut total = 0.0;
            let mut counted = 0usize;
            for &crit in Criterion::applicable(attribute) {
                let Some(me) = scores.get(&(cand.id.as_str(), crit)) else {
                    continue;
                };
                total += me.score;
                counted += 1;
                let peers: Vec<f64> = cands
                    .iter()
                    .filter_map(|c| scores.get(&(c.id.as_str(), crit)).map(|m| m.score))
                    .collect();
                let rank = 1 + peers.iter().filter(|&&s| s > me.score).count();
                let is_top = peers.iter().all(|&s| s <= me.score);
                let is_bottom = peers.iter().all(|&s| s >= me.score);
                let Some(family) = index
                    .get(&(attribute, crit))
                    .filter(|f| f.posthoc.is_some())
                else {
                    continue;
                };
                let wl = family.record(&cand.id, thresholds);
                let wins = wl.strong_wins + wl.weak_wins;
                let others = family.candidates.len().saturating_sub(1);
                if wins > 0 {
                    if is_top {
                        top += 1;
                    }
                    let rationale = if wins == others {
                        format!("{crit}: significantly better than all")
                    } else {
                        format!("{crit}: significantly better than {wins} of {others}")
                    };
                    strengths.push(CriterionNote {
                        criterion: crit,
                        marker: me.marker,
                        rank,
                        rationale,
                    });
                }
                if !wl.losses.is_empty() {
                    if is_bottom {
                        worst += 1;
                    }
                    let names: Vec<String> =
                        wl.losses.iter().map(|id| label_of(&lookup, id)).collect();
                    weaknesses.push(CriterionNote {
                        criterion: crit,
                        marker: me.marker,
                        rank,
                        rationale: format!("{crit}: significantly worse than {}", names.join(", ")),
                    });
                }
            }
            RecommendationEntry {
                candidate_id: cand.id.clone(),
                label: cand.label(),
                rank: 0,
                tied: false,
                top_criteria: top,
                worst_criteria: worst,
                mean_score: if counted == 0 {
                    0.0
                } else {
                    total / counted as f64
                },
                strengths,
                weaknesses,
            }
        })
        .collect();

    let key = |e: &RecommendationEntry| (e.top_criteria, std::cmp::Reverse(e.worst_criteria));
    entries.sort_by(|a, b| {
        key(b)
            .cmp(&key(a))
            .then(b.mean_score.total_cmp(&a.mean_score))
    });
    let same = |a: &RecommendationEntry, b: &RecommendationEntry| {
        key(a) == key(b) && a.mean_score == b.mean_score
    };
    for i in 0..entries.len() {
        entries[i].rank = if i > 0 && same(&entries[i - 1], &entries[i]) {
            entries[i - 1].rank
        } else {
            i + 1
        };
    }
    for i in 0..entries.len() {
        let tied = (i > 0 && entries[i - 1].rank == entries[i].rank)
            || (i + 1 < entries.len() && entries[i + 1].rank == entries[i].rank);
        entries[i].tied = tied;
    }

    RecommendationReport {
        attribute,
        disclaimer: DISCLAIMER.into(),
        policy: POLICY.into(),
        no_significant_differences: !any_posthoc,
        entries,
    }
}

/// Renders a set of recommendation reports.
pub fn emit_recommendations(reports: &[RecommendationReport], format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => json_string(&reports),
        OutputFormat::Csv => {
            let mut rows: Vec<Vec<String>> = vec![[
                "attribute",
                "rank",
                "tied",
                "candidate_id",
                "label",
                "top_criteria",
                "worst_criteria",
                "mean_score",
                "strengths",
                "weaknesses",
                "no_significant_differences",
            ]
            .iter()
            .map(|s| s.to_string())
            .collect()];
            for rep in reports {
                for e in &rep.entries {
                    let join = |notes: &[CriterionNote]| {
                        notes
                            .iter()
                            .map(|n| n.rationale.as_str())
                            .collect::<Vec<_>>()
                            .join("; ")
                    };
                    rows.push(vec![
                        rep.attribute.to_string(),
                        e.rank.to_string(),
                        e.tied.to_string(),
                        e.candidate_id.clone(),
                        e.label.clone(),
                        e.top_criteria.to_string(),
                        e.worst_criteria.to_string(),
                        format_score(e.mean_score),
                        join(&e.strengths),
                        join(&e.weaknesses),
                        rep.no_significant_differences.to_string(),
                    ]);
                }
            }
            csv_string(rows)
        }
        OutputFormat::Text => {
            let mut out = String::new();
            if let Some(first) = reports.first() {
                let _ = writeln!(out, "{}\n{}\n", first.disclaimer, first.policy);
            }
            for rep in reports {
                let _ = writeln!(out, "{}", rep.attribute);
                if rep.no_significant_differences {
                    out.push_str("  no significant differences; ordered by mean score\n");
                }
                for e in &rep.entries {
                    let _ = writeln!(
                        out,
                        "  {}{}. {}  (top in {}, worst in {}, mean {})",
                        e.rank,
                        if e.tied { "=" } else { "" },
                        e.label,
                        e.top_criteria,
                        e.worst_criteria,
                        format_score(e.mean_score)
                    );
                    for n in &e.strengths {
                        let _ = writeln!(out, "      + {}", n.rationale);
                    }
                    for n in &e.weaknesses {
                        let _ = writeln!(out, "      - {}", n.rationale);
                    }
                }
                out.push('\n');
            }
            out
        }
    }
}

/// Mean summary score per candidate within a family, used to orient pairs.
pub fn family_means(
    summaries: &[ScoreSummary],
    criterion: Criterion,
    candidate_ids: &[String],
) -> Vec<f64> {
    let by: BTreeMap<&str, f64> = summaries
        .iter()
        .filter(|s| s.criterion == criterion)
        .map(|s| (s.candidate_id.as_str(), s.score))
        .collect();
    candidate_ids
        .iter()
        .map(|id| by.get(id.as_str()).copied().unwrap_or(f64::NAN))
        .collect()
}
