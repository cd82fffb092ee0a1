//! End-to-end analysis: ingest → score → test → mark → recommend, with every
//! artifact rendered in memory.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circumplex::{Attribute, AxisKind};
use crate::ingest::{
    completeness_report, parse_participants, parse_responses, participant_ids, CompletenessReport,
    DocumentError, DocumentFormat, IngestError, ParticipantProfile, ResponseRecord,
    DEFAULT_COMPLETENESS_THRESHOLD,
};
use crate::questionnaire::{
    generate_items, CandidateTranslation, QuestionnaireError, QuestionnaireItem,
};
use crate::report::{
    assign_markers, distribution_summary, emit_recommendations, emit_score_table, emit_test_table,
    family_means, omnibus_csv, posthoc_csv, recommend, Glyphs, Layout, MarkedScore, OutputFormat,
    RecommendationReport, ReportError, TestFamily, Thresholds,
};
use crate::scoring::{
    contributions, ilr_weights, summarize, Criterion, MissingDataPolicy, ScoreContribution,
    ScoreSummary, ScoringError,
};
use crate::stats::{conover_iman_oriented, kruskal_wallis, GroupedSample, StatsError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub alpha_posthoc_gate: f64,
    pub alpha_strong: f64,
    pub weighted: bool,
    pub completeness_policy: MissingDataPolicy,
    pub shuffle_seed: Option<u64>,
    pub output_format: OutputFormat,
    pub ascii_markers: bool,
    pub completeness_threshold: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            alpha_posthoc_gate: 0.05,
            alpha_strong: 0.01,
            weighted: false,
            completeness_policy: MissingDataPolicy::CompleteCase,
            shuffle_seed: None,
            output_format: OutputFormat::Text,
            ascii_markers: false,
            completeness_threshold: DEFAULT_COMPLETENESS_THRESHOLD,
        }
    }
}

impl RunConfig {
    /// Requires `0 < alpha_strong ≤ alpha_posthoc_gate < 1`.
    pub fn validate(&self) -> Result<(), PipelineError> {
        let (s, g) = (self.alpha_strong, self.alpha_posthoc_gate);
        if !(s > 0.0 && s <= g && g < 1.0) {
            return Err(PipelineError::InvalidConfig(format!(
                "significance levels must satisfy 0 < alpha_strong ({s}) <= alpha_gate ({g}) < 1"
            )));
        }
        if !(0.0..=1.0).contains(&self.completeness_threshold) {
            return Err(PipelineError::InvalidConfig(format!(
                "completeness threshold {} outside [0, 1]",
                self.completeness_threshold
            )));
        }
        Ok(())
    }

    pub fn thresholds(&self) -> Thresholds {
        Thresholds {
            strong: self.alpha_strong,
            weak: self.alpha_posthoc_gate,
        }
    }

    pub fn glyphs(&self) -> Glyphs {
        if self.ascii_markers {
            Glyphs::Ascii
        } else {
            Glyphs::Unicode
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Io,
    Numerical,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Validation => 1,
            ErrorKind::Io => 2,
            ErrorKind::Numerical => 3,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            ErrorKind::Validation => "validation",
            ErrorKind::Io => "io",
            ErrorKind::Numerical => "numerical",
        }
    }
}

fn summarize_rows(errors: &[IngestError]) -> String {
    let first = errors.first().map(|e| e.to_string()).unwrap_or_default();
    if errors.len() > 1 {
        format!("{first} (and {} more)", errors.len() - 1)
    } else {
        first
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("candidates: {0}")]
    Questionnaire(#[from] QuestionnaireError),
    #[error("{input}: {source}")]
    Document {
        input: &'static str,
        source: DocumentError,
    },
    #[error("{input}: {} rejected row(s): {}", errors.len(), summarize_rows(errors))]
    RejectedRows {
        input: &'static str,
        errors: Vec<IngestError>,
    },
    #[error("missing input: {0}")]
    MissingInput(String),
    #[error("participant `{0}` has responses but no profile in the participants file")]
    UnknownParticipant(String),
    #[error("candidate `{candidate}` has no usable contributions for {criterion}")]
    EmptyFamilyGroup {
        candidate: String,
        criterion: Criterion,
    },
    #[error("scoring: {0}")]
    Scoring(#[from] ScoringError),
    #[error("statistics: {0}")]
    Stats(#[from] StatsError),
    #[error("report: {0}")]
    Report(#[from] ReportError),
}

impl PipelineError {
    pub fn kind(&self) -> ErrorKind {
        match self {
            PipelineError::Stats(_) | PipelineError::Report(_) => ErrorKind::Numerical,
            PipelineError::Scoring(ScoringError::OutOfRange(_)) => ErrorKind::Numerical,
            _ => ErrorKind::Validation,
        }
    }
}

/// A rendered output document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub file_name: String,
    pub contents: String,
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub config: RunConfig,
    pub candidates: Vec<CandidateTranslation>,
    pub items: Vec<QuestionnaireItem>,
    pub records: Vec<ResponseRecord>,
    pub profiles: Vec<ParticipantProfile>,
    pub completeness: CompletenessReport,
    pub contributions: Vec<ScoreContribution>,
    pub summaries: Vec<ScoreSummary>,
    pub families: Vec<TestFamily>,
    /// Attributes with fewer than two candidates; no tests run for them.
    pub untested: Vec<Attribute>,
    pub marked: Vec<MarkedScore>,
    pub recommendations: Vec<RecommendationReport>,
}

/// Attributes in order of first appearance among the candidates.
pub fn attribute_order(candidates: &[CandidateTranslation]) -> Vec<Attribute> {
    let mut out: Vec<Attribute> = Vec::new();
    for c in candidates {
        if !out.contains(&c.attribute) {
            out.push(c.attribute);
        }
    }
    out
}

/// Parses and cross-validates the inputs, then runs the complete analysis.
/// Any rejected input row fails the run.
pub fn analyze(
    candidates: &[CandidateTranslation],
    responses_doc: &str,
    participants_doc: Option<&str>,
    config: &RunConfig,
) -> Result<Analysis, PipelineError> {
    config.validate()?;
    let items = generate_items(candidates, "local")?;

    let (records, errors) =
        parse_responses(responses_doc, DocumentFormat::sniff(responses_doc), &items).map_err(
            |source| PipelineError::Document {
                input: "responses",
                source,
            },
        )?;
    if !errors.is_empty() {
        return Err(PipelineError::RejectedRows {
            input: "responses",
            errors,
        });
    }

    let profiles = match participants_doc {
        Some(doc) => {
            let (profiles, errors) =
                parse_participants(doc, DocumentFormat::sniff(doc)).map_err(|source| {
                    PipelineError::Document {
                        input: "participants",
                        source,
                    }
                })?;
            if !errors.is_empty() {
                return Err(PipelineError::RejectedRows {
                    input: "participants",
                    errors,
                });
            }
            let known: HashSet<&str> = profiles.iter().map(|p| p.participant_id.as_str()).collect();
            if let Some(r) = records
                .iter()
                .find(|r| !known.contains(r.participant_id.as_str()))
            {
                return Err(PipelineError::UnknownParticipant(r.participant_id.clone()));
            }
            profiles
        }
        None if config.weighted => {
            return Err(PipelineError::MissingInput(
                "participants file (required for weighted scoring)".into(),
            ))
        }
        None => Vec::new(),
    };

    let completeness = completeness_report(
        &records,
        &items,
        &participant_ids(&records, &profiles),
        config.completeness_threshold,
    );
    let contributions = contributions(&records, &items, config.completeness_policy)?;
    let weights = config.weighted.then(|| ilr_weights(&profiles));
    let summaries = summarize(&contributions, weights.as_ref())?;

    let mut families = Vec::new();
    let mut untested = Vec::new();
    for attribute in attribute_order(candidates) {
        let ids: Vec<String> = candidates
            .iter()
            .filter(|c| c.attribute == attribute)
            .map(|c| c.id.clone())
            .collect();
        if ids.len() < 2 {
            untested.push(attribute);
            continue;
        }
        for &criterion in Criterion::applicable(attribute) {
            families.push(test_family(
                attribute,
                criterion,
                &ids,
                &contributions,
                &summaries,
                config,
            )?);
        }
    }

    let thresholds = config.thresholds();
    let marked = assign_markers(&summaries, &families, &thresholds)?;
    let recommendations = attribute_order(candidates)
        .into_iter()
        .map(|a| recommend(a, candidates, &marked, &families, &thresholds))
        .collect();

    Ok(Analysis {
        config: config.clone(),
        candidates: candidates.to_vec(),
        items,
        records,
        profiles,
        completeness,
        contributions,
        summaries,
        families,
        untested,
        marked,
        recommendations,
    })
}

fn test_family(
    attribute: Attribute,
    criterion: Criterion,
    ids: &[String],
    contributions: &[ScoreContribution],
    summaries: &[ScoreSummary],
    config: &RunConfig,
) -> Result<TestFamily, PipelineError> {
    let groups: Vec<(String, Vec<f64>)> = ids
        .iter()
        .map(|id| {
            let values: Vec<f64> = contributions
                .iter()
                .filter(|c| c.criterion == criterion && &c.candidate_id == id)
                .map(|c| c.s)
                .collect();
            if values.is_empty() {
                Err(PipelineError::EmptyFamilyGroup {
                    candidate: id.clone(),
                    criterion,
                })
            } else {
                Ok((id.clone(), values))
            }
        })
        .collect::<Result<_, _>>()?;
    let sample = GroupedSample::new(groups)?;
    let omnibus = kruskal_wallis(&sample)?;
    let means = family_means(summaries, criterion, ids);
    let posthoc = if omnibus.significant_at(config.alpha_posthoc_gate) {
        Some(conover_iman_oriented(&sample, &omnibus, &means)?)
    } else {
        None
    };
    Ok(TestFamily {
        attribute,
        criterion,
        candidates: ids.to_vec(),
        means,
        omnibus,
        posthoc,
    })
}

fn csv_doc<I, R>(header: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory csv write");
    for row in rows {
        w.write_record(row).expect("in-memory csv write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

impl Analysis {
    /// Every output document in a fixed order. The four report artifacts
    /// (score tables, test table, distributions, recommendations) come first.
    pub fn artifacts(&self) -> Result<Vec<Artifact>, PipelineError> {
        let fmt = self.config.output_format;
        let ext = fmt.extension();
        let glyphs = self.config.glyphs();
        let mut out = Vec::new();
        for (layout, axis, name) in [
            (Layout::MainAxes, AxisKind::Main, "scores_main"),
            (Layout::DerivedAxes, AxisKind::Derived, "scores_derived"),
        ] {
            if self
                .candidates
                .iter()
                .any(|c| c.attribute.axis_kind() == axis)
            {
                out.push(Artifact {
                    file_name: format!("{name}.{ext}"),
                    contents: emit_score_table(
                        &self.marked,
                        &self.candidates,
                        layout,
                        fmt,
                        glyphs,
                    )?,
                });
            }
        }
        out.push(Artifact {
            file_name: format!("tests.{ext}"),
            contents: emit_test_table(
                &self.families,
                &self.candidates,
                &self.config.thresholds(),
                fmt,
            ),
        });
        out.push(Artifact {
            file_name: "distribution.csv".into(),
            contents: distribution_summary(&self.records, &self.items),
        });
        out.push(Artifact {
            file_name: format!("recommendations.{ext}"),
            contents: emit_recommendations(&self.recommendations, fmt),
        });
        out.push(Artifact {
            file_name: "omnibus.csv".into(),
            contents: omnibus_csv(&self.families),
        });
        out.push(Artifact {
            file_name: "posthoc.csv".into(),
            contents: posthoc_csv(&self.families),
        });
        out.push(Artifact {
            file_name: "summaries.csv".into(),
            contents: csv_doc(
                &[
                    "candidate_id",
                    "attribute",
                    "criterion",
                    "S",
                    "n",
                    "weighted",
                ],
                self.summaries.iter().map(|s| {
                    [
                        s.candidate_id.clone(),
                        s.attribute.to_string(),
                        s.criterion.to_string(),
                        s.score.to_string(),
                        s.n.to_string(),
                        s.weighted.to_string(),
                    ]
                }),
            ),
        });
        out.push(Artifact {
            file_name: "contributions.csv".into(),
            contents: csv_doc(
                &[
                    "participant_id",
                    "candidate_id",
                    "attribute",
                    "criterion",
                    "s",
                ],
                self.contributions.iter().map(|c| {
                    [
                        c.participant_id.clone(),
                        c.candidate_id.clone(),
                        c.attribute.to_string(),
                        c.criterion.to_string(),
                        c.s.to_string(),
                    ]
                }),
            ),
        });
        out.push(Artifact {
            file_name: "completeness.csv".into(),
            contents: csv_doc(
                &[
                    "participant_id",
                    "answered",
                    "total",
                    "coverage",
                    "below_threshold",
                ],
                self.completeness.participants.iter().map(|p| {
                    [
                        p.participant_id.clone(),
                        p.answered.to_string(),
                        p.total.to_string(),
                        p.coverage.to_string(),
                        p.below_threshold.to_string(),
                    ]
                }),
            ),
        });
        Ok(out)
    }

    /// One line per attribute for standard output.
    pub fn summary_lines(&self) -> Vec<String> {
        self.recommendations
            .iter()
            .map(|rep| {
                let n = rep.entries.len();
                if self.untested.contains(&rep.attribute) {
                    return format!("{}: {n} candidate, not tested", rep.attribute);
                }
                let fams: Vec<&TestFamily> = self
                    .families
                    .iter()
                    .filter(|f| f.attribute == rep.attribute)
                    .collect();
                let sig = fams.iter().filter(|f| f.posthoc.is_some()).count();
                let top = rep.entries.first().map(|e| e.label.as_str()).unwrap_or("-");
                let tied = if rep.entries.first().is_some_and(|e| e.tied) {
                    " (tied)"
                } else {
                    ""
                };
                format!(
                    "{}: {n} candidates, {sig}/{} criteria significant, suggested {top}{tied}",
                    rep.attribute,
                    fams.len()
                )
            })
            .collect()
    }

    pub fn flagged_participants(&self) -> Vec<&str> {
        self.completeness
            .flagged()
            .map(|p| p.participant_id.as_str())
            .collect()
    }
}
