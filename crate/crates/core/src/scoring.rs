//! Rating normalization, per-participant score contributions and aggregate
//! criterion scores.
//!
//! Every contribution `s` and every aggregate `S` lies in `[0, 1]`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circumplex::Attribute;
use crate::ingest::{ParticipantProfile, ResponseRecord};
use crate::questionnaire::{ItemKind, QuestionnaireItem, SCALE_MAX};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScoringError {
    #[error("value {0} outside the admissible range")]
    OutOfRange(f64),
    #[error("candidate `{candidate}` has no {kind} item")]
    MissingItemRating { candidate: String, kind: ItemKind },
    #[error("no contributions for candidate `{candidate}` on {criterion}")]
    EmptyGroup {
        candidate: String,
        criterion: Criterion,
    },
    #[error("all weights are zero for candidate `{candidate}` on {criterion}")]
    AllZeroWeights {
        candidate: String,
        criterion: Criterion,
    },
    #[error("no weight for participant `{0}`")]
    MissingWeight(String),
    #[error("weight for participant `{0}` is negative or not finite")]
    InvalidWeight(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[allow(clippy::upper_case_acronyms)]
pub enum Criterion {
    APPR,
    UNDR,
    CLAR,
    ANTO,
    ORTH,
    NCON,
    CONN,
    IBAL,
}

const MAIN_CRITERIA: [Criterion; 7] = [
    Criterion::APPR,
    Criterion::UNDR,
    Criterion::CLAR,
    Criterion::ANTO,
    Criterion::ORTH,
    Criterion::NCON,
    Criterion::IBAL,
];

const DERIVED_CRITERIA: [Criterion; 5] = [
    Criterion::APPR,
    Criterion::UNDR,
    Criterion::CLAR,
    Criterion::CONN,
    Criterion::IBAL,
];

impl Criterion {
    pub const ALL: [Criterion; 8] = [
        Criterion::APPR,
        Criterion::UNDR,
        Criterion::CLAR,
        Criterion::ANTO,
        Criterion::ORTH,
        Criterion::NCON,
        Criterion::CONN,
        Criterion::IBAL,
    ];

    /// Criteria scored for candidates of `attribute`, in table column order.
    pub fn applicable(attribute: Attribute) -> &'static [Criterion] {
        if attribute.is_main_axis() {
            &MAIN_CRITERIA
        } else {
            &DERIVED_CRITERIA
        }
    }

    /// Item kinds whose ratings feed this criterion.
    pub fn inputs(self) -> &'static [ItemKind] {
        match self {
            Criterion::APPR => &[ItemKind::APPR],
            Criterion::UNDR => &[ItemKind::UNDR],
            Criterion::CLAR => &[ItemKind::ASSO_CCW, ItemKind::ASSO_CW],
            Criterion::ANTO => &[ItemKind::ANTO],
            Criterion::ORTH => &[ItemKind::BIAS],
            Criterion::NCON | Criterion::CONN | Criterion::IBAL => {
                &[ItemKind::IMPL_CCW, ItemKind::IMPL_CW]
            }
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Criterion::APPR => "APPR",
            Criterion::UNDR => "UNDR",
            Criterion::CLAR => "CLAR",
            Criterion::ANTO => "ANTO",
            Criterion::ORTH => "ORTH",
            Criterion::NCON => "NCON",
            Criterion::CONN => "CONN",
            Criterion::IBAL => "IBAL",
        }
    }

    /// Contribution from the normalized ratings listed in [`Criterion::inputs`].
    pub fn score(self, r: &[f64]) -> Result<f64, ScoringError> {
        match self {
            Criterion::APPR | Criterion::UNDR | Criterion::ANTO => identity_score(r[0]),
            Criterion::CLAR => clar_score(r[0], r[1]),
            Criterion::ORTH => orth_score(r[0]),
            Criterion::NCON => ncon_score(r[0], r[1]),
            Criterion::CONN => conn_score(r[0], r[1]),
            Criterion::IBAL => ibal_score(r[0], r[1]),
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Criterion {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown criterion `{s}`"))
    }
}

fn unit(x: f64) -> Result<f64, ScoringError> {
    if (0.0..=1.0).contains(&x) {
        Ok(x)
    } else {
        Err(ScoringError::OutOfRange(x))
    }
}

/// Maps a raw 0–10 rating onto `[0, 1]`.
pub fn normalize(raw_rating: i64) -> Result<f64, ScoringError> {
    if !(0..=i64::from(SCALE_MAX)).contains(&raw_rating) {
        return Err(ScoringError::OutOfRange(raw_rating as f64));
    }
    Ok(raw_rating as f64 / f64::from(SCALE_MAX))
}

pub fn identity_score(r: f64) -> Result<f64, ScoringError> {
    unit(r)
}

/// Penalizes association with either adjacent attribute.
pub fn clar_score(r_asso_ccw: f64, r_asso_cw: f64) -> Result<f64, ScoringError> {
    Ok(1.0 - 0.5 * (unit(r_asso_ccw)? + unit(r_asso_cw)?))
}

/// Distance of the bias rating from the neutral midpoint, inverted.
pub fn orth_score(r_bias: f64) -> Result<f64, ScoringError> {
    Ok(1.0 - 2.0 * (unit(r_bias)? - 0.5).abs())
}

pub fn ncon_score(r_impl_ccw: f64, r_impl_cw: f64) -> Result<f64, ScoringError> {
    Ok(1.0 - conn_score(r_impl_ccw, r_impl_cw)?)
}

pub fn conn_score(r_impl_ccw: f64, r_impl_cw: f64) -> Result<f64, ScoringError> {
    Ok(0.5 * (unit(r_impl_ccw)? + unit(r_impl_cw)?))
}

pub fn ibal_score(r_impl_ccw: f64, r_impl_cw: f64) -> Result<f64, ScoringError> {
    Ok(1.0 - (unit(r_impl_ccw)? - unit(r_impl_cw)?).abs())
}

/// Which participants may contribute when some ratings are missing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingDataPolicy {
    /// A participant contributes to an attribute only when every item of
    /// every candidate of that attribute was answered.
    #[default]
    CompleteCase,
    /// A contribution is computed whenever the items it needs were answered.
    Pairwise,
}

impl FromStr for MissingDataPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "complete_case" => Ok(MissingDataPolicy::CompleteCase),
            "pairwise" => Ok(MissingDataPolicy::Pairwise),
            _ => Err(format!("unknown missing-data policy `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreContribution {
    pub participant_id: String,
    pub candidate_id: String,
    pub attribute: Attribute,
    pub criterion: Criterion,
    pub s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreSummary {
    pub candidate_id: String,
    pub attribute: Attribute,
    pub criterion: Criterion,
    #[serde(rename = "S")]
    pub score: f64,
    pub n: usize,
    pub weighted: bool,
}

struct CandidateItems<'a> {
    candidate_id: &'a str,
    attribute: Attribute,
    by_kind: HashMap<ItemKind, &'a str>,
}

fn candidate_items(items: &[QuestionnaireItem]) -> Result<Vec<CandidateItems<'_>>, ScoringError> {
    let mut out: Vec<CandidateItems<'_>> = Vec::new();
    for item in items {
        let idx = match out.iter().position(|c| c.candidate_id == item.candidate.id) {
            Some(i) => i,
            None => {
                out.push(CandidateItems {
                    candidate_id: &item.candidate.id,
                    attribute: item.source_attribute,
                    by_kind: HashMap::new(),
                });
                out.len() - 1
            }
        };
        out[idx].by_kind.insert(item.kind, &item.item_id);
    }
    for c in &out {
        for kind in ItemKind::for_attribute(c.attribute) {
            if !c.by_kind.contains_key(&kind) {
                return Err(ScoringError::MissingItemRating {
                    candidate: c.candidate_id.to_string(),
                    kind,
                });
            }
        }
    }
    Ok(out)
}

/// Computes one contribution per participant × candidate × applicable
/// criterion. Output is ordered by candidate (questionnaire order), then
/// criterion, then participant id.
pub fn contributions(
    records: &[ResponseRecord],
    items: &[QuestionnaireItem],
    policy: MissingDataPolicy,
) -> Result<Vec<ScoreContribution>, ScoringError> {
    let candidates = candidate_items(items)?;
    let mut ratings: HashMap<(&str, &str), f64> = HashMap::new();
    for r in records {
        ratings.insert(
            (&r.participant_id, &r.item_id),
            normalize(i64::from(r.raw_rating))?,
        );
    }
    let participants: BTreeSet<&str> = records.iter().map(|r| r.participant_id.as_str()).collect();

    // Complete-case eligibility per attribute.
    let mut eligible: HashMap<Attribute, BTreeSet<&str>> = HashMap::new();
    if policy == MissingDataPolicy::CompleteCase {
        for attr in Attribute::ALL {
            let attr_items: Vec<&str> = candidates
                .iter()
                .filter(|c| c.attribute == attr)
                .flat_map(|c| c.by_kind.values().copied())
                .collect();
            let ok = participants
                .iter()
                .copied()
                .filter(|p| attr_items.iter().all(|it| ratings.contains_key(&(*p, *it))))
                .collect();
            eligible.insert(attr, ok);
        }
    }

    let mut out = Vec::new();
    for cand in &candidates {
        for &criterion in Criterion::applicable(cand.attribute) {
            for &pid in &participants {
                if policy == MissingDataPolicy::CompleteCase
                    && !eligible[&cand.attribute].contains(pid)
                {
                    continue;
                }
                let inputs: Option<Vec<f64>> = criterion
                    .inputs()
                    .iter()
                    .map(|k| ratings.get(&(pid, cand.by_kind[k])).copied())
                    .collect();
                let Some(inputs) = inputs else { continue };
                out.push(ScoreContribution {
                    participant_id: pid.to_string(),
                    candidate_id: cand.candidate_id.to_string(),
                    attribute: cand.attribute,
                    criterion,
                    s: criterion.score(&inputs)?,
                });
            }
        }
    }
    Ok(out)
}

/// Proficiency weights `ilr_local + ilr_english` keyed by participant.
pub fn ilr_weights(profiles: &[ParticipantProfile]) -> BTreeMap<String, f64> {
    profiles
        .iter()
        .map(|p| (p.participant_id.clone(), p.ilr_weight()))
        .collect()
}

/// Aggregates contributions into one (optionally weighted) mean per
/// candidate × criterion, in order of first appearance.
pub fn summarize(
    contributions: &[ScoreContribution],
    weights: Option<&BTreeMap<String, f64>>,
) -> Result<Vec<ScoreSummary>, ScoringError> {
    let mut order: Vec<(&str, Criterion)> = Vec::new();
    let mut groups: HashMap<(&str, Criterion), Vec<&ScoreContribution>> = HashMap::new();
    for c in contributions {
        let key = (c.candidate_id.as_str(), c.criterion);
        groups
            .entry(key)
            .or_insert_with(|| {
                order.push(key);
                Vec::new()
            })
            .push(c);
    }

    order
        .into_iter()
        .map(|key| {
            let group = &groups[&key];
            let score = match weights {
                None => unweighted_mean(group),
                Some(w) => weighted_mean(group, w)?,
            };
            Ok(ScoreSummary {
                candidate_id: key.0.to_string(),
                attribute: group[0].attribute,
                criterion: key.1,
                score,
                n: group.len(),
                weighted: weights.is_some(),
            })
        })
        .collect()
}

fn unweighted_mean(group: &[&ScoreContribution]) -> f64 {
    group.iter().map(|c| c.s).sum::<f64>() / group.len() as f64
}

fn weighted_mean(
    group: &[&ScoreContribution],
    weights: &BTreeMap<String, f64>,
) -> Result<f64, ScoringError> {
    let w: Vec<f64> = group
        .iter()
        .map(|c| {
            let w = *weights
                .get(&c.participant_id)
                .ok_or_else(|| ScoringError::MissingWeight(c.participant_id.clone()))?;
            if !w.is_finite() || w < 0.0 {
                return Err(ScoringError::InvalidWeight(c.participant_id.clone()));
            }
            Ok(w)
        })
        .collect::<Result<_, _>>()?;
    let total: f64 = w.iter().sum();
    if total <= 0.0 {
        return Err(ScoringError::AllZeroWeights {
            candidate: group[0].candidate_id.clone(),
            criterion: group[0].criterion,
        });
    }
    // Uniform weights cancel exactly; take the unweighted path so the result
    // is bit-identical to it.
    if w.iter().all(|&x| x == w[0]) {
        return Ok(unweighted_mean(group));
    }
    Ok(group.iter().zip(&w).map(|(c, w)| w * c.s).sum::<f64>() / total)
}
