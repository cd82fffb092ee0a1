//! Rank-based omnibus and pairwise testing.

mod conover;
mod kruskal;
mod rank;
pub mod special;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use conover::{bonferroni, conover_iman, conover_iman_oriented, PosthocResult};
pub use kruskal::{kruskal_wallis, OmnibusResult};
pub use rank::{rank_with_ties, Ranking};
pub use special::{chi_square_sf, student_t_sf};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("input contains a non-finite value")]
    NonFiniteInput,
    #[error("at least two groups are required, got {0}")]
    TooFewGroups(usize),
    #[error("group `{0}` is empty")]
    EmptyGroup(String),
    #[error("invalid degrees of freedom {0}")]
    InvalidDf(f64),
    #[error("{0}")]
    InvalidArgument(String),
    #[error("{0} did not converge")]
    NoConvergence(&'static str),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Group {
    pub label: String,
    pub values: Vec<f64>,
}

/// Observations split into labelled groups; at least two, none empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupedSample {
    groups: Vec<Group>,
}

impl GroupedSample {
    pub fn new<L, I>(groups: I) -> Result<Self, StatsError>
    where
        L: Into<String>,
        I: IntoIterator<Item = (L, Vec<f64>)>,
    {
        let groups: Vec<Group> = groups
            .into_iter()
            .map(|(label, values)| Group {
                label: label.into(),
                values,
            })
            .collect();
        if groups.len() < 2 {
            return Err(StatsError::TooFewGroups(groups.len()));
        }
        for g in &groups {
            if g.values.is_empty() {
                return Err(StatsError::EmptyGroup(g.label.clone()));
            }
            if g.values.iter().any(|v| !v.is_finite()) {
                return Err(StatsError::NonFiniteInput);
            }
        }
        Ok(Self { groups })
    }

    /// Unlabelled convenience constructor; groups are named `g0`, `g1`, ….
    pub fn from_values(groups: Vec<Vec<f64>>) -> Result<Self, StatsError> {
        Self::new(
            groups
                .into_iter()
                .enumerate()
                .map(|(i, v)| (format!("g{i}"), v)),
        )
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    pub fn k(&self) -> usize {
        self.groups.len()
    }

    pub fn total(&self) -> usize {
        self.groups.iter().map(|g| g.values.len()).sum()
    }

    pub fn pooled(&self) -> Vec<f64> {
        self.groups
            .iter()
            .flat_map(|g| g.values.iter().copied())
            .collect()
    }

    pub fn means(&self) -> Vec<f64> {
        self.groups
            .iter()
            .map(|g| g.values.iter().sum::<f64>() / g.values.len() as f64)
            .collect()
    }

    /// Pooled ranks split back per group, plus the pooled ranking.
    fn ranked(&self) -> (Vec<Vec<f64>>, Ranking) {
        let ranking = rank_with_ties(&self.pooled()).expect("validated on construction");
        let mut out = Vec::with_capacity(self.k());
        let mut offset = 0;
        for g in &self.groups {
            out.push(ranking.ranks[offset..offset + g.values.len()].to_vec());
            offset += g.values.len();
        }
        (out, ranking)
    }
}
