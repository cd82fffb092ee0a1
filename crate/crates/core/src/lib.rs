//! Evaluation toolkit for translated soundscape attributes.

pub mod circumplex;
pub mod dataset;
pub mod ingest;
pub mod pipeline;
pub mod questionnaire;
pub mod report;
pub mod scoring;
pub mod stats;
pub mod synthetic;
