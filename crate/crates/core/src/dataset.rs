//! Bundled Thai candidate set (11 main-axis and 15 derived-axis candidates).

use crate::questionnaire::{parse_candidates, CandidateTranslation};

pub const THAI_CANDIDATES_CSV: &str = include_str!("../data/thai_candidates.csv");

pub fn thai_candidates() -> Vec<CandidateTranslation> {
    parse_candidates(THAI_CANDIDATES_CSV).expect("bundled candidate set is valid")
}
