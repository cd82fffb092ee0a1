//! Seeded synthetic responses and profiles for demos and tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ingest::{ParticipantProfile, ResponseRecord, YearsAbroad};
use crate::questionnaire::{QuestionnaireItem, SCALE_MAX};

/// `P01`, `P02`, … zero-padded to the width of `n`.
pub fn participant_ids(n: usize) -> Vec<String> {
    let width = n.to_string().len().max(2);
    (1..=n).map(|i| format!("P{i:0width$}")).collect()
}

/// One record per participant × item for which `rating` returns a value.
pub fn responses_with<F>(
    items: &[QuestionnaireItem],
    participants: &[String],
    mut rating: F,
) -> Vec<ResponseRecord>
where
    F: FnMut(usize, &QuestionnaireItem) -> Option<u8>,
{
    let mut out = Vec::with_capacity(items.len() * participants.len());
    for (p, pid) in participants.iter().enumerate() {
        for item in items {
            if let Some(r) = rating(p, item) {
                out.push(ResponseRecord {
                    participant_id: pid.clone(),
                    item_id: item.item_id.clone(),
                    raw_rating: r.min(SCALE_MAX),
                });
            }
        }
    }
    out
}

/// Complete random responses: each item gets a seeded latent mean and every
/// rating scatters around it.
pub fn random_responses(
    items: &[QuestionnaireItem],
    n_participants: usize,
    seed: u64,
) -> Vec<ResponseRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centres: Vec<f64> = items.iter().map(|_| rng.random_range(0.1..0.9)).collect();
    let ids = participant_ids(n_participants);
    let index: std::collections::HashMap<&str, usize> = items
        .iter()
        .enumerate()
        .map(|(i, it)| (it.item_id.as_str(), i))
        .collect();
    responses_with(items, &ids, |_, item| {
        // Sum of three uniforms: bell-shaped noise with sd 0.15.
        let noise: f64 = (0..3).map(|_| rng.random_range(-0.15..0.15)).sum();
        let x = (centres[index[item.item_id.as_str()]] + noise).clamp(0.0, 1.0);
        Some((x * f64::from(SCALE_MAX)).round() as u8)
    })
}

/// Profiles with identical ILR ratings for every participant.
pub fn uniform_profiles(
    participants: &[String],
    ilr_local: u8,
    ilr_english: u8,
) -> Vec<ParticipantProfile> {
    participants
        .iter()
        .map(|pid| ParticipantProfile {
            participant_id: pid.clone(),
            ilr_local,
            ilr_english,
            years_abroad_bucket: YearsAbroad::Unknown,
        })
        .collect()
}

pub fn random_profiles(participants: &[String], seed: u64) -> Vec<ParticipantProfile> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let buckets = [
        YearsAbroad::LessThanOne,
        YearsAbroad::OneToFive,
        YearsAbroad::SixToTen,
        YearsAbroad::MoreThanTen,
    ];
    participants
        .iter()
        .map(|pid| ParticipantProfile {
            participant_id: pid.clone(),
            ilr_local: rng.random_range(3..=5),
            ilr_english: rng.random_range(2..=5),
            years_abroad_bucket: buckets[rng.random_range(0..buckets.len())],
        })
        .collect()
}
