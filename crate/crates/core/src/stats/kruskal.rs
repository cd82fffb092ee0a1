use serde::{Deserialize, Serialize};

use super::special::chi_square_sf;
use super::{GroupedSample, StatsError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmnibusResult {
    /// Tie-corrected statistic.
    pub h: f64,
    pub df: u32,
    pub p: f64,
    pub significant_5pct: bool,
    /// `1 - Σ(t³ - t) / (N³ - N)`.
    pub tie_correction: f64,
    pub n_total: usize,
}

impl OmnibusResult {
    pub fn significant_at(&self, alpha: f64) -> bool {
        self.p < alpha
    }
}

/// Kruskal–Wallis H test with the standard tie correction. When every
/// observation is equal the correction vanishes and the result is `H = 0`,
/// `p = 1`.
pub fn kruskal_wallis(sample: &GroupedSample) -> Result<OmnibusResult, StatsError> {
    let n_total = sample.total();
    let k = sample.k();
    let df = (k - 1) as u32;
    let (group_ranks, ranking) = sample.ranked();
    let tie_correction = ranking.tie_correction();

    let n = n_total as f64;
    let (h, p) = if tie_correction <= 0.0 {
        (0.0, 1.0)
    } else {
        let between: f64 = group_ranks
            .iter()
            .map(|r| {
                let sum: f64 = r.iter().sum();
                sum * sum / r.len() as f64
            })
            .sum();
        let raw = 12.0 / (n * (n + 1.0)) * between - 3.0 * (n + 1.0);
        let h = (raw / tie_correction).max(0.0);
        (h, chi_square_sf(h, df)?)
    };
    Ok(OmnibusResult {
        h,
        df,
        p,
        significant_5pct: p < 0.05,
        tie_correction,
        n_total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separated_groups() {
        let s = GroupedSample::from_values(vec![
            vec![1.0, 2.0, 3.0],
            vec![4.0, 5.0, 6.0],
            vec![7.0, 8.0, 9.0],
        ])
        .unwrap();
        let r = kruskal_wallis(&s).unwrap();
        assert!((r.h - 7.2).abs() < 1e-12);
        assert_eq!(r.df, 2);
        assert!((r.p - (-3.6f64).exp()).abs() < 1e-12);
        assert!(r.significant_5pct);
        assert_eq!(r.tie_correction, 1.0);
    }

    #[test]
    fn identical_groups_give_zero() {
        let s = GroupedSample::from_values(vec![vec![1.0, 3.0, 2.0], vec![2.0, 1.0, 3.0]]).unwrap();
        let r = kruskal_wallis(&s).unwrap();
        assert!(r.h.abs() < 1e-12);
        assert!((r.p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn all_equal_observations() {
        let s = GroupedSample::from_values(vec![vec![0.5; 3], vec![0.5; 2], vec![0.5; 4]]).unwrap();
        let r = kruskal_wallis(&s).unwrap();
        assert_eq!(r.h, 0.0);
        assert_eq!(r.p, 1.0);
        assert_eq!(r.tie_correction, 0.0);
        assert!(!r.significant_5pct);
    }

    #[test]
    fn tied_fixture_matches_reference() {
        // Reference values from an independent implementation (scipy.stats.kruskal).
        let s = GroupedSample::from_values(vec![
            vec![0.1, 0.2, 0.2, 0.5],
            vec![0.2, 0.5, 0.7, 0.7, 0.9],
            vec![0.9, 1.0, 1.0],
        ])
        .unwrap();
        let r = kruskal_wallis(&s).unwrap();
        assert!((r.h - 8.067_655_875_299_765).abs() < 1e-9);
        assert!((r.p - 0.017_706_420_985_399_672).abs() < 1e-9);
    }
}
