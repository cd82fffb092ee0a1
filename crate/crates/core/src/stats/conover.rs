use serde::{Deserialize, Serialize};

use super::kruskal::OmnibusResult;
use super::special::student_t_sf;
use super::{GroupedSample, StatsError};

/// One pairwise comparison. `hi` is the group with the higher mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosthocResult {
    pub hi: String,
    pub lo: String,
    pub hi_index: usize,
    pub lo_index: usize,
    /// Positive when `hi` also has the higher mean rank.
    pub t_stat: f64,
    pub p_raw: f64,
    pub p_adj: f64,
    pub reject_1pct: bool,
    pub reject_5pct: bool,
}

impl PosthocResult {
    pub fn involves(&self, index: usize) -> bool {
        self.hi_index == index || self.lo_index == index
    }
}

/// Bonferroni adjustment for `m` comparisons.
pub fn bonferroni(p_raw: f64, m: usize) -> f64 {
    (p_raw * m as f64).min(1.0)
}

/// Conover–Iman pairwise comparisons on pooled mid-ranks with a two-sided
/// Student-t reference on `N - k` degrees of freedom and Bonferroni
/// adjustment over all `k(k-1)/2` pairs. Pairs are oriented by the arithmetic
/// group means.
///
/// Degenerate inputs (no rank variance, or `N ≤ k`) yield `t = 0` and `p = 1`
/// for every pair.
pub fn conover_iman(
    sample: &GroupedSample,
    omnibus: &OmnibusResult,
) -> Result<Vec<PosthocResult>, StatsError> {
    conover_iman_oriented(sample, omnibus, &sample.means())
}

/// As [`conover_iman`] but pairs are oriented by the supplied per-group means
/// (e.g. weighted score means). Equal means keep group order.
pub fn conover_iman_oriented(
    sample: &GroupedSample,
    omnibus: &OmnibusResult,
    means: &[f64],
) -> Result<Vec<PosthocResult>, StatsError> {
    let k = sample.k();
    if means.len() != k {
        return Err(StatsError::InvalidArgument(format!(
            "expected {k} group means, got {}",
            means.len()
        )));
    }
    let n_total = sample.total();
    let n = n_total as f64;
    let m = k * (k - 1) / 2;
    let (group_ranks, ranking) = sample.ranked();

    let sum_sq: f64 = ranking.ranks.iter().map(|r| r * r).sum();
    let s2 = (sum_sq - n * (n + 1.0) * (n + 1.0) / 4.0) / (n - 1.0);
    let degenerate = n_total <= k || s2 <= 1e-12 * n * n;
    // H can reach N - 1 (complete separation); treat round-off near it as exact.
    let residual = n - 1.0 - omnibus.h;
    let shrink = if degenerate || residual < 1e-9 * n {
        0.0
    } else {
        residual / (n - k as f64)
    };
    let df = (n_total.saturating_sub(k)) as f64;

    let mean_ranks: Vec<f64> = group_ranks
        .iter()
        .map(|r| r.iter().sum::<f64>() / r.len() as f64)
        .collect();

    let mut out = Vec::with_capacity(m);
    for i in 0..k {
        for j in (i + 1)..k {
            let (hi, lo) = if means[j] > means[i] { (j, i) } else { (i, j) };
            let (t_stat, p_raw) = if degenerate {
                (0.0, 1.0)
            } else {
                let ni = group_ranks[hi].len() as f64;
                let nj = group_ranks[lo].len() as f64;
                let se = (s2 * shrink * (1.0 / ni + 1.0 / nj)).sqrt();
                let diff = mean_ranks[hi] - mean_ranks[lo];
                if diff == 0.0 {
                    (0.0, 1.0)
                } else if se == 0.0 {
                    (diff.signum() * f64::INFINITY, 0.0)
                } else {
                    let t = diff / se;
                    (t, (2.0 * student_t_sf(t.abs(), df)?).min(1.0))
                }
            };
            let p_adj = bonferroni(p_raw, m);
            let groups = sample.groups();
            out.push(PosthocResult {
                hi: groups[hi].label.clone(),
                lo: groups[lo].label.clone(),
                hi_index: hi,
                lo_index: lo,
                t_stat,
                p_raw,
                p_adj,
                reject_1pct: p_adj < 0.01,
                reject_5pct: p_adj < 0.05,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::kruskal_wallis;

    fn run(groups: Vec<Vec<f64>>) -> Vec<PosthocResult> {
        let s = GroupedSample::from_values(groups).unwrap();
        let kw = kruskal_wallis(&s).unwrap();
        conover_iman(&s, &kw).unwrap()
    }

    #[test]
    fn separated_groups_match_reference() {
        // Reference p-values from scikit-posthocs `posthoc_conover`.
        let res = run(vec![
            vec![1.0, 2.0, 3.0],
            vec![4.0, 5.0, 6.0],
            vec![7.0, 8.0, 9.0],
        ]);
        assert_eq!(res.len(), 3);
        let find = |a: usize, b: usize| {
            res.iter()
                .find(|r| r.hi_index == a && r.lo_index == b)
                .unwrap()
        };
        assert!((find(1, 0).p_raw - 0.010_401_720_935_463_942).abs() < 1e-10);
        assert!((find(2, 0).p_raw - 0.000_324_974_679_271_080_26).abs() < 1e-10);
        assert!((find(2, 1).p_adj - 0.031_205_162_806_391_826).abs() < 1e-10);
        assert!(res.iter().all(|r| r.p_adj < 0.05 && r.t_stat > 0.0));
        let smallest = res
            .iter()
            .min_by(|a, b| a.p_adj.total_cmp(&b.p_adj))
            .unwrap();
        assert_eq!((smallest.hi_index, smallest.lo_index), (2, 0));
    }

    #[test]
    fn tied_fixture_matches_reference() {
        let res = run(vec![
            vec![0.1, 0.2, 0.2, 0.5],
            vec![0.2, 0.5, 0.7, 0.7, 0.9],
            vec![0.9, 1.0, 1.0],
        ]);
        let find = |a: usize, b: usize| {
            res.iter()
                .find(|r| r.hi_index == a && r.lo_index == b)
                .unwrap()
        };
        assert!((find(1, 0).p_raw - 0.031_041_442_337_405).abs() < 1e-10);
        assert!((find(2, 0).p_raw - 0.000_765_711_246_374_060_9).abs() < 1e-10);
        assert!((find(2, 1).p_raw - 0.018_877_434_065_433_567).abs() < 1e-10);
        assert!((find(2, 1).p_adj - 0.056_632_302_196_300_7).abs() < 1e-10);
    }

    #[test]
    fn two_groups_have_one_unadjusted_pair() {
        let res = run(vec![vec![1.0, 2.0, 4.0], vec![3.0, 5.0, 6.0]]);
        assert_eq!(res.len(), 1);
        assert_eq!(res[0].p_adj, res[0].p_raw);
        assert_eq!(res[0].hi, "g1");
    }

    #[test]
    fn identical_groups_in_a_significant_sample() {
        let res = run(vec![
            vec![1.0, 2.0, 3.0],
            vec![1.0, 2.0, 3.0],
            vec![7.0, 8.0, 9.0],
        ]);
        let same = res.iter().find(|r| !r.involves(2)).unwrap();
        assert_eq!(same.t_stat, 0.0);
        assert_eq!(same.p_raw, 1.0);
    }

    #[test]
    fn degenerate_inputs_report_unit_p() {
        let res = run(vec![vec![0.3, 0.3], vec![0.3], vec![0.3, 0.3]]);
        assert!(res.iter().all(|r| r.p_raw == 1.0 && r.p_adj == 1.0));
        // N = k leaves no error degrees of freedom.
        let res = run(vec![vec![1.0], vec![2.0]]);
        assert_eq!(res[0].p_adj, 1.0);
    }

    #[test]
    fn perfectly_separated_ties() {
        // H = N - 1, so the pooled error term vanishes.
        let res = run(vec![vec![1.0, 1.0], vec![2.0, 2.0]]);
        assert_eq!(res[0].p_raw, 0.0);
        assert!(res[0].t_stat.is_infinite());
    }

    #[test]
    fn orientation_follows_supplied_means() {
        let s = GroupedSample::from_values(vec![vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let kw = kruskal_wallis(&s).unwrap();
        let res = conover_iman_oriented(&s, &kw, &[0.9, 0.1]).unwrap();
        assert_eq!(res[0].hi_index, 0);
        assert!(res[0].t_stat < 0.0);
        assert!(conover_iman_oriented(&s, &kw, &[0.1]).is_err());
    }
}
