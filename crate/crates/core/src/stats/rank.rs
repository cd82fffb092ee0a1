use super::StatsError;

/// Mid-ranks (1-based) in input order, and the size of every tie group.
#[derive(Debug, Clone, PartialEq)]
pub struct Ranking {
    pub ranks: Vec<f64>,
    pub tie_group_sizes: Vec<usize>,
}

impl Ranking {
    /// `1 - Σ(t³ - t) / (N³ - N)`; zero when every value is equal.
    pub fn tie_correction(&self) -> f64 {
        let n = self.ranks.len() as f64;
        if self.ranks.len() < 2 {
            return 1.0;
        }
        let ties: f64 = self
            .tie_group_sizes
            .iter()
            .map(|&t| {
                let t = t as f64;
                t * t * t - t
            })
            .sum();
        1.0 - ties / (n * n * n - n)
    }
}

pub fn rank_with_ties(values: &[f64]) -> Result<Ranking, StatsError> {
    if values.is_empty() {
        return Err(StatsError::InvalidArgument(
            "cannot rank an empty sample".into(),
        ));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::NonFiniteInput);
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));

    let mut ranks = vec![0.0; values.len()];
    let mut tie_group_sizes = Vec::new();
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // Positions start+1 ..= end share their average.
        let mid = (start + 1 + end) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = mid;
        }
        if end - start > 1 {
            tie_group_sizes.push(end - start);
        }
        start = end;
    }
    Ok(Ranking {
        ranks,
        tie_group_sizes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        let r = rank_with_ties(&[10.0, 20.0, 30.0]).unwrap();
        assert_eq!(r.ranks, vec![1.0, 2.0, 3.0]);
        assert!(r.tie_group_sizes.is_empty());
        assert_eq!(r.tie_correction(), 1.0);

        let r = rank_with_ties(&[5.0, 5.0, 7.0]).unwrap();
        assert_eq!(r.ranks, vec![1.5, 1.5, 3.0]);
        assert_eq!(r.tie_group_sizes, vec![2]);

        let r = rank_with_ties(&[4.0; 4]).unwrap();
        assert_eq!(r.ranks, vec![2.5; 4]);
        assert_eq!(r.tie_correction(), 0.0);

        let r = rank_with_ties(&[0.0, -0.0]).unwrap();
        assert_eq!(r.ranks, vec![1.5, 1.5]);

        assert!(rank_with_ties(&[]).is_err());
        assert!(matches!(
            rank_with_ties(&[1.0, f64::INFINITY]),
            Err(StatsError::NonFiniteInput)
        ));
    }

    proptest! {
        #[test]
        fn rank_sum_is_triangular(values in prop::collection::vec(0u8..6, 1..40)) {
            let v: Vec<f64> = values.iter().map(|&x| f64::from(x)).collect();
            let r = rank_with_ties(&v).unwrap();
            let n = v.len() as f64;
            let sum: f64 = r.ranks.iter().sum();
            prop_assert!((sum - n * (n + 1.0) / 2.0).abs() < 1e-9);
            // Mid-rank = #less + (#equal + 1) / 2.
            for (i, &x) in v.iter().enumerate() {
                let less = v.iter().filter(|&&y| y < x).count() as f64;
                let equal = v.iter().filter(|&&y| y == x).count() as f64;
                prop_assert_eq!(r.ranks[i], less + (equal + 1.0) / 2.0);
            }
        }
    }
}
