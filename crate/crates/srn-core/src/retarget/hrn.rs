use crate::data::binning;
use crate::data::events::DenseId;

/// Exact-match similarity weights: `1` where the historical entity id equals
/// the target id, else `0`. Target and history share the same embedding
/// dictionary, so id equality is embedding equality.
pub fn hrn_similarity(target_id: DenseId, sequence_ids: &[DenseId]) -> Vec<f64> {
    sequence_ids
        .iter()
        .map(|&id| f64::from(u8::from(id == target_id)))
        .collect()
}

/// Sum/max pooling over a weight sequence plus the binned count feature.
#[derive(Debug, Clone, PartialEq)]
pub struct HrnAggregate {
    /// Historical click count of the target (sum pooling).
    pub n_s: f64,
    /// `binning(n_s, 1)` — the categorical feature fed to the CTR model.
    pub feature_id: i64,
    /// Max pooling; 1 means the target is a retargeted item.
    pub s_max: f64,
}

pub fn hrn_aggregate(weights: &[f64]) -> HrnAggregate {
    let n_s: f64 = weights.iter().sum();
    let s_max = weights.iter().fold(0.0_f64, |a, &b| a.max(b));
    HrnAggregate {
        n_s,
        feature_id: binning(n_s, 1.0),
        s_max,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nncore::init::seeded_rng;
    use rand::Rng;

    #[test]
    fn matches_and_misses() {
        assert_eq!(hrn_similarity(1, &[1, 2, 1]), vec![1.0, 0.0, 1.0]);
        assert_eq!(hrn_similarity(4, &[1, 2, 3]), vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn aggregate_examples() {
        let agg = hrn_aggregate(&[1.0, 0.0, 1.0]);
        assert_eq!(agg.n_s, 2.0);
        assert_eq!(agg.feature_id, 3);
        assert_eq!(agg.feature_id.to_string(), "3");
        assert_eq!(agg.s_max, 1.0);

        // The worked five-click case: N_S = 5.0 bins to "6".
        let agg = hrn_aggregate(&[1.0; 5]);
        assert_eq!(agg.n_s, 5.0);
        assert_eq!(agg.feature_id.to_string(), "6");
    }

    #[test]
    fn empty_sequence_conventions() {
        let agg = hrn_aggregate(&[]);
        assert_eq!(agg.n_s, 0.0);
        assert_eq!(agg.feature_id, 1);
        assert_eq!(agg.s_max, 0.0);
    }

    #[test]
    fn random_sequences_match_naive_oracle() {
        let mut rng = seeded_rng(55, &[]);
        for _ in 0..200 {
            let target: DenseId = rng.random_range(1..=20);
            let seq: Vec<DenseId> = (0..50).map(|_| rng.random_range(1..=20)).collect();
            let weights = hrn_similarity(target, &seq);
            // naive per-element comparison oracle
            let mut count = 0u32;
            let mut any = false;
            for (i, &id) in seq.iter().enumerate() {
                let expect = if id == target { 1.0 } else { 0.0 };
                assert_eq!(weights[i], expect);
                if id == target {
                    count += 1;
                    any = true;
                }
            }
            let agg = hrn_aggregate(&weights);
            assert_eq!(agg.n_s, f64::from(count));
            assert_eq!(agg.feature_id, i64::from(count) + 1);
            assert_eq!(agg.s_max, if any { 1.0 } else { 0.0 });
        }
    }
}
