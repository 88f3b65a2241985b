use serde::{Deserialize, Serialize};

use crate::error::{Result, SrnError};
use crate::nncore::loss::log_loss;

/// Rank-sum AUC in O(n log n): the probability that a uniformly random
/// positive outscores a uniformly random negative, ties counted 0.5.
/// Single-class input is an error, not 0.5.
pub fn auc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    assert_eq!(scores.len(), labels.len());
    let positives = labels.iter().filter(|&&y| y == 1).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(SrnError::SingleClass {
            positives,
            negatives,
        });
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).expect("finite scores"));

    // Average ranks over tie groups (1-based ranks).
    let mut rank_sum_pos = 0.0_f64;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let avg_rank = (i + j + 2) as f64 / 2.0; // mean of ranks i+1..=j+1
        for &idx in &order[i..=j] {
            if labels[idx] == 1 {
                rank_sum_pos += avg_rank;
            }
        }
        i = j + 1;
    }

    let p = positives as f64;
    let n = negatives as f64;
    Ok((rank_sum_pos - p * (p + 1.0) / 2.0) / (p * n))
}

/// Mean per-sample log-loss.
pub fn log_loss_mean(scores: &[f64], labels: &[u8]) -> f64 {
    assert_eq!(scores.len(), labels.len());
    if scores.is_empty() {
        return 0.0;
    }
    let total: f64 = scores
        .iter()
        .zip(labels)
        .map(|(&p, &y)| log_loss(p, y))
        .sum();
    total / scores.len() as f64
}

/// Fraction of samples whose `s_max` exceeds the threshold.
pub fn retargeting_ratio(s_max_values: &[f64], threshold: f64) -> f64 {
    if s_max_values.is_empty() {
        return 0.0;
    }
    let hits = s_max_values.iter().filter(|&&s| s > threshold).count();
    hits as f64 / s_max_values.len() as f64
}

/// Per-stratum AUC result: a value, or a marker explaining why the stratum
/// has no defined AUC.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StratumAuc {
    Value { auc: f64, n: usize },
    SingleClass { positives: usize, negatives: usize },
    Empty,
}

/// AUC within the retargeted stratum (`s_max > threshold`) and within the
/// rest, computed independently. The two strata partition the input.
pub fn stratified_auc(
    scores: &[f64],
    labels: &[u8],
    s_max_values: &[f64],
    threshold: f64,
) -> (StratumAuc, StratumAuc) {
    assert_eq!(scores.len(), labels.len());
    assert_eq!(scores.len(), s_max_values.len());
    let mut strata: [(Vec<f64>, Vec<u8>); 2] = [(Vec::new(), Vec::new()), (Vec::new(), Vec::new())];
    for i in 0..scores.len() {
        let k = usize::from(s_max_values[i] <= threshold); // 0 = retargeted
        strata[k].0.push(scores[i]);
        strata[k].1.push(labels[i]);
    }
    let eval = |(s, l): &(Vec<f64>, Vec<u8>)| -> StratumAuc {
        if s.is_empty() {
            return StratumAuc::Empty;
        }
        match auc(s, l) {
            Ok(v) => StratumAuc::Value { auc: v, n: s.len() },
            Err(SrnError::SingleClass {
                positives,
                negatives,
            }) => StratumAuc::SingleClass {
                positives,
                negatives,
            },
            Err(e) => unreachable!("auc returned unexpected error {e:?}"),
        }
    };
    (eval(&strata[0]), eval(&strata[1]))
}
