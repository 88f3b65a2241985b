use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::eval::auc::StratumAuc;

/// Per-stratum block of an [`EvalReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratumReport {
    pub threshold: f64,
    pub retargeted: StratumAuc,
    pub others: StratumAuc,
}

/// Evaluation summary for one model run. Serialized as JSON; the timestamp is
/// data-derived (latest impression timestamp in the evaluated split) so that
/// reruns with the same seed are byte-identical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub model: String,
    pub auc: f64,
    pub logloss: f64,
    pub n_samples: usize,
    /// Retargeting ratio per sequence type at the report threshold.
    pub retargeting_ratios: BTreeMap<String, f64>,
    /// Stratified AUC per sequence type (strata sample counts sum to n_samples).
    pub strata: BTreeMap<String, StratumReport>,
    pub config_hash: String,
    pub timestamp: i64,
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Aligned text table of the headline metrics.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<12} {:>8} {:>9} {:>9}\n",
            "model", "auc", "logloss", "samples"
        ));
        out.push_str(&format!(
            "{:<12} {:>8.4} {:>9.4} {:>9}\n",
            self.model, self.auc, self.logloss, self.n_samples
        ));
        if !self.retargeting_ratios.is_empty() {
            out.push('\n');
            out.push_str(&format!("{:<12} {:>10}\n", "type", "ratio"));
            for (t, r) in &self.retargeting_ratios {
                out.push_str(&format!("{:<12} {:>9.2}%\n", t, 100.0 * r));
            }
        }
        out
    }

    /// One CSV row (header written by the caller).
    pub fn csv_row(&self) -> String {
        format!(
            "{},{:.6},{:.6},{}",
            self.model, self.auc, self.logloss, self.n_samples
        )
    }
}

/// Renders rows of (label, auc, logloss) as an aligned comparison table with
/// AUC deltas against the first row, mirroring the paper-style layout.
pub fn render_comparison_table(rows: &[(String, f64, f64)]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<18} {:>8} {:>9} {:>9}\n",
        "model", "auc", "logloss", "diff"
    ));
    let base = rows.first().map(|r| r.1);
    for (label, auc, logloss) in rows {
        let diff = match base {
            Some(b) if (auc - b).abs() > f64::EPSILON => format!("{:+.4}", auc - b),
            _ => String::new(),
        };
        out.push_str(&format!(
            "{:<18} {:>8.4} {:>9.4} {:>9}\n",
            label, auc, logloss, diff
        ));
    }
    out
}
