//! Metrics and analyses: AUC/LogLoss, retargeting ratios, stratified AUC on
//! retargeted vs other samples, and intra/inter-category embedding quality.

pub mod auc;
pub mod embquality;
pub mod report;

pub use auc::{auc, log_loss_mean, retargeting_ratio, stratified_auc, StratumAuc};
pub use embquality::{embedding_quality, EmbeddingQuality};
pub use report::{render_comparison_table, EvalReport, StratumReport};
