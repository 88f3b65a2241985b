//! Desk-scale laboratory for retargeting-interest CTR models.
//!
//! The crate implements the full offline pipeline around two user-retargeting
//! models: a hard retargeting network (HRN) that counts exact re-occurrences of
//! the target entity in the user's click history, and a soft retargeting
//! network (SRN) that generalizes the match via graph-embedding cosine
//! similarity, a learned similarity gate, a binned "ripple" representation,
//! similarity-weight aggregation, and a GRU over the ripple sequence.
//!
//! Modules:
//! - [`nncore`]: minimal differentiable substrate (embeddings, dense layers,
//!   GRU cell, Adagrad, log-loss) with exact hand-written backward passes and a
//!   finite-difference verification harness.
//! - [`data`]: click-log ingestion, impression building, time splits, the
//!   shared equal-width binning utility, and a synthetic generator that plants
//!   a retargeting signal with known ground truth.
//! - [`graphembed`]: heterogeneous click graph, metapath neighborhood
//!   sampling, two-level attention aggregation, link-prediction pretraining,
//!   and embedding export.
//! - [`retarget`]: the HRN and SRN building blocks as independently testable
//!   differentiable units.
//! - [`srnmodel`]: full CTR models (DNN base, +HRN, +SRN and its ablation
//!   variants), the training loop, and checkpointing.
//! - [`eval`]: AUC, log-loss, retargeting ratios, stratified AUC, and the
//!   intra/inter-category embedding similarity analysis.

pub mod data;
pub mod error;
pub mod eval;
pub mod graphembed;
pub mod nncore;
pub mod retarget;
pub mod srnmodel;

pub use error::SrnError;
