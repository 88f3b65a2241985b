//! Hard and soft retargeting building blocks.
//!
//! HRN counts exact re-occurrences of the target in the behavior sequence and
//! bins the count. SRN generalizes the match: cosine similarity on graph
//! embeddings, a learned similarity gate mapping cosine to a similarity
//! weight in (0,1], a binned "ripple" representation of the cosine, a
//! similarity-weighted aggregation of ripple embeddings, and a GRU over the
//! ripple sequence to capture how retargeting interest evolves.

pub mod gate;
pub mod hrn;
pub mod similarity;
pub mod srn;

pub use gate::SimilarityGateParams;
pub use hrn::{hrn_aggregate, hrn_similarity, HrnAggregate};
pub use similarity::{cosine_backward, cosine_similarity};
pub use srn::{
    ripple_ids, ripple_row, weight_aggregation, Aggregation, GateMode, RetargetCache,
    RetargetOutput, RetargetUnit, RIPPLE_VOCAB,
};
