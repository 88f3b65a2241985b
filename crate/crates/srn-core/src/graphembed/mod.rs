//! Heterogeneous click-graph embedding pretraining.
//!
//! Builds the typed user/item/side-info graph from training clicks, samples
//! metapath neighborhoods, aggregates them with two-level attention
//! (node-level over neighbors, semantic-level over metapaths), trains by
//! link prediction on user-item edges, and exports the embedding dictionary
//! consumed by the soft retargeting model.

pub mod export;
pub mod graph;
pub mod han;
pub mod metapath;
pub mod trainer;

pub use export::{export_embeddings, GraphEmbeddingStore};
pub use graph::{EdgeKind, GraphSizes, GraphStats, HeteroGraph, NodeType, SIDE_TYPES};
pub use han::{GraphEmbeddingDict, HanCache, HanConfig, HanModel, Neighborhoods};
pub use metapath::{default_metapaths, sample_neighbors, MetaPath};
pub use trainer::{score_pair, train_link_prediction, LinkPredConfig, LinkPredStats};
