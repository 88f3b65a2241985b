//! Minimal differentiable-computation substrate.
//!
//! Everything trains in double precision with hand-written backward passes;
//! [`gradcheck`] verifies each unit against central finite differences. The
//! operator set is fixed on purpose: embedding lookup, dense layer, GRU cell,
//! elementwise nonlinearities, log-loss, and a (sparse-capable) Adagrad step.

pub mod adagrad;
pub mod checkpoint;
pub mod dense;
pub mod embedding;
pub mod gradcheck;
pub mod gru;
pub mod init;
pub mod loss;
pub mod matrix;

pub use adagrad::{adagrad_update, AdagradConfig};
pub use checkpoint::{read_checkpoint, write_checkpoint, CheckpointMeta, OwnedTensor};
pub use dense::{Activation, DenseCache, DenseLayer};
pub use embedding::EmbeddingTable;
pub use gradcheck::{finite_difference_max_rel_err, FD_STEP};
pub use gru::{GruCache, GruCell};
pub use init::{derive_seed, seeded_rng};
pub use loss::{log_loss, log_loss_dlogit, LOSS_CLIP_EPS};
pub use matrix::Matrix;

/// Numerically stable logistic function; saturates cleanly at the extremes
/// and satisfies `sigmoid(-x) == 1 - sigmoid(x)` to machine precision.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}
