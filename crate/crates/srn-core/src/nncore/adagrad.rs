/// Adagrad hyperparameters. The per-parameter accumulated squared gradients
/// live next to the parameters they belong to (see [`adagrad_update`] and the
/// sparse path in `EmbeddingTable`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdagradConfig {
    pub learning_rate: f64,
    pub epsilon: f64,
}

impl Default for AdagradConfig {
    fn default() -> Self {
        AdagradConfig {
            learning_rate: 0.01,
            epsilon: 1e-8,
        }
    }
}

impl AdagradConfig {
    pub fn with_lr(learning_rate: f64) -> Self {
        AdagradConfig {
            learning_rate,
            ..Default::default()
        }
    }
}

/// One dense Adagrad step: `accum += g^2; p -= lr * g / (sqrt(accum) + eps)`.
pub fn adagrad_update(values: &mut [f64], accum: &mut [f64], grads: &[f64], cfg: &AdagradConfig) {
    debug_assert_eq!(values.len(), accum.len());
    debug_assert_eq!(values.len(), grads.len());
    for i in 0..values.len() {
        let g = grads[i];
        accum[i] += g * g;
        values[i] -= cfg.learning_rate * g / (accum[i].sqrt() + cfg.epsilon);
    }
}
