/// Probabilities are clipped into `[LOSS_CLIP_EPS, 1 - LOSS_CLIP_EPS]` before
/// taking logs.
pub const LOSS_CLIP_EPS: f64 = 1e-7;

/// Binary cross entropy `-y ln p - (1-y) ln(1-p)` with clipping.
pub fn log_loss(p: f64, y: u8) -> f64 {
    let p = p.clamp(LOSS_CLIP_EPS, 1.0 - LOSS_CLIP_EPS);
    if y == 1 {
        -p.ln()
    } else {
        -(1.0 - p).ln()
    }
}

/// Gradient of the log-loss with respect to the pre-sigmoid logit when
/// `p = sigmoid(logit)`: simply `p - y`.
pub fn log_loss_dlogit(p: f64, y: u8) -> f64 {
    p - f64::from(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coin_flip_costs_ln2() {
        assert!((log_loss(0.5, 1) - 0.6931472).abs() < 1e-7);
        assert!((log_loss(0.5, 0) - 0.6931472).abs() < 1e-7);
    }

    #[test]
    fn perfect_prediction_is_clipped() {
        let l = log_loss(1.0, 1);
        assert!(l > 0.0);
        assert!((l - 1e-7).abs() < 1e-9);
    }

    #[test]
    fn quarter_prob_negative_label() {
        // -ln 0.75
        assert!((log_loss(0.25, 0) - 0.2876821).abs() < 1e-7);
    }

    #[test]
    fn dlogit_is_residual() {
        assert_eq!(log_loss_dlogit(0.7, 1), 0.7 - 1.0);
        assert_eq!(log_loss_dlogit(0.7, 0), 0.7);
    }
}
