use crate::nncore::adagrad::AdagradConfig;
use crate::nncore::sigmoid;

/// Similarity gate `F(x) = sigmoid(w*x - b) / sigmoid(w - b)` with learnable
/// `w > 0`, `b > 0`. Positivity is enforced by optimizing the free parameters
/// `ln w` and `ln b`. `F(1) = 1` holds exactly by construction, and for the
/// standard inits ((10, 9) for item sequences, (10, 8) for side-info
/// sequences) the gate suppresses low cosines toward 0 while passing the
/// near-1 region almost unchanged.
#[derive(Debug, Clone)]
pub struct SimilarityGateParams {
    log_w: f64,
    log_b: f64,
    grad_log_w: f64,
    grad_log_b: f64,
    accum_log_w: f64,
    accum_log_b: f64,
}

impl SimilarityGateParams {
    pub fn new(w: f64, b: f64) -> Self {
        assert!(w > 0.0 && b > 0.0, "gate parameters must be positive");
        SimilarityGateParams {
            log_w: w.ln(),
            log_b: b.ln(),
            grad_log_w: 0.0,
            grad_log_b: 0.0,
            accum_log_w: 0.0,
            accum_log_b: 0.0,
        }
    }

    pub fn w(&self) -> f64 {
        self.log_w.exp()
    }

    pub fn b(&self) -> f64 {
        self.log_b.exp()
    }

    /// `F(cosine)`, strictly increasing in cosine, `F(1) = 1` exactly.
    pub fn value(&self, cosine: f64) -> f64 {
        let w = self.w();
        let b = self.b();
        sigmoid(w * cosine - b) / sigmoid(w - b)
    }

    /// Accumulates gradients on the free (log-space) parameters and returns
    /// the gradient with respect to the cosine input.
    pub fn backward(&mut self, cosine: f64, d_s: f64) -> f64 {
        let w = self.w();
        let b = self.b();
        let u = sigmoid(w * cosine - b);
        let v = sigmoid(w - b);
        let s = u / v;
        let ds_dc = w * u * (1.0 - u) / v;
        let ds_dw = s * ((1.0 - u) * cosine - (1.0 - v));
        let ds_db = s * (u - v);
        self.grad_log_w += d_s * ds_dw * w;
        self.grad_log_b += d_s * ds_db * b;
        d_s * ds_dc
    }

    /// The cosine where `F` crosses 0.5 — the emergent threshold `T`
    /// reported by diagnostics (not a stored parameter).
    pub fn half_crossing(&self) -> f64 {
        let w = self.w();
        let b = self.b();
        let target = 0.5 * sigmoid(w - b);
        // logit of the target, then invert w*c - b
        let logit = (target / (1.0 - target)).ln();
        (logit + b) / w
    }

    pub fn adagrad_step(&mut self, cfg: &AdagradConfig) {
        let g = self.grad_log_w;
        self.accum_log_w += g * g;
        self.log_w -= cfg.learning_rate * g / (self.accum_log_w.sqrt() + cfg.epsilon);
        let g = self.grad_log_b;
        self.accum_log_b += g * g;
        self.log_b -= cfg.learning_rate * g / (self.accum_log_b.sqrt() + cfg.epsilon);
    }

    pub fn zero_grad(&mut self) {
        self.grad_log_w = 0.0;
        self.grad_log_b = 0.0;
    }

    pub fn scale_grad(&mut self, s: f64) {
        self.grad_log_w *= s;
        self.grad_log_b *= s;
    }

    pub fn param_count(&self) -> usize {
        2
    }

    pub fn read_params(&self, out: &mut Vec<f64>) {
        out.push(self.log_w);
        out.push(self.log_b);
    }

    pub fn write_params(&mut self, vals: &mut impl Iterator<Item = f64>) {
        self.log_w = vals.next().expect("param stream exhausted");
        self.log_b = vals.next().expect("param stream exhausted");
    }

    pub fn read_grads(&self, out: &mut Vec<f64>) {
        out.push(self.grad_log_w);
        out.push(self.grad_log_b);
    }

    pub fn grad_l2_sq(&self) -> f64 {
        self.grad_log_w * self.grad_log_w + self.grad_log_b * self.grad_log_b
    }
}

/// Free-function form of the gate for callers that only evaluate it.
pub fn similarity_gate(cosine: f64, params: &SimilarityGateParams) -> f64 {
    params.value(cosine)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nncore::gradcheck::{finite_difference_max_rel_err, FD_STEP};
    use crate::nncore::init::seeded_rng;
    use rand::Rng;

    #[test]
    fn f_of_one_is_exactly_one() {
        let mut rng = seeded_rng(17, &[]);
        for _ in 0..100 {
            let w: f64 = rng.random_range(0.05..40.0);
            let b: f64 = rng.random_range(0.05..20.0);
            let gate = SimilarityGateParams::new(w, b);
            assert!(
                (gate.value(1.0) - 1.0).abs() <= 1e-15,
                "F(1) != 1 for w={w}, b={b}"
            );
        }
    }

    #[test]
    fn item_init_values() {
        let gate = SimilarityGateParams::new(10.0, 9.0);
        // sigma(0)/sigma(1)
        assert!((gate.value(0.9) - 0.6839397).abs() < 1e-6);
        // sigma(-9)/sigma(1)
        assert!((gate.value(0.0) - 1.688e-4).abs() < 1e-7);
        // sigma(0.5)/sigma(1)
        assert!((gate.value(0.95) - 0.8514495).abs() < 1e-6);
    }

    #[test]
    fn suppression_region_for_item_init() {
        // Quantified low-cosine suppression at (w=10, b=9): below the gate's
        // threshold region the weight collapses toward 0, while the near-1
        // region stays large.
        let gate = SimilarityGateParams::new(10.0, 9.0);
        let mut c = -1.0;
        while c <= 0.40 {
            assert!(gate.value(c) < 0.01, "s({c}) = {}", gate.value(c));
            c += 0.01;
        }
        assert!(gate.value(0.7) < 0.17);
        assert!(gate.value(0.9) > 0.5);
    }

    #[test]
    fn strictly_increasing_on_fine_grid() {
        for (w, b) in [(10.0, 9.0), (10.0, 8.0), (3.0, 1.5), (25.0, 20.0)] {
            let gate = SimilarityGateParams::new(w, b);
            let mut prev = gate.value(-1.0);
            let mut i = 1;
            while i <= 2000 {
                let c = -1.0 + f64::from(i) * 1e-3;
                let v = gate.value(c);
                assert!(v > prev, "not increasing at c={c} (w={w}, b={b})");
                prev = v;
                i += 1;
            }
        }
    }

    #[test]
    fn output_range_is_zero_one() {
        let gate = SimilarityGateParams::new(10.0, 9.0);
        let mut c = -1.0;
        while c <= 1.0 {
            let s = gate.value(c);
            assert!(s > 0.0 && s <= 1.0);
            c += 0.005;
        }
    }

    #[test]
    fn half_crossing_is_where_f_is_half() {
        for (w, b) in [(10.0, 9.0), (10.0, 8.0), (5.0, 3.0)] {
            let gate = SimilarityGateParams::new(w, b);
            let t = gate.half_crossing();
            assert!((gate.value(t) - 0.5).abs() < 1e-12, "w={w} b={b}");
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = seeded_rng(23, &[]);
        for _ in 0..20 {
            let w: f64 = rng.random_range(0.5..15.0);
            let b: f64 = rng.random_range(0.5..10.0);
            let c: f64 = rng.random_range(-1.0..1.0);
            let mut gate = SimilarityGateParams::new(w, b);
            gate.zero_grad();
            let dc = gate.backward(c, 1.0);

            // params = [log_w, log_b, cosine]
            let mut params = Vec::new();
            gate.read_params(&mut params);
            params.push(c);
            let mut analytic = Vec::new();
            gate.read_grads(&mut analytic);
            analytic.push(dc);

            let proto = gate.clone();
            let err = finite_difference_max_rel_err(&params, &analytic, FD_STEP, |p| {
                let mut g = proto.clone();
                g.write_params(&mut p[..2].iter().copied());
                g.value(p[2])
            });
            assert!(err < 1e-5, "w={w} b={b} c={c}: max rel err {err}");
        }
    }

    #[test]
    fn positivity_survives_training_steps() {
        let mut gate = SimilarityGateParams::new(0.2, 0.1);
        let cfg = AdagradConfig::with_lr(0.5);
        for i in 0..200 {
            gate.zero_grad();
            gate.backward(0.3, if i % 2 == 0 { 5.0 } else { -4.0 });
            gate.adagrad_step(&cfg);
            assert!(gate.w() > 0.0);
            assert!(gate.b() > 0.0);
        }
    }
}
