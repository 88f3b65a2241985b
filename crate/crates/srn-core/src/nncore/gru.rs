use rand::Rng;

use super::adagrad::AdagradConfig;
use super::dense::Activation;
use super::init::glorot_uniform;
use super::matrix::Matrix;
use super::sigmoid;

/// Standard GRU cell:
///
/// ```text
/// z_t = sigmoid(W_z x_t + U_z h_{t-1} + b_z)
/// r_t = sigmoid(W_r x_t + U_r h_{t-1} + b_r)
/// c_t = tanh(W_c x_t + U_c (r_t ⊙ h_{t-1}) + b_c)
/// h_t = (1 - z_t) ⊙ h_{t-1} + z_t ⊙ c_t
/// ```
///
/// Input matrices are `hidden_dim x input_dim`, recurrent matrices
/// `hidden_dim x hidden_dim`. Backward-through-time is hand-written and
/// verified against finite differences.
#[derive(Debug, Clone)]
pub struct GruCell {
    pub input_dim: usize,
    pub hidden_dim: usize,
    gates: [Gate; 3], // update, reset, candidate
}

#[derive(Debug, Clone)]
struct Gate {
    w: Matrix,
    u: Matrix,
    b: Vec<f64>,
    grad_w: Matrix,
    grad_u: Matrix,
    grad_b: Vec<f64>,
    accum_w: Matrix,
    accum_u: Matrix,
    accum_b: Vec<f64>,
}

const UPDATE: usize = 0;
const RESET: usize = 1;
const CAND: usize = 2;

impl Gate {
    fn new(input_dim: usize, hidden_dim: usize, rng: &mut impl Rng) -> Self {
        Gate {
            w: Matrix::from_fn(hidden_dim, input_dim, |_, _| {
                glorot_uniform(rng, input_dim, hidden_dim)
            }),
            u: Matrix::from_fn(hidden_dim, hidden_dim, |_, _| {
                glorot_uniform(rng, hidden_dim, hidden_dim)
            }),
            b: vec![0.0; hidden_dim],
            grad_w: Matrix::zeros(hidden_dim, input_dim),
            grad_u: Matrix::zeros(hidden_dim, hidden_dim),
            grad_b: vec![0.0; hidden_dim],
            accum_w: Matrix::zeros(hidden_dim, input_dim),
            accum_u: Matrix::zeros(hidden_dim, hidden_dim),
            accum_b: vec![0.0; hidden_dim],
        }
    }

    fn zeroed(input_dim: usize, hidden_dim: usize) -> Self {
        Gate {
            w: Matrix::zeros(hidden_dim, input_dim),
            u: Matrix::zeros(hidden_dim, hidden_dim),
            b: vec![0.0; hidden_dim],
            grad_w: Matrix::zeros(hidden_dim, input_dim),
            grad_u: Matrix::zeros(hidden_dim, hidden_dim),
            grad_b: vec![0.0; hidden_dim],
            accum_w: Matrix::zeros(hidden_dim, input_dim),
            accum_u: Matrix::zeros(hidden_dim, hidden_dim),
            accum_b: vec![0.0; hidden_dim],
        }
    }

    /// pre = W x + U h_ref + b
    fn preact(&self, x: &[f64], h_ref: &[f64]) -> Vec<f64> {
        let mut pre = self.b.clone();
        self.w.matvec_add(x, &mut pre);
        self.u.matvec_add(h_ref, &mut pre);
        pre
    }
}

/// Per-step activations retained for backward-through-time.
#[derive(Debug, Clone, Default)]
pub struct GruCache {
    inputs: Vec<Vec<f64>>,
    h0: Vec<f64>,
    hs: Vec<Vec<f64>>, // h_1..h_n
    zs: Vec<Vec<f64>>,
    rs: Vec<Vec<f64>>,
    cs: Vec<Vec<f64>>,
}

impl GruCache {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }
}

impl GruCell {
    pub fn new(input_dim: usize, hidden_dim: usize, rng: &mut impl Rng) -> Self {
        GruCell {
            input_dim,
            hidden_dim,
            gates: [
                Gate::new(input_dim, hidden_dim, rng),
                Gate::new(input_dim, hidden_dim, rng),
                Gate::new(input_dim, hidden_dim, rng),
            ],
        }
    }

    pub fn zeroed(input_dim: usize, hidden_dim: usize) -> Self {
        GruCell {
            input_dim,
            hidden_dim,
            gates: [
                Gate::zeroed(input_dim, hidden_dim),
                Gate::zeroed(input_dim, hidden_dim),
                Gate::zeroed(input_dim, hidden_dim),
            ],
        }
    }

    /// Runs the recurrence over the whole sequence, returning every hidden
    /// state (`h_1..h_n`) plus the cache for backward. An empty input yields
    /// an empty output sequence; the final state is then `h0` by convention.
    pub fn forward(&self, inputs: &[Vec<f64>], h0: &[f64]) -> (Vec<Vec<f64>>, GruCache) {
        assert_eq!(h0.len(), self.hidden_dim, "h0 length mismatch");
        let mut cache = GruCache {
            inputs: inputs.to_vec(),
            h0: h0.to_vec(),
            ..Default::default()
        };
        let mut h = h0.to_vec();
        for x in inputs {
            assert_eq!(x.len(), self.input_dim, "gru input length mismatch");
            let z: Vec<f64> = self.gates[UPDATE]
                .preact(x, &h)
                .into_iter()
                .map(sigmoid)
                .collect();
            let r: Vec<f64> = self.gates[RESET]
                .preact(x, &h)
                .into_iter()
                .map(sigmoid)
                .collect();
            let rh: Vec<f64> = r.iter().zip(&h).map(|(ri, hi)| ri * hi).collect();
            let c: Vec<f64> = self.gates[CAND]
                .preact(x, &rh)
                .into_iter()
                .map(f64::tanh)
                .collect();
            let mut h_next = vec![0.0; self.hidden_dim];
            for i in 0..self.hidden_dim {
                h_next[i] = (1.0 - z[i]) * h[i] + z[i] * c[i];
            }
            cache.zs.push(z);
            cache.rs.push(r);
            cache.cs.push(c);
            cache.hs.push(h_next.clone());
            h = h_next;
        }
        (cache.hs.clone(), cache)
    }

    /// Final hidden state for a forward pass (h0 if the sequence is empty).
    pub fn final_state(cache: &GruCache) -> &[f64] {
        cache.hs.last().unwrap_or(&cache.h0)
    }

    /// Backpropagates a gradient on the final hidden state through the whole
    /// unrolled sequence. Accumulates parameter gradients and returns the
    /// gradients of the inputs (oldest first).
    pub fn backward_from_final(&mut self, cache: &GruCache, d_final: &[f64]) -> Vec<Vec<f64>> {
        debug_assert_eq!(d_final.len(), self.hidden_dim);
        let n = cache.inputs.len();
        let mut d_inputs = vec![vec![0.0; self.input_dim]; n];
        if n == 0 {
            return d_inputs;
        }
        let mut dh = d_final.to_vec();
        for t in (0..n).rev() {
            let h_prev = if t == 0 { &cache.h0 } else { &cache.hs[t - 1] };
            let x = &cache.inputs[t];
            let z = &cache.zs[t];
            let r = &cache.rs[t];
            let c = &cache.cs[t];

            let hd = self.hidden_dim;
            let mut dh_prev = vec![0.0; hd];
            let mut da_z = vec![0.0; hd];
            let mut da_r = vec![0.0; hd];
            let mut da_c = vec![0.0; hd];

            // h = (1-z) h_prev + z c
            for i in 0..hd {
                let dz = dh[i] * (c[i] - h_prev[i]);
                let dc = dh[i] * z[i];
                dh_prev[i] += dh[i] * (1.0 - z[i]);
                da_z[i] = dz * z[i] * (1.0 - z[i]);
                da_c[i] = dc * (1.0 - c[i] * c[i]);
            }

            // candidate: a_c = W_c x + U_c (r ⊙ h_prev) + b_c
            let rh: Vec<f64> = r.iter().zip(h_prev).map(|(ri, hi)| ri * hi).collect();
            self.gates[CAND].grad_w.add_outer(&da_c, x);
            self.gates[CAND].grad_u.add_outer(&da_c, &rh);
            for (gb, d) in self.gates[CAND].grad_b.iter_mut().zip(&da_c) {
                *gb += d;
            }
            let mut d_rh = vec![0.0; hd];
            self.gates[CAND].u.matvec_t_add(&da_c, &mut d_rh);
            for i in 0..hd {
                let dr = d_rh[i] * h_prev[i];
                dh_prev[i] += d_rh[i] * r[i];
                da_r[i] = dr * r[i] * (1.0 - r[i]);
            }

            // update and reset gates: a = W x + U h_prev + b
            self.gates[UPDATE].grad_w.add_outer(&da_z, x);
            self.gates[UPDATE].grad_u.add_outer(&da_z, h_prev);
            for (gb, d) in self.gates[UPDATE].grad_b.iter_mut().zip(&da_z) {
                *gb += d;
            }
            self.gates[UPDATE].u.matvec_t_add(&da_z, &mut dh_prev);

            self.gates[RESET].grad_w.add_outer(&da_r, x);
            self.gates[RESET].grad_u.add_outer(&da_r, h_prev);
            for (gb, d) in self.gates[RESET].grad_b.iter_mut().zip(&da_r) {
                *gb += d;
            }
            self.gates[RESET].u.matvec_t_add(&da_r, &mut dh_prev);

            // input gradient from all three gates
            let dx = &mut d_inputs[t];
            self.gates[UPDATE].w.matvec_t_add(&da_z, dx);
            self.gates[RESET].w.matvec_t_add(&da_r, dx);
            self.gates[CAND].w.matvec_t_add(&da_c, dx);

            dh = dh_prev;
        }
        d_inputs
    }

    pub fn adagrad_step(&mut self, cfg: &AdagradConfig) {
        for g in &mut self.gates {
            super::adagrad::adagrad_update(g.w.data_mut(), g.accum_w.data_mut(), g.grad_w.data(), cfg);
            super::adagrad::adagrad_update(g.u.data_mut(), g.accum_u.data_mut(), g.grad_u.data(), cfg);
            super::adagrad::adagrad_update(&mut g.b, &mut g.accum_b, &g.grad_b, cfg);
        }
    }

    pub fn zero_grad(&mut self) {
        for g in &mut self.gates {
            g.grad_w.fill(0.0);
            g.grad_u.fill(0.0);
            g.grad_b.fill(0.0);
        }
    }

    pub fn scale_grad(&mut self, s: f64) {
        for g in &mut self.gates {
            for v in g.grad_w.data_mut() {
                *v *= s;
            }
            for v in g.grad_u.data_mut() {
                *v *= s;
            }
            for v in &mut g.grad_b {
                *v *= s;
            }
        }
    }

    pub fn param_count(&self) -> usize {
        3 * (self.hidden_dim * self.input_dim + self.hidden_dim * self.hidden_dim + self.hidden_dim)
    }

    pub fn read_params(&self, out: &mut Vec<f64>) {
        for g in &self.gates {
            out.extend_from_slice(g.w.data());
            out.extend_from_slice(g.u.data());
            out.extend_from_slice(&g.b);
        }
    }

    pub fn write_params(&mut self, vals: &mut impl Iterator<Item = f64>) {
        for g in &mut self.gates {
            for v in g.w.data_mut() {
                *v = vals.next().expect("param stream exhausted");
            }
            for v in g.u.data_mut() {
                *v = vals.next().expect("param stream exhausted");
            }
            for v in &mut g.b {
                *v = vals.next().expect("param stream exhausted");
            }
        }
    }

    pub fn read_grads(&self, out: &mut Vec<f64>) {
        for g in &self.gates {
            out.extend_from_slice(g.grad_w.data());
            out.extend_from_slice(g.grad_u.data());
            out.extend_from_slice(&g.grad_b);
        }
    }

    pub fn grad_l2_sq(&self) -> f64 {
        self.gates
            .iter()
            .map(|g| {
                g.grad_w.data().iter().map(|v| v * v).sum::<f64>()
                    + g.grad_u.data().iter().map(|v| v * v).sum::<f64>()
                    + g.grad_b.iter().map(|v| v * v).sum::<f64>()
            })
            .sum()
    }

    /// Hidden-state range guarantee exploited by tests: each coordinate of
    /// `h_t` is a convex combination of `h_{t-1}` and a tanh value.
    pub fn activation() -> Activation {
        Activation::Tanh
    }
}
