use rand::Rng;

use super::adagrad::{adagrad_update, AdagradConfig};
use super::init::glorot_uniform;
use super::matrix::Matrix;
use super::sigmoid;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Identity,
    Relu,
    Sigmoid,
    Tanh,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Identity => x,
            Activation::Relu => x.max(0.0),
            Activation::Sigmoid => sigmoid(x),
            Activation::Tanh => x.tanh(),
        }
    }

    /// Derivative expressed through the activation output.
    fn dvalue(self, out: f64) -> f64 {
        match self {
            Activation::Identity => 1.0,
            Activation::Relu => {
                if out > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => out * (1.0 - out),
            Activation::Tanh => 1.0 - out * out,
        }
    }
}

/// Fully connected layer `act(W x + b)` with gradient and Adagrad state.
#[derive(Debug, Clone)]
pub struct DenseLayer {
    pub in_dim: usize,
    pub out_dim: usize,
    pub activation: Activation,
    weight: Matrix, // out_dim x in_dim
    bias: Vec<f64>,
    grad_weight: Matrix,
    grad_bias: Vec<f64>,
    accum_weight: Matrix,
    accum_bias: Vec<f64>,
}

/// Per-sample forward cache: input copy plus activated output.
#[derive(Debug, Clone)]
pub struct DenseCache {
    pub input: Vec<f64>,
    pub output: Vec<f64>,
}

impl DenseLayer {
    pub fn new(in_dim: usize, out_dim: usize, activation: Activation, rng: &mut impl Rng) -> Self {
        let weight = Matrix::from_fn(out_dim, in_dim, |_, _| glorot_uniform(rng, in_dim, out_dim));
        DenseLayer {
            in_dim,
            out_dim,
            activation,
            weight,
            bias: vec![0.0; out_dim],
            grad_weight: Matrix::zeros(out_dim, in_dim),
            grad_bias: vec![0.0; out_dim],
            accum_weight: Matrix::zeros(out_dim, in_dim),
            accum_bias: vec![0.0; out_dim],
        }
    }

    pub fn zeroed(in_dim: usize, out_dim: usize, activation: Activation) -> Self {
        DenseLayer {
            in_dim,
            out_dim,
            activation,
            weight: Matrix::zeros(out_dim, in_dim),
            bias: vec![0.0; out_dim],
            grad_weight: Matrix::zeros(out_dim, in_dim),
            grad_bias: vec![0.0; out_dim],
            accum_weight: Matrix::zeros(out_dim, in_dim),
            accum_bias: vec![0.0; out_dim],
        }
    }

    pub fn forward(&self, x: &[f64]) -> DenseCache {
        assert_eq!(
            x.len(),
            self.in_dim,
            "dense layer expected input of length {}, got {}",
            self.in_dim,
            x.len()
        );
        let mut out = self.bias.clone();
        self.weight.matvec_add(x, &mut out);
        for v in &mut out {
            *v = self.activation.apply(*v);
        }
        DenseCache {
            input: x.to_vec(),
            output: out,
        }
    }

    /// Accumulates parameter gradients and writes the input gradient.
    pub fn backward(&mut self, cache: &DenseCache, d_out: &[f64], d_input: &mut [f64]) {
        debug_assert_eq!(d_out.len(), self.out_dim);
        debug_assert_eq!(d_input.len(), self.in_dim);
        let mut d_pre = vec![0.0; self.out_dim];
        for i in 0..self.out_dim {
            d_pre[i] = d_out[i] * self.activation.dvalue(cache.output[i]);
        }
        self.grad_weight.add_outer(&d_pre, &cache.input);
        for (gb, dp) in self.grad_bias.iter_mut().zip(&d_pre) {
            *gb += dp;
        }
        self.weight.matvec_t_add(&d_pre, d_input);
    }

    pub fn adagrad_step(&mut self, cfg: &AdagradConfig) {
        adagrad_update(
            self.weight.data_mut(),
            self.accum_weight.data_mut(),
            self.grad_weight.data(),
            cfg,
        );
        adagrad_update(&mut self.bias, &mut self.accum_bias, &self.grad_bias, cfg);
    }

    pub fn zero_grad(&mut self) {
        self.grad_weight.fill(0.0);
        self.grad_bias.fill(0.0);
    }

    pub fn scale_grad(&mut self, s: f64) {
        for g in self.grad_weight.data_mut() {
            *g *= s;
        }
        for g in &mut self.grad_bias {
            *g *= s;
        }
    }

    pub fn param_count(&self) -> usize {
        self.out_dim * self.in_dim + self.out_dim
    }

    // Flat parameter access for gradient checking and checkpoints.

    pub fn read_params(&self, out: &mut Vec<f64>) {
        out.extend_from_slice(self.weight.data());
        out.extend_from_slice(&self.bias);
    }

    pub fn write_params(&mut self, vals: &mut impl Iterator<Item = f64>) {
        for w in self.weight.data_mut() {
            *w = vals.next().expect("param stream exhausted");
        }
        for b in &mut self.bias {
            *b = vals.next().expect("param stream exhausted");
        }
    }

    pub fn read_grads(&self, out: &mut Vec<f64>) {
        out.extend_from_slice(self.grad_weight.data());
        out.extend_from_slice(&self.grad_bias);
    }

    pub fn weight(&self) -> &Matrix {
        &self.weight
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn grad_l2_sq(&self) -> f64 {
        self.grad_weight.data().iter().map(|g| g * g).sum::<f64>()
            + self.grad_bias.iter().map(|g| g * g).sum::<f64>()
    }
}
