use std::collections::BTreeMap;

use rand::Rng;

use super::adagrad::AdagradConfig;
use super::init::embedding_uniform;

/// Dense id -> vector table with per-row Adagrad state and sparse gradient
/// accumulation: an optimizer step touches only the rows the batch touched.
#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    rows: usize,
    dim: usize,
    values: Vec<f64>,
    accum: Vec<f64>,
    // BTreeMap keeps the update order independent of insertion order.
    grads: BTreeMap<u32, Vec<f64>>,
}

impl EmbeddingTable {
    pub fn new(rows: usize, dim: usize, rng: &mut impl Rng) -> Self {
        let values = (0..rows * dim).map(|_| embedding_uniform(rng, dim)).collect();
        EmbeddingTable {
            rows,
            dim,
            values,
            accum: vec![0.0; rows * dim],
            grads: BTreeMap::new(),
        }
    }

    pub fn zeroed(rows: usize, dim: usize) -> Self {
        EmbeddingTable {
            rows,
            dim,
            values: vec![0.0; rows * dim],
            accum: vec![0.0; rows * dim],
            grads: BTreeMap::new(),
        }
    }

    pub fn from_values(rows: usize, dim: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), rows * dim);
        EmbeddingTable {
            rows,
            dim,
            values,
            accum: vec![0.0; rows * dim],
            grads: BTreeMap::new(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lookup(&self, id: u32) -> &[f64] {
        let id = id as usize;
        assert!(id < self.rows, "embedding id {id} out of range {}", self.rows);
        &self.values[id * self.dim..(id + 1) * self.dim]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn accum(&self) -> &[f64] {
        &self.accum
    }

    pub fn accumulate_grad(&mut self, id: u32, grad: &[f64]) {
        debug_assert_eq!(grad.len(), self.dim);
        let slot = self
            .grads
            .entry(id)
            .or_insert_with(|| vec![0.0; self.dim]);
        for (s, g) in slot.iter_mut().zip(grad) {
            *s += g;
        }
    }

    pub fn touched_rows(&self) -> usize {
        self.grads.len()
    }

    /// Sparse Adagrad step over the touched rows only; clears the gradients.
    pub fn adagrad_step(&mut self, cfg: &AdagradConfig) {
        for (&row, grad) in &self.grads {
            let base = row as usize * self.dim;
            for (k, g) in grad.iter().enumerate() {
                let i = base + k;
                self.accum[i] += g * g;
                self.values[i] -= cfg.learning_rate * g / (self.accum[i].sqrt() + cfg.epsilon);
            }
        }
        self.grads.clear();
    }

    pub fn zero_grad(&mut self) {
        self.grads.clear();
    }

    pub fn scale_grad(&mut self, s: f64) {
        for grad in self.grads.values_mut() {
            for g in grad {
                *g *= s;
            }
        }
    }

    pub fn param_count(&self) -> usize {
        self.rows * self.dim
    }

    pub fn read_params(&self, out: &mut Vec<f64>) {
        out.extend_from_slice(&self.values);
    }

    pub fn write_params(&mut self, vals: &mut impl Iterator<Item = f64>) {
        for v in &mut self.values {
            *v = vals.next().expect("param stream exhausted");
        }
    }

    /// Densified gradient matching `read_params` order (for finite-difference
    /// checks on small tables).
    pub fn read_grads(&self, out: &mut Vec<f64>) {
        let start = out.len();
        out.resize(start + self.rows * self.dim, 0.0);
        for (&row, grad) in &self.grads {
            let base = start + row as usize * self.dim;
            out[base..base + self.dim].copy_from_slice(grad);
        }
    }

    pub fn grad_l2_sq(&self) -> f64 {
        self.grads
            .values()
            .flat_map(|g| g.iter())
            .map(|g| g * g)
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nncore::init::seeded_rng;

    #[test]
    fn lookup_returns_dim_vector_for_all_rows() {
        let mut rng = seeded_rng(11, &[]);
        let t = EmbeddingTable::new(7, 4, &mut rng);
        for id in 0..7 {
            assert_eq!(t.lookup(id).len(), 4);
        }
    }

    #[test]
    fn sparse_step_touches_only_accumulated_rows() {
        let mut rng = seeded_rng(12, &[]);
        let mut t = EmbeddingTable::new(5, 3, &mut rng);
        let before = t.values().to_vec();
        t.accumulate_grad(2, &[1.0, -1.0, 0.5]);
        t.accumulate_grad(2, &[1.0, 0.0, 0.0]); // same row twice accumulates
        t.adagrad_step(&AdagradConfig::default());
        for row in 0..5u32 {
            let r = row as usize;
            let changed = t.lookup(row) != &before[r * 3..(r + 1) * 3];
            assert_eq!(changed, row == 2, "row {row}");
        }
        // second step with no grads is a no-op
        let snap = t.values().to_vec();
        t.adagrad_step(&AdagradConfig::default());
        assert_eq!(snap, t.values());
    }

    #[test]
    fn accum_state_grows_monotonically() {
        let mut t = EmbeddingTable::zeroed(2, 2);
        let mut last = t.accum().to_vec();
        for _ in 0..4 {
            t.accumulate_grad(1, &[0.3, -0.2]);
            t.adagrad_step(&AdagradConfig::default());
            for (a, l) in t.accum().iter().zip(&last) {
                assert!(a >= l);
                assert!(*a >= 0.0);
            }
            last = t.accum().to_vec();
        }
    }
}
