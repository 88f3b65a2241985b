use rand::Rng;

use crate::data::binning;
use crate::data::events::SeqType;
use crate::nncore::adagrad::AdagradConfig;
use crate::nncore::embedding::EmbeddingTable;
use crate::nncore::gru::{GruCache, GruCell};
use crate::nncore::matrix::{axpy, dot};
use crate::retarget::gate::SimilarityGateParams;
use crate::retarget::similarity::{cosine_backward, cosine_similarity};

/// Ripple bin width applied to cosines.
pub const RIPPLE_WIDTH: f64 = 0.01;
/// Bin ids for cosines in `[-1, 1]` span `-99..=101`: 201 vocabulary rows.
pub const RIPPLE_VOCAB: usize = 201;

/// Per-element ripple representation: `binning(cosine, 0.01)`.
pub fn ripple_ids(cosines: &[f64]) -> Vec<i64> {
    cosines.iter().map(|&c| binning(c, RIPPLE_WIDTH)).collect()
}

/// Embedding row for a ripple bin id (`-99..=101` -> `0..=200`). Rounding can
/// push a cosine a hair past ±1; those land in the boundary bins.
pub fn ripple_row(bin_id: i64) -> u32 {
    (bin_id + 99).clamp(0, RIPPLE_VOCAB as i64 - 1) as u32
}

/// Similarity-weighted sum of ripple embeddings (the aggregation of the
/// weight aggregation layer). Empty input gives the zero vector.
pub fn weight_aggregation(weights: &[f64], embeddings: &[&[f64]], dim: usize) -> Vec<f64> {
    debug_assert_eq!(weights.len(), embeddings.len());
    let mut out = vec![0.0; dim];
    for (s, e) in weights.iter().zip(embeddings) {
        axpy(*s, e, &mut out);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GateMode {
    #[default]
    Learned,
    /// Ablation: every similarity weight forced to 1.0.
    ConstantOne,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Aggregation {
    /// Weighted ripple-embedding sum.
    #[default]
    Weighted,
    /// Ablation: HRN-style `binning(sum of weights, 1)` feature embedding.
    /// The binning blocks gradients into the gate, which is exactly why the
    /// weighted form exists.
    SumBinning,
}

/// Everything the similarity-gate + aggregation + evolution path produces for
/// one behavior sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct RetargetOutput {
    /// Max similarity weight (0 for an empty sequence).
    pub s_max: f64,
    /// Sum of similarity weights (the exact click count under HRN weights).
    pub n_s: f64,
    /// `binning(n_s, 1)`.
    pub hrn_feature_id: i64,
    /// Aggregated interest vector (bin embedding under `SumBinning`).
    pub i_s: Vec<f64>,
    /// GRU evolution state; empty when the GRU branch is disabled.
    pub g_s: Vec<f64>,
    /// `[i_s ; g_s]` — the model input.
    pub i_srn: Vec<f64>,
    /// Diagnostics.
    pub cosines: Vec<f64>,
    pub weights: Vec<f64>,
    pub ripple_bin_ids: Vec<i64>,
}

/// Forward state needed by backward.
#[derive(Debug, Clone)]
pub struct RetargetCache {
    target_vec: Vec<f64>,
    seq_vecs: Vec<Vec<f64>>,
    cosines: Vec<f64>,
    weights: Vec<f64>,
    ripple_rows: Vec<u32>,
    ripple_embs: Vec<Vec<f64>>,
    gru_cache: Option<GruCache>,
    sumbin_row: Option<u32>,
}

/// Gradients flowing back into the embedding vectors that produced the
/// cosines, for callers whose similarity source is trainable.
#[derive(Debug, Clone)]
pub struct InputGrads {
    pub d_target: Vec<f64>,
    pub d_seq: Vec<Vec<f64>>,
}

/// One behavior-sequence type's soft-retargeting stack: similarity gate,
/// ripple embedding table, optional GRU, and the optional sum-binning table
/// for the ablation variant.
#[derive(Debug, Clone)]
pub struct RetargetUnit {
    pub seq_type: SeqType,
    pub ctr_dim: usize,
    pub gru_hidden: usize,
    pub gate_mode: GateMode,
    pub aggregation: Aggregation,
    pub use_gru: bool,
    pub gate: SimilarityGateParams,
    pub ripple: EmbeddingTable,
    pub gru: Option<GruCell>,
    pub sumbin: Option<EmbeddingTable>,
    sumbin_rows: usize,
}

impl RetargetUnit {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        seq_type: SeqType,
        ctr_dim: usize,
        gru_hidden: usize,
        max_len: usize,
        gate_init: (f64, f64),
        gate_mode: GateMode,
        aggregation: Aggregation,
        use_gru: bool,
        rng: &mut impl Rng,
    ) -> Self {
        let sumbin_rows = max_len + 1;
        RetargetUnit {
            seq_type,
            ctr_dim,
            gru_hidden,
            gate_mode,
            aggregation,
            use_gru,
            gate: SimilarityGateParams::new(gate_init.0, gate_init.1),
            ripple: EmbeddingTable::new(RIPPLE_VOCAB, ctr_dim, rng),
            gru: use_gru.then(|| GruCell::new(ctr_dim, gru_hidden, rng)),
            sumbin: (aggregation == Aggregation::SumBinning)
                .then(|| EmbeddingTable::new(sumbin_rows, ctr_dim, rng)),
            sumbin_rows,
        }
    }

    /// Length of `i_srn`.
    pub fn output_dim(&self) -> usize {
        self.ctr_dim + if self.use_gru { self.gru_hidden } else { 0 }
    }

    /// Row of the sum-binning table for a binned soft count.
    fn sumbin_row(&self, bin_id: i64) -> u32 {
        (bin_id - 1).clamp(0, self.sumbin_rows as i64 - 1) as u32
    }

    /// Composes cosine -> gate -> ripple -> aggregation and evolution for one
    /// sequence. `target_vec` is the target entity's similarity-source vector
    /// (all zeros for entities missing from the source), `seq_vecs` the
    /// sequence entities' vectors, oldest first.
    pub fn forward(&self, target_vec: &[f64], seq_vecs: &[Vec<f64>]) -> (RetargetOutput, RetargetCache) {
        let n = seq_vecs.len();
        let cosines: Vec<f64> = seq_vecs
            .iter()
            .map(|v| cosine_similarity(target_vec, v))
            .collect();
        let weights: Vec<f64> = match self.gate_mode {
            GateMode::Learned => cosines.iter().map(|&c| self.gate.value(c)).collect(),
            GateMode::ConstantOne => vec![1.0; n],
        };
        let bin_ids = ripple_ids(&cosines);
        let rows: Vec<u32> = bin_ids.iter().map(|&b| ripple_row(b)).collect();
        let embs: Vec<Vec<f64>> = rows.iter().map(|&r| self.ripple.lookup(r).to_vec()).collect();

        let n_s: f64 = weights.iter().sum();
        let s_max = weights.iter().fold(0.0_f64, |a, &b| a.max(b));
        let hrn_feature_id = binning(n_s, 1.0);

        let (i_s, sumbin_row) = match self.aggregation {
            Aggregation::Weighted => {
                let refs: Vec<&[f64]> = embs.iter().map(|e| e.as_slice()).collect();
                (weight_aggregation(&weights, &refs, self.ctr_dim), None)
            }
            Aggregation::SumBinning => {
                let row = self.sumbin_row(hrn_feature_id);
                let table = self.sumbin.as_ref().expect("sumbin table allocated");
                (table.lookup(row).to_vec(), Some(row))
            }
        };

        let (g_s, gru_cache) = if self.use_gru {
            let gru = self.gru.as_ref().expect("gru allocated");
            let h0 = vec![0.0; self.gru_hidden];
            let (_, cache) = gru.forward(&embs, &h0);
            (GruCell::final_state(&cache).to_vec(), Some(cache))
        } else {
            (Vec::new(), None)
        };

        let mut i_srn = i_s.clone();
        i_srn.extend_from_slice(&g_s);

        let output = RetargetOutput {
            s_max,
            n_s,
            hrn_feature_id,
            i_s,
            g_s,
            i_srn,
            cosines: cosines.clone(),
            weights: weights.clone(),
            ripple_bin_ids: bin_ids,
        };
        let cache = RetargetCache {
            target_vec: target_vec.to_vec(),
            seq_vecs: seq_vecs.to_vec(),
            cosines,
            weights,
            ripple_rows: rows,
            ripple_embs: embs,
            gru_cache,
            sumbin_row,
        };
        (output, cache)
    }

    /// Accumulates gradients for the gate, ripple table, GRU, and (optionally)
    /// the similarity-source vectors from a gradient on `i_srn`.
    pub fn backward(
        &mut self,
        cache: &RetargetCache,
        d_i_srn: &[f64],
        want_input_grads: bool,
    ) -> Option<InputGrads> {
        debug_assert_eq!(d_i_srn.len(), self.output_dim());
        let n = cache.seq_vecs.len();
        let d_i_s = &d_i_srn[..self.ctr_dim];
        let d_g_s = &d_i_srn[self.ctr_dim..];

        // Evolution branch first: gradients into each ripple embedding.
        let mut d_embs: Vec<Vec<f64>> = vec![vec![0.0; self.ctr_dim]; n];
        if self.use_gru && n > 0 {
            let gru = self.gru.as_mut().expect("gru allocated");
            let cache = cache.gru_cache.as_ref().expect("gru cache present");
            d_embs = gru.backward_from_final(cache, d_g_s);
        }

        // Aggregation branch.
        let mut d_weights = vec![0.0; n];
        match self.aggregation {
            Aggregation::Weighted => {
                for j in 0..n {
                    d_weights[j] = dot(d_i_s, &cache.ripple_embs[j]);
                    axpy(cache.weights[j], d_i_s, &mut d_embs[j]);
                }
            }
            Aggregation::SumBinning => {
                if let Some(row) = cache.sumbin_row {
                    let table = self.sumbin.as_mut().expect("sumbin table allocated");
                    table.accumulate_grad(row, d_i_s);
                }
                // binning(sum s, 1) is piecewise constant: no weight grads.
            }
        }

        for j in 0..n {
            self.ripple.accumulate_grad(cache.ripple_rows[j], &d_embs[j]);
        }

        // Gate and similarity-source gradients.
        let mut grads = want_input_grads.then(|| InputGrads {
            d_target: vec![0.0; cache.target_vec.len()],
            d_seq: cache.seq_vecs.iter().map(|v| vec![0.0; v.len()]).collect(),
        });
        if self.gate_mode == GateMode::Learned {
            for j in 0..n {
                if d_weights[j] == 0.0 {
                    continue;
                }
                let d_cos = self.gate.backward(cache.cosines[j], d_weights[j]);
                if let Some(g) = grads.as_mut() {
                    cosine_backward(
                        &cache.target_vec,
                        &cache.seq_vecs[j],
                        d_cos,
                        &mut g.d_target,
                        &mut g.d_seq[j],
                    );
                }
            }
        }
        grads
    }

    pub fn adagrad_step(&mut self, cfg: &AdagradConfig) {
        self.gate.adagrad_step(cfg);
        self.ripple.adagrad_step(cfg);
        if let Some(gru) = self.gru.as_mut() {
            gru.adagrad_step(cfg);
        }
        if let Some(t) = self.sumbin.as_mut() {
            t.adagrad_step(cfg);
        }
    }

    pub fn zero_grad(&mut self) {
        self.gate.zero_grad();
        self.ripple.zero_grad();
        if let Some(gru) = self.gru.as_mut() {
            gru.zero_grad();
        }
        if let Some(t) = self.sumbin.as_mut() {
            t.zero_grad();
        }
    }

    pub fn scale_grad(&mut self, s: f64) {
        self.gate.scale_grad(s);
        self.ripple.scale_grad(s);
        if let Some(gru) = self.gru.as_mut() {
            gru.scale_grad(s);
        }
        if let Some(t) = self.sumbin.as_mut() {
            t.scale_grad(s);
        }
    }

    pub fn param_count(&self) -> usize {
        self.gate.param_count()
            + self.ripple.param_count()
            + self.gru.as_ref().map_or(0, GruCell::param_count)
            + self.sumbin.as_ref().map_or(0, EmbeddingTable::param_count)
    }

    pub fn read_params(&self, out: &mut Vec<f64>) {
        self.gate.read_params(out);
        self.ripple.read_params(out);
        if let Some(gru) = self.gru.as_ref() {
            gru.read_params(out);
        }
        if let Some(t) = self.sumbin.as_ref() {
            t.read_params(out);
        }
    }

    pub fn write_params(&mut self, vals: &mut impl Iterator<Item = f64>) {
        self.gate.write_params(vals);
        self.ripple.write_params(vals);
        if let Some(gru) = self.gru.as_mut() {
            gru.write_params(vals);
        }
        if let Some(t) = self.sumbin.as_mut() {
            t.write_params(vals);
        }
    }

    pub fn read_grads(&self, out: &mut Vec<f64>) {
        self.gate.read_grads(out);
        self.ripple.read_grads(out);
        if let Some(gru) = self.gru.as_ref() {
            gru.read_grads(out);
        }
        if let Some(t) = self.sumbin.as_ref() {
            t.read_grads(out);
        }
    }

    pub fn grad_l2_sq(&self) -> f64 {
        self.gate.grad_l2_sq()
            + self.ripple.grad_l2_sq()
            + self.gru.as_ref().map_or(0.0, GruCell::grad_l2_sq)
            + self.sumbin.as_ref().map_or(0.0, EmbeddingTable::grad_l2_sq)
    }
}
