use rand::Rng;

use crate::data::events::DenseId;
use crate::nncore::adagrad::{adagrad_update, AdagradConfig};
use crate::nncore::dense::{Activation, DenseCache, DenseLayer};
use crate::nncore::embedding::EmbeddingTable;
use crate::nncore::init::glorot_uniform;
use crate::nncore::matrix::{axpy, dot};
use crate::graphembed::graph::{GraphSizes, NodeType, SIDE_TYPES};
use crate::graphembed::metapath::MetaPath;

/// Base embedding tables per node type, dim `D`. Row 0 of each table is the
/// unused OOV slot; graph nodes occupy rows 1..=count.
#[derive(Debug, Clone)]
pub struct GraphEmbeddingDict {
    pub dim: usize,
    user: EmbeddingTable,
    item: EmbeddingTable,
    side: [EmbeddingTable; 3],
}

impl GraphEmbeddingDict {
    pub fn new(sizes: GraphSizes, dim: usize, rng: &mut impl Rng) -> Self {
        GraphEmbeddingDict {
            dim,
            user: EmbeddingTable::new(sizes.n_users + 1, dim, rng),
            item: EmbeddingTable::new(sizes.n_items + 1, dim, rng),
            side: [
                EmbeddingTable::new(sizes.n_side[0] + 1, dim, rng),
                EmbeddingTable::new(sizes.n_side[1] + 1, dim, rng),
                EmbeddingTable::new(sizes.n_side[2] + 1, dim, rng),
            ],
        }
    }

    pub fn zeroed(sizes: GraphSizes, dim: usize) -> Self {
        GraphEmbeddingDict {
            dim,
            user: EmbeddingTable::zeroed(sizes.n_users + 1, dim),
            item: EmbeddingTable::zeroed(sizes.n_items + 1, dim),
            side: [
                EmbeddingTable::zeroed(sizes.n_side[0] + 1, dim),
                EmbeddingTable::zeroed(sizes.n_side[1] + 1, dim),
                EmbeddingTable::zeroed(sizes.n_side[2] + 1, dim),
            ],
        }
    }

    pub fn table(&self, t: NodeType) -> &EmbeddingTable {
        match t {
            NodeType::User => &self.user,
            NodeType::Item => &self.item,
            side => &self.side[side.side_index().unwrap()],
        }
    }

    pub fn table_mut(&mut self, t: NodeType) -> &mut EmbeddingTable {
        match t {
            NodeType::User => &mut self.user,
            NodeType::Item => &mut self.item,
            side => &mut self.side[side.side_index().unwrap()],
        }
    }

    /// Total node count across all types (excluding the OOV rows).
    pub fn total_nodes(&self) -> usize {
        self.user.rows() - 1
            + self.item.rows() - 1
            + self.side.iter().map(|t| t.rows() - 1).sum::<usize>()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HanConfig {
    /// Embedding and projection dimension.
    pub dim: usize,
    /// Semantic-attention hidden dimension.
    pub attn_dim: usize,
}

impl Default for HanConfig {
    fn default() -> Self {
        HanConfig { dim: 32, attn_dim: 32 }
    }
}

/// Sampled metapath neighborhoods for one node: `(metapath index, terminal
/// node ids)`. Empty neighbor lists are allowed and skipped.
pub type Neighborhoods = Vec<(usize, Vec<DenseId>)>;

/// Two-level attention aggregator over metapath neighborhoods.
///
/// Node level: per metapath, attention over the neighbors' type-projected
/// embeddings scored by a learned vector on `[node || neighbor]` projections.
/// Semantic level: attention over the per-metapath summaries scored by a
/// learned vector on a tanh projection. A node whose every neighborhood is
/// empty falls back to its own base embedding.
#[derive(Debug, Clone)]
pub struct HanModel {
    pub config: HanConfig,
    pub dict: GraphEmbeddingDict,
    pub metapaths: Vec<MetaPath>,
    proj: [DenseLayer; 5], // indexed by node type order: user, item, brand, shop, category
    node_attn: Vec<Vec<f64>>,
    node_attn_grad: Vec<Vec<f64>>,
    node_attn_accum: Vec<Vec<f64>>,
    sem: DenseLayer,
    sem_q: Vec<f64>,
    sem_q_grad: Vec<f64>,
    sem_q_accum: Vec<f64>,
}

fn type_slot(t: NodeType) -> usize {
    match t {
        NodeType::User => 0,
        NodeType::Item => 1,
        NodeType::Brand => 2,
        NodeType::Shop => 3,
        NodeType::Category => 4,
    }
}

/// Per-metapath forward state.
#[derive(Debug, Clone)]
struct PathCache {
    path_idx: usize,
    slot: usize,
    term_type: NodeType,
    neighbors: Vec<DenseId>,
    nb_caches: Vec<DenseCache>,
    alphas: Vec<f64>,
    z: Vec<f64>,
    sem_cache: DenseCache,
}

#[derive(Debug, Clone)]
pub struct HanCache {
    node: (NodeType, DenseId),
    fallback: bool,
    node_proj: Option<DenseCache>,
    paths: Vec<PathCache>,
    betas: Vec<f64>,
}

fn softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// d(softmax)/d(scores) applied to an upstream gradient on the outputs.
fn softmax_backward(probs: &[f64], d_out: &[f64]) -> Vec<f64> {
    let inner: f64 = probs.iter().zip(d_out).map(|(p, d)| p * d).sum();
    probs
        .iter()
        .zip(d_out)
        .map(|(p, d)| p * (d - inner))
        .collect()
}

impl HanModel {
    pub fn new(
        config: HanConfig,
        sizes: GraphSizes,
        metapaths: Vec<MetaPath>,
        rng: &mut impl Rng,
    ) -> Self {
        let dim = config.dim;
        let dict = GraphEmbeddingDict::new(sizes, dim, rng);
        let proj = std::array::from_fn(|_| DenseLayer::new(dim, dim, Activation::Identity, rng));
        let node_attn: Vec<Vec<f64>> = metapaths
            .iter()
            .map(|_| (0..2 * dim).map(|_| glorot_uniform(rng, 2 * dim, 1)).collect())
            .collect();
        let zeros_like: Vec<Vec<f64>> = node_attn.iter().map(|a| vec![0.0; a.len()]).collect();
        let sem = DenseLayer::new(dim, config.attn_dim, Activation::Tanh, rng);
        let sem_q: Vec<f64> = (0..config.attn_dim)
            .map(|_| glorot_uniform(rng, config.attn_dim, 1))
            .collect();
        HanModel {
            config,
            dict,
            metapaths,
            proj,
            node_attn_grad: zeros_like.clone(),
            node_attn_accum: zeros_like,
            node_attn,
            sem,
            sem_q_grad: vec![0.0; config.attn_dim],
            sem_q_accum: vec![0.0; config.attn_dim],
            sem_q,
        }
    }

    /// Metapath indices applicable to a node type.
    pub fn paths_for(&self, t: NodeType) -> Vec<usize> {
        self.metapaths
            .iter()
            .enumerate()
            .filter(|(_, p)| p.start() == t)
            .map(|(i, _)| i)
            .collect()
    }

    /// Fused embedding of a node given its sampled neighborhoods.
    pub fn forward(&self, node: (NodeType, DenseId), neighborhoods: &Neighborhoods) -> (Vec<f64>, HanCache) {
        let dim = self.config.dim;
        let nonempty: Vec<&(usize, Vec<DenseId>)> = neighborhoods
            .iter()
            .filter(|(_, nbs)| !nbs.is_empty())
            .collect();
        if nonempty.is_empty() {
            let base = self.dict.table(node.0).lookup(node.1).to_vec();
            return (
                base,
                HanCache {
                    node,
                    fallback: true,
                    node_proj: None,
                    paths: Vec::new(),
                    betas: Vec::new(),
                },
            );
        }

        let node_proj = self.proj[type_slot(node.0)]
            .forward(self.dict.table(node.0).lookup(node.1));

        let mut paths = Vec::with_capacity(nonempty.len());
        let mut sem_scores = Vec::with_capacity(nonempty.len());
        for &&(path_idx, ref neighbors) in &nonempty {
            let path = &self.metapaths[path_idx];
            let term_type = path.terminal();
            let slot = type_slot(term_type);
            let attn = &self.node_attn[path_idx];
            let mut nb_caches = Vec::with_capacity(neighbors.len());
            let mut scores = Vec::with_capacity(neighbors.len());
            for &nb in neighbors {
                let cache = self.proj[slot].forward(self.dict.table(term_type).lookup(nb));
                let score =
                    dot(&attn[..dim], &node_proj.output) + dot(&attn[dim..], &cache.output);
                scores.push(score);
                nb_caches.push(cache);
            }
            let alphas = softmax(&scores);
            let mut z = vec![0.0; dim];
            for (a, c) in alphas.iter().zip(&nb_caches) {
                axpy(*a, &c.output, &mut z);
            }
            let sem_cache = self.sem.forward(&z);
            sem_scores.push(dot(&self.sem_q, &sem_cache.output));
            paths.push(PathCache {
                path_idx,
                slot,
                term_type,
                neighbors: neighbors.clone(),
                nb_caches,
                alphas,
                z,
                sem_cache,
            });
        }

        let betas = softmax(&sem_scores);
        let mut fused = vec![0.0; dim];
        for (b, p) in betas.iter().zip(&paths) {
            axpy(*b, &p.z, &mut fused);
        }
        (
            fused,
            HanCache {
                node,
                fallback: false,
                node_proj: Some(node_proj),
                paths,
                betas,
            },
        )
    }

    /// Accumulates gradients (projections, attention vectors, semantic layer,
    /// and base embeddings) from a gradient on the fused vector.
    pub fn backward(&mut self, cache: &HanCache, d_fused: &[f64]) {
        let dim = self.config.dim;
        if cache.fallback {
            self.dict
                .table_mut(cache.node.0)
                .accumulate_grad(cache.node.1, d_fused);
            return;
        }
        let node_proj = cache.node_proj.as_ref().expect("non-fallback cache");

        // Semantic level: fused = sum_k beta_k z_k, s_k = q . tanh(W z_k + b).
        let mut d_z: Vec<Vec<f64>> = cache.paths.iter().map(|_| vec![0.0; dim]).collect();
        let d_betas: Vec<f64> = cache.paths.iter().map(|p| dot(d_fused, &p.z)).collect();
        for k in 0..cache.paths.len() {
            axpy(cache.betas[k], d_fused, &mut d_z[k]);
        }
        let d_sem_scores = softmax_backward(&cache.betas, &d_betas);
        for (k, p) in cache.paths.iter().enumerate() {
            let ds = d_sem_scores[k];
            if ds != 0.0 {
                axpy(ds, &p.sem_cache.output, &mut self.sem_q_grad);
                let d_t: Vec<f64> = self.sem_q.iter().map(|q| ds * q).collect();
                self.sem.backward(&p.sem_cache, &d_t, &mut d_z[k]);
            }
        }

        // Node level per metapath.
        let mut d_node_proj = vec![0.0; dim];
        for (k, p) in cache.paths.iter().enumerate() {
            let path_idx = p.path_idx;
            let d_alphas: Vec<f64> = p
                .nb_caches
                .iter()
                .map(|c| dot(&d_z[k], &c.output))
                .collect();
            let d_scores = softmax_backward(&p.alphas, &d_alphas);
            let attn = self.node_attn[path_idx].clone();
            for (j, c) in p.nb_caches.iter().enumerate() {
                // z_k += alpha_j * p_j
                let mut d_p_nb: Vec<f64> = d_z[k].iter().map(|d| d * p.alphas[j]).collect();
                // score_j = attn[..dim] . p_node + attn[dim..] . p_j
                let ds = d_scores[j];
                if ds != 0.0 {
                    let g = &mut self.node_attn_grad[path_idx];
                    for i in 0..dim {
                        g[i] += ds * node_proj.output[i];
                        g[dim + i] += ds * c.output[i];
                        d_node_proj[i] += ds * attn[i];
                        d_p_nb[i] += ds * attn[dim + i];
                    }
                }
                let mut d_h = vec![0.0; dim];
                self.proj[p.slot].backward(c, &d_p_nb, &mut d_h);
                self.dict
                    .table_mut(p.term_type)
                    .accumulate_grad(p.neighbors[j], &d_h);
            }
        }

        let mut d_h_node = vec![0.0; dim];
        self.proj[type_slot(cache.node.0)].backward(node_proj, &d_node_proj, &mut d_h_node);
        self.dict
            .table_mut(cache.node.0)
            .accumulate_grad(cache.node.1, &d_h_node);
    }

    pub fn adagrad_step(&mut self, cfg: &AdagradConfig) {
        for t in [NodeType::User, NodeType::Item, NodeType::Brand, NodeType::Shop, NodeType::Category] {
            self.dict.table_mut(t).adagrad_step(cfg);
        }
        for layer in &mut self.proj {
            layer.adagrad_step(cfg);
        }
        for k in 0..self.node_attn.len() {
            adagrad_update(
                &mut self.node_attn[k],
                &mut self.node_attn_accum[k],
                &self.node_attn_grad[k],
                cfg,
            );
        }
        self.sem.adagrad_step(cfg);
        adagrad_update(&mut self.sem_q, &mut self.sem_q_accum, &self.sem_q_grad, cfg);
    }

    pub fn zero_grad(&mut self) {
        for t in [NodeType::User, NodeType::Item, NodeType::Brand, NodeType::Shop, NodeType::Category] {
            self.dict.table_mut(t).zero_grad();
        }
        for layer in &mut self.proj {
            layer.zero_grad();
        }
        for g in &mut self.node_attn_grad {
            g.fill(0.0);
        }
        self.sem.zero_grad();
        self.sem_q_grad.fill(0.0);
    }

    pub fn scale_grad(&mut self, s: f64) {
        for t in [NodeType::User, NodeType::Item, NodeType::Brand, NodeType::Shop, NodeType::Category] {
            self.dict.table_mut(t).scale_grad(s);
        }
        for layer in &mut self.proj {
            layer.scale_grad(s);
        }
        for g in &mut self.node_attn_grad {
            for v in g {
                *v *= s;
            }
        }
        self.sem.scale_grad(s);
        for v in &mut self.sem_q_grad {
            *v *= s;
        }
    }

    pub fn grad_l2_sq(&self) -> f64 {
        let mut total = 0.0;
        for t in [NodeType::User, NodeType::Item, NodeType::Brand, NodeType::Shop, NodeType::Category] {
            total += self.dict.table(t).grad_l2_sq();
        }
        for layer in &self.proj {
            total += layer.grad_l2_sq();
        }
        for g in &self.node_attn_grad {
            total += g.iter().map(|v| v * v).sum::<f64>();
        }
        total += self.sem.grad_l2_sq();
        total += self.sem_q_grad.iter().map(|v| v * v).sum::<f64>();
        total
    }

    pub fn param_count(&self) -> usize {
        let mut total = 0;
        for t in [NodeType::User, NodeType::Item, NodeType::Brand, NodeType::Shop, NodeType::Category] {
            total += self.dict.table(t).param_count();
        }
        for layer in &self.proj {
            total += layer.param_count();
        }
        total += self.node_attn.iter().map(Vec::len).sum::<usize>();
        total += self.sem.param_count();
        total += self.sem_q.len();
        total
    }

    pub fn read_params(&self, out: &mut Vec<f64>) {
        for t in [NodeType::User, NodeType::Item, NodeType::Brand, NodeType::Shop, NodeType::Category] {
            self.dict.table(t).read_params(out);
        }
        for layer in &self.proj {
            layer.read_params(out);
        }
        for a in &self.node_attn {
            out.extend_from_slice(a);
        }
        self.sem.read_params(out);
        out.extend_from_slice(&self.sem_q);
    }

    pub fn write_params(&mut self, vals: &mut impl Iterator<Item = f64>) {
        for t in [NodeType::User, NodeType::Item, NodeType::Brand, NodeType::Shop, NodeType::Category] {
            self.dict.table_mut(t).write_params(vals);
        }
        for layer in &mut self.proj {
            layer.write_params(vals);
        }
        for a in &mut self.node_attn {
            for v in a {
                *v = vals.next().expect("param stream exhausted");
            }
        }
        self.sem.write_params(vals);
        for v in &mut self.sem_q {
            *v = vals.next().expect("param stream exhausted");
        }
    }

    pub fn read_grads(&self, out: &mut Vec<f64>) {
        for t in [NodeType::User, NodeType::Item, NodeType::Brand, NodeType::Shop, NodeType::Category] {
            self.dict.table(t).read_grads(out);
        }
        for layer in &self.proj {
            layer.read_grads(out);
        }
        for g in &self.node_attn_grad {
            out.extend_from_slice(g);
        }
        self.sem.read_grads(out);
        out.extend_from_slice(&self.sem_q_grad);
    }
}
