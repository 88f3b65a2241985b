use rand::seq::index::sample;
use rand::Rng;

use crate::data::events::DenseId;
use crate::error::{Result, SrnError};
use crate::graphembed::graph::{HeteroGraph, NodeType, SIDE_TYPES};

/// A 2- or 3-hop node-type template guiding neighborhood sampling, e.g.
/// `item -> category -> item`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MetaPath {
    types: Vec<NodeType>,
}

impl MetaPath {
    pub fn new(types: Vec<NodeType>) -> Result<MetaPath> {
        if !(2..=3).contains(&types.len()) {
            return Err(SrnError::Config(format!(
                "metapath must have 2 or 3 node types, got {}",
                types.len()
            )));
        }
        for pair in types.windows(2) {
            if !connected(pair[0], pair[1]) {
                return Err(SrnError::Config(format!(
                    "no edge kind connects {} to {}",
                    pair[0].name(),
                    pair[1].name()
                )));
            }
        }
        Ok(MetaPath { types })
    }

    pub fn parse(spec: &str) -> Result<MetaPath> {
        let types = spec
            .split('-')
            .map(|s| {
                NodeType::parse(s.trim())
                    .ok_or_else(|| SrnError::Config(format!("unknown node type {s:?} in metapath")))
            })
            .collect::<Result<Vec<_>>>()?;
        MetaPath::new(types)
    }

    pub fn start(&self) -> NodeType {
        self.types[0]
    }

    pub fn terminal(&self) -> NodeType {
        *self.types.last().unwrap()
    }

    pub fn types(&self) -> &[NodeType] {
        &self.types
    }

    pub fn name(&self) -> String {
        self.types
            .iter()
            .map(|t| t.name())
            .collect::<Vec<_>>()
            .join("-")
    }
}

/// Whether an edge kind connects two node types.
fn connected(a: NodeType, b: NodeType) -> bool {
    use NodeType::{Item, User};
    match (a, b) {
        (User, Item) | (Item, User) | (Item, Item) => true,
        (User, s) | (s, User) if s.side_index().is_some() => true,
        (Item, s) | (s, Item) if s.side_index().is_some() => true,
        _ => false,
    }
}

/// The default metapath set: `user -> side -> item`, `item -> item`,
/// `item -> side -> item`, and `side -> item` for every available side type.
/// User-item hops are deliberately absent: the user-item edge is the link
/// prediction label.
pub fn default_metapaths(available_sides: &[NodeType]) -> Vec<MetaPath> {
    let mut paths = Vec::new();
    for &s in SIDE_TYPES.iter().filter(|s| available_sides.contains(s)) {
        paths.push(MetaPath::new(vec![NodeType::User, s, NodeType::Item]).unwrap());
    }
    paths.push(MetaPath::new(vec![NodeType::Item, NodeType::Item]).unwrap());
    for &s in SIDE_TYPES.iter().filter(|s| available_sides.contains(s)) {
        paths.push(MetaPath::new(vec![NodeType::Item, s, NodeType::Item]).unwrap());
    }
    for &s in SIDE_TYPES.iter().filter(|s| available_sides.contains(s)) {
        paths.push(MetaPath::new(vec![s, NodeType::Item]).unwrap());
    }
    paths
}

/// Samples terminal-type neighbors of `node` along `path`. At each hop the
/// frontier is the sorted, deduplicated union of the previous frontier's
/// neighbors, uniformly subsampled without replacement to at most `fanout`
/// nodes. Returns at most `fanout` terminal nodes (fewer when the
/// neighborhood is small), sorted.
pub fn sample_neighbors(
    graph: &HeteroGraph,
    node: (NodeType, DenseId),
    path: &MetaPath,
    fanout: usize,
    rng: &mut impl Rng,
) -> Vec<DenseId> {
    debug_assert_eq!(node.0, path.start(), "metapath must start at the node's type");
    let mut frontier = vec![node.1];
    for pair in path.types.windows(2) {
        let mut gathered: Vec<DenseId> = Vec::new();
        for &n in &frontier {
            gathered.extend_from_slice(graph.neighbors(pair[0], n, pair[1]));
        }
        gathered.sort_unstable();
        gathered.dedup();
        if gathered.len() > fanout {
            let picked = sample(rng, gathered.len(), fanout);
            let mut chosen: Vec<DenseId> = picked.iter().map(|i| gathered[i]).collect();
            chosen.sort_unstable();
            gathered = chosen;
        }
        frontier = gathered;
        if frontier.is_empty() {
            break;
        }
    }
    frontier
}
