use serde::{Deserialize, Serialize};

use crate::data::events::{Behavior, ClickEvent, DenseId, SeqType};

/// Typed graph nodes. Side-info types index the arrays below in the order
/// brand, shop, category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeType {
    User,
    Item,
    Brand,
    Shop,
    Category,
}

pub const SIDE_TYPES: [NodeType; 3] = [NodeType::Brand, NodeType::Shop, NodeType::Category];

impl NodeType {
    pub fn name(self) -> &'static str {
        match self {
            NodeType::User => "user",
            NodeType::Item => "item",
            NodeType::Brand => "brand",
            NodeType::Shop => "shop",
            NodeType::Category => "category",
        }
    }

    pub fn parse(s: &str) -> Option<NodeType> {
        match s {
            "user" => Some(NodeType::User),
            "item" => Some(NodeType::Item),
            "brand" => Some(NodeType::Brand),
            "shop" => Some(NodeType::Shop),
            "category" => Some(NodeType::Category),
            _ => None,
        }
    }

    pub fn side_index(self) -> Option<usize> {
        match self {
            NodeType::Brand => Some(0),
            NodeType::Shop => Some(1),
            NodeType::Category => Some(2),
            _ => None,
        }
    }

    pub fn from_seq(t: SeqType) -> NodeType {
        match t {
            SeqType::Item => NodeType::Item,
            SeqType::Brand => NodeType::Brand,
            SeqType::Shop => NodeType::Shop,
            SeqType::Category => NodeType::Category,
        }
    }
}

/// Undirected edge kinds of the click graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeKind {
    UserItem,
    UserSide(usize),
    ItemItem,
    ItemSide(usize),
}

/// Node-count bounds per type (dense ids are 1-based; adjacency vectors are
/// sized `count + 1` with slot 0 unused).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GraphSizes {
    pub n_users: usize,
    pub n_items: usize,
    pub n_side: [usize; 3],
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GraphStats {
    pub n_users: usize,
    pub n_items: usize,
    pub n_brands: usize,
    pub n_shops: usize,
    pub n_categories: usize,
    pub user_item_edges: usize,
    pub user_side_edges: usize,
    pub item_item_edges: usize,
    pub item_side_edges: usize,
}

impl GraphStats {
    pub fn total_nodes(&self) -> usize {
        self.n_users + self.n_items + self.n_brands + self.n_shops + self.n_categories
    }

    pub fn render_text(&self) -> String {
        format!(
            "nodes: user {} item {} brand {} shop {} category {}\n\
             edges: user-item {} user-side {} item-item {} item-side {}\n",
            self.n_users,
            self.n_items,
            self.n_brands,
            self.n_shops,
            self.n_categories,
            self.user_item_edges,
            self.user_side_edges,
            self.item_item_edges,
            self.item_side_edges
        )
    }
}

/// Maximum inter-click gap for an item-item edge between items adjacent in a
/// user's click sequence.
pub const ITEM_ITEM_GAP_SECS: i64 = 60;

/// Typed adjacency lists; all edges undirected, unweighted, deduplicated.
#[derive(Debug, Clone)]
pub struct HeteroGraph {
    pub sizes: GraphSizes,
    user_items: Vec<Vec<DenseId>>,
    item_users: Vec<Vec<DenseId>>,
    user_side: [Vec<Vec<DenseId>>; 3],
    side_users: [Vec<Vec<DenseId>>; 3],
    item_item: Vec<Vec<DenseId>>,
    item_side: [Vec<Vec<DenseId>>; 3],
    side_items: [Vec<Vec<DenseId>>; 3],
}

fn push_edge(adj: &mut [Vec<DenseId>], from: DenseId, to: DenseId) {
    adj[from as usize].push(to);
}

fn dedup_all(adj: &mut [Vec<DenseId>]) {
    for list in adj {
        list.sort_unstable();
        list.dedup();
    }
}

impl HeteroGraph {
    /// Builds the graph from training-split click events. Edge rules:
    /// user-item for every click; user-side for every clicked item's side
    /// info; item-item for items adjacent in a user's click sequence within
    /// [`ITEM_ITEM_GAP_SECS`]; item-side for every item carrying that side
    /// info. Display events never contribute. Set semantics make the edge
    /// set independent of event ordering.
    pub fn build(events: &[ClickEvent], sizes: GraphSizes) -> HeteroGraph {
        let empty = |n: usize| -> Vec<Vec<DenseId>> { vec![Vec::new(); n + 1] };
        let mut g = HeteroGraph {
            sizes,
            user_items: empty(sizes.n_users),
            item_users: empty(sizes.n_items),
            user_side: std::array::from_fn(|_| empty(sizes.n_users)),
            side_users: std::array::from_fn(|k| empty(sizes.n_side[k])),
            item_item: empty(sizes.n_items),
            item_side: std::array::from_fn(|_| empty(sizes.n_items)),
            side_items: std::array::from_fn(|k| empty(sizes.n_side[k])),
        };

        // Sort a working copy so adjacency-in-sequence is well defined
        // regardless of input order.
        let mut clicks: Vec<&ClickEvent> = events
            .iter()
            .filter(|e| e.behavior == Behavior::Click)
            .collect();
        clicks.sort_by_key(|e| (e.user_id, e.timestamp, e.item_id));

        let mut prev: Option<&ClickEvent> = None;
        for e in &clicks {
            push_edge(&mut g.user_items, e.user_id, e.item_id);
            push_edge(&mut g.item_users, e.item_id, e.user_id);
            for (k, side) in [e.brand_id, e.shop_id, e.category_id].into_iter().enumerate() {
                if let Some(s) = side {
                    push_edge(&mut g.user_side[k], e.user_id, s);
                    push_edge(&mut g.side_users[k], s, e.user_id);
                    push_edge(&mut g.item_side[k], e.item_id, s);
                    push_edge(&mut g.side_items[k], s, e.item_id);
                }
            }
            if let Some(p) = prev {
                if p.user_id == e.user_id
                    && e.timestamp - p.timestamp <= ITEM_ITEM_GAP_SECS
                    && p.item_id != e.item_id
                {
                    push_edge(&mut g.item_item, p.item_id, e.item_id);
                    push_edge(&mut g.item_item, e.item_id, p.item_id);
                }
            }
            prev = Some(e);
        }

        dedup_all(&mut g.user_items);
        dedup_all(&mut g.item_users);
        dedup_all(&mut g.item_item);
        for k in 0..3 {
            dedup_all(&mut g.user_side[k]);
            dedup_all(&mut g.side_users[k]);
            dedup_all(&mut g.item_side[k]);
            dedup_all(&mut g.side_items[k]);
        }
        g
    }

    /// Neighbors of `(node_type, id)` of type `to`; empty if the pair is not
    /// connected by any edge kind.
    pub fn neighbors(&self, node_type: NodeType, id: DenseId, to: NodeType) -> &[DenseId] {
        static EMPTY: Vec<DenseId> = Vec::new();
        let idx = id as usize;
        let list = match (node_type, to) {
            (NodeType::User, NodeType::Item) => self.user_items.get(idx),
            (NodeType::Item, NodeType::User) => self.item_users.get(idx),
            (NodeType::Item, NodeType::Item) => self.item_item.get(idx),
            (NodeType::User, side) if side.side_index().is_some() => {
                self.user_side[side.side_index().unwrap()].get(idx)
            }
            (side, NodeType::User) if side.side_index().is_some() => {
                self.side_users[side.side_index().unwrap()].get(idx)
            }
            (NodeType::Item, side) if side.side_index().is_some() => {
                self.item_side[side.side_index().unwrap()].get(idx)
            }
            (side, NodeType::Item) if side.side_index().is_some() => {
                self.side_items[side.side_index().unwrap()].get(idx)
            }
            _ => None,
        };
        list.unwrap_or(&EMPTY)
    }

    /// All user-item edges (the link-prediction positives), sorted.
    pub fn user_item_edges(&self) -> Vec<(DenseId, DenseId)> {
        let mut edges = Vec::new();
        for (user, items) in self.user_items.iter().enumerate().skip(1) {
            for &item in items {
                edges.push((user as DenseId, item));
            }
        }
        edges
    }

    pub fn user_clicked(&self, user: DenseId, item: DenseId) -> bool {
        self.user_items
            .get(user as usize)
            .is_some_and(|items| items.binary_search(&item).is_ok())
    }

    pub fn node_count(&self, t: NodeType) -> usize {
        match t {
            NodeType::User => self.sizes.n_users,
            NodeType::Item => self.sizes.n_items,
            side => self.sizes.n_side[side.side_index().unwrap()],
        }
    }

    pub fn stats(&self) -> GraphStats {
        let count = |adj: &[Vec<DenseId>]| adj.iter().map(Vec::len).sum::<usize>();
        GraphStats {
            n_users: self.sizes.n_users,
            n_items: self.sizes.n_items,
            n_brands: self.sizes.n_side[0],
            n_shops: self.sizes.n_side[1],
            n_categories: self.sizes.n_side[2],
            user_item_edges: count(&self.user_items),
            user_side_edges: (0..3).map(|k| count(&self.user_side[k])).sum(),
            // item-item is stored in both directions; count each edge once
            item_item_edges: count(&self.item_item) / 2,
            item_side_edges: (0..3).map(|k| count(&self.item_side[k])).sum(),
        }
    }

    /// Serializes edges as TSV lines `kind<TAB>src<TAB>dst` (one line per
    /// undirected edge).
    pub fn to_edge_lines(&self) -> String {
        let mut out = String::new();
        for (user, items) in self.user_items.iter().enumerate().skip(1) {
            for &item in items {
                out.push_str(&format!("user-item\t{user}\t{item}\n"));
            }
        }
        for (k, name) in ["brand", "shop", "category"].iter().enumerate() {
            for (user, sides) in self.user_side[k].iter().enumerate().skip(1) {
                for &s in sides {
                    out.push_str(&format!("user-{name}\t{user}\t{s}\n"));
                }
            }
            for (item, sides) in self.item_side[k].iter().enumerate().skip(1) {
                for &s in sides {
                    out.push_str(&format!("item-{name}\t{item}\t{s}\n"));
                }
            }
        }
        for (a, items) in self.item_item.iter().enumerate().skip(1) {
            for &b in items {
                if (a as DenseId) < b {
                    out.push_str(&format!("item-item\t{a}\t{b}\n"));
                }
            }
        }
        out
    }
}
