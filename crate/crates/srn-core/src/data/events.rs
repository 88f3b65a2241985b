use serde::{Deserialize, Serialize};

/// Raw external entity id as it appears in a log file.
pub type RawId = u64;
/// Dense vocabulary id. Row 0 of every embedding table is reserved for
/// out-of-vocabulary lookups, so dense ids start at 1.
pub type DenseId = u32;

/// Behavior of one log line. A `Click` is a displayed-and-clicked impression,
/// a `Display` is a displayed-but-not-clicked one. Click-only logs contain
/// only `Click` rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Behavior {
    Click,
    Display,
}

/// Behavior-sequence (and side-info) entity types.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum SeqType {
    Item,
    Brand,
    Shop,
    Category,
}

pub const ALL_SEQ_TYPES: [SeqType; 4] = [SeqType::Item, SeqType::Brand, SeqType::Shop, SeqType::Category];

impl SeqType {
    pub fn name(self) -> &'static str {
        match self {
            SeqType::Item => "item",
            SeqType::Brand => "brand",
            SeqType::Shop => "shop",
            SeqType::Category => "category",
        }
    }

    pub fn parse(s: &str) -> Option<SeqType> {
        match s {
            "item" => Some(SeqType::Item),
            "brand" => Some(SeqType::Brand),
            "shop" => Some(SeqType::Shop),
            "category" => Some(SeqType::Category),
            _ => None,
        }
    }

    pub fn code(self) -> u8 {
        match self {
            SeqType::Item => 0,
            SeqType::Brand => 1,
            SeqType::Shop => 2,
            SeqType::Category => 3,
        }
    }

    pub fn from_code(c: u8) -> Option<SeqType> {
        ALL_SEQ_TYPES.get(c as usize).copied()
    }
}

/// One log line with raw ids, before vocabulary remapping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawEvent {
    pub user_id: RawId,
    pub item_id: RawId,
    pub brand_id: Option<RawId>,
    pub shop_id: Option<RawId>,
    pub category_id: Option<RawId>,
    pub timestamp: i64,
    pub behavior: Behavior,
}

/// One labeled display/click event with dense ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClickEvent {
    pub user_id: DenseId,
    pub item_id: DenseId,
    pub brand_id: Option<DenseId>,
    pub shop_id: Option<DenseId>,
    pub category_id: Option<DenseId>,
    pub timestamp: i64,
    pub behavior: Behavior,
}

impl ClickEvent {
    pub fn side_id(&self, t: SeqType) -> Option<DenseId> {
        match t {
            SeqType::Item => Some(self.item_id),
            SeqType::Brand => self.brand_id,
            SeqType::Shop => self.shop_id,
            SeqType::Category => self.category_id,
        }
    }
}

/// Total order used everywhere events are processed: (user, time, item,
/// behavior). Sorting by it makes every downstream artifact independent of
/// input file ordering.
pub fn sort_events(events: &mut [ClickEvent]) {
    events.sort_by_key(|e| (e.user_id, e.timestamp, e.item_id, e.behavior as u8));
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seq_type_codes_round_trip() {
        for t in ALL_SEQ_TYPES {
            assert_eq!(SeqType::from_code(t.code()), Some(t));
            assert_eq!(SeqType::parse(t.name()), Some(t));
        }
        assert_eq!(SeqType::from_code(9), None);
    }

    #[test]
    fn sort_is_total_and_stable_under_shuffle() {
        let mk = |u, t, i| ClickEvent {
            user_id: u,
            item_id: i,
            brand_id: None,
            shop_id: None,
            category_id: None,
            timestamp: t,
            behavior: Behavior::Click,
        };
        let mut a = vec![mk(2, 5, 1), mk(1, 9, 3), mk(1, 2, 7), mk(1, 2, 4)];
        let mut b = vec![mk(1, 2, 4), mk(1, 2, 7), mk(2, 5, 1), mk(1, 9, 3)];
        sort_events(&mut a);
        sort_events(&mut b);
        assert_eq!(a, b);
    }
}
