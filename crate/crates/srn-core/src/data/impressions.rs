use std::collections::BTreeMap;
use std::collections::HashMap;

use rand::Rng;

use crate::data::events::{Behavior, ClickEvent, DenseId, SeqType};
use crate::error::{Result, SrnError};
use crate::nncore::init::seeded_rng;

/// Ordered (oldest first) list of historical clicked entity ids with their
/// click timestamps.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BehaviorSequence {
    pub entity_ids: Vec<DenseId>,
    pub timestamps: Vec<i64>,
}

impl BehaviorSequence {
    pub fn len(&self) -> usize {
        self.entity_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entity_ids.is_empty()
    }
}

/// One labeled impression: target entity ids, label, and the per-type
/// behavior sequences truncated to the most recent `max_len` clicks strictly
/// before the impression timestamp.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImpressionRecord {
    pub user_id: DenseId,
    pub target_item: DenseId,
    pub target_brand: Option<DenseId>,
    pub target_shop: Option<DenseId>,
    pub target_category: Option<DenseId>,
    pub label: u8,
    pub timestamp: i64,
    pub sequences: BTreeMap<SeqType, BehaviorSequence>,
}

impl ImpressionRecord {
    pub fn target_of(&self, t: SeqType) -> Option<DenseId> {
        match t {
            SeqType::Item => Some(self.target_item),
            SeqType::Brand => self.target_brand,
            SeqType::Shop => self.target_shop,
            SeqType::Category => self.target_category,
        }
    }
}

/// How labels are derived from the event log.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelMode {
    /// Display/click logs: every event is an impression, label = clicked.
    FromLog,
    /// Click-only logs: each click is a positive; `ratio` uniformly sampled
    /// non-clicked items (with their side info) become negatives sharing the
    /// same sequences.
    NegativeSample { ratio: usize },
}

/// Per-user running click history used to materialize sequences.
#[derive(Default)]
struct History {
    per_type: BTreeMap<SeqType, Vec<(DenseId, i64)>>,
}

impl History {
    fn sequence_before(&self, t: SeqType, ts: i64, max_len: usize) -> BehaviorSequence {
        let mut seq = BehaviorSequence::default();
        if let Some(hist) = self.per_type.get(&t) {
            // History is append-only in time order; take the most recent
            // max_len entries strictly before ts.
            let cut = hist.partition_point(|&(_, t0)| t0 < ts);
            let start = cut.saturating_sub(max_len);
            for &(id, t0) in &hist[start..cut] {
                seq.entity_ids.push(id);
                seq.timestamps.push(t0);
            }
        }
        seq
    }

    fn push_click(&mut self, event: &ClickEvent, types: &[SeqType]) {
        for &t in types {
            if let Some(id) = event.side_id(t) {
                self.per_type
                    .entry(t)
                    .or_default()
                    .push((id, event.timestamp));
            }
        }
    }
}

/// Side info observed for each item, used to attach brand/shop/category to
/// sampled negatives. First observation wins.
fn item_side_map(
    events: &[ClickEvent],
) -> HashMap<DenseId, (Option<DenseId>, Option<DenseId>, Option<DenseId>)> {
    let mut map = HashMap::new();
    for e in events {
        map.entry(e.item_id)
            .or_insert((e.brand_id, e.shop_id, e.category_id));
    }
    map
}

/// Builds labeled impressions from events sorted by (user, timestamp).
///
/// Sequences contain only clicks strictly earlier than the impression
/// timestamp (no leakage) and keep the most recent `max_len` entries.
/// Negative sampling draws from per-user streams derived from
/// `(seed, user_id)` so the output is independent of any parallel split.
pub fn build_impressions(
    events: &[ClickEvent],
    max_len: usize,
    mode: LabelMode,
    seq_types: &[SeqType],
    n_items: usize,
    seed: u64,
) -> Vec<ImpressionRecord> {
    debug_assert!(events.windows(2).all(|w| (w[0].user_id, w[0].timestamp)
        <= (w[1].user_id, w[1].timestamp)));
    let sides = match mode {
        LabelMode::NegativeSample { .. } => item_side_map(events),
        LabelMode::FromLog => HashMap::new(),
    };

    let mut out = Vec::new();
    let mut history = History::default();
    let mut current_user: Option<DenseId> = None;
    let mut user_rng = seeded_rng(seed, &[0]);

    for event in events {
        if current_user != Some(event.user_id) {
            history = History::default();
            current_user = Some(event.user_id);
            user_rng = seeded_rng(seed, &[u64::from(event.user_id)]);
        }

        let sequences: BTreeMap<SeqType, BehaviorSequence> = seq_types
            .iter()
            .map(|&t| (t, history.sequence_before(t, event.timestamp, max_len)))
            .collect();

        match mode {
            LabelMode::FromLog => {
                out.push(ImpressionRecord {
                    user_id: event.user_id,
                    target_item: event.item_id,
                    target_brand: event.brand_id,
                    target_shop: event.shop_id,
                    target_category: event.category_id,
                    label: u8::from(event.behavior == Behavior::Click),
                    timestamp: event.timestamp,
                    sequences,
                });
            }
            LabelMode::NegativeSample { ratio } => {
                if event.behavior != Behavior::Click {
                    continue;
                }
                out.push(ImpressionRecord {
                    user_id: event.user_id,
                    target_item: event.item_id,
                    target_brand: event.brand_id,
                    target_shop: event.shop_id,
                    target_category: event.category_id,
                    label: 1,
                    timestamp: event.timestamp,
                    sequences: sequences.clone(),
                });
                for _ in 0..ratio {
                    // Uniform over the item vocabulary excluding the positive.
                    let mut neg = user_rng.random_range(1..=n_items as DenseId);
                    while neg == event.item_id {
                        neg = user_rng.random_range(1..=n_items as DenseId);
                    }
                    let (brand, shop, category) =
                        sides.get(&neg).copied().unwrap_or((None, None, None));
                    out.push(ImpressionRecord {
                        user_id: event.user_id,
                        target_item: neg,
                        target_brand: brand,
                        target_shop: shop,
                        target_category: category,
                        label: 0,
                        timestamp: event.timestamp,
                        sequences: sequences.clone(),
                    });
                }
            }
        }

        if event.behavior == Behavior::Click {
            history.push_click(event, seq_types);
        }
    }
    out
}

/// Splits impressions at `boundary`: train strictly before, test at/after.
/// Fails when either side would be empty.
pub fn time_split(
    impressions: Vec<ImpressionRecord>,
    boundary: i64,
) -> Result<(Vec<ImpressionRecord>, Vec<ImpressionRecord>)> {
    let mut train = Vec::new();
    let mut test = Vec::new();
    for r in impressions {
        if r.timestamp < boundary {
            train.push(r);
        } else {
            test.push(r);
        }
    }
    if train.is_empty() || test.is_empty() {
        return Err(SrnError::EmptySplit {
            train: train.len(),
            test: test.len(),
            boundary,
        });
    }
    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::events::sort_events;

    fn click(user: DenseId, item: DenseId, cat: DenseId, ts: i64) -> ClickEvent {
        ClickEvent {
            user_id: user,
            item_id: item,
            brand_id: None,
            shop_id: None,
            category_id: Some(cat),
            timestamp: ts,
            behavior: Behavior::Click,
        }
    }

    #[test]
    fn later_click_sees_earlier_history_only() {
        let events = vec![click(1, 10, 3, 100), click(1, 11, 3, 200)];
        let imps = build_impressions(
            &events,
            100,
            LabelMode::FromLog,
            &[SeqType::Item, SeqType::Category],
            20,
            7,
        );
        assert_eq!(imps.len(), 2);
        assert!(imps[0].sequences[&SeqType::Item].is_empty());
        assert_eq!(imps[1].sequences[&SeqType::Item].entity_ids, vec![10]);
        assert_eq!(imps[1].sequences[&SeqType::Category].entity_ids, vec![3]);
    }

    #[test]
    fn negative_ratio_four_yields_five_per_click() {
        let mut events = Vec::new();
        for i in 0..10 {
            events.push(click(1, (i % 5) + 1, 1, 100 + i64::from(i) * 10));
        }
        let events: Vec<ClickEvent> = events
            .into_iter()
            .map(|mut e| {
                e.item_id = u32::try_from(e.item_id).unwrap();
                e
            })
            .collect();
        let imps = build_impressions(
            &events,
            100,
            LabelMode::NegativeSample { ratio: 4 },
            &[SeqType::Item],
            50,
            7,
        );
        assert_eq!(imps.len(), 50);
        assert_eq!(imps.iter().filter(|r| r.label == 1).count(), 10);
        for r in &imps {
            if r.label == 0 {
                // negative shares the positive's sequences and timestamp
                assert!(r.target_item >= 1 && r.target_item <= 50);
            }
        }
    }

    #[test]
    fn truncation_keeps_most_recent() {
        let events: Vec<ClickEvent> = (0..10).map(|i| click(1, i + 1, 1, 100 + i64::from(i))).collect();
        let imps = build_impressions(&events, 3, LabelMode::FromLog, &[SeqType::Item], 20, 7);
        let last = imps.last().unwrap();
        assert_eq!(last.sequences[&SeqType::Item].entity_ids, vec![7, 8, 9]);
    }

    #[test]
    fn no_leakage_over_generated_corpus() {
        // 10k impressions from a synthetic-ish random log, exhaustive scan.
        let mut rng = crate::nncore::init::seeded_rng(99, &[]);
        let mut events = Vec::new();
        for user in 1..=200u32 {
            let mut ts = 1000;
            for _ in 0..50 {
                use rand::Rng;
                ts += rng.random_range(1..100i64);
                let item = rng.random_range(1..=300u32);
                let mut e = click(user, item, 1 + item % 7, ts);
                if rng.random_range(0..3) == 0 {
                    e.behavior = Behavior::Display;
                }
                events.push(e);
            }
        }
        sort_events(&mut events);
        let imps = build_impressions(
            &events,
            30,
            LabelMode::FromLog,
            &[SeqType::Item, SeqType::Category],
            300,
            7,
        );
        assert_eq!(imps.len(), 10_000);
        for r in &imps {
            for seq in r.sequences.values() {
                assert_eq!(seq.entity_ids.len(), seq.timestamps.len());
                for &t in &seq.timestamps {
                    assert!(t < r.timestamp, "leakage: seq ts {t} >= impression {}", r.timestamp);
                }
                assert!(seq.timestamps.windows(2).all(|w| w[0] <= w[1]));
                assert!(seq.len() <= 30);
            }
        }
    }

    #[test]
    fn empty_history_is_a_valid_impression() {
        let events = vec![click(5, 1, 1, 50)];
        let imps = build_impressions(&events, 10, LabelMode::FromLog, &[SeqType::Item], 5, 7);
        assert_eq!(imps.len(), 1);
        assert!(imps[0].sequences[&SeqType::Item].is_empty());
    }

    #[test]
    fn split_counts_and_partition() {
        let imps: Vec<ImpressionRecord> = (1..=10)
            .map(|t| ImpressionRecord {
                user_id: 1,
                target_item: 1,
                target_brand: None,
                target_shop: None,
                target_category: None,
                label: 0,
                timestamp: t,
                sequences: BTreeMap::new(),
            })
            .collect();
        let (train, test) = time_split(imps.clone(), 8).unwrap();
        assert_eq!(train.len(), 7);
        assert_eq!(test.len(), 3);
        // partition: disjoint by construction, union preserves the multiset
        let mut merged: Vec<i64> = train.iter().chain(&test).map(|r| r.timestamp).collect();
        merged.sort_unstable();
        assert_eq!(merged, (1..=10).collect::<Vec<_>>());
        assert!(train.iter().all(|r| r.timestamp < 8));
        assert!(test.iter().all(|r| r.timestamp >= 8));
    }

    #[test]
    fn empty_split_side_is_an_error() {
        let imps = vec![ImpressionRecord {
            user_id: 1,
            target_item: 1,
            target_brand: None,
            target_shop: None,
            target_category: None,
            label: 0,
            timestamp: 5,
            sequences: BTreeMap::new(),
        }];
        let err = time_split(imps, 100).unwrap_err();
        match err {
            SrnError::EmptySplit { train, test, .. } => {
                assert_eq!(train, 1);
                assert_eq!(test, 0);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }
}
