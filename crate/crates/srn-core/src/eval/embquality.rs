use std::collections::HashMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::data::events::DenseId;
use crate::error::{Result, SrnError};
use crate::nncore::init::seeded_rng;
use crate::retarget::similarity::cosine_similarity;

/// Mean intra- and inter-category cosine similarity of an embedding table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingQuality {
    pub intra_avg: f64,
    pub inter_avg: f64,
    pub categories: usize,
    pub items_sampled: usize,
}

/// Picks the `top_k_categories` categories with the highest click counts,
/// samples up to `items_per_category` items from each, and reports the grand
/// mean cosine of each sampled item to the other sampled items of its own
/// category (intra) and of the other categories (inter).
///
/// `lookup` maps an item id to its embedding vector (items without one are
/// skipped). Needs at least 2 categories with at least 2 items each.
pub fn embedding_quality<'a>(
    lookup: impl Fn(DenseId) -> Option<&'a [f64]>,
    item_category: &HashMap<DenseId, DenseId>,
    item_clicks: &HashMap<DenseId, u64>,
    top_k_categories: usize,
    items_per_category: usize,
    seed: u64,
) -> Result<EmbeddingQuality> {
    // Click volume per category, deterministically ordered.
    let mut cat_clicks: HashMap<DenseId, u64> = HashMap::new();
    for (item, clicks) in item_clicks {
        if let Some(&cat) = item_category.get(item) {
            *cat_clicks.entry(cat).or_insert(0) += clicks;
        }
    }
    let mut cats: Vec<(DenseId, u64)> = cat_clicks.into_iter().collect();
    cats.sort_by_key(|&(cat, clicks)| (std::cmp::Reverse(clicks), cat));
    cats.truncate(top_k_categories);

    let mut rng = seeded_rng(seed, &[0xe6b]);
    let mut sampled: Vec<(DenseId, Vec<DenseId>)> = Vec::new();
    for &(cat, _) in &cats {
        let mut items: Vec<DenseId> = item_category
            .iter()
            .filter(|&(item, &c)| c == cat && lookup(*item).is_some())
            .map(|(&item, _)| item)
            .collect();
        items.sort_unstable();
        items.shuffle(&mut rng);
        items.truncate(items_per_category);
        items.sort_unstable();
        if items.len() >= 2 {
            sampled.push((cat, items));
        }
    }
    if sampled.len() < 2 {
        return Err(SrnError::DegenerateSample(format!(
            "need >= 2 categories with >= 2 embeddable items, got {}",
            sampled.len()
        )));
    }

    let mut intra_sum = 0.0;
    let mut intra_n = 0usize;
    let mut inter_sum = 0.0;
    let mut inter_n = 0usize;
    let mut items_sampled = 0usize;
    for (ci, (_, items_i)) in sampled.iter().enumerate() {
        items_sampled += items_i.len();
        for (a_idx, &a) in items_i.iter().enumerate() {
            let va = lookup(a).expect("sampled items have embeddings");
            // intra: other sampled items of the same category
            for &b in items_i.iter().skip(a_idx + 1) {
                let vb = lookup(b).expect("sampled items have embeddings");
                intra_sum += cosine_similarity(va, vb);
                intra_n += 1;
            }
            // inter: sampled items of later categories (each unordered pair once)
            for (_, items_j) in sampled.iter().skip(ci + 1) {
                for &b in items_j {
                    let vb = lookup(b).expect("sampled items have embeddings");
                    inter_sum += cosine_similarity(va, vb);
                    inter_n += 1;
                }
            }
        }
    }
    if intra_n == 0 || inter_n == 0 {
        return Err(SrnError::DegenerateSample(format!(
            "degenerate pair counts: intra {intra_n}, inter {inter_n}"
        )));
    }
    Ok(EmbeddingQuality {
        intra_avg: intra_sum / intra_n as f64,
        inter_avg: inter_sum / inter_n as f64,
        categories: sampled.len(),
        items_sampled,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn maps(n_items: u32, n_cats: u32) -> (HashMap<DenseId, DenseId>, HashMap<DenseId, u64>) {
        let mut cat = HashMap::new();
        let mut clicks = HashMap::new();
        for item in 1..=n_items {
            cat.insert(item, 1 + (item - 1) % n_cats);
            clicks.insert(item, u64::from(item));
        }
        (cat, clicks)
    }

    #[test]
    fn one_hot_per_category_is_perfectly_separated() {
        let (cat, clicks) = maps(12, 3);
        let vecs: HashMap<DenseId, Vec<f64>> = (1..=12u32)
            .map(|item| {
                let mut v = vec![0.0; 3];
                v[((item - 1) % 3) as usize] = 1.0;
                (item, v)
            })
            .collect();
        let q = embedding_quality(|id| vecs.get(&id).map(|v| v.as_slice()), &cat, &clicks, 3, 4, 7)
            .unwrap();
        assert!((q.intra_avg - 1.0).abs() < 1e-12);
        assert!(q.inter_avg.abs() < 1e-12);
    }

    #[test]
    fn identical_embeddings_everywhere_are_indistinguishable() {
        let (cat, clicks) = maps(10, 2);
        let v = vec![0.3, 0.4, 0.5];
        let q = embedding_quality(|_| Some(v.as_slice()), &cat, &clicks, 2, 5, 7).unwrap();
        assert!((q.intra_avg - 1.0).abs() < 1e-12);
        assert!((q.inter_avg - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_sampling_is_an_error_with_counts() {
        let (cat, clicks) = maps(4, 4); // one item per category
        let v = vec![1.0, 0.0];
        let err = embedding_quality(|_| Some(v.as_slice()), &cat, &clicks, 4, 4, 7).unwrap_err();
        assert!(matches!(err, SrnError::DegenerateSample(_)));
    }

    #[test]
    fn deterministic_given_seed() {
        let (cat, clicks) = maps(40, 4);
        let vecs: HashMap<DenseId, Vec<f64>> = (1..=40u32)
            .map(|item| {
                let c = f64::from((item - 1) % 4);
                (item, vec![c.cos(), c.sin(), f64::from(item) * 0.01])
            })
            .collect();
        let run = |seed| {
            embedding_quality(
                |id| vecs.get(&id).map(|v| v.as_slice()),
                &cat,
                &clicks,
                3,
                5,
                seed,
            )
            .unwrap()
        };
        assert_eq!(run(1), run(1));
    }
}
