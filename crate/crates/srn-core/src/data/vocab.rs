use std::collections::HashMap;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::data::events::{DenseId, RawId, SeqType};
use crate::error::{Result, SrnError};

/// Raw id -> dense id map. Dense id 0 is reserved for out-of-vocabulary
/// lookups; observed ids are assigned 1..=len in first-seen order.
#[derive(Debug, Clone, Default)]
pub struct Vocab {
    map: HashMap<RawId, DenseId>,
    rev: Vec<RawId>, // rev[dense - 1] = raw
}

impl Vocab {
    pub fn new() -> Self {
        Vocab::default()
    }

    pub fn get_or_insert(&mut self, raw: RawId) -> DenseId {
        if let Some(&d) = self.map.get(&raw) {
            return d;
        }
        let dense = (self.rev.len() + 1) as DenseId;
        self.map.insert(raw, dense);
        self.rev.push(raw);
        dense
    }

    pub fn get(&self, raw: RawId) -> Option<DenseId> {
        self.map.get(&raw).copied()
    }

    pub fn raw_of(&self, dense: DenseId) -> Option<RawId> {
        if dense == 0 {
            None
        } else {
            self.rev.get(dense as usize - 1).copied()
        }
    }

    /// Number of observed ids (excluding the reserved OOV slot).
    pub fn len(&self) -> usize {
        self.rev.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rev.is_empty()
    }

    /// Table size required to embed this vocabulary: observed ids plus the
    /// reserved OOV row 0.
    pub fn table_rows(&self) -> usize {
        self.rev.len() + 1
    }

    /// TSV `raw_id<TAB>dense_id`, ordered by dense id.
    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| SrnError::io(path, e))?;
        let mut w = BufWriter::new(file);
        for (i, raw) in self.rev.iter().enumerate() {
            writeln!(w, "{raw}\t{}", i + 1).map_err(|e| SrnError::io(path, e))?;
        }
        w.flush().map_err(|e| SrnError::io(path, e))?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Vocab> {
        let file = std::fs::File::open(path).map_err(|e| SrnError::io(path, e))?;
        let mut vocab = Vocab::new();
        for (lineno, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| SrnError::io(path, e))?;
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split('\t');
            let raw: RawId = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| SrnError::Config(format!("{path:?}:{}: bad vocab line", lineno + 1)))?;
            let dense: DenseId = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| SrnError::Config(format!("{path:?}:{}: bad vocab line", lineno + 1)))?;
            let assigned = vocab.get_or_insert(raw);
            if assigned != dense {
                return Err(SrnError::Config(format!(
                    "{path:?}:{}: non-contiguous vocab (raw {raw} -> {dense}, expected {assigned})",
                    lineno + 1
                )));
            }
        }
        Ok(vocab)
    }
}

/// The vocabularies of one ingested dataset.
#[derive(Debug, Clone, Default)]
pub struct VocabSet {
    pub user: Vocab,
    pub item: Vocab,
    pub brand: Vocab,
    pub shop: Vocab,
    pub category: Vocab,
}

impl VocabSet {
    pub fn seq_vocab(&self, t: SeqType) -> &Vocab {
        match t {
            SeqType::Item => &self.item,
            SeqType::Brand => &self.brand,
            SeqType::Shop => &self.shop,
            SeqType::Category => &self.category,
        }
    }

    pub fn save_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| SrnError::io(dir, e))?;
        self.user.save(&dir.join("user.tsv"))?;
        self.item.save(&dir.join("item.tsv"))?;
        self.brand.save(&dir.join("brand.tsv"))?;
        self.shop.save(&dir.join("shop.tsv"))?;
        self.category.save(&dir.join("category.tsv"))?;
        Ok(())
    }

    pub fn load_dir(dir: &Path) -> Result<VocabSet> {
        Ok(VocabSet {
            user: Vocab::load(&dir.join("user.tsv"))?,
            item: Vocab::load(&dir.join("item.tsv"))?,
            brand: Vocab::load(&dir.join("brand.tsv"))?,
            shop: Vocab::load(&dir.join("shop.tsv"))?,
            category: Vocab::load(&dir.join("category.tsv"))?,
        })
    }
}
