use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::data::events::{Behavior, ClickEvent, RawEvent, SeqType};
use crate::data::impressions::{BehaviorSequence, ImpressionRecord};
use crate::data::vocab::VocabSet;
use crate::error::{Result, SrnError};

/// Result of ingesting a raw CSV log: remapped events plus bookkeeping.
#[derive(Debug)]
pub struct IngestOutcome {
    pub events: Vec<ClickEvent>,
    pub vocabs: VocabSet,
    pub total_lines: usize,
    pub rejected: usize,
    /// Lines dropped by the behavior filter (well-formed, not errors).
    pub filtered: usize,
}

/// Maximum tolerated fraction of malformed lines.
const REJECT_LIMIT_PCT: f64 = 1.0;

/// Reads a click log CSV. Lines are either
/// `user_id,item_id,category_id,behavior,timestamp` (5 columns) or
/// `user_id,item_id,brand_id,shop_id,category_id,behavior,timestamp`
/// (7 columns, empty side-info fields allowed).
///
/// Rows whose behavior is in `click_values` become clicks, in
/// `display_values` displays; other behaviors are dropped. Malformed lines
/// are appended to `rejects_path` as TSV `line_no<TAB>reason<TAB>content`;
/// more than 1% rejects is a hard failure. Ids are remapped to dense
/// vocabularies in first-seen order.
pub fn read_events_csv(
    path: &Path,
    click_values: &[String],
    display_values: &[String],
    rejects_path: &Path,
) -> Result<IngestOutcome> {
    let file = File::open(path).map_err(|e| SrnError::io(path, e))?;
    let reader = BufReader::new(file);
    let rejects_file = File::create(rejects_path).map_err(|e| SrnError::io(rejects_path, e))?;
    let mut rejects = BufWriter::new(rejects_file);

    let mut outcome = IngestOutcome {
        events: Vec::new(),
        vocabs: VocabSet::default(),
        total_lines: 0,
        rejected: 0,
        filtered: 0,
    };

    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| SrnError::io(path, e))?;
        if line.is_empty() {
            continue;
        }
        outcome.total_lines += 1;
        match parse_raw_line(&line, click_values, display_values) {
            Ok(Some(raw)) => {
                let v = &mut outcome.vocabs;
                outcome.events.push(ClickEvent {
                    user_id: v.user.get_or_insert(raw.user_id),
                    item_id: v.item.get_or_insert(raw.item_id),
                    brand_id: raw.brand_id.map(|b| v.brand.get_or_insert(b)),
                    shop_id: raw.shop_id.map(|s| v.shop.get_or_insert(s)),
                    category_id: raw.category_id.map(|c| v.category.get_or_insert(c)),
                    timestamp: raw.timestamp,
                    behavior: raw.behavior,
                });
            }
            Ok(None) => outcome.filtered += 1,
            Err(reason) => {
                outcome.rejected += 1;
                writeln!(rejects, "{}\t{reason}\t{line}", idx + 1)
                    .map_err(|e| SrnError::io(rejects_path, e))?;
            }
        }
    }
    rejects.flush().map_err(|e| SrnError::io(rejects_path, e))?;

    if outcome.total_lines > 0 {
        let pct = 100.0 * outcome.rejected as f64 / outcome.total_lines as f64;
        if pct > REJECT_LIMIT_PCT {
            return Err(SrnError::TooManyRejects {
                rejected: outcome.rejected,
                total: outcome.total_lines,
                limit_pct: REJECT_LIMIT_PCT,
                rejects_path: rejects_path.to_path_buf(),
            });
        }
    }
    Ok(outcome)
}

fn parse_raw_line(
    line: &str,
    click_values: &[String],
    display_values: &[String],
) -> std::result::Result<Option<RawEvent>, String> {
    let parts: Vec<&str> = line.split(',').collect();
    let (user, item, brand, shop, category, behavior, ts) = match parts.len() {
        5 => (parts[0], parts[1], "", "", parts[2], parts[3], parts[4]),
        7 => (
            parts[0], parts[1], parts[2], parts[3], parts[4], parts[5], parts[6],
        ),
        n => return Err(format!("expected 5 or 7 fields, got {n}")),
    };

    let behavior = if click_values.iter().any(|v| v == behavior) {
        Behavior::Click
    } else if display_values.iter().any(|v| v == behavior) {
        Behavior::Display
    } else {
        return Ok(None);
    };

    let parse_id = |s: &str, field: &str| -> std::result::Result<u64, String> {
        s.parse().map_err(|_| format!("bad {field} {s:?}"))
    };
    let parse_opt = |s: &str, field: &str| -> std::result::Result<Option<u64>, String> {
        if s.is_empty() {
            Ok(None)
        } else {
            parse_id(s, field).map(Some)
        }
    };

    let timestamp: i64 = ts.parse().map_err(|_| format!("bad timestamp {ts:?}"))?;
    if timestamp <= 0 {
        return Err(format!("non-positive timestamp {timestamp}"));
    }
    Ok(Some(RawEvent {
        user_id: parse_id(user, "user_id")?,
        item_id: parse_id(item, "item_id")?,
        brand_id: parse_opt(brand, "brand_id")?,
        shop_id: parse_opt(shop, "shop_id")?,
        category_id: parse_opt(category, "category_id")?,
        timestamp,
        behavior,
    }))
}

fn behavior_str(b: Behavior) -> &'static str {
    match b {
        Behavior::Click => "click",
        Behavior::Display => "display",
    }
}

/// Writes raw events in the 7-column CSV form accepted by ingest.
pub fn write_events_csv(path: &Path, events: &[RawEvent]) -> Result<()> {
    let file = File::create(path).map_err(|e| SrnError::io(path, e))?;
    let mut w = BufWriter::new(file);
    let fmt_opt = |o: Option<u64>| o.map(|v| v.to_string()).unwrap_or_default();
    for e in events {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            e.user_id,
            e.item_id,
            fmt_opt(e.brand_id),
            fmt_opt(e.shop_id),
            fmt_opt(e.category_id),
            behavior_str(e.behavior),
            e.timestamp
        )
        .map_err(|e| SrnError::io(path, e))?;
    }
    w.flush().map_err(|e| SrnError::io(path, e))?;
    Ok(())
}

/// Writes dense-id events (an internal pipeline artifact, same 7-column CSV).
pub fn write_dense_events_csv(path: &Path, events: &[ClickEvent]) -> Result<()> {
    let raw: Vec<RawEvent> = events
        .iter()
        .map(|e| RawEvent {
            user_id: u64::from(e.user_id),
            item_id: u64::from(e.item_id),
            brand_id: e.brand_id.map(u64::from),
            shop_id: e.shop_id.map(u64::from),
            category_id: e.category_id.map(u64::from),
            timestamp: e.timestamp,
            behavior: e.behavior,
        })
        .collect();
    write_events_csv(path, &raw)
}

/// Reads a dense-id events CSV written by [`write_dense_events_csv`].
/// This is a trusted artifact: any malformed line is a hard error.
pub fn read_dense_events_csv(path: &Path) -> Result<Vec<ClickEvent>> {
    let file = File::open(path).map_err(|e| SrnError::io(path, e))?;
    let mut events = Vec::new();
    let click = vec!["click".to_string()];
    let display = vec!["display".to_string()];
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| SrnError::io(path, e))?;
        if line.is_empty() {
            continue;
        }
        let raw = parse_raw_line(&line, &click, &display)
            .map_err(|r| SrnError::Config(format!("{path:?}:{}: {r}", idx + 1)))?
            .ok_or_else(|| {
                SrnError::Config(format!("{path:?}:{}: unknown behavior", idx + 1))
            })?;
        let to_dense = |v: u64, field: &str| -> Result<u32> {
            u32::try_from(v)
                .map_err(|_| SrnError::Config(format!("{path:?}:{}: {field} too large", idx + 1)))
        };
        events.push(ClickEvent {
            user_id: to_dense(raw.user_id, "user_id")?,
            item_id: to_dense(raw.item_id, "item_id")?,
            brand_id: raw.brand_id.map(|v| to_dense(v, "brand_id")).transpose()?,
            shop_id: raw.shop_id.map(|v| to_dense(v, "shop_id")).transpose()?,
            category_id: raw
                .category_id
                .map(|v| to_dense(v, "category_id"))
                .transpose()?,
            timestamp: raw.timestamp,
            behavior: raw.behavior,
        });
    }
    Ok(events)
}

const IMP_MAGIC: &[u8; 8] = b"SRNIMP1\n";

/// Length-prefixed binary impression records plus a JSON schema sidecar at
/// `<path>.schema.json`. All integers little-endian. Record payload:
///
/// ```text
/// user_id:u32  label:u8  flags:u8 (bit0 brand, bit1 shop, bit2 category)
/// target_item:u32  [target_brand:u32] [target_shop:u32] [target_category:u32]
/// timestamp:i64  n_seq:u8
/// per sequence: type:u8  len:u32  ids:u32*len  timestamps:i64*len
/// ```
pub fn write_impressions(path: &Path, records: &[ImpressionRecord]) -> Result<()> {
    let file = File::create(path).map_err(|e| SrnError::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(IMP_MAGIC).map_err(|e| SrnError::io(path, e))?;
    w.write_all(&(records.len() as u64).to_le_bytes())
        .map_err(|e| SrnError::io(path, e))?;
    let mut buf: Vec<u8> = Vec::new();
    for r in records {
        buf.clear();
        buf.extend_from_slice(&r.user_id.to_le_bytes());
        buf.push(r.label);
        let mut flags = 0u8;
        if r.target_brand.is_some() {
            flags |= 1;
        }
        if r.target_shop.is_some() {
            flags |= 2;
        }
        if r.target_category.is_some() {
            flags |= 4;
        }
        buf.push(flags);
        buf.extend_from_slice(&r.target_item.to_le_bytes());
        for opt in [r.target_brand, r.target_shop, r.target_category]
            .into_iter()
            .flatten()
        {
            buf.extend_from_slice(&opt.to_le_bytes());
        }
        buf.extend_from_slice(&r.timestamp.to_le_bytes());
        buf.push(u8::try_from(r.sequences.len()).expect("at most 4 sequence types"));
        for (t, seq) in &r.sequences {
            buf.push(t.code());
            buf.extend_from_slice(&(seq.entity_ids.len() as u32).to_le_bytes());
            for id in &seq.entity_ids {
                buf.extend_from_slice(&id.to_le_bytes());
            }
            for ts in &seq.timestamps {
                buf.extend_from_slice(&ts.to_le_bytes());
            }
        }
        w.write_all(&(buf.len() as u32).to_le_bytes())
            .map_err(|e| SrnError::io(path, e))?;
        w.write_all(&buf).map_err(|e| SrnError::io(path, e))?;
    }
    w.flush().map_err(|e| SrnError::io(path, e))?;

    let schema = serde_json::json!({
        "format": "srn-impressions",
        "version": 1,
        "endianness": "little",
        "record": [
            {"field": "user_id", "type": "u32"},
            {"field": "label", "type": "u8"},
            {"field": "flags", "type": "u8", "bits": {"0": "target_brand present", "1": "target_shop present", "2": "target_category present"}},
            {"field": "target_item", "type": "u32"},
            {"field": "target_brand", "type": "u32", "optional": true},
            {"field": "target_shop", "type": "u32", "optional": true},
            {"field": "target_category", "type": "u32", "optional": true},
            {"field": "timestamp", "type": "i64"},
            {"field": "n_seq", "type": "u8"},
            {"field": "sequences", "repeat": "n_seq", "layout": [
                {"field": "seq_type", "type": "u8", "values": {"0": "item", "1": "brand", "2": "shop", "3": "category"}},
                {"field": "len", "type": "u32"},
                {"field": "entity_ids", "type": "u32", "repeat": "len"},
                {"field": "timestamps", "type": "i64", "repeat": "len"}
            ]}
        ],
        "prefix": "u32 record byte length",
        "header": "magic SRNIMP1\\n + u64 record count"
    });
    let schema_path = schema_path(path);
    std::fs::write(&schema_path, serde_json::to_string_pretty(&schema).unwrap())
        .map_err(|e| SrnError::io(&schema_path, e))?;
    Ok(())
}

fn schema_path(path: &Path) -> std::path::PathBuf {
    let mut os = path.as_os_str().to_owned();
    os.push(".schema.json");
    std::path::PathBuf::from(os)
}

pub fn read_impressions(path: &Path) -> Result<Vec<ImpressionRecord>> {
    let file = File::open(path).map_err(|e| SrnError::io(path, e))?;
    let mut r = BufReader::new(file);
    let bad = |reason: &str| SrnError::CheckpointFormat {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    };

    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).map_err(|e| SrnError::io(path, e))?;
    if &magic != IMP_MAGIC {
        return Err(bad("bad magic"));
    }
    let mut count_bytes = [0u8; 8];
    r.read_exact(&mut count_bytes)
        .map_err(|e| SrnError::io(path, e))?;
    let count = u64::from_le_bytes(count_bytes) as usize;

    let mut records = Vec::with_capacity(count);
    for _ in 0..count {
        let mut len_bytes = [0u8; 4];
        r.read_exact(&mut len_bytes)
            .map_err(|e| SrnError::io(path, e))?;
        let len = u32::from_le_bytes(len_bytes) as usize;
        let mut buf = vec![0u8; len];
        r.read_exact(&mut buf).map_err(|e| SrnError::io(path, e))?;

        let mut pos = 0usize;
        let take = |buf: &[u8], pos: &mut usize, n: usize| -> Result<Vec<u8>> {
            if *pos + n > buf.len() {
                return Err(SrnError::CheckpointFormat {
                    path: path.to_path_buf(),
                    reason: "truncated record".into(),
                });
            }
            let out = buf[*pos..*pos + n].to_vec();
            *pos += n;
            Ok(out)
        };
        let read_u32 = |buf: &[u8], pos: &mut usize| -> Result<u32> {
            Ok(u32::from_le_bytes(take(buf, pos, 4)?.try_into().unwrap()))
        };
        let read_i64 = |buf: &[u8], pos: &mut usize| -> Result<i64> {
            Ok(i64::from_le_bytes(take(buf, pos, 8)?.try_into().unwrap()))
        };

        let user_id = read_u32(&buf, &mut pos)?;
        let label = take(&buf, &mut pos, 1)?[0];
        let flags = take(&buf, &mut pos, 1)?[0];
        let target_item = read_u32(&buf, &mut pos)?;
        let target_brand = if flags & 1 != 0 {
            Some(read_u32(&buf, &mut pos)?)
        } else {
            None
        };
        let target_shop = if flags & 2 != 0 {
            Some(read_u32(&buf, &mut pos)?)
        } else {
            None
        };
        let target_category = if flags & 4 != 0 {
            Some(read_u32(&buf, &mut pos)?)
        } else {
            None
        };
        let timestamp = read_i64(&buf, &mut pos)?;
        let n_seq = take(&buf, &mut pos, 1)?[0];
        let mut sequences = BTreeMap::new();
        for _ in 0..n_seq {
            let code = take(&buf, &mut pos, 1)?[0];
            let t = SeqType::from_code(code).ok_or_else(|| bad("bad sequence type code"))?;
            let n = read_u32(&buf, &mut pos)? as usize;
            let mut seq = BehaviorSequence::default();
            for _ in 0..n {
                seq.entity_ids.push(read_u32(&buf, &mut pos)?);
            }
            for _ in 0..n {
                seq.timestamps.push(read_i64(&buf, &mut pos)?);
            }
            sequences.insert(t, seq);
        }
        records.push(ImpressionRecord {
            user_id,
            target_item,
            target_brand,
            target_shop,
            target_category,
            label,
            timestamp,
            sequences,
        });
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::impressions::BehaviorSequence;

    #[test]
    fn ingest_three_valid_click_rows() {
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("events.csv");
        std::fs::write(&csv, "1,100,9,pv,1000\n1,101,9,pv,1010\n2,100,9,pv,1020\n").unwrap();
        let out = read_events_csv(
            &csv,
            &["pv".to_string()],
            &[],
            &dir.path().join("rejects.tsv"),
        )
        .unwrap();
        assert_eq!(out.events.len(), 3);
        assert_eq!(out.rejected, 0);
        assert_eq!(out.vocabs.user.len(), 2);
        assert_eq!(out.vocabs.item.len(), 2);
        assert_eq!(out.vocabs.category.len(), 1);
    }

    #[test]
    fn malformed_timestamp_is_rejected_and_logged() {
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("events.csv");
        let mut body = String::from("1,100,9,pv,notatime\n");
        for i in 0..200 {
            body.push_str(&format!("1,{},9,pv,{}\n", 100 + i, 1000 + i));
        }
        std::fs::write(&csv, body).unwrap();
        let rejects = dir.path().join("rejects.tsv");
        let out = read_events_csv(&csv, &["pv".to_string()], &[], &rejects).unwrap();
        assert_eq!(out.rejected, 1);
        assert_eq!(out.events.len(), 200);
        let logged = std::fs::read_to_string(&rejects).unwrap();
        assert!(logged.starts_with("1\t"), "reject line records line number");
        assert!(logged.contains("bad timestamp"));
    }

    #[test]
    fn click_only_filter_drops_buys() {
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("events.csv");
        std::fs::write(&csv, "1,100,9,pv,1000\n1,101,9,buy,1010\n1,102,9,pv,1020\n").unwrap();
        let out = read_events_csv(
            &csv,
            &["pv".to_string()],
            &[],
            &dir.path().join("rejects.tsv"),
        )
        .unwrap();
        assert_eq!(out.events.len(), 2);
        assert_eq!(out.filtered, 1);
        assert!(out.events.iter().all(|e| e.behavior == Behavior::Click));
    }

    #[test]
    fn too_many_rejects_is_a_hard_failure() {
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("events.csv");
        std::fs::write(&csv, "garbage\n1,100,9,pv,1000\n").unwrap();
        let err = read_events_csv(
            &csv,
            &["pv".to_string()],
            &[],
            &dir.path().join("rejects.tsv"),
        )
        .unwrap_err();
        assert!(matches!(err, SrnError::TooManyRejects { rejected: 1, total: 2, .. }));
    }

    #[test]
    fn impressions_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("imps.bin");
        let mut sequences = BTreeMap::new();
        sequences.insert(
            SeqType::Item,
            BehaviorSequence {
                entity_ids: vec![4, 9],
                timestamps: vec![10, 20],
            },
        );
        sequences.insert(SeqType::Category, BehaviorSequence::default());
        let records = vec![
            ImpressionRecord {
                user_id: 3,
                target_item: 8,
                target_brand: None,
                target_shop: None,
                target_category: Some(2),
                label: 1,
                timestamp: 25,
                sequences,
            },
            ImpressionRecord {
                user_id: 4,
                target_item: 1,
                target_brand: Some(5),
                target_shop: Some(6),
                target_category: None,
                label: 0,
                timestamp: 30,
                sequences: BTreeMap::new(),
            },
        ];
        write_impressions(&path, &records).unwrap();
        assert!(schema_path(&path).exists());
        let got = read_impressions(&path).unwrap();
        assert_eq!(got, records);
    }

    #[test]
    fn dense_events_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("clicks.csv");
        let events = vec![ClickEvent {
            user_id: 1,
            item_id: 2,
            brand_id: None,
            shop_id: Some(3),
            category_id: Some(4),
            timestamp: 99,
            behavior: Behavior::Click,
        }];
        write_dense_events_csv(&path, &events).unwrap();
        let got = read_dense_events_csv(&path).unwrap();
        assert_eq!(got, events);
    }
}
