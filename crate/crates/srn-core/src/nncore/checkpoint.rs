use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Result, SrnError};

/// JSON sidecar written next to every checkpoint as `<path>.meta.json`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct CheckpointMeta {
    pub seed: u64,
    pub step: u64,
    pub config_hash: String,
}

/// A tensor read back from a checkpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct OwnedTensor {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

const MAGIC: &str = "SRNCKPT1";

/// Writes tensors as a flat binary file: a text header listing
/// `name dtype shape offset nbytes` per tensor, then a little-endian f64
/// payload. Offsets are relative to the start of the payload.
pub fn write_checkpoint(
    path: &Path,
    tensors: &[(&str, Vec<usize>, &[f64])],
    meta: &CheckpointMeta,
) -> Result<()> {
    let file = File::create(path).map_err(|e| SrnError::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut header = String::new();
    header.push_str(MAGIC);
    header.push('\n');
    header.push_str(&format!("tensors {}\n", tensors.len()));
    let mut offset = 0usize;
    for (name, shape, data) in tensors {
        assert!(
            !name.contains(char::is_whitespace),
            "tensor name {name:?} must not contain whitespace"
        );
        let count: usize = shape.iter().product();
        assert_eq!(count, data.len(), "shape/data mismatch for {name}");
        let nbytes = data.len() * 8;
        let dims = shape
            .iter()
            .map(|d| d.to_string())
            .collect::<Vec<_>>()
            .join(",");
        header.push_str(&format!("{name} f64 {dims} {offset} {nbytes}\n"));
        offset += nbytes;
    }
    header.push_str("end\n");
    w.write_all(header.as_bytes())
        .map_err(|e| SrnError::io(path, e))?;
    for (_, _, data) in tensors {
        for v in *data {
            w.write_all(&v.to_le_bytes())
                .map_err(|e| SrnError::io(path, e))?;
        }
    }
    w.flush().map_err(|e| SrnError::io(path, e))?;

    let meta_path = meta_path(path);
    let json = serde_json::to_string_pretty(meta).expect("meta serializes");
    std::fs::write(&meta_path, json).map_err(|e| SrnError::io(&meta_path, e))?;
    Ok(())
}

pub fn meta_path(path: &Path) -> PathBuf {
    let mut os = path.as_os_str().to_owned();
    os.push(".meta.json");
    PathBuf::from(os)
}

pub fn read_checkpoint(path: &Path) -> Result<(Vec<OwnedTensor>, CheckpointMeta)> {
    let file = File::open(path).map_err(|e| SrnError::io(path, e))?;
    let mut r = BufReader::new(file);
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes).map_err(|e| SrnError::io(path, e))?;

    let bad = |reason: &str| SrnError::CheckpointFormat {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    };

    // Parse the text header line by line up to "end\n".
    let mut pos = 0usize;
    let next_line = |bytes: &[u8], pos: &mut usize| -> Option<String> {
        let start = *pos;
        let rel = bytes[start..].iter().position(|&b| b == b'\n')?;
        *pos = start + rel + 1;
        Some(String::from_utf8_lossy(&bytes[start..start + rel]).into_owned())
    };

    let magic = next_line(&bytes, &mut pos).ok_or_else(|| bad("missing magic"))?;
    if magic != MAGIC {
        return Err(bad(&format!("bad magic {magic:?}")));
    }
    let count_line = next_line(&bytes, &mut pos).ok_or_else(|| bad("missing tensor count"))?;
    let count: usize = count_line
        .strip_prefix("tensors ")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| bad("bad tensor count line"))?;

    let mut entries = Vec::with_capacity(count);
    for _ in 0..count {
        let line = next_line(&bytes, &mut pos).ok_or_else(|| bad("truncated header"))?;
        let parts: Vec<&str> = line.split(' ').collect();
        if parts.len() != 5 || parts[1] != "f64" {
            return Err(bad(&format!("bad tensor line {line:?}")));
        }
        let shape: Vec<usize> = if parts[2].is_empty() {
            Vec::new()
        } else {
            parts[2]
                .split(',')
                .map(|d| d.parse().map_err(|_| bad("bad dim")))
                .collect::<std::result::Result<_, _>>()?
        };
        let offset: usize = parts[3].parse().map_err(|_| bad("bad offset"))?;
        let nbytes: usize = parts[4].parse().map_err(|_| bad("bad byte length"))?;
        entries.push((parts[0].to_string(), shape, offset, nbytes));
    }
    let end = next_line(&bytes, &mut pos).ok_or_else(|| bad("missing end marker"))?;
    if end != "end" {
        return Err(bad("missing end marker"));
    }

    let payload = &bytes[pos..];
    let mut tensors = Vec::with_capacity(count);
    for (name, shape, offset, nbytes) in entries {
        if offset + nbytes > payload.len() {
            return Err(bad(&format!("tensor {name} exceeds payload")));
        }
        let count: usize = shape.iter().product();
        if count * 8 != nbytes {
            return Err(bad(&format!("tensor {name} shape/bytes mismatch")));
        }
        let data = payload[offset..offset + nbytes]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        tensors.push(OwnedTensor { name, shape, data });
    }

    let meta_path = meta_path(path);
    let meta_json =
        std::fs::read_to_string(&meta_path).map_err(|e| SrnError::io(&meta_path, e))?;
    let meta: CheckpointMeta = serde_json::from_str(&meta_json)
        .map_err(|e| bad(&format!("bad meta sidecar: {e}")))?;
    Ok((tensors, meta))
}
