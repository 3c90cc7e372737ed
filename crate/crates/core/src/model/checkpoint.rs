//! Binary model checkpoints.
//!
//! Layout (little-endian): 8-byte magic `STADCKPT`, format version (u32),
//! schema hash (u64), feature-config hash (u64), M (u32), D (u32),
//! row-major W (M·D f64), then b (M f64). The two hashes let loading fail
//! fast when a checkpoint is applied to a different relation schema or
//! encoder configuration.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2};

use crate::error::{CoreError, Result};
use crate::model::LinearModel;

const MAGIC: &[u8; 8] = b"STADCKPT";
const VERSION: u32 = 1;

pub fn save(
    path: &Path,
    model: &LinearModel,
    schema_hash: u64,
    feature_hash: u64,
) -> Result<()> {
    let file = File::create(path).map_err(|e| CoreError::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| CoreError::io(path, e);

    w.write_all(MAGIC).map_err(io)?;
    w.write_all(&VERSION.to_le_bytes()).map_err(io)?;
    w.write_all(&schema_hash.to_le_bytes()).map_err(io)?;
    w.write_all(&feature_hash.to_le_bytes()).map_err(io)?;
    w.write_all(&(model.num_relations() as u32).to_le_bytes())
        .map_err(io)?;
    w.write_all(&(model.feature_dim() as u32).to_le_bytes())
        .map_err(io)?;
    for &v in model.w.iter() {
        w.write_all(&v.to_le_bytes()).map_err(io)?;
    }
    for &v in model.b.iter() {
        w.write_all(&v.to_le_bytes()).map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Loads a checkpoint, verifying magic, version, and both compatibility
/// hashes.
pub fn load(
    path: &Path,
    expected_schema_hash: u64,
    expected_feature_hash: u64,
) -> Result<LinearModel> {
    let file = File::open(path).map_err(|e| CoreError::io(path, e))?;
    let mut r = BufReader::new(file);
    let bad = |msg: String| CoreError::Checkpoint(format!("{}: {msg}", path.display()));

    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)
        .map_err(|e| bad(format!("truncated header: {e}")))?;
    if &magic != MAGIC {
        return Err(bad("not a model checkpoint (bad magic)".into()));
    }
    let version = read_u32(&mut r, path)?;
    if version != VERSION {
        return Err(bad(format!(
            "unsupported format version {version} (expected {VERSION})"
        )));
    }
    let schema_hash = read_u64(&mut r, path)?;
    if schema_hash != expected_schema_hash {
        return Err(bad("relation schema does not match the checkpoint".into()));
    }
    let feature_hash = read_u64(&mut r, path)?;
    if feature_hash != expected_feature_hash {
        return Err(bad("feature config does not match the checkpoint".into()));
    }
    let m = read_u32(&mut r, path)? as usize;
    let d = read_u32(&mut r, path)? as usize;
    if m == 0 || d == 0 {
        return Err(bad(format!("degenerate dimensions {m}×{d}")));
    }

    let mut weights = vec![0.0f64; m * d];
    read_f64s(&mut r, path, &mut weights)?;
    let mut bias = vec![0.0f64; m];
    read_f64s(&mut r, path, &mut bias)?;
    let mut rest = [0u8; 1];
    if r.read(&mut rest).map_err(|e| CoreError::io(path, e))? != 0 {
        return Err(bad("trailing bytes after parameters".into()));
    }
    if weights.iter().chain(&bias).any(|v| !v.is_finite()) {
        return Err(bad("non-finite parameter".into()));
    }

    let w = Array2::from_shape_vec((m, d), weights)
        .map_err(|e| bad(format!("weight shape: {e}")))?;
    Ok(LinearModel {
        w,
        b: Array1::from(bias),
    })
}

fn read_u32<R: Read>(r: &mut R, path: &Path) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)
        .map_err(|e| CoreError::Checkpoint(format!("{}: truncated: {e}", path.display())))?;
    Ok(u32::from_le_bytes(buf))
}

fn read_u64<R: Read>(r: &mut R, path: &Path) -> Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)
        .map_err(|e| CoreError::Checkpoint(format!("{}: truncated: {e}", path.display())))?;
    Ok(u64::from_le_bytes(buf))
}

fn read_f64s<R: Read>(r: &mut R, path: &Path, out: &mut [f64]) -> Result<()> {
    let mut buf = [0u8; 8];
    for slot in out {
        r.read_exact(&mut buf)
            .map_err(|e| CoreError::Checkpoint(format!("{}: truncated: {e}", path.display())))?;
        *slot = f64::from_le_bytes(buf);
    }
    Ok(())
}
