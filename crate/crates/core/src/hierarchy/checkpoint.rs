//! Versioned binary checkpoints of a hierarchy state.
//!
//! Layout (little endian): magic, format version, model and decomposition
//! fingerprints, depth, mode count, system dimension, ADO count, group
//! descriptors, time, then the rescaled flat ADO array as (re, im) pairs.

use std::io::{Read, Write};

use num_complex::Complex64 as C64;

use super::{HeomOperator, HierarchyState, ModeGroup};
use crate::error::{Error, Result};
use crate::fingerprint::{decomposition_fingerprint, model_fingerprint, Fingerprint};

const MAGIC: &[u8; 8] = b"HEOMCKPT";
pub const FORMAT_VERSION: u32 = 1;

fn io(e: std::io::Error) -> Error {
    Error::Checkpoint(e.to_string())
}

pub fn write_checkpoint<W: Write>(
    op: &HeomOperator,
    state: &HierarchyState,
    mut w: W,
) -> Result<()> {
    if state.data.len() != op.state_len() {
        return Err(Error::Checkpoint(
            "state does not belong to this hierarchy".into(),
        ));
    }
    let table = op.table();
    w.write_all(MAGIC).map_err(io)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes()).map_err(io)?;
    w.write_all(&model_fingerprint(op.model())).map_err(io)?;
    w.write_all(&decomposition_fingerprint(op.decompositions()))
        .map_err(io)?;
    for v in [table.depth(), table.modes(), op.dim(), table.len()] {
        w.write_all(&(v as u64).to_le_bytes()).map_err(io)?;
    }
    w.write_all(&(table.groups().len() as u64).to_le_bytes())
        .map_err(io)?;
    for g in table.groups() {
        for v in group_words(g) {
            w.write_all(&v.to_le_bytes()).map_err(io)?;
        }
    }
    w.write_all(&state.time.to_le_bytes()).map_err(io)?;
    let mut buf = Vec::with_capacity(state.data.len() * 16);
    for z in &state.data {
        buf.extend_from_slice(&z.re.to_le_bytes());
        buf.extend_from_slice(&z.im.to_le_bytes());
    }
    w.write_all(&buf).map_err(io)?;
    Ok(())
}

fn group_words(g: &ModeGroup) -> [u64; 4] {
    let cap = |c: Option<usize>| c.map_or(u64::MAX, |c| c as u64);
    [g.start as u64, g.len as u64, cap(g.cap), cap(g.tail_cap)]
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b).map_err(io)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    Ok(f64::from_bits(read_u64(r)?))
}

/// Restores a state into `op`, refusing checkpoints written for a
/// different model, decomposition, or layout.
pub fn read_checkpoint<R: Read>(op: &HeomOperator, mut r: R) -> Result<HierarchyState> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).map_err(io)?;
    if &magic != MAGIC {
        return Err(Error::Checkpoint("not a hierarchy checkpoint".into()));
    }
    let mut v = [0u8; 4];
    r.read_exact(&mut v).map_err(io)?;
    let version = u32::from_le_bytes(v);
    if version != FORMAT_VERSION {
        return Err(Error::Checkpoint(format!(
            "unsupported format version {version}"
        )));
    }
    let mut model_fp: Fingerprint = [0; 32];
    let mut dec_fp: Fingerprint = [0; 32];
    r.read_exact(&mut model_fp).map_err(io)?;
    r.read_exact(&mut dec_fp).map_err(io)?;
    if model_fp != model_fingerprint(op.model()) {
        return Err(Error::Checkpoint("model fingerprint mismatch".into()));
    }
    if dec_fp != decomposition_fingerprint(op.decompositions()) {
        return Err(Error::Checkpoint(
            "decomposition fingerprint mismatch".into(),
        ));
    }
    let table = op.table();
    let expected = [table.depth(), table.modes(), op.dim(), table.len()];
    for (name, want) in ["depth", "modes", "dim", "ados"].iter().zip(expected) {
        let got = read_u64(&mut r)?;
        if got != want as u64 {
            return Err(Error::Checkpoint(format!(
                "{name} mismatch: file {got}, hierarchy {want}"
            )));
        }
    }
    let groups = read_u64(&mut r)? as usize;
    if groups != table.groups().len() {
        return Err(Error::Checkpoint("group layout mismatch".into()));
    }
    for g in table.groups() {
        let got = [
            read_u64(&mut r)?,
            read_u64(&mut r)?,
            read_u64(&mut r)?,
            read_u64(&mut r)?,
        ];
        let want = group_words(g);
        if got != want {
            return Err(Error::Checkpoint("group layout mismatch".into()));
        }
    }
    let time = read_f64(&mut r)?;
    let n = op.state_len();
    let mut buf = vec![0u8; n * 16];
    r.read_exact(&mut buf).map_err(io)?;
    let data = buf
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            C64::new(re, im)
        })
        .collect();
    op.state_from_data(time, data)
}
