//! XMED snapshot/checkpoint files.
//!
//! Layout (little-endian): magic `XMED`, version `u32 = 1`, `ndim: u32`,
//! `shape: u64 x ndim`, `spacing: f64`, `origin: f64 x ndim`, `time: f64`,
//! `step_count: u64`, the `u` array, the `v` array, then one mask byte per
//! node (1 = active). Arrays are row-major, last axis fastest.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::engine::FieldState;
use crate::error::{Error, Result};
use crate::grid::{ConductionMask, GridSpec};

pub const MAGIC: &[u8; 4] = b"XMED";
pub const VERSION: u32 = 1;

pub fn write_snapshot<W: Write>(
    mut w: W,
    state: &FieldState,
    mask: &ConductionMask,
) -> std::io::Result<()> {
    let grid = &state.grid;
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(grid.ndim() as u32).to_le_bytes())?;
    for &n in grid.shape() {
        w.write_all(&(n as u64).to_le_bytes())?;
    }
    w.write_all(&grid.spacing().to_le_bytes())?;
    for &o in grid.origin() {
        w.write_all(&o.to_le_bytes())?;
    }
    w.write_all(&state.t.to_le_bytes())?;
    w.write_all(&state.step_count.to_le_bytes())?;
    for x in state.u.iter().chain(&state.v) {
        w.write_all(&x.to_le_bytes())?;
    }
    let bytes: Vec<u8> = mask.active().iter().map(|&a| a as u8).collect();
    w.write_all(&bytes)?;
    w.flush()
}

pub fn save(path: impl AsRef<Path>, state: &FieldState, mask: &ConductionMask) -> Result<()> {
    let path = path.as_ref();
    state.check_invariants()?;
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_snapshot(BufWriter::with_capacity(1 << 20, file), state, mask)
        .map_err(|e| Error::io(path, e))
}

struct Cursor<R> {
    inner: R,
}

impl<R: Read> Cursor<R> {
    fn bytes<const N: usize>(&mut self) -> std::io::Result<[u8; N]> {
        let mut b = [0u8; N];
        self.inner.read_exact(&mut b)?;
        Ok(b)
    }
    fn u32(&mut self) -> std::io::Result<u32> {
        self.bytes::<4>().map(u32::from_le_bytes)
    }
    fn u64(&mut self) -> std::io::Result<u64> {
        self.bytes::<8>().map(u64::from_le_bytes)
    }
    fn f64(&mut self) -> std::io::Result<f64> {
        self.bytes::<8>().map(f64::from_le_bytes)
    }
    fn f64_vec(&mut self, n: usize) -> std::io::Result<Vec<f64>> {
        let mut raw = vec![0u8; n * 8];
        self.inner.read_exact(&mut raw)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

/// Grid, time and step count from the head of a snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotHeader {
    pub grid: GridSpec,
    pub t: f64,
    pub step_count: u64,
}

fn parse_header<R: Read>(c: &mut Cursor<R>, origin: &Path) -> Result<SnapshotHeader> {
    let bad = |reason: String| Error::format(origin, reason);
    let io = |e: std::io::Error| Error::format(origin, format!("truncated: {e}"));

    let magic = c.bytes::<4>().map_err(io)?;
    if &magic != MAGIC {
        return Err(bad(format!("bad magic {magic:?}")));
    }
    let version = c.u32().map_err(io)?;
    if version != VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    let ndim = c.u32().map_err(io)? as usize;
    if ndim == 0 || ndim > 16 {
        return Err(bad(format!("implausible dimension {ndim}")));
    }
    let mut shape = Vec::with_capacity(ndim);
    for _ in 0..ndim {
        let n = c.u64().map_err(io)?;
        shape.push(usize::try_from(n).map_err(|_| bad(format!("axis length {n} too large")))?);
    }
    let spacing = c.f64().map_err(io)?;
    let mut origin_v = Vec::with_capacity(ndim);
    for _ in 0..ndim {
        origin_v.push(c.f64().map_err(io)?);
    }
    let grid = GridSpec::new(shape, spacing, origin_v).map_err(|e| bad(e.to_string()))?;
    let t = c.f64().map_err(io)?;
    let step_count = c.u64().map_err(io)?;
    Ok(SnapshotHeader {
        grid,
        t,
        step_count,
    })
}

/// Reads only the header of a snapshot file.
pub fn read_header(path: impl AsRef<Path>) -> Result<SnapshotHeader> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_header(
        &mut Cursor {
            inner: BufReader::new(file),
        },
        path,
    )
}

/// Reads a snapshot; `origin` names the source in error messages.
pub fn read_snapshot<R: Read>(r: R, origin: &Path) -> Result<(FieldState, ConductionMask)> {
    let mut c = Cursor { inner: r };
    let bad = |reason: String| Error::format(origin, reason);
    let io = |e: std::io::Error| Error::format(origin, format!("truncated: {e}"));
    let SnapshotHeader {
        grid,
        t,
        step_count,
    } = parse_header(&mut c, origin)?;
    let n = grid.node_count();
    let u = c.f64_vec(n).map_err(io)?;
    let v = c.f64_vec(n).map_err(io)?;
    let mut raw = vec![0u8; n];
    c.inner.read_exact(&mut raw).map_err(io)?;
    if let Some(b) = raw.iter().find(|&&b| b > 1) {
        return Err(bad(format!("mask byte {b} is neither 0 nor 1")));
    }
    let mut trailing = [0u8; 1];
    if c.inner.read(&mut trailing).map_err(io)? != 0 {
        return Err(bad("trailing bytes after mask".into()));
    }
    let mask = ConductionMask::new(grid.clone(), raw.into_iter().map(|b| b == 1).collect())
        .map_err(|e| bad(e.to_string()))?;
    let state = FieldState {
        grid,
        u,
        v,
        t,
        step_count,
    };
    state.check_invariants().map_err(|e| bad(e.to_string()))?;
    Ok((state, mask))
}

pub fn load(path: impl AsRef<Path>) -> Result<(FieldState, ConductionMask)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_snapshot(BufReader::with_capacity(1 << 20, file), path)
}
