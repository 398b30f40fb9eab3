//! `BQF1` binary snapshots.
//!
//! Layout (little-endian): magic `BQF1`; `u32` version (= 1), `u32` d,
//! `u32` N, `u32` M_max, `u32` G; `f64` L, `f64` t; then for each sector
//! `m = 0..=M_max` the `G^{d(N+m)}` amplitudes as `(f64 re, f64 im)` pairs
//! in row-major order, electrons first.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::FockState;
use crate::grid::GridSpec;
use crate::propagator::EvolutionTimeline;

pub const MAGIC: &[u8; 4] = b"BQF1";
pub const VERSION: u32 = 1;

pub fn write_snapshot<W: Write>(mut w: W, state: &FockState, t: f64) -> Result<()> {
    let grid = state.grid();
    w.write_all(MAGIC)?;
    for v in [
        VERSION,
        grid.dimension() as u32,
        state.electrons() as u32,
        state.max_photons() as u32,
        grid.points() as u32,
    ] {
        w.write_all(&v.to_le_bytes())?;
    }
    w.write_all(&grid.length().to_le_bytes())?;
    w.write_all(&t.to_le_bytes())?;
    for z in state.sectors().iter().flatten() {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

/// Reads one snapshot, returning the state and its time stamp.
pub fn read_snapshot<R: Read>(mut r: R) -> Result<(FockState, f64)> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format(format!("bad magic {magic:?}")));
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let d = read_u32(&mut r)? as usize;
    let n = read_u32(&mut r)? as usize;
    let mmax = read_u32(&mut r)? as usize;
    let g = read_u32(&mut r)? as usize;
    let l = read_f64(&mut r)?;
    let t = read_f64(&mut r)?;
    let grid = GridSpec::new(d, l, g).map_err(|e| Error::Format(e.to_string()))?;
    let mut state = FockState::zeros(grid, n, mmax).map_err(|e| Error::Format(e.to_string()))?;
    for m in 0..=mmax {
        for z in state.sector_mut(m).iter_mut() {
            *z = Complex64::new(read_f64(&mut r)?, read_f64(&mut r)?);
        }
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(Error::Format("trailing bytes after last sector".into()));
    }
    Ok((state, t))
}

pub fn snapshot_file_name(index: usize) -> String {
    format!("psi_t{index:06}.bqf")
}

pub fn save_snapshot(path: &Path, state: &FockState, t: f64) -> Result<()> {
    write_snapshot(BufWriter::new(File::create(path)?), state, t)
}

pub fn load_snapshot(path: &Path) -> Result<(FockState, f64)> {
    read_snapshot(BufReader::new(File::open(path)?))
}

/// Writes every `every`-th snapshot (and always the last) into `dir`.
pub fn save_timeline(dir: &Path, timeline: &EvolutionTimeline, every: usize) -> Result<Vec<PathBuf>> {
    let every = every.max(1);
    let last = timeline.len() - 1;
    let mut written = Vec::new();
    for (n, state) in timeline.states.iter().enumerate() {
        if n % every == 0 || n == last {
            let path = dir.join(snapshot_file_name(n));
            save_snapshot(&path, state, timeline.time(n))?;
            written.push(path);
        }
    }
    Ok(written)
}
