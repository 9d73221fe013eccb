//! Binary checkpoints, little-endian throughout.
//!
//! Ground vector: `b"MSEGSV01"`, `N: u32`, `Delta: f64`, `dim: u64`, then
//! `dim` amplitudes as `f64` in sector order.
//!
//! State: `b"MSESTV01"`, `N: u32`, `Delta: f64`, basis label `u8`,
//! `len: u64`, then `len` amplitudes as `(re, im)` pairs of `f64`. `Delta`
//! is NaN when the state does not come from an XXZ run.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::bits::binomial;
use crate::ed::{GroundStateResult, SectorBasis};
use crate::error::{Error, Result};
use crate::mbft::{Basis, ManyBodyState};

pub const GROUND_MAGIC: &[u8; 8] = b"MSEGSV01";
pub const STATE_MAGIC: &[u8; 8] = b"MSESTV01";

/// Ground-state vector as stored on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundCheckpoint {
    pub sites: usize,
    pub delta: f64,
    pub vector: Vec<f64>,
}

impl From<&GroundStateResult> for GroundCheckpoint {
    fn from(gs: &GroundStateResult) -> Self {
        Self {
            sites: gs.sites,
            delta: gs.delta,
            vector: gs.vector.clone(),
        }
    }
}

impl GroundCheckpoint {
    /// Embeds the sector vector into a full position-basis state.
    pub fn to_state(&self) -> Result<ManyBodyState> {
        let basis = SectorBasis::new(self.sites, self.sites / 2)?;
        if basis.len() != self.vector.len() {
            return Err(Error::Format(format!(
                "{} amplitudes for a sector of {}",
                self.vector.len(),
                basis.len()
            )));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1usize << self.sites];
        for (&w, &a) in basis.states().iter().zip(&self.vector) {
            amps[w as usize] = Complex64::new(a, 0.0);
        }
        ManyBodyState::new(self.sites, Basis::Position, amps, Some(self.sites / 2))
    }
}

fn read_array<const K: usize>(r: &mut impl Read) -> Result<[u8; K]> {
    let mut buf = [0u8; K];
    r.read_exact(&mut buf)
        .map_err(|e| Error::Format(format!("truncated header or payload: {e}")))?;
    Ok(buf)
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    Ok(f64::from_le_bytes(read_array(r)?))
}

fn expect_magic(r: &mut impl Read, magic: &[u8; 8]) -> Result<()> {
    let found: [u8; 8] = read_array(r)?;
    if &found != magic {
        return Err(Error::Format(format!(
            "bad magic {:?}, expected {:?}",
            String::from_utf8_lossy(&found),
            String::from_utf8_lossy(magic)
        )));
    }
    Ok(())
}

fn expect_end(r: &mut impl Read) -> Result<()> {
    let mut extra = [0u8; 1];
    match r.read(&mut extra)? {
        0 => Ok(()),
        _ => Err(Error::Format("trailing bytes after payload".into())),
    }
}

pub fn write_ground(w: &mut impl Write, ck: &GroundCheckpoint) -> Result<()> {
    w.write_all(GROUND_MAGIC)?;
    w.write_all(&(ck.sites as u32).to_le_bytes())?;
    w.write_all(&ck.delta.to_le_bytes())?;
    w.write_all(&(ck.vector.len() as u64).to_le_bytes())?;
    for a in &ck.vector {
        w.write_all(&a.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_ground(r: &mut impl Read) -> Result<GroundCheckpoint> {
    expect_magic(r, GROUND_MAGIC)?;
    let sites = u32::from_le_bytes(read_array(r)?) as usize;
    let delta = read_f64(r)?;
    let dim = u64::from_le_bytes(read_array(r)?);
    if sites == 0 || sites > 64 || dim != binomial(sites, sites / 2) {
        return Err(Error::Format(format!(
            "sector size {dim} does not match half filling of {sites} sites"
        )));
    }
    let vector = (0..dim).map(|_| read_f64(r)).collect::<Result<Vec<_>>>()?;
    expect_end(r)?;
    Ok(GroundCheckpoint {
        sites,
        delta,
        vector,
    })
}

pub fn save_ground(path: impl AsRef<Path>, ck: &GroundCheckpoint) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_ground(&mut w, ck)?;
    w.flush()?;
    Ok(())
}

pub fn load_ground(path: impl AsRef<Path>) -> Result<GroundCheckpoint> {
    read_ground(&mut BufReader::new(File::open(path)?))
}

pub fn write_state(w: &mut impl Write, state: &ManyBodyState, delta: f64) -> Result<()> {
    w.write_all(STATE_MAGIC)?;
    w.write_all(&(state.sites() as u32).to_le_bytes())?;
    w.write_all(&delta.to_le_bytes())?;
    w.write_all(&[state.basis().code()])?;
    w.write_all(&(state.amplitudes().len() as u64).to_le_bytes())?;
    for a in state.amplitudes() {
        w.write_all(&a.re.to_le_bytes())?;
        w.write_all(&a.im.to_le_bytes())?;
    }
    Ok(())
}

/// Reads a state and its `Delta`. The particle-number sector is inferred
/// from the nonzero amplitudes.
pub fn read_state(r: &mut impl Read) -> Result<(ManyBodyState, f64)> {
    expect_magic(r, STATE_MAGIC)?;
    let sites = u32::from_le_bytes(read_array(r)?) as usize;
    let delta = read_f64(r)?;
    let [code] = read_array::<1>(r)?;
    let basis = Basis::from_code(code)
        .ok_or_else(|| Error::Format(format!("unknown basis label {code}")))?;
    let len = u64::from_le_bytes(read_array(r)?);
    if sites == 0 || sites > crate::mbft::MAX_STATE_SITES || len != 1u64 << sites {
        return Err(Error::Format(format!(
            "amplitude count {len} does not match {sites} sites"
        )));
    }
    let amps = (0..len)
        .map(|_| Ok(Complex64::new(read_f64(r)?, read_f64(r)?)))
        .collect::<Result<Vec<_>>>()?;
    expect_end(r)?;
    let sector = infer_sector(&amps);
    let state = ManyBodyState::new(sites, basis, amps, sector)?;
    Ok((state, delta))
}

fn infer_sector(amps: &[Complex64]) -> Option<usize> {
    let mut counts = amps
        .iter()
        .enumerate()
        .filter(|(_, a)| a.norm_sqr() > 0.0)
        .map(|(w, _)| w.count_ones() as usize);
    let first = counts.next()?;
    counts.all(|c| c == first).then_some(first)
}

pub fn save_state(path: impl AsRef<Path>, state: &ManyBodyState, delta: f64) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_state(&mut w, state, delta)?;
    w.flush()?;
    Ok(())
}

pub fn load_state(path: impl AsRef<Path>) -> Result<(ManyBodyState, f64)> {
    read_state(&mut BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mbft::random_sector_state;
    use crate::modes::Boundary;

    #[test]
    fn ground_round_trip() {
        let ck = GroundCheckpoint {
            sites: 4,
            delta: 0.3,
            vector: vec![0.1, -0.2, 0.3, 0.4, -0.5, 0.6],
        };
        let mut buf = Vec::new();
        write_ground(&mut buf, &ck).unwrap();
        assert_eq!(&buf[..8], GROUND_MAGIC);
        assert_eq!(buf.len(), 8 + 4 + 8 + 8 + 6 * 8);
        assert_eq!(read_ground(&mut buf.as_slice()).unwrap(), ck);
    }

    #[test]
    fn state_round_trip() {
        let s = random_sector_state(6, 3, Basis::Momentum(Boundary::Antiperiodic), 5).unwrap();
        let mut buf = Vec::new();
        write_state(&mut buf, &s, 0.25).unwrap();
        let (back, delta) = read_state(&mut buf.as_slice()).unwrap();
        assert_eq!(back, s);
        assert_eq!(delta, 0.25);
    }

    #[test]
    fn corrupt_files_are_rejected() {
        let ck = GroundCheckpoint {
            sites: 4,
            delta: 0.0,
            vector: vec![0.0; 6],
        };
        let mut buf = Vec::new();
        write_ground(&mut buf, &ck).unwrap();
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(
            read_ground(&mut bad.as_slice()),
            Err(Error::Format(_))
        ));
        let short = &buf[..buf.len() - 3];
        assert!(matches!(
            read_ground(&mut &short[..]),
            Err(Error::Format(_))
        ));
        let mut long = buf.clone();
        long.push(0);
        assert!(matches!(
            read_ground(&mut long.as_slice()),
            Err(Error::Format(_))
        ));
        assert!(read_state(&mut buf.as_slice()).is_err());
    }
}
