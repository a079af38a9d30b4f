//! Self-describing binary checkpoint: header (magic `OLDB`, version, grid
//! and parameters), then the velocity components and tensor entries as
//! row-major little-endian f64 real-space samples.

use crate::error::{Error, Result};
use crate::field::{Field, TensorField, VectorField};
use crate::grid::Grid;
use crate::solver::{Params, SimState};
use std::io::{Read, Write};
use std::path::Path;

const MAGIC: &[u8; 4] = b"OLDB";
const VERSION: u32 = 1;

pub fn write_checkpoint(state: &SimState, path: &Path) -> Result<()> {
    let mut buf: Vec<u8> = Vec::new();
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    let grid = state.grid();
    buf.extend_from_slice(&(grid.dim() as u32).to_le_bytes());
    buf.extend_from_slice(&(grid.points_per_axis() as u32).to_le_bytes());
    for v in [
        grid.box_size(),
        state.t,
        state.params.nu,
        state.params.a,
        state.params.mu,
        state.params.b,
    ] {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    for comp in state.u.components() {
        for v in comp.values() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    for entry in state.tau.entries() {
        for v in entry.values() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(&buf).map_err(|e| Error::io(path, e))
}

pub fn read_checkpoint(path: &Path) -> Result<SimState> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .map_err(|e| Error::io(path, e))?
        .read_to_end(&mut bytes)
        .map_err(|e| Error::io(path, e))?;
    let bad = |reason: &str| Error::Format {
        path: path.display().to_string(),
        reason: reason.to_string(),
    };
    if bytes.len() < 8 || &bytes[0..4] != MAGIC {
        return Err(bad("missing OLDB magic"));
    }
    let mut off = 4;
    let take_u32 = |bytes: &[u8], off: &mut usize| -> Result<u32> {
        if *off + 4 > bytes.len() {
            return Err(bad("truncated header"));
        }
        let v = u32::from_le_bytes(bytes[*off..*off + 4].try_into().unwrap());
        *off += 4;
        Ok(v)
    };
    let version = take_u32(&bytes, &mut off)?;
    if version != VERSION {
        return Err(bad(&format!("unsupported version {version}")));
    }
    let d = take_u32(&bytes, &mut off)? as usize;
    let n = take_u32(&bytes, &mut off)? as usize;
    let take_f64 = |bytes: &[u8], off: &mut usize| -> Result<f64> {
        if *off + 8 > bytes.len() {
            return Err(bad("truncated header"));
        }
        let v = f64::from_le_bytes(bytes[*off..*off + 8].try_into().unwrap());
        *off += 8;
        Ok(v)
    };
    let l = take_f64(&bytes, &mut off)?;
    let t = take_f64(&bytes, &mut off)?;
    let nu = take_f64(&bytes, &mut off)?;
    let a = take_f64(&bytes, &mut off)?;
    let mu = take_f64(&bytes, &mut off)?;
    let b = take_f64(&bytes, &mut off)?;
    let grid = Grid::new(d, n, l)?;
    let modes = grid.modes();
    let expected = off + 8 * modes * (d + d * d);
    if bytes.len() != expected {
        return Err(bad(&format!(
            "payload size mismatch: {} vs expected {expected}",
            bytes.len()
        )));
    }
    let read_field = |off: &mut usize| -> Field {
        let vals: Vec<f64> = (0..modes)
            .map(|i| {
                let s = *off + 8 * i;
                f64::from_le_bytes(bytes[s..s + 8].try_into().unwrap())
            })
            .collect();
        *off += 8 * modes;
        Field::from_values(grid.clone(), vals)
    };
    let mut comps = Vec::with_capacity(d);
    for _ in 0..d {
        comps.push(read_field(&mut off));
    }
    let mut entries = Vec::with_capacity(d * d);
    for _ in 0..d * d {
        entries.push(read_field(&mut off));
    }
    let params = Params::new(nu, a, mu, b)?;
    let mut u = VectorField::new(comps);
    u.divergence_free = true;
    let tau = TensorField::new(entries, true);
    Ok(SimState { t, u, tau, params })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data;

    #[test]
    fn roundtrip_preserves_state() {
        let g = Grid::new(2, 16, 2.0 * std::f64::consts::PI).unwrap();
        let u = data::random_band_velocity(&g, 7, 0.5, 0, 1);
        let tau = data::random_band_tensor(&g, 8, 0.5, 0, 1);
        let st = SimState {
            t: 1.25,
            u,
            tau,
            params: Params::new(0.9, 0.1, 0.2, 0.05).unwrap(),
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("state.oldb");
        write_checkpoint(&st, &path).unwrap();
        let back = read_checkpoint(&path).unwrap();
        assert_eq!(back.t, st.t);
        assert_eq!(back.params.nu, st.params.nu);
        assert_eq!(back.params.b, st.params.b);
        for i in 0..2 {
            assert_eq!(back.u.component(i).values(), st.u.component(i).values());
        }
        for e in 0..4 {
            assert_eq!(back.tau.entries()[e].values(), st.tau.entries()[e].values());
        }
    }

    #[test]
    fn rejects_wrong_magic() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("junk.oldb");
        std::fs::write(&path, b"NOPE0000").unwrap();
        assert!(read_checkpoint(&path).is_err());
    }
}
