//! The `VSCT1` trajectory container.
//!
//! Layout: the magic `b"VSCT1\n"`, one UTF-8 JSON header line, then the raw
//! coefficient payload. Per state, modes run row-major over the stored
//! rectangle `|k_i| <= rect_half` (`k1` outer, `k2` inner, each from `-R` to
//! `R`), and each mode contributes four little-endian `f64`s:
//! `Re(u1), Im(u1), Re(u2), Im(u2)`. Truncated trajectories store the reduced
//! rectangle `R = min(dealias_cutoff, N - 1)`; everything outside is zero by
//! the truncation invariant.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::{ForceSpec, Trajectory};
use crate::spectral::{SpectralField, TorusGrid};

pub const MAGIC: &[u8; 6] = b"VSCT1\n";

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Header {
    l: f64,
    m: usize,
    kappa0: f64,
    /// Modal cutoff `N` for observation files; `null` for full states.
    cutoff: Option<u32>,
    /// Half-width of the stored coefficient rectangle.
    rect_half: usize,
    dt_record: f64,
    t0: f64,
    count: usize,
    nu: Option<f64>,
    force: Option<ForceSpec>,
    transient_count: usize,
}

fn stored_rect_half(grid: TorusGrid, cutoff: Option<u32>) -> usize {
    match cutoff {
        Some(n) => grid.dealias_cutoff.min((n as usize).saturating_sub(1)),
        None => grid.dealias_cutoff,
    }
}

pub fn write_trajectory(path: &Path, traj: &Trajectory) -> Result<()> {
    traj.validate_uniform()?;
    if traj.is_empty() {
        return Err(Error::invalid("refusing to write an empty trajectory"));
    }
    let grid = traj.states[0].grid();
    let rect_half = stored_rect_half(grid, traj.cutoff);
    let header = Header {
        l: grid.l,
        m: grid.m,
        kappa0: grid.kappa0,
        cutoff: traj.cutoff,
        rect_half,
        dt_record: traj.dt_record(),
        t0: traj.start_time(),
        count: traj.len(),
        nu: traj.nu,
        force: traj.force.clone(),
        transient_count: traj.transient_count,
    };
    let mut out = BufWriter::new(File::create(path)?);
    out.write_all(MAGIC)?;
    out.write_all(serde_json::to_string(&header)?.as_bytes())?;
    out.write_all(b"\n")?;
    let r = rect_half as i64;
    for state in &traj.states {
        for k1 in -r..=r {
            for k2 in -r..=r {
                let c = state.coeff(k1, k2);
                for comp in c {
                    out.write_all(&comp.re.to_le_bytes())?;
                    out.write_all(&comp.im.to_le_bytes())?;
                }
            }
        }
    }
    out.flush()?;
    Ok(())
}

pub fn read_trajectory(path: &Path) -> Result<Trajectory> {
    let mut reader = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 6];
    reader.read_exact(&mut magic).map_err(|_| {
        Error::Format(format!("{}: too short for the VSCT1 magic", path.display()))
    })?;
    if &magic != MAGIC {
        return Err(Error::Format(format!(
            "{}: bad magic {:?}",
            path.display(),
            magic
        )));
    }
    let mut header_line = Vec::new();
    loop {
        let mut byte = [0u8; 1];
        reader.read_exact(&mut byte).map_err(|_| {
            Error::Format(format!("{}: header line is not terminated", path.display()))
        })?;
        if byte[0] == b'\n' {
            break;
        }
        header_line.push(byte[0]);
        if header_line.len() > 1 << 20 {
            return Err(Error::Format("header line exceeds 1 MiB".into()));
        }
    }
    let header: Header = serde_json::from_slice(&header_line)?;
    let grid = TorusGrid::new(header.l, header.m)?;
    if (grid.kappa0 - header.kappa0).abs() > 1e-12 * grid.kappa0 {
        return Err(Error::Format(format!(
            "kappa0 {} disagrees with 2 pi / L = {}",
            header.kappa0, grid.kappa0
        )));
    }
    if header.rect_half != stored_rect_half(grid, header.cutoff) {
        return Err(Error::Format(format!(
            "stored rectangle half-width {} does not match grid/cutoff",
            header.rect_half
        )));
    }

    let r = header.rect_half as i64;
    let side = 2 * header.rect_half + 1;
    let state_bytes = side * side * 4 * 8;
    let mut payload = Vec::new();
    reader.read_to_end(&mut payload)?;
    if payload.len() != header.count * state_bytes {
        return Err(Error::Format(format!(
            "payload holds {} bytes but header promises {} states of {} bytes",
            payload.len(),
            header.count,
            state_bytes
        )));
    }

    let mut states = Vec::with_capacity(header.count);
    let mut times = Vec::with_capacity(header.count);
    let mut offset = 0usize;
    let read_f64 = |buf: &[u8], at: usize| {
        f64::from_le_bytes(buf[at..at + 8].try_into().expect("length checked"))
    };
    for idx in 0..header.count {
        let mut state = SpectralField::zeros(grid);
        for k1 in -r..=r {
            for k2 in -r..=r {
                let i = grid.index_of(k1).expect("rect within grid");
                let j = grid.index_of(k2).expect("rect within grid");
                for comp in 0..2 {
                    let re = read_f64(&payload, offset);
                    let im = read_f64(&payload, offset + 8);
                    offset += 16;
                    state.coeffs_mut()[(comp, i, j)] = Complex64::new(re, im);
                }
            }
        }
        states.push(state);
        times.push(header.t0 + idx as f64 * header.dt_record);
    }
    let traj = Trajectory {
        times,
        states,
        cutoff: header.cutoff,
        transient_count: header.transient_count,
        nu: header.nu,
        force: header.force,
    };
    traj.validate_uniform()?;
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{integrate, ForceMode, PhysicsConfig};

    fn sample_trajectory(cutoff: Option<u32>) -> Trajectory {
        let grid = TorusGrid::new(2.0 * std::f64::consts::PI, 16).unwrap();
        let force = ForceSpec::MultiMode {
            modes: vec![
                ForceMode { k: [1, 0], amplitude: [0.03, 0.01] },
                ForceMode { k: [2, 1], amplitude: [0.01, -0.02] },
            ],
        };
        let cfg = PhysicsConfig::new(grid, 0.2, force, 0.01, 0.05).unwrap();
        let u0 = crate::sim::initial_condition(grid, 5);
        integrate(&u0, &cfg, 0.5, 5, cutoff).unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        for cutoff in [None, Some(3u32)] {
            let traj = sample_trajectory(cutoff);
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("t.vsct");
            write_trajectory(&path, &traj).unwrap();
            let back = read_trajectory(&path).unwrap();
            assert_eq!(back.cutoff, traj.cutoff);
            assert_eq!(back.transient_count, traj.transient_count);
            assert_eq!(back.nu, traj.nu);
            assert_eq!(back.force, traj.force);
            assert_eq!(back.len(), traj.len());
            for (a, b) in back.states.iter().zip(traj.states.iter()) {
                assert_eq!(a.coeffs(), b.coeffs(), "coefficients must round-trip bit-exactly");
            }
            for (a, b) in back.times.iter().zip(traj.times.iter()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn truncated_files_store_the_reduced_rectangle() {
        let traj = sample_trajectory(Some(3));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("obs.vsct");
        write_trajectory(&path, &traj).unwrap();
        let bytes = std::fs::metadata(&path).unwrap().len();
        // rect_half = 2 -> 5x5 modes, 32 bytes each.
        let per_state = 5 * 5 * 32;
        assert!(bytes < (traj.len() * per_state + 4096) as u64);
    }

    #[test]
    fn corrupted_payload_is_rejected() {
        let traj = sample_trajectory(None);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.vsct");
        write_trajectory(&path, &traj).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes.truncate(bytes.len() - 8);
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(read_trajectory(&path), Err(Error::Format(_))));

        bytes[0] = b'X';
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(read_trajectory(&path), Err(Error::Format(_))));
    }
}
