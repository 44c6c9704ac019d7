//! Raw impulse dump: a 16-byte header (`LVTR`, u32 version, u64 count)
//! followed by little-endian records of time and three axis impulses.

use std::io::{Read, Write};

use super::photons::{wavevector, PhotonEventStream};
use super::OracleError;
use crate::constants::HBAR;
use crate::scenario::BeamSpec;

pub const MAGIC: &[u8; 4] = b"LVTR";
pub const VERSION: u32 = 1;
pub const RECORD_BYTES: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DumpRecord {
    pub time: f64,
    pub impulse: [f64; 3],
}

/// Merges both streams by time into per-event impulses on the particle.
pub fn records(scatter: &PhotonEventStream, absorb: &PhotonEventStream, beam: &BeamSpec) -> Vec<DumpRecord> {
    let k0 = beam.k0();
    let pz = HBAR * beam.kz();
    let mut out = Vec::with_capacity(scatter.len() + absorb.len());
    for (&time, &d) in scatter.times.iter().zip(&scatter.directions) {
        let k = wavevector(k0, d);
        out.push(DumpRecord {
            time,
            impulse: [-HBAR * k[0], -HBAR * k[1], pz - HBAR * k[2]],
        });
    }
    out.extend(absorb.times.iter().map(|&time| DumpRecord {
        time,
        impulse: [0.0, 0.0, pz],
    }));
    out.sort_by(|a, b| a.time.total_cmp(&b.time));
    out
}

pub fn write_dump<W: Write>(mut w: W, recs: &[DumpRecord]) -> std::io::Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(recs.len() as u64).to_le_bytes())?;
    for r in recs {
        w.write_all(&r.time.to_le_bytes())?;
        for q in r.impulse {
            w.write_all(&q.to_le_bytes())?;
        }
    }
    w.flush()
}

fn f64_at(buf: &[u8], i: usize) -> f64 {
    f64::from_le_bytes(buf[8 * i..8 * i + 8].try_into().expect("8 bytes"))
}

pub fn read_dump<R: Read>(mut r: R) -> Result<Vec<DumpRecord>, OracleError> {
    let bad = |e: std::io::Error| OracleError::Dump(e.to_string());
    let mut header = [0u8; 16];
    r.read_exact(&mut header).map_err(bad)?;
    if &header[0..4] != MAGIC {
        return Err(OracleError::Dump("missing LVTR magic".into()));
    }
    let version = u32::from_le_bytes(header[4..8].try_into().expect("4 bytes"));
    if version != VERSION {
        return Err(OracleError::Dump(format!("unsupported version {version}")));
    }
    let count = u64::from_le_bytes(header[8..16].try_into().expect("8 bytes"));
    let mut out = Vec::with_capacity(count.min(1 << 24) as usize);
    let mut buf = [0u8; RECORD_BYTES];
    for _ in 0..count {
        r.read_exact(&mut buf).map_err(bad)?;
        out.push(DumpRecord {
            time: f64_at(&buf, 0),
            impulse: [f64_at(&buf, 1), f64_at(&buf, 2), f64_at(&buf, 3)],
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::optics::compute_coefficients;
    use crate::oracle::photons::simulate_photon_streams;

    #[test]
    fn round_trip() {
        let s = fixtures::baseline_70nm();
        let c = compute_coefficients(&s.particle, &s.beam);
        let duration = 1.2e5 * s.beam.photon_energy() / c.scattered_power;
        let (sc, ab) = simulate_photon_streams(&c, &s.beam, duration, 4).unwrap();
        let recs = records(&sc, &ab, &s.beam);
        assert_eq!(recs.len(), sc.len() + ab.len());
        let mut bytes = Vec::new();
        write_dump(&mut bytes, &recs).unwrap();
        assert_eq!(bytes.len(), 16 + RECORD_BYTES * recs.len());
        assert_eq!(&bytes[0..4], b"LVTR");
        let back = read_dump(bytes.as_slice()).unwrap();
        assert_eq!(back, recs);
        assert!(back.windows(2).all(|w| w[0].time <= w[1].time));
    }

    #[test]
    fn rejects_garbage() {
        assert!(read_dump(&b"NOPE\x01\0\0\0\0\0\0\0\0\0\0\0"[..]).is_err());
        let mut short = Vec::new();
        short.extend_from_slice(MAGIC);
        short.extend_from_slice(&VERSION.to_le_bytes());
        short.extend_from_slice(&3u64.to_le_bytes());
        assert!(read_dump(short.as_slice()).is_err());
    }
}
