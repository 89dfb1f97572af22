//! Binary channel dump for cross-implementation diffing.
//!
//! Layout, all little-endian:
//!
//! ```text
//! magic      8 bytes  "MACHDUMP"
//! version    u32      1
//! users      u32
//! n_cl       u32
//! n_ray      u32
//! n_r        u32
//! m_t        u32
//! noise_var  f64
//! per user, per path (i * n_ray + j):
//!            f64 × 6  theta_t, phi_t, theta_r, phi_r, Re α, Im α
//! per user:  n_r × m_t complex entries, row-major, each (Re, Im) as f64
//! ```

use std::path::Path;

use crate::channel::{Angles, ChannelSet, PathSet};
use crate::error::{Error, Result};
use crate::linalg::{C64, CMatrix};

pub const MAGIC: &[u8; 8] = b"MACHDUMP";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelDump {
    pub paths: Vec<PathSet>,
    pub per_user: Vec<CMatrix>,
    pub noise_var: f64,
}

pub fn encode(paths: &[PathSet], channels: &ChannelSet) -> Vec<u8> {
    let n_cl = paths.first().map_or(0, |p| p.n_cl);
    let n_ray = paths.first().map_or(0, |p| p.n_ray);
    let n_r = channels.n_r();
    let m_t = channels.stacked.ncols();
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    for v in [VERSION, paths.len() as u32, n_cl as u32, n_ray as u32, n_r as u32, m_t as u32] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&channels.noise_var.to_le_bytes());
    for ps in paths {
        for p in 0..ps.len() {
            let (d, a, g) = (ps.departure[p], ps.arrival[p], ps.gains[p]);
            for v in [d.theta, d.phi, a.theta, a.phi, g.re, g.im] {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    for h in &channels.per_user {
        for r in 0..h.nrows() {
            for c in 0..h.ncols() {
                out.extend_from_slice(&h[(r, c)].re.to_le_bytes());
                out.extend_from_slice(&h[(r, c)].im.to_le_bytes());
            }
        }
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N]> {
        let end = self.pos + N;
        let bytes = self
            .buf
            .get(self.pos..end)
            .ok_or_else(|| Error::InvalidConfig("channel dump truncated".into()))?;
        self.pos = end;
        Ok(bytes.try_into().expect("length checked"))
    }

    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take()?) as usize)
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take()?))
    }
}

pub fn decode(buf: &[u8]) -> Result<ChannelDump> {
    let mut r = Reader { buf, pos: 0 };
    if &r.take::<8>()? != MAGIC {
        return Err(Error::InvalidConfig("not a channel dump".into()));
    }
    let version = r.u32()? as u32;
    if version != VERSION {
        return Err(Error::InvalidConfig(format!("unsupported dump version {version}")));
    }
    let (users, n_cl, n_ray, n_r, m_t) = (r.u32()?, r.u32()?, r.u32()?, r.u32()?, r.u32()?);
    let noise_var = r.f64()?;
    let mut paths = Vec::with_capacity(users);
    for _ in 0..users {
        let count = n_cl * n_ray;
        let mut ps = PathSet {
            n_cl,
            n_ray,
            spread: f64::NAN,
            gains: Vec::with_capacity(count),
            departure: Vec::with_capacity(count),
            arrival: Vec::with_capacity(count),
        };
        for _ in 0..count {
            let v: [f64; 6] = [r.f64()?, r.f64()?, r.f64()?, r.f64()?, r.f64()?, r.f64()?];
            ps.departure.push(Angles { theta: v[0], phi: v[1] });
            ps.arrival.push(Angles { theta: v[2], phi: v[3] });
            ps.gains.push(C64::new(v[4], v[5]));
        }
        paths.push(ps);
    }
    let mut per_user = Vec::with_capacity(users);
    for _ in 0..users {
        let mut h = CMatrix::zeros(n_r, m_t);
        for row in 0..n_r {
            for col in 0..m_t {
                h[(row, col)] = C64::new(r.f64()?, r.f64()?);
            }
        }
        per_user.push(h);
    }
    if r.pos != buf.len() {
        return Err(Error::InvalidConfig("trailing bytes in channel dump".into()));
    }
    Ok(ChannelDump {
        paths,
        per_user,
        noise_var,
    })
}

pub fn write_dump(path: &Path, paths: &[PathSet], channels: &ChannelSet) -> Result<()> {
    std::fs::write(path, encode(paths, channels)).map_err(|e| Error::io(path, e))
}

pub fn read_dump(path: &Path) -> Result<ChannelDump> {
    decode(&std::fs::read(path).map_err(|e| Error::io(path, e))?)
}
