//! Binary field snapshots: a fixed header followed by little-endian `f64`
//! values.
//!
//! Layout: magic `FSNP`, format version (u32), field kind (u8), grid tag
//! (u8), grid descriptor (Cartesian: origin 3×f64, h f64, dims 3×u64;
//! radial: r_min f64, dt f64, length u64), 32-byte configuration digest,
//! value count (u64), values.

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::numerics::{FieldKind, Grid3D, GridField, RadialField};
use crate::real::Real;
use crate::tf_molecule::NuclearConfiguration;

pub const MAGIC: [u8; 4] = *b"FSNP";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridDescriptor {
    Cartesian { origin: [f64; 3], h: f64, dims: [u64; 3] },
    Radial { r_min: f64, dt: f64, len: u64 },
}

impl GridDescriptor {
    pub fn len(&self) -> usize {
        match *self {
            GridDescriptor::Cartesian { dims, .. } => (dims[0] * dims[1] * dims[2]) as usize,
            GridDescriptor::Radial { len, .. } => len as usize,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub kind: FieldKind,
    pub grid: GridDescriptor,
    pub config_digest: [u8; 32],
    pub values: Vec<f64>,
}

/// SHA-256 over the charges and positions as little-endian `f64`.
pub fn config_digest<T: Real>(config: &NuclearConfiguration<T>) -> [u8; 32] {
    let mut h = Sha256::new();
    for (p, z) in config.positions().iter().zip(config.charges()) {
        h.update(z.f64().to_le_bytes());
        for c in p {
            h.update(c.f64().to_le_bytes());
        }
    }
    h.finalize().into()
}

fn kind_tag(k: FieldKind) -> u8 {
    match k {
        FieldKind::Density => 0,
        FieldKind::Potential => 1,
        FieldKind::Charge => 2,
    }
}

fn kind_from(t: u8) -> Result<FieldKind> {
    match t {
        0 => Ok(FieldKind::Density),
        1 => Ok(FieldKind::Potential),
        2 => Ok(FieldKind::Charge),
        _ => Err(Error::Snapshot(format!("unknown field kind {t}"))),
    }
}

impl Snapshot {
    pub fn from_grid_field<T: Real>(field: &GridField<T>, config_digest: [u8; 32]) -> Self {
        let g = field.grid();
        let o = g.origin();
        let d = g.dims();
        Self {
            kind: field.kind(),
            grid: GridDescriptor::Cartesian {
                origin: [o[0].f64(), o[1].f64(), o[2].f64()],
                h: g.h().f64(),
                dims: [d[0] as u64, d[1] as u64, d[2] as u64],
            },
            config_digest,
            values: field.values().iter().map(|v| v.f64()).collect(),
        }
    }

    pub fn from_radial_field<T: Real>(field: &RadialField<T>, config_digest: [u8; 32]) -> Self {
        let g = field.grid();
        Self {
            kind: field.kind(),
            grid: GridDescriptor::Radial {
                r_min: g.r_min().f64(),
                dt: g.dt().f64(),
                len: g.len() as u64,
            },
            config_digest,
            values: field.values().iter().map(|v| v.f64()).collect(),
        }
    }

    /// The Cartesian grid the snapshot was taken on.
    pub fn grid3d(&self) -> Result<Grid3D<f64>> {
        match self.grid {
            GridDescriptor::Cartesian { origin, h, dims } => {
                Grid3D::new(origin, h, [dims[0] as usize, dims[1] as usize, dims[2] as usize])
            }
            GridDescriptor::Radial { .. } => Err(Error::Snapshot("snapshot holds a radial field".into())),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut b = Vec::with_capacity(128 + 8 * self.values.len());
        b.extend_from_slice(&MAGIC);
        b.extend_from_slice(&VERSION.to_le_bytes());
        b.push(kind_tag(self.kind));
        match self.grid {
            GridDescriptor::Cartesian { origin, h, dims } => {
                b.push(0);
                for v in origin {
                    b.extend_from_slice(&v.to_le_bytes());
                }
                b.extend_from_slice(&h.to_le_bytes());
                for d in dims {
                    b.extend_from_slice(&d.to_le_bytes());
                }
            }
            GridDescriptor::Radial { r_min, dt, len } => {
                b.push(1);
                b.extend_from_slice(&r_min.to_le_bytes());
                b.extend_from_slice(&dt.to_le_bytes());
                b.extend_from_slice(&len.to_le_bytes());
            }
        }
        b.extend_from_slice(&self.config_digest);
        b.extend_from_slice(&(self.values.len() as u64).to_le_bytes());
        for v in &self.values {
            b.extend_from_slice(&v.to_le_bytes());
        }
        b
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(Error::Snapshot("bad magic".into()));
        }
        let version = u32::from_le_bytes(r.array()?);
        if version != VERSION {
            return Err(Error::Snapshot(format!("unsupported version {version}")));
        }
        let kind = kind_from(r.take(1)?[0])?;
        let grid = match r.take(1)?[0] {
            0 => {
                let origin = [r.f64()?, r.f64()?, r.f64()?];
                let h = r.f64()?;
                let dims = [r.u64()?, r.u64()?, r.u64()?];
                GridDescriptor::Cartesian { origin, h, dims }
            }
            1 => GridDescriptor::Radial {
                r_min: r.f64()?,
                dt: r.f64()?,
                len: r.u64()?,
            },
            t => return Err(Error::Snapshot(format!("unknown grid tag {t}"))),
        };
        let config_digest: [u8; 32] = r.array()?;
        let n = r.u64()? as usize;
        if n != grid.len() {
            return Err(Error::Snapshot(format!(
                "{n} values for a grid of {} points",
                grid.len()
            )));
        }
        if bytes.len() - r.pos != 8 * n {
            return Err(Error::Snapshot("payload length mismatch".into()));
        }
        let values = (0..n).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
        Ok(Self {
            kind,
            grid,
            config_digest,
            values,
        })
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos + n;
        if end > self.bytes.len() {
            return Err(Error::Snapshot("truncated snapshot".into()));
        }
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut a = [0u8; N];
        a.copy_from_slice(self.take(N)?);
        Ok(a)
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.array()?))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.array()?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    #[test]
    fn round_trip_cartesian() {
        let g = Arc::new(Grid3D::new([-1.0, -0.5, 0.25], 0.125, [4, 3, 5]).unwrap());
        let vals: Vec<f64> = (0..g.len()).map(|i| (i as f64).sin()).collect();
        let f = GridField::new(g.clone(), vals, FieldKind::Density).unwrap();
        let c = NuclearConfiguration::diatomic(1.0, 2.0, 1.5).unwrap();
        let s = Snapshot::from_grid_field(&f, config_digest(&c));
        let bytes = s.to_bytes();
        let back = Snapshot::from_bytes(&bytes).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.grid3d().unwrap(), *g);
        assert!(Snapshot::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(Snapshot::from_bytes(&bad).is_err());
    }

    #[test]
    fn digest_depends_on_geometry() {
        let a = NuclearConfiguration::<f64>::diatomic(1.0, 1.0, 1.5).unwrap();
        let b = NuclearConfiguration::<f64>::diatomic(1.0, 1.0, 1.5000001).unwrap();
        assert_ne!(config_digest(&a), config_digest(&b));
        assert_eq!(config_digest(&a), config_digest(&a.clone()));
    }
}
