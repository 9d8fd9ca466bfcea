//! On-disk count cache in the `FCNT1` binary format.
//!
//! Layout (little-endian): magic `FCNT1`, `u32 p`, `u32 k`, `u8 kind`
//! (0 additive, 1 Heisenberg), `u32 dim`, `u32 n_inputs`, `u64 |G|`, then
//! `|G|` `u64` counts and an xxh64 checksum of the counts block.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use xxhash_rust::xxh64::xxh64;

use crate::counting::{count_fibers_with_budget, CountVector};
use crate::error::{Error, Result};
use crate::group::{GroupKind, GroupSpec};
use crate::morphism::PolyMap;
use crate::ring::ResidueRing;

pub const MAGIC: &[u8; 5] = b"FCNT1";
const HEADER_LEN: usize = 5 + 4 + 4 + 1 + 4 + 4 + 8;

pub fn encode(c: &CountVector) -> Vec<u8> {
    let spec = c.spec();
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * c.counts().len() + 8);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(spec.ring.p() as u32).to_le_bytes());
    out.extend_from_slice(&spec.ring.k().to_le_bytes());
    out.push(spec.kind.code());
    out.extend_from_slice(&(spec.dim() as u32).to_le_bytes());
    out.extend_from_slice(&c.n_inputs().to_le_bytes());
    out.extend_from_slice(&(spec.order() as u64).to_le_bytes());
    let start = out.len();
    for v in c.counts() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    let sum = xxh64(&out[start..], 0);
    out.extend_from_slice(&sum.to_le_bytes());
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        let end = self.pos + n;
        let s = self.bytes.get(self.pos..end).ok_or_else(|| Error::CorruptCache("truncated file".into()))?;
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn decode(bytes: &[u8], source: &str) -> Result<CountVector> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(5)? != MAGIC {
        return Err(Error::CorruptCache("bad magic".into()));
    }
    let p = r.u32()? as u64;
    let k = r.u32()?;
    let kind = r.take(1)?[0];
    let dim = r.u32()? as usize;
    let n_inputs = r.u32()?;
    let order = r.u64()?;
    let kind = match (kind, dim) {
        (0, d) => GroupKind::Additive { dim: d },
        (1, 3) => GroupKind::Heisenberg,
        _ => return Err(Error::CorruptCache(format!("unknown target kind {kind} of dimension {dim}"))),
    };
    let spec = GroupSpec::new(kind, ResidueRing::new(p, k)?)?;
    if spec.order() as u64 != order {
        return Err(Error::CorruptCache(format!("group order {order} does not match {spec}")));
    }
    let start = r.pos;
    let counts = (0..order).map(|_| r.u64()).collect::<Result<Vec<u64>>>()?;
    let block = &bytes[start..r.pos];
    if r.u64()? != xxh64(block, 0) {
        return Err(Error::CorruptCache("checksum mismatch".into()));
    }
    if r.pos != bytes.len() {
        return Err(Error::CorruptCache("trailing bytes".into()));
    }
    CountVector::from_counts(spec, counts, n_inputs, source)
}

/// Stable key of a map: hash of its canonical text.
pub fn map_hash(f: &PolyMap) -> u64 {
    xxh64(f.canonical().as_bytes(), 0)
}

/// Directory of `FCNT1` files keyed by (map hash, p, k).
#[derive(Clone, Debug)]
pub struct CountCache {
    dir: PathBuf,
}

impl CountCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, f: &PolyMap, ring: &ResidueRing) -> PathBuf {
        self.dir.join(format!("{:016x}_p{}_k{}.fcnt", map_hash(f), ring.p(), ring.k()))
    }

    /// Reads the cached counts if present; the second component tells
    /// whether the cache was hit.
    pub fn load_or_count(&self, f: &PolyMap, ring: &ResidueRing, budget: u64) -> Result<(CountVector, bool)> {
        let path = self.path_for(f, ring);
        let source = format!("{} over {ring}", f.label());
        if path.exists() {
            let c = decode(&fs::read(&path)?, &source)?;
            if c.spec().kind != f.target() || c.n_inputs() as usize != f.n_inputs() {
                return Err(Error::CorruptCache(format!("{} does not belong to {f}", path.display())));
            }
            return Ok((c, true));
        }
        let c = count_fibers_with_budget(f, ring, budget)?;
        fs::create_dir_all(&self.dir)?;
        let tmp = path.with_extension("tmp");
        fs::File::create(&tmp)?.write_all(&encode(&c))?;
        fs::rename(&tmp, &path)?;
        Ok((c, false))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::count_fibers;
    use crate::morphism::Builtin;
    use crate::ring::{make_ring, DEFAULT_BUDGET};

    #[test]
    fn header_layout() {
        let c = count_fibers(&Builtin::Power(2).build().unwrap(), &make_ring(5, 1).unwrap()).unwrap();
        let bytes = encode(&c);
        assert_eq!(&bytes[..5], b"FCNT1");
        assert_eq!(&bytes[5..9], &5u32.to_le_bytes());
        assert_eq!(&bytes[9..13], &1u32.to_le_bytes());
        assert_eq!(bytes[13], 0);
        assert_eq!(&bytes[14..18], &1u32.to_le_bytes());
        assert_eq!(&bytes[18..22], &1u32.to_le_bytes());
        assert_eq!(&bytes[22..30], &5u64.to_le_bytes());
        assert_eq!(&bytes[30..38], &1u64.to_le_bytes());
        assert_eq!(bytes.len(), HEADER_LEN + 5 * 8 + 8);
    }

    #[test]
    fn round_trip_and_corruption() {
        let c = count_fibers(&Builtin::HeisenbergEx.build().unwrap(), &make_ring(3, 1).unwrap()).unwrap();
        let bytes = encode(&c);
        let back = decode(&bytes, c.source()).unwrap();
        assert_eq!(back, c);

        let mut bad = bytes.clone();
        bad[HEADER_LEN + 3] ^= 1;
        assert!(matches!(decode(&bad, ""), Err(Error::CorruptCache(_))));
        assert!(matches!(decode(&bytes[..bytes.len() - 1], ""), Err(Error::CorruptCache(_))));
        let mut magic = bytes.clone();
        magic[0] = b'G';
        assert!(matches!(decode(&magic, ""), Err(Error::CorruptCache(_))));
    }

    #[test]
    fn cache_hit_is_bit_identical() {
        let dir = std::env::temp_dir().join(format!("fcnt-test-{}", std::process::id()));
        let _ = fs::remove_dir_all(&dir);
        let cache = CountCache::new(&dir);
        let f = Builtin::Tightness(2).build().unwrap();
        let ring = make_ring(3, 2).unwrap();
        let (fresh, hit) = cache.load_or_count(&f, &ring, DEFAULT_BUDGET).unwrap();
        assert!(!hit);
        let (cached, hit) = cache.load_or_count(&f, &ring, DEFAULT_BUDGET).unwrap();
        assert!(hit);
        assert_eq!(fresh, cached);
        assert_eq!(encode(&fresh), fs::read(cache.path_for(&f, &ring)).unwrap());
        fs::remove_dir_all(&dir).unwrap();
    }
}
