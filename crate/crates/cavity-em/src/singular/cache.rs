//! On-disk cache of Gram tensors.
//!
//! Layout: 8-byte magic, u64 version, then M, N as u64 and κ, a, b as f64,
//! then quad_grid as u64, all little-endian; then I1, I2, I3 as contiguous
//! (re, im) f64 pairs in [`Tensor4`] order. Any header mismatch is a miss.

use num_complex::Complex64 as C64;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::gram::{GramTensor, Tensor4};
use crate::Error;

const MAGIC: &[u8; 8] = b"CAVGRAM\0";
const VERSION: u64 = 1;
const HEADER_LEN: usize = 8 + 8 * 7;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CacheKey {
    pub m: usize,
    pub n: usize,
    pub kappa: f64,
    pub a: f64,
    pub b: f64,
    pub quad_grid: usize,
}

impl CacheKey {
    pub fn of(g: &GramTensor) -> Self {
        CacheKey { m: g.m, n: g.n, kappa: g.kappa, a: g.a, b: g.b, quad_grid: g.quad_grid }
    }

    fn header(&self) -> Vec<u8> {
        let mut h = Vec::with_capacity(HEADER_LEN);
        h.extend_from_slice(MAGIC);
        h.extend_from_slice(&VERSION.to_le_bytes());
        h.extend_from_slice(&(self.m as u64).to_le_bytes());
        h.extend_from_slice(&(self.n as u64).to_le_bytes());
        h.extend_from_slice(&self.kappa.to_le_bytes());
        h.extend_from_slice(&self.a.to_le_bytes());
        h.extend_from_slice(&self.b.to_le_bytes());
        h.extend_from_slice(&(self.quad_grid as u64).to_le_bytes());
        h
    }

    /// File name derived from the header bits, so distinct keys never collide.
    pub fn file_name(&self) -> String {
        let h = self.header();
        let mut x: u64 = 0xcbf29ce484222325;
        for byte in &h {
            x ^= *byte as u64;
            x = x.wrapping_mul(0x100000001b3);
        }
        format!("gram_M{}_N{}_L{}_{x:016x}.bin", self.m, self.n, self.quad_grid)
    }
}

pub fn encode(g: &GramTensor) -> Vec<u8> {
    let mut out = CacheKey::of(g).header();
    for t in [&g.i1, &g.i2, &g.i3] {
        for v in &t.data {
            out.extend_from_slice(&v.re.to_le_bytes());
            out.extend_from_slice(&v.im.to_le_bytes());
        }
    }
    out
}

/// `None` on any header mismatch or truncation.
pub fn decode(bytes: &[u8], key: &CacheKey) -> Option<GramTensor> {
    if bytes.len() < HEADER_LEN || bytes[..HEADER_LEN] != key.header()[..] {
        return None;
    }
    let size = ((key.m + 1) * (key.n + 1)).pow(2);
    if bytes.len() != HEADER_LEN + 3 * size * 16 {
        return None;
    }
    let f = |i: usize| f64::from_le_bytes(bytes[i..i + 8].try_into().unwrap());
    let mut tensors = (0..3).map(|t| {
        let mut x = Tensor4::zeros(key.m, key.n);
        for (j, v) in x.data.iter_mut().enumerate() {
            let at = HEADER_LEN + (t * size + j) * 16;
            *v = C64::new(f(at), f(at + 8));
        }
        x
    });
    Some(GramTensor {
        m: key.m,
        n: key.n,
        kappa: key.kappa,
        a: key.a,
        b: key.b,
        quad_grid: key.quad_grid,
        i1: tensors.next()?,
        i2: tensors.next()?,
        i3: tensors.next()?,
    })
}

pub fn path_for(dir: &Path, key: &CacheKey) -> PathBuf {
    dir.join(key.file_name())
}

pub fn load(dir: &Path, key: &CacheKey) -> Option<GramTensor> {
    fs::read(path_for(dir, key)).ok().and_then(|b| decode(&b, key))
}

/// Writes to a unique temporary file and renames it into place, so readers
/// never observe a partial file.
pub fn store(dir: &Path, g: &GramTensor) -> Result<PathBuf, Error> {
    fs::create_dir_all(dir)?;
    let key = CacheKey::of(g);
    let target = path_for(dir, &key);
    let tmp = dir.join(format!(".{}.{}.tmp", key.file_name(), std::process::id()));
    let mut f = fs::File::create(&tmp)?;
    f.write_all(&encode(g))?;
    f.sync_all()?;
    drop(f);
    fs::rename(&tmp, &target).map_err(|e| Error::Cache(format!("rename {}: {e}", target.display())))?;
    Ok(target)
}
