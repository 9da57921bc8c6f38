//! On-disk prime lists.
//!
//! Layout: the magic bytes `PS4P`, a little-endian `u32` format version, the
//! little-endian `u64` sieve limit, then every prime as the LEB128 varint of
//! its gap to the previous prime (the first gap is taken from 0).

use std::fs;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use super::{ArithError, PrimeTable, Result, SieveConfig};

pub const MAGIC: &[u8; 4] = b"PS4P";
pub const VERSION: u32 = 1;

/// Environment variable naming the default cache directory.
pub const CACHE_DIR_ENV: &str = "PS4_CACHE_DIR";

pub fn cache_file(dir: &Path, limit: u64) -> PathBuf {
    dir.join(format!("primes-{limit}.ps4p"))
}

fn push_varint(out: &mut Vec<u8>, mut v: u64) {
    loop {
        let byte = (v & 0x7f) as u8;
        v >>= 7;
        if v == 0 {
            out.push(byte);
            return;
        }
        out.push(byte | 0x80);
    }
}

fn read_varint(bytes: &[u8], pos: &mut usize) -> Result<u64> {
    let mut v = 0u64;
    let mut shift = 0;
    loop {
        let b = *bytes
            .get(*pos)
            .ok_or_else(|| ArithError::Cache("truncated varint".into()))?;
        *pos += 1;
        if shift >= 64 {
            return Err(ArithError::Cache("varint overflow".into()));
        }
        v |= u64::from(b & 0x7f) << shift;
        if b & 0x80 == 0 {
            return Ok(v);
        }
        shift += 7;
    }
}

pub fn encode(limit: u64, primes: &[u64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + primes.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&limit.to_le_bytes());
    let mut prev = 0;
    for &p in primes {
        push_varint(&mut out, p - prev);
        prev = p;
    }
    out
}

/// Decode a cache image into `(limit, primes)`.
pub fn decode(bytes: &[u8]) -> Result<(u64, Vec<u64>)> {
    if bytes.len() < 16 || &bytes[..4] != MAGIC {
        return Err(ArithError::Cache("bad magic".into()));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(ArithError::Cache(format!("unsupported version {version}")));
    }
    let limit = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
    let mut primes = Vec::new();
    let mut pos = 16;
    let mut prev = 0u64;
    while pos < bytes.len() {
        let gap = read_varint(bytes, &mut pos)?;
        prev = prev
            .checked_add(gap)
            .ok_or_else(|| ArithError::Cache("gap overflow".into()))?;
        primes.push(prev);
    }
    Ok((limit, primes))
}

pub fn write(table: &PrimeTable, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension("tmp");
    {
        let mut w = BufWriter::new(fs::File::create(&tmp)?);
        w.write_all(&encode(table.limit(), table.primes()))?;
        w.flush()?;
    }
    fs::rename(tmp, path)?;
    Ok(())
}

pub fn read(path: &Path) -> Result<(u64, Vec<u64>)> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode(&bytes)
}

/// Load the table for `limit` from `dir` if a valid file exists, otherwise
/// sieve and store it. Without a directory this is a plain sieve.
pub fn load_or_sieve(limit: u64, dir: Option<&Path>, config: &SieveConfig) -> Result<PrimeTable> {
    let Some(dir) = dir else {
        return PrimeTable::sieve_with(limit, config);
    };
    let path = cache_file(dir, limit);
    if path.exists() {
        if let Ok((cached_limit, primes)) = read(&path) {
            if cached_limit == limit {
                return PrimeTable::from_primes(limit, primes, config);
            }
        }
    }
    let table = PrimeTable::sieve_with(limit, config)?;
    write(&table, &path)?;
    Ok(table)
}
