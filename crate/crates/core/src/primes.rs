//! Prime enumeration, prime counting and smooth k-free enumeration.
//!
//! The sieve is segmented and stores only odd candidates, one bit each.
//! Segments are independent and are sieved in parallel; their outputs are
//! concatenated in segment order, so the table is identical for any thread
//! count.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};

/// Odd candidates per segment. One segment spans `2 * SEGMENT_ODDS` integers.
pub const SEGMENT_ODDS: usize = 1 << 20;

/// Default cap on the number of entries [`enumerate_smooth_kfree`] will build.
pub const DEFAULT_ENUMERATION_CAP: u64 = 1_000_000;

const CACHE_MAGIC: &[u8; 4] = b"PSPT";
const CACHE_VERSION: u32 = 1;

/// Sorted primes up to an inclusive bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeTable {
    limit: u64,
    primes: Vec<u32>,
}

impl PrimeTable {
    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u32] {
        &self.primes
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    /// Number of primes `<= x`, by binary search over the stored list.
    pub fn prime_count(&self, x: f64) -> Result<usize> {
        if x.is_nan() {
            return Err(invalid("prime_count argument is NaN"));
        }
        if x > self.limit as f64 {
            return Err(Error::OutOfRange {
                what: "x",
                value: x,
                limit: self.limit,
            });
        }
        if x < 2.0 {
            return Ok(0);
        }
        let bound = x.floor() as u64;
        Ok(self.primes.partition_point(|&p| u64::from(p) <= bound))
    }

    /// The primes `<= cutoff`, which must not exceed the table limit.
    pub fn up_to(&self, cutoff: u64) -> Result<&[u32]> {
        if cutoff > self.limit {
            return Err(Error::OutOfRange {
                what: "cutoff",
                value: cutoff as f64,
                limit: self.limit,
            });
        }
        let end = self.primes.partition_point(|&p| u64::from(p) <= cutoff);
        Ok(&self.primes[..end])
    }

    /// Writes the table as `magic, version, limit, count` followed by
    /// LEB128-encoded gaps between consecutive primes.
    pub fn write_cache(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        out.write_all(CACHE_MAGIC)?;
        out.write_all(&CACHE_VERSION.to_le_bytes())?;
        out.write_all(&self.limit.to_le_bytes())?;
        out.write_all(&(self.primes.len() as u64).to_le_bytes())?;
        let mut prev = 0u32;
        let mut buf = Vec::with_capacity(5);
        for &p in &self.primes {
            buf.clear();
            let mut gap = p - prev;
            loop {
                let byte = (gap & 0x7f) as u8;
                gap >>= 7;
                if gap == 0 {
                    buf.push(byte);
                    break;
                }
                buf.push(byte | 0x80);
            }
            out.write_all(&buf)?;
            prev = p;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_cache(path: impl AsRef<Path>) -> Result<Self> {
        let mut input = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 4];
        input.read_exact(&mut magic)?;
        if &magic != CACHE_MAGIC {
            return Err(Error::CacheFormat("bad magic".into()));
        }
        let mut word = [0u8; 4];
        input.read_exact(&mut word)?;
        let version = u32::from_le_bytes(word);
        if version != CACHE_VERSION {
            return Err(Error::CacheFormat(format!("unsupported version {version}")));
        }
        let mut long = [0u8; 8];
        input.read_exact(&mut long)?;
        let limit = u64::from_le_bytes(long);
        input.read_exact(&mut long)?;
        let count = u64::from_le_bytes(long) as usize;

        let mut payload = Vec::new();
        input.read_to_end(&mut payload)?;
        let mut primes = Vec::with_capacity(count);
        let mut prev = 0u64;
        let mut gap = 0u64;
        let mut shift = 0;
        for byte in payload {
            gap |= u64::from(byte & 0x7f) << shift;
            if byte & 0x80 == 0 {
                prev += gap;
                if prev > limit || prev > u64::from(u32::MAX) {
                    return Err(Error::CacheFormat("prime exceeds recorded limit".into()));
                }
                primes.push(prev as u32);
                gap = 0;
                shift = 0;
            } else {
                shift += 7;
                if shift > 35 {
                    return Err(Error::CacheFormat("malformed gap encoding".into()));
                }
            }
        }
        if shift != 0 || primes.len() != count {
            return Err(Error::CacheFormat(format!(
                "expected {count} primes, decoded {}",
                primes.len()
            )));
        }
        Ok(Self { limit, primes })
    }
}

/// All primes `<= limit` by a segmented, odd-only, bit-packed sieve.
pub fn sieve_primes(limit: u64) -> Result<PrimeTable> {
    if limit < 2 {
        return Err(invalid(format!("sieve limit must be >= 2, got {limit}")));
    }
    if limit > u64::from(u32::MAX) {
        return Err(invalid(format!(
            "sieve limit {limit} exceeds the supported maximum {}",
            u32::MAX
        )));
    }
    let base = small_odd_primes(isqrt(limit));
    // odd candidates 1, 3, 5, ..., <= limit
    let odd_count = limit.div_ceil(2) as usize;
    let segments = odd_count.div_ceil(SEGMENT_ODDS);

    let chunks: Vec<Vec<u32>> = (0..segments)
        .into_par_iter()
        .map(|seg| {
            let first = seg * SEGMENT_ODDS;
            let len = SEGMENT_ODDS.min(odd_count - first);
            sieve_segment(first, len, &base)
        })
        .collect();

    let mut primes = Vec::with_capacity(chunks.iter().map(Vec::len).sum::<usize>() + 1);
    primes.push(2);
    for chunk in chunks {
        primes.extend(chunk);
    }
    Ok(PrimeTable { limit, primes })
}

/// Sieves odd candidates with indices `first..first + len` (index `i` is `2i + 1`).
fn sieve_segment(first: usize, len: usize, base: &[u64]) -> Vec<u32> {
    let mut composite = vec![0u64; len.div_ceil(64)];
    let lo = 2 * first as u64 + 1;
    let hi = lo + 2 * len as u64; // exclusive
    for &q in base {
        let square = q * q;
        if square >= hi {
            break;
        }
        let mut m = if square >= lo {
            square
        } else {
            let mut m = lo.div_ceil(q) * q;
            if m % 2 == 0 {
                m += q;
            }
            m
        };
        while m < hi {
            let i = ((m - lo) / 2) as usize;
            composite[i >> 6] |= 1 << (i & 63);
            m += 2 * q;
        }
    }
    let mut out = Vec::with_capacity(len / 8);
    for (w, &word) in composite.iter().enumerate() {
        let mut free = !word;
        while free != 0 {
            let bit = free.trailing_zeros() as usize;
            free &= free - 1;
            let i = (w << 6) + bit;
            if i >= len {
                break;
            }
            let n = lo + 2 * i as u64;
            if n > 1 {
                out.push(n as u32);
            }
        }
    }
    out
}

/// Odd primes `<= n` by a plain sieve; used as the base set for segments.
fn small_odd_primes(n: u64) -> Vec<u64> {
    let n = n as usize;
    let mut is_composite = vec![false; n + 1];
    let mut out = Vec::new();
    let mut i = 3;
    while i <= n {
        if !is_composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                is_composite[j] = true;
                j += 2 * i;
            }
        }
        i += 2;
    }
    out
}

pub(crate) fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// A P-smooth k-free integer together with its exponent vector over the
/// primes `<= P` (same order as [`SmoothSet::primes`]).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmoothEntry {
    pub n: u64,
    pub exponents: Vec<u8>,
}

/// Every integer whose prime factors are `<= bound` and whose exponents are `< k`.
#[derive(Debug, Clone)]
pub struct SmoothSet {
    pub bound: u64,
    pub k: u32,
    pub primes: Vec<u32>,
    /// Ascending in `n`.
    pub entries: Vec<SmoothEntry>,
}

impl SmoothSet {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub fn enumerate_smooth_kfree(table: &PrimeTable, bound: u64, k: u32) -> Result<SmoothSet> {
    enumerate_smooth_kfree_capped(table, bound, k, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_smooth_kfree_capped(
    table: &PrimeTable,
    bound: u64,
    k: u32,
    cap: u64,
) -> Result<SmoothSet> {
    if k < 2 {
        return Err(invalid(format!("freeness order k must be >= 2, got {k}")));
    }
    let primes = table.up_to(bound)?.to_vec();
    let cardinality = (u128::from(k))
        .checked_pow(primes.len() as u32)
        .unwrap_or(u128::MAX);
    if cardinality > u128::from(cap) {
        return Err(Error::ResourceLimit { cardinality, cap });
    }

    let mut entries = Vec::with_capacity(cardinality as usize);
    let mut exponents = vec![0u8; primes.len()];
    loop {
        let mut n = 1u64;
        for (&p, &e) in primes.iter().zip(&exponents) {
            for _ in 0..e {
                n = n.checked_mul(u64::from(p)).ok_or_else(|| {
                    invalid(format!("smooth integer over primes <= {bound} overflows u64"))
                })?;
            }
        }
        entries.push(SmoothEntry {
            n,
            exponents: exponents.clone(),
        });

        // odometer increment over digits in 0..k
        let mut i = 0;
        loop {
            if i == exponents.len() {
                entries.sort_unstable_by_key(|e| e.n);
                return Ok(SmoothSet {
                    bound,
                    k,
                    primes,
                    entries,
                });
            }
            exponents[i] += 1;
            if u32::from(exponents[i]) < k {
                break;
            }
            exponents[i] = 0;
            i += 1;
        }
    }
}
