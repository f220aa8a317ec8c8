//! Hashing and variable-length integer helpers shared by the index formats.

use crate::{Error, Result};

/// SplitMix64 finalizer. A bijection on `u64` with good avalanche.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives `count` well-spread 64-bit seeds from a single seed.
pub fn derive_seeds(seed: u64, count: usize) -> Vec<u64> {
    let mut state = seed;
    (0..count)
        .map(|_| {
            state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
            mix64(state)
        })
        .collect()
}

/// Order-sensitive 64-bit hasher built on [`mix64`]; stable across platforms
/// and toolchains, unlike `std::hash::DefaultHasher`.
#[derive(Debug, Clone, Copy)]
pub struct StableHasher(u64);

impl Default for StableHasher {
    fn default() -> Self {
        Self(0x243f_6a88_85a3_08d3)
    }
}

impl StableHasher {
    #[inline]
    pub fn write_u64(&mut self, x: u64) {
        self.0 = mix64(self.0 ^ x).wrapping_add(0x9e37_79b9_7f4a_7c15);
    }

    pub fn finish(&self) -> u64 {
        mix64(self.0)
    }
}

pub fn write_varint(out: &mut Vec<u8>, mut value: u64) {
    while value >= 0x80 {
        out.push((value as u8) | 0x80);
        value >>= 7;
    }
    out.push(value as u8);
}

pub fn varint_len(mut value: u64) -> usize {
    let mut len = 1;
    while value >= 0x80 {
        value >>= 7;
        len += 1;
    }
    len
}

/// Cursor over an encoded buffer.
pub struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }

    pub fn is_empty(&self) -> bool {
        self.pos >= self.buf.len()
    }

    pub fn expect_magic(&mut self, magic: &[u8]) -> Result<()> {
        let got = self.bytes(magic.len())?;
        if got != magic {
            return Err(Error::Format(format!(
                "bad magic {:?}, expected {:?}",
                String::from_utf8_lossy(got),
                String::from_utf8_lossy(magic)
            )));
        }
        Ok(())
    }

    pub fn bytes(&mut self, len: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(len)
            .filter(|&end| end <= self.buf.len())
            .ok_or_else(|| Error::Format("unexpected end of data".into()))?;
        let slice = &self.buf[self.pos..end];
        self.pos = end;
        Ok(slice)
    }

    pub fn u8(&mut self) -> Result<u8> {
        Ok(self.bytes(1)?[0])
    }

    pub fn u64_le(&mut self) -> Result<u64> {
        let bytes: [u8; 8] = self.bytes(8)?.try_into().expect("eight bytes");
        Ok(u64::from_le_bytes(bytes))
    }

    pub fn varint(&mut self) -> Result<u64> {
        let mut value = 0u64;
        for shift in (0..64).step_by(7) {
            let byte = self.u8()?;
            value |= u64::from(byte & 0x7f) << shift;
            if byte & 0x80 == 0 {
                return Ok(value);
            }
        }
        Err(Error::Format("varint longer than 64 bits".into()))
    }

    /// Reads a varint that must fit in `u32` and be below `bound`.
    pub fn varint_below(&mut self, bound: u64, what: &str) -> Result<u32> {
        let value = self.varint()?;
        if value >= bound {
            return Err(Error::Format(format!("{what} {value} out of range (< {bound})")));
        }
        Ok(value as u32)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn varint_roundtrip(values in proptest::collection::vec(any::<u64>(), 0..64)) {
            let mut buf = Vec::new();
            for &v in &values {
                write_varint(&mut buf, v);
            }
            prop_assert_eq!(buf.len(), values.iter().map(|&v| varint_len(v)).sum::<usize>());
            let mut reader = Reader::new(&buf);
            for &v in &values {
                prop_assert_eq!(reader.varint().unwrap(), v);
            }
            prop_assert!(reader.is_empty());
        }
    }

    #[test]
    fn truncated_varint_is_an_error() {
        let mut reader = Reader::new(&[0x80, 0x80]);
        assert!(matches!(reader.varint(), Err(Error::Format(_))));
    }

    #[test]
    fn derived_seeds_are_distinct() {
        let seeds = derive_seeds(7, 16);
        let mut sorted = seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), 16);
        assert_eq!(seeds, derive_seeds(7, 16));
    }
}
