//! Fixed-length binary vectors over GF(2).
//!
//! Bit `0` is the first transmitted bit. Internally bits are packed into
//! `u64` words with bit `i` stored at word `i / 64`, position `i % 64`, so the
//! word array read as a little-endian integer gives the "integer value" of the
//! block: bit `i` carries weight `2^i`. Hex serialization is MSB-first: bit 0
//! is the most significant bit of the first byte.

use std::fmt;

use crate::error::{Error, Result};

/// Largest block length supported.
pub const MAX_BLOCK_LEN: usize = 4096;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitBlock {
    len: usize,
    words: Vec<u64>,
}

impl BitBlock {
    pub fn zeros(len: usize) -> Self {
        assert!(
            len > 0 && len <= MAX_BLOCK_LEN,
            "block length {len} outside 1..={MAX_BLOCK_LEN}"
        );
        Self {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        if bits.is_empty() || bits.len() > MAX_BLOCK_LEN {
            return Err(Error::Usage(format!(
                "block length {} outside 1..={MAX_BLOCK_LEN}",
                bits.len()
            )));
        }
        let mut block = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            match b {
                0 => {}
                1 => block.set(i, true),
                other => return Err(Error::Usage(format!("bit {i} has value {other}"))),
            }
        }
        Ok(block)
    }

    /// Parses a string of `0`/`1` characters, bit 0 first.
    pub fn from_bit_str(s: &str) -> Result<Self> {
        let bits: Vec<u8> = s
            .chars()
            .filter(|c| !c.is_whitespace() && *c != '_')
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::Usage(format!("invalid bit character {other:?}"))),
            })
            .collect::<Result<_>>()?;
        Self::from_bits(&bits)
    }

    /// Builds a block of length `len` with ones at `positions`.
    pub fn from_positions(len: usize, positions: &[usize]) -> Result<Self> {
        let mut block = Self::zeros(len);
        for &p in positions {
            if p >= len {
                return Err(Error::Usage(format!("position {p} out of range for length {len}")));
            }
            block.flip(p);
        }
        Ok(block)
    }

    pub fn random<R: rand::Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut block = Self::zeros(len);
        for w in block.words.iter_mut() {
            *w = rng.random();
        }
        block.mask_tail();
        block
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    pub fn xor(&self, other: &BitBlock) -> Result<BitBlock> {
        let mut out = self.clone();
        out.xor_assign(other)?;
        Ok(out)
    }

    pub fn xor_assign(&mut self, other: &BitBlock) -> Result<()> {
        if self.len != other.len {
            return Err(Error::LengthMismatch {
                expected: self.len,
                actual: other.len,
            });
        }
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
        Ok(())
    }

    pub fn hamming_weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Number of positions where `self` and `other` differ.
    pub fn distance(&self, other: &BitBlock) -> Result<usize> {
        Ok(self.xor(other)?.hamming_weight())
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Indices of the one-bits, ascending.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    None
                } else {
                    let tz = rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    Some(wi * 64 + tz)
                }
            })
        })
    }

    pub fn to_bits(&self) -> Vec<u8> {
        self.iter().map(u8::from).collect()
    }

    /// Sub-block `[start, start + len)`.
    pub fn slice(&self, start: usize, len: usize) -> BitBlock {
        assert!(start + len <= self.len, "slice out of range");
        let mut out = BitBlock::zeros(len);
        for i in 0..len {
            if self.get(start + i) {
                out.set(i, true);
            }
        }
        out
    }

    /// Concatenation `self || other`.
    pub fn concat(&self, other: &BitBlock) -> BitBlock {
        let mut out = BitBlock::zeros(self.len + other.len);
        for i in self.ones() {
            out.set(i, true);
        }
        for i in other.ones() {
            out.set(self.len + i, true);
        }
        out
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// MSB-first hex encoding; trailing pad bits of the last byte are zero.
    pub fn to_hex(&self) -> String {
        let mut bytes = vec![0u8; self.len.div_ceil(8)];
        for i in self.ones() {
            bytes[i / 8] |= 0x80 >> (i % 8);
        }
        bytes.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn from_hex(hex: &str, len: usize) -> Result<Self> {
        let hex = hex.trim();
        if hex.len() != 2 * len.div_ceil(8) {
            return Err(Error::Usage(format!(
                "hex string of {} digits does not encode {len} bits",
                hex.len()
            )));
        }
        let mut block = Self::zeros(len);
        for (byte_idx, pair) in hex.as_bytes().chunks(2).enumerate() {
            let s = std::str::from_utf8(pair).map_err(|e| Error::Usage(e.to_string()))?;
            let byte = u8::from_str_radix(s, 16)
                .map_err(|_| Error::Usage(format!("invalid hex digits {s:?}")))?;
            for bit in 0..8 {
                if byte & (0x80 >> bit) != 0 {
                    let i = byte_idx * 8 + bit;
                    if i >= len {
                        return Err(Error::Usage("nonzero padding bits in hex string".into()));
                    }
                    block.set(i, true);
                }
            }
        }
        Ok(block)
    }

    fn mask_tail(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

impl fmt::Debug for BitBlock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitBlock({})", self)
    }
}

/// Bit string, bit 0 first.
impl fmt::Display for BitBlock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// An additive noise pattern together with its Hamming weight.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ErrorPattern {
    bits: BitBlock,
    weight: usize,
}

impl ErrorPattern {
    pub fn new(bits: BitBlock) -> Self {
        let weight = bits.hamming_weight();
        Self { bits, weight }
    }

    pub fn zero(len: usize) -> Self {
        Self {
            bits: BitBlock::zeros(len),
            weight: 0,
        }
    }

    pub fn from_positions(len: usize, positions: &[usize]) -> Result<Self> {
        BitBlock::from_positions(len, positions).map(Self::new)
    }

    pub fn weight(&self) -> usize {
        self.weight
    }

    pub fn bits(&self) -> &BitBlock {
        &self.bits
    }

    pub fn into_bits(self) -> BitBlock {
        self.bits
    }

    pub fn positions(&self) -> Vec<usize> {
        self.bits.ones().collect()
    }
}

impl From<BitBlock> for ErrorPattern {
    fn from(bits: BitBlock) -> Self {
        Self::new(bits)
    }
}
