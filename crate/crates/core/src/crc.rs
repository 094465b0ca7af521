//! Systematic CRC codes and the syndrome map used as the codebook
//! membership test.
//!
//! A codeword is `message || parity` with bit 0 transmitted first. Bit `i`
//! of an `n`-bit word is the coefficient of `x^(n-1-i)`, so the register is
//! the usual non-reflected, zero-initialised, no-final-XOR CRC.

use crate::bitblock::BitBlock;
use crate::error::{Error, Result};

/// Koopman notation of the validated 12-bit generator.
pub const CRC12_KOOPMAN: u64 = 0x8F3;
/// The same generator written out in full: `x^12 + x^8 + x^7 + x^6 + x^5 +
/// x^2 + x + 1`, i.e. Koopman `0x8F3` shifted left with the implicit `+1`.
pub const CRC12_EXPLICIT: u64 = 0x11E7;
pub const CRC12_MESSAGE_BITS: usize = 116;

/// Explicit polynomial (with the `x^r` term) for a Koopman-notation id.
pub fn koopman_to_explicit(koopman: u64) -> u64 {
    (koopman << 1) | 1
}

pub fn explicit_to_koopman(explicit: u64) -> u64 {
    explicit >> 1
}

fn degree(poly: u64) -> Option<u32> {
    (poly != 0).then(|| 63 - poly.leading_zeros())
}

/// Remainder of `B(x) * x^r mod G(x)` for a bit stream `B`, first bit the
/// highest-degree coefficient. This is the CRC of the stream.
pub fn crc_remainder(explicit: u64, bits: impl IntoIterator<Item = bool>) -> u64 {
    let r = degree(explicit).expect("zero generator");
    let top = 1u64 << (r - 1);
    let mask = (1u64 << r) - 1;
    let low = explicit & mask;
    let mut reg = 0u64;
    for b in bits {
        let feedback = (reg & top != 0) ^ b;
        reg = (reg << 1) & mask;
        if feedback {
            reg ^= low;
        }
    }
    reg
}

/// Bits of a byte string, most significant bit of each byte first.
pub fn bytes_msb_first(bytes: &[u8]) -> impl Iterator<Item = bool> + '_ {
    bytes
        .iter()
        .flat_map(|&byte| (0..8).map(move |i| byte & (0x80 >> i) != 0))
}

/// A linear block code whose membership test is a syndrome computed as the
/// XOR of per-position columns.
pub trait SyndromeCode {
    fn block_length(&self) -> usize;

    /// Column `i` is the syndrome of the unit vector with bit `i` set.
    fn columns(&self) -> &[u64];

    fn syndrome_value(&self, word: &BitBlock) -> u64 {
        let cols = self.columns();
        word.ones().fold(0, |acc, i| acc ^ cols[i])
    }

    fn is_codeword(&self, word: &BitBlock) -> bool {
        word.len() == self.block_length() && self.syndrome_value(word) == 0
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrcCode {
    explicit: u64,
    width: usize,
    k: usize,
    columns: Vec<u64>,
}

impl CrcCode {
    pub fn from_explicit(explicit: u64, k: usize) -> Result<Self> {
        let width = degree(explicit)
            .ok_or_else(|| Error::InvalidCode("zero generator".into()))? as usize;
        if width == 0 || width > 32 {
            return Err(Error::InvalidCode(format!(
                "generator degree {width} outside 1..=32"
            )));
        }
        if explicit & 1 == 0 {
            return Err(Error::InvalidCode(format!(
                "generator {explicit:#x} has no constant term"
            )));
        }
        if k == 0 || k + width > crate::bitblock::MAX_BLOCK_LEN {
            return Err(Error::InvalidCode(format!("message length {k} unsupported")));
        }
        let n = k + width;
        let mask = (1u64 << width) - 1;
        let low = explicit & mask;
        // columns[n - 1] = x^0, each step multiplies by x modulo G.
        let mut columns = vec![0u64; n];
        let mut power = 1u64;
        for col in columns.iter_mut().rev() {
            *col = power;
            let carry = power >> (width - 1) & 1 == 1;
            power = (power << 1) & mask;
            if carry {
                power ^= low;
            }
        }
        Ok(Self {
            explicit,
            width,
            k,
            columns,
        })
    }

    pub fn from_koopman(koopman: u64, k: usize) -> Result<Self> {
        if koopman == 0 {
            return Err(Error::InvalidCode("zero Koopman id".into()));
        }
        Self::from_explicit(koopman_to_explicit(koopman), k)
    }

    /// CRC-12, Koopman `0x8F3`, 116 message bits into 128-bit codewords.
    pub fn crc12() -> Self {
        Self::from_explicit(CRC12_EXPLICIT, CRC12_MESSAGE_BITS).expect("valid constant")
    }

    /// CRC-4 with generator `x^4 + x + 1` on 4-bit messages, used by the
    /// exhaustive oracle checks.
    pub fn toy() -> Self {
        Self::from_explicit(0b1_0011, 4).expect("valid constant")
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.k + self.width
    }

    /// Number of parity bits `r`.
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn explicit_polynomial(&self) -> u64 {
        self.explicit
    }

    pub fn koopman_id(&self) -> u64 {
        explicit_to_koopman(self.explicit)
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n() as f64
    }

    fn check_len(&self, block: &BitBlock, expected: usize) -> Result<()> {
        if block.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                actual: block.len(),
            });
        }
        Ok(())
    }

    /// Parity bits of `message`, as an `r`-bit value (MSB = coefficient of
    /// `x^(r-1)`).
    pub fn parity_value(&self, message: &BitBlock) -> Result<u64> {
        self.check_len(message, self.k)?;
        Ok(crc_remainder(self.explicit, message.iter()))
    }

    pub fn encode(&self, message: &BitBlock) -> Result<BitBlock> {
        let parity = self.parity_value(message)?;
        Ok(message.concat(&self.value_to_block(parity)))
    }

    pub fn check(&self, word: &BitBlock) -> Result<bool> {
        Ok(self.syndrome_checked(word)? == 0)
    }

    /// Syndrome as an `r`-bit block; zero iff `word` is a codeword.
    pub fn syndrome(&self, word: &BitBlock) -> Result<BitBlock> {
        let s = self.syndrome_checked(word)?;
        Ok(self.value_to_block(s))
    }

    fn syndrome_checked(&self, word: &BitBlock) -> Result<u64> {
        self.check_len(word, self.n())?;
        Ok(self.syndrome_value(word))
    }

    /// Information part of a codeword.
    pub fn message_of(&self, word: &BitBlock) -> Result<BitBlock> {
        self.check_len(word, self.n())?;
        Ok(word.slice(0, self.k))
    }

    fn value_to_block(&self, value: u64) -> BitBlock {
        let mut out = BitBlock::zeros(self.width);
        for j in 0..self.width {
            if value >> (self.width - 1 - j) & 1 == 1 {
                out.set(j, true);
            }
        }
        out
    }
}

impl SyndromeCode for CrcCode {
    fn block_length(&self) -> usize {
        self.n()
    }

    fn columns(&self) -> &[u64] {
        &self.columns
    }
}

/// A code given directly by its syndrome columns. Used to express
/// bit-permuted versions of a CRC code.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColumnCode {
    columns: Vec<u64>,
}

impl ColumnCode {
    pub fn new(columns: Vec<u64>) -> Self {
        Self { columns }
    }

    /// The code whose bit `perm[i]` plays the role of bit `i` of `code`.
    pub fn permuted(code: &impl SyndromeCode, perm: &[usize]) -> Self {
        let src = code.columns();
        assert_eq!(src.len(), perm.len());
        let mut columns = vec![0; src.len()];
        for (i, &p) in perm.iter().enumerate() {
            columns[p] = src[i];
        }
        Self { columns }
    }
}

impl SyndromeCode for ColumnCode {
    fn block_length(&self) -> usize {
        self.columns.len()
    }

    fn columns(&self) -> &[u64] {
        &self.columns
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn koopman_notation() {
        assert_eq!(koopman_to_explicit(CRC12_KOOPMAN), CRC12_EXPLICIT);
        let code = CrcCode::crc12();
        assert_eq!(code.koopman_id(), 0x8F3);
        assert_eq!((code.k(), code.n(), code.width()), (116, 128, 12));
        assert!((code.rate() - 0.90625).abs() < 1e-15);
    }

    // Catalogued check values over ASCII "123456789" (non-reflected, init 0,
    // no final XOR). CRC-12/DECT is Koopman 0xC07, CRC-8/SMBUS is Koopman 0x83.
    #[test]
    fn published_check_values() {
        let msg = b"123456789";
        assert_eq!(crc_remainder(koopman_to_explicit(0xC07), bytes_msb_first(msg)), 0xF5B);
        assert_eq!(crc_remainder(koopman_to_explicit(0x83), bytes_msb_first(msg)), 0xF4);
        assert_eq!(crc_remainder(0x1_1021, bytes_msb_first(msg)), 0x31C3);
    }

    #[test]
    fn rejects_bad_generators() {
        assert!(CrcCode::from_explicit(0b1_0010, 4).is_err());
        assert!(CrcCode::from_explicit(0, 4).is_err());
        assert!(CrcCode::from_explicit(0b1, 4).is_err());
        assert!(CrcCode::from_koopman(0, 4).is_err());
    }

    #[test]
    fn zero_message_encodes_to_zero() {
        let code = CrcCode::crc12();
        let cw = code.encode(&BitBlock::zeros(116)).unwrap();
        assert!(cw.is_zero());
        assert!(code.check(&BitBlock::zeros(128)).unwrap());
    }

    #[test]
    fn length_mismatch_is_usage_error() {
        let code = CrcCode::crc12();
        assert!(matches!(
            code.encode(&BitBlock::zeros(115)),
            Err(Error::LengthMismatch { expected: 116, actual: 115 })
        ));
        assert!(code.check(&BitBlock::zeros(127)).is_err());
        assert!(code.syndrome(&BitBlock::zeros(129)).is_err());
    }

    #[test]
    fn encoded_words_check_and_single_flips_fail() {
        let code = CrcCode::crc12();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let m = BitBlock::random(116, &mut rng);
            let cw = code.encode(&m).unwrap();
            assert!(code.check(&cw).unwrap());
            assert!(code.syndrome(&cw).unwrap().is_zero());
            assert_eq!(code.message_of(&cw).unwrap(), m);
        }
        for _ in 0..100 {
            let cw = code.encode(&BitBlock::random(116, &mut rng)).unwrap();
            for i in 0..128 {
                let mut w = cw.clone();
                w.flip(i);
                assert!(!code.check(&w).unwrap(), "flip at {i} undetected");
            }
        }
    }

    #[test]
    fn syndrome_is_linear() {
        let code = CrcCode::crc12();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let a = BitBlock::random(128, &mut rng);
            let b = BitBlock::random(128, &mut rng);
            let lhs = code.syndrome(&a.xor(&b).unwrap()).unwrap();
            let rhs = code.syndrome(&a).unwrap().xor(&code.syndrome(&b).unwrap()).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn encode_is_linear() {
        let code = CrcCode::crc12();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..1000 {
            let a = BitBlock::random(116, &mut rng);
            let b = BitBlock::random(116, &mut rng);
            let lhs = code.encode(&a.xor(&b).unwrap()).unwrap();
            let rhs = code.encode(&a).unwrap().xor(&code.encode(&b).unwrap()).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn permuted_code_accepts_permuted_codewords() {
        let code = CrcCode::toy();
        let perm = [3, 7, 0, 5, 1, 6, 2, 4];
        let permuted = ColumnCode::permuted(&code, &perm);
        for m in 0..16u8 {
            let msg = BitBlock::from_bits(&[(m >> 3) & 1, (m >> 2) & 1, (m >> 1) & 1, m & 1]).unwrap();
            let cw = code.encode(&msg).unwrap();
            let mut moved = BitBlock::zeros(8);
            for i in cw.ones() {
                moved.set(perm[i], true);
            }
            assert!(permuted.is_codeword(&moved));
        }
    }
}
