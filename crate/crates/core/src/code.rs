//! Packed binary codes and hamming-space arithmetic.
//!
//! A code of length `l` (1..=64) stores bit `j` at byte `j / 8`, bit position
//! `j % 8`. That is exactly the little-endian byte image of a `u64` whose bit
//! `j` is the code's bit `j`, so codes are kept as a masked word internally
//! and serialized with `to_le_bytes`.

use crate::error::{Error, Result};

pub const MAX_CODE_LENGTH: u32 = 64;

/// Mask covering the low `length` bits.
#[inline]
pub fn length_mask(length: u32) -> u64 {
    if length >= 64 {
        u64::MAX
    } else {
        (1u64 << length) - 1
    }
}

pub(crate) fn check_length(length: usize) -> Result<u32> {
    if length == 0 || length > MAX_CODE_LENGTH as usize {
        return Err(Error::InvalidCodeLength(length));
    }
    Ok(length as u32)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BinaryCode {
    bits: u64,
    length: u32,
}

impl BinaryCode {
    /// Builds a code from the low `length` bits of `bits`; higher bits are cleared.
    pub fn new(bits: u64, length: u32) -> Result<Self> {
        let length = check_length(length as usize)?;
        Ok(Self {
            bits: bits & length_mask(length),
            length,
        })
    }

    pub(crate) fn from_raw(bits: u64, length: u32) -> Self {
        debug_assert!((1..=MAX_CODE_LENGTH).contains(&length));
        debug_assert_eq!(bits & !length_mask(length), 0);
        Self { bits, length }
    }

    #[inline]
    pub fn bits(&self) -> u64 {
        self.bits
    }

    #[inline]
    pub fn len(&self) -> u32 {
        self.length
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn bit(&self, j: u32) -> bool {
        j < self.length && (self.bits >> j) & 1 == 1
    }

    /// Number of bytes in the packed representation, `ceil(l / 8)`.
    #[inline]
    pub fn byte_len(&self) -> usize {
        byte_len(self.length)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        self.bits.to_le_bytes()[..self.byte_len()].to_vec()
    }

    /// Inverse of [`to_bytes`](Self::to_bytes). Padding bits in the last byte must be zero.
    pub fn from_bytes(bytes: &[u8], length: u32) -> Result<Self> {
        let length = check_length(length as usize)?;
        if bytes.len() != byte_len(length) {
            return Err(Error::Malformed {
                format: "code",
                reason: format!("{} bytes for a {length}-bit code", bytes.len()),
            });
        }
        let mut word = [0u8; 8];
        word[..bytes.len()].copy_from_slice(bytes);
        let bits = u64::from_le_bytes(word);
        if bits & !length_mask(length) != 0 {
            return Err(Error::Malformed {
                format: "code",
                reason: "non-zero padding bits".into(),
            });
        }
        Ok(Self { bits, length })
    }

    pub fn unpack(&self) -> Vec<bool> {
        (0..self.length).map(|j| self.bit(j)).collect()
    }
}

#[inline]
pub fn byte_len(length: u32) -> usize {
    length.div_ceil(8) as usize
}

/// Packs `bools[j]` into bit `j`.
pub fn pack_bits(bools: &[bool]) -> Result<BinaryCode> {
    let length = check_length(bools.len())?;
    let bits = bools
        .iter()
        .enumerate()
        .fold(0u64, |acc, (j, &b)| acc | ((b as u64) << j));
    Ok(BinaryCode::from_raw(bits, length))
}

pub fn hamming_distance(a: &BinaryCode, b: &BinaryCode) -> Result<u32> {
    if a.length != b.length {
        return Err(Error::LengthMismatch {
            left: a.length,
            right: b.length,
        });
    }
    Ok((a.bits ^ b.bits).count_ones())
}

/// Number of `length`-bit codes within hamming distance `radius` of a fixed code:
/// the sum of `C(length, i)` for `i` in `0..=radius`.
pub fn ball_size(length: u32, radius: u32) -> Result<u128> {
    if radius > length {
        return Err(Error::RadiusOutOfRange { length, radius });
    }
    let mut total = 0u128;
    let mut term = 1u128;
    for i in 0..=radius {
        total += term;
        // C(l, i+1) = C(l, i) * (l - i) / (i + 1), exact at every step.
        term = term * u128::from(length - i) / u128::from(i + 1);
    }
    Ok(total)
}

/// Number of codes at hamming distance exactly `radius`, i.e. `C(length, radius)`.
pub fn shell_size(length: u32, radius: u32) -> Result<u128> {
    if radius > length {
        return Err(Error::RadiusOutOfRange { length, radius });
    }
    let mut term = 1u128;
    for i in 0..radius {
        term = term * u128::from(length - i) / u128::from(i + 1);
    }
    Ok(term)
}

/// `n` codes of identical length, index-aligned with a feature set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeSet {
    length: u32,
    codes: Vec<BinaryCode>,
}

impl CodeSet {
    pub fn new(length: u32, codes: Vec<BinaryCode>) -> Result<Self> {
        let length = check_length(length as usize)?;
        if let Some(bad) = codes.iter().find(|c| c.len() != length) {
            return Err(Error::LengthMismatch {
                left: length,
                right: bad.len(),
            });
        }
        Ok(Self { length, codes })
    }

    /// Builds a set from raw words, masking each to `length` bits.
    pub fn from_words(length: u32, words: &[u64]) -> Result<Self> {
        let length = check_length(length as usize)?;
        let mask = length_mask(length);
        Ok(Self {
            length,
            codes: words
                .iter()
                .map(|&w| BinaryCode::from_raw(w & mask, length))
                .collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn code_length(&self) -> u32 {
        self.length
    }

    pub fn codes(&self) -> &[BinaryCode] {
        &self.codes
    }

    pub fn get(&self, i: usize) -> Option<&BinaryCode> {
        self.codes.get(i)
    }
}
