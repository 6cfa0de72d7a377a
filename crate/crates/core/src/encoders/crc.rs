use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::code::{length_mask, BinaryCode, CodeSet};
use crate::error::{Error, Result};

/// Classification random coding: every class owns one distinct random `l`-bit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrcModel {
    length: u32,
    class_codes: Vec<BinaryCode>,
    seed: u64,
}

impl CrcModel {
    pub fn new(length: u32, class_codes: Vec<BinaryCode>, seed: u64) -> Result<Self> {
        let length = crate::code::check_length(length as usize)?;
        if class_codes.is_empty() {
            return Err(Error::EmptyInput("CRC model has no classes"));
        }
        if let Some(bad) = class_codes.iter().find(|c| c.len() != length) {
            return Err(Error::LengthMismatch {
                left: length,
                right: bad.len(),
            });
        }
        let mut seen = HashSet::with_capacity(class_codes.len());
        if !class_codes.iter().all(|c| seen.insert(c.bits())) {
            return Err(Error::InvalidParam(
                "CRC class codes are not distinct".into(),
            ));
        }
        Ok(Self {
            length,
            class_codes,
            seed,
        })
    }

    pub fn num_classes(&self) -> u32 {
        self.class_codes.len() as u32
    }

    pub fn code_length(&self) -> u32 {
        self.length
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn class_codes(&self) -> &[BinaryCode] {
        &self.class_codes
    }

    pub fn encode(&self, label: u32) -> Result<BinaryCode> {
        self.class_codes
            .get(label as usize)
            .copied()
            .ok_or(Error::LabelOutOfRange {
                label,
                classes: self.num_classes(),
            })
    }

    /// Encodes base items by their true labels, or queries by predicted labels.
    pub fn encode_labels(&self, labels: &[u32]) -> Result<CodeSet> {
        let codes = labels
            .iter()
            .map(|&label| self.encode(label))
            .collect::<Result<Vec<_>>>()?;
        CodeSet::new(self.length, codes)
    }
}

/// Maps each of `num_classes` classes to a distinct integer drawn uniformly
/// without replacement from `[0, 2^length)`.
pub fn train_crc(num_classes: u32, length: u32, seed: u64) -> Result<CrcModel> {
    let length = crate::code::check_length(length as usize)?;
    if num_classes == 0 {
        return Err(Error::EmptyInput("CRC needs at least one class"));
    }
    let space = 1u128 << length;
    let c = u128::from(num_classes);
    if space < c {
        return Err(Error::CodeSpaceTooSmall {
            length,
            classes: num_classes as u64,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let words: Vec<u64> = if 2 * c > space {
        // dense: space <= 2c, partial Fisher-Yates over the whole space
        let space = space as u64;
        let mut all: Vec<u64> = (0..space).collect();
        for i in 0..num_classes as usize {
            let j = rng.random_range(i as u64..space) as usize;
            all.swap(i, j);
        }
        all.truncate(num_classes as usize);
        all
    } else {
        let mask = length_mask(length);
        let mut seen = HashSet::with_capacity(num_classes as usize);
        let mut out = Vec::with_capacity(num_classes as usize);
        while out.len() < num_classes as usize {
            let w = rng.random::<u64>() & mask;
            if seen.insert(w) {
                out.push(w);
            }
        }
        out
    };
    let class_codes = words
        .into_iter()
        .map(|w| BinaryCode::from_raw(w, length))
        .collect();
    CrcModel::new(length, class_codes, seed)
}
