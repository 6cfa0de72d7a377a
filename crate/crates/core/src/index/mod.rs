//! Hash tables over binary codes and the hamming-ball locate schedule.
//!
//! A query is resolved radius-major across tables: for `r = 0, 1, ..`, every
//! table probes all buckets at distance exactly `r` from its query code before
//! any table moves to `r + 1`. Unseen ids are appended until the pool holds
//! `P` distinct candidates; the bucket that crosses `P` contributes its lowest
//! ids only.

mod persist;
mod probe;

pub use persist::{read_index, write_index, INDEX_MAGIC};
pub use probe::ShellMasks;

use std::collections::HashMap;

use crate::code::{ball_size, length_mask, BinaryCode, CodeSet};
use crate::error::{Error, Result};

/// One hash table: code -> ascending item ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HashTable {
    length: u32,
    len: usize,
    buckets: HashMap<u64, Vec<u32>>,
}

impl HashTable {
    pub fn build(codes: &CodeSet) -> Result<Self> {
        if codes.is_empty() {
            return Err(Error::EmptyInput("cannot build a table from zero codes"));
        }
        if u32::try_from(codes.len()).is_err() {
            return Err(Error::InvalidParam("more than u32::MAX items".into()));
        }
        let mut buckets: HashMap<u64, Vec<u32>> = HashMap::new();
        for (id, code) in codes.codes().iter().enumerate() {
            buckets.entry(code.bits()).or_default().push(id as u32);
        }
        Ok(Self {
            length: codes.code_length(),
            len: codes.len(),
            buckets,
        })
    }

    pub(crate) fn from_parts(length: u32, len: usize, buckets: HashMap<u64, Vec<u32>>) -> Self {
        Self {
            length,
            len,
            buckets,
        }
    }

    pub fn code_length(&self) -> u32 {
        self.length
    }

    /// Number of indexed items.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn bucket(&self, key: u64) -> Option<&[u32]> {
        self.buckets.get(&key).map(Vec::as_slice)
    }

    pub fn non_empty_buckets(&self) -> usize {
        self.buckets.len()
    }

    /// Buckets in ascending key order.
    pub fn sorted_buckets(&self) -> Vec<(u64, &[u32])> {
        let mut out: Vec<(u64, &[u32])> = self
            .buckets
            .iter()
            .map(|(&k, v)| (k, v.as_slice()))
            .collect();
        out.sort_unstable_by_key(|&(k, _)| k);
        out
    }

    pub fn stats(&self) -> BucketStats {
        bucket_stats(self)
    }
}

/// Occupancy summary of one table.
#[derive(Debug, Clone, PartialEq)]
pub struct BucketStats {
    pub code_length: u32,
    pub items: usize,
    pub non_empty: usize,
    pub max_size: usize,
    pub mean_size: f64,
    /// `ball_size(l, r)` for `r = 0..=min(l, 10)`.
    pub cumulative_buckets: Vec<u128>,
}

pub fn bucket_stats(table: &HashTable) -> BucketStats {
    let non_empty = table.buckets.len();
    let max_size = table.buckets.values().map(Vec::len).max().unwrap_or(0);
    let cumulative_buckets = (0..=table.length.min(10))
        .map(|r| ball_size(table.length, r).expect("r <= l"))
        .collect();
    BucketStats {
        code_length: table.length,
        items: table.len,
        non_empty,
        max_size,
        mean_size: if non_empty == 0 {
            0.0
        } else {
            table.len as f64 / non_empty as f64
        },
        cumulative_buckets,
    }
}

/// `T` tables over the same items and code length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiTableIndex {
    tables: Vec<HashTable>,
}

impl MultiTableIndex {
    pub fn new(tables: Vec<HashTable>) -> Result<Self> {
        let first = tables
            .first()
            .ok_or(Error::EmptyInput("index needs at least one table"))?;
        for t in &tables[1..] {
            if t.length != first.length {
                return Err(Error::LengthMismatch {
                    left: first.length,
                    right: t.length,
                });
            }
            if t.len != first.len {
                return Err(Error::InvalidParam(format!(
                    "tables index different item counts: {} vs {}",
                    first.len, t.len
                )));
            }
        }
        Ok(Self { tables })
    }

    pub fn build(code_sets: &[CodeSet]) -> Result<Self> {
        Self::new(
            code_sets
                .iter()
                .map(HashTable::build)
                .collect::<Result<Vec<_>>>()?,
        )
    }

    pub fn tables(&self) -> &[HashTable] {
        &self.tables
    }

    pub fn table_count(&self) -> usize {
        self.tables.len()
    }

    pub fn code_length(&self) -> u32 {
        self.tables[0].length
    }

    /// Number of indexed items.
    pub fn len(&self) -> usize {
        self.tables[0].len
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn locator(&self) -> Locator<'_> {
        Locator::new(self)
    }

    /// One-shot locate; allocates fresh visited state. Use a [`Locator`] for repeated queries.
    pub fn locate(&self, query_codes: &[BinaryCode], pool: usize) -> Result<LocateResult> {
        self.locator().locate(query_codes, pool)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocateResult {
    /// Distinct candidate ids in the order they entered the pool.
    pub candidate_ids: Vec<u32>,
    pub final_radius: u32,
    pub buckets_visited: u64,
}

/// Per-caller locate state over a frozen index: an epoch-stamped visited set,
/// so repeated queries never pay for clearing it.
#[derive(Debug)]
pub struct Locator<'a> {
    index: &'a MultiTableIndex,
    marks: Vec<u32>,
    epoch: u32,
}

impl<'a> Locator<'a> {
    pub fn new(index: &'a MultiTableIndex) -> Self {
        Self {
            index,
            marks: vec![0; index.len()],
            epoch: 0,
        }
    }

    pub fn index(&self) -> &'a MultiTableIndex {
        self.index
    }

    fn next_epoch(&mut self) -> u32 {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.marks.iter_mut().for_each(|m| *m = 0);
            self.epoch = 1;
        }
        self.epoch
    }

    pub fn locate(&mut self, query_codes: &[BinaryCode], pool: usize) -> Result<LocateResult> {
        let index = self.index;
        if query_codes.len() != index.tables.len() {
            return Err(Error::TableCountMismatch {
                tables: index.tables.len(),
                codes: query_codes.len(),
            });
        }
        let length = index.code_length();
        if let Some(bad) = query_codes.iter().find(|c| c.len() != length) {
            return Err(Error::LengthMismatch {
                left: length,
                right: bad.len(),
            });
        }
        if pool == 0 {
            return Err(Error::InvalidParam("pool size must be at least 1".into()));
        }
        if pool >= index.len() {
            return Ok(self.exhaustive(query_codes));
        }

        let epoch = self.next_epoch();
        let marks = &mut self.marks;
        let mut candidates = Vec::with_capacity(pool);
        let mut visited = 0u64;
        for radius in 0..=length {
            for (table, query) in index.tables.iter().zip(query_codes) {
                for mask in ShellMasks::new(length, radius) {
                    visited += 1;
                    let Some(ids) = table.buckets.get(&(query.bits() ^ mask)) else {
                        continue;
                    };
                    for &id in ids {
                        let mark = &mut marks[id as usize];
                        if *mark != epoch {
                            *mark = epoch;
                            candidates.push(id);
                            if candidates.len() == pool {
                                return Ok(LocateResult {
                                    candidate_ids: candidates,
                                    final_radius: radius,
                                    buckets_visited: visited,
                                });
                            }
                        }
                    }
                }
            }
        }
        unreachable!("the radius-l ball covers every bucket and pool < n")
    }

    /// Pool covers every item. Reports the radius at which the schedule would
    /// have exhausted the index and the non-empty buckets inside it.
    fn exhaustive(&mut self, query_codes: &[BinaryCode]) -> LocateResult {
        let index = self.index;
        let mut nearest = vec![u32::MAX; index.len()];
        for (table, query) in index.tables.iter().zip(query_codes) {
            for (&key, ids) in &table.buckets {
                let d = (key ^ query.bits()).count_ones();
                for &id in ids {
                    let slot = &mut nearest[id as usize];
                    *slot = (*slot).min(d);
                }
            }
        }
        let final_radius = nearest.into_iter().max().unwrap_or(0);
        let buckets_visited = index
            .tables
            .iter()
            .zip(query_codes)
            .map(|(table, query)| {
                table
                    .buckets
                    .keys()
                    .filter(|&&k| (k ^ query.bits()).count_ones() <= final_radius)
                    .count() as u64
            })
            .sum();
        LocateResult {
            candidate_ids: (0..index.len() as u32).collect(),
            final_radius,
            buckets_visited,
        }
    }
}

pub(crate) fn key_fits(key: u64, length: u32) -> bool {
    key & !length_mask(length) == 0
}
