//! `HIDX1` index files.
//!
//! ```text
//! "HIDX1" u32 T, u32 l, u32 n
//! per table: u64 bucket_count, then per bucket (ascending key):
//!            u64 key, u32 size, size x u32 ids (ascending)
//! ```

use std::collections::HashMap;
use std::io::{Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use super::{key_fits, HashTable, MultiTableIndex};
use crate::error::{Error, Result};
use crate::format::{expect_eof, expect_magic, to_u32, truncated};

pub const INDEX_MAGIC: &[u8; 5] = b"HIDX1";

fn malformed(reason: impl Into<String>) -> Error {
    Error::Malformed {
        format: "HIDX1",
        reason: reason.into(),
    }
}

pub fn write_index<W: Write>(w: &mut W, index: &MultiTableIndex) -> Result<()> {
    w.write_all(INDEX_MAGIC)?;
    w.write_u32::<LittleEndian>(to_u32(index.table_count(), "table count")?)?;
    w.write_u32::<LittleEndian>(index.code_length())?;
    w.write_u32::<LittleEndian>(to_u32(index.len(), "item count")?)?;
    for table in index.tables() {
        let buckets = table.sorted_buckets();
        w.write_u64::<LittleEndian>(buckets.len() as u64)?;
        for (key, ids) in buckets {
            w.write_u64::<LittleEndian>(key)?;
            w.write_u32::<LittleEndian>(ids.len() as u32)?;
            for &id in ids {
                w.write_u32::<LittleEndian>(id)?;
            }
        }
    }
    Ok(())
}

/// Reads and validates an index: keys ascending and within `l` bits, ids
/// ascending within a bucket, and every id in `0..n` present exactly once per table.
pub fn read_index<R: Read>(r: &mut R) -> Result<MultiTableIndex> {
    let eof = |e| truncated(e, INDEX_MAGIC);
    expect_magic(r, INDEX_MAGIC)?;
    let tables = r.read_u32::<LittleEndian>().map_err(eof)? as usize;
    let length = r.read_u32::<LittleEndian>().map_err(eof)?;
    let n = r.read_u32::<LittleEndian>().map_err(eof)? as usize;
    crate::code::check_length(length as usize)?;
    if tables == 0 {
        return Err(malformed("zero tables"));
    }
    if n == 0 {
        return Err(malformed("zero items"));
    }

    let mut out = Vec::with_capacity(tables);
    let mut seen = vec![false; n];
    for t in 0..tables {
        seen.iter_mut().for_each(|s| *s = false);
        let bucket_count = r.read_u64::<LittleEndian>().map_err(eof)?;
        if bucket_count > n as u64 {
            return Err(malformed(format!(
                "table {t}: {bucket_count} buckets for {n} items"
            )));
        }
        let mut buckets = HashMap::with_capacity(bucket_count as usize);
        let mut prev_key: Option<u64> = None;
        let mut total = 0usize;
        for _ in 0..bucket_count {
            let key = r.read_u64::<LittleEndian>().map_err(eof)?;
            if !key_fits(key, length) {
                return Err(malformed(format!(
                    "table {t}: key {key:#x} wider than {length} bits"
                )));
            }
            if prev_key.is_some_and(|p| p >= key) {
                return Err(malformed(format!("table {t}: keys not strictly ascending")));
            }
            prev_key = Some(key);
            let size = r.read_u32::<LittleEndian>().map_err(eof)? as usize;
            if size == 0 || total + size > n {
                return Err(malformed(format!("table {t}: bad bucket size {size}")));
            }
            total += size;
            let mut ids = vec![0u32; size];
            r.read_u32_into::<LittleEndian>(&mut ids).map_err(eof)?;
            if ids.windows(2).any(|w| w[0] >= w[1]) {
                return Err(malformed(format!("table {t}: bucket ids not ascending")));
            }
            for &id in &ids {
                let slot = seen
                    .get_mut(id as usize)
                    .ok_or_else(|| malformed(format!("table {t}: id {id} >= n = {n}")))?;
                if *slot {
                    return Err(malformed(format!("table {t}: id {id} in two buckets")));
                }
                *slot = true;
            }
            buckets.insert(key, ids);
        }
        if total != n {
            return Err(malformed(format!("table {t}: {total} ids for {n} items")));
        }
        out.push(HashTable::from_parts(length, n, buckets));
    }
    expect_eof(r, INDEX_MAGIC)?;
    MultiTableIndex::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::CodeSet;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn index_round_trip(l in 1u32..=64, t in 1usize..4,
                            words in prop::collection::vec(any::<u64>(), 1..40), salt in any::<u64>()) {
            let sets: Vec<CodeSet> = (0..t)
                .map(|k| {
                    let w: Vec<u64> = words.iter().map(|x| x.rotate_left(k as u32) ^ salt.wrapping_mul(k as u64)).collect();
                    CodeSet::from_words(l, &w).unwrap()
                })
                .collect();
            let index = MultiTableIndex::build(&sets).unwrap();
            let mut bytes = Vec::new();
            write_index(&mut bytes, &index).unwrap();
            let back = read_index(&mut bytes.as_slice()).unwrap();
            prop_assert_eq!(&back, &index);
            let mut again = Vec::new();
            write_index(&mut again, &back).unwrap();
            prop_assert_eq!(again, bytes);
        }
    }

    #[test]
    fn exact_layout() {
        let index = MultiTableIndex::build(&[CodeSet::from_words(4, &[3, 1, 3]).unwrap()]).unwrap();
        let mut bytes = Vec::new();
        write_index(&mut bytes, &index).unwrap();
        let mut expected = b"HIDX1".to_vec();
        for v in [1u32, 4, 3] {
            expected.extend_from_slice(&v.to_le_bytes());
        }
        expected.extend_from_slice(&2u64.to_le_bytes());
        expected.extend_from_slice(&1u64.to_le_bytes());
        expected.extend_from_slice(&1u32.to_le_bytes());
        expected.extend_from_slice(&1u32.to_le_bytes());
        expected.extend_from_slice(&3u64.to_le_bytes());
        expected.extend_from_slice(&2u32.to_le_bytes());
        expected.extend_from_slice(&0u32.to_le_bytes());
        expected.extend_from_slice(&2u32.to_le_bytes());
        assert_eq!(bytes, expected);
    }

    #[test]
    fn rejects_broken_partition() {
        let index = MultiTableIndex::build(&[CodeSet::from_words(4, &[3, 1, 3]).unwrap()]).unwrap();
        let mut bytes = Vec::new();
        write_index(&mut bytes, &index).unwrap();
        // duplicate id: overwrite the singleton bucket's id 1 with 0
        let pos = 5 + 12 + 8 + 8 + 4;
        bytes[pos..pos + 4].copy_from_slice(&0u32.to_le_bytes());
        assert!(matches!(
            read_index(&mut bytes.as_slice()),
            Err(Error::Malformed { .. })
        ));
    }
}
