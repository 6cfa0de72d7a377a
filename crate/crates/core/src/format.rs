//! Little-endian binary file formats for feature sets (`FSET1`), label files
//! (labels-only `FSET1` with `d = 0`) and code sets (`CSET1`).
//!
//! ```text
//! FSET1: "FSET1" u32 n, u32 d, u8 has_labels, n*d f32 (row-major), [n i32 labels]
//! CSET1: "CSET1" u32 n, u32 l, n * ceil(l/8) packed code bytes
//! ```

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use crate::code::{byte_len, BinaryCode, CodeSet};
use crate::error::{Error, Result};
use crate::features::FeatureSet;

pub const FSET_MAGIC: &[u8; 5] = b"FSET1";
pub const CSET_MAGIC: &[u8; 5] = b"CSET1";

pub(crate) fn expect_magic<R: Read>(r: &mut R, magic: &'static [u8; 5]) -> Result<()> {
    let mut buf = [0u8; 5];
    r.read_exact(&mut buf).map_err(|e| truncated(e, magic))?;
    if &buf != magic {
        return Err(Error::BadMagic {
            expected: std::str::from_utf8(magic).unwrap_or("?"),
        });
    }
    Ok(())
}

pub(crate) fn truncated(err: io::Error, magic: &'static [u8; 5]) -> Error {
    if err.kind() == io::ErrorKind::UnexpectedEof {
        Error::Malformed {
            format: std::str::from_utf8(magic).unwrap_or("?"),
            reason: "unexpected end of file".into(),
        }
    } else {
        Error::Io(err)
    }
}

pub(crate) fn expect_eof<R: Read>(r: &mut R, magic: &'static [u8; 5]) -> Result<()> {
    let mut probe = [0u8; 1];
    match r.read(&mut probe)? {
        0 => Ok(()),
        _ => Err(Error::Malformed {
            format: std::str::from_utf8(magic).unwrap_or("?"),
            reason: "trailing bytes after payload".into(),
        }),
    }
}

pub(crate) fn to_u32(value: usize, what: &str) -> Result<u32> {
    u32::try_from(value).map_err(|_| Error::InvalidParam(format!("{what} {value} exceeds u32")))
}

fn write_labels<W: Write>(w: &mut W, labels: &[u32]) -> Result<()> {
    for &label in labels {
        let label = i32::try_from(label)
            .map_err(|_| Error::InvalidParam(format!("label {label} exceeds i32")))?;
        w.write_i32::<LittleEndian>(label)?;
    }
    Ok(())
}

fn read_label_vec<R: Read>(r: &mut R, n: usize) -> Result<Vec<u32>> {
    let mut raw = vec![0i32; n];
    r.read_i32_into::<LittleEndian>(&mut raw)
        .map_err(|e| truncated(e, FSET_MAGIC))?;
    raw.into_iter()
        .map(|v| {
            u32::try_from(v).map_err(|_| Error::Malformed {
                format: "FSET1",
                reason: format!("negative label {v}"),
            })
        })
        .collect()
}

pub fn write_features<W: Write>(w: &mut W, features: &FeatureSet) -> Result<()> {
    w.write_all(FSET_MAGIC)?;
    w.write_u32::<LittleEndian>(to_u32(features.len(), "row count")?)?;
    w.write_u32::<LittleEndian>(to_u32(features.dim(), "dimension")?)?;
    w.write_u8(features.labels().is_some() as u8)?;
    for &v in features.values() {
        w.write_f32::<LittleEndian>(v)?;
    }
    if let Some(labels) = features.labels() {
        write_labels(w, labels)?;
    }
    Ok(())
}

pub fn read_features<R: Read>(r: &mut R) -> Result<FeatureSet> {
    expect_magic(r, FSET_MAGIC)?;
    let n = r
        .read_u32::<LittleEndian>()
        .map_err(|e| truncated(e, FSET_MAGIC))? as usize;
    let d = r
        .read_u32::<LittleEndian>()
        .map_err(|e| truncated(e, FSET_MAGIC))? as usize;
    let has_labels = read_flag(r)?;
    if d == 0 {
        return Err(Error::Malformed {
            format: "FSET1",
            reason: "labels-only file where features were expected".into(),
        });
    }
    let mut values = vec![
        0f32;
        n.checked_mul(d).ok_or_else(|| Error::Malformed {
            format: "FSET1",
            reason: "n*d overflows".into(),
        })?
    ];
    r.read_f32_into::<LittleEndian>(&mut values)
        .map_err(|e| truncated(e, FSET_MAGIC))?;
    let labels = if has_labels {
        Some(read_label_vec(r, n)?)
    } else {
        None
    };
    expect_eof(r, FSET_MAGIC)?;
    FeatureSet::new(d, values, labels)
}

fn read_flag<R: Read>(r: &mut R) -> Result<bool> {
    match r.read_u8().map_err(|e| truncated(e, FSET_MAGIC))? {
        0 => Ok(false),
        1 => Ok(true),
        other => Err(Error::Malformed {
            format: "FSET1",
            reason: format!("has_labels flag {other}"),
        }),
    }
}

/// Writes a labels-only `FSET1` file (`d = 0`), the layout used for predicted labels.
pub fn write_labels_file<W: Write>(w: &mut W, labels: &[u32]) -> Result<()> {
    w.write_all(FSET_MAGIC)?;
    w.write_u32::<LittleEndian>(to_u32(labels.len(), "label count")?)?;
    w.write_u32::<LittleEndian>(0)?;
    w.write_u8(1)?;
    write_labels(w, labels)
}

/// Reads labels from any `FSET1` file that carries them; feature values, if present, are skipped.
pub fn read_labels_file<R: Read>(r: &mut R) -> Result<Vec<u32>> {
    expect_magic(r, FSET_MAGIC)?;
    let n = r
        .read_u32::<LittleEndian>()
        .map_err(|e| truncated(e, FSET_MAGIC))? as usize;
    let d = r
        .read_u32::<LittleEndian>()
        .map_err(|e| truncated(e, FSET_MAGIC))? as usize;
    if !read_flag(r)? {
        return Err(Error::MissingLabels("file has no labels"));
    }
    let skip = (n as u64) * (d as u64) * 4;
    let copied = io::copy(&mut r.by_ref().take(skip), &mut io::sink())?;
    if copied != skip {
        return Err(truncated(io::ErrorKind::UnexpectedEof.into(), FSET_MAGIC));
    }
    let labels = read_label_vec(r, n)?;
    expect_eof(r, FSET_MAGIC)?;
    Ok(labels)
}

pub fn write_codes<W: Write>(w: &mut W, codes: &CodeSet) -> Result<()> {
    w.write_all(CSET_MAGIC)?;
    w.write_u32::<LittleEndian>(to_u32(codes.len(), "code count")?)?;
    w.write_u32::<LittleEndian>(codes.code_length())?;
    write_code_bytes(w, codes.codes())
}

pub(crate) fn write_code_bytes<W: Write>(w: &mut W, codes: &[BinaryCode]) -> Result<()> {
    for code in codes {
        w.write_all(&code.to_bytes())?;
    }
    Ok(())
}

pub(crate) fn read_code_bytes<R: Read>(
    r: &mut R,
    n: usize,
    length: u32,
    magic: &'static [u8; 5],
) -> Result<Vec<BinaryCode>> {
    let width = byte_len(length);
    let mut buf = vec![0u8; width];
    (0..n)
        .map(|_| {
            r.read_exact(&mut buf).map_err(|e| truncated(e, magic))?;
            BinaryCode::from_bytes(&buf, length)
        })
        .collect()
}

pub fn read_codes<R: Read>(r: &mut R) -> Result<CodeSet> {
    expect_magic(r, CSET_MAGIC)?;
    let n = r
        .read_u32::<LittleEndian>()
        .map_err(|e| truncated(e, CSET_MAGIC))? as usize;
    let length = r
        .read_u32::<LittleEndian>()
        .map_err(|e| truncated(e, CSET_MAGIC))?;
    crate::code::check_length(length as usize)?;
    let codes = read_code_bytes(r, n, length, CSET_MAGIC)?;
    expect_eof(r, CSET_MAGIC)?;
    CodeSet::new(length, codes)
}

pub fn save<P, F>(path: P, write: F) -> Result<()>
where
    P: AsRef<Path>,
    F: FnOnce(&mut BufWriter<File>) -> Result<()>,
{
    let mut w = BufWriter::new(File::create(path)?);
    write(&mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load<P, T, F>(path: P, read: F) -> Result<T>
where
    P: AsRef<Path>,
    F: FnOnce(&mut BufReader<File>) -> Result<T>,
{
    let mut r = BufReader::new(File::open(path)?);
    read(&mut r)
}
