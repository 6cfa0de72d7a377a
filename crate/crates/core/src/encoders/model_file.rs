//! `HMDL1` model files.
//!
//! ```text
//! "HMDL1" u8 kind (0 LSH, 1 IsoH, 2 CRC), u32 d, u32 l, u64 seed
//! linear: d f64 mean, d*l f64 projection (column-major)
//! CRC:    u32 c, c codes in CSET1 bit layout   (d is written as 0)
//! ```

use std::io::{Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use super::{CrcModel, EncoderKind, EncoderModel, LinearEncoderModel};
use crate::error::{Error, Result};
use crate::format::{
    expect_eof, expect_magic, read_code_bytes, to_u32, truncated, write_code_bytes,
};

pub const MODEL_MAGIC: &[u8; 5] = b"HMDL1";

pub fn write_model<W: Write>(w: &mut W, model: &EncoderModel) -> Result<()> {
    w.write_all(MODEL_MAGIC)?;
    w.write_u8(model.kind().tag())?;
    match model {
        EncoderModel::Linear(m) => {
            w.write_u32::<LittleEndian>(to_u32(m.dim, "dimension")?)?;
            w.write_u32::<LittleEndian>(m.length)?;
            w.write_u64::<LittleEndian>(m.seed)?;
            for &v in m.mean.iter().chain(&m.projection) {
                w.write_f64::<LittleEndian>(v)?;
            }
        }
        EncoderModel::Crc(m) => {
            w.write_u32::<LittleEndian>(0)?;
            w.write_u32::<LittleEndian>(m.code_length())?;
            w.write_u64::<LittleEndian>(m.seed())?;
            w.write_u32::<LittleEndian>(m.num_classes())?;
            write_code_bytes(w, m.class_codes())?;
        }
    }
    Ok(())
}

pub fn read_model<R: Read>(r: &mut R) -> Result<EncoderModel> {
    let eof = |e| truncated(e, MODEL_MAGIC);
    expect_magic(r, MODEL_MAGIC)?;
    let tag = r.read_u8().map_err(eof)?;
    let kind = EncoderKind::from_tag(tag).ok_or_else(|| Error::Malformed {
        format: "HMDL1",
        reason: format!("unknown model kind {tag}"),
    })?;
    let dim = r.read_u32::<LittleEndian>().map_err(eof)? as usize;
    let length = r.read_u32::<LittleEndian>().map_err(eof)?;
    let seed = r.read_u64::<LittleEndian>().map_err(eof)?;
    crate::code::check_length(length as usize)?;

    let model = match kind {
        EncoderKind::Crc => {
            let c = r.read_u32::<LittleEndian>().map_err(eof)? as usize;
            let codes = read_code_bytes(r, c, length, MODEL_MAGIC)?;
            EncoderModel::Crc(CrcModel::new(length, codes, seed)?)
        }
        EncoderKind::Lsh | EncoderKind::IsoH => {
            let mut mean = vec![0f64; dim];
            r.read_f64_into::<LittleEndian>(&mut mean).map_err(eof)?;
            let mut projection = vec![0f64; dim * length as usize];
            r.read_f64_into::<LittleEndian>(&mut projection)
                .map_err(eof)?;
            EncoderModel::Linear(LinearEncoderModel::new(
                kind, length, mean, projection, seed,
            )?)
        }
    };
    expect_eof(r, MODEL_MAGIC)?;
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoders::{train_crc, train_isoh, train_lsh};
    use crate::features::FeatureSet;
    use proptest::prelude::*;

    fn round_trip(model: &EncoderModel) -> Vec<u8> {
        let mut bytes = Vec::new();
        write_model(&mut bytes, model).unwrap();
        let back = read_model(&mut bytes.as_slice()).unwrap();
        assert_eq!(&back, model);
        let mut again = Vec::new();
        write_model(&mut again, &back).unwrap();
        assert_eq!(again, bytes);
        bytes
    }

    proptest! {
        #[test]
        fn linear_models_round_trip(d in 1usize..6, l in 1u32..=6, seed in any::<u64>(),
                                    values in prop::collection::vec(-10f32..10.0, 60)) {
            let f = FeatureSet::new(d, values[..10 * d].to_vec(), None).unwrap();
            round_trip(&train_lsh(&f, l, seed).unwrap().into());
            if (l as usize) <= d {
                if let Ok(m) = train_isoh(&f, l, seed) {
                    round_trip(&m.into());
                }
            }
        }

        #[test]
        fn crc_models_round_trip(c in 1u32..200, l in 8u32..=64, seed in any::<u64>()) {
            round_trip(&train_crc(c, l, seed).unwrap().into());
        }
    }

    #[test]
    fn header_layout() {
        let m: EncoderModel = train_crc(2, 9, 42).unwrap().into();
        let bytes = round_trip(&m);
        assert_eq!(&bytes[..5], b"HMDL1");
        assert_eq!(bytes[5], 2);
        assert_eq!(&bytes[6..10], &0u32.to_le_bytes());
        assert_eq!(&bytes[10..14], &9u32.to_le_bytes());
        assert_eq!(&bytes[14..22], &42u64.to_le_bytes());
        assert_eq!(&bytes[22..26], &2u32.to_le_bytes());
        assert_eq!(bytes.len(), 26 + 2 * 2);
    }

    #[test]
    fn rejects_unknown_kind() {
        let mut bytes = b"HMDL1".to_vec();
        bytes.push(7);
        bytes.extend_from_slice(&[0u8; 16]);
        assert!(matches!(
            read_model(&mut bytes.as_slice()),
            Err(Error::Malformed { .. })
        ));
    }
}
