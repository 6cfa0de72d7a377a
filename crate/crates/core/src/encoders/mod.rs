//! Hash function learning: random-projection LSH, isotropic hashing (IsoH)
//! and classification random coding (CRC).
//!
//! LSH and IsoH share one linear form: subtract the training mean, project
//! onto the columns of a `d x l` matrix and keep the sign of each projection.

mod crc;
pub(crate) mod eigen;
mod isoh;
mod lsh;
mod model_file;

pub use crc::{train_crc, CrcModel};
pub use isoh::train_isoh;
pub use lsh::train_lsh;
pub use model_file::{read_model, write_model, MODEL_MAGIC};

use crate::code::{BinaryCode, CodeSet};
use crate::error::{Error, Result};
use crate::features::FeatureSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EncoderKind {
    Lsh,
    IsoH,
    Crc,
}

impl EncoderKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EncoderKind::Lsh => "lsh",
            EncoderKind::IsoH => "isoh",
            EncoderKind::Crc => "crc",
        }
    }

    pub(crate) fn tag(&self) -> u8 {
        match self {
            EncoderKind::Lsh => 0,
            EncoderKind::IsoH => 1,
            EncoderKind::Crc => 2,
        }
    }

    pub(crate) fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(EncoderKind::Lsh),
            1 => Some(EncoderKind::IsoH),
            2 => Some(EncoderKind::Crc),
            _ => None,
        }
    }
}

impl std::str::FromStr for EncoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lsh" => Ok(EncoderKind::Lsh),
            "isoh" => Ok(EncoderKind::IsoH),
            "crc" => Ok(EncoderKind::Crc),
            other => Err(Error::InvalidParam(format!("unknown method {other:?}"))),
        }
    }
}

impl std::fmt::Display for EncoderKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A mean-centred sign-of-projection encoder.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearEncoderModel {
    pub(crate) kind: EncoderKind,
    pub(crate) dim: usize,
    pub(crate) length: u32,
    pub(crate) mean: Vec<f64>,
    /// Column-major `dim x length`; column `j` is the projection for bit `j`.
    pub(crate) projection: Vec<f64>,
    pub(crate) seed: u64,
}

impl LinearEncoderModel {
    pub fn new(
        kind: EncoderKind,
        length: u32,
        mean: Vec<f64>,
        projection: Vec<f64>,
        seed: u64,
    ) -> Result<Self> {
        if kind == EncoderKind::Crc {
            return Err(Error::InvalidParam("CRC is not a linear encoder".into()));
        }
        let length = crate::code::check_length(length as usize)?;
        let dim = mean.len();
        if dim == 0 {
            return Err(Error::InvalidParam(
                "encoder dimension must be positive".into(),
            ));
        }
        if projection.len() != dim * length as usize {
            return Err(Error::DimensionMismatch {
                expected: dim * length as usize,
                actual: projection.len(),
            });
        }
        if mean.iter().chain(&projection).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParam("non-finite encoder parameter".into()));
        }
        Ok(Self {
            kind,
            dim,
            length,
            mean,
            projection,
            seed,
        })
    }

    pub fn kind(&self) -> EncoderKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn code_length(&self) -> u32 {
        self.length
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn projection_column(&self, j: usize) -> &[f64] {
        &self.projection[j * self.dim..(j + 1) * self.dim]
    }

    /// Real-valued projections `(x - mean) . W[:, j]` for every bit `j`.
    pub fn project(&self, x: &[f32]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: x.len(),
            });
        }
        let centered: Vec<f64> = x
            .iter()
            .zip(&self.mean)
            .map(|(&v, m)| f64::from(v) - m)
            .collect();
        Ok(self
            .projection
            .chunks_exact(self.dim)
            .map(|col| col.iter().zip(&centered).map(|(w, c)| w * c).sum())
            .collect())
    }

    /// Bit `j` is set iff the `j`-th projection is strictly positive.
    pub fn encode(&self, x: &[f32]) -> Result<BinaryCode> {
        let bits = self
            .project(x)?
            .iter()
            .enumerate()
            .fold(0u64, |acc, (j, &p)| acc | (((p > 0.0) as u64) << j));
        Ok(BinaryCode::from_raw(bits, self.length))
    }

    pub fn encode_set(&self, features: &FeatureSet) -> Result<CodeSet> {
        features.check_dim(self.dim)?;
        let codes = features
            .rows()
            .map(|row| self.encode(row))
            .collect::<Result<Vec<_>>>()?;
        CodeSet::new(self.length, codes)
    }
}

/// Any trained encoder, as stored in a model file.
#[derive(Debug, Clone, PartialEq)]
pub enum EncoderModel {
    Linear(LinearEncoderModel),
    Crc(CrcModel),
}

impl EncoderModel {
    pub fn kind(&self) -> EncoderKind {
        match self {
            EncoderModel::Linear(m) => m.kind,
            EncoderModel::Crc(_) => EncoderKind::Crc,
        }
    }

    pub fn code_length(&self) -> u32 {
        match self {
            EncoderModel::Linear(m) => m.length,
            EncoderModel::Crc(m) => m.code_length(),
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            EncoderModel::Linear(m) => m.seed,
            EncoderModel::Crc(m) => m.seed(),
        }
    }

    pub fn as_linear(&self) -> Option<&LinearEncoderModel> {
        match self {
            EncoderModel::Linear(m) => Some(m),
            EncoderModel::Crc(_) => None,
        }
    }

    pub fn as_crc(&self) -> Option<&CrcModel> {
        match self {
            EncoderModel::Crc(m) => Some(m),
            EncoderModel::Linear(_) => None,
        }
    }

    /// Encodes a whole feature set. CRC models read the set's labels.
    pub fn encode_set(&self, features: &FeatureSet) -> Result<CodeSet> {
        match self {
            EncoderModel::Linear(m) => m.encode_set(features),
            EncoderModel::Crc(m) => {
                let labels = features
                    .labels()
                    .ok_or(Error::MissingLabels("CRC encoding needs class labels"))?;
                m.encode_labels(labels)
            }
        }
    }
}

impl From<LinearEncoderModel> for EncoderModel {
    fn from(m: LinearEncoderModel) -> Self {
        EncoderModel::Linear(m)
    }
}

impl From<CrcModel> for EncoderModel {
    fn from(m: CrcModel) -> Self {
        EncoderModel::Crc(m)
    }
}
