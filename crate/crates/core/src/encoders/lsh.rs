use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{EncoderKind, LinearEncoderModel};
use crate::error::Result;
use crate::features::FeatureSet;

/// Random-projection LSH: i.i.d. standard normal projection columns drawn from
/// a ChaCha stream seeded with `seed`, thresholded at the data mean.
pub fn train_lsh(features: &FeatureSet, length: u32, seed: u64) -> Result<LinearEncoderModel> {
    let length = crate::code::check_length(length as usize)?;
    let dim = features.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let projection = (0..dim * length as usize)
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    LinearEncoderModel::new(
        EncoderKind::Lsh,
        length,
        features.column_means(),
        projection,
        seed,
    )
}
