//! Synthetic labelled data: isotropic gaussian clusters with centres drawn
//! uniformly from `[-1, 1]^d`. Labels are cluster ids.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::features::FeatureSet;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterSpec {
    pub clusters: usize,
    pub per_cluster: usize,
    pub dim: usize,
    pub spread: f32,
}

impl ClusterSpec {
    fn validate(&self) -> Result<()> {
        if self.clusters == 0 || self.per_cluster == 0 || self.dim == 0 {
            return Err(Error::InvalidParam(
                "clusters, per-cluster count and dimension must be positive".into(),
            ));
        }
        if !(self.spread >= 0.0 && self.spread.is_finite()) {
            return Err(Error::InvalidParam(format!(
                "invalid spread {}",
                self.spread
            )));
        }
        if u32::try_from(self.clusters).is_err() {
            return Err(Error::InvalidParam("too many clusters".into()));
        }
        Ok(())
    }
}

fn sample_points(
    centres: &[Vec<f32>],
    per_cluster: usize,
    spread: f32,
    rng: &mut ChaCha8Rng,
) -> Result<FeatureSet> {
    let dim = centres[0].len();
    let mut values = Vec::with_capacity(centres.len() * per_cluster * dim);
    let mut labels = Vec::with_capacity(centres.len() * per_cluster);
    for (label, centre) in centres.iter().enumerate() {
        for _ in 0..per_cluster {
            values.extend(centre.iter().map(|&c| {
                let z: f32 = StandardNormal.sample(rng);
                c + spread * z
            }));
            labels.push(label as u32);
        }
    }
    FeatureSet::new(dim, values, Some(labels))
}

fn draw_centres(spec: &ClusterSpec, rng: &mut ChaCha8Rng) -> Vec<Vec<f32>> {
    (0..spec.clusters)
        .map(|_| {
            (0..spec.dim)
                .map(|_| rng.random_range(-1.0f32..=1.0))
                .collect()
        })
        .collect()
}

/// `clusters * per_cluster` labelled points, cluster-major order.
pub fn gaussian_clusters(spec: &ClusterSpec, seed: u64) -> Result<FeatureSet> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centres = draw_centres(spec, &mut rng);
    sample_points(&centres, spec.per_cluster, spec.spread, &mut rng)
}

/// Base points as in [`gaussian_clusters`] plus `queries_per_cluster` held-out
/// queries per cluster drawn from the same centres.
pub fn gaussian_clusters_with_queries(
    spec: &ClusterSpec,
    queries_per_cluster: usize,
    seed: u64,
) -> Result<(FeatureSet, FeatureSet)> {
    spec.validate()?;
    if queries_per_cluster == 0 {
        return Err(Error::InvalidParam(
            "queries per cluster must be positive".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centres = draw_centres(spec, &mut rng);
    let base = sample_points(&centres, spec.per_cluster, spec.spread, &mut rng)?;
    let queries = sample_points(&centres, queries_per_cluster, spec.spread, &mut rng)?;
    Ok((base, queries))
}

/// Stub classifier output: exactly `round(accuracy * n)` of the true labels are
/// kept (positions chosen at random), the rest replaced by a different random class.
pub fn stub_predictions(
    truth: &[u32],
    num_classes: u32,
    accuracy: f64,
    seed: u64,
) -> Result<Vec<u32>> {
    if !(0.0..=1.0).contains(&accuracy) {
        return Err(Error::InvalidParam(format!(
            "accuracy {accuracy} outside [0, 1]"
        )));
    }
    if let Some(&bad) = truth.iter().find(|&&l| l >= num_classes) {
        return Err(Error::LabelOutOfRange {
            label: bad,
            classes: num_classes,
        });
    }
    let correct = (accuracy * truth.len() as f64).round() as usize;
    if correct < truth.len() && num_classes < 2 {
        return Err(Error::InvalidParam(
            "wrong predictions need at least two classes".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..truth.len()).collect();
    order.shuffle(&mut rng);
    let mut predicted = truth.to_vec();
    for &i in &order[correct..] {
        let shift = rng.random_range(1..num_classes);
        predicted[i] = (truth[i] + shift) % num_classes;
    }
    Ok(predicted)
}
