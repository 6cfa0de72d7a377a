//! Isotropic hashing: PCA to `l` dimensions, then an orthogonal rotation that
//! makes every projected dimension carry the same variance.
//!
//! With `Λ = diag(λ_1..λ_l)` the top PCA eigenvalues and `a = trace(Λ) / l`,
//! we need an orthogonal `Q` such that `diag(Qᵀ Λ Q) = (a, .., a)`. Starting
//! from a seeded random rotation, each step picks the largest and smallest
//! diagonal entries of `M = Qᵀ Λ Q` and applies the plane rotation that sets
//! the larger one to exactly `a`. The smaller one absorbs the difference, so
//! at most `l - 1` steps are needed. The final encoder is `W = E_l Q`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::eigen::symmetric_eigen;
use super::{EncoderKind, LinearEncoderModel};
use crate::error::{Error, Result};
use crate::features::FeatureSet;

const RANK_TOL: f64 = 1e-12;

pub fn train_isoh(features: &FeatureSet, length: u32, seed: u64) -> Result<LinearEncoderModel> {
    let l = crate::code::check_length(length as usize)? as usize;
    let n = features.len();
    let d = features.dim();
    if n < 2 {
        return Err(Error::InvalidParam(format!(
            "IsoH needs at least 2 training rows, got {n}"
        )));
    }
    if l > d {
        return Err(Error::InvalidParam(format!(
            "IsoH code length {l} exceeds feature dimension {d}"
        )));
    }

    let mean = features.column_means();
    let cov = covariance(features, &mean);
    let eig = symmetric_eigen(&cov, d)?;
    let largest = eig.values[0];
    let smallest_kept = eig.values[l - 1];
    if largest.is_nan() || largest <= 0.0 || smallest_kept < RANK_TOL * largest {
        return Err(Error::RankDeficient {
            wanted: l,
            value: smallest_kept,
            largest,
        });
    }

    let lambda = &eig.values[..l];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rotation = isotropic_rotation(lambda, &mut rng);

    // W[:, j] = sum_k E[:, k] * Q[k, j]
    let mut projection = vec![0.0f64; d * l];
    for j in 0..l {
        let col = &mut projection[j * d..(j + 1) * d];
        for k in 0..l {
            let q = rotation[k * l + j];
            for (w, e) in col.iter_mut().zip(eig.vector(k)) {
                *w += e * q;
            }
        }
    }
    LinearEncoderModel::new(EncoderKind::IsoH, l as u32, mean, projection, seed)
}

/// Sample covariance (divisor `n - 1`), row-major `d x d`.
pub(crate) fn covariance(features: &FeatureSet, mean: &[f64]) -> Vec<f64> {
    let d = features.dim();
    let mut cov = vec![0.0f64; d * d];
    let mut centered = vec![0.0f64; d];
    for row in features.rows() {
        for ((c, &v), m) in centered.iter_mut().zip(row).zip(mean) {
            *c = f64::from(v) - m;
        }
        for i in 0..d {
            let ci = centered[i];
            let out = &mut cov[i * d..i * d + i + 1];
            for (o, cj) in out.iter_mut().zip(&centered[..=i]) {
                *o += ci * cj;
            }
        }
    }
    let denom = (features.len() - 1) as f64;
    for i in 0..d {
        for j in 0..=i {
            let v = cov[i * d + j] / denom;
            cov[i * d + j] = v;
            cov[j * d + i] = v;
        }
    }
    cov
}

/// Returns row-major `l x l` orthogonal `Q` with `diag(Qᵀ diag(lambda) Q)` constant.
pub(crate) fn isotropic_rotation(lambda: &[f64], rng: &mut ChaCha8Rng) -> Vec<f64> {
    let l = lambda.len();
    let target = lambda.iter().sum::<f64>() / l as f64;
    let mut q = random_orthogonal(l, rng);

    // m = Qᵀ Λ Q
    let mut m = vec![0.0f64; l * l];
    for i in 0..l {
        for j in 0..l {
            m[i * l + j] = (0..l)
                .map(|k| q[k * l + i] * lambda[k] * q[k * l + j])
                .sum();
        }
    }

    let tol = 1e-13 * target.abs();
    for _ in 0..2 * l {
        let (hi, lo) = extreme_diagonal(&m, l);
        let p = m[hi * l + hi];
        let r = m[lo * l + lo];
        if p - r <= tol {
            break;
        }
        let off = m[hi * l + lo];
        // New diag at `hi` is mid + half*cos(2t) + off*sin(2t) = mid + amp*cos(2t - phi).
        let mid = 0.5 * (p + r);
        let half = 0.5 * (p - r);
        let amp = half.hypot(off);
        let phi = off.atan2(half);
        let two_t = phi + ((target - mid) / amp).clamp(-1.0, 1.0).acos();
        let (s, c) = (0.5 * two_t).sin_cos();
        rotate_plane(&mut m, &mut q, l, hi, lo, c, s);
        m[hi * l + hi] = target;
    }
    q
}

fn extreme_diagonal(m: &[f64], l: usize) -> (usize, usize) {
    let mut hi = 0;
    let mut lo = 0;
    for i in 1..l {
        if m[i * l + i] > m[hi * l + hi] {
            hi = i;
        }
        if m[i * l + i] < m[lo * l + lo] {
            lo = i;
        }
    }
    (hi, lo)
}

/// Replaces basis vectors `i, j` by `c e_i + s e_j` and `-s e_i + c e_j`:
/// `m <- Gᵀ m G`, `q <- q G`.
fn rotate_plane(m: &mut [f64], q: &mut [f64], l: usize, i: usize, j: usize, c: f64, s: f64) {
    for k in 0..l {
        let (mi, mj) = (m[k * l + i], m[k * l + j]);
        m[k * l + i] = c * mi + s * mj;
        m[k * l + j] = -s * mi + c * mj;
        let (qi, qj) = (q[k * l + i], q[k * l + j]);
        q[k * l + i] = c * qi + s * qj;
        q[k * l + j] = -s * qi + c * qj;
    }
    for k in 0..l {
        let (mi, mj) = (m[i * l + k], m[j * l + k]);
        m[i * l + k] = c * mi + s * mj;
        m[j * l + k] = -s * mi + c * mj;
    }
}

/// Haar-distributed orthogonal matrix: Gram-Schmidt on a Gaussian matrix.
fn random_orthogonal(l: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        // columns stored contiguously while orthogonalising
        let mut cols: Vec<Vec<f64>> = (0..l)
            .map(|_| (0..l).map(|_| StandardNormal.sample(rng)).collect())
            .collect();
        let mut ok = true;
        for j in 0..l {
            for k in 0..j {
                let (done, rest) = cols.split_at_mut(j);
                let dot: f64 = done[k].iter().zip(&rest[0]).map(|(a, b)| a * b).sum();
                for (x, y) in rest[0].iter_mut().zip(&done[k]) {
                    *x -= dot * y;
                }
            }
            let norm = cols[j].iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm < 1e-10 {
                ok = false;
                break;
            }
            cols[j].iter_mut().for_each(|x| *x /= norm);
        }
        if ok {
            let mut q = vec![0.0f64; l * l];
            for (j, col) in cols.iter().enumerate() {
                for (i, v) in col.iter().enumerate() {
                    q[i * l + j] = *v;
                }
            }
            return q;
        }
    }
}
