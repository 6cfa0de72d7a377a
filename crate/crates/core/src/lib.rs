//! # hashlane
//!
//! Binary-hashing approximate nearest neighbour search with multi-table
//! hamming-ball probing, plus the harness that measures it honestly.
//!
//! A query is answered in three steps: encode it to one `l`-bit code per
//! table, *locate* a pool of `P` distinct candidates by probing buckets at
//! growing hamming radius (all tables at radius `r` before any at `r + 1`),
//! then *scan* the pool by true feature distance and return the `K` nearest.
//! Locating cost grows with the number of buckets in the hamming ball,
//! `sum_{i<=r} C(l, i)`, so the benchmark reports locating and scanning time
//! separately and never hides either.
//!
//! ```
//! use hashlane::{encoders::train_lsh, index::MultiTableIndex, search::{search, SearchParams}};
//! use hashlane::synth::{gaussian_clusters, ClusterSpec};
//!
//! let spec = ClusterSpec { clusters: 4, per_cluster: 50, dim: 8, spread: 0.1 };
//! let base = gaussian_clusters(&spec, 7).unwrap();
//! let models: Vec<_> = (0..4).map(|t| train_lsh(&base, 12, t).unwrap()).collect();
//! let codes: Vec<_> = models.iter().map(|m| m.encode_set(&base).unwrap()).collect();
//! let index = MultiTableIndex::build(&codes).unwrap();
//!
//! let res = search(&index, &base, &models, base.row(3), SearchParams::new(20, 5).unwrap()).unwrap();
//! assert_eq!(res.ids[0], 3);
//! ```

pub mod bench;
pub mod code;
pub mod encoders;
pub mod error;
pub mod features;
pub mod format;
pub mod index;
pub mod search;
pub mod synth;

pub use code::{ball_size, hamming_distance, pack_bits, BinaryCode, CodeSet};
pub use error::{Error, Result};
pub use features::FeatureSet;
pub use index::{HashTable, LocateResult, MultiTableIndex};
pub use search::{brute_force, QueryResult, SearchParams};
