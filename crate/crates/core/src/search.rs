//! Query execution: encode, locate a candidate pool, rerank by squared
//! euclidean distance and keep the `K` nearest. Only locating and scanning
//! are timed; encoding the query happens outside both clock windows.

use std::cmp::Ordering;
use std::time::Instant;

use crate::code::BinaryCode;
use crate::encoders::{CrcModel, LinearEncoderModel};
use crate::error::{Error, Result};
use crate::features::{squared_euclidean, FeatureSet};
use crate::index::{Locator, MultiTableIndex};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchParams {
    pool_size: usize,
    top_k: usize,
}

impl SearchParams {
    pub fn new(pool_size: usize, top_k: usize) -> Result<Self> {
        if top_k == 0 {
            return Err(Error::InvalidParam("K must be at least 1".into()));
        }
        if pool_size < top_k {
            return Err(Error::InvalidParam(format!(
                "pool size P = {pool_size} is smaller than K = {top_k}"
            )));
        }
        Ok(Self { pool_size, top_k })
    }

    pub fn pool_size(&self) -> usize {
        self.pool_size
    }

    pub fn top_k(&self) -> usize {
        self.top_k
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryResult {
    /// Ascending by distance, ties by id.
    pub ids: Vec<u32>,
    /// Squared euclidean distances aligned with `ids`.
    pub distances: Vec<f64>,
    pub locate_ns: u64,
    pub scan_ns: u64,
    pub final_radius: u32,
    pub buckets_visited: u64,
    /// Candidates actually scanned; below `K` only when the pool ran short.
    pub pool_size_used: usize,
}

/// How queries are turned into one code per table.
#[derive(Debug, Clone, Copy)]
pub enum QueryEncoder<'a> {
    /// One linear model per table, applied to the query vector.
    Linear(&'a [LinearEncoderModel]),
    /// Single CRC table; query `i` is coded by its predicted label `predicted[i]`.
    Crc {
        model: &'a CrcModel,
        predicted: &'a [u32],
    },
}

impl QueryEncoder<'_> {
    pub fn table_count(&self) -> usize {
        match self {
            QueryEncoder::Linear(models) => models.len(),
            QueryEncoder::Crc { .. } => 1,
        }
    }

    pub fn encode(&self, query_index: usize, query: &[f32]) -> Result<Vec<BinaryCode>> {
        match self {
            QueryEncoder::Linear(models) => models.iter().map(|m| m.encode(query)).collect(),
            QueryEncoder::Crc { model, predicted } => {
                let label = *predicted.get(query_index).ok_or_else(|| {
                    Error::InvalidParam(format!("no predicted label for query {query_index}"))
                })?;
                Ok(vec![model.encode(label)?])
            }
        }
    }
}

#[inline]
fn by_distance_then_id(a: &(f64, u32), b: &(f64, u32)) -> Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
}

/// Keeps the `k` smallest `(distance, id)` pairs, sorted.
fn select_top_k(mut scored: Vec<(f64, u32)>, k: usize) -> Vec<(f64, u32)> {
    if scored.len() > k {
        scored.select_nth_unstable_by(k - 1, by_distance_then_id);
        scored.truncate(k);
    }
    scored.sort_unstable_by(by_distance_then_id);
    scored
}

/// Reusable query executor over a frozen index and its base features.
#[derive(Debug)]
pub struct Searcher<'a> {
    locator: Locator<'a>,
    base: &'a FeatureSet,
}

impl<'a> Searcher<'a> {
    pub fn new(index: &'a MultiTableIndex, base: &'a FeatureSet) -> Result<Self> {
        if index.len() != base.len() {
            return Err(Error::InvalidParam(format!(
                "index covers {} items but base set has {}",
                index.len(),
                base.len()
            )));
        }
        Ok(Self {
            locator: index.locator(),
            base,
        })
    }

    pub fn base(&self) -> &'a FeatureSet {
        self.base
    }

    /// Locate and scan with precomputed query codes.
    pub fn search_codes(
        &mut self,
        query_codes: &[BinaryCode],
        query: &[f32],
        params: SearchParams,
    ) -> Result<QueryResult> {
        self.base.check_dim(query.len())?;
        if params.top_k > self.base.len() {
            return Err(Error::InvalidParam(format!(
                "K = {} exceeds base size {}",
                params.top_k,
                self.base.len()
            )));
        }

        let start = Instant::now();
        let located = self.locator.locate(query_codes, params.pool_size)?;
        let locate_ns = start.elapsed().as_nanos() as u64;

        let start = Instant::now();
        let scored: Vec<(f64, u32)> = located
            .candidate_ids
            .iter()
            .map(|&id| (squared_euclidean(query, self.base.row(id as usize)), id))
            .collect();
        let top = select_top_k(scored, params.top_k);
        let scan_ns = start.elapsed().as_nanos() as u64;

        let (distances, ids) = top.into_iter().unzip();
        Ok(QueryResult {
            ids,
            distances,
            locate_ns,
            scan_ns,
            final_radius: located.final_radius,
            buckets_visited: located.buckets_visited,
            pool_size_used: located.candidate_ids.len(),
        })
    }

    pub fn search(
        &mut self,
        encoder: &QueryEncoder<'_>,
        query_index: usize,
        query: &[f32],
        params: SearchParams,
    ) -> Result<QueryResult> {
        self.base.check_dim(query.len())?;
        let codes = encoder.encode(query_index, query)?;
        self.search_codes(&codes, query, params)
    }
}

/// Full three-step search of one query with linear encoders, one per table.
pub fn search(
    index: &MultiTableIndex,
    base: &FeatureSet,
    models: &[LinearEncoderModel],
    query: &[f32],
    params: SearchParams,
) -> Result<QueryResult> {
    let mut searcher = Searcher::new(index, base)?;
    searcher.search(&QueryEncoder::Linear(models), 0, query, params)
}

/// Exact `K` nearest neighbours by squared euclidean distance, ties by id.
pub fn brute_force(base: &FeatureSet, query: &[f32], k: usize) -> Result<QueryResult> {
    base.check_dim(query.len())?;
    if k == 0 || k > base.len() {
        return Err(Error::InvalidParam(format!(
            "K = {k} must be in 1..={}",
            base.len()
        )));
    }
    let start = Instant::now();
    let scored: Vec<(f64, u32)> = base
        .rows()
        .enumerate()
        .map(|(id, row)| (squared_euclidean(query, row), id as u32))
        .collect();
    let top = select_top_k(scored, k);
    let scan_ns = start.elapsed().as_nanos() as u64;
    let (distances, ids) = top.into_iter().unzip();
    Ok(QueryResult {
        ids,
        distances,
        locate_ns: 0,
        scan_ns,
        final_radius: 0,
        buckets_visited: 0,
        pool_size_used: base.len(),
    })
}
