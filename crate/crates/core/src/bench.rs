//! Precision-vs-time evaluation.
//!
//! A sweep runs every query once per pool size `P` and records mean
//! precision@K together with the summed locating and scanning times. Query
//! encoding is never timed. Each timed pass is preceded by an untimed warm-up
//! over 1% of the queries (at least one).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use crate::code::{ball_size, BinaryCode};
use crate::encoders::{train_isoh, train_lsh, EncoderKind, LinearEncoderModel};
use crate::error::{Error, Result};
use crate::features::FeatureSet;
use crate::index::MultiTableIndex;
use crate::search::{brute_force, QueryEncoder, QueryResult, SearchParams, Searcher};

pub const CSV_HEADER: &str =
    "method,tables,bits,pool,top_k,precision,locate_ns,scan_ns,total_ns,queries";
pub const HISTOGRAM_HEADER: &str = "bits,pool,radius,count";
pub const TIMING_NOTE: &str =
    "# times are summed over queries and cover locating and scanning only; query encoding is excluded";

/// Fraction of the first `k` results sharing the query label. Missing results
/// (fewer than `k` returned) count as irrelevant.
pub fn precision_at_k(
    result_ids: &[u32],
    base_labels: Option<&[u32]>,
    query_label: Option<u32>,
    k: usize,
) -> Result<f64> {
    let base_labels = base_labels.ok_or(Error::MissingLabels("base set has no labels"))?;
    let query_label = query_label.ok_or(Error::MissingLabels("query has no label"))?;
    if k == 0 {
        return Err(Error::InvalidParam("K must be at least 1".into()));
    }
    let mut relevant = 0usize;
    for &id in result_ids.iter().take(k) {
        let label = base_labels
            .get(id as usize)
            .ok_or_else(|| Error::InvalidParam(format!("result id {id} outside base labels")))?;
        relevant += (*label == query_label) as usize;
    }
    Ok(relevant as f64 / k as f64)
}

/// One point of a precision-time curve.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub method: String,
    pub tables: usize,
    pub bits: u32,
    pub pool: usize,
    pub top_k: usize,
    pub mean_precision: f64,
    pub total_locate_ns: u64,
    pub total_scan_ns: u64,
    pub total_ns: u64,
    pub query_count: usize,
}

/// How many queries finished locating at each hamming radius.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RadiusHistogram {
    pub bits: u32,
    pub pool: usize,
    pub counts: BTreeMap<u32, u64>,
}

impl RadiusHistogram {
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub records: Vec<BenchRecord>,
    pub histograms: Vec<RadiusHistogram>,
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub method: String,
    pub top_k: usize,
    pub pools: Vec<usize>,
    /// Worker threads. 1 keeps per-query clocks strictly sequential; more
    /// shards queries and sums per-worker times, which is not comparable to
    /// sequential numbers.
    pub workers: usize,
}

impl SweepConfig {
    pub fn new(method: impl Into<String>, top_k: usize, pools: Vec<usize>) -> Self {
        Self {
            method: method.into(),
            top_k,
            pools,
            workers: 1,
        }
    }
}

/// `K, 2K, 4K, ...` up to and including `n`.
pub fn default_pool_schedule(top_k: usize, n: usize) -> Vec<usize> {
    let mut pools = Vec::new();
    let mut p = top_k.max(1);
    while p < n {
        pools.push(p);
        p *= 2;
    }
    pools.push(n);
    pools
}

struct PassTotals {
    precision_sum: f64,
    locate_ns: u64,
    scan_ns: u64,
    radii: BTreeMap<u32, u64>,
}

fn run_pass(
    index: &MultiTableIndex,
    base: &FeatureSet,
    queries: &FeatureSet,
    query_range: std::ops::Range<usize>,
    codes: &[Vec<BinaryCode>],
    params: SearchParams,
) -> Result<PassTotals> {
    let base_labels = base.labels();
    let query_labels = queries.labels();
    let mut searcher = Searcher::new(index, base)?;

    let warmup = query_range
        .len()
        .div_ceil(100)
        .max(1)
        .min(query_range.len());
    for qi in query_range.clone().take(warmup) {
        searcher.search_codes(&codes[qi], queries.row(qi), params)?;
    }

    let mut totals = PassTotals {
        precision_sum: 0.0,
        locate_ns: 0,
        scan_ns: 0,
        radii: BTreeMap::new(),
    };
    for qi in query_range {
        let res: QueryResult = searcher.search_codes(&codes[qi], queries.row(qi), params)?;
        totals.locate_ns += res.locate_ns;
        totals.scan_ns += res.scan_ns;
        *totals.radii.entry(res.final_radius).or_default() += 1;
        totals.precision_sum += precision_at_k(
            &res.ids,
            base_labels,
            query_labels.map(|l| l[qi]),
            params.top_k(),
        )?;
    }
    Ok(totals)
}

/// Runs every query at every pool size in `config.pools`.
pub fn run_sweep(
    index: &MultiTableIndex,
    base: &FeatureSet,
    queries: &FeatureSet,
    encoder: &QueryEncoder<'_>,
    config: &SweepConfig,
) -> Result<Sweep> {
    if config.pools.is_empty() {
        return Err(Error::EmptyInput("pool schedule"));
    }
    if config.pools.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidParam(
            "pool schedule must be ascending".into(),
        ));
    }
    if base.labels().is_none() {
        return Err(Error::MissingLabels("base set has no labels"));
    }
    if queries.labels().is_none() {
        return Err(Error::MissingLabels("query set has no labels"));
    }
    base.check_dim(queries.dim())?;
    if encoder.table_count() != index.table_count() {
        return Err(Error::TableCountMismatch {
            tables: index.table_count(),
            codes: encoder.table_count(),
        });
    }
    let min_pool = config.pools[0];
    if config.top_k > min_pool {
        return Err(Error::InvalidParam(format!(
            "K = {} exceeds the smallest pool size {min_pool}",
            config.top_k
        )));
    }

    // encoding is outside the timed path entirely
    let codes: Vec<Vec<BinaryCode>> = queries
        .rows()
        .enumerate()
        .map(|(qi, q)| encoder.encode(qi, q))
        .collect::<Result<_>>()?;

    let nq = queries.len();
    let workers = config.workers.clamp(1, nq);
    let mut sweep = Sweep {
        records: Vec::with_capacity(config.pools.len()),
        histograms: Vec::with_capacity(config.pools.len()),
    };
    for &pool in &config.pools {
        let params = SearchParams::new(pool, config.top_k)?;
        let parts: Vec<PassTotals> = if workers == 1 {
            vec![run_pass(index, base, queries, 0..nq, &codes, params)?]
        } else {
            let chunk = nq.div_ceil(workers);
            std::thread::scope(|scope| {
                let handles: Vec<_> = (0..workers)
                    .map(|w| {
                        let range = (w * chunk).min(nq)..((w + 1) * chunk).min(nq);
                        let codes = &codes;
                        scope.spawn(move || run_pass(index, base, queries, range, codes, params))
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("sweep worker panicked"))
                    .collect::<Result<Vec<_>>>()
            })?
        };

        let mut radii: BTreeMap<u32, u64> = BTreeMap::new();
        let (mut precision_sum, mut locate_ns, mut scan_ns) = (0.0, 0u64, 0u64);
        for part in parts {
            precision_sum += part.precision_sum;
            locate_ns += part.locate_ns;
            scan_ns += part.scan_ns;
            for (r, c) in part.radii {
                *radii.entry(r).or_default() += c;
            }
        }
        sweep.records.push(BenchRecord {
            method: config.method.clone(),
            tables: index.table_count(),
            bits: index.code_length(),
            pool,
            top_k: config.top_k,
            mean_precision: precision_sum / nq as f64,
            total_locate_ns: locate_ns,
            total_scan_ns: scan_ns,
            total_ns: locate_ns + scan_ns,
            query_count: nq,
        });
        sweep.histograms.push(RadiusHistogram {
            bits: index.code_length(),
            pool,
            counts: radii,
        });
    }
    Ok(sweep)
}

/// Exact search over every query: the precision ceiling for hashing methods.
pub fn run_brute_force(
    base: &FeatureSet,
    queries: &FeatureSet,
    top_k: usize,
) -> Result<BenchRecord> {
    base.check_dim(queries.dim())?;
    let query_labels = queries
        .labels()
        .ok_or(Error::MissingLabels("query set has no labels"))?;
    let mut precision_sum = 0.0;
    let mut scan_ns = 0u64;
    for (qi, q) in queries.rows().enumerate() {
        let res = brute_force(base, q, top_k)?;
        scan_ns += res.scan_ns;
        precision_sum += precision_at_k(&res.ids, base.labels(), Some(query_labels[qi]), top_k)?;
    }
    Ok(BenchRecord {
        method: "bruteforce".into(),
        tables: 0,
        bits: 0,
        pool: base.len(),
        top_k,
        mean_precision: precision_sum / queries.len() as f64,
        total_locate_ns: 0,
        total_scan_ns: scan_ns,
        total_ns: scan_ns,
        query_count: queries.len(),
    })
}

/// Locating behaviour of one index at a fixed pool size.
#[derive(Debug, Clone, PartialEq)]
pub struct LocateProfile {
    pub bits: u32,
    pub pool: usize,
    pub mean_buckets_visited: f64,
    pub mean_final_radius: f64,
    pub radius_zero_fraction: f64,
    pub mean_locate_ns: f64,
    pub histogram: RadiusHistogram,
}

pub fn locate_profile(
    index: &MultiTableIndex,
    query_codes: &[Vec<BinaryCode>],
    pool: usize,
) -> Result<LocateProfile> {
    if query_codes.is_empty() {
        return Err(Error::EmptyInput("no queries"));
    }
    let mut locator = index.locator();
    let mut visited = 0u64;
    let mut radius_sum = 0u64;
    let mut locate_ns = 0u64;
    let mut counts: BTreeMap<u32, u64> = BTreeMap::new();
    for codes in query_codes {
        let start = Instant::now();
        let res = locator.locate(codes, pool)?;
        locate_ns += start.elapsed().as_nanos() as u64;
        visited += res.buckets_visited;
        radius_sum += u64::from(res.final_radius);
        *counts.entry(res.final_radius).or_default() += 1;
    }
    let nq = query_codes.len() as f64;
    Ok(LocateProfile {
        bits: index.code_length(),
        pool,
        mean_buckets_visited: visited as f64 / nq,
        mean_final_radius: radius_sum as f64 / nq,
        radius_zero_fraction: counts.get(&0).copied().unwrap_or(0) as f64 / nq,
        mean_locate_ns: locate_ns as f64 / nq,
        histogram: RadiusHistogram {
            bits: index.code_length(),
            pool,
            counts,
        },
    })
}

/// One row of the code-length study.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeLengthRow {
    pub profile: LocateProfile,
    /// `ball_size(l, r)` for `r = 0..=4`; `None` where `r > l`.
    pub ball_sizes: [Option<u128>; 5],
}

fn train_linear(
    kind: EncoderKind,
    features: &FeatureSet,
    bits: u32,
    seed: u64,
) -> Result<LinearEncoderModel> {
    match kind {
        EncoderKind::Lsh => train_lsh(features, bits, seed),
        EncoderKind::IsoH => train_isoh(features, bits, seed),
        EncoderKind::Crc => Err(Error::InvalidParam(
            "the code-length study needs a linear encoder".into(),
        )),
    }
}

/// For each code length: train `tables` encoders (seeds `seed..seed + tables`),
/// index `features`, and profile locating `queries` at fixed `pool`.
pub fn code_length_report(
    features: &FeatureSet,
    queries: &FeatureSet,
    kind: EncoderKind,
    lengths: &[u32],
    pool: usize,
    tables: usize,
    seed: u64,
) -> Result<Vec<CodeLengthRow>> {
    if tables == 0 {
        return Err(Error::InvalidParam("at least one table".into()));
    }
    lengths
        .iter()
        .map(|&bits| {
            let models = (0..tables as u64)
                .map(|t| train_linear(kind, features, bits, seed.wrapping_add(t)))
                .collect::<Result<Vec<_>>>()?;
            let sets = models
                .iter()
                .map(|m| m.encode_set(features))
                .collect::<Result<Vec<_>>>()?;
            let index = MultiTableIndex::build(&sets)?;
            let query_codes = queries
                .rows()
                .map(|q| models.iter().map(|m| m.encode(q)).collect())
                .collect::<Result<Vec<_>>>()?;
            let profile = locate_profile(&index, &query_codes, pool)?;
            let ball_sizes = std::array::from_fn(|r| ball_size(bits, r as u32).ok());
            Ok(CodeLengthRow {
                profile,
                ball_sizes,
            })
        })
        .collect()
}

pub fn emit_csv(records: &[BenchRecord]) -> Result<String> {
    if records.is_empty() {
        return Err(Error::EmptyInput("no bench records"));
    }
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{:.6},{},{},{},{}",
            r.method,
            r.tables,
            r.bits,
            r.pool,
            r.top_k,
            r.mean_precision,
            r.total_locate_ns,
            r.total_scan_ns,
            r.total_ns,
            r.query_count
        )
        .expect("writing to a String");
    }
    Ok(out)
}

pub fn emit_histogram_csv(histograms: &[RadiusHistogram]) -> String {
    let mut out = String::from(HISTOGRAM_HEADER);
    out.push('\n');
    for h in histograms {
        for (radius, count) in &h.counts {
            writeln!(out, "{},{},{},{}", h.bits, h.pool, radius, count)
                .expect("writing to a String");
        }
    }
    out
}

pub fn emit_code_length_csv(rows: &[CodeLengthRow]) -> String {
    let mut out = String::from(
        "bits,pool,mean_buckets_visited,mean_final_radius,radius0_fraction,mean_locate_ns,ball_r0,ball_r1,ball_r2,ball_r3,ball_r4\n",
    );
    for row in rows {
        let p = &row.profile;
        write!(
            out,
            "{},{},{:.3},{:.4},{:.6},{:.1}",
            p.bits,
            p.pool,
            p.mean_buckets_visited,
            p.mean_final_radius,
            p.radius_zero_fraction,
            p.mean_locate_ns
        )
        .expect("writing to a String");
        for b in &row.ball_sizes {
            match b {
                Some(v) => write!(out, ",{v}"),
                None => out.write_str(","),
            }
            .expect("writing to a String");
        }
        out.push('\n');
    }
    out
}

/// Writes `sweep.csv` (with the timing note as a leading `#` line) and `radius.csv` into `dir`.
pub fn write_sweep(dir: &Path, sweep: &Sweep) -> Result<()> {
    fs::create_dir_all(dir)?;
    let csv = emit_csv(&sweep.records)?;
    fs::write(dir.join("sweep.csv"), format!("{TIMING_NOTE}\n{csv}"))?;
    fs::write(
        dir.join("radius.csv"),
        emit_histogram_csv(&sweep.histograms),
    )?;
    Ok(())
}
