//! End-to-end acceptance checks. Runs as a plain binary (no libtest harness)
//! so the timing-sensitive sweeps execute sequentially on an otherwise idle
//! process. Prints one PASS/FAIL line per check; exits nonzero on failure.

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use hashlane::bench::{code_length_report, run_brute_force, run_sweep, BenchRecord, SweepConfig};
use hashlane::encoders::{
    read_model, train_crc, train_isoh, train_lsh, write_model, EncoderKind, EncoderModel,
    LinearEncoderModel,
};
use hashlane::format::{read_codes, read_features, write_codes, write_features};
use hashlane::index::{read_index, write_index, MultiTableIndex};
use hashlane::search::{brute_force, QueryEncoder, SearchParams, Searcher};
use hashlane::synth::{gaussian_clusters_with_queries, stub_predictions, ClusterSpec};
use hashlane::{ball_size, BinaryCode, CodeSet, FeatureSet};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let holds: bool = $cond;
        if !holds {
            return Err(format!($($msg)+));
        }
    };
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

// ---------------------------------------------------------------------------
// 1. exhaustive pool == brute force
// ---------------------------------------------------------------------------

/// Full sort of `(distance, id)` with distances summed left to right in f64.
fn oracle_knn(base: &FeatureSet, query: &[f32], k: usize) -> Vec<u32> {
    let mut all: Vec<(f64, u32)> = base
        .rows()
        .enumerate()
        .map(|(i, row)| {
            let mut acc = 0.0f64;
            for (a, b) in row.iter().zip(query) {
                let d = f64::from(*a) - f64::from(*b);
                acc += d * d;
            }
            (acc, i as u32)
        })
        .collect();
    all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    all.truncate(k);
    all.into_iter().map(|(_, i)| i).collect()
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce_0001);
    let mut queries_checked = 0usize;
    for instance in 0..20u64 {
        let n = rng.random_range(100..=5000usize);
        let d = rng.random_range(1..=64usize);
        // a coarse integer grid forces exact distance ties and duplicate rows
        let levels = rng.random_range(2..=5i32);
        let values: Vec<f32> = (0..n * d)
            .map(|_| rng.random_range(0..levels) as f32)
            .collect();
        let base = ok(FeatureSet::new(d, values, None))?;
        let tables = rng.random_range(1..=4u64);
        let bits = rng.random_range(1..=24u32);
        let models: Vec<LinearEncoderModel> = ok((0..tables)
            .map(|t| train_lsh(&base, bits, instance * 16 + t))
            .collect())?;
        let sets: Vec<CodeSet> = ok(models.iter().map(|m| m.encode_set(&base)).collect())?;
        let index = ok(MultiTableIndex::build(&sets))?;
        let mut searcher = ok(Searcher::new(&index, &base))?;
        let encoder = QueryEncoder::Linear(&models);

        for &k in &[1usize, 10, 100] {
            let params = ok(SearchParams::new(n, k))?;
            for q in 0..5 {
                // half the queries are base rows (guaranteed ties with duplicates)
                let query: Vec<f32> = if q % 2 == 0 {
                    base.row(rng.random_range(0..n)).to_vec()
                } else {
                    (0..d)
                        .map(|_| rng.random_range(0..levels) as f32 + 0.5)
                        .collect()
                };
                let got = ok(searcher.search(&encoder, 0, &query, params))?;
                let want = oracle_knn(&base, &query, k);
                ensure!(
                    got.ids == want,
                    "instance {instance} (n={n}, d={d}, K={k}): ids differ from oracle"
                );
                let bf = ok(brute_force(&base, &query, k))?;
                ensure!(
                    bf.ids == want,
                    "instance {instance}: library brute force differs from oracle"
                );
                queries_checked += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure!(secs < 10.0, "took {secs:.2}s, limit 10s");
    Ok(format!(
        "20 instances, {queries_checked} queries id-identical, {secs:.2}s"
    ))
}

// ---------------------------------------------------------------------------
// 2. ball size
// ---------------------------------------------------------------------------

fn ball_size_formula() -> Outcome {
    let mut row: Vec<u128> = vec![1];
    let mut checked = 0usize;
    for l in 0..=32u32 {
        if l > 0 {
            let mut next = vec![1u128; l as usize + 1];
            for i in 1..l as usize {
                next[i] = row[i - 1] + row[i];
            }
            row = next;
        }
        if l == 0 {
            continue;
        }
        let mut cumulative = 0u128;
        for r in 0..=l {
            cumulative += row[r as usize];
            let got = ok(ball_size(l, r))?;
            ensure!(
                got == cumulative,
                "ball_size({l}, {r}) = {got}, Pascal gives {cumulative}"
            );
            checked += 1;
        }
        if l <= 20 {
            let full = ok(ball_size(l, l))?;
            ensure!(full == 1u128 << l, "ball_size({l}, {l}) = {full} != 2^{l}");
        }
    }
    Ok(format!(
        "{checked} (l, r) pairs match Pascal's triangle; full ball = 2^l for l <= 20"
    ))
}

// ---------------------------------------------------------------------------
// 3. IsoH isotropy
// ---------------------------------------------------------------------------

fn isoh_isotropy() -> Outcome {
    let (n, d) = (2000usize, 32usize);
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce_0003);
    // anisotropic gaussian: independent latent scales mixed by a dense random matrix
    let scales: Vec<f64> = (0..d)
        .map(|j| 3.0 * 0.85f64.powi(j as i32) + 0.05)
        .collect();
    let mix: Vec<f64> = (0..d * d)
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    let mut values = Vec::with_capacity(n * d);
    for _ in 0..n {
        let z: Vec<f64> = scales
            .iter()
            .map(|s| {
                let g: f64 = StandardNormal.sample(&mut rng);
                s * g
            })
            .collect();
        for r in 0..d {
            let v: f64 = (0..d).map(|c| mix[r * d + c] * z[c]).sum();
            values.push(v as f32);
        }
    }
    let data = ok(FeatureSet::new(d, values, None))?;

    let mut worst = 0.0f64;
    for bits in [8u32, 16] {
        let model = ok(train_isoh(&data, bits, 11))?;
        let mean: Vec<f64> = (0..d)
            .map(|c| data.rows().map(|r| f64::from(r[c])).sum::<f64>() / n as f64)
            .collect();
        let mut variances = Vec::with_capacity(bits as usize);
        for j in 0..bits as usize {
            let w = model.projection_column(j);
            let proj: Vec<f64> = data
                .rows()
                .map(|r| {
                    r.iter()
                        .zip(&mean)
                        .zip(w)
                        .map(|((x, m), w)| (f64::from(*x) - m) * w)
                        .sum()
                })
                .collect();
            let pm = proj.iter().sum::<f64>() / n as f64;
            variances.push(proj.iter().map(|p| (p - pm) * (p - pm)).sum::<f64>() / (n - 1) as f64);
        }
        let avg = variances.iter().sum::<f64>() / variances.len() as f64;
        ensure!(avg > 0.0, "l={bits}: zero projected variance");
        for (j, v) in variances.iter().enumerate() {
            let rel = (v - avg).abs() / avg;
            worst = worst.max(rel);
            ensure!(
                rel <= 1e-6,
                "l={bits}: dimension {j} variance {v} vs mean {avg} (rel {rel:.3e})"
            );
        }
    }
    Ok(format!(
        "l in {{8, 16}}: worst relative deviation {worst:.2e} (limit 1e-6)"
    ))
}

// ---------------------------------------------------------------------------
// 4. CRC precision equals classifier accuracy
// ---------------------------------------------------------------------------

fn crc_identity() -> Outcome {
    let spec = ClusterSpec {
        clusters: 12,
        per_cluster: 60,
        dim: 16,
        spread: 0.5,
    };
    let (base, queries) = ok(gaussian_clusters_with_queries(&spec, 25, 0xacce_0004))?;
    let classes = spec.clusters as u32;
    let model = ok(train_crc(classes, 16, 4))?;
    let codes = ok(model.encode_labels(base.labels().unwrap()))?;
    let index = ok(MultiTableIndex::build(&[codes]))?;
    let buckets = index.tables()[0].non_empty_buckets();
    ensure!(
        buckets == classes as usize,
        "{buckets} non-empty buckets, expected {classes}"
    );

    let nq = queries.len();
    let truth = queries.labels().unwrap();
    let mut parts = Vec::new();
    for alpha in [0.5, 0.8, 1.0] {
        let predicted = ok(stub_predictions(truth, classes, alpha, 9))?;
        let realized =
            predicted.iter().zip(truth).filter(|(p, t)| p == t).count() as f64 / nq as f64;
        let encoder = QueryEncoder::Crc {
            model: &model,
            predicted: &predicted,
        };
        let config = SweepConfig::new("crc", 10, vec![spec.per_cluster]);
        let sweep = ok(run_sweep(&index, &base, &queries, &encoder, &config))?;
        let precision = sweep.records[0].mean_precision;
        let tol = 1.0 / nq as f64;
        ensure!(
            (precision - alpha).abs() <= tol,
            "alpha {alpha}: precision {precision:.6} outside +-{tol:.4}"
        );
        ensure!(
            (precision - realized).abs() < 1e-12,
            "alpha {alpha}: precision {precision} != realized accuracy {realized}"
        );
        parts.push(format!("{alpha} -> {precision:.4}"));
    }
    Ok(format!(
        "{} (n_q = {nq}); {classes} non-empty buckets",
        parts.join(", ")
    ))
}

// ---------------------------------------------------------------------------
// 5 & 6. multi-table gain and code-length growth on overlapping clusters
// ---------------------------------------------------------------------------

const LARGE: ClusterSpec = ClusterSpec {
    clusters: 10,
    per_cluster: 5000,
    dim: 32,
    spread: 0.5,
};

fn large_data() -> Result<(FeatureSet, FeatureSet), String> {
    ok(gaussian_clusters_with_queries(&LARGE, 30, 0xacce_0005))
}

fn lsh_sweep(
    base: &FeatureSet,
    queries: &FeatureSet,
    tables: u64,
    pools: &[usize],
) -> Result<Vec<BenchRecord>, String> {
    let models: Vec<LinearEncoderModel> =
        ok((0..tables).map(|t| train_lsh(base, 24, 100 + t)).collect())?;
    let sets: Vec<CodeSet> = ok(models.iter().map(|m| m.encode_set(base)).collect())?;
    let index = ok(MultiTableIndex::build(&sets))?;
    let config = SweepConfig::new("lsh", 10, pools.to_vec());
    Ok(ok(run_sweep(
        &index,
        base,
        queries,
        &QueryEncoder::Linear(&models),
        &config,
    ))?
    .records)
}

/// Piecewise-linear precision as a function of total time; `points` sorted by time.
fn interpolate(points: &[(f64, f64)], t: f64) -> f64 {
    let i = points.partition_point(|p| p.0 < t);
    if i == 0 {
        return points[0].1;
    }
    if i == points.len() {
        return points[points.len() - 1].1;
    }
    let (t0, p0) = points[i - 1];
    let (t1, p1) = points[i];
    if t1 == t0 {
        return p1;
    }
    p0 + (p1 - p0) * (t - t0) / (t1 - t0)
}

fn curve(records: &[BenchRecord]) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = records
        .iter()
        .map(|r| (r.total_ns as f64, r.mean_precision))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts
}

fn multi_table_gain(base: &FeatureSet, queries: &FeatureSet) -> Outcome {
    let start = Instant::now();
    let pools = [10usize, 20, 40, 80, 160, 320, 640];
    let single = curve(&lsh_sweep(base, queries, 1, &pools)?);
    let multi = curve(&lsh_sweep(base, queries, 16, &pools)?);

    let lo = single[0].0.max(multi[0].0);
    let hi = single[single.len() - 1].0.min(multi[multi.len() - 1].0);
    ensure!(lo <= hi, "time ranges of the two curves do not overlap");
    let mut budgets: Vec<f64> = single
        .iter()
        .chain(&multi)
        .map(|p| p.0)
        .filter(|&t| t >= lo && t <= hi)
        .collect();
    budgets.sort_by(f64::total_cmp);
    budgets.dedup();

    let mut best_gain = f64::NEG_INFINITY;
    for &t in &budgets {
        let p1 = interpolate(&single, t);
        let p16 = interpolate(&multi, t);
        ensure!(
            p16 >= p1,
            "at {:.1} ms: T=16 precision {p16:.4} < T=1 precision {p1:.4}",
            t / 1e6
        );
        best_gain = best_gain.max(p16 - p1);
    }
    ensure!(
        best_gain > 0.02,
        "largest gain {best_gain:.4} does not exceed 0.02"
    );
    let secs = start.elapsed().as_secs_f64();
    ensure!(secs < 300.0, "took {secs:.1}s, limit 300s");
    Ok(format!(
        "{} matched budgets, T=16 never below T=1, max gain {best_gain:.4}, {secs:.1}s",
        budgets.len()
    ))
}

fn code_length_growth(base: &FeatureSet, queries: &FeatureSet) -> Outcome {
    let start = Instant::now();
    let rows = ok(code_length_report(
        base,
        queries,
        EncoderKind::Lsh,
        &[16, 24, 32],
        100,
        1,
        7,
    ))?;
    let visited: Vec<f64> = rows
        .iter()
        .map(|r| r.profile.mean_buckets_visited)
        .collect();
    let zero: Vec<f64> = rows
        .iter()
        .map(|r| r.profile.radius_zero_fraction)
        .collect();
    ensure!(
        visited.windows(2).all(|w| w[0] <= w[1]),
        "mean buckets visited not non-decreasing: {visited:?}"
    );
    ensure!(
        zero.windows(2).all(|w| w[0] >= w[1]),
        "radius-0 fraction not non-increasing: {zero:?}"
    );
    let secs = start.elapsed().as_secs_f64();
    ensure!(secs < 300.0, "took {secs:.1}s, limit 300s");
    Ok(format!(
        "buckets visited {:.0}/{:.0}/{:.0}, radius-0 fraction {:.3}/{:.3}/{:.3} for l = 16/24/32, {secs:.1}s",
        visited[0], visited[1], visited[2], zero[0], zero[1], zero[2]
    ))
}

// ---------------------------------------------------------------------------
// 7. precision monotone in P, capped by brute force
// ---------------------------------------------------------------------------

fn monotone_and_capped() -> Outcome {
    // class-separable clusters: every same-class point is nearer than any other
    let spec = ClusterSpec {
        clusters: 10,
        per_cluster: 400,
        dim: 32,
        spread: 0.1,
    };
    let (base, queries) = ok(gaussian_clusters_with_queries(&spec, 10, 0xacce_0007))?;
    let k = 10;
    let ceiling = ok(run_brute_force(&base, &queries, k))?.mean_precision;
    let pools = hashlane::bench::default_pool_schedule(k, base.len());

    let mut checked = 0usize;
    let mut check = |records: &[BenchRecord], capped: bool| -> Result<(), String> {
        for w in records.windows(2) {
            ensure!(
                w[0].mean_precision <= w[1].mean_precision,
                "{} T={}: precision drops from {} (P={}) to {} (P={})",
                w[0].method,
                w[0].tables,
                w[0].mean_precision,
                w[0].pool,
                w[1].mean_precision,
                w[1].pool
            );
        }
        for r in records {
            if capped {
                ensure!(
                    r.mean_precision <= ceiling + 1e-9,
                    "{} T={} P={}: precision {} above brute force {ceiling}",
                    r.method,
                    r.tables,
                    r.pool,
                    r.mean_precision
                );
            }
            checked += 1;
        }
        Ok(())
    };

    for kind in [EncoderKind::Lsh, EncoderKind::IsoH] {
        for tables in [1u64, 4] {
            let models: Vec<LinearEncoderModel> = ok((0..tables)
                .map(|t| match kind {
                    EncoderKind::Lsh => train_lsh(&base, 16, t),
                    _ => train_isoh(&base, 16, t),
                })
                .collect())?;
            let sets: Vec<CodeSet> = ok(models.iter().map(|m| m.encode_set(&base)).collect())?;
            let index = ok(MultiTableIndex::build(&sets))?;
            let config = SweepConfig::new(kind.as_str(), k, pools.clone());
            let sweep = ok(run_sweep(
                &index,
                &base,
                &queries,
                &QueryEncoder::Linear(&models),
                &config,
            ))?;
            check(&sweep.records, true)?;
        }
    }

    let classes = spec.clusters as u32;
    let crc = ok(train_crc(classes, 16, 3))?;
    let index = ok(MultiTableIndex::build(&[ok(
        crc.encode_labels(base.labels().unwrap())
    )?]))?;
    let predicted = ok(stub_predictions(queries.labels().unwrap(), classes, 0.8, 5))?;
    let encoder = QueryEncoder::Crc {
        model: &crc,
        predicted: &predicted,
    };
    let sweep = ok(run_sweep(
        &index,
        &base,
        &queries,
        &encoder,
        &SweepConfig::new("crc", k, pools.clone()),
    ))?;
    check(&sweep.records, false)?;

    Ok(format!(
        "{checked} records over lsh/isoh (T = 1, 4) and crc, P in {:?}; ceiling {ceiling:.4}",
        pools
    ))
}

// ---------------------------------------------------------------------------
// 8. file round-trips
// ---------------------------------------------------------------------------

fn byte_stable<T>(
    value: &T,
    write: impl Fn(&mut Vec<u8>, &T) -> hashlane::Result<()>,
    read: impl Fn(&mut &[u8]) -> hashlane::Result<T>,
) -> Result<(), String> {
    let mut first = Vec::new();
    ok(write(&mut first, value))?;
    let back = ok(read(&mut first.as_slice()))?;
    let mut second = Vec::new();
    ok(write(&mut second, &back))?;
    ensure!(
        first == second,
        "write -> read -> write changed {} bytes",
        first.len()
    );
    Ok(())
}

fn format_round_trips() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce_0008);
    let rounds = 50;
    for _ in 0..rounds {
        let n = rng.random_range(2..300usize);
        let d = rng.random_range(1..40usize);
        let values: Vec<f32> = (0..n * d)
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        let labels: Option<Vec<u32>> = rng
            .random_bool(0.5)
            .then(|| (0..n).map(|_| rng.random_range(0..20)).collect());
        let features = ok(FeatureSet::new(d, values, labels))?;
        byte_stable(&features, write_features, |r| read_features(r))?;

        let bits = rng.random_range(1..=64u32);
        let words: Vec<u64> = (0..n).map(|_| rng.random()).collect();
        let codes = ok(CodeSet::from_words(bits, &words))?;
        byte_stable(&codes, write_codes, |r| read_codes(r))?;

        let seed = rng.random();
        let model: EncoderModel = match rng.random_range(0..3) {
            0 => ok(train_lsh(&features, bits, seed))?.into(),
            1 if n > d && bits as usize <= d => ok(train_isoh(&features, bits, seed))?.into(),
            _ => {
                let classes = rng.random_range(1..=n.min(200)) as u32;
                let classes = if bits < 8 {
                    classes.min(1 << bits)
                } else {
                    classes
                };
                ok(train_crc(classes, bits, seed))?.into()
            }
        };
        byte_stable(&model, write_model, |r| read_model(r))?;

        let tables = rng.random_range(1..=4);
        let sets: Vec<CodeSet> = ok((0..tables)
            .map(|_| {
                let spread = rng.random_range(1..=n as u64);
                let words: Vec<u64> = (0..n).map(|_| rng.random_range(0..spread)).collect();
                CodeSet::from_words(bits, &words)
            })
            .collect())?;
        let index = ok(MultiTableIndex::build(&sets))?;
        byte_stable(&index, write_index, |r| read_index(r))?;

        let code = codes.codes()[0];
        ensure!(
            ok(BinaryCode::from_bytes(&code.to_bytes(), bits))? == code,
            "code byte conversion not lossless"
        );
    }
    Ok(format!(
        "{rounds} randomized instances per format (FSET1, CSET1, HMDL1, HIDX1) byte-identical"
    ))
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |id: u32, name: &str, outcome: Outcome| match outcome {
        Ok(detail) => println!("PASS [{id}] {name}: {detail}"),
        Err(why) => {
            failed += 1;
            println!("FAIL [{id}] {name}: {why}");
        }
    };

    report(1, "oracle equivalence", oracle_equivalence());
    report(2, "ball-count formula", ball_size_formula());
    report(3, "isotropic variances", isoh_isotropy());
    report(4, "classification coding identity", crc_identity());
    match large_data() {
        Ok((base, queries)) => {
            report(5, "multi-table gain", multi_table_gain(&base, &queries));
            report(
                6,
                "code-length locating growth",
                code_length_growth(&base, &queries),
            );
        }
        Err(e) => {
            report(5, "multi-table gain", Err(e.clone()));
            report(6, "code-length locating growth", Err(e));
        }
    }
    report(
        7,
        "precision monotonicity and ceiling",
        monotone_and_capped(),
    );
    report(8, "format round-trips", format_round_trips());

    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} checks failed");
        ExitCode::FAILURE
    }
}
