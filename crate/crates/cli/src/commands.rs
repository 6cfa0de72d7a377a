use std::fmt::{Debug, Write as _};
use std::fs;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use hashlane::bench::{
    code_length_report, default_pool_schedule, emit_code_length_csv, emit_csv, run_brute_force,
    run_sweep, write_sweep, SweepConfig,
};
use hashlane::encoders::{
    read_model, train_crc, train_isoh, train_lsh, write_model, EncoderKind, EncoderModel,
};
use hashlane::format::{
    load, read_codes, read_features, read_labels_file, save, write_codes, write_features,
    write_labels_file,
};
use hashlane::index::{read_index, write_index, MultiTableIndex};
use hashlane::search::QueryEncoder;
use hashlane::synth::{
    gaussian_clusters, gaussian_clusters_with_queries, stub_predictions, ClusterSpec,
};
use hashlane::{CodeSet, FeatureSet};

use crate::{
    BenchArgs, BuildArgs, EncodeArgs, Failure, GenArgs, OracleArgs, Output, StatsArgs, TrainArgs,
};

const DEFAULT_ROOT: &str = "hashlane-out";

/// `<root>/<command>-<first 16 hex digits of sha256(flags)>`, created if missing.
fn run_dir<A: Debug>(command: &str, args: &A, output: &Output) -> Result<PathBuf, Failure> {
    let root = match &output.out {
        Some(p) => p.clone(),
        None => std::env::var_os("HASHLANE_OUT")
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from(DEFAULT_ROOT)),
    };
    let digest = Sha256::digest(format!("{command}\n{args:?}").as_bytes());
    let dir = root.join(format!("{command}-{}", &hex::encode(digest)[..16]));
    fs::create_dir_all(&dir).map_err(|e| Failure::new("io", e.to_string()).at(dir.display()))?;
    Ok(dir)
}

/// Writes through a temporary sibling and renames, so a file that exists is complete.
fn save_file<F>(path: &Path, write: F) -> Result<(), Failure>
where
    F: FnOnce(&mut BufWriter<fs::File>) -> hashlane::Result<()>,
{
    let tmp = path.with_extension("partial");
    save(&tmp, write).map_err(|e| Failure::from(e).at(path.display()))?;
    fs::rename(&tmp, path).map_err(|e| Failure::new("io", e.to_string()).at(path.display()))
}

fn save_text(path: &Path, text: &str) -> Result<(), Failure> {
    save_file(path, |w| Ok(std::io::Write::write_all(w, text.as_bytes())?))
}

fn open<T>(
    path: &Path,
    read: impl FnOnce(&mut BufReader<fs::File>) -> hashlane::Result<T>,
) -> Result<T, Failure> {
    load(path, read).map_err(|e| Failure::from(e).at(path.display()))
}

/// `path` itself, or the `*.ext` files inside it in name order.
fn expand(path: &Path, ext: &str) -> Result<Vec<PathBuf>, Failure> {
    if !path.is_dir() {
        return Ok(vec![path.to_path_buf()]);
    }
    let entries =
        fs::read_dir(path).map_err(|e| Failure::new("io", e.to_string()).at(path.display()))?;
    let mut files = Vec::new();
    for entry in entries {
        let p = entry
            .map_err(|e| Failure::new("io", e.to_string()).at(path.display()))?
            .path();
        if p.extension().is_some_and(|x| x == ext) {
            files.push(p);
        }
    }
    files.sort();
    if files.is_empty() {
        return Err(Failure::new("empty_input", format!("no *.{ext} files")).at(path.display()));
    }
    Ok(files)
}

fn load_models(path: &Path) -> Result<Vec<EncoderModel>, Failure> {
    expand(path, "hmdl")?
        .iter()
        .map(|p| open(p, read_model))
        .collect()
}

fn labels_of<'a>(features: &'a FeatureSet, path: &Path) -> Result<&'a [u32], Failure> {
    features.labels().ok_or_else(|| {
        Failure::from(hashlane::Error::MissingLabels("feature file has no labels"))
            .at(path.display())
    })
}

pub fn gen(name: &str, a: GenArgs) -> Result<PathBuf, Failure> {
    let spec = ClusterSpec {
        clusters: a.clusters,
        per_cluster: a.per_cluster,
        dim: a.dim,
        spread: a.spread,
    };
    if a.accuracy.is_some() && a.queries_per_cluster == 0 {
        return Err(Failure::new(
            "usage",
            "--accuracy needs --queries-per-cluster > 0",
        ));
    }
    let (base, queries) = if a.queries_per_cluster > 0 {
        let (b, q) = gaussian_clusters_with_queries(&spec, a.queries_per_cluster, a.seed)?;
        (b, Some(q))
    } else {
        (gaussian_clusters(&spec, a.seed)?, None)
    };
    let predictions = match (&queries, a.accuracy) {
        (Some(q), Some(acc)) => Some(stub_predictions(
            q.labels().expect("generated queries are labelled"),
            a.clusters as u32,
            acc,
            a.seed,
        )?),
        _ => None,
    };

    let dir = run_dir(name, &a, &a.output)?;
    save_file(&dir.join("base.fset"), |w| write_features(w, &base))?;
    if let Some(q) = &queries {
        save_file(&dir.join("queries.fset"), |w| write_features(w, q))?;
    }
    if let Some(p) = &predictions {
        save_file(&dir.join("predictions.fset"), |w| write_labels_file(w, p))?;
    }
    Ok(dir)
}

pub fn train(name: &str, a: TrainArgs) -> Result<PathBuf, Failure> {
    if a.tables == 0 {
        return Err(Failure::new("usage", "--tables must be at least 1"));
    }
    let features = a
        .features
        .as_deref()
        .map(|p| open(p, read_features))
        .transpose()?;
    let models: Vec<EncoderModel> = match a.method {
        EncoderKind::Crc => {
            if a.tables != 1 {
                return Err(Failure::new("invalid_param", "crc uses exactly one table"));
            }
            let classes = match (a.classes, &features, &a.features) {
                (Some(c), _, _) => c,
                (None, Some(f), Some(path)) => {
                    labels_of(f, path)?.iter().max().map_or(0, |&m| m + 1)
                }
                _ => {
                    return Err(Failure::new(
                        "usage",
                        "crc needs --classes or labelled --features",
                    ))
                }
            };
            vec![train_crc(classes, a.bits, a.seed)?.into()]
        }
        kind => {
            let features = features
                .as_ref()
                .ok_or_else(|| Failure::new("usage", format!("{kind} needs --features")))?;
            (0..a.tables)
                .map(|t| {
                    let seed = a.seed.wrapping_add(t);
                    let model = match kind {
                        EncoderKind::Lsh => train_lsh(features, a.bits, seed),
                        _ => train_isoh(features, a.bits, seed),
                    };
                    model.map(EncoderModel::from).map_err(Failure::from)
                })
                .collect::<Result<_, _>>()?
        }
    };

    let dir = run_dir(name, &a, &a.output)?;
    for (t, model) in models.iter().enumerate() {
        save_file(&dir.join(format!("model_{t:03}.hmdl")), |w| {
            write_model(w, model)
        })?;
    }
    Ok(dir)
}

pub fn encode(name: &str, a: EncodeArgs) -> Result<PathBuf, Failure> {
    let models = load_models(&a.models)?;
    let features = a
        .features
        .as_deref()
        .map(|p| open(p, read_features))
        .transpose()?;
    let predictions = a
        .predictions
        .as_deref()
        .map(|p| open(p, read_labels_file))
        .transpose()?;

    let mut sets = Vec::with_capacity(models.len());
    for model in &models {
        let set = match model {
            EncoderModel::Crc(crc) => {
                let labels = match (&predictions, &features, &a.features) {
                    (Some(p), _, _) => p.as_slice(),
                    (None, Some(f), Some(path)) => labels_of(f, path)?,
                    _ => {
                        return Err(Failure::new(
                            "usage",
                            "crc needs --predictions or labelled --features",
                        ))
                    }
                };
                crc.encode_labels(labels)?
            }
            EncoderModel::Linear(m) => {
                if predictions.is_some() {
                    return Err(Failure::new(
                        "usage",
                        "--predictions applies to crc models only",
                    ));
                }
                let f = features
                    .as_ref()
                    .ok_or_else(|| Failure::new("usage", "linear models need --features"))?;
                m.encode_set(f)?
            }
        };
        sets.push(set);
    }

    let dir = run_dir(name, &a, &a.output)?;
    for (t, set) in sets.iter().enumerate() {
        save_file(&dir.join(format!("codes_{t:03}.cset")), |w| {
            write_codes(w, set)
        })?;
    }
    Ok(dir)
}

pub fn build(name: &str, a: BuildArgs) -> Result<PathBuf, Failure> {
    let sets: Vec<CodeSet> = expand(&a.codes, "cset")?
        .iter()
        .map(|p| open(p, read_codes))
        .collect::<Result<_, _>>()?;
    let index = MultiTableIndex::build(&sets)?;
    let dir = run_dir(name, &a, &a.output)?;
    save_file(&dir.join("index.hidx"), |w| write_index(w, &index))?;
    Ok(dir)
}

pub fn bench(name: &str, a: BenchArgs) -> Result<PathBuf, Failure> {
    let index = open(&a.index, read_index)?;
    let base = open(&a.features, read_features)?;
    let queries = open(&a.queries, read_features)?;
    let models = load_models(&a.models)?;
    let predictions = a
        .predictions
        .as_deref()
        .map(|p| open(p, read_labels_file))
        .transpose()?;
    labels_of(&base, &a.features)?;
    labels_of(&queries, &a.queries)?;

    let linear: Vec<_> = models
        .iter()
        .filter_map(|m| m.as_linear().cloned())
        .collect();
    let encoder = match (models.as_slice(), &predictions) {
        ([EncoderModel::Crc(crc)], Some(p)) => {
            if p.len() != queries.len() {
                return Err(Failure::new(
                    "count_mismatch",
                    format!("{} predictions for {} queries", p.len(), queries.len()),
                ));
            }
            QueryEncoder::Crc {
                model: crc,
                predicted: p,
            }
        }
        ([EncoderModel::Crc(_)], None) => {
            return Err(Failure::new(
                "missing_labels",
                "crc queries need --predictions",
            ))
        }
        _ if linear.len() == models.len() => {
            if predictions.is_some() {
                return Err(Failure::new(
                    "usage",
                    "--predictions applies to crc models only",
                ));
            }
            QueryEncoder::Linear(&linear)
        }
        _ => {
            return Err(Failure::new(
                "invalid_param",
                "crc models cannot be mixed or multi-table",
            ))
        }
    };

    let pools = match &a.pools {
        Some(p) => p.0.clone(),
        None => default_pool_schedule(a.k, base.len()),
    };
    let mut config = SweepConfig::new(models[0].kind().as_str(), a.k, pools);
    config.workers = a.parallel as usize;
    let mut sweep = run_sweep(&index, &base, &queries, &encoder, &config)?;
    if a.brute_force {
        sweep.records.push(run_brute_force(&base, &queries, a.k)?);
    }

    let dir = run_dir(name, &a, &a.output)?;
    write_sweep(&dir, &sweep).map_err(|e| Failure::from(e).at(dir.display()))?;
    Ok(dir)
}

pub fn oracle(name: &str, a: OracleArgs) -> Result<PathBuf, Failure> {
    let base = open(&a.features, read_features)?;
    let queries = open(&a.queries, read_features)?;
    labels_of(&base, &a.features)?;
    labels_of(&queries, &a.queries)?;
    let record = run_brute_force(&base, &queries, a.k)?;
    let dir = run_dir(name, &a, &a.output)?;
    save_text(&dir.join("oracle.csv"), &emit_csv(&[record])?)?;
    Ok(dir)
}

pub fn stats(name: &str, a: StatsArgs) -> Result<PathBuf, Failure> {
    if a.index.is_none() && a.lengths.is_none() {
        return Err(Failure::new(
            "usage",
            "stats needs --index and/or --lengths",
        ));
    }
    let buckets = match &a.index {
        Some(path) => Some(bucket_csv(&open(path, read_index)?)),
        None => None,
    };
    let lengths = match &a.lengths {
        Some(lengths) => {
            let (Some(fp), Some(qp)) = (&a.features, &a.queries) else {
                return Err(Failure::new(
                    "usage",
                    "--lengths needs --features and --queries",
                ));
            };
            let features = open(fp, read_features)?;
            let queries = open(qp, read_features)?;
            let bits = lengths
                .0
                .iter()
                .map(|&l| {
                    u32::try_from(l)
                        .map_err(|_| Failure::new("invalid_code_length", format!("{l}")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let rows = code_length_report(
                &features, &queries, a.method, &bits, a.pool, a.tables, a.seed,
            )?;
            Some(emit_code_length_csv(&rows))
        }
        None => None,
    };

    let dir = run_dir(name, &a, &a.output)?;
    if let Some(csv) = buckets {
        save_text(&dir.join("buckets.csv"), &csv)?;
    }
    if let Some(csv) = lengths {
        save_text(&dir.join("code_length.csv"), &csv)?;
    }
    Ok(dir)
}

fn bucket_csv(index: &MultiTableIndex) -> String {
    let radii = index.code_length().min(10);
    let mut out = String::from("table,bits,items,non_empty,max_size,mean_size");
    for r in 0..=radii {
        write!(out, ",ball_r{r}").unwrap();
    }
    out.push('\n');
    for (t, table) in index.tables().iter().enumerate() {
        let s = table.stats();
        write!(
            out,
            "{t},{},{},{},{},{:.4}",
            s.code_length, s.items, s.non_empty, s.max_size, s.mean_size
        )
        .unwrap();
        for b in &s.cumulative_buckets {
            write!(out, ",{b}").unwrap();
        }
        out.push('\n');
    }
    out
}
