//! Benchmark orchestration: corrupt, filter, measure, and rank.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize, Serializer};

use crate::color_math::AcosMode;
use crate::error::{Error, Result};
use crate::image::{filter_image_sequential, Image};
use crate::io::{is_supported, read_image};
use crate::metrics::{evaluate, time_filter};
use crate::noise::{corrupt, derive_seed, NoiseConfig, NoiseModel};
use crate::registry::{self, build, FilterSpec, IDENTITY};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchConfig {
    pub images: Vec<PathBuf>,
    pub filters: Vec<String>,
    pub models: Vec<NoiseModel>,
    pub levels: Vec<f64>,
    pub seed: u64,
    pub window: usize,
    pub p: f64,
    #[serde(serialize_with = "acos_name")]
    pub acos: AcosMode,
    /// Run filters one at a time on this thread and record wall time.
    pub timed: bool,
    /// Also emit rows for the unfiltered noisy image (filter `none`).
    pub baseline: bool,
}

fn acos_name<S: Serializer>(m: &AcosMode, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(match m {
        AcosMode::Approximate => "approx",
        AcosMode::Reference => "ref",
    })
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            images: Vec::new(),
            filters: registry::names().map(String::from).collect(),
            models: vec![NoiseModel::Uncorrelated, NoiseModel::Correlated],
            levels: vec![0.05, 0.10, 0.15],
            seed: 0,
            window: 3,
            p: 2.0,
            acos: AcosMode::Approximate,
            timed: false,
            baseline: false,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::BenchConfig(m.to_string()));
        if self.images.is_empty() {
            return bad("no images given");
        }
        if self.filters.is_empty() {
            return bad("no filters given");
        }
        if self.models.is_empty() {
            return bad("no noise models given");
        }
        if self.levels.is_empty() {
            return bad("no noise levels given");
        }
        if let Some(l) = self.levels.iter().find(|&&l| !(l > 0.0 && l < 1.0)) {
            return Err(Error::BenchConfig(format!("noise level {l} outside (0, 1)")));
        }
        if let Some(f) = self.filters.iter().find(|f| !registry::is_known(f)) {
            return Err(Error::UnknownFilter(f.clone()));
        }
        Ok(())
    }

    fn spec(&self, name: &str) -> FilterSpec {
        FilterSpec::new(name).with_p(self.p).with_acos(self.acos)
    }
}

fn three_decimals<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{v:.3}"))
}

/// One CSV row: `image,filter,model,level,seed,mae,mse,ncd,time_ms`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub image: String,
    pub filter: String,
    pub model: NoiseModel,
    pub level: f64,
    pub seed: u64,
    pub mae: f64,
    pub mse: f64,
    pub ncd: f64,
    #[serde(serialize_with = "three_decimals")]
    pub time_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ImageFailure {
    pub image: String,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct BenchRun {
    pub rows: Vec<BenchRow>,
    pub failures: Vec<ImageFailure>,
}

/// Image identifier used in rows and seeds: the file name.
pub fn image_id(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Loadable images in `dir`, sorted by file name.
pub fn collect_images(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && is_supported(p))
        .collect();
    out.sort();
    Ok(out)
}

/// Filters one noisy image with every configured filter.
fn filter_all(cfg: &BenchConfig, clean: &Image, noisy: &Image, filters: &[String]) -> Result<Vec<(String, crate::metrics::MetricReport)>> {
    let run_one = |name: &String| -> Result<(String, crate::metrics::MetricReport)> {
        let spec = cfg.spec(name);
        let (out, ms) = if cfg.timed {
            time_filter(noisy, &spec, cfg.window)?
        } else {
            let f = build(&spec, noisy, cfg.window)?;
            (filter_image_sequential(noisy, f.as_ref(), cfg.window)?, 0.0)
        };
        let mut report = evaluate(clean, &out)?;
        report.time_ms = ms;
        Ok((name.clone(), report))
    };
    if cfg.timed {
        return filters.iter().map(run_one).collect();
    }
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        filters.par_iter().map(run_one).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        filters.iter().map(run_one).collect()
    }
}

/// Runs the full grid. Each (image, model, level) gets one noise
/// realization shared by all filters; every filter output is measured
/// against the clean image. Rows come out in image, model, level, filter
/// order. Unreadable images are reported in [`BenchRun::failures`].
pub fn run_benchmark(cfg: &BenchConfig) -> Result<BenchRun> {
    cfg.validate()?;
    let mut filters = cfg.filters.clone();
    if cfg.baseline && !filters.iter().any(|f| f == IDENTITY) {
        filters.insert(0, IDENTITY.to_string());
    }
    let mut run = BenchRun::default();
    let mut processed = 0usize;
    for path in &cfg.images {
        let id = image_id(path);
        let clean = match read_image(path) {
            Ok(img) => img,
            Err(e) => {
                log::warn!("skipping {id}: {e}");
                run.failures.push(ImageFailure {
                    image: id,
                    message: e.to_string(),
                });
                continue;
            }
        };
        processed += 1;
        for &model in &cfg.models {
            for &level in &cfg.levels {
                let seed = derive_seed(cfg.seed, &id, model, level);
                let noisy = corrupt(&clean, &NoiseConfig::new(model, level, seed))?;
                log::info!("{id} {model} {level}: {} filters", filters.len());
                for (filter, m) in filter_all(cfg, &clean, &noisy, &filters)? {
                    run.rows.push(BenchRow {
                        image: id.clone(),
                        filter,
                        model,
                        level,
                        seed,
                        mae: m.mae,
                        mse: m.mse,
                        ncd: m.ncd,
                        time_ms: m.time_ms,
                    });
                }
            }
        }
    }
    if processed == 0 {
        return Err(Error::NoImages);
    }
    Ok(run)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    Mae,
    Mse,
    Ncd,
    Time,
}

impl Criterion {
    pub const ALL: [Criterion; 4] = [Criterion::Mae, Criterion::Mse, Criterion::Ncd, Criterion::Time];

    pub fn value(self, row: &BenchRow) -> f64 {
        match self {
            Criterion::Mae => row.mae,
            Criterion::Mse => row.mse,
            Criterion::Ncd => row.ncd,
            Criterion::Time => row.time_ms,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    pub model: NoiseModel,
    pub level: f64,
    pub criterion: Criterion,
    pub filter: String,
    pub average_rank: f64,
    pub images: usize,
}

/// Average rankings per (model, level, criterion), each group sorted by
/// ascending average rank, then filter name.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RankTable {
    pub entries: Vec<RankEntry>,
}

impl RankTable {
    /// Entries of one group in rank order.
    pub fn group(&self, model: NoiseModel, level: f64, criterion: Criterion) -> Vec<&RankEntry> {
        self.entries
            .iter()
            .filter(|e| e.model == model && e.level == level && e.criterion == criterion)
            .collect()
    }

    pub fn average_rank(&self, model: NoiseModel, level: f64, criterion: Criterion, filter: &str) -> Option<f64> {
        self.group(model, level, criterion)
            .into_iter()
            .find(|e| e.filter == filter)
            .map(|e| e.average_rank)
    }
}

/// Ranks `0..F−1` of `values` (lower is better); tied values share the mean
/// of the positions they span.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0;
        for &k in &order[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Aggregates rows into average rankings. Baseline (`none`) rows are
/// ignored. Within a (model, level) group, an image missing any of the
/// group's filters is left out with a warning.
pub fn aggregate_rankings(rows: &[BenchRow]) -> RankTable {
    type Key = (NoiseModel, u64);
    let mut groups: BTreeMap<Key, BTreeMap<&str, BTreeMap<&str, &BenchRow>>> = BTreeMap::new();
    for row in rows.iter().filter(|r| r.filter != IDENTITY) {
        groups
            .entry((row.model, row.level.to_bits()))
            .or_default()
            .entry(row.image.as_str())
            .or_default()
            .insert(row.filter.as_str(), row);
    }
    let mut table = RankTable::default();
    // Levels are ordered numerically, not by bit pattern.
    let mut keys: Vec<Key> = groups.keys().copied().collect();
    keys.sort_by(|a, b| a.0.cmp(&b.0).then(f64::from_bits(a.1).total_cmp(&f64::from_bits(b.1))));
    for key in keys {
        let images = &groups[&key];
        let (model, level) = (key.0, f64::from_bits(key.1));
        let filters: Vec<&str> = images
            .values()
            .flat_map(|m| m.keys().copied())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let complete: Vec<&BTreeMap<&str, &BenchRow>> = images
            .iter()
            .filter(|(image, m)| {
                let ok = m.len() == filters.len();
                if !ok {
                    log::warn!(
                        "{model} {level}: {image} has {} of {} filters; excluded from ranking",
                        m.len(),
                        filters.len()
                    );
                }
                ok
            })
            .map(|(_, m)| m)
            .collect();
        if complete.is_empty() {
            continue;
        }
        for criterion in Criterion::ALL {
            let mut sums = vec![0.0; filters.len()];
            for m in &complete {
                let values: Vec<f64> = filters.iter().map(|f| criterion.value(m[f])).collect();
                for (s, r) in sums.iter_mut().zip(average_ranks(&values)) {
                    *s += r;
                }
            }
            let mut group: Vec<RankEntry> = filters
                .iter()
                .zip(sums)
                .map(|(f, s)| RankEntry {
                    model,
                    level,
                    criterion,
                    filter: f.to_string(),
                    average_rank: s / complete.len() as f64,
                    images: complete.len(),
                })
                .collect();
            group.sort_by(|a, b| {
                a.average_rank
                    .total_cmp(&b.average_rank)
                    .then_with(|| a.filter.cmp(&b.filter))
            });
            table.entries.extend(group);
        }
    }
    table
}

pub fn write_rows_csv(path: &Path, rows: &[BenchRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_rows_csv(path: &Path) -> Result<Vec<BenchRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let rows = r.deserialize().collect::<std::result::Result<Vec<BenchRow>, _>>()?;
    Ok(rows)
}

pub fn write_ranks_csv(path: &Path, table: &RankTable) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for e in &table.entries {
        w.serialize(e)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Serialize)]
struct Report<'a> {
    config: &'a BenchConfig,
    rows: &'a [BenchRow],
    failures: &'a [ImageFailure],
    rankings: &'a RankTable,
}

/// JSON mirror of the CSV with the configuration and rankings attached.
pub fn write_report_json(path: &Path, cfg: &BenchConfig, run: &BenchRun) -> Result<()> {
    let rankings = aggregate_rankings(&run.rows);
    let report = Report {
        config: cfg,
        rows: &run.rows,
        failures: &run.failures,
        rankings: &rankings,
    };
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    serde_json::to_writer_pretty(std::io::BufWriter::new(file), &report)?;
    Ok(())
}
