//! Report files.
//!
//! Column layouts (every CSV starts with a `# config_hash=<sha256>` line):
//!
//! - `summary.csv`: dataset, method, queries, found, coverage_pct,
//!   q_sf_distance, q_sf_knn_pct, sf_class_distance, sf_nun_distance,
//!   mdn_distance, sparsity_1_pct, sparsity_2_pct, sparsity_3plus_pct,
//!   boundary_crossings, errors
//! - `results.csv`: dataset, method, query_id, found, sf_id, score,
//!   key_feature, boundary_crossing, nun_id, the six metric columns
//!   (sparsity as count and bin), error
//! - `ranks.csv`: dataset, metric, method, value, rank; rows with an empty
//!   dataset hold the cross-dataset mean rank
//! - `chart_*.csv`: long-form dataset, method, metric, value
//!
//! `ranks.json` and `config.json` carry the same hash as a field.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::HarnessError;
use crate::methods::Method;
use crate::metrics::Metric;

use super::summary::{DatasetSummary, MethodSummary, RankTable};
use super::{LooRun, RunConfig};

pub const SUMMARY_FILE: &str = "summary.csv";
pub const RESULTS_FILE: &str = "results.csv";
pub const RANKS_CSV_FILE: &str = "ranks.csv";
pub const RANKS_JSON_FILE: &str = "ranks.json";
pub const CONFIG_FILE: &str = "config.json";
pub const CHART_FILES: [&str; 4] = [
    "chart_mean_ranks.csv",
    "chart_distances.csv",
    "chart_mdn_distance.csv",
    "chart_sparsity.csv",
];

const HASH_PREFIX: &str = "# config_hash=";

/// Paths of everything one report wrote.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportFiles {
    pub dir: PathBuf,
    pub summary: PathBuf,
    pub results: PathBuf,
    pub ranks_csv: PathBuf,
    pub ranks_json: PathBuf,
    pub config: PathBuf,
    pub charts: Vec<PathBuf>,
}

impl ReportFiles {
    pub fn all(&self) -> Vec<&Path> {
        let mut v = vec![
            self.summary.as_path(),
            self.results.as_path(),
            self.ranks_csv.as_path(),
            self.ranks_json.as_path(),
            self.config.as_path(),
        ];
        v.extend(self.charts.iter().map(PathBuf::as_path));
        v
    }
}

/// `%.9g`-style rendering; non-finite values become `NaN`, `inf`, `-inf`.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..9).contains(&exp) {
        let mantissa = trim_fraction(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{mantissa}e{sign}{:02}", exp.abs());
    }
    let decimals = (8 - exp) as usize;
    trim_fraction(&format!("{x:.decimals$}")).to_string()
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// `x` as it reads back from a report.
pub fn round_reported(x: f64) -> f64 {
    if x.is_finite() {
        format_float(x).parse().expect("formatted float parses")
    } else {
        x
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn opt_float(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

struct CsvDoc {
    writer: csv::Writer<Vec<u8>>,
}

impl CsvDoc {
    fn new(hash: &str, header: &[&str]) -> Self {
        let mut buf = Vec::new();
        writeln!(buf, "{HASH_PREFIX}{hash}").expect("write to memory");
        let mut writer = csv::Writer::from_writer(buf);
        writer.write_record(header).expect("write to memory");
        Self { writer }
    }

    fn row<I, S>(&mut self, fields: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields).expect("write to memory");
    }

    fn finish(self) -> Vec<u8> {
        self.writer.into_inner().expect("flush to memory")
    }
}

const SUMMARY_HEADER: [&str; 15] = [
    "dataset",
    "method",
    "queries",
    "found",
    "coverage_pct",
    "q_sf_distance",
    "q_sf_knn_pct",
    "sf_class_distance",
    "sf_nun_distance",
    "mdn_distance",
    "sparsity_1_pct",
    "sparsity_2_pct",
    "sparsity_3plus_pct",
    "boundary_crossings",
    "errors",
];

fn summary_csv(hash: &str, summaries: &[DatasetSummary]) -> Vec<u8> {
    let mut doc = CsvDoc::new(hash, &SUMMARY_HEADER);
    for ds in summaries {
        for s in &ds.methods {
            doc.row([
                ds.dataset.clone(),
                s.method.to_string(),
                s.queries.to_string(),
                s.found.to_string(),
                format_float(s.coverage_pct),
                format_float(s.q_sf_distance),
                format_float(s.q_sf_knn_pct),
                format_float(s.sf_class_distance),
                format_float(s.sf_nun_distance),
                format_float(s.mdn_distance),
                format_float(s.sparsity_pct[0]),
                format_float(s.sparsity_pct[1]),
                format_float(s.sparsity_pct[2]),
                s.boundary_crossings.to_string(),
                s.errors.to_string(),
            ]);
        }
    }
    doc.finish()
}

fn results_csv(hash: &str, runs: &[LooRun]) -> Vec<u8> {
    let mut doc = CsvDoc::new(
        hash,
        &[
            "dataset",
            "method",
            "query_id",
            "found",
            "sf_id",
            "score",
            "key_feature",
            "boundary_crossing",
            "nun_id",
            "q_sf_distance",
            "q_sf_knn_pct",
            "sf_class_distance",
            "sf_nun_distance",
            "mdn_distance",
            "sparsity_count",
            "sparsity_bin",
            "error",
        ],
    );
    for run in runs {
        for row in &run.rows {
            let r = &row.result;
            let m = row.metrics.as_ref();
            doc.row([
                run.dataset.clone(),
                r.method.to_string(),
                r.query_id.to_string(),
                r.found.to_string(),
                opt(r.sf_id),
                opt_float(r.score),
                opt(r.key_feature),
                r.boundary_crossing.to_string(),
                opt(row.nun_id),
                opt_float(m.map(|m| m.q_sf_distance)),
                opt_float(m.map(|m| m.q_sf_knn_pct)),
                opt_float(m.map(|m| m.sf_class_distance)),
                opt_float(m.map(|m| m.sf_nun_distance)),
                opt_float(m.map(|m| m.mdn_distance)),
                opt(m.map(|m| m.sparsity_count)),
                opt(m.map(|m| m.sparsity_bin)),
                row.error.clone().unwrap_or_default(),
            ]);
        }
    }
    doc.finish()
}

fn ranks_csv(hash: &str, table: &RankTable) -> Vec<u8> {
    let mut doc = CsvDoc::new(hash, &["dataset", "metric", "method", "value", "rank"]);
    for (d, dataset) in table.datasets.iter().enumerate() {
        for (k, metric) in Metric::ALL.iter().enumerate() {
            for (j, method) in table.methods.iter().enumerate() {
                doc.row([
                    dataset.clone(),
                    metric.to_string(),
                    method.to_string(),
                    format_float(table.values[d][k][j]),
                    format_float(table.ranks[d][k][j]),
                ]);
            }
        }
    }
    for (k, metric) in Metric::ALL.iter().enumerate() {
        for (j, method) in table.methods.iter().enumerate() {
            doc.row([
                String::new(),
                metric.to_string(),
                method.to_string(),
                String::new(),
                format_float(table.mean[k][j]),
            ]);
        }
    }
    doc.finish()
}

fn chart_csv<'a>(
    hash: &str,
    records: impl Iterator<Item = (&'a str, Method, &'a str, f64)>,
) -> Vec<u8> {
    let mut doc = CsvDoc::new(hash, &["dataset", "method", "metric", "value"]);
    for (dataset, method, metric, value) in records {
        doc.row([dataset, method.as_str(), metric, &format_float(value)]);
    }
    doc.finish()
}

/// A named per-method summary column.
type Column = (&'static str, fn(&MethodSummary) -> f64);

fn chart_files(hash: &str, summaries: &[DatasetSummary], table: &RankTable) -> [Vec<u8>; 4] {
    let per_dataset = |metrics: &'static [Column]| {
        chart_csv(
            hash,
            summaries.iter().flat_map(move |ds| {
                ds.methods.iter().flat_map(move |s| {
                    metrics
                        .iter()
                        .map(move |(name, get)| (ds.dataset.as_str(), s.method, *name, get(s)))
                })
            }),
        )
    };
    let mean_ranks = chart_csv(
        hash,
        Metric::ALL.iter().enumerate().flat_map(|(k, metric)| {
            table
                .methods
                .iter()
                .enumerate()
                .map(move |(j, &m)| ("mean_rank", m, metric.as_str(), table.mean[k][j]))
        }),
    );
    [
        mean_ranks,
        per_dataset(&[
            ("q_sf_distance", |s| s.q_sf_distance),
            ("q_sf_knn_pct", |s| s.q_sf_knn_pct),
            ("sf_class_distance", |s| s.sf_class_distance),
            ("sf_nun_distance", |s| s.sf_nun_distance),
        ]),
        per_dataset(&[("mdn_distance", |s| s.mdn_distance)]),
        per_dataset(&[
            ("sparsity_1_pct", |s| s.sparsity_pct[0]),
            ("sparsity_2_pct", |s| s.sparsity_pct[1]),
            ("sparsity_3plus_pct", |s| s.sparsity_pct[2]),
        ]),
    ]
}

#[derive(Serialize)]
struct Stamped<'a, T: Serialize> {
    config_hash: &'a str,
    #[serde(flatten)]
    body: &'a T,
}

#[derive(Serialize)]
struct ConfigBody<'a> {
    config: &'a RunConfig,
}

fn json<T: Serialize>(value: &T) -> Result<Vec<u8>, HarnessError> {
    let mut bytes =
        serde_json::to_vec_pretty(value).map_err(|e| HarnessError::Serialize(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Checks that `dir` exists (creating it if needed) and accepts new files.
fn probe_writable(dir: &Path) -> Result<(), HarnessError> {
    let err = |source| HarnessError::Output {
        path: dir.to_path_buf(),
        source,
    };
    fs::create_dir_all(dir).map_err(err)?;
    let probe = dir.join(".sfbench-write-probe");
    fs::write(&probe, b"").map_err(err)?;
    fs::remove_file(&probe).map_err(err)
}

/// Writes every report file into `config.out`. All contents are rendered
/// before the directory is touched, and the directory is probed before the
/// first file is written.
pub fn emit_report(
    runs: &[LooRun],
    summaries: &[DatasetSummary],
    table: &RankTable,
    config: &RunConfig,
) -> Result<ReportFiles, HarnessError> {
    let hash = config.hash();
    let dir = config.out.clone();
    let charts = chart_files(&hash, summaries, table);
    let mut contents: Vec<(PathBuf, Vec<u8>)> = vec![
        (dir.join(SUMMARY_FILE), summary_csv(&hash, summaries)),
        (dir.join(RESULTS_FILE), results_csv(&hash, runs)),
        (dir.join(RANKS_CSV_FILE), ranks_csv(&hash, table)),
        (
            dir.join(RANKS_JSON_FILE),
            json(&Stamped {
                config_hash: &hash,
                body: table,
            })?,
        ),
        (
            dir.join(CONFIG_FILE),
            json(&Stamped {
                config_hash: &hash,
                body: &ConfigBody { config },
            })?,
        ),
    ];
    contents.extend(CHART_FILES.iter().map(|n| dir.join(n)).zip(charts));

    probe_writable(&dir)?;
    for (path, bytes) in &contents {
        fs::write(path, bytes).map_err(|source| HarnessError::Output {
            path: path.clone(),
            source,
        })?;
    }
    Ok(ReportFiles {
        summary: dir.join(SUMMARY_FILE),
        results: dir.join(RESULTS_FILE),
        ranks_csv: dir.join(RANKS_CSV_FILE),
        ranks_json: dir.join(RANKS_JSON_FILE),
        config: dir.join(CONFIG_FILE),
        charts: CHART_FILES.iter().map(|n| dir.join(n)).collect(),
        dir,
    })
}

fn open_report(path: &Path) -> Result<(String, csv::Reader<fs::File>), HarnessError> {
    let text = fs::read_to_string(path).map_err(|source| HarnessError::Output {
        path: path.to_path_buf(),
        source,
    })?;
    let hash = text
        .lines()
        .next()
        .and_then(|l| l.strip_prefix(HASH_PREFIX))
        .ok_or_else(|| {
            HarnessError::Serialize(format!("{}: missing config hash line", path.display()))
        })?
        .to_string();
    let file = fs::File::open(path).map_err(|source| HarnessError::Output {
        path: path.to_path_buf(),
        source,
    })?;
    let reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(file);
    Ok((hash, reader))
}

fn bad(path: &Path, msg: impl std::fmt::Display) -> HarnessError {
    HarnessError::Serialize(format!("{}: {msg}", path.display()))
}

fn parse_f64(path: &Path, s: &str) -> Result<f64, HarnessError> {
    s.parse()
        .map_err(|_| bad(path, format!("bad number `{s}`")))
}

fn parse_usize(path: &Path, s: &str) -> Result<usize, HarnessError> {
    s.parse().map_err(|_| bad(path, format!("bad count `{s}`")))
}

fn parse_method(path: &Path, s: &str) -> Result<Method, HarnessError> {
    s.parse().map_err(|e: String| bad(path, e))
}

/// Reads `summary.csv` back; returns the config hash and the summaries.
pub fn read_summary_csv(path: &Path) -> Result<(String, Vec<DatasetSummary>), HarnessError> {
    let (hash, mut reader) = open_report(path)?;
    let mut out: Vec<DatasetSummary> = Vec::new();
    for record in reader.records() {
        let r = record.map_err(|e| bad(path, e))?;
        if r.len() != SUMMARY_HEADER.len() {
            return Err(bad(path, "wrong column count"));
        }
        let f = |i: usize| parse_f64(path, &r[i]);
        let s = MethodSummary {
            method: parse_method(path, &r[1])?,
            queries: parse_usize(path, &r[2])?,
            found: parse_usize(path, &r[3])?,
            coverage_pct: f(4)?,
            q_sf_distance: f(5)?,
            q_sf_knn_pct: f(6)?,
            sf_class_distance: f(7)?,
            sf_nun_distance: f(8)?,
            mdn_distance: f(9)?,
            sparsity_pct: [f(10)?, f(11)?, f(12)?],
            boundary_crossings: parse_usize(path, &r[13])?,
            errors: parse_usize(path, &r[14])?,
        };
        match out.last_mut() {
            Some(ds) if ds.dataset == r[0] => ds.methods.push(s),
            _ => out.push(DatasetSummary {
                dataset: r[0].to_string(),
                methods: vec![s],
            }),
        }
    }
    Ok((hash, out))
}

/// Reads `ranks.csv`, re-ranks its per-dataset values and checks the result
/// against the ranks stored in the file.
pub fn read_rank_csv(path: &Path) -> Result<(String, RankTable), HarnessError> {
    let (hash, mut reader) = open_report(path)?;
    let mut datasets: Vec<String> = Vec::new();
    let mut methods: Vec<Method> = Vec::new();
    let mut cells: Vec<(usize, usize, usize, f64, String)> = Vec::new();
    let mut stored_mean: Vec<(usize, usize, String)> = Vec::new();
    for record in reader.records() {
        let r = record.map_err(|e| bad(path, e))?;
        if r.len() != 5 {
            return Err(bad(path, "wrong column count"));
        }
        let metric =
            Metric::parse(&r[1]).ok_or_else(|| bad(path, format!("unknown metric `{}`", &r[1])))?;
        let k = Metric::ALL
            .iter()
            .position(|&m| m == metric)
            .expect("listed");
        let method = parse_method(path, &r[2])?;
        let j = match methods.iter().position(|&m| m == method) {
            Some(j) => j,
            None => {
                methods.push(method);
                methods.len() - 1
            }
        };
        if r[0].is_empty() {
            stored_mean.push((k, j, r[4].to_string()));
            continue;
        }
        let d = match datasets.iter().position(|d| d == &r[0]) {
            Some(d) => d,
            None => {
                datasets.push(r[0].to_string());
                datasets.len() - 1
            }
        };
        cells.push((d, k, j, parse_f64(path, &r[3])?, r[4].to_string()));
    }
    let mut values = vec![vec![vec![f64::NAN; methods.len()]; Metric::ALL.len()]; datasets.len()];
    for &(d, k, j, v, _) in &cells {
        values[d][k][j] = v;
    }
    let table = RankTable::from_values(methods, datasets, values)?;
    for (d, k, j, _, rank) in &cells {
        if format_float(table.ranks[*d][*k][*j]) != *rank {
            return Err(bad(
                path,
                format!("stored rank {rank} disagrees with recomputed ranks"),
            ));
        }
    }
    for (k, j, rank) in &stored_mean {
        if format_float(table.mean[*k][*j]) != *rank {
            return Err(bad(
                path,
                format!("stored mean rank {rank} disagrees with recomputed ranks"),
            ));
        }
    }
    Ok((hash, table))
}
