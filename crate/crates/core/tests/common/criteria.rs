//! One check per acceptance criterion. Each returns an [`Outcome`]; the
//! acceptance target prints them and fails on any attainable criterion that
//! does not pass.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use semifactual::data::Dataset;
use semifactual::harness::{
    emit_report, mean_ranks, prepare_dataset, run_loo, summarize, LooRun, RunConfig,
};
use semifactual::metrics::SparsityBin;
use semifactual::surrogate::{fit_logistic, objective, LogisticConfig};
use semifactual::{Method, Metric};

use super::Table;

pub const ORACLE_DATASETS: usize = 20;
pub const ORACLE_BUDGET: Duration = Duration::from_secs(120);
pub const METRIC_TOL: f64 = 1e-9;
pub const GRADIENT_REL_TOL: f64 = 1e-5;
pub const FD_STEP: f64 = 1e-5;
pub const SURROGATE_FITS: usize = 100;
pub const PERF_ROWS: usize = 2000;
pub const PERF_FEATURES: usize = 20;
pub const PERF_BUDGET: Duration = Duration::from_secs(600);
pub const QUAL_SUBSAMPLE: usize = 2000;
pub const QUAL_MIN_MDN_WINS: usize = 3;
pub const DATA_DIR_ENV: &str = "SFBENCH_DATA_DIR";
/// Schema spec stems looked up in the data directory.
pub const PUBLIC_DATASETS: [&str; 7] = [
    "adult_income",
    "blood_alcohol",
    "default_credit",
    "pima_diabetes",
    "german_credit",
    "heloc",
    "lending_club",
];

#[derive(Debug, Clone)]
pub struct Outcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    /// Inputs the criterion needs are not available here.
    pub blocked: bool,
    pub detail: String,
}

impl Outcome {
    fn new(id: u8, name: &'static str, failures: Vec<String>, summary: String) -> Self {
        let passed = failures.is_empty();
        let detail = if passed {
            summary
        } else {
            let shown: Vec<_> = failures.iter().take(5).cloned().collect();
            format!(
                "{summary}; {} failure(s): {}",
                failures.len(),
                shown.join(" | ")
            )
        };
        Self {
            id,
            name,
            passed,
            blocked: false,
            detail,
        }
    }

    pub fn line(&self) -> String {
        format!(
            "{} criterion {} ({}): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail
        )
    }
}

/// Default config with the given worker count.
pub fn bench_config(workers: usize) -> RunConfig {
    RunConfig {
        workers,
        ..RunConfig::default()
    }
}

pub fn workers() -> usize {
    std::thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(4)
}

/// Leave-one-out runs over the property corpus, shared by the oracle,
/// metric and MDN criteria.
pub struct CorpusRuns {
    pub datasets: Vec<Dataset>,
    pub runs: Vec<LooRun>,
    pub elapsed: Duration,
}

pub fn corpus_runs() -> CorpusRuns {
    let start = Instant::now();
    let datasets = super::corpus(ORACLE_DATASETS);
    let config = bench_config(workers());
    let runs = datasets
        .iter()
        .map(|ds| run_loo(ds, &config).expect("loo run"))
        .collect();
    CorpusRuns {
        datasets,
        runs,
        elapsed: start.elapsed(),
    }
}

pub fn oracle_equivalence(corpus: &CorpusRuns) -> Outcome {
    let start = Instant::now();
    let config = RunConfig::default();
    let mut failures = Vec::new();
    let mut checked = 0usize;
    for (ds, run) in corpus.datasets.iter().zip(&corpus.runs) {
        let t = Table::of(ds);
        for row in &run.rows {
            let r = &row.result;
            let want = super::select(
                &t,
                r.query_id,
                r.method,
                &config.knn_filter,
                config.tau_factor,
                config.per_class_min,
            );
            checked += 1;
            if want != r.sf_id {
                failures.push(format!(
                    "{} q{} {}: got {:?}, oracle {:?}",
                    ds.name(),
                    r.query_id,
                    r.method,
                    r.sf_id,
                    want
                ));
            }
            if let Some(sf) = r.sf_id {
                if t.labels[sf] != t.labels[r.query_id] || sf == r.query_id {
                    failures.push(format!(
                        "{} q{} {}: invalid SF {sf}",
                        ds.name(),
                        r.query_id,
                        r.method
                    ));
                }
            }
        }
    }
    let elapsed = corpus.elapsed + start.elapsed();
    if elapsed > ORACLE_BUDGET {
        failures.push(format!(
            "took {:.1}s, budget {}s",
            elapsed.as_secs_f64(),
            ORACLE_BUDGET.as_secs()
        ));
    }
    let sizes: Vec<String> = corpus
        .datasets
        .iter()
        .map(|d| format!("{}x{}", d.len(), d.feature_count()))
        .collect();
    Outcome::new(
        1,
        "oracle equivalence",
        failures,
        format!(
            "{} datasets [{}], {checked} (query, method) selections identical to brute force in {:.1}s",
            corpus.datasets.len(),
            sizes.join(" "),
            elapsed.as_secs_f64()
        ),
    )
}

pub fn metric_correctness(corpus: &CorpusRuns) -> Outcome {
    let config = RunConfig::default();
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    let mut records = 0usize;
    for (ds, run) in corpus.datasets.iter().zip(&corpus.runs) {
        let t = Table::of(ds);
        for row in &run.rows {
            let (Some(sf), Some(m)) = (row.result.sf_id, row.metrics.as_ref()) else {
                if row.result.found {
                    failures.push(format!(
                        "{} q{} {}: found without metrics",
                        ds.name(),
                        row.result.query_id,
                        row.result.method
                    ));
                }
                continue;
            };
            records += 1;
            let q = row.result.query_id;
            let (d, pct, class, nun, mdn, count) =
                super::metrics(&t, q, sf, config.tau_factor, config.ridge);
            for (name, got, want) in [
                ("q_sf_distance", m.q_sf_distance, d),
                ("q_sf_knn_pct", m.q_sf_knn_pct, pct),
                ("sf_class_distance", m.sf_class_distance, class),
                ("sf_nun_distance", m.sf_nun_distance, nun),
                ("mdn_distance", m.mdn_distance, mdn),
            ] {
                let err = (got - want).abs();
                worst = worst.max(err);
                if !(err <= METRIC_TOL) {
                    failures.push(format!(
                        "{} q{q} {}: {name} {got} vs {want}",
                        ds.name(),
                        row.result.method
                    ));
                }
            }
            if m.sparsity_count != count || m.sparsity_bin != SparsityBin::from_count(count) {
                failures.push(format!(
                    "{} q{q} {}: sparsity {} vs {count}",
                    ds.name(),
                    row.result.method,
                    m.sparsity_count
                ));
            }
            if row.result.method == Method::Mdn && row.result.score != Some(m.mdn_distance) {
                failures.push(format!(
                    "{} q{q}: MDN score {:?} != mdn_distance {}",
                    ds.name(),
                    row.result.score,
                    m.mdn_distance
                ));
            }
        }
    }
    let summaries: Vec<_> = corpus.runs.iter().map(summarize).collect();
    for s in &summaries {
        for m in &s.methods {
            if m.found > 0 {
                let total: f64 = m.sparsity_pct.iter().sum();
                if (total - 100.0).abs() > METRIC_TOL {
                    failures.push(format!(
                        "{} {}: sparsity % sums to {total}",
                        s.dataset, m.method
                    ));
                }
            }
        }
    }
    match mean_ranks(&summaries) {
        Ok(table) => {
            for (d, per_metric) in table.ranks.iter().enumerate() {
                for (k, ranks) in per_metric.iter().enumerate() {
                    let sum: f64 = ranks.iter().sum();
                    if sum != 15.0 {
                        failures.push(format!(
                            "{} {}: rank sum {sum}",
                            table.datasets[d],
                            Metric::ALL[k]
                        ));
                    }
                }
            }
        }
        Err(e) => failures.push(format!("mean ranks: {e}")),
    }
    Outcome::new(
        2,
        "metric correctness",
        failures,
        format!("{records} metric records recomputed independently, max abs error {worst:.1e} (tol {METRIC_TOL:.0e}); sparsity % and rank sums exact"),
    )
}

fn loss_only(xs: &[Vec<f64>], ys: &[bool], w: &[f64], b: f64, l2: f64) -> f64 {
    let n = xs.len() as f64;
    let mut loss = 0.0;
    for (x, &y) in xs.iter().zip(ys) {
        let z: f64 = x.iter().zip(w).map(|(a, c)| a * c).sum::<f64>() + b;
        // log(1 + e^z) - y z, written to stay finite for large |z|
        let softplus = if z > 0.0 {
            z + (-z).exp().ln_1p()
        } else {
            z.exp().ln_1p()
        };
        loss += softplus - if y { z } else { 0.0 };
    }
    loss / n + 0.5 * l2 * w.iter().map(|v| v * v).sum::<f64>()
}

/// Largest component-wise gap between the analytic gradient and central
/// differences of an independently written loss, and the largest gradient
/// component.
fn gradient_gap(xs: &[Vec<f64>], ys: &[bool], w: &[f64], b: f64, l2: f64) -> (f64, f64) {
    let refs: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
    let (_, gw, gb) = objective(&refs, ys, w, b, l2);
    let mut analytic = gw.clone();
    analytic.push(gb);
    let mut numeric = Vec::with_capacity(analytic.len());
    for j in 0..=w.len() {
        let shift = |delta: f64| {
            let mut w2 = w.to_vec();
            let mut b2 = b;
            if j < w.len() {
                w2[j] += delta;
            } else {
                b2 += delta;
            }
            loss_only(xs, ys, &w2, b2, l2)
        };
        numeric.push((shift(FD_STEP) - shift(-FD_STEP)) / (2.0 * FD_STEP));
    }
    let scale = analytic
        .iter()
        .chain(&numeric)
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let gap = analytic
        .iter()
        .zip(&numeric)
        .fold(0.0f64, |m, (a, n)| m.max((a - n).abs()));
    (gap, scale)
}

pub fn surrogate_numerics() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x10615);
    let config = LogisticConfig::default();
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    let mut converged = 0usize;
    for fit in 0..SURROGATE_FITS {
        let n = 30;
        let d = rng.gen_range(1..=6);
        let w_true: Vec<f64> = (0..d).map(|_| rng.gen_range(-4.0..4.0)).collect();
        let xs: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| rng.gen_range(0.0..1.0)).collect())
            .collect();
        let mut ys: Vec<bool> = xs
            .iter()
            .map(|x| {
                let z: f64 = x.iter().zip(&w_true).map(|(a, b)| a * b).sum::<f64>()
                    - w_true.iter().sum::<f64>() / 2.0;
                z + rng.gen_range(-0.5..0.5) > 0.0
            })
            .collect();
        ys[0] = true;
        ys[1] = false;
        let refs: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
        let model = match fit_logistic(&refs, &ys, &config) {
            Ok(m) => m,
            Err(e) => {
                failures.push(format!("fit {fit}: {e}"));
                continue;
            }
        };
        converged += usize::from(model.converged);
        if let Some(i) = model.loss_trace.windows(2).position(|p| p[1] > p[0]) {
            failures.push(format!("fit {fit}: loss rose at step {i}"));
        }
        // At the fitted weights and at a random nearby point, where the
        // gradient is far from zero.
        let probes = [
            (model.weights.clone(), model.bias),
            (
                model
                    .weights
                    .iter()
                    .map(|w| w + rng.gen_range(-1.0..1.0))
                    .collect(),
                model.bias + rng.gen_range(-1.0..1.0),
            ),
        ];
        for (k, (w, b)) in probes.iter().enumerate() {
            let (gap, scale) = gradient_gap(&xs, &ys, w, *b, config.l2);
            // Near the optimum the gradient is ~tol, so the gap is taken
            // relative to max(|g|, 1) there.
            let rel = if k == 0 {
                gap / scale.max(1.0)
            } else {
                gap / scale
            };
            worst = worst.max(rel);
            if !(rel <= GRADIENT_REL_TOL) {
                failures.push(format!(
                    "fit {fit} probe {k}: relative gradient gap {rel:.2e}"
                ));
            }
        }
    }
    Outcome::new(
        3,
        "surrogate numerics",
        failures,
        format!(
            "{SURROGATE_FITS} fits, {converged} converged, max relative gradient gap {worst:.1e} (tol {GRADIENT_REL_TOL:.0e}, step {FD_STEP:.0e}); every loss trace non-increasing"
        ),
    )
}

pub fn mdn_optimality(corpus: &CorpusRuns) -> Outcome {
    let config = RunConfig::default();
    let mut failures = Vec::new();
    let mut comparisons = 0usize;
    for (ds, run) in corpus.datasets.iter().zip(&corpus.runs) {
        if ds.len() > 300 {
            continue;
        }
        let t = Table::of(ds);
        let taus = t.taus(config.tau_factor);
        for q in 0..ds.len() {
            let rows: Vec<_> = run.rows.iter().filter(|r| r.result.query_id == q).collect();
            let Some(mdn_row) = rows.iter().find(|r| r.result.method == Method::Mdn) else {
                continue;
            };
            let pool = super::base_pool(&t, q);
            let mdn_score = mdn_row.result.score.unwrap_or(0.0);
            // Every (candidate, key feature) pair the rule could pick.
            for (s, f, x) in super::sfs_triples(&t, &taus, q, &pool) {
                comparisons += 1;
                if s > mdn_score {
                    failures.push(format!(
                        "{} q{q}: x{x} on f{f} scores {s} > MDN {mdn_score}",
                        ds.name()
                    ));
                }
            }
            // Every other method's chosen SF.
            for r in rows.iter().filter(|r| r.result.method != Method::Mdn) {
                if let Some(sf) = r.result.sf_id {
                    comparisons += 1;
                    let s = super::mdn_distance(&t, &taus, q, sf, &pool);
                    if s > mdn_score {
                        failures.push(format!(
                            "{} q{q}: {} SF scores {s} > MDN {mdn_score}",
                            ds.name(),
                            r.result.method
                        ));
                    }
                }
            }
        }
    }
    Outcome::new(
        4,
        "MDN optimality",
        failures,
        format!("{comparisons} exhaustive sfs comparisons, none above the MDN choice"),
    )
}

/// Directory holding `<name>.toml` schema specs for the public datasets.
pub fn data_dir() -> PathBuf {
    std::env::var_os(DATA_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data"))
}

pub fn qualitative_reproduction() -> Outcome {
    let dir = data_dir();
    let (present, missing): (Vec<&str>, Vec<&str>) = PUBLIC_DATASETS
        .iter()
        .partition(|n| dir.join(format!("{n}.toml")).is_file());
    let config = RunConfig {
        subsample: Some(QUAL_SUBSAMPLE),
        ..bench_config(workers())
    };
    let mut summaries = Vec::new();
    let mut notes = Vec::new();
    for name in &present {
        let path = dir.join(format!("{name}.toml"));
        match prepare_dataset(&path, &config).and_then(|ds| run_loo(&ds, &config)) {
            Ok(run) => summaries.push(summarize(&run)),
            Err(e) => notes.push(format!("{name}: {e}")),
        }
    }
    let mut failures = notes.clone();
    let mut parts = Vec::new();
    if !summaries.is_empty() {
        let table = mean_ranks(&summaries).expect("uniform method sets");
        let rank = |metric, m| table.mean_rank(metric, m).unwrap();
        let mdn_rank = rank(Metric::MdnDistance, Method::Mdn);
        parts.push(format!("(a) MDN mean rank on mdn_distance {mdn_rank}"));
        if mdn_rank != 1.0 {
            failures.push(format!("(a) MDN mean rank {mdn_rank}"));
        }
        let wins = summaries
            .iter()
            .filter(|s| {
                let mdn = s.method(Method::Mdn).unwrap().q_sf_distance;
                s.methods.iter().all(|m| m.q_sf_distance <= mdn)
            })
            .count();
        parts.push(format!(
            "(b) MDN highest q_sf_distance on {wins}/{}",
            summaries.len()
        ));
        if wins + missing.len() < QUAL_MIN_MDN_WINS {
            failures.push(format!("(b) only {wins} MDN wins"));
        }
        let nun_rank = |m| rank(Metric::SfNunDistance, m);
        let kleor = [Method::SimMiss, Method::GlobalSim, Method::AttrSim];
        let kleor_ranks: Vec<f64> = kleor.iter().map(|&m| nun_rank(m)).collect();
        let (mdn_n, lr_n) = (nun_rank(Method::Mdn), nun_rank(Method::LocalRegion));
        parts.push(format!(
            "(c) sf_nun_distance mean ranks KLEOR {kleor_ranks:?} vs MDN {mdn_n} / Local-Region {lr_n}"
        ));
        if kleor_ranks.iter().any(|&r| r >= mdn_n || r >= lr_n) {
            failures.push(
                "(c) a KLEOR variant does not beat MDN and Local-Region on sf_nun_distance".into(),
            );
        }
        let coverage: Vec<String> = summaries
            .iter()
            .map(|s| {
                format!(
                    "{} {:.1}/{:.1}",
                    s.dataset,
                    s.method(Method::SimMiss).unwrap().coverage_pct,
                    s.method(Method::GlobalSim).unwrap().coverage_pct
                )
            })
            .collect();
        parts.push(format!(
            "(d) Sim-Miss/Global-Sim coverage {}",
            coverage.join(", ")
        ));
        if summaries.iter().any(|s| {
            s.method(Method::SimMiss).unwrap().coverage_pct
                < s.method(Method::GlobalSim).unwrap().coverage_pct
        }) {
            failures.push("(d) Global-Sim covers more than Sim-Miss somewhere".into());
        }
    }
    let blocked = !missing.is_empty();
    if blocked {
        failures.push(format!(
            "datasets not available in {}: {} (set {DATA_DIR_ENV})",
            dir.display(),
            missing.join(", ")
        ));
    }
    let mut outcome = Outcome::new(
        5,
        "qualitative orderings",
        failures,
        if parts.is_empty() {
            format!("{} of 7 public datasets present", present.len())
        } else {
            format!(
                "{} of 7 public datasets present ({}); {}",
                present.len(),
                present.join(", "),
                parts.join("; ")
            )
        },
    );
    outcome.blocked = blocked;
    outcome
}

pub fn performance() -> Outcome {
    let ds = super::random_dataset(0x9e7f, PERF_ROWS, PERF_FEATURES);
    let workers = workers();
    let start = Instant::now();
    let run = run_loo(&ds, &bench_config(workers));
    let elapsed = start.elapsed();
    let mut failures = Vec::new();
    match &run {
        Ok(r) if r.rows.len() == PERF_ROWS * Method::ALL.len() => {}
        Ok(r) => failures.push(format!("{} rows", r.rows.len())),
        Err(e) => failures.push(e.to_string()),
    }
    if elapsed > PERF_BUDGET {
        failures.push(format!("took {:.1}s", elapsed.as_secs_f64()));
    }
    Outcome::new(
        6,
        "performance envelope",
        failures,
        format!(
            "five-method LOO on {PERF_ROWS}x{PERF_FEATURES} with {workers} worker(s) in {:.1}s (budget {}s)",
            elapsed.as_secs_f64(),
            PERF_BUDGET.as_secs()
        ),
    )
}

fn report_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

pub fn determinism() -> Outcome {
    let mut failures = Vec::new();
    let datasets: Vec<Dataset> = super::corpus(4);
    let tmp = tempfile::tempdir().unwrap();
    let mut reports = Vec::new();
    let mut serial_runs = Vec::new();
    for (k, workers) in [1usize, 1, 4].into_iter().enumerate() {
        let config = RunConfig {
            out: tmp.path().join(format!("run{k}")),
            ..bench_config(workers)
        };
        let runs: Vec<LooRun> = datasets
            .iter()
            .map(|d| run_loo(d, &config).unwrap())
            .collect();
        let summaries: Vec<_> = runs.iter().map(summarize).collect();
        let table = mean_ranks(&summaries).unwrap();
        emit_report(&runs, &summaries, &table, &config).unwrap();
        reports.push(report_bytes(&config.out));
        if k == 0 {
            serial_runs = runs;
        } else if runs != serial_runs {
            failures.push(format!(
                "run {k} ({workers} workers) differs from the serial run"
            ));
        }
    }
    if reports[0] != reports[1] {
        failures.push("identical serial runs wrote different report bytes".into());
    }
    if reports[0] != reports[2] {
        failures.push("4-worker run wrote different report bytes".into());
    }

    // Re-running the CLI from a report's embedded config.
    let bin = env!("CARGO_BIN_EXE_sfbench");
    let toy = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/toy6.toml");
    let (a, b) = (tmp.path().join("cli-a"), tmp.path().join("cli-b"));
    let first = std::process::Command::new(bin)
        .args(["bench", "--dataset"])
        .arg(&toy)
        .arg("--out")
        .arg(&a)
        .output()
        .unwrap();
    let second = std::process::Command::new(bin)
        .args(["bench", "--config"])
        .arg(a.join("config.json"))
        .arg("--out")
        .arg(&b)
        .args(["--workers", "4"])
        .output()
        .unwrap();
    if !first.status.success() || !second.status.success() {
        failures.push(format!(
            "CLI bench failed: {}{}",
            String::from_utf8_lossy(&first.stderr),
            String::from_utf8_lossy(&second.stderr)
        ));
    } else if report_bytes(&a) != report_bytes(&b) {
        failures.push("report re-run from embedded config differs".into());
    }
    let files = reports[0].len();
    Outcome::new(
        7,
        "determinism",
        failures,
        format!(
            "{files} report files byte-identical across two serial runs and a 4-worker run; run results identical; CLI re-run from embedded config identical"
        ),
    )
}

pub fn toy6_golden() -> Outcome {
    use semifactual::geometry::{distance, nun, rank_neighbors};
    use semifactual::methods::{attr_sim, between_count, global_sim, sim_miss, CandidatePool};
    use semifactual::metrics::q_sf_knn_pct;

    let ds = super::toy6();
    let q = ds.instance(0);
    let mut failures = Vec::new();
    let mut check = |what: &str, ok: bool| {
        if !ok {
            failures.push(what.to_string());
        }
    };
    let n = nun(q, &ds, &[]).unwrap();
    check("NUN(q) = n1", n.id == 4);
    let pool = CandidatePool::same_class(&ds, q);
    check(
        "SimMiss(q) = x3",
        sim_miss(q, &pool, n, &ds).sf_id == Some(3),
    );
    let g = global_sim(q, &pool, n, &ds);
    let d = |a: usize, b: usize| distance(ds.instance(a), ds.instance(b), ds.schema()).unwrap();
    check("GlobalSim(q) = x3", g.sf_id == Some(3));
    check("d(q,x3) < d(q,n1)", d(0, 3) < d(0, 4));
    let metric = semifactual::geometry::FeatureMetric::new(ds.schema());
    let counts: Vec<usize> = (1..=3)
        .map(|x| between_count(&q.values, &ds.instance(x).values, &n.values, &metric))
        .collect();
    check("AttrSim counts tie at 1", counts == [1, 1, 1]);
    check(
        "AttrSim(q) = x3",
        attr_sim(q, &pool, n, &ds).sf_id == Some(3),
    );
    let ranking = rank_neighbors(q, &ds, &[]);
    check(
        "q_sf_knn_pct(q, x3) = 40",
        q_sf_knn_pct(3, &ranking).ok() == Some(40.0),
    );
    let run = run_loo(&ds, &RunConfig::default()).unwrap();
    check("30 LOO rows", run.rows.len() == 30);
    check(
        "LOO SimMiss row for q names x3",
        run.rows_for(Method::SimMiss)
            .find(|r| r.result.query_id == 0)
            .and_then(|r| r.result.sf_id)
            == Some(3),
    );
    Outcome::new(
        8,
        "toy-6 golden values",
        failures,
        format!(
            "NUN n1; Sim-Miss, Global-Sim, Attr-Sim pick x3; d(q,x3)={:.4} < d(q,n1)=1; knn pct 40",
            d(0, 3)
        ),
    )
}
