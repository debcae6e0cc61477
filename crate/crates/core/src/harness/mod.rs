//! Leave-one-out benchmark protocol.
//!
//! Every instance is used once as a query against the rest of the dataset.
//! Shared state (metric, k-NN base model, class distributions) is built once
//! per dataset; per-query work is independent and may be spread over a
//! worker pool without changing any output.

mod config;
mod report;
mod summary;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{normalize, Dataset, Instance};
use crate::error::HarnessError;
use crate::geometry::{nun_from_distances, FeatureMetric, NeighborRanking};
use crate::methods::{
    attr_sim, global_sim, local_region, mdn, sim_miss, CandidatePool, KnnModel, MdnScorer, Method,
    SemiFactualResult,
};
use crate::metrics::{Evaluator, MetricsRecord};

pub use config::{RunConfig, DEFAULT_OUT_DIR};
pub use report::{
    emit_report, format_float, read_rank_csv, read_summary_csv, ReportFiles, CHART_FILES,
};
pub use summary::{mean_ranks, summarize, DatasetSummary, MethodSummary, RankTable};

/// One (method, query) outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub result: SemiFactualResult,
    pub nun_id: Option<usize>,
    pub metrics: Option<MetricsRecord>,
    /// Method failure recorded instead of aborting the run.
    pub error: Option<String>,
}

/// All rows of one leave-one-out run, ordered by method (config order), then query id.
#[derive(Debug, Clone, PartialEq)]
pub struct LooRun {
    pub dataset: String,
    pub methods: Vec<Method>,
    pub rows: Vec<ResultRow>,
}

impl LooRun {
    pub fn rows_for(&self, method: Method) -> impl Iterator<Item = &ResultRow> {
        self.rows.iter().filter(move |r| r.result.method == method)
    }
}

/// Read-only per-dataset state shared by all query workers.
pub struct LooContext<'a> {
    dataset: &'a Dataset,
    config: &'a RunConfig,
    metric: FeatureMetric,
    knn: Option<KnnModel>,
    evaluator: Evaluator,
}

impl<'a> LooContext<'a> {
    pub fn new(dataset: &'a Dataset, config: &'a RunConfig) -> Result<Self, HarnessError> {
        config.validate()?;
        let needs_knn = config.methods.iter().any(|m| config.knn_filter.contains(m));
        Ok(Self {
            dataset,
            config,
            metric: FeatureMetric::new(dataset.schema()),
            knn: needs_knn.then(|| KnnModel::fit(dataset, config.knn_k)),
            evaluator: Evaluator::new(dataset, config.mdn_config(), config.ridge)?,
        })
    }

    /// Runs every configured method for one query, in config order.
    pub fn run_query(&self, query_id: usize) -> Vec<ResultRow> {
        let state = QueryState::new(self, query_id);
        self.config
            .methods
            .iter()
            .map(|&m| state.run(self, m))
            .collect()
    }

    /// Runs a single method for one query.
    pub fn run_method(&self, query_id: usize, method: Method) -> ResultRow {
        QueryState::new(self, query_id).run(self, method)
    }
}

/// Per-query state reused across methods.
struct QueryState<'a> {
    query: &'a Instance,
    ranking: NeighborRanking,
    nun: Option<&'a Instance>,
    pool: CandidatePool,
    filtered: Option<CandidatePool>,
    scorer: MdnScorer<'a>,
}

impl<'a> QueryState<'a> {
    fn new(ctx: &LooContext<'a>, query_id: usize) -> Self {
        let dataset = ctx.dataset;
        let query = dataset.instance(query_id);
        let distances = ctx.metric.distances_from(&query.values, dataset);
        let ranking = NeighborRanking::from_distances(query_id, &distances, &[]);
        let nun = nun_from_distances(query, dataset, &distances, &[]).ok();
        let pool = CandidatePool::same_class(dataset, query);
        let filtered = ctx
            .knn
            .as_ref()
            .map(|knn| pool.knn_filtered(knn, query.label));
        let scorer = MdnScorer::new(query, &pool, dataset, &ctx.config.mdn_config());
        Self {
            query,
            ranking,
            nun,
            pool,
            filtered,
            scorer,
        }
    }

    fn pool_for(&self, ctx: &LooContext<'_>, method: Method) -> &CandidatePool {
        match &self.filtered {
            Some(filtered) if ctx.config.knn_filter.contains(&method) => filtered,
            _ => &self.pool,
        }
    }

    fn run(&self, ctx: &LooContext<'a>, method: Method) -> ResultRow {
        let dataset = ctx.dataset;
        let query = self.query;
        let pool = self.pool_for(ctx, method);
        let selected: Result<SemiFactualResult, String> = match (method, self.nun) {
            (Method::SimMiss, Some(nun)) => Ok(sim_miss(query, pool, nun, dataset)),
            (Method::GlobalSim, Some(nun)) => Ok(global_sim(query, pool, nun, dataset)),
            (Method::AttrSim, Some(nun)) => Ok(attr_sim(query, pool, nun, dataset)),
            (Method::SimMiss | Method::GlobalSim | Method::AttrSim, None) => {
                Err(format!("query {} has no unlike neighbour", query.id))
            }
            (Method::LocalRegion, _) => {
                local_region(query, pool, dataset, &ctx.config.local_region_config())
                    .map_err(|e| e.to_string())
            }
            (Method::Mdn, _) => Ok(mdn(query, pool, dataset, &ctx.config.mdn_config())),
        };

        let (result, mut error) = match selected {
            Ok(r) => (r, None),
            Err(e) => (SemiFactualResult::not_found(query.id, method), Some(e)),
        };
        let metrics = match (result.sf_id, self.nun) {
            (Some(sf_id), Some(nun)) => match ctx.evaluator.evaluate(
                dataset,
                query,
                dataset.instance(sf_id),
                nun,
                &self.ranking,
                &self.scorer,
            ) {
                Ok(record) => Some(record),
                Err(e) => {
                    error = Some(e.to_string());
                    None
                }
            },
            _ => None,
        };
        ResultRow {
            result,
            nun_id: self.nun.map(|n| n.id),
            metrics,
            error,
        }
    }
}

/// Leave-one-out run of every configured method over `dataset`.
pub fn run_loo(dataset: &Dataset, config: &RunConfig) -> Result<LooRun, HarnessError> {
    let ctx = LooContext::new(dataset, config)?;
    let per_query: Vec<Vec<ResultRow>> = if config.workers <= 1 {
        (0..dataset.len()).map(|q| ctx.run_query(q)).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| HarnessError::Config(format!("cannot start worker pool: {e}")))?;
        pool.install(|| {
            (0..dataset.len())
                .into_par_iter()
                .map(|q| ctx.run_query(q))
                .collect()
        })
    };

    let methods = config.methods.clone();
    let mut rows = Vec::with_capacity(dataset.len() * methods.len());
    for index in 0..methods.len() {
        rows.extend(per_query.iter().map(|query_rows| query_rows[index].clone()));
    }
    Ok(LooRun {
        dataset: dataset.name().to_string(),
        methods,
        rows,
    })
}

/// Loads, optionally subsamples, and normalizes the dataset described by a
/// schema spec file.
pub fn prepare_dataset(
    schema_path: &std::path::Path,
    config: &RunConfig,
) -> Result<Dataset, HarnessError> {
    let spec = crate::data::SchemaSpec::from_file(schema_path)?;
    let csv = spec.csv.clone().ok_or_else(|| {
        HarnessError::Config(format!(
            "{}: schema spec has no `csv` entry",
            schema_path.display()
        ))
    })?;
    let mut dataset = crate::data::load_dataset(&csv, &spec)?;
    if let Some(cap) = config.subsample {
        dataset = dataset.stratified_subsample(cap, config.seed)?;
    }
    Ok(normalize(&dataset))
}
