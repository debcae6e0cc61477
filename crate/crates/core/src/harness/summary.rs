//! Per-dataset aggregation and cross-dataset mean ranks.

use serde::{Deserialize, Serialize};

use crate::error::ContractError;
use crate::methods::Method;
use crate::metrics::{Direction, Metric, SparsityBin};

use super::report::round_reported;
use super::LooRun;

/// Aggregates of one method on one dataset.
///
/// Means cover only queries whose SF was found and scored; coverage counts
/// every query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: Method,
    pub queries: usize,
    pub found: usize,
    pub coverage_pct: f64,
    pub q_sf_distance: f64,
    pub q_sf_knn_pct: f64,
    pub sf_class_distance: f64,
    pub sf_nun_distance: f64,
    pub mdn_distance: f64,
    /// Percentages of scored SFs in bins 1, 2 and 3+.
    pub sparsity_pct: [f64; 3],
    pub boundary_crossings: usize,
    pub errors: usize,
}

impl MethodSummary {
    /// The value ranked for `metric`; sparsity is ranked by its one-difference share.
    pub fn value(&self, metric: Metric) -> f64 {
        match metric {
            Metric::QSfDistance => self.q_sf_distance,
            Metric::QSfKnnPct => self.q_sf_knn_pct,
            Metric::SfClassDistance => self.sf_class_distance,
            Metric::SfNunDistance => self.sf_nun_distance,
            Metric::MdnDistance => self.mdn_distance,
            Metric::Sparsity => self.sparsity_pct[0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub dataset: String,
    pub methods: Vec<MethodSummary>,
}

impl DatasetSummary {
    pub fn method(&self, method: Method) -> Option<&MethodSummary> {
        self.methods.iter().find(|s| s.method == method)
    }
}

pub fn summarize(run: &LooRun) -> DatasetSummary {
    let methods = run
        .methods
        .iter()
        .map(|&method| {
            let mut queries = 0;
            let mut found = 0;
            let mut boundary_crossings = 0;
            let mut errors = 0;
            let mut sums = [0.0; 5];
            let mut bins = [0usize; 3];
            let mut scored = 0usize;
            for row in run.rows_for(method) {
                queries += 1;
                found += usize::from(row.result.found);
                boundary_crossings += usize::from(row.result.boundary_crossing);
                errors += usize::from(row.error.is_some());
                if let Some(m) = &row.metrics {
                    scored += 1;
                    for (sum, v) in sums.iter_mut().zip([
                        m.q_sf_distance,
                        m.q_sf_knn_pct,
                        m.sf_class_distance,
                        m.sf_nun_distance,
                        m.mdn_distance,
                    ]) {
                        *sum += v;
                    }
                    let bin = SparsityBin::ALL.iter().position(|&b| b == m.sparsity_bin);
                    bins[bin.expect("bin listed in ALL")] += 1;
                }
            }
            let mean = |s: f64| {
                if scored == 0 {
                    f64::NAN
                } else {
                    s / scored as f64
                }
            };
            let pct = |n: usize| {
                if scored == 0 {
                    f64::NAN
                } else {
                    100.0 * n as f64 / scored as f64
                }
            };
            MethodSummary {
                method,
                queries,
                found,
                coverage_pct: if queries == 0 {
                    f64::NAN
                } else {
                    100.0 * found as f64 / queries as f64
                },
                q_sf_distance: mean(sums[0]),
                q_sf_knn_pct: mean(sums[1]),
                sf_class_distance: mean(sums[2]),
                sf_nun_distance: mean(sums[3]),
                mdn_distance: mean(sums[4]),
                sparsity_pct: [pct(bins[0]), pct(bins[1]), pct(bins[2])],
                boundary_crossings,
                errors,
            }
        })
        .collect();
    DatasetSummary {
        dataset: run.dataset.clone(),
        methods,
    }
}

/// Ranks of the methods on every metric, per dataset and averaged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankTable {
    pub methods: Vec<Method>,
    pub datasets: Vec<String>,
    /// Ranked values, indexed `[dataset][metric][method]`, metrics in `Metric::ALL` order.
    pub values: Vec<Vec<Vec<f64>>>,
    /// Ranks (1 = best, ties averaged), same indexing as `values`.
    pub ranks: Vec<Vec<Vec<f64>>>,
    /// Mean rank over datasets, indexed `[metric][method]`.
    pub mean: Vec<Vec<f64>>,
}

impl RankTable {
    /// Ranks already-collected values. Values are compared as reported
    /// (9 significant digits), so a table rebuilt from the rank CSV is
    /// identical to the one that produced it.
    pub fn from_values(
        methods: Vec<Method>,
        datasets: Vec<String>,
        values: Vec<Vec<Vec<f64>>>,
    ) -> Result<Self, ContractError> {
        if datasets.is_empty() || values.len() != datasets.len() {
            return Err(ContractError::Violated(
                "rank table needs one value block per dataset and at least one dataset".into(),
            ));
        }
        let values: Vec<Vec<Vec<f64>>> = values
            .into_iter()
            .map(|per_metric| {
                per_metric
                    .into_iter()
                    .map(|vs| vs.into_iter().map(round_reported).collect())
                    .collect()
            })
            .collect();
        let mut ranks = Vec::with_capacity(values.len());
        for per_metric in &values {
            if per_metric.len() != Metric::ALL.len()
                || per_metric
                    .iter()
                    .any(|vs: &Vec<f64>| vs.len() != methods.len())
            {
                return Err(ContractError::Dimension {
                    expected: methods.len(),
                    actual: per_metric.first().map_or(0, Vec::len),
                });
            }
            ranks.push(
                Metric::ALL
                    .iter()
                    .zip(per_metric)
                    .map(|(m, vs)| rank_values(vs, m.direction()))
                    .collect::<Vec<_>>(),
            );
        }
        let n = datasets.len() as f64;
        let mean = (0..Metric::ALL.len())
            .map(|k| {
                (0..methods.len())
                    .map(|j| ranks.iter().map(|r: &Vec<Vec<f64>>| r[k][j]).sum::<f64>() / n)
                    .collect()
            })
            .collect();
        Ok(Self {
            methods,
            datasets,
            values,
            ranks,
            mean,
        })
    }

    pub fn mean_rank(&self, metric: Metric, method: Method) -> Option<f64> {
        let k = Metric::ALL.iter().position(|&m| m == metric)?;
        let j = self.methods.iter().position(|&m| m == method)?;
        Some(self.mean[k][j])
    }

    pub fn rank(&self, dataset: usize, metric: Metric, method: Method) -> Option<f64> {
        let k = Metric::ALL.iter().position(|&m| m == metric)?;
        let j = self.methods.iter().position(|&m| m == method)?;
        Some(self.ranks.get(dataset)?[k][j])
    }
}

/// 1-based ranks in the better-first order of `direction`; ties share the
/// average of the positions they span. NaN (no scored SF) ranks worst.
pub fn rank_values(values: &[f64], direction: Direction) -> Vec<f64> {
    let key = |v: f64| match (v.is_nan(), direction) {
        (true, _) => f64::INFINITY,
        (false, Direction::LowerBetter) => v,
        (false, Direction::HigherBetter) => -v,
    };
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| key(values[a]).total_cmp(&key(values[b])));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let k = key(values[order[start]]);
        let mut end = start + 1;
        while end < order.len() && key(values[order[end]]) == k {
            end += 1;
        }
        // positions start+1 ..= end
        let shared = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = shared;
        }
        start = end;
    }
    ranks
}

/// Cross-dataset mean ranks; every summary must cover the same methods.
pub fn mean_ranks(summaries: &[DatasetSummary]) -> Result<RankTable, ContractError> {
    let first = summaries
        .first()
        .ok_or_else(|| ContractError::Violated("mean ranks need at least one summary".into()))?;
    let methods: Vec<Method> = first.methods.iter().map(|s| s.method).collect();
    let mut sorted = methods.clone();
    sorted.sort();
    let mut values = Vec::with_capacity(summaries.len());
    for summary in summaries {
        let mut theirs: Vec<Method> = summary.methods.iter().map(|s| s.method).collect();
        theirs.sort();
        if theirs != sorted {
            return Err(ContractError::Violated(format!(
                "dataset `{}` covers methods {:?}, expected {:?}",
                summary.dataset, theirs, sorted
            )));
        }
        values.push(
            Metric::ALL
                .iter()
                .map(|&metric| {
                    methods
                        .iter()
                        .map(|&m| summary.method(m).expect("checked above").value(metric))
                        .collect()
                })
                .collect(),
        );
    }
    RankTable::from_values(
        methods,
        summaries.iter().map(|s| s.dataset.clone()).collect(),
        values,
    )
}
