//! Local-Region selection with a logistic-regression surrogate.
//!
//! The surrogate is trained on the `per_class_min` nearest instances of each
//! class around the query (the whole class when it is smaller) and predicts
//! membership of the query's class. Candidates are the query-class half of
//! that local set; the winner is the candidate with the lowest probability
//! that is still at least 0.5.

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Instance};
use crate::error::MethodError;
use crate::geometry::{by_distance_then_id, covariance_embedding, FeatureMetric};
use crate::surrogate::{fit_logistic, LogisticConfig, LogisticModel};

use super::{CandidatePool, Method, SemiFactualResult};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalRegionConfig {
    pub per_class_min: usize,
    #[serde(default)]
    pub logistic: LogisticConfig,
}

impl Default for LocalRegionConfig {
    fn default() -> Self {
        Self {
            per_class_min: 200,
            logistic: LogisticConfig::default(),
        }
    }
}

/// Ids of the `per_class` nearest instances of each class, query excluded.
pub fn local_neighborhood(query: &Instance, dataset: &Dataset, per_class: usize) -> Vec<usize> {
    let metric = FeatureMetric::new(dataset.schema());
    let mut ids = Vec::new();
    for label in [0, 1] {
        let mut class: Vec<(f64, usize)> = dataset
            .class_members(label)
            .filter(|x| x.id != query.id)
            .map(|x| (metric.distance(&query.values, &x.values), x.id))
            .collect();
        class.sort_unstable_by(|&a, &b| by_distance_then_id(a, b));
        ids.extend(class.into_iter().take(per_class).map(|(_, id)| id));
    }
    ids.sort_unstable();
    ids
}

/// Fits the local surrogate for `query`. Inputs use the same embedding as the
/// class covariance: numeric values as-is, categorical indices scaled to [0, 1].
pub fn fit_local_surrogate(
    query: &Instance,
    dataset: &Dataset,
    config: &LocalRegionConfig,
) -> Result<(LogisticModel, Vec<usize>), MethodError> {
    let local = local_neighborhood(query, dataset, config.per_class_min);
    let rows: Vec<Vec<f64>> = local
        .iter()
        .map(|&id| embed(dataset, &dataset.instance(id).values))
        .collect();
    let row_refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
    let labels: Vec<bool> = local
        .iter()
        .map(|&id| dataset.instance(id).label == query.label)
        .collect();
    let model = fit_logistic(&row_refs, &labels, &config.logistic)?;
    Ok((model, local))
}

pub(crate) fn embed(dataset: &Dataset, values: &[f64]) -> Vec<f64> {
    covariance_embedding(values, dataset.schema())
        .as_slice()
        .to_vec()
}

pub fn local_region(
    query: &Instance,
    pool: &CandidatePool,
    dataset: &Dataset,
    config: &LocalRegionConfig,
) -> Result<SemiFactualResult, MethodError> {
    if pool.is_empty() {
        return Ok(SemiFactualResult::not_found(query.id, Method::LocalRegion));
    }
    let (model, local) = fit_local_surrogate(query, dataset, config)?;

    let mut candidates: Vec<usize> = pool
        .members
        .iter()
        .copied()
        .filter(|id| local.binary_search(id).is_ok())
        .collect();
    if candidates.is_empty() {
        candidates = pool.members.clone();
    }

    let scored: Vec<(f64, usize)> = candidates
        .iter()
        .map(|&id| {
            let x = embed(dataset, &dataset.instance(id).values);
            model.predict_proba(&x).map(|p| (p, id))
        })
        .collect::<Result<_, _>>()?;

    let inside = scored
        .iter()
        .copied()
        .filter(|&(p, _)| p >= 0.5)
        .min_by(|&a, &b| by_distance_then_id(a, b));
    let result = match inside {
        Some((p, id)) => SemiFactualResult::found(query.id, Method::LocalRegion, id, p),
        None => {
            let (p, id) = scored
                .iter()
                .copied()
                .min_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)))
                .expect("candidate list is non-empty");
            SemiFactualResult {
                boundary_crossing: true,
                ..SemiFactualResult::found(query.id, Method::LocalRegion, id, p)
            }
        }
    };
    Ok(result)
}
