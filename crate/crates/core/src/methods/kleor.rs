//! NUN-guided selection: Sim-Miss, Global-Sim and Attr-Sim.

use crate::data::{Dataset, Instance};
use crate::geometry::{by_distance_then_id, FeatureMetric};

use super::{pool_distances, CandidatePool, Method, SemiFactualResult};

/// Pool member closest to the NUN.
pub fn sim_miss(
    query: &Instance,
    pool: &CandidatePool,
    nun: &Instance,
    dataset: &Dataset,
) -> SemiFactualResult {
    let metric = FeatureMetric::new(dataset.schema());
    pool_distances(&metric, dataset, pool, nun)
        .into_iter()
        .min_by(|&a, &b| by_distance_then_id(a, b))
        .map_or_else(
            || SemiFactualResult::not_found(query.id, Method::SimMiss),
            |(d, id)| SemiFactualResult::found(query.id, Method::SimMiss, id, d),
        )
}

/// Pool member closest to the NUN among those strictly closer to the query
/// than the NUN is.
pub fn global_sim(
    query: &Instance,
    pool: &CandidatePool,
    nun: &Instance,
    dataset: &Dataset,
) -> SemiFactualResult {
    let metric = FeatureMetric::new(dataset.schema());
    let bound = metric.distance(&query.values, &nun.values);
    pool_distances(&metric, dataset, pool, nun)
        .into_iter()
        .filter(|&(_, id)| metric.distance(&query.values, &dataset.instance(id).values) < bound)
        .min_by(|&a, &b| by_distance_then_id(a, b))
        .map_or_else(
            || SemiFactualResult::not_found(query.id, Method::GlobalSim),
            |(d, id)| SemiFactualResult::found(query.id, Method::GlobalSim, id, d),
        )
}

/// Number of features on which `candidate` lies strictly closer to the query
/// than the NUN does. A categorical feature counts when the candidate keeps
/// the query's value and the NUN does not.
pub fn between_count(
    query: &[f64],
    candidate: &[f64],
    nun: &[f64],
    metric: &FeatureMetric,
) -> usize {
    (0..metric.dimension())
        .filter(|&f| metric.term(f, query[f], candidate[f]) < metric.term(f, query[f], nun[f]))
        .count()
}

/// Pool member with the most features between query and NUN; ties go to the
/// member closest to the NUN, then the lowest id.
pub fn attr_sim(
    query: &Instance,
    pool: &CandidatePool,
    nun: &Instance,
    dataset: &Dataset,
) -> SemiFactualResult {
    let metric = FeatureMetric::new(dataset.schema());
    pool_distances(&metric, dataset, pool, nun)
        .into_iter()
        .map(|(d, id)| {
            let count = between_count(
                &query.values,
                &dataset.instance(id).values,
                &nun.values,
                &metric,
            );
            (count, d, id)
        })
        .min_by(|a, b| {
            b.0.cmp(&a.0)
                .then(by_distance_then_id((a.1, a.2), (b.1, b.2)))
        })
        .map_or_else(
            || SemiFactualResult::not_found(query.id, Method::AttrSim),
            |(count, _, id)| SemiFactualResult::found(query.id, Method::AttrSim, id, count as f64),
        )
}
