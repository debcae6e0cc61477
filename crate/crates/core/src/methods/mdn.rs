//! Most Distant Neighbour selection and the semi-factual scoring (sfs) function.
//!
//! For a key feature `f`, pool members lying more than `tau_f` above the
//! query form the high set and those more than `tau_f` below form the low
//! set, where `tau_f = tau_factor * stddev(f)`. A member of either set scores
//!
//! ```text
//! sfs = same / F + |q_f - x_f| / max_{s in set} |q_f - s_f|
//! ```
//!
//! with `same` the number of other features within `tau` of the query
//! (categorical: equal) and `F` the feature count. The overall winner is the
//! highest score over every feature and side.

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, FeatureSchema, Instance};
use crate::error::ContractError;

use super::{CandidatePool, Method, SemiFactualResult};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MdnConfig {
    /// Sameness threshold as a fraction of each feature's standard deviation.
    pub tau_factor: f64,
}

impl Default for MdnConfig {
    fn default() -> Self {
        Self { tau_factor: 0.2 }
    }
}

impl MdnConfig {
    /// Per-feature thresholds; 0 for categorical features.
    pub fn thresholds(&self, schema: &[FeatureSchema]) -> Vec<f64> {
        schema
            .iter()
            .map(|f| self.tau_factor * f.stddev())
            .collect()
    }
}

/// Whether `a` and `b` count as the same value of feature `f`.
#[inline]
pub(crate) fn same_value(schema: &[FeatureSchema], taus: &[f64], f: usize, a: f64, b: f64) -> bool {
    if schema[f].is_categorical() {
        a == b
    } else {
        (a - b).abs() <= taus[f]
    }
}

#[inline]
fn sfs(same: usize, feature_count: usize, diff: f64, diff_max: f64) -> f64 {
    let spread = if diff_max > 0.0 { diff / diff_max } else { 0.0 };
    same as f64 / feature_count as f64 + spread
}

/// Scores `candidate` against `query` on `key_feature` within `side_set`
/// (the high or low set holding the candidate).
pub fn sfs_score(
    query: &Instance,
    candidate: &Instance,
    key_feature: usize,
    side_set: &[&Instance],
    schema: &[FeatureSchema],
    config: &MdnConfig,
) -> Result<f64, ContractError> {
    if side_set.is_empty() {
        return Err(ContractError::Violated("sfs side set is empty".into()));
    }
    if key_feature >= schema.len() || schema[key_feature].is_categorical() {
        return Err(ContractError::Violated(format!(
            "key feature {key_feature} is not a numeric feature"
        )));
    }
    if !side_set.iter().any(|x| x.id == candidate.id) {
        return Err(ContractError::Violated(format!(
            "candidate {} is not in the side set",
            candidate.id
        )));
    }
    for x in std::iter::once(query).chain(side_set.iter().copied()) {
        if x.values.len() != schema.len() {
            return Err(ContractError::Dimension {
                expected: schema.len(),
                actual: x.values.len(),
            });
        }
    }
    let taus = config.thresholds(schema);
    let same = (0..schema.len())
        .filter(|&g| g != key_feature)
        .filter(|&g| same_value(schema, &taus, g, query.values[g], candidate.values[g]))
        .count();
    let q = query.values[key_feature];
    let diff_max = side_set
        .iter()
        .map(|x| (q - x.values[key_feature]).abs())
        .fold(0.0, f64::max);
    Ok(sfs(
        same,
        schema.len(),
        (q - candidate.values[key_feature]).abs(),
        diff_max,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    High,
    Low,
}

/// Precomputed sfs ingredients for one query over one pool.
#[derive(Debug, Clone)]
pub struct MdnScorer<'a> {
    dataset: &'a Dataset,
    query: &'a Instance,
    taus: Vec<f64>,
    /// Sameness count over all features, per pool member (pool order).
    same: Vec<usize>,
    members: Vec<usize>,
    /// Per feature: largest |q_f - x_f| in the high and low sets.
    diff_max: Vec<(f64, f64)>,
}

impl<'a> MdnScorer<'a> {
    pub fn new(
        query: &'a Instance,
        pool: &CandidatePool,
        dataset: &'a Dataset,
        config: &MdnConfig,
    ) -> Self {
        let schema = dataset.schema();
        let taus = config.thresholds(schema);
        let mut same = Vec::with_capacity(pool.len());
        let mut diff_max = vec![(0.0f64, 0.0f64); schema.len()];
        for &id in &pool.members {
            let x = &dataset.instance(id).values;
            let mut count = 0;
            for f in 0..schema.len() {
                if same_value(schema, &taus, f, query.values[f], x[f]) {
                    count += 1;
                }
                if schema[f].is_numeric() {
                    match Self::side_of(query.values[f], x[f], taus[f]) {
                        Some(Side::High) => {
                            diff_max[f].0 = diff_max[f].0.max((query.values[f] - x[f]).abs())
                        }
                        Some(Side::Low) => {
                            diff_max[f].1 = diff_max[f].1.max((query.values[f] - x[f]).abs())
                        }
                        None => {}
                    }
                }
            }
            same.push(count);
        }
        Self {
            dataset,
            query,
            taus,
            same,
            members: pool.members.clone(),
            diff_max,
        }
    }

    #[inline]
    fn side_of(q: f64, x: f64, tau: f64) -> Option<Side> {
        if x - q > tau {
            Some(Side::High)
        } else if q - x > tau {
            Some(Side::Low)
        } else {
            None
        }
    }

    /// sfs of the `index`-th pool member on feature `f`, if it sits in a side set.
    /// A member in a side set differs on `f`, so its all-feature sameness
    /// count already excludes the key feature.
    fn score_at(&self, index: usize, f: usize) -> Option<f64> {
        let schema = self.dataset.schema();
        if schema[f].is_categorical() {
            return None;
        }
        let q = self.query.values[f];
        let x = self.dataset.instance(self.members[index]).values[f];
        let diff_max = match Self::side_of(q, x, self.taus[f])? {
            Side::High => self.diff_max[f].0,
            Side::Low => self.diff_max[f].1,
        };
        Some(sfs(self.same[index], schema.len(), (q - x).abs(), diff_max))
    }

    /// Highest-scoring `(score, key_feature, id)`; ties go to the lowest
    /// feature index, then the lowest id.
    pub fn best(&self) -> Option<(f64, usize, usize)> {
        let mut best: Option<(f64, usize, usize)> = None;
        for f in 0..self.dataset.feature_count() {
            for (index, &id) in self.members.iter().enumerate() {
                let Some(score) = self.score_at(index, f) else {
                    continue;
                };
                let better = match best {
                    None => true,
                    Some((s, bf, bid)) => score > s || (score == s && (f, id) < (bf, bid)),
                };
                if better {
                    best = Some((score, f, id));
                }
            }
        }
        best
    }

    /// Best sfs of pool member `id` over every feature whose side set holds it.
    pub fn best_for(&self, id: usize) -> Option<f64> {
        let index = self.members.binary_search(&id).ok()?;
        (0..self.dataset.feature_count())
            .filter_map(|f| self.score_at(index, f))
            .reduce(f64::max)
    }
}

/// Most Distant Neighbour semi-factual.
pub fn mdn(
    query: &Instance,
    pool: &CandidatePool,
    dataset: &Dataset,
    config: &MdnConfig,
) -> SemiFactualResult {
    match MdnScorer::new(query, pool, dataset, config).best() {
        Some((score, feature, id)) => SemiFactualResult {
            key_feature: Some(feature),
            ..SemiFactualResult::found(query.id, Method::Mdn, id, score)
        },
        None => SemiFactualResult::not_found(query.id, Method::Mdn),
    }
}
