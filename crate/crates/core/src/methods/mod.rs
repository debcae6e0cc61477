//! Semi-factual selection methods.
//!
//! Each method picks, for a query, an instance from the query's own class
//! (the candidate pool) that serves as an "even if" explanation. Methods are
//! pure functions of the query, the pool and the (immutable) dataset.

mod kleor;
mod local_region;
pub(crate) mod mdn;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Instance, Label};
use crate::geometry::{by_distance_then_id, FeatureMetric};

pub use kleor::{attr_sim, between_count, global_sim, sim_miss};
pub use local_region::{fit_local_surrogate, local_neighborhood, local_region, LocalRegionConfig};
pub use mdn::{mdn, sfs_score, MdnConfig, MdnScorer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    SimMiss,
    GlobalSim,
    AttrSim,
    LocalRegion,
    Mdn,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::SimMiss,
        Method::GlobalSim,
        Method::AttrSim,
        Method::LocalRegion,
        Method::Mdn,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::SimMiss => "sim_miss",
            Method::GlobalSim => "global_sim",
            Method::AttrSim => "attr_sim",
            Method::LocalRegion => "local_region",
            Method::Mdn => "mdn",
        }
    }

    /// The three NUN-guided variants.
    pub fn is_kleor(self) -> bool {
        matches!(self, Method::SimMiss | Method::GlobalSim | Method::AttrSim)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == key || m.as_str().replace('_', "") == key)
            .ok_or_else(|| format!("unknown method `{s}` (expected one of sim_miss, global_sim, attr_sim, local_region, mdn)"))
    }
}

/// The chosen semi-factual for one (query, method) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemiFactualResult {
    pub query_id: usize,
    pub method: Method,
    pub found: bool,
    pub sf_id: Option<usize>,
    /// Selection score: distance to the NUN for Sim-Miss and Global-Sim, the
    /// between-ness count for Attr-Sim, surrogate probability for
    /// Local-Region and the sfs value for MDN.
    pub score: Option<f64>,
    /// Feature on which the MDN winner was selected.
    pub key_feature: Option<usize>,
    /// Local-Region only: no candidate reached probability 0.5, so the
    /// highest-probability candidate was returned.
    pub boundary_crossing: bool,
}

impl SemiFactualResult {
    pub fn not_found(query_id: usize, method: Method) -> Self {
        Self {
            query_id,
            method,
            found: false,
            sf_id: None,
            score: None,
            key_feature: None,
            boundary_crossing: false,
        }
    }

    fn found(query_id: usize, method: Method, sf_id: usize, score: f64) -> Self {
        Self {
            query_id,
            method,
            found: true,
            sf_id: Some(sf_id),
            score: Some(score),
            key_feature: None,
            boundary_crossing: false,
        }
    }
}

/// Same-class instances eligible as semi-factuals for one query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidatePool {
    pub query_id: usize,
    /// Ascending ids.
    pub members: Vec<usize>,
}

impl CandidatePool {
    /// Every instance sharing the query's label, except the query itself.
    pub fn same_class(dataset: &Dataset, query: &Instance) -> Self {
        Self {
            query_id: query.id,
            members: dataset
                .class_members(query.label)
                .map(|x| x.id)
                .filter(|&id| id != query.id)
                .collect(),
        }
    }

    pub fn from_members(query_id: usize, mut members: Vec<usize>) -> Self {
        members.sort_unstable();
        members.dedup();
        members.retain(|&id| id != query_id);
        Self { query_id, members }
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    /// Keeps only members the k-NN base model, trained without the query,
    /// assigns to `label`. An empty result falls back to the unfiltered pool.
    pub fn knn_filtered(&self, model: &KnnModel, label: Label) -> Self {
        let members: Vec<usize> = self
            .members
            .iter()
            .copied()
            .filter(|&id| model.agrees(id, self.query_id, label))
            .collect();
        if members.is_empty() {
            return self.clone();
        }
        Self {
            query_id: self.query_id,
            members,
        }
    }
}

/// Leave-one-out k-NN classifier used as the base model behind the
/// candidate filter.
///
/// For every instance the `k + 1` nearest other instances are cached, which
/// is enough to classify it with any one further instance (the query)
/// removed.
#[derive(Debug, Clone)]
pub struct KnnModel {
    k: usize,
    labels: Vec<Label>,
    neighbors: Vec<Vec<usize>>,
}

impl KnnModel {
    pub fn fit(dataset: &Dataset, k: usize) -> Self {
        let metric = FeatureMetric::new(dataset.schema());
        let keep = k + 1;
        let neighbors = dataset
            .instances()
            .iter()
            .map(|x| {
                let mut best: Vec<(f64, usize)> = Vec::with_capacity(keep + 1);
                for y in dataset.instances() {
                    if y.id == x.id {
                        continue;
                    }
                    let candidate = (metric.distance(&x.values, &y.values), y.id);
                    let at = best.partition_point(|&b| by_distance_then_id(b, candidate).is_lt());
                    if at < keep {
                        best.insert(at, candidate);
                        best.truncate(keep);
                    }
                }
                best.into_iter().map(|(_, id)| id).collect()
            })
            .collect();
        Self {
            k,
            labels: dataset.instances().iter().map(|x| x.label).collect(),
            neighbors,
        }
    }

    /// Whether the vote of `id`'s k nearest neighbours, with `excluded`
    /// removed from the training data, is at least as strong for `label` as
    /// against it.
    pub fn agrees(&self, id: usize, excluded: usize, label: Label) -> bool {
        let (mut votes_for, mut votes_against) = (0usize, 0usize);
        for &n in self.neighbors[id]
            .iter()
            .filter(|&&n| n != excluded)
            .take(self.k)
        {
            if self.labels[n] == label {
                votes_for += 1;
            } else {
                votes_against += 1;
            }
        }
        votes_for >= votes_against
    }
}

/// Distances from `target` to each pool member, paired with the member id.
pub(crate) fn pool_distances(
    metric: &FeatureMetric,
    dataset: &Dataset,
    pool: &CandidatePool,
    target: &Instance,
) -> Vec<(f64, usize)> {
    pool.members
        .iter()
        .map(|&id| {
            (
                metric.distance(&dataset.instance(id).values, &target.values),
                id,
            )
        })
        .collect()
}
