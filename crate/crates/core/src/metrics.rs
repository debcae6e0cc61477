//! Evaluation measures for a (query, semi-factual) pair.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, FeatureSchema, Instance};
use crate::error::ContractError;
use crate::geometry::{ClassDistribution, FeatureMetric, NeighborRanking, DEFAULT_RIDGE};
use crate::methods::mdn::same_value;
use crate::methods::{CandidatePool, MdnConfig, MdnScorer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SparsityBin {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "3+")]
    ThreePlus,
}

impl SparsityBin {
    pub const ALL: [SparsityBin; 3] = [SparsityBin::One, SparsityBin::Two, SparsityBin::ThreePlus];

    /// Counts of 0 (a duplicate of the query) fall into the first bin.
    pub fn from_count(count: usize) -> Self {
        match count {
            0 | 1 => SparsityBin::One,
            2 => SparsityBin::Two,
            _ => SparsityBin::ThreePlus,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SparsityBin::One => "1",
            SparsityBin::Two => "2",
            SparsityBin::ThreePlus => "3+",
        }
    }
}

impl fmt::Display for SparsityBin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub q_sf_distance: f64,
    pub q_sf_knn_pct: f64,
    /// Mahalanobis distance of the SF to the query's class.
    pub sf_class_distance: f64,
    pub sf_nun_distance: f64,
    /// Best sfs of the SF over every key feature whose side set holds it;
    /// 0 when the SF is within tau of the query on every numeric feature.
    pub mdn_distance: f64,
    pub sparsity_count: usize,
    pub sparsity_bin: SparsityBin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    HigherBetter,
    LowerBetter,
}

/// The six benchmark measures, as ranked in the summary tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    QSfDistance,
    QSfKnnPct,
    SfClassDistance,
    SfNunDistance,
    MdnDistance,
    /// Ranked by the percentage of SFs in the one-difference bin.
    Sparsity,
}

impl Metric {
    pub const ALL: [Metric; 6] = [
        Metric::QSfDistance,
        Metric::QSfKnnPct,
        Metric::SfClassDistance,
        Metric::SfNunDistance,
        Metric::MdnDistance,
        Metric::Sparsity,
    ];

    pub fn direction(self) -> Direction {
        match self {
            Metric::QSfDistance | Metric::QSfKnnPct | Metric::MdnDistance | Metric::Sparsity => {
                Direction::HigherBetter
            }
            Metric::SfClassDistance | Metric::SfNunDistance => Direction::LowerBetter,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::QSfDistance => "q_sf_distance",
            Metric::QSfKnnPct => "q_sf_knn_pct",
            Metric::SfClassDistance => "sf_class_distance",
            Metric::SfNunDistance => "sf_nun_distance",
            Metric::MdnDistance => "mdn_distance",
            Metric::Sparsity => "sparsity",
        }
    }

    pub fn parse(s: &str) -> Option<Metric> {
        Metric::ALL.into_iter().find(|m| m.as_str() == s)
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Percentage of ranked instances strictly ahead of the SF.
pub fn q_sf_knn_pct(sf_id: usize, ranking: &NeighborRanking) -> Result<f64, ContractError> {
    let position = ranking.position(sf_id).ok_or_else(|| {
        ContractError::Violated(format!(
            "sf {sf_id} is not in the neighbour ranking of query {}",
            ranking.query_id
        ))
    })?;
    Ok(100.0 * position as f64 / ranking.len() as f64)
}

/// Number of features on which the SF differs from the query beyond the
/// sameness threshold, falling back to exact inequality when that count is 0.
pub fn sparsity(
    query: &Instance,
    sf: &Instance,
    schema: &[FeatureSchema],
    config: &MdnConfig,
) -> (usize, SparsityBin) {
    let taus = config.thresholds(schema);
    let mut count = (0..schema.len())
        .filter(|&f| !same_value(schema, &taus, f, query.values[f], sf.values[f]))
        .count();
    if count == 0 {
        count = query
            .values
            .iter()
            .zip(&sf.values)
            .filter(|(a, b)| a != b)
            .count();
    }
    (count, SparsityBin::from_count(count))
}

/// Per-dataset state shared by every evaluation: the metric and the two
/// class distributions.
#[derive(Debug, Clone)]
pub struct Evaluator {
    metric: FeatureMetric,
    classes: [ClassDistribution; 2],
    mdn: MdnConfig,
}

impl Evaluator {
    pub fn new(dataset: &Dataset, mdn: MdnConfig, ridge: f64) -> Result<Self, ContractError> {
        let schema = dataset.schema();
        Ok(Self {
            metric: FeatureMetric::new(schema),
            classes: [
                ClassDistribution::fit(dataset.class_members(0), schema, ridge)?,
                ClassDistribution::fit(dataset.class_members(1), schema, ridge)?,
            ],
            mdn,
        })
    }

    /// `ranking` is the query's leave-one-out ranking and `scorer` the sfs
    /// state over the query's unfiltered same-class pool.
    pub fn evaluate(
        &self,
        dataset: &Dataset,
        query: &Instance,
        sf: &Instance,
        nun: &Instance,
        ranking: &NeighborRanking,
        scorer: &MdnScorer<'_>,
    ) -> Result<MetricsRecord, ContractError> {
        let (sparsity_count, sparsity_bin) = sparsity(query, sf, dataset.schema(), &self.mdn);
        Ok(MetricsRecord {
            q_sf_distance: self.metric.distance(&query.values, &sf.values),
            q_sf_knn_pct: q_sf_knn_pct(sf.id, ranking)?,
            sf_class_distance: self.classes[query.label as usize].distance(&sf.values)?,
            sf_nun_distance: self.metric.distance(&sf.values, &nun.values),
            mdn_distance: scorer.best_for(sf.id).unwrap_or(0.0),
            sparsity_count,
            sparsity_bin,
        })
    }
}

/// Evaluates one pair from scratch.
pub fn evaluate_pair(
    query: &Instance,
    sf: &Instance,
    nun: &Instance,
    dataset: &Dataset,
    mdn_config: &MdnConfig,
) -> Result<MetricsRecord, ContractError> {
    let evaluator = Evaluator::new(dataset, *mdn_config, DEFAULT_RIDGE)?;
    let metric = FeatureMetric::new(dataset.schema());
    let ranking = NeighborRanking::from_distances(
        query.id,
        &metric.distances_from(&query.values, dataset),
        &[],
    );
    let pool = CandidatePool::same_class(dataset, query);
    let scorer = MdnScorer::new(query, &pool, dataset, mdn_config);
    evaluator.evaluate(dataset, query, sf, nun, &ranking, &scorer)
}
