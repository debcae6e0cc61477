//! Heterogeneous Euclidean distance, neighbour ranking, nearest unlike
//! neighbours and ridge-regularised Mahalanobis distance.
//!
//! Numeric features contribute `|a - b|` (values are expected to be min-max
//! normalized), categorical features contribute 0 on a match and 1 otherwise.
//! The per-feature terms are combined with an L2 norm. Every tie is broken
//! by the lower instance id.

use std::cmp::Ordering;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::data::{Dataset, FeatureKind, FeatureSchema, Instance};
use crate::error::{ContractError, DomainError};

/// Ridge added to the covariance diagonal before inversion.
pub const DEFAULT_RIDGE: f64 = 1e-6;

/// Distance over a fixed schema.
#[derive(Debug, Clone)]
pub struct FeatureMetric {
    categorical: Vec<bool>,
}

impl FeatureMetric {
    pub fn new(schema: &[FeatureSchema]) -> Self {
        Self {
            categorical: schema.iter().map(FeatureSchema::is_categorical).collect(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.categorical.len()
    }

    /// Per-feature difference term: `|a - b|` or a 0/1 mismatch.
    #[inline]
    pub fn term(&self, feature: usize, a: f64, b: f64) -> f64 {
        if self.categorical[feature] {
            if a == b {
                0.0
            } else {
                1.0
            }
        } else {
            (a - b).abs()
        }
    }

    /// Unchecked distance; `a` and `b` must both have `dimension()` values.
    #[inline]
    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), self.categorical.len());
        debug_assert_eq!(b.len(), self.categorical.len());
        let mut sum = 0.0;
        for (f, (&x, &y)) in a.iter().zip(b).enumerate() {
            let t = self.term(f, x, y);
            sum += t * t;
        }
        sum.sqrt()
    }

    /// Distance from `query` to every instance, indexed by id.
    pub fn distances_from(&self, query: &[f64], dataset: &Dataset) -> Vec<f64> {
        dataset
            .instances()
            .iter()
            .map(|x| self.distance(query, &x.values))
            .collect()
    }
}

/// Checked L2 distance between two instances under `schema`.
pub fn distance(
    a: &Instance,
    b: &Instance,
    schema: &[FeatureSchema],
) -> Result<f64, ContractError> {
    for x in [a, b] {
        if x.values.len() != schema.len() {
            return Err(ContractError::Dimension {
                expected: schema.len(),
                actual: x.values.len(),
            });
        }
    }
    Ok(FeatureMetric::new(schema).distance(&a.values, &b.values))
}

/// Orders `(distance, id)` pairs ascending with the id as tie-breaker.
#[inline]
pub fn by_distance_then_id(a: (f64, usize), b: (f64, usize)) -> Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
}

/// Every non-excluded instance other than the query, nearest first.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborRanking {
    pub query_id: usize,
    pub ordered: Vec<(usize, f64)>,
}

impl NeighborRanking {
    /// Builds a ranking from a precomputed distance row.
    pub fn from_distances(query_id: usize, distances: &[f64], exclude: &[usize]) -> Self {
        let mut ordered: Vec<(usize, f64)> = distances
            .iter()
            .enumerate()
            .filter(|&(id, _)| id != query_id && !exclude.contains(&id))
            .map(|(id, &d)| (id, d))
            .collect();
        ordered.sort_unstable_by(|a, b| by_distance_then_id((a.1, a.0), (b.1, b.0)));
        Self { query_id, ordered }
    }

    pub fn len(&self) -> usize {
        self.ordered.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ordered.is_empty()
    }

    /// 0-based rank of `id`, if present.
    pub fn position(&self, id: usize) -> Option<usize> {
        self.ordered.iter().position(|&(x, _)| x == id)
    }
}

/// Ranks all instances (bar the query and `exclude`) by distance to `query`.
pub fn rank_neighbors(query: &Instance, dataset: &Dataset, exclude: &[usize]) -> NeighborRanking {
    let metric = FeatureMetric::new(dataset.schema());
    let distances = metric.distances_from(&query.values, dataset);
    NeighborRanking::from_distances(query.id, &distances, exclude)
}

/// Nearest instance with a label different from the query's.
pub fn nun<'a>(
    query: &Instance,
    dataset: &'a Dataset,
    exclude: &[usize],
) -> Result<&'a Instance, DomainError> {
    let metric = FeatureMetric::new(dataset.schema());
    let distances = metric.distances_from(&query.values, dataset);
    nun_from_distances(query, dataset, &distances, exclude)
}

/// [`nun`] over a precomputed distance row.
pub fn nun_from_distances<'a>(
    query: &Instance,
    dataset: &'a Dataset,
    distances: &[f64],
    exclude: &[usize],
) -> Result<&'a Instance, DomainError> {
    dataset
        .instances()
        .iter()
        .filter(|x| x.id != query.id && x.label != query.label && !exclude.contains(&x.id))
        .min_by(|a, b| by_distance_then_id((distances[a.id], a.id), (distances[b.id], b.id)))
        .ok_or(DomainError::NoUnlikeNeighbor { query_id: query.id })
}

/// Embeds an instance for covariance estimation: numeric values as-is,
/// categorical indices scaled to `[0, 1]` by the category count.
pub fn covariance_embedding(values: &[f64], schema: &[FeatureSchema]) -> DVector<f64> {
    DVector::from_iterator(
        values.len(),
        values.iter().zip(schema).map(|(&v, f)| match &f.kind {
            FeatureKind::Numeric { .. } => v,
            FeatureKind::Categorical { categories } if categories.len() > 1 => {
                v / (categories.len() - 1) as f64
            }
            FeatureKind::Categorical { .. } => 0.0,
        }),
    )
}

/// Mean and regularised inverse covariance of one class.
#[derive(Debug, Clone)]
pub struct ClassDistribution {
    mean: DVector<f64>,
    cholesky: Cholesky<f64, Dyn>,
    schema: Vec<FeatureSchema>,
}

impl ClassDistribution {
    /// Fits the population mean and covariance of `members`, adding `ridge`
    /// to the diagonal.
    pub fn fit<'a>(
        members: impl IntoIterator<Item = &'a Instance>,
        schema: &[FeatureSchema],
        ridge: f64,
    ) -> Result<Self, ContractError> {
        if !(ridge > 0.0) {
            return Err(ContractError::Violated(format!(
                "ridge must be positive, got {ridge}"
            )));
        }
        let dim = schema.len();
        let mut rows = Vec::new();
        for x in members {
            if x.values.len() != dim {
                return Err(ContractError::Dimension {
                    expected: dim,
                    actual: x.values.len(),
                });
            }
            rows.push(covariance_embedding(&x.values, schema));
        }
        if rows.is_empty() {
            return Err(ContractError::Violated("class has no members".into()));
        }
        let n = rows.len() as f64;
        let mean = rows.iter().fold(DVector::zeros(dim), |acc, r| acc + r) / n;
        let mut cov = DMatrix::zeros(dim, dim);
        for r in &rows {
            let d = r - &mean;
            cov.ger(1.0 / n, &d, &d, 1.0);
        }
        for i in 0..dim {
            cov[(i, i)] += ridge;
        }
        let cholesky = Cholesky::new(cov).ok_or_else(|| {
            ContractError::Violated("regularised covariance is not positive definite".into())
        })?;
        Ok(Self {
            mean,
            cholesky,
            schema: schema.to_vec(),
        })
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn distance(&self, point: &[f64]) -> Result<f64, ContractError> {
        if point.len() != self.mean.len() {
            return Err(ContractError::Dimension {
                expected: self.mean.len(),
                actual: point.len(),
            });
        }
        let deviation = covariance_embedding(point, &self.schema) - &self.mean;
        let solved = self.cholesky.solve(&deviation);
        Ok(deviation.dot(&solved).max(0.0).sqrt())
    }
}

/// Mahalanobis distance from `point` to the distribution of `class_members`.
pub fn mahalanobis(
    point: &Instance,
    class_members: &[&Instance],
    schema: &[FeatureSchema],
    ridge: f64,
) -> Result<f64, ContractError> {
    ClassDistribution::fit(class_members.iter().copied(), schema, ridge)?.distance(&point.values)
}
