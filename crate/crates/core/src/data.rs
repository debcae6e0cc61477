//! Tabular dataset ingestion, validation and min-max normalization.
//!
//! A dataset is read from a CSV file with a header row and a small TOML
//! schema spec that declares every feature's kind and the positive label:
//!
//! ```toml
//! name = "toy"
//! csv = "toy.csv"          # resolved relative to the schema file
//! label = "class"
//! positive_label = "yes"
//!
//! [[features]]
//! name = "age"
//! kind = "numeric"
//!
//! [[features]]
//! name = "colour"
//! kind = "categorical"
//! categories = ["red", "green"]   # optional; sorted distinct values otherwise
//! ```
//!
//! Categorical values are stored as category indices inside the same `f64`
//! feature vector as numeric values.

use std::collections::{BTreeSet, HashMap};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::DataError;

/// Class label. Always 0 or 1; 1 is the schema's declared positive label.
pub type Label = u8;

const CANONICAL_FORMAT: &str = "semifactual-dataset/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeatureKind {
    Numeric { min: f64, max: f64, stddev: f64 },
    Categorical { categories: Vec<String> },
}

/// One feature column: its name, kind and dataset statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub name: String,
    #[serde(flatten)]
    pub kind: FeatureKind,
}

impl FeatureSchema {
    /// A numeric feature whose statistics are filled in by [`Dataset::new`].
    pub fn numeric(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            kind: FeatureKind::Numeric {
                min: 0.0,
                max: 0.0,
                stddev: 0.0,
            },
        }
    }

    pub fn categorical<S: Into<String>>(
        name: impl Into<String>,
        categories: impl IntoIterator<Item = S>,
    ) -> Self {
        Self {
            name: name.into(),
            kind: FeatureKind::Categorical {
                categories: categories.into_iter().map(Into::into).collect(),
            },
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self.kind, FeatureKind::Numeric { .. })
    }

    pub fn is_categorical(&self) -> bool {
        !self.is_numeric()
    }

    /// Population standard deviation for numeric features, 0 for categorical.
    pub fn stddev(&self) -> f64 {
        match self.kind {
            FeatureKind::Numeric { stddev, .. } => stddev,
            FeatureKind::Categorical { .. } => 0.0,
        }
    }

    pub fn category_count(&self) -> usize {
        match &self.kind {
            FeatureKind::Categorical { categories } => categories.len(),
            FeatureKind::Numeric { .. } => 0,
        }
    }
}

/// One row of a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    /// Dense index, `0..N`, in file order.
    pub id: usize,
    /// Numeric values or category indices, one per schema feature.
    pub values: Vec<f64>,
    pub label: Label,
}

/// An immutable, validated binary-labelled dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    name: String,
    schema: Vec<FeatureSchema>,
    instances: Vec<Instance>,
}

impl Dataset {
    /// Builds a dataset, checking every invariant and recomputing the numeric
    /// feature statistics from `instances`.
    pub fn new(
        name: impl Into<String>,
        mut schema: Vec<FeatureSchema>,
        instances: Vec<Instance>,
    ) -> Result<Self, DataError> {
        let name = name.into();
        let invalid = |message: String| DataError::Validity {
            name: name.clone(),
            message,
        };

        if schema.is_empty() {
            return Err(invalid("schema has no features".into()));
        }
        for feature in &schema {
            if let FeatureKind::Categorical { categories } = &feature.kind {
                if categories.is_empty() {
                    return Err(invalid(format!(
                        "categorical feature `{}` has no categories",
                        feature.name
                    )));
                }
            }
        }

        let mut class_sizes = [0usize; 2];
        for (position, instance) in instances.iter().enumerate() {
            if instance.id != position {
                return Err(invalid(format!(
                    "instance ids must be dense: found id {} at position {position}",
                    instance.id
                )));
            }
            if instance.values.len() != schema.len() {
                return Err(invalid(format!(
                    "instance {} has {} values, schema has {} features",
                    instance.id,
                    instance.values.len(),
                    schema.len()
                )));
            }
            if instance.label > 1 {
                return Err(invalid(format!(
                    "instance {} has non-binary label {}",
                    instance.id, instance.label
                )));
            }
            class_sizes[instance.label as usize] += 1;
            for (value, feature) in instance.values.iter().zip(&schema) {
                if !value.is_finite() {
                    return Err(invalid(format!(
                        "instance {} has a non-finite value for `{}`",
                        instance.id, feature.name
                    )));
                }
                if let FeatureKind::Categorical { categories } = &feature.kind {
                    if value.fract() != 0.0 || *value < 0.0 || *value >= categories.len() as f64 {
                        return Err(invalid(format!(
                            "instance {} has category index {value} outside `{}`",
                            instance.id, feature.name
                        )));
                    }
                }
            }
        }
        for (label, size) in class_sizes.iter().enumerate() {
            if *size < 2 {
                return Err(invalid(format!(
                    "class {label} has {size} instance(s); at least 2 per class are required"
                )));
            }
        }

        for (index, feature) in schema.iter_mut().enumerate() {
            if feature.is_numeric() {
                feature.kind = numeric_stats(instances.iter().map(|x| x.values[index]));
            }
        }

        Ok(Self {
            name,
            schema,
            instances,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn schema(&self) -> &[FeatureSchema] {
        &self.schema
    }

    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    pub fn instance(&self, id: usize) -> &Instance {
        &self.instances[id]
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn feature_count(&self) -> usize {
        self.schema.len()
    }

    pub fn class_members(&self, label: Label) -> impl Iterator<Item = &Instance> {
        self.instances.iter().filter(move |x| x.label == label)
    }

    pub fn class_size(&self, label: Label) -> usize {
        self.class_members(label).count()
    }

    /// Columnar JSON form with the schema block, used to cache normalized data.
    pub fn to_canonical_json(&self) -> String {
        let columns = (0..self.schema.len())
            .map(|f| self.instances.iter().map(|x| x.values[f]).collect())
            .collect();
        let canonical = CanonicalDataset {
            format: CANONICAL_FORMAT.to_string(),
            name: self.name.clone(),
            schema: self.schema.clone(),
            labels: self.instances.iter().map(|x| x.label).collect(),
            columns,
        };
        serde_json::to_string_pretty(&canonical).expect("dataset serialization is infallible")
    }

    pub fn from_canonical_json(text: &str) -> Result<Self, DataError> {
        let canonical: CanonicalDataset =
            serde_json::from_str(text).map_err(|e| DataError::Canonical(e.to_string()))?;
        if canonical.format != CANONICAL_FORMAT {
            return Err(DataError::Canonical(format!(
                "unsupported format `{}`",
                canonical.format
            )));
        }
        if canonical.columns.len() != canonical.schema.len() {
            return Err(DataError::Canonical(
                "column count does not match schema".into(),
            ));
        }
        let n = canonical.labels.len();
        if canonical.columns.iter().any(|c| c.len() != n) {
            return Err(DataError::Canonical(
                "column length does not match label count".into(),
            ));
        }
        let instances = canonical
            .labels
            .iter()
            .enumerate()
            .map(|(id, &label)| Instance {
                id,
                values: canonical.columns.iter().map(|c| c[id]).collect(),
                label,
            })
            .collect();
        Dataset::new(canonical.name, canonical.schema, instances)
    }

    /// Keeps `cap` rows, allocating them to the classes in proportion to the
    /// class sizes. Selection is a seeded shuffle per class; the kept rows stay
    /// in their original order and are re-indexed densely.
    pub fn stratified_subsample(&self, cap: usize, seed: u64) -> Result<Dataset, DataError> {
        if cap >= self.len() {
            return Ok(self.clone());
        }
        let mut by_class: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
        for x in &self.instances {
            by_class[x.label as usize].push(x.id);
        }
        let quotas = proportional_quotas(cap, [by_class[0].len(), by_class[1].len()]);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut kept = Vec::with_capacity(cap);
        for (ids, quota) in by_class.iter_mut().zip(quotas) {
            ids.shuffle(&mut rng);
            kept.extend_from_slice(&ids[..quota]);
        }
        kept.sort_unstable();
        let instances = kept
            .iter()
            .enumerate()
            .map(|(id, &old)| Instance {
                id,
                values: self.instances[old].values.clone(),
                label: self.instances[old].label,
            })
            .collect();
        Dataset::new(self.name.clone(), self.schema.clone(), instances)
    }
}

/// Largest-remainder allocation of `cap` rows over two classes, at least two each.
fn proportional_quotas(cap: usize, sizes: [usize; 2]) -> [usize; 2] {
    let total = (sizes[0] + sizes[1]) as f64;
    let exact = [
        cap as f64 * sizes[0] as f64 / total,
        cap as f64 * sizes[1] as f64 / total,
    ];
    let mut quotas = [exact[0].floor() as usize, exact[1].floor() as usize];
    if quotas[0] + quotas[1] < cap {
        let bump = if exact[0].fract() >= exact[1].fract() {
            0
        } else {
            1
        };
        quotas[bump] += 1;
    }
    for class in 0..2 {
        let other = 1 - class;
        while quotas[class] < 2.min(sizes[class]) && quotas[other] > 2 {
            quotas[class] += 1;
            quotas[other] -= 1;
        }
        quotas[class] = quotas[class].min(sizes[class]);
    }
    quotas
}

fn numeric_stats(values: impl Iterator<Item = f64> + Clone) -> FeatureKind {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    let mut sum = 0.0;
    let mut n = 0usize;
    for v in values.clone() {
        min = min.min(v);
        max = max.max(v);
        sum += v;
        n += 1;
    }
    let stddev = if n == 0 || min == max {
        0.0
    } else {
        let mean = sum / n as f64;
        let ss: f64 = values.map(|v| (v - mean) * (v - mean)).sum();
        (ss / n as f64).sqrt()
    };
    if n == 0 {
        min = 0.0;
        max = 0.0;
    }
    FeatureKind::Numeric { min, max, stddev }
}

/// Min-max scales every numeric feature to `[0, 1]` and recomputes statistics.
/// Constant features map to 0. Categorical features are left untouched.
pub fn normalize(dataset: &Dataset) -> Dataset {
    let ranges: Vec<Option<(f64, f64)>> = dataset
        .schema
        .iter()
        .map(|f| match f.kind {
            FeatureKind::Numeric { min, max, .. } => Some((min, max)),
            FeatureKind::Categorical { .. } => None,
        })
        .collect();
    let instances = dataset
        .instances
        .iter()
        .map(|x| Instance {
            id: x.id,
            label: x.label,
            values: x
                .values
                .iter()
                .zip(&ranges)
                .map(|(&v, range)| match *range {
                    Some((min, max)) if max > min => (v - min) / (max - min),
                    Some(_) => 0.0,
                    None => v,
                })
                .collect(),
        })
        .collect();
    Dataset::new(dataset.name.clone(), dataset.schema.clone(), instances)
        .expect("normalization preserves dataset validity")
}

#[derive(Serialize, Deserialize)]
struct CanonicalDataset {
    format: String,
    name: String,
    schema: Vec<FeatureSchema>,
    labels: Vec<Label>,
    columns: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKindSpec {
    Numeric,
    Categorical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub name: String,
    pub kind: FeatureKindSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub categories: Option<Vec<String>>,
}

fn default_missing_markers() -> Vec<String> {
    vec!["".into(), "?".into(), "NA".into()]
}

/// Declarative description of a CSV file's columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemaSpec {
    pub name: String,
    /// CSV location; relative paths are resolved against the schema file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    pub label: String,
    pub positive_label: String,
    pub features: Vec<FeatureSpec>,
    /// Columns present in the file but not used.
    #[serde(default)]
    pub drop: Vec<String>,
    /// Field values treated as missing (and therefore rejected).
    #[serde(default = "default_missing_markers")]
    pub missing: Vec<String>,
}

impl SchemaSpec {
    pub fn from_toml(text: &str, origin: &Path) -> Result<Self, DataError> {
        let spec: SchemaSpec = toml::from_str(text).map_err(|e| DataError::SchemaSpec {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })?;
        spec.check(origin)?;
        Ok(spec)
    }

    /// Reads a schema spec and resolves its `csv` path against the file's directory.
    pub fn from_file(path: &Path) -> Result<Self, DataError> {
        let text = std::fs::read_to_string(path).map_err(|source| DataError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut spec = Self::from_toml(&text, path)?;
        if let Some(csv) = &spec.csv {
            if csv.is_relative() {
                let base = path.parent().unwrap_or_else(|| Path::new("."));
                spec.csv = Some(base.join(csv));
            }
        }
        Ok(spec)
    }

    fn check(&self, origin: &Path) -> Result<(), DataError> {
        let fail = |message: String| DataError::SchemaSpec {
            path: origin.to_path_buf(),
            message,
        };
        if self.features.is_empty() {
            return Err(fail("no features declared".into()));
        }
        let mut seen = BTreeSet::new();
        for name in self
            .features
            .iter()
            .map(|f| &f.name)
            .chain(std::iter::once(&self.label))
            .chain(&self.drop)
        {
            if !seen.insert(name.as_str()) {
                return Err(fail(format!("column `{name}` declared more than once")));
            }
        }
        for feature in &self.features {
            match (&feature.kind, &feature.categories) {
                (FeatureKindSpec::Numeric, Some(_)) => {
                    return Err(fail(format!(
                        "numeric feature `{}` cannot list categories",
                        feature.name
                    )))
                }
                (FeatureKindSpec::Categorical, Some(c)) if c.is_empty() => {
                    return Err(fail(format!(
                        "categorical feature `{}` lists no categories",
                        feature.name
                    )))
                }
                _ => {}
            }
        }
        Ok(())
    }
}

enum RawColumn {
    Numeric(Vec<f64>),
    Categorical(Vec<String>),
}

/// Reads `path` according to `spec`. Rows keep their file order as ids.
pub fn load_dataset(path: &Path, spec: &SchemaSpec) -> Result<Dataset, DataError> {
    let file = std::fs::File::open(path).map_err(|source| DataError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_dataset(file, path, spec)
}

/// Like [`load_dataset`] but reads from any byte source; `origin` is used in errors.
pub fn read_dataset(
    reader: impl std::io::Read,
    origin: &Path,
    spec: &SchemaSpec,
) -> Result<Dataset, DataError> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let header_error = |message: String| DataError::Header {
        path: origin.to_path_buf(),
        message,
    };
    let headers = csv
        .headers()
        .map_err(|e| header_error(format!("cannot read header: {e}")))?
        .clone();
    let mut positions: HashMap<&str, usize> = HashMap::new();
    for (i, h) in headers.iter().enumerate() {
        if positions.insert(h, i).is_some() {
            return Err(header_error(format!("duplicate column `{h}`")));
        }
    }
    for h in headers.iter() {
        let known = h == spec.label
            || spec.features.iter().any(|f| f.name == h)
            || spec.drop.iter().any(|d| d == h);
        if !known {
            return Err(header_error(format!(
                "column `{h}` is not declared in the schema"
            )));
        }
    }
    let column_of = |name: &str| {
        positions
            .get(name)
            .copied()
            .ok_or_else(|| header_error(format!("declared column `{name}` is missing")))
    };
    let label_col = column_of(&spec.label)?;
    let feature_cols = spec
        .features
        .iter()
        .map(|f| column_of(&f.name))
        .collect::<Result<Vec<_>, _>>()?;

    let mut columns: Vec<RawColumn> = spec
        .features
        .iter()
        .map(|f| match f.kind {
            FeatureKindSpec::Numeric => RawColumn::Numeric(Vec::new()),
            FeatureKindSpec::Categorical => RawColumn::Categorical(Vec::new()),
        })
        .collect();
    let mut labels: Vec<String> = Vec::new();

    for (index, record) in csv.records().enumerate() {
        let row = index + 1;
        let record = record.map_err(|e| DataError::Arity {
            path: origin.to_path_buf(),
            row,
            message: e.to_string(),
        })?;
        if record.len() != headers.len() {
            return Err(DataError::Arity {
                path: origin.to_path_buf(),
                row,
                message: format!("expected {} fields, found {}", headers.len(), record.len()),
            });
        }
        let row_error = |column: &str, message: String| DataError::Row {
            path: origin.to_path_buf(),
            row,
            column: column.to_string(),
            message,
        };
        let is_missing = |field: &str| spec.missing.iter().any(|m| m == field);

        for ((feature, &col), column) in spec.features.iter().zip(&feature_cols).zip(&mut columns) {
            let field = &record[col];
            if is_missing(field) {
                return Err(row_error(&feature.name, "missing value".into()));
            }
            match column {
                RawColumn::Numeric(values) => {
                    let value: f64 = field.parse().map_err(|_| {
                        row_error(&feature.name, format!("cannot parse `{field}` as a number"))
                    })?;
                    if !value.is_finite() {
                        return Err(row_error(
                            &feature.name,
                            format!("non-finite value `{field}`"),
                        ));
                    }
                    values.push(value);
                }
                RawColumn::Categorical(values) => {
                    if let Some(categories) = &feature.categories {
                        if !categories.iter().any(|c| c == field) {
                            return Err(row_error(
                                &feature.name,
                                format!("unknown category `{field}`"),
                            ));
                        }
                    }
                    values.push(field.to_string());
                }
            }
        }
        let label = &record[label_col];
        if is_missing(label) {
            return Err(row_error(&spec.label, "missing label".into()));
        }
        labels.push(label.to_string());
    }

    let invalid = |message: String| DataError::Validity {
        name: spec.name.clone(),
        message,
    };
    let distinct: BTreeSet<&str> = labels.iter().map(String::as_str).collect();
    if distinct.len() > 2 {
        return Err(invalid(format!(
            "label column has {} distinct values; exactly two are required",
            distinct.len()
        )));
    }
    if distinct.len() < 2 {
        return Err(invalid("label column holds a single class".into()));
    }
    if !distinct.contains(spec.positive_label.as_str()) {
        return Err(invalid(format!(
            "positive label `{}` does not occur in the label column",
            spec.positive_label
        )));
    }

    let mut schema = Vec::with_capacity(spec.features.len());
    let mut encoded: Vec<Vec<f64>> = Vec::with_capacity(spec.features.len());
    for (feature, column) in spec.features.iter().zip(columns) {
        match column {
            RawColumn::Numeric(values) => {
                schema.push(FeatureSchema::numeric(&feature.name));
                encoded.push(values);
            }
            RawColumn::Categorical(values) => {
                let categories: Vec<String> = match &feature.categories {
                    Some(c) => c.clone(),
                    None => values
                        .iter()
                        .cloned()
                        .collect::<BTreeSet<_>>()
                        .into_iter()
                        .collect(),
                };
                let lookup: HashMap<&str, usize> = categories
                    .iter()
                    .enumerate()
                    .map(|(i, c)| (c.as_str(), i))
                    .collect();
                encoded.push(values.iter().map(|v| lookup[v.as_str()] as f64).collect());
                schema.push(FeatureSchema::categorical(
                    &feature.name,
                    categories.clone(),
                ));
            }
        }
    }

    let instances = labels
        .iter()
        .enumerate()
        .map(|(id, label)| Instance {
            id,
            values: encoded.iter().map(|c| c[id]).collect(),
            label: Label::from(*label == spec.positive_label),
        })
        .collect();
    Dataset::new(spec.name.clone(), schema, instances)
}
