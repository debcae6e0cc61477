use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::HarnessError;
use crate::methods::{LocalRegionConfig, MdnConfig, Method};
use crate::surrogate::LogisticConfig;

pub const DEFAULT_OUT_DIR: &str = "sfbench-out";

/// Everything that determines a benchmark run.
///
/// `workers` and `out` only affect how and where the run executes, never its
/// results, so they are left out of the provenance hash and the embedded
/// config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Schema spec files, one per dataset.
    pub datasets: Vec<PathBuf>,
    pub methods: Vec<Method>,
    pub tau_factor: f64,
    pub per_class_min: usize,
    /// Methods whose candidate pool is restricted by the k-NN base model.
    pub knn_filter: Vec<Method>,
    pub knn_k: usize,
    /// Stratified row cap applied to each dataset before normalization.
    pub subsample: Option<usize>,
    pub seed: u64,
    pub ridge: f64,
    pub logistic: LogisticConfig,
    #[serde(skip_serializing)]
    pub workers: usize,
    #[serde(skip_serializing)]
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            datasets: Vec::new(),
            methods: Method::ALL.to_vec(),
            tau_factor: MdnConfig::default().tau_factor,
            per_class_min: LocalRegionConfig::default().per_class_min,
            knn_filter: Method::ALL.into_iter().filter(|m| m.is_kleor()).collect(),
            knn_k: 3,
            subsample: None,
            seed: 0,
            ridge: crate::geometry::DEFAULT_RIDGE,
            logistic: LogisticConfig::default(),
            workers: 1,
            out: PathBuf::from(DEFAULT_OUT_DIR),
        }
    }
}

impl RunConfig {
    /// Parses a TOML config; a `.json` extension selects JSON instead.
    pub fn from_file(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        let parsed = if path.extension().is_some_and(|e| e == "json") {
            Self::from_json(&text)
        } else {
            Self::from_toml(&text)
        };
        parsed.map_err(|e| match e {
            HarnessError::Config(m) => HarnessError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    /// Accepts both a bare config object and an emitted `config.json`
    /// (which wraps it next to its hash).
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        let inner = match value.get("config") {
            Some(inner) if value.get("config_hash").is_some() => inner.clone(),
            _ => value,
        };
        serde_json::from_value(inner).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let fail = |m: &str| Err(HarnessError::Config(m.to_string()));
        if self.methods.is_empty() {
            return fail("no methods selected");
        }
        let mut seen = self.methods.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.methods.len() {
            return fail("a method is listed more than once");
        }
        if !(self.tau_factor.is_finite() && self.tau_factor >= 0.0) {
            return fail("tau_factor must be a finite non-negative number");
        }
        if self.per_class_min == 0 {
            return fail("per_class_min must be at least 1");
        }
        if self.knn_k == 0 {
            return fail("knn_k must be at least 1");
        }
        if self.subsample.is_some_and(|n| n < 4) {
            return fail("subsample must keep at least 4 rows");
        }
        if !(self.ridge.is_finite() && self.ridge > 0.0) {
            return fail("ridge must be a finite positive number");
        }
        if self.workers == 0 {
            return fail("workers must be at least 1");
        }
        let l = &self.logistic;
        if !(l.l2.is_finite() && l.l2 >= 0.0 && l.tol.is_finite() && l.tol > 0.0 && l.max_iter > 0)
        {
            return fail("logistic settings need l2 >= 0, tol > 0 and max_iter > 0");
        }
        Ok(())
    }

    pub fn mdn_config(&self) -> MdnConfig {
        MdnConfig {
            tau_factor: self.tau_factor,
        }
    }

    pub fn local_region_config(&self) -> LocalRegionConfig {
        LocalRegionConfig {
            per_class_min: self.per_class_min,
            logistic: self.logistic,
        }
    }

    /// Compact JSON of the result-determining fields, in declaration order.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// Hex sha256 of [`RunConfig::canonical_json`].
    pub fn hash(&self) -> String {
        Sha256::digest(self.canonical_json().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}
