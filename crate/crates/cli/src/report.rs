//! JSON report schema, version 1.
//!
//! Keys serialise in the fixed order declared here; absent optional
//! sections are omitted entirely, so a parse/serialise round trip is
//! byte-identical.

use std::path::Path;

use benchmake::harness::ComparisonReport;
use benchmake::MetricReport;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: &str = "1";

/// Echo of the factorisation schedule a command ran with.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub max_iterations: usize,
    pub tolerance: f64,
    pub epsilon: f32,
    pub seed: u64,
    pub init_scale: f32,
}

impl From<&benchmake::PartitionOptions> for ConfigEcho {
    fn from(opts: &benchmake::PartitionOptions) -> Self {
        ConfigEcho {
            max_iterations: opts.max_iterations,
            tolerance: opts.tolerance,
            epsilon: opts.epsilon,
            seed: opts.seed,
            init_scale: opts.init_scale,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportFile {
    pub schema_version: String,
    pub command: String,
    pub modality: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<ConfigEcho>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metrics: Option<MetricReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comparisons: Option<Vec<ComparisonReport>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub train_indices: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test_indices: Option<Vec<usize>>,
}

impl ReportFile {
    pub fn new(command: &str, modality: benchmake::Modality) -> Self {
        ReportFile {
            schema_version: SCHEMA_VERSION.to_string(),
            command: command.to_string(),
            modality: modality.to_string(),
            fraction: None,
            k: None,
            config: None,
            metrics: None,
            comparisons: None,
            train_indices: None,
            test_indices: None,
        }
    }

    pub fn write(&self, path: &Path) -> benchmake::Result<()> {
        let mut json = serde_json::to_string_pretty(self)
            .map_err(|e| benchmake::Error::Data(format!("report serialisation failed: {e}")))?;
        json.push('\n');
        std::fs::write(path, json).map_err(|e| benchmake::Error::io(path, e))
    }
}
