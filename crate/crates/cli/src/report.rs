//! Report rows and the CSV/JSON emitters.
//!
//! The CSV has the fixed header `experiment,layer,metric,direction,seed,value`
//! with exactly one row per (layer, metric, direction, seed), sorted by
//! (direction, layer, metric) so identical results serialize identically.
//! The JSON mirror repeats the rows together with the resolved configuration
//! (minus the output directory, which must not influence report bytes).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::weightfile::write_atomic;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Purity,
    EerExtractor,
    EerRawCosine,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Purity => "purity",
            Metric::EerExtractor => "eer_extractor",
            Metric::EerRawCosine => "eer_raw_cosine",
        }
    }
}

/// One report value. `layer` is 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub experiment: String,
    pub layer: usize,
    pub metric: Metric,
    pub direction: String,
    pub seed: u64,
    pub value: f64,
}

fn sorted_unique(rows: &[ReportRow]) -> Result<Vec<ReportRow>> {
    let mut sorted = rows.to_vec();
    sorted.sort_by(|a, b| {
        (a.direction.as_str(), a.layer, a.metric, a.seed)
            .cmp(&(b.direction.as_str(), b.layer, b.metric, b.seed))
    });
    for w in sorted.windows(2) {
        let key = |r: &ReportRow| (r.direction.clone(), r.layer, r.metric, r.seed);
        if key(&w[0]) == key(&w[1]) {
            return Err(Error::InvalidConfig(format!(
                "duplicate report row for direction {} layer {} metric {} seed {}",
                w[0].direction,
                w[0].layer,
                w[0].metric.as_str(),
                w[0].seed
            )));
        }
    }
    Ok(sorted)
}

pub fn write_csv(path: &Path, rows: &[ReportRow]) -> Result<()> {
    let sorted = sorted_unique(rows)?;
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in &sorted {
        writer.serialize(row).map_err(|e| Error::Json {
            path: path.to_path_buf(),
            message: format!("CSV serialization: {e}"),
        })?;
    }
    let bytes = writer.into_inner().map_err(|e| Error::Json {
        path: path.to_path_buf(),
        message: format!("CSV flush: {e}"),
    })?;
    write_atomic(path, &bytes)
}

pub fn write_json(path: &Path, config: &ExperimentConfig, rows: &[ReportRow]) -> Result<()> {
    let sorted = sorted_unique(rows)?;
    let json_err = |message: String| Error::Json {
        path: path.to_path_buf(),
        message,
    };
    let mut config_value =
        serde_json::to_value(config).map_err(|e| json_err(e.to_string()))?;
    config_value
        .as_object_mut()
        .expect("config serializes to an object")
        .remove("output_dir");
    let doc = serde_json::json!({
        "experiment": config.experiment,
        "master_seed": config.master_seed,
        "config": config_value,
        "rows": sorted,
    });
    let mut bytes =
        serde_json::to_vec_pretty(&doc).map_err(|e| json_err(e.to_string()))?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

/// Reads rows back from a report CSV.
pub fn read_csv(path: &Path) -> Result<Vec<ReportRow>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::Json {
        path: path.to_path_buf(),
        message: format!("CSV open: {e}"),
    })?;
    reader
        .deserialize()
        .map(|r| {
            r.map_err(|e| Error::Json {
                path: path.to_path_buf(),
                message: format!("CSV row: {e}"),
            })
        })
        .collect()
}
