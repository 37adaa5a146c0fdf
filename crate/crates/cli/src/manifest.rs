//! Run manifests: the resolved configuration and everything needed to
//! reproduce or audit a batch of outputs. The manifest carries the
//! timestamp; the CSVs themselves are byte-reproducible.

use anyhow::Result;
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use crate::config::RunConfig;

#[derive(Serialize)]
pub struct ReynoldsEntry {
    pub omega: f64,
    pub v_lid: [f64; 2],
    pub reynolds: f64,
}

#[derive(Serialize)]
pub struct ResourceEntry {
    pub n_clock: usize,
    pub l_sites: usize,
    pub q: usize,
    pub n_steps: usize,
    pub q_tilde: String,
    pub generic_cnot_bound: String,
    pub local_cnot_bound: String,
    pub reinit_cnot_bound: String,
}

#[derive(Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub tool_version: String,
    pub command: String,
    pub timestamp_unix: u64,
    pub threads: usize,
    pub config: RunConfig,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub spectrum_cache_keys: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub derived_reynolds: Vec<ReynoldsEntry>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub resource_estimates: Vec<ResourceEntry>,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, config: &RunConfig, threads: usize) -> Self {
        RunManifest {
            tool: "qlbm".to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            timestamp_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            threads,
            config: config.clone(),
            spectrum_cache_keys: Vec::new(),
            derived_reynolds: Vec::new(),
            resource_estimates: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn record_output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    pub fn write(&self, out_dir: &Path) -> Result<PathBuf> {
        std::fs::create_dir_all(out_dir)?;
        let path = out_dir.join("manifest.json");
        std::fs::write(&path, serde_json::to_string_pretty(self)?)?;
        Ok(path)
    }
}

pub fn resource_entry(
    n_clock: usize,
    l_sites: usize,
    q: usize,
    n_steps: usize,
    estimate: &qlbm::resources::ResourceEstimate,
) -> ResourceEntry {
    ResourceEntry {
        n_clock,
        l_sites,
        q,
        n_steps,
        q_tilde: estimate.q_tilde.to_string(),
        generic_cnot_bound: estimate.generic_bound.to_string(),
        local_cnot_bound: estimate.local_bound.to_string(),
        reinit_cnot_bound: estimate.reinit_bound.to_string(),
    }
}
