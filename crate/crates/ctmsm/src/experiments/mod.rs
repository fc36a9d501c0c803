//! Simulation studies. Each study is a pure function of its configuration and
//! master seed; replication `r` uses the seed `replication_seed(seed, r)`.
//! Replications run on the rayon pool and are aggregated in replication order.

pub mod censoring;
pub mod fig1;
pub mod fig2;
pub mod fig3;

use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliResult;
use crate::io::write_json;

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub experiment: String,
    pub crate_version: String,
    pub config: serde_json::Value,
    /// SHA-256 of the compact JSON encoding of `config`.
    pub config_hash: String,
    pub seed: u64,
    pub replication_seeds: Vec<u64>,
    pub threads: usize,
    pub files: Vec<String>,
}

impl Manifest {
    pub fn new<C: Serialize>(experiment: &str, config: &C, seed: u64, replication_seeds: Vec<u64>) -> Self {
        let config = serde_json::to_value(config).expect("configs serialize to JSON");
        Self {
            experiment: experiment.into(),
            crate_version: env!("CARGO_PKG_VERSION").into(),
            config_hash: config_hash(&config),
            config,
            seed,
            replication_seeds,
            threads: rayon::current_num_threads(),
            files: Vec::new(),
        }
    }

    pub fn write(&self, dir: &Path) -> CliResult<()> {
        write_json(&dir.join("manifest.json"), self)
    }
}

pub fn config_hash(config: &serde_json::Value) -> String {
    let digest = Sha256::digest(config.to_string().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn replication_seeds(seed: u64, reps: usize) -> Vec<u64> {
    (0..reps as u64).map(|r| ctmsm_core::sim::replication_seed(seed, r)).collect()
}
