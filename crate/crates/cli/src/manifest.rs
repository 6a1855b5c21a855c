//! Run manifests: everything needed to regenerate a data set byte-for-byte.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use cardflow_core::generator::{BurstConfig, GenerationConfig, SwapConfig};
use cardflow_core::{Error as CoreError, ModelDistributions64};

/// Marker used in `config_source` when the built-in tables were used.
pub const BUILTIN_CONFIG: &str = "builtin-defaults";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub seed: u64,
    pub cards: u64,
    pub stores: u64,
    pub days: u32,
    pub start_day_of_week: u8,
    pub burst_enabled: bool,
    pub burst_sigma: f64,
    pub burst_decay: f64,
    pub swap_prob: f64,
    pub swap_ratio: f64,
    pub amount_jitter: bool,
    /// Path of the distribution config, or [`BUILTIN_CONFIG`].
    pub config_source: String,
    /// Fingerprint of the normalized tables actually used.
    pub config_hash: String,
    pub records: u64,
    pub output: String,
}

impl RunManifest {
    pub fn for_run(
        config: &GenerationConfig<f64>,
        config_source: &str,
        records: u64,
        output: &Path,
    ) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed: config.seed,
            cards: config.n_cards,
            stores: config.n_stores,
            days: config.n_days,
            start_day_of_week: config.start_day_of_week,
            burst_enabled: config.burst.enabled,
            burst_sigma: config.burst.overdispersion,
            burst_decay: config.burst.debt_decay,
            swap_prob: config.swap.probability,
            swap_ratio: config.swap.similarity_ratio,
            amount_jitter: config.amount_jitter,
            config_source: config_source.to_string(),
            config_hash: cardflow_core::distmodel::distributions_fingerprint(&config.distributions),
            records,
            output: output.display().to_string(),
        }
    }

    /// Rebuild the generation config, given freshly resolved tables.
    pub fn to_config(&self, distributions: ModelDistributions64) -> GenerationConfig<f64> {
        GenerationConfig {
            n_cards: self.cards,
            n_stores: self.stores,
            n_days: self.days,
            seed: self.seed,
            start_day_of_week: self.start_day_of_week,
            distributions,
            burst: BurstConfig {
                enabled: self.burst_enabled,
                overdispersion: self.burst_sigma,
                debt_decay: self.burst_decay,
            },
            swap: SwapConfig {
                probability: self.swap_prob,
                similarity_ratio: self.swap_ratio,
            },
            amount_jitter: self.amount_jitter,
        }
    }

    pub fn load(path: &Path) -> Result<Self, CoreError> {
        let text = fs::read_to_string(path).map_err(|e| {
            CoreError::Config(format!("cannot read manifest {}: {e}", path.display()))
        })?;
        toml::from_str(&text)
            .map_err(|e| CoreError::Config(format!("invalid manifest {}: {e}", path.display())))
    }

    pub fn save(&self, path: &Path) -> Result<(), CoreError> {
        let text = toml::to_string(self).expect("manifest always serializes");
        fs::write(path, text)?;
        Ok(())
    }
}
