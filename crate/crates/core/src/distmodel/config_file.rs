//! The distribution config file: TOML with five named raw-weight arrays.
//!
//! Keys and arities are a format contract: `hourly` (24), `daily` (7, Monday
//! first), `quantity` (50), `num_ops` (100), `num_ops_stores` (50). Arrays
//! hold raw weights; the loader normalizes them.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{BinSemantics, DistributionTable, ModelDistributions};
use crate::error::{Error, Result};
use crate::real::{real, Real};

#[derive(Debug, Serialize, Deserialize)]
struct RawDistributionFile {
    hourly: Vec<f64>,
    daily: Vec<f64>,
    quantity: Vec<f64>,
    num_ops: Vec<f64>,
    num_ops_stores: Vec<f64>,
}

fn table_from_raw<R: Real>(
    key: &str,
    raw: &[f64],
    semantics: BinSemantics,
) -> Result<DistributionTable<R>> {
    if raw.len() != semantics.cardinality() {
        return Err(Error::Config(format!(
            "key `{key}` must hold {} entries, found {}",
            semantics.cardinality(),
            raw.len()
        )));
    }
    let weights: Vec<R> = raw.iter().map(|w| real(*w)).collect();
    DistributionTable::normalize(&weights).map_err(|e| match e {
        Error::Domain(msg) => Error::Config(format!("key `{key}`: {msg}")),
        Error::DegenerateDistribution => {
            Error::Config(format!("key `{key}`: all weights are zero"))
        }
        other => other,
    })
}

/// Parse a distribution config from TOML text.
pub fn parse_distributions<R: Real>(text: &str) -> Result<ModelDistributions<R>> {
    let raw: RawDistributionFile =
        toml::from_str(text).map_err(|e| Error::Config(format!("invalid config: {e}")))?;
    ModelDistributions::new(
        table_from_raw("hourly", &raw.hourly, BinSemantics::HourOfDay)?,
        table_from_raw("daily", &raw.daily, BinSemantics::DayOfWeek)?,
        table_from_raw("quantity", &raw.quantity, BinSemantics::AmountBin)?,
        table_from_raw("num_ops", &raw.num_ops, BinSemantics::MonthlyOps)?,
        table_from_raw(
            "num_ops_stores",
            &raw.num_ops_stores,
            BinSemantics::StoreSizeBin,
        )?,
    )
}

/// Load a distribution config file.
pub fn load_distributions<R: Real>(path: &Path) -> Result<ModelDistributions<R>> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_distributions(&text)
}

/// Serialize tables back to the config format, normalized weights included.
/// Output is byte-stable for identical inputs.
pub fn write_distributions_string<R: Real>(d: &ModelDistributions<R>) -> String {
    fn to_f64<R: Real>(t: &DistributionTable<R>) -> Vec<f64> {
        t.weights()
            .iter()
            .map(|w| w.to_f64().expect("weight fits in f64"))
            .collect()
    }
    let raw = RawDistributionFile {
        hourly: to_f64(&d.hourly),
        daily: to_f64(&d.daily),
        quantity: to_f64(&d.quantity),
        num_ops: to_f64(&d.num_ops),
        num_ops_stores: to_f64(&d.num_ops_stores),
    };
    toml::to_string(&raw).expect("plain arrays always serialize")
}

/// Save a distribution config file.
pub fn save_distributions<R: Real>(d: &ModelDistributions<R>, path: &Path) -> Result<()> {
    fs::write(path, write_distributions_string(d))?;
    Ok(())
}

/// Stable fingerprint of the normalized tables, as lowercase hex.
///
/// Computed over the canonical serialized form, so the built-in defaults and
/// a file that encodes the same weights agree.
pub fn distributions_fingerprint<R: Real>(d: &ModelDistributions<R>) -> String {
    format!("{:016x}", fnv1a64(write_distributions_string(d).as_bytes()))
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        hash ^= u64::from(*b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}
