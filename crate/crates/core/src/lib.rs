//! Synthetic card-transaction data sets and the statistics to trust them.
//!
//! The model is a two-layer money flow: cards on one side, stores on the
//! other, and every transaction a link between the layers. Five discrete
//! input distributions drive generation — hour of day, day of week, amount,
//! monthly operations per card and store size — and a streaming statistics
//! engine recomputes the resulting marginals so a generated set can be
//! validated against exactly what was asked for.
//!
//! Modules:
//! - [`distmodel`]: probability tables, normalization, seeded sampling,
//!   exceedance curves, the distribution config file.
//! - [`entities`]: card and store populations, the activity-swap process.
//! - [`generator`]: the deterministic day-by-day simulation engine.
//! - [`stats`]: one-pass marginals, distances, the validation report.
//! - [`ingest`]: log parsing and table fitting, closing the loop from real
//!   data back into the generator.
//!
//! Core math is generic over the scalar via [`Real`] (`f32` or `f64`); the
//! crate root exports `f64` aliases, which the CLI and all file formats use.
//!
//! ```
//! use cardflow_core::generator::{generate, GenerationConfig};
//! use cardflow_core::stats::{validate, ValidationThresholds};
//!
//! let config = GenerationConfig::<f64>::new(2000, 1000, 100, 42);
//! let records = generate(&config)?;
//! let report = validate(records, &config, &ValidationThresholds::default())?;
//! assert!(report.passed);
//! # Ok::<(), cardflow_core::Error>(())
//! ```

pub mod distmodel;
pub mod entities;
pub mod error;
pub mod generator;
pub mod ingest;
pub mod real;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
pub use real::Real;
pub use rng::RandomStream;

/// `f64` specialization of [`distmodel::DistributionTable`].
pub type DistributionTable64 = distmodel::DistributionTable<f64>;
/// `f32` specialization of [`distmodel::DistributionTable`].
pub type DistributionTable32 = distmodel::DistributionTable<f32>;
/// `f64` specialization of [`distmodel::CpdCurve`].
pub type CpdCurve64 = distmodel::CpdCurve<f64>;
/// `f32` specialization of [`distmodel::CpdCurve`].
pub type CpdCurve32 = distmodel::CpdCurve<f32>;
/// `f64` specialization of [`distmodel::ModelDistributions`].
pub type ModelDistributions64 = distmodel::ModelDistributions<f64>;
/// `f64` specialization of [`entities::CardProfile`].
pub type CardProfile64 = entities::CardProfile<f64>;
/// `f64` specialization of [`entities::StoreProfile`].
pub type StoreProfile64 = entities::StoreProfile<f64>;
/// `f64` specialization of [`generator::TransactionRecord`].
pub type TransactionRecord64 = generator::TransactionRecord<f64>;
/// `f64` specialization of [`generator::GenerationConfig`].
pub type GenerationConfig64 = generator::GenerationConfig<f64>;
/// `f64` specialization of [`stats::MarginalSet`].
pub type MarginalSet64 = stats::MarginalSet<f64>;
/// `f64` specialization of [`stats::ValidationReport`].
pub type ValidationReport64 = stats::ValidationReport<f64>;
