//! The sequential simulation engine.
//!
//! For every day in the window the engine walks the card population in id
//! order, draws each card's transaction count for the day, and attaches an
//! hour, an amount and a store to every transaction. The three attributes are
//! sampled independently of the card; only the count depends on it.
//!
//! Determinism contract: output is a pure function of [`GenerationConfig`],
//! including the seed. Each (day, card) pair owns its private random
//! substream, so per-card work could run on any schedule without changing a
//! byte of output; day-boundary swaps are the only serialization point.
//!
//! Draw budget per stream, for the record: plain daily count costs 1 draw,
//! burst-mode count costs 2 (multiplier + count), and each transaction costs
//! 3 (hour, amount, store) plus 1 when amount jitter is on.

use std::io::{self, Write};

use crate::distmodel::{amount_from_bin, DistributionTable, ModelDistributions, AMOUNT_BIN_STEP};
use crate::entities::{init_cards, init_stores, swap_activities, CardProfile, StoreProfile};
use crate::error::{Error, Result};
use crate::real::{real, real_from_count, Real};
use crate::rng::RandomStream;

/// One generated transaction, in tuple order (day, card, hour, amount, store).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransactionRecord<R: Real = f64> {
    /// 0-based simulation day.
    pub day: u32,
    pub card_id: u64,
    /// Hour of day in `[0, 24)`.
    pub hour: u8,
    /// Monetary amount; a 25-unit bin midpoint unless amount jitter is on.
    pub amount: R,
    pub store_id: u64,
}

pub const TRANSACTION_CSV_HEADER: &str = "day,card,hour,amount,store";

impl<R: Real> TransactionRecord<R> {
    /// Timestamp in whole hours since day 0, hour 0.
    pub fn timestamp_hours(&self) -> u64 {
        u64::from(self.day) * 24 + u64::from(self.hour)
    }

    /// One CSV line, amount printed with one decimal.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(
            out,
            "{},{},{},{:.1},{}",
            self.day, self.card_id, self.hour, self.amount, self.store_id
        )
    }
}

/// Burst behaviour: day-to-day variability plus compensating inhibition.
///
/// When active, the day's target rate is multiplied by a unit-mean log-normal
/// draw with shape `overdispersion`, then reduced by `debt_decay` times the
/// card's carried debt. The debt itself is a plain ledger of executed minus
/// expected transactions, so every burst is eventually paid back and the
/// long-run mean stays on the configured rate; `debt_decay` sets how much of
/// the outstanding debt each day tries to work off.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BurstConfig<R: Real = f64> {
    pub enabled: bool,
    /// Log-normal shape of the daily multiplier; 0 disables bursting outright.
    pub overdispersion: R,
    /// Fraction of the carried debt scheduled for repayment each day.
    pub debt_decay: R,
}

impl<R: Real> Default for BurstConfig<R> {
    fn default() -> Self {
        Self {
            enabled: false,
            overdispersion: R::one(),
            debt_decay: real(0.1),
        }
    }
}

impl<R: Real> BurstConfig<R> {
    /// Zero overdispersion is equivalent to the option being disabled.
    pub fn is_active(&self) -> bool {
        self.enabled && self.overdispersion > R::zero()
    }

    fn validate(&self) -> Result<()> {
        if !self.overdispersion.is_finite() || self.overdispersion < R::zero() {
            return Err(Error::Domain(
                "burst overdispersion must be finite and >= 0".into(),
            ));
        }
        if self.debt_decay.is_nan() || self.debt_decay < R::zero() || self.debt_decay > R::one() {
            return Err(Error::Domain("burst debt decay must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

/// Day-boundary activity swapping between similar cards.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwapConfig<R: Real = f64> {
    /// Per-card per-day trigger probability; 0 disables the option.
    pub probability: R,
    /// Partners must have expected activities within this factor.
    pub similarity_ratio: R,
}

impl<R: Real> Default for SwapConfig<R> {
    fn default() -> Self {
        Self {
            probability: R::zero(),
            similarity_ratio: real(2.0),
        }
    }
}

impl<R: Real> SwapConfig<R> {
    pub fn is_active(&self) -> bool {
        self.probability > R::zero()
    }

    fn validate(&self) -> Result<()> {
        if self.probability.is_nan() || self.probability < R::zero() || self.probability > R::one()
        {
            return Err(Error::Domain("swap probability must lie in [0, 1]".into()));
        }
        if self.similarity_ratio.is_nan() || self.similarity_ratio < R::one() {
            return Err(Error::Domain(
                "swap similarity ratio must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Full description of one generation run.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationConfig<R: Real = f64> {
    pub n_cards: u64,
    pub n_stores: u64,
    pub n_days: u32,
    pub seed: u64,
    /// Day of week of simulation day 0; 0 = Monday.
    pub start_day_of_week: u8,
    pub distributions: ModelDistributions<R>,
    pub burst: BurstConfig<R>,
    pub swap: SwapConfig<R>,
    /// Spread each amount uniformly inside its 25-unit bin instead of pinning
    /// it to the midpoint. Off by default.
    pub amount_jitter: bool,
}

impl<R: Real> GenerationConfig<R> {
    /// A run over the built-in distributions.
    pub fn new(n_cards: u64, n_stores: u64, n_days: u32, seed: u64) -> Self {
        Self {
            n_cards,
            n_stores,
            n_days,
            seed,
            start_day_of_week: 0,
            distributions: ModelDistributions::default(),
            burst: BurstConfig::default(),
            swap: SwapConfig::default(),
            amount_jitter: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_cards == 0 || self.n_cards > u64::from(u32::MAX) {
            return Err(Error::Domain(format!(
                "card count must lie in 1..={}",
                u32::MAX
            )));
        }
        if self.n_stores == 0 {
            return Err(Error::Domain("store count must be at least 1".into()));
        }
        if u64::from(self.n_days) > MAX_DAYS {
            return Err(Error::Domain(format!(
                "day count must not exceed {MAX_DAYS}"
            )));
        }
        if self.start_day_of_week >= 7 {
            return Err(Error::Domain("start day of week must lie in 0..7".into()));
        }
        self.burst.validate()?;
        self.swap.validate()
    }
}

// Substream layout. Day and card indices pack into disjoint bit ranges, so
// every (day, card) pair owns a distinct stream id.
const MAX_DAYS: u64 = (1 << 24) - 1;
const STREAM_CARD_INIT: u64 = 1 << 56;
const STREAM_STORE_INIT: u64 = 2 << 56;
const STREAM_SWAP: u64 = 3 << 56;
const STREAM_CARD_DAY_TAG: u64 = 4 << 56;

fn card_day_stream(seed: u64, day: u32, card_id: u64) -> RandomStream {
    RandomStream::new(seed, STREAM_CARD_DAY_TAG | (u64::from(day) << 32) | card_id)
}

/// The card population a config starts from, before any swaps.
///
/// Canonical derivation shared by the engine and by validation oracles.
pub fn initial_cards<R: Real>(config: &GenerationConfig<R>) -> Result<Vec<CardProfile<R>>> {
    init_cards(
        config.n_cards,
        &config.distributions.num_ops,
        &mut RandomStream::new(config.seed, STREAM_CARD_INIT),
    )
}

/// The store population a config starts from.
pub fn initial_stores<R: Real>(config: &GenerationConfig<R>) -> Result<Vec<StoreProfile<R>>> {
    init_stores(
        config.n_stores,
        &config.distributions.num_ops_stores,
        &mut RandomStream::new(config.seed, STREAM_STORE_INIT),
    )
}

/// Expected transactions for one card on one day.
///
/// The monthly expectation is spread over a 30-day month and modulated by the
/// day-of-week table, scaled so a uniform table is the identity: with uniform
/// days this is exactly `expected_monthly_ops / 30` for every day.
pub fn daily_expected_count<R: Real>(
    card: &CardProfile<R>,
    day_of_week: u8,
    daily_table: &DistributionTable<R>,
) -> R {
    let weight = daily_table.weights()[usize::from(day_of_week)];
    (card.expected_monthly_ops / real(30.0)) * (real::<R>(7.0) * weight)
}

/// Draw the number of transactions a card executes on one day, updating the
/// card's inhibition debt when bursting is active.
///
/// Without bursting the count is Poisson at the given rate and the card is
/// untouched. With bursting the effective rate is
/// `max(0, rate * m - debt_decay * debt)` for a unit-mean log-normal `m`, and
/// the debt ledger then absorbs `count - rate`. Overshoots suppress future
/// days until worked off; undershoots accumulate credit that boosts them.
pub fn sample_daily_count<R: Real>(
    rate: R,
    burst: &BurstConfig<R>,
    card: &mut CardProfile<R>,
    rng: &mut RandomStream,
) -> Result<u64> {
    if !rate.is_finite() || rate < R::zero() {
        return Err(Error::Domain("daily rate must be finite and >= 0".into()));
    }
    if !burst.is_active() {
        return Ok(sample_poisson(rate, rng));
    }
    let sigma = burst.overdispersion;
    let z: R = rng.next_standard_normal();
    let multiplier = (sigma * z - sigma * sigma / real(2.0)).exp();
    let lambda = (rate * multiplier - burst.debt_decay * card.inhibition_debt).max(R::zero());
    let count = sample_poisson(lambda, rng);
    card.inhibition_debt = card.inhibition_debt + (real_from_count::<R>(count) - rate);
    Ok(count)
}

/// Poisson sampling by CDF inversion; exactly one uniform draw per call.
/// Rates large enough to underflow `exp(-lambda)` fall back to a rounded
/// normal approximation, still one draw.
fn sample_poisson<R: Real>(lambda: R, rng: &mut RandomStream) -> u64 {
    if lambda <= R::zero() {
        return 0;
    }
    let no_event = (-lambda).exp();
    if no_event > R::zero() {
        let u: R = rng.next_real();
        let mut count = 0u64;
        let mut term = no_event;
        let mut acc = no_event;
        while u > acc && term > R::zero() {
            count += 1;
            term = term * lambda / real_from_count::<R>(count);
            acc = acc + term;
        }
        count
    } else {
        let z: R = rng.next_standard_normal();
        let x = (lambda + lambda.sqrt() * z).round();
        if x <= R::zero() {
            0
        } else {
            x.to_u64().unwrap_or(u64::MAX)
        }
    }
}

/// Totals reported by a streaming generation run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenerationSummary {
    pub records: u64,
}

/// Run the simulation, handing each record to `sink` in canonical order:
/// by day, then card id, then generation order. Nothing is buffered, so
/// memory stays independent of the output size.
pub fn generate_with<R: Real, F>(
    config: &GenerationConfig<R>,
    mut sink: F,
) -> Result<GenerationSummary>
where
    F: FnMut(TransactionRecord<R>) -> Result<()>,
{
    config.validate()?;
    let dist = &config.distributions;
    let mut cards = initial_cards(config)?;
    let stores = initial_stores(config)?;

    // Store choice is proportional to size weight and fixed for the run.
    let store_weights: Vec<R> = stores.iter().map(|s| s.size_weight).collect();
    let store_selector = DistributionTable::normalize(&store_weights)?;

    let mut swap_rng = RandomStream::new(config.seed, STREAM_SWAP);
    let mut records = 0u64;

    for day in 0..config.n_days {
        if day > 0 && config.swap.is_active() {
            swap_activities(
                &mut cards,
                config.swap.probability,
                config.swap.similarity_ratio,
                &mut swap_rng,
            )?;
        }
        let day_of_week = (config.start_day_of_week + (day % 7) as u8) % 7;

        for card in cards.iter_mut() {
            let mut rng = card_day_stream(config.seed, day, card.card_id);
            let rate = daily_expected_count(card, day_of_week, &dist.daily);
            let count = sample_daily_count(rate, &config.burst, card, &mut rng)?;

            for _ in 0..count {
                let hour = dist.hourly.sample_bin(&mut rng) as u8;
                let bin = dist.quantity.sample_bin(&mut rng);
                let amount = if config.amount_jitter {
                    let u: R = rng.next_real();
                    (real_from_count::<R>(bin as u64) + u) * real(AMOUNT_BIN_STEP)
                } else {
                    amount_from_bin(bin)?
                };
                let store_id = stores[store_selector.sample_bin(&mut rng)].store_id;
                sink(TransactionRecord {
                    day,
                    card_id: card.card_id,
                    hour,
                    amount,
                    store_id,
                })?;
                records += 1;
            }
        }
    }
    Ok(GenerationSummary { records })
}

/// Run the simulation and collect every record in memory.
pub fn generate<R: Real>(config: &GenerationConfig<R>) -> Result<Vec<TransactionRecord<R>>> {
    let mut out = Vec::new();
    generate_with(config, |rec| {
        out.push(rec);
        Ok(())
    })?;
    Ok(out)
}

/// Run the simulation straight into a writer as CSV, header included.
pub fn write_transactions_csv<R: Real, W: Write>(
    config: &GenerationConfig<R>,
    out: W,
) -> Result<GenerationSummary> {
    let mut w = io::BufWriter::new(out);
    writeln!(w, "{TRANSACTION_CSV_HEADER}")?;
    let summary = generate_with(config, |rec| {
        rec.write_csv(&mut w)?;
        Ok(())
    })?;
    w.flush()?;
    Ok(summary)
}
