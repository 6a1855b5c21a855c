//! Streaming empirical statistics over transaction streams.
//!
//! [`compute_marginals`] makes one pass over a day-ordered record stream and
//! accumulates every marginal the model cares about: per-card and per-store
//! operation counts, amounts, day-of-week and hour profiles (count- and
//! amount-weighted), same-card inter-transaction gaps, and the per-day split
//! into new versus repeating cards. Memory scales with the populations and
//! the day span, never with the stream length.

mod validate;

pub use validate::{
    compare, ks_statistic, tv_distance, validate, validate_marginals, write_panels, MarginalCheck,
    ValidationReport, ValidationThresholds,
};

use std::collections::{HashMap, HashSet};

use crate::distmodel::{
    amount_to_bin, AMOUNT_BINS, DAY_BINS, HOUR_BINS, MONTHLY_OPS_BINS, STORE_SIZE_BINS,
};
use crate::error::{Error, Result};
use crate::generator::TransactionRecord;
use crate::real::Real;

/// Gap histograms stop growing past this many hours; longer gaps are counted
/// in an overflow bucket.
const MAX_GAP_HOURS: usize = 50_000;

/// How day indices map onto weekdays.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ComputeOptions {
    /// Day of week of day 0; 0 = Monday.
    pub start_day_of_week: u8,
}

/// Per-day split of active cards into new and repeating.
///
/// A card active on day `d` is repeating when it was also active on day
/// `d - 1`; every active card on day 0 is new.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DayActivity {
    pub day: u32,
    pub new_cards: u64,
    pub repeating_cards: u64,
}

/// Every empirical marginal of one transaction stream.
#[derive(Debug, Clone)]
pub struct MarginalSet<R: Real = f64> {
    pub total_records: u64,
    pub hour_counts: Vec<u64>,
    pub hour_amounts: Vec<R>,
    pub dow_counts: Vec<u64>,
    pub dow_amounts: Vec<R>,
    pub amount_counts: Vec<u64>,
    /// Same-card gaps in whole hours; index = gap length.
    pub gap_counts: Vec<u64>,
    pub gap_overflow: u64,
    pub ops_per_card: HashMap<u64, u64>,
    pub ops_per_store: HashMap<u64, u64>,
    pub day_activity: Vec<DayActivity>,
    pub first_day: u32,
    pub last_day: u32,
}

impl<R: Real> MarginalSet<R> {
    fn new() -> Self {
        Self {
            total_records: 0,
            hour_counts: vec![0; HOUR_BINS],
            hour_amounts: vec![R::zero(); HOUR_BINS],
            dow_counts: vec![0; DAY_BINS],
            dow_amounts: vec![R::zero(); DAY_BINS],
            amount_counts: vec![0; AMOUNT_BINS],
            gap_counts: Vec::new(),
            gap_overflow: 0,
            ops_per_card: HashMap::new(),
            ops_per_store: HashMap::new(),
            day_activity: Vec::new(),
            first_day: 0,
            last_day: 0,
        }
    }

    /// Days covered by the stream, inclusive of both ends.
    pub fn window_days(&self) -> u32 {
        self.last_day - self.first_day + 1
    }

    /// Per-card operation counts rescaled to a 30-day month and clamped into
    /// the 100 monthly-operation bins (bin `k` holds the value `k + 1`).
    pub fn monthly_ops_histogram(&self, window_days: u32) -> Vec<u64> {
        let mut hist = vec![0u64; MONTHLY_OPS_BINS];
        if window_days == 0 {
            return hist;
        }
        for &count in self.ops_per_card.values() {
            let monthly = (count as f64 * 30.0 / window_days as f64).round() as i64;
            let value = monthly.clamp(1, MONTHLY_OPS_BINS as i64);
            hist[(value - 1) as usize] += 1;
        }
        hist
    }

    /// Per-store operation counts dropped into 20-transaction bins, clamped
    /// into the top bin.
    pub fn store_ops_histogram(&self) -> Vec<u64> {
        let mut hist = vec![0u64; STORE_SIZE_BINS];
        for &count in self.ops_per_store.values() {
            let bin = ((count / 20) as usize).min(STORE_SIZE_BINS - 1);
            hist[bin] += 1;
        }
        hist
    }

    /// Gap histogram bin, zero when out of range.
    pub fn gap_count(&self, hours: usize) -> u64 {
        self.gap_counts.get(hours).copied().unwrap_or(0)
    }

    pub fn total_gaps(&self) -> u64 {
        self.gap_counts.iter().sum::<u64>() + self.gap_overflow
    }

    /// True when `center` strictly dominates the `halo` bins on each side.
    pub fn gap_peak_at(&self, center: usize, halo: usize) -> bool {
        let peak = self.gap_count(center);
        if peak == 0 {
            return false;
        }
        (1..=halo).all(|d| {
            peak > self.gap_count(center + d) && (d > center || peak > self.gap_count(center - d))
        })
    }

    fn record_gap(&mut self, hours: u64) {
        let hours = hours as usize;
        if hours >= MAX_GAP_HOURS {
            self.gap_overflow += 1;
            return;
        }
        if self.gap_counts.len() <= hours {
            self.gap_counts.resize(hours + 1, 0);
        }
        self.gap_counts[hours] += 1;
    }
}

/// One pass over a day-ordered stream.
///
/// Within a (day, card) group the hours are sorted before gaps are taken, so
/// gaps follow chronological order regardless of how records were emitted
/// inside a day. Streams whose day column ever decreases are rejected.
pub fn compute_marginals<R: Real, I>(records: I, opts: &ComputeOptions) -> Result<MarginalSet<R>>
where
    I: IntoIterator<Item = TransactionRecord<R>>,
{
    let mut m = MarginalSet::new();
    let mut seen_any = false;

    // State for the day currently being buffered.
    let mut current_day: u32 = 0;
    let mut day_hours: HashMap<u64, Vec<u8>> = HashMap::new();

    // Cross-day state.
    let mut previous_day: Option<u32> = None;
    let mut previous_active: HashSet<u64> = HashSet::new();
    let mut last_timestamp: HashMap<u64, u64> = HashMap::new();
    let mut activity: HashMap<u32, (u64, u64)> = HashMap::new();

    let flush_day = |m: &mut MarginalSet<R>,
                     day: u32,
                     day_hours: &mut HashMap<u64, Vec<u8>>,
                     previous_day: &mut Option<u32>,
                     previous_active: &mut HashSet<u64>,
                     last_timestamp: &mut HashMap<u64, u64>,
                     activity: &mut HashMap<u32, (u64, u64)>| {
        let mut active = HashSet::with_capacity(day_hours.len());
        let consecutive = *previous_day == Some(day.wrapping_sub(1)) && day > 0;
        let mut new_cards = 0u64;
        let mut repeating = 0u64;
        for (card, hours) in day_hours.iter_mut() {
            if consecutive && previous_active.contains(card) {
                repeating += 1;
            } else {
                new_cards += 1;
            }
            hours.sort_unstable();
            for &h in hours.iter() {
                let ts = u64::from(day) * 24 + u64::from(h);
                if let Some(prev) = last_timestamp.get(card) {
                    m.record_gap(ts - prev);
                }
                last_timestamp.insert(*card, ts);
            }
            active.insert(*card);
        }
        activity.insert(day, (new_cards, repeating));
        *previous_active = active;
        *previous_day = Some(day);
        day_hours.clear();
    };

    for rec in records {
        if !seen_any {
            seen_any = true;
            m.first_day = rec.day;
            current_day = rec.day;
        } else if rec.day < current_day {
            return Err(Error::UnsortedInput {
                previous: current_day,
                found: rec.day,
            });
        } else if rec.day > current_day {
            flush_day(
                &mut m,
                current_day,
                &mut day_hours,
                &mut previous_day,
                &mut previous_active,
                &mut last_timestamp,
                &mut activity,
            );
            current_day = rec.day;
        }

        if rec.hour >= 24 {
            return Err(Error::Domain(format!(
                "record on day {} carries hour {}",
                rec.day, rec.hour
            )));
        }

        m.total_records += 1;
        m.last_day = rec.day;
        let hour = usize::from(rec.hour);
        m.hour_counts[hour] += 1;
        m.hour_amounts[hour] = m.hour_amounts[hour] + rec.amount;
        let dow = ((u64::from(opts.start_day_of_week) + u64::from(rec.day)) % 7) as usize;
        m.dow_counts[dow] += 1;
        m.dow_amounts[dow] = m.dow_amounts[dow] + rec.amount;
        m.amount_counts[amount_to_bin(rec.amount.to_f64().unwrap_or(0.0))] += 1;
        *m.ops_per_card.entry(rec.card_id).or_insert(0) += 1;
        *m.ops_per_store.entry(rec.store_id).or_insert(0) += 1;
        day_hours.entry(rec.card_id).or_default().push(rec.hour);
    }

    if !seen_any {
        return Err(Error::EmptyData(
            "transaction stream holds no records".into(),
        ));
    }
    flush_day(
        &mut m,
        current_day,
        &mut day_hours,
        &mut previous_day,
        &mut previous_active,
        &mut last_timestamp,
        &mut activity,
    );

    m.day_activity = (m.first_day..=m.last_day)
        .map(|day| {
            let (new_cards, repeating_cards) = activity.get(&day).copied().unwrap_or((0, 0));
            DayActivity {
                day,
                new_cards,
                repeating_cards,
            }
        })
        .collect();
    Ok(m)
}

/// Per-day counts of new versus repeating cards over a day-ordered stream.
pub fn new_vs_repeating<R: Real, I>(records: I) -> Result<Vec<DayActivity>>
where
    I: IntoIterator<Item = TransactionRecord<R>>,
{
    compute_marginals(records, &ComputeOptions::default()).map(|m| m.day_activity)
}
