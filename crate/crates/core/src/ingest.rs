//! Parsing external transaction logs and fitting input tables from them.
//!
//! Parsing snaps amounts onto the model's 25-unit bin midpoints — a
//! deliberately lossy step, since the model is bin-based. Malformed lines are
//! reported individually with their line numbers and tolerated up to an error
//! budget, so one bad row does not sink a large import.

use std::collections::HashMap;
use std::io::BufRead;

use crate::distmodel::{
    amount_from_bin, amount_to_bin, DistributionTable, ModelDistributions, AMOUNT_BINS, DAY_BINS,
    HOUR_BINS, MONTHLY_OPS_BINS, STORE_SIZE_BINS,
};
use crate::error::{Error, Result};
use crate::generator::TransactionRecord;
use crate::real::{real_from_count, Real};

/// Which input column holds which record field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ColumnMap {
    pub day: usize,
    pub card: usize,
    pub hour: usize,
    pub amount: usize,
    pub store: usize,
}

impl Default for ColumnMap {
    fn default() -> Self {
        Self {
            day: 0,
            card: 1,
            hour: 2,
            amount: 3,
            store: 4,
        }
    }
}

impl ColumnMap {
    pub fn validate(&self) -> Result<()> {
        let mut cols = [self.day, self.card, self.hour, self.amount, self.store];
        cols.sort_unstable();
        if cols.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("column indices must be distinct".into()));
        }
        Ok(())
    }

    fn max_index(&self) -> usize {
        [self.day, self.card, self.hour, self.amount, self.store]
            .into_iter()
            .max()
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParseOptions {
    pub delimiter: char,
    pub has_header: bool,
    pub columns: ColumnMap,
}

impl Default for ParseOptions {
    fn default() -> Self {
        Self {
            delimiter: ',',
            has_header: true,
            columns: ColumnMap::default(),
        }
    }
}

/// Streaming reader over a delimited transaction log.
///
/// Yields one `Result` per data line; errors carry the 1-based line number
/// and are safe to skip, so callers decide how tolerant to be.
pub struct TransactionReader<B, R: Real> {
    lines: std::io::Lines<B>,
    options: ParseOptions,
    line_no: u64,
    skipped_header: bool,
    _scalar: std::marker::PhantomData<R>,
}

/// Parse a delimited text stream into transaction records.
pub fn parse_transactions<B: BufRead, R: Real>(
    input: B,
    options: &ParseOptions,
) -> Result<TransactionReader<B, R>> {
    options.columns.validate()?;
    Ok(TransactionReader {
        lines: input.lines(),
        options: *options,
        line_no: 0,
        skipped_header: false,
        _scalar: std::marker::PhantomData,
    })
}

impl<B: BufRead, R: Real> TransactionReader<B, R> {
    fn parse_line(&self, line: &str) -> Result<TransactionRecord<R>> {
        let cols = &self.options.columns;
        let fields: Vec<&str> = line.split(self.options.delimiter).collect();
        if fields.len() <= cols.max_index() {
            return Err(self.error(format!(
                "expected at least {} fields, found {}",
                cols.max_index() + 1,
                fields.len()
            )));
        }
        let day: u32 = self.field(&fields, cols.day, "day")?;
        let card_id: u64 = self.field(&fields, cols.card, "card")?;
        let hour: u8 = self.field(&fields, cols.hour, "hour")?;
        if hour >= 24 {
            return Err(self.error(format!("hour {hour} out of range 0..24")));
        }
        let amount: f64 = self.field(&fields, cols.amount, "amount")?;
        if !amount.is_finite() || amount < 0.0 {
            return Err(self.error("amount must be finite and non-negative".into()));
        }
        let store_id: u64 = self.field(&fields, cols.store, "store")?;
        Ok(TransactionRecord {
            day,
            card_id,
            hour,
            amount: amount_from_bin(amount_to_bin(amount))?,
            store_id,
        })
    }

    fn field<T: std::str::FromStr>(&self, fields: &[&str], idx: usize, name: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        fields[idx]
            .trim()
            .parse()
            .map_err(|e| self.error(format!("bad {name} `{}`: {e}", fields[idx].trim())))
    }

    fn error(&self, message: String) -> Error {
        Error::Parse {
            line: self.line_no,
            message,
        }
    }
}

impl<B: BufRead, R: Real> Iterator for TransactionReader<B, R> {
    type Item = Result<TransactionRecord<R>>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let line = match self.lines.next()? {
                Ok(l) => l,
                Err(e) => return Some(Err(e.into())),
            };
            self.line_no += 1;
            if self.options.has_header && !self.skipped_header {
                self.skipped_header = true;
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            return Some(self.parse_line(&line));
        }
    }
}

/// Controls for table fitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FitOptions {
    /// Window length for the monthly rescaling; derived from the observed day
    /// span when absent.
    pub window_days: Option<u32>,
    /// Day of week of day 0; 0 = Monday.
    pub start_day_of_week: u8,
    /// Malformed lines tolerated before fitting aborts.
    pub max_parse_errors: u64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            window_days: None,
            start_day_of_week: 0,
            max_parse_errors: 100,
        }
    }
}

/// What a fit saw while consuming its input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FitSummary {
    pub records: u64,
    pub cards: u64,
    pub stores: u64,
    pub window_days: u32,
    /// Cards whose rescaled monthly count had to clamp into the top bin.
    pub cards_clamped: u64,
    /// Stores whose count had to clamp into the top bin.
    pub stores_clamped: u64,
    pub parse_errors: u64,
}

/// Fit the five input tables from a record stream.
///
/// Hour, day-of-week and amount tables are the normalized empirical
/// marginals. The monthly-operations table comes from per-card counts
/// rescaled to 30-day months and clamped into 1..=100; the store table from
/// per-store counts in 20-transaction bins. Items may be parse results;
/// errors are counted against the budget rather than aborting outright.
pub fn fit_distributions<R: Real, I>(
    records: I,
    options: &FitOptions,
) -> Result<(ModelDistributions<R>, FitSummary)>
where
    I: IntoIterator<Item = Result<TransactionRecord<R>>>,
{
    let mut summary = FitSummary::default();
    let mut hour = vec![0u64; HOUR_BINS];
    let mut dow = vec![0u64; DAY_BINS];
    let mut amount = vec![0u64; AMOUNT_BINS];
    let mut per_card: HashMap<u64, u64> = HashMap::new();
    let mut per_store: HashMap<u64, u64> = HashMap::new();
    let mut day_span: Option<(u32, u32)> = None;

    for item in records {
        let rec = match item {
            Ok(rec) => rec,
            Err(Error::Parse { .. }) => {
                summary.parse_errors += 1;
                if summary.parse_errors > options.max_parse_errors {
                    return Err(Error::ErrorBudgetExceeded {
                        errors: summary.parse_errors,
                        budget: options.max_parse_errors,
                    });
                }
                continue;
            }
            Err(other) => return Err(other),
        };
        summary.records += 1;
        hour[usize::from(rec.hour)] += 1;
        dow[((u64::from(options.start_day_of_week) + u64::from(rec.day)) % 7) as usize] += 1;
        amount[amount_to_bin(rec.amount.to_f64().unwrap_or(0.0))] += 1;
        *per_card.entry(rec.card_id).or_insert(0) += 1;
        *per_store.entry(rec.store_id).or_insert(0) += 1;
        day_span = Some(match day_span {
            None => (rec.day, rec.day),
            Some((lo, hi)) => (lo.min(rec.day), hi.max(rec.day)),
        });
    }

    if summary.records == 0 {
        return Err(Error::EmptyData("no parseable transactions to fit".into()));
    }
    let (first, last) = day_span.expect("records imply a day span");
    let window = options.window_days.unwrap_or(last - first + 1).max(1);
    summary.window_days = window;
    summary.cards = per_card.len() as u64;
    summary.stores = per_store.len() as u64;

    let mut num_ops = vec![0u64; MONTHLY_OPS_BINS];
    for &count in per_card.values() {
        let monthly = (count as f64 * 30.0 / window as f64).round() as i64;
        if monthly > MONTHLY_OPS_BINS as i64 {
            summary.cards_clamped += 1;
        }
        let value = monthly.clamp(1, MONTHLY_OPS_BINS as i64);
        num_ops[(value - 1) as usize] += 1;
    }

    let mut stores_hist = vec![0u64; STORE_SIZE_BINS];
    for &count in per_store.values() {
        let bin = (count / 20) as usize;
        if bin >= STORE_SIZE_BINS {
            summary.stores_clamped += 1;
        }
        stores_hist[bin.min(STORE_SIZE_BINS - 1)] += 1;
    }

    let tables = ModelDistributions::new(
        counts_table(&hour)?,
        counts_table(&dow)?,
        counts_table(&amount)?,
        counts_table(&num_ops)?,
        counts_table(&stores_hist)?,
    )?;
    Ok((tables, summary))
}

fn counts_table<R: Real>(counts: &[u64]) -> Result<DistributionTable<R>> {
    let raw: Vec<R> = counts.iter().map(|c| real_from_count(*c)).collect();
    DistributionTable::normalize(&raw)
}
