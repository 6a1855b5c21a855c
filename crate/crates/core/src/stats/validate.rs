//! Distribution distances and the validation report.
//!
//! The hard-coded marginals (hour, day of week, amount) are checked straight
//! against their input tables. The emergent ones are checked against
//! references derived from the run itself: per-card operations against the
//! realized activity draw, per-store operations against each store's expected
//! share, and the gap histogram against the 24-hour periodicity it should
//! develop.

use std::fmt;
use std::fs;
use std::path::Path;

use super::{compute_marginals, ComputeOptions, MarginalSet};
use crate::distmodel::{DistributionTable, MONTHLY_OPS_BINS, STORE_SIZE_BINS};
use crate::error::{Error, Result};
use crate::generator::{initial_cards, initial_stores, GenerationConfig, TransactionRecord};
use crate::real::{real, real_from_count, Real};

/// Half the L1 distance between two probability vectors of equal length.
pub fn tv_distance<R: Real>(p: &[R], q: &[R]) -> R {
    let two = real(2.0);
    p.iter()
        .zip(q)
        .fold(R::zero(), |acc, (a, b)| acc + (*a - *b).abs())
        / two
}

/// Largest absolute difference between the two running cumulative sums.
pub fn ks_statistic<R: Real>(p: &[R], q: &[R]) -> R {
    let mut cp = R::zero();
    let mut cq = R::zero();
    let mut worst = R::zero();
    for (a, b) in p.iter().zip(q) {
        cp = cp + *a;
        cq = cq + *b;
        worst = worst.max((cp - cq).abs());
    }
    worst
}

/// Compare an empirical count histogram against a reference table.
///
/// Counts are normalized first; returns `(tv, ks)`, both in `[0, 1]`.
pub fn compare<R: Real>(empirical: &[u64], reference: &DistributionTable<R>) -> Result<(R, R)> {
    if empirical.len() != reference.bin_count() {
        return Err(Error::BinMismatch {
            expected: reference.bin_count(),
            actual: empirical.len(),
        });
    }
    let total: u64 = empirical.iter().sum();
    if total == 0 {
        return Err(Error::EmptyData("empirical histogram holds no mass".into()));
    }
    let n = real_from_count::<R>(total);
    let p: Vec<R> = empirical
        .iter()
        .map(|c| real_from_count::<R>(*c) / n)
        .collect();
    Ok((
        tv_distance(&p, reference.weights()),
        ks_statistic(&p, reference.weights()),
    ))
}

/// Acceptance bounds per marginal, as total-variation distances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationThresholds<R: Real = f64> {
    pub hour_tv: R,
    pub day_of_week_tv: R,
    pub amount_tv: R,
    pub ops_per_card_tv: R,
    pub ops_per_store_tv: R,
    /// Gap periodicity is only judged with at least this many gaps.
    pub min_gap_samples: u64,
}

impl<R: Real> Default for ValidationThresholds<R> {
    fn default() -> Self {
        Self {
            hour_tv: real(0.05),
            day_of_week_tv: real(0.05),
            amount_tv: real(0.05),
            ops_per_card_tv: real(0.07),
            // Looser: small store populations show a visible finite-size
            // effect in the per-store histogram.
            ops_per_store_tv: real(0.10),
            min_gap_samples: 10_000,
        }
    }
}

/// Distance measurements for one marginal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginalCheck<R: Real = f64> {
    pub name: &'static str,
    pub tv: R,
    pub ks: R,
    pub samples: u64,
    pub threshold: R,
    pub passed: bool,
}

/// Outcome of validating one transaction stream against its configuration.
#[derive(Debug, Clone)]
pub struct ValidationReport<R: Real = f64> {
    pub checks: Vec<MarginalCheck<R>>,
    pub gap_samples: u64,
    /// Inter-transaction gaps show a local maximum at 24 hours.
    pub gap_peak_24h: bool,
    /// Same at 48 hours; informational, not gating.
    pub gap_peak_48h: bool,
    /// True when the gap stream was too small to judge periodicity.
    pub gap_check_skipped: bool,
    pub total_records: u64,
    pub window_days: u32,
    pub passed: bool,
}

impl<R: Real> ValidationReport<R> {
    pub fn failed_checks(&self) -> impl Iterator<Item = &MarginalCheck<R>> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl<R: Real> fmt::Display for ValidationReport<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "records: {}", self.total_records)?;
        writeln!(f, "window_days: {}", self.window_days)?;
        for c in &self.checks {
            writeln!(f, "{}_tv: {:.6}", c.name, c.tv)?;
            writeln!(f, "{}_ks: {:.6}", c.name, c.ks)?;
            writeln!(f, "{}_samples: {}", c.name, c.samples)?;
            writeln!(f, "{}_threshold: {:.6}", c.name, c.threshold)?;
            writeln!(f, "{}_pass: {}", c.name, c.passed)?;
        }
        writeln!(f, "gap_samples: {}", self.gap_samples)?;
        if self.gap_check_skipped {
            writeln!(f, "gap_peak_24h: skipped (too few gaps)")?;
        } else {
            writeln!(f, "gap_peak_24h: {}", self.gap_peak_24h)?;
        }
        writeln!(f, "gap_peak_48h: {}", self.gap_peak_48h)?;
        writeln!(f, "overall: {}", if self.passed { "PASS" } else { "FAIL" })
    }
}

/// Validate a day-ordered record stream against the configuration that is
/// claimed to have produced it.
pub fn validate<R: Real, I>(
    records: I,
    config: &GenerationConfig<R>,
    thresholds: &ValidationThresholds<R>,
) -> Result<ValidationReport<R>>
where
    I: IntoIterator<Item = TransactionRecord<R>>,
{
    let opts = ComputeOptions {
        start_day_of_week: config.start_day_of_week,
    };
    let marginals = compute_marginals(records, &opts)?;
    validate_marginals(&marginals, config, thresholds)
}

/// Validate marginals that were already computed.
pub fn validate_marginals<R: Real>(
    marginals: &MarginalSet<R>,
    config: &GenerationConfig<R>,
    thresholds: &ValidationThresholds<R>,
) -> Result<ValidationReport<R>> {
    let dist = &config.distributions;
    let mut checks = Vec::with_capacity(5);

    let mut push = |name: &'static str, pair: (R, R), samples: u64, threshold: R| {
        let (tv, ks) = pair;
        checks.push(MarginalCheck {
            name,
            tv,
            ks,
            samples,
            threshold,
            passed: tv < threshold,
        });
    };

    push(
        "hour_of_day",
        compare(&marginals.hour_counts, &dist.hourly)?,
        marginals.total_records,
        thresholds.hour_tv,
    );
    push(
        "day_of_week",
        compare(&marginals.dow_counts, &dist.daily)?,
        marginals.total_records,
        thresholds.day_of_week_tv,
    );
    push(
        "amount",
        compare(&marginals.amount_counts, &dist.quantity)?,
        marginals.total_records,
        thresholds.amount_tv,
    );

    // Emergent: per-card operations against their exact law under this
    // configuration — each realized activity pushed through the Poisson
    // window count, rescaled onto 30-day months, conditioned on activity.
    let cards = initial_cards(config)?;
    let window = config.n_days.max(1);
    let ops_reference = expected_ops_per_card_law(
        cards
            .iter()
            .map(|c| c.expected_monthly_ops.to_f64().unwrap_or(0.0)),
        window,
    )?;
    push(
        "ops_per_card",
        compare(&marginals.monthly_ops_histogram(window), &ops_reference)?,
        marginals.ops_per_card.len() as u64,
        thresholds.ops_per_card_tv,
    );

    // Emergent: per-store operations against their exact law — each store's
    // expected share of the observed total pushed through the Poisson count,
    // dropped into the same 20-transaction bins.
    let stores = initial_stores(config)?;
    let weight_sum = stores.iter().fold(R::zero(), |acc, s| acc + s.size_weight);
    let total = real_from_count::<R>(marginals.total_records);
    let store_reference = expected_ops_per_store_law(
        stores
            .iter()
            .map(|s| (s.size_weight / weight_sum * total).to_f64().unwrap_or(0.0)),
    )?;
    push(
        "ops_per_store",
        compare(&marginals.store_ops_histogram(), &store_reference)?,
        marginals.ops_per_store.len() as u64,
        thresholds.ops_per_store_tv,
    );

    let gap_samples = marginals.total_gaps();
    let gap_check_skipped = gap_samples < thresholds.min_gap_samples;
    let gap_peak_24h = marginals.gap_peak_at(24, 4);
    let gap_peak_48h = marginals.gap_peak_at(48, 3);

    let passed = checks.iter().all(|c| c.passed) && (gap_check_skipped || gap_peak_24h);
    Ok(ValidationReport {
        checks,
        gap_samples,
        gap_peak_24h,
        gap_peak_48h,
        gap_check_skipped,
        total_records: marginals.total_records,
        window_days: marginals.window_days(),
        passed,
    })
}

/// Law of the active-card monthly histogram: mix, over cards, the Poisson
/// window count conditioned on being positive, mapped through the same
/// rescale-round-clamp as the empirical side.
fn expected_ops_per_card_law<R: Real>(
    monthly_rates: impl Iterator<Item = f64>,
    window_days: u32,
) -> Result<DistributionTable<R>> {
    let t = f64::from(window_days);
    let mut mass = vec![0.0f64; MONTHLY_OPS_BINS];
    for e in monthly_rates {
        let lambda = e * t / 30.0;
        accumulate_poisson_mass(lambda, &mut mass, |k| {
            let monthly = (k as f64 * 30.0 / t).round() as i64;
            (monthly.clamp(1, MONTHLY_OPS_BINS as i64) - 1) as usize
        });
    }
    mass_to_table(&mass)
}

/// Law of the active-store histogram: mix, over stores, the Poisson count at
/// the store's expected volume, in 20-transaction bins.
fn expected_ops_per_store_law<R: Real>(
    expected_counts: impl Iterator<Item = f64>,
) -> Result<DistributionTable<R>> {
    let mut mass = vec![0.0f64; STORE_SIZE_BINS];
    for lambda in expected_counts {
        accumulate_poisson_mass(lambda, &mut mass, |k| {
            ((k / 20) as usize).min(STORE_SIZE_BINS - 1)
        });
    }
    mass_to_table(&mass)
}

/// Spread the pmf of Poisson(lambda), restricted to k >= 1, over histogram
/// bins chosen by `bin_of`. Probabilities are evaluated in log space so large
/// rates stay stable.
fn accumulate_poisson_mass(lambda: f64, mass: &mut [f64], bin_of: impl Fn(u64) -> usize) {
    if lambda <= 0.0 {
        return;
    }
    let sd = lambda.sqrt();
    let lo = ((lambda - 12.0 * sd).floor().max(1.0)) as u64;
    let hi = ((lambda + 12.0 * sd).ceil() as u64).max(lo + 20);
    let ln_lambda = lambda.ln();
    for k in lo..=hi {
        let lp = k as f64 * ln_lambda - lambda - ln_factorial(k);
        let p = lp.exp();
        if p > 0.0 {
            mass[bin_of(k)] += p;
        }
    }
}

fn ln_factorial(n: u64) -> f64 {
    if n < 16 {
        return (2..=n).map(|k| (k as f64).ln()).sum();
    }
    // Stirling's series; relative error far below what these checks resolve.
    let x = n as f64;
    x * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI * x).ln() + 1.0 / (12.0 * x)
        - 1.0 / (360.0 * x * x * x)
}

fn mass_to_table<R: Real>(mass: &[f64]) -> Result<DistributionTable<R>> {
    let weights: Vec<R> = mass.iter().map(|m| real(*m)).collect();
    DistributionTable::normalize(&weights)
}

/// Write the six histogram panels as two-column (bin, probability) files,
/// ready for external plotting.
pub fn write_panels<R: Real>(
    marginals: &MarginalSet<R>,
    window_days: u32,
    dir: &Path,
) -> Result<()> {
    fs::create_dir_all(dir)?;

    let ops = marginals.monthly_ops_histogram(window_days);
    write_panel(dir, "ops_per_card.tsv", ops.iter().enumerate(), |i| {
        (i + 1).to_string()
    })?;
    write_panel(
        dir,
        "amounts.tsv",
        marginals.amount_counts.iter().enumerate(),
        |i| format!("{:.1}", (i as f64 + 0.5) * 25.0),
    )?;
    write_panel(
        dir,
        "day_of_week.tsv",
        marginals.dow_counts.iter().enumerate(),
        |i| i.to_string(),
    )?;
    write_panel(
        dir,
        "hour_of_day.tsv",
        marginals.hour_counts.iter().enumerate(),
        |i| i.to_string(),
    )?;
    write_panel(
        dir,
        "inter_tx_gaps.tsv",
        marginals.gap_counts.iter().enumerate(),
        |i| i.to_string(),
    )?;
    let stores = marginals.store_ops_histogram();
    write_panel(dir, "ops_per_store.tsv", stores.iter().enumerate(), |i| {
        (i * 20).to_string()
    })?;
    Ok(())
}

fn write_panel<'a>(
    dir: &Path,
    name: &str,
    bins: impl Iterator<Item = (usize, &'a u64)>,
    label: impl Fn(usize) -> String,
) -> Result<()> {
    let rows: Vec<(usize, u64)> = bins.map(|(i, c)| (i, *c)).collect();
    let total: u64 = rows.iter().map(|(_, c)| c).sum();
    let denom = total.max(1) as f64;
    let mut out = String::with_capacity(rows.len() * 16 + 16);
    out.push_str("bin\tprobability\n");
    for (i, count) in rows {
        out.push_str(&format!("{}\t{:.8}\n", label(i), count as f64 / denom));
    }
    fs::write(dir.join(name), out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::generate;

    #[test]
    fn identical_histograms_have_zero_distance() {
        let t = DistributionTable::<f64>::normalize(&[1.0, 2.0, 3.0]).unwrap();
        let (tv, ks) = compare(&[10, 20, 30], &t).unwrap();
        assert!(tv.abs() < 1e-12);
        assert!(ks.abs() < 1e-12);
    }

    #[test]
    fn disjoint_masses_are_maximally_distant() {
        let t = DistributionTable::<f64>::normalize(&[0.0, 1.0]).unwrap();
        let (tv, _) = compare(&[7, 0], &t).unwrap();
        assert!((tv - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hand_computed_tv_and_ks() {
        let t = DistributionTable::<f64>::normalize(&[0.25, 0.75]).unwrap();
        let (tv, ks) = compare(&[1, 1], &t).unwrap();
        assert!((tv - 0.25).abs() < 1e-12);
        assert!((ks - 0.25).abs() < 1e-12);
    }

    #[test]
    fn distances_are_symmetric() {
        let p = [0.1, 0.4, 0.5];
        let q = [0.3, 0.3, 0.4];
        assert_eq!(tv_distance(&p, &q), tv_distance(&q, &p));
        assert_eq!(ks_statistic(&p, &q), ks_statistic(&q, &p));
    }

    #[test]
    fn bin_mismatch_is_rejected() {
        let t = DistributionTable::<f64>::uniform(3).unwrap();
        assert!(matches!(
            compare(&[1, 2], &t),
            Err(Error::BinMismatch { .. })
        ));
    }

    #[test]
    fn empty_histogram_is_rejected() {
        let t = DistributionTable::<f64>::uniform(2).unwrap();
        assert!(matches!(compare(&[0, 0], &t), Err(Error::EmptyData(_))));
    }

    #[test]
    fn self_consistency_at_small_scale() {
        let config = GenerationConfig::<f64>::new(400, 100, 60, 11);
        let records = generate(&config).unwrap();
        // Small runs are noisy; loosen the bounds but keep the machinery hot.
        let thresholds = ValidationThresholds {
            hour_tv: 0.10,
            day_of_week_tv: 0.10,
            amount_tv: 0.10,
            ops_per_card_tv: 0.15,
            ops_per_store_tv: 0.25,
            min_gap_samples: 1_000_000, // skip periodicity at this size
        };
        let report = validate(records, &config, &thresholds).unwrap();
        assert!(report.passed, "{report}");
    }

    #[test]
    fn corrupted_amounts_are_detected() {
        let config = GenerationConfig::<f64>::new(400, 100, 40, 12);
        let mut records = generate(&config).unwrap();
        for r in records.iter_mut() {
            r.amount = 12.5; // squash everything into the first bin
        }
        let report = validate(records, &config, &ValidationThresholds::default()).unwrap();
        assert!(!report.passed);
        assert!(report.failed_checks().any(|c| c.name == "amount"));
    }

    #[test]
    fn empty_stream_propagates() {
        let config = GenerationConfig::<f64>::new(10, 10, 1, 1);
        let err = validate(
            Vec::<TransactionRecord<f64>>::new(),
            &config,
            &ValidationThresholds::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::EmptyData(_)));
    }

    #[test]
    fn panels_land_on_disk_and_normalize() {
        let config = GenerationConfig::<f64>::new(100, 30, 20, 3);
        let records = generate(&config).unwrap();
        let m = compute_marginals(records, &ComputeOptions::default()).unwrap();
        let dir = std::env::temp_dir().join(format!("cardflow-panels-{}", std::process::id()));
        write_panels(&m, 20, &dir).unwrap();
        for name in [
            "ops_per_card.tsv",
            "amounts.tsv",
            "day_of_week.tsv",
            "hour_of_day.tsv",
            "inter_tx_gaps.tsv",
            "ops_per_store.tsv",
        ] {
            let text = fs::read_to_string(dir.join(name)).unwrap();
            let mut lines = text.lines();
            assert_eq!(lines.next(), Some("bin\tprobability"));
            let sum: f64 = lines
                .map(|l| l.split('\t').nth(1).unwrap().parse::<f64>().unwrap())
                .sum();
            assert!((sum - 1.0).abs() < 1e-4, "{name} sums to {sum}");
        }
        fs::remove_dir_all(&dir).ok();
    }
}
