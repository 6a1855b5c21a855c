//! Discrete probability tables and the sampling kernels built on them.
//!
//! The model runs on five input tables: hour-of-day (24 bins), day-of-week
//! (7 bins, Monday first), transaction amount (50 bins of 25 monetary units),
//! monthly operations per card (100 bins for 1..=100 operations) and store
//! size (50 bins of 20 transactions). [`ModelDistributions`] bundles the five
//! with their arities enforced; [`DistributionTable`] is the underlying
//! normalized table usable with any bin count.

mod config_file;
mod cpd;
mod defaults;

pub use config_file::{
    distributions_fingerprint, load_distributions, parse_distributions, save_distributions,
    write_distributions_string,
};
pub use cpd::{cpd, CpdCurve};
pub use defaults::default_distributions;

use crate::error::{Error, Result};
use crate::real::{real, Real};
use crate::rng::RandomStream;

/// What a table's bins mean, and how many of them there must be.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinSemantics {
    /// 24 bins, one per hour of the day.
    HourOfDay,
    /// 7 bins, Monday first.
    DayOfWeek,
    /// 50 amount bins of 25 monetary units each.
    AmountBin,
    /// 100 bins for expected monthly operations 1..=100.
    MonthlyOps,
    /// 50 store-size bins of 20 transactions each.
    StoreSizeBin,
}

impl BinSemantics {
    pub const fn cardinality(self) -> usize {
        match self {
            BinSemantics::HourOfDay => 24,
            BinSemantics::DayOfWeek => 7,
            BinSemantics::AmountBin => 50,
            BinSemantics::MonthlyOps => 100,
            BinSemantics::StoreSizeBin => 50,
        }
    }
}

pub const HOUR_BINS: usize = BinSemantics::HourOfDay.cardinality();
pub const DAY_BINS: usize = BinSemantics::DayOfWeek.cardinality();
pub const AMOUNT_BINS: usize = BinSemantics::AmountBin.cardinality();
pub const MONTHLY_OPS_BINS: usize = BinSemantics::MonthlyOps.cardinality();
pub const STORE_SIZE_BINS: usize = BinSemantics::StoreSizeBin.cardinality();

/// Width of one amount bin, in monetary units.
pub const AMOUNT_BIN_STEP: f64 = 25.0;
/// Width of one store-size bin, in transactions.
pub const STORE_SIZE_BIN_STEP: f64 = 20.0;

/// A normalized discrete probability table over indexed bins.
///
/// Immutable after construction and safe to share across threads. Sampling
/// borrows the table and owns nothing, so one table can feed any number of
/// concurrent streams.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionTable<R: Real = f64> {
    weights: Vec<R>,
    cumulative: Vec<R>,
}

impl<R: Real> DistributionTable<R> {
    /// Normalize raw non-negative weights into a probability table.
    ///
    /// Order is preserved; each output weight is the input divided by the
    /// input sum.
    pub fn normalize(raw: &[R]) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::Domain(
                "cannot normalize an empty weight list".into(),
            ));
        }
        let mut sum = R::zero();
        for (i, w) in raw.iter().enumerate() {
            if !w.is_finite() || *w < R::zero() {
                return Err(Error::Domain(format!(
                    "weight at index {i} is negative or non-finite"
                )));
            }
            sum = sum + *w;
        }
        if sum == R::zero() {
            return Err(Error::DegenerateDistribution);
        }
        if !sum.is_finite() {
            return Err(Error::Domain("weight sum is not finite".into()));
        }
        let weights: Vec<R> = raw.iter().map(|w| *w / sum).collect();
        Ok(Self::from_normalized(weights))
    }

    /// Uniform table over `bins` bins.
    pub fn uniform(bins: usize) -> Result<Self> {
        Self::normalize(&vec![R::one(); bins])
    }

    /// Table with all mass in a single bin.
    pub fn degenerate(bins: usize, index: usize) -> Result<Self> {
        if index >= bins {
            return Err(Error::Domain(format!(
                "degenerate index {index} outside {bins} bins"
            )));
        }
        let mut raw = vec![R::zero(); bins];
        raw[index] = R::one();
        Self::normalize(&raw)
    }

    fn from_normalized(weights: Vec<R>) -> Self {
        let mut cumulative = Vec::with_capacity(weights.len());
        let mut acc = R::zero();
        for w in &weights {
            acc = acc + *w;
            cumulative.push(acc);
        }
        Self {
            weights,
            cumulative,
        }
    }

    pub fn weights(&self) -> &[R] {
        &self.weights
    }

    pub fn bin_count(&self) -> usize {
        self.weights.len()
    }

    /// True when the weights sum to one within the scalar's tolerance.
    pub fn is_normalized(&self) -> bool {
        let sum = self.weights.iter().fold(R::zero(), |acc, w| acc + *w);
        (sum - R::one()).abs() <= R::unit_sum_tolerance()
    }

    /// Draw one bin index with probability equal to its weight.
    ///
    /// Consumes exactly one draw from `rng` per call, so callers can rely on
    /// stream alignment no matter which bin comes out.
    pub fn sample_bin(&self, rng: &mut RandomStream) -> usize {
        let u: R = rng.next_real();
        let idx = self.cumulative.partition_point(|c| *c <= u);
        if idx < self.weights.len() {
            idx
        } else {
            // u landed beyond the accumulated total (floating-point slack);
            // fall back to the last bin that carries mass.
            self.weights
                .iter()
                .rposition(|w| *w > R::zero())
                .unwrap_or(self.weights.len() - 1)
        }
    }
}

/// Midpoint of an amount bin: bin 0 is 12.5, bin 49 is 1237.5.
pub fn amount_from_bin<R: Real>(bin_index: usize) -> Result<R> {
    if bin_index >= AMOUNT_BINS {
        return Err(Error::Domain(format!(
            "amount bin {bin_index} outside 0..{AMOUNT_BINS}"
        )));
    }
    Ok(real((bin_index as f64 + 0.5) * AMOUNT_BIN_STEP))
}

/// Snap an arbitrary non-negative amount to the nearest bin midpoint's bin.
/// Values past the last bin clamp into it.
pub fn amount_to_bin(amount: f64) -> usize {
    let raw = (amount / AMOUNT_BIN_STEP - 0.5).round() as i64;
    raw.clamp(0, AMOUNT_BINS as i64 - 1) as usize
}

/// Midpoint of a store-size bin: bin 0 is 10, bin 49 is 990.
pub fn store_weight_from_bin<R: Real>(bin_index: usize) -> Result<R> {
    if bin_index >= STORE_SIZE_BINS {
        return Err(Error::Domain(format!(
            "store size bin {bin_index} outside 0..{STORE_SIZE_BINS}"
        )));
    }
    Ok(real((bin_index as f64 + 0.5) * STORE_SIZE_BIN_STEP))
}

/// The five input tables of the model, arities enforced.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelDistributions<R: Real = f64> {
    pub hourly: DistributionTable<R>,
    pub daily: DistributionTable<R>,
    pub quantity: DistributionTable<R>,
    pub num_ops: DistributionTable<R>,
    pub num_ops_stores: DistributionTable<R>,
}

impl<R: Real> ModelDistributions<R> {
    pub fn new(
        hourly: DistributionTable<R>,
        daily: DistributionTable<R>,
        quantity: DistributionTable<R>,
        num_ops: DistributionTable<R>,
        num_ops_stores: DistributionTable<R>,
    ) -> Result<Self> {
        check_arity(&hourly, BinSemantics::HourOfDay)?;
        check_arity(&daily, BinSemantics::DayOfWeek)?;
        check_arity(&quantity, BinSemantics::AmountBin)?;
        check_arity(&num_ops, BinSemantics::MonthlyOps)?;
        check_arity(&num_ops_stores, BinSemantics::StoreSizeBin)?;
        Ok(Self {
            hourly,
            daily,
            quantity,
            num_ops,
            num_ops_stores,
        })
    }
}

impl<R: Real> Default for ModelDistributions<R> {
    fn default() -> Self {
        default_distributions()
    }
}

fn check_arity<R: Real>(table: &DistributionTable<R>, semantics: BinSemantics) -> Result<()> {
    if table.bin_count() != semantics.cardinality() {
        return Err(Error::BinMismatch {
            expected: semantics.cardinality(),
            actual: table.bin_count(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn normalize_uniform() {
        let t = DistributionTable::<f64>::normalize(&[1.0, 1.0, 1.0, 1.0]).unwrap();
        assert_eq!(t.weights(), &[0.25, 0.25, 0.25, 0.25]);
    }

    #[test]
    fn normalize_single_mass() {
        let t = DistributionTable::<f64>::normalize(&[0.0, 2.0]).unwrap();
        assert_eq!(t.weights(), &[0.0, 1.0]);
    }

    #[test]
    fn normalize_rejects_negative() {
        assert!(matches!(
            DistributionTable::<f64>::normalize(&[3.0, -1.0]),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn normalize_rejects_nan_and_empty() {
        assert!(matches!(
            DistributionTable::<f64>::normalize(&[1.0, f64::NAN]),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            DistributionTable::<f64>::normalize(&[]),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn normalize_rejects_all_zero() {
        assert!(matches!(
            DistributionTable::<f64>::normalize(&[0.0, 0.0]),
            Err(Error::DegenerateDistribution)
        ));
    }

    #[test]
    fn tables_and_curves_are_shareable_across_threads() {
        fn sync_and_send<T: Send + Sync>() {}
        sync_and_send::<DistributionTable<f64>>();
        sync_and_send::<DistributionTable<f32>>();
        sync_and_send::<ModelDistributions<f64>>();
        sync_and_send::<super::CpdCurve<f64>>();
    }

    #[test]
    fn sample_degenerate_always_hits_the_mass() {
        let t = DistributionTable::<f64>::normalize(&[0.0, 1.0, 0.0]).unwrap();
        for seed in 0..16 {
            let mut rng = RandomStream::new(seed, 0);
            for _ in 0..64 {
                assert_eq!(t.sample_bin(&mut rng), 1);
            }
        }
    }

    #[test]
    fn sample_is_deterministic_per_stream() {
        let t = DistributionTable::<f64>::uniform(24).unwrap();
        let mut a = RandomStream::new(7, 3);
        let mut b = RandomStream::new(7, 3);
        let xs: Vec<usize> = (0..256).map(|_| t.sample_bin(&mut a)).collect();
        let ys: Vec<usize> = (0..256).map(|_| t.sample_bin(&mut b)).collect();
        assert_eq!(xs, ys);
    }

    #[test]
    fn sample_uniform_frequencies_and_chi_square() {
        let t = DistributionTable::<f64>::uniform(24).unwrap();
        let mut rng = RandomStream::new(2024, 0);
        let n = 1_000_000u64;
        let mut counts = [0u64; 24];
        for _ in 0..n {
            counts[t.sample_bin(&mut rng)] += 1;
        }
        let expected = n as f64 / 24.0;
        let mut chi2 = 0.0;
        for &c in &counts {
            let freq = c as f64 / n as f64;
            assert!(
                (freq - 1.0 / 24.0).abs() < 0.005,
                "bin frequency {freq} off uniform"
            );
            let d = c as f64 - expected;
            chi2 += d * d / expected;
        }
        // 99.9% quantile of chi-square with 23 degrees of freedom.
        assert!(chi2 < 49.728, "chi2 {chi2}");
    }

    #[test]
    fn sample_tv_against_skewed_table() {
        let raw: Vec<f64> = (1..=50).map(|k| 1.0 / k as f64).collect();
        let t = DistributionTable::<f64>::normalize(&raw).unwrap();
        let mut rng = RandomStream::new(99, 1);
        let n = 200_000u64;
        let mut counts = vec![0u64; 50];
        for _ in 0..n {
            counts[t.sample_bin(&mut rng)] += 1;
        }
        let tv: f64 = counts
            .iter()
            .zip(t.weights())
            .map(|(&c, &w)| (c as f64 / n as f64 - w).abs())
            .sum::<f64>()
            / 2.0;
        assert!(tv < 0.01, "tv {tv}");
    }

    #[test]
    fn amount_bins_match_midpoints() {
        assert_eq!(amount_from_bin::<f64>(3).unwrap(), 87.5);
        assert_eq!(amount_from_bin::<f64>(1).unwrap(), 37.5);
        assert_eq!(amount_from_bin::<f64>(0).unwrap(), 12.5);
        assert!(amount_from_bin::<f64>(50).is_err());
    }

    #[test]
    fn amount_image_is_the_midpoint_grid() {
        for bin in 0..AMOUNT_BINS {
            let v = amount_from_bin::<f64>(bin).unwrap();
            assert_eq!(v, 12.5 + 25.0 * bin as f64);
            assert_eq!(amount_to_bin(v), bin);
        }
        assert_eq!(amount_from_bin::<f64>(49).unwrap(), 1237.5);
    }

    #[test]
    fn amount_snapping_picks_nearest_midpoint() {
        assert_eq!(amount_to_bin(90.0), 3); // 87.5 is closer than 112.5
        assert_eq!(amount_to_bin(0.0), 0);
        assert_eq!(amount_to_bin(10_000.0), 49);
    }

    #[test]
    fn store_weight_bins() {
        assert_eq!(store_weight_from_bin::<f64>(0).unwrap(), 10.0);
        assert_eq!(store_weight_from_bin::<f64>(49).unwrap(), 990.0);
        assert!(store_weight_from_bin::<f64>(50).is_err());
    }

    #[test]
    fn bundle_enforces_arity() {
        let bad = ModelDistributions::<f64>::new(
            DistributionTable::uniform(23).unwrap(),
            DistributionTable::uniform(7).unwrap(),
            DistributionTable::uniform(50).unwrap(),
            DistributionTable::uniform(100).unwrap(),
            DistributionTable::uniform(50).unwrap(),
        );
        assert!(matches!(
            bad,
            Err(Error::BinMismatch {
                expected: 24,
                actual: 23
            })
        ));
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent(raw in proptest::collection::vec(0.0f64..1e6, 1..64)) {
            prop_assume!(raw.iter().sum::<f64>() > 0.0);
            let once = DistributionTable::<f64>::normalize(&raw).unwrap();
            let twice = DistributionTable::<f64>::normalize(once.weights()).unwrap();
            for (a, b) in once.weights().iter().zip(twice.weights()) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }

        #[test]
        fn normalized_tables_sum_to_one(raw in proptest::collection::vec(0.0f64..1e3, 1..64)) {
            prop_assume!(raw.iter().sum::<f64>() > 1e-9);
            let t = DistributionTable::<f64>::normalize(&raw).unwrap();
            prop_assert!(t.is_normalized());
        }
    }
}
