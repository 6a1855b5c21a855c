//! Built-in input distributions.
//!
//! These are synthetic defaults, not measurements. Their shapes follow what
//! large retail card data sets look like qualitatively: near-zero night
//! activity with a sharp lunch spike at 13:00 and an evening peak around
//! 20:00-21:00; a Sunday dip but no Saturday dip; heavy-tailed amounts with
//! an extra bump just below the common 600-unit debit-withdrawal cap;
//! two-regime heavy-tailed monthly activity per card; and heavy-tailed store
//! sizes. Override any of them with a distribution config file when real
//! tables are available.

use super::{
    DistributionTable, ModelDistributions, AMOUNT_BINS, MONTHLY_OPS_BINS, STORE_SIZE_BINS,
};
use crate::real::{real, Real};

/// Hour-of-day raw weights. Sharp lunch spike at 13, dinner spike at 20.
const HOURLY_RAW: [f64; 24] = [
    0.10, 0.06, 0.04, 0.03, 0.03, 0.06, // 0-5: night trough
    0.20, 0.60, 1.40, 2.40, 3.20, 3.80, // 6-11: morning ramp
    3.60, 14.00, 4.00, 3.40, 3.00, 3.40, // 12-17: lunch spike at 13
    3.80, 4.00, 11.00, 4.40, 3.00, 0.80, // 18-23: dinner spike at 20
];

/// Day-of-week raw weights, Monday first. Sunday is depressed; Saturday is not.
const DAILY_RAW: [f64; 7] = [1.35, 1.30, 1.30, 1.35, 1.55, 1.60, 0.95];

pub fn default_hourly<R: Real>() -> DistributionTable<R> {
    let raw: Vec<R> = HOURLY_RAW.iter().map(|w| real(*w)).collect();
    DistributionTable::normalize(&raw).expect("static table is valid")
}

pub fn default_daily<R: Real>() -> DistributionTable<R> {
    let raw: Vec<R> = DAILY_RAW.iter().map(|w| real(*w)).collect();
    DistributionTable::normalize(&raw).expect("static table is valid")
}

/// Amounts: power-law decay over the 25-unit bins, with a 5x bump on the
/// 575-600 bin to mimic the pile-up below a 600-unit withdrawal cap.
pub fn default_quantity<R: Real>() -> DistributionTable<R> {
    let raw: Vec<R> = (0..AMOUNT_BINS)
        .map(|i| {
            let base = ((i + 1) as f64).powf(-1.35);
            let bump = if i == 23 { 5.0 } else { 1.0 };
            real(base * bump)
        })
        .collect();
    DistributionTable::normalize(&raw).expect("static table is valid")
}

/// Monthly operations per card: a shallow power law up to 20 operations and a
/// much steeper one beyond, so most activity sits with low-frequency cards.
pub fn default_num_ops<R: Real>() -> DistributionTable<R> {
    let raw: Vec<R> = (1..=MONTHLY_OPS_BINS)
        .map(|k| {
            let k = k as f64;
            let w = if k <= 20.0 {
                k.powf(-0.8)
            } else {
                20f64.powf(-0.8) * (k / 20.0).powf(-3.0)
            };
            real(w)
        })
        .collect();
    DistributionTable::normalize(&raw).expect("static table is valid")
}

/// Store sizes: heavy-tailed over the 20-transaction bins.
pub fn default_num_ops_stores<R: Real>() -> DistributionTable<R> {
    let raw: Vec<R> = (1..=STORE_SIZE_BINS)
        .map(|j| real((j as f64).powf(-1.1)))
        .collect();
    DistributionTable::normalize(&raw).expect("static table is valid")
}

pub fn default_distributions<R: Real>() -> ModelDistributions<R> {
    ModelDistributions::new(
        default_hourly(),
        default_daily(),
        default_quantity(),
        default_num_ops(),
        default_num_ops_stores(),
    )
    .expect("static tables have the right arities")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_defaults_are_valid_and_normalized() {
        let d = default_distributions::<f64>();
        for t in [
            &d.hourly,
            &d.daily,
            &d.quantity,
            &d.num_ops,
            &d.num_ops_stores,
        ] {
            assert!(t.is_normalized());
        }
    }

    #[test]
    fn hourly_peaks_sit_at_lunch_and_evening() {
        let w = default_hourly::<f64>();
        let w = w.weights();
        let max = w
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert_eq!(max, 13);
        assert!(w[20] > w[19] && w[20] > w[23]);
        assert!(w[3] < 0.01 && w[4] < 0.01, "night hours carry little mass");
    }

    #[test]
    fn sunday_is_the_quiet_day() {
        let w = default_daily::<f64>();
        let w = w.weights();
        assert!(w[6] < 1.0 / 7.0);
        assert!(w.iter().take(6).all(|d| *d > w[6]));
        assert!(
            w[5] >= *w
                .iter()
                .take(5)
                .fold(&0.0, |m, x| if x > m { x } else { m })
        );
    }

    #[test]
    fn quantity_has_the_cap_bump() {
        let w = default_quantity::<f64>();
        let w = w.weights();
        assert!(w[23] > w[22] && w[23] > w[24]);
        assert!(w[0] > w[10], "amounts decay overall");
    }

    #[test]
    fn num_ops_mean_is_low_double_digits() {
        let w = default_num_ops::<f64>();
        let mean: f64 = w
            .weights()
            .iter()
            .enumerate()
            .map(|(i, p)| (i + 1) as f64 * p)
            .sum();
        assert!(
            (8.0..16.0).contains(&mean),
            "mean monthly operations {mean}"
        );
    }
}
