//! Cross-module properties of the full generation pipeline.

use cardflow_core::distmodel::{amount_to_bin, DistributionTable, AMOUNT_BINS};
use cardflow_core::generator::{
    generate, initial_cards, initial_stores, GenerationConfig, SwapConfig,
};
use cardflow_core::stats::{compute_marginals, tv_distance, ComputeOptions};

/// Attribute independence: the amount a card spends must not depend on how
/// active the card is. Plug-in mutual information between the card's
/// activity quartile and the amount bin stays near zero.
#[test]
fn amounts_are_independent_of_card_activity() {
    let config = GenerationConfig::<f64>::new(2000, 300, 60, 31);
    let records = generate(&config).unwrap();
    assert!(records.len() > 20_000);

    let mut cards = initial_cards(&config).unwrap();
    cards.sort_by(|a, b| {
        a.expected_monthly_ops
            .partial_cmp(&b.expected_monthly_ops)
            .unwrap()
            .then(a.card_id.cmp(&b.card_id))
    });
    let mut quartile_of = vec![0usize; cards.len()];
    for (rank, card) in cards.iter().enumerate() {
        quartile_of[card.card_id as usize] = rank * 4 / cards.len();
    }

    let mut joint = vec![[0u64; AMOUNT_BINS]; 4];
    for rec in &records {
        joint[quartile_of[rec.card_id as usize]][amount_to_bin(rec.amount)] += 1;
    }

    let n = records.len() as f64;
    let mut row = [0.0f64; 4];
    let mut col = [0.0f64; AMOUNT_BINS];
    for (q, bins) in joint.iter().enumerate() {
        for (b, &c) in bins.iter().enumerate() {
            row[q] += c as f64 / n;
            col[b] += c as f64 / n;
        }
    }
    let mut mutual_information = 0.0;
    for (q, bins) in joint.iter().enumerate() {
        for (b, &c) in bins.iter().enumerate() {
            if c > 0 {
                let p = c as f64 / n;
                mutual_information += p * (p / (row[q] * col[b])).log2();
            }
        }
    }
    assert!(
        mutual_information < 0.01,
        "mutual information {mutual_information} bits"
    );
}

/// Store marginal: each store's share of transactions converges on its share
/// of the total size weight.
#[test]
fn store_shares_follow_size_weights() {
    let mut config = GenerationConfig::<f64>::new(2000, 1000, 300, 17);
    // Pin activity high so one run crosses a million transactions.
    config.distributions.num_ops = DistributionTable::degenerate(100, 49).unwrap();
    let records = generate(&config).unwrap();
    assert!(records.len() >= 1_000_000, "got {}", records.len());

    let stores = initial_stores(&config).unwrap();
    let weight_sum: f64 = stores.iter().map(|s| s.size_weight).sum();
    let reference: Vec<f64> = stores.iter().map(|s| s.size_weight / weight_sum).collect();

    let mut counts = vec![0u64; stores.len()];
    for rec in &records {
        counts[rec.store_id as usize] += 1;
    }
    let n = records.len() as f64;
    let empirical: Vec<f64> = counts.iter().map(|c| *c as f64 / n).collect();

    let tv = tv_distance(&empirical, &reference);
    assert!(tv < 0.02, "tv {tv}");
}

/// The count-weighted and amount-weighted day-of-week profiles agree, because
/// amounts never correlate with days by construction.
#[test]
fn amount_weighted_day_profile_matches_count_weighted() {
    let config = GenerationConfig::<f64>::new(2000, 500, 100, 23);
    let records = generate(&config).unwrap();
    let m = compute_marginals(records, &ComputeOptions::default()).unwrap();

    let count_total: u64 = m.dow_counts.iter().sum();
    let amount_total: f64 = m.dow_amounts.iter().sum();
    let count_profile: Vec<f64> = m
        .dow_counts
        .iter()
        .map(|c| *c as f64 / count_total as f64)
        .collect();
    let amount_profile: Vec<f64> = m.dow_amounts.iter().map(|a| a / amount_total).collect();

    assert!((amount_profile.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    let tv = tv_distance(&count_profile, &amount_profile);
    assert!(tv < 0.05, "tv {tv}");
}

/// The inter-transaction gap histogram develops a 24-hour local maximum even
/// though nothing in the engine hard-codes one.
#[test]
fn gap_histogram_peaks_at_one_day() {
    let config = GenerationConfig::<f64>::new(2000, 1000, 100, 8);
    let records = generate(&config).unwrap();
    let m = compute_marginals(records, &ComputeOptions::default()).unwrap();
    assert!(m.total_gaps() > 10_000);
    assert!(m.gap_peak_at(24, 4), "no 24h peak");
    assert!(m.gap_peak_at(48, 3), "no 48h peak");
}

/// Burst conservation at the generator level: long-run mean daily counts stay
/// on the configured rate for every card.
#[test]
fn burst_mode_conserves_long_run_activity() {
    let mut config = GenerationConfig::<f64>::new(20, 10, 10_000, 3);
    config.distributions.num_ops = DistributionTable::degenerate(100, 14).unwrap(); // 15/month
    config.distributions.daily = DistributionTable::uniform(7).unwrap();
    config.burst.enabled = true;
    config.burst.overdispersion = 1.0;
    config.burst.debt_decay = 0.1;

    let mut per_card = [0u64; 20];
    let records = generate(&config).unwrap();
    for rec in &records {
        per_card[rec.card_id as usize] += 1;
    }
    for (card, &count) in per_card.iter().enumerate() {
        let mean_daily = count as f64 / 10_000.0;
        let err = (mean_daily - 0.5).abs() / 0.5;
        assert!(err < 0.02, "card {card}: mean {mean_daily} (err {err})");
    }
}

/// Swaps change which card carries which activity without touching anything
/// else the marginals can see.
#[test]
fn swapped_runs_keep_global_marginals() {
    let mut config = GenerationConfig::<f64>::new(500, 100, 60, 19);
    config.swap = SwapConfig {
        probability: 0.2,
        similarity_ratio: 3.0,
    };
    let records = generate(&config).unwrap();
    let m = compute_marginals(records, &ComputeOptions::default()).unwrap();

    let total: u64 = m.hour_counts.iter().sum();
    let hour_profile: Vec<f64> = m
        .hour_counts
        .iter()
        .map(|c| *c as f64 / total as f64)
        .collect();
    let tv = tv_distance(&hour_profile, config.distributions.hourly.weights());
    assert!(tv < 0.05, "tv {tv}");
}
