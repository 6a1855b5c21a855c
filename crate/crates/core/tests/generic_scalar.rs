//! The numeric core must work unchanged on `f32`; the `f64` aliases are just
//! the default instantiation.

use cardflow_core::distmodel::{cpd, DistributionTable};
use cardflow_core::generator::{generate, GenerationConfig};
use cardflow_core::stats::{compute_marginals, tv_distance, ComputeOptions};
use cardflow_core::RandomStream;

#[test]
fn single_precision_tables_normalize_and_sample() {
    let table = DistributionTable::<f32>::normalize(&[1.0, 3.0, 4.0]).unwrap();
    assert!(table.is_normalized());
    assert_eq!(table.weights()[2], 0.5f32);

    let mut rng = RandomStream::new(5, 0);
    let mut counts = [0u32; 3];
    for _ in 0..30_000 {
        counts[table.sample_bin(&mut rng)] += 1;
    }
    let freq2 = f64::from(counts[2]) / 30_000.0;
    assert!((freq2 - 0.5).abs() < 0.02, "{freq2}");
}

#[test]
fn single_precision_exceedance_curve() {
    let curve = cpd::<f32>(&[1.0, 2.0, 3.0], &[0.0, 2.0, 5.0]).unwrap();
    assert_eq!(curve.probabilities()[0], 1.0);
    assert!((curve.probabilities()[1] - 1.0 / 3.0).abs() < 1e-6);
    assert_eq!(curve.probabilities()[2], 0.0);
    assert!(curve.is_monotone_non_increasing());
}

#[test]
fn single_precision_generation_matches_its_tables() {
    let config = GenerationConfig::<f32>::new(300, 80, 40, 6);
    let records = generate(&config).unwrap();
    assert!(!records.is_empty());
    let m = compute_marginals(records, &ComputeOptions::default()).unwrap();
    let total: u64 = m.hour_counts.iter().sum();
    let profile: Vec<f32> = m
        .hour_counts
        .iter()
        .map(|c| *c as f32 / total as f32)
        .collect();
    let tv = tv_distance(&profile, config.distributions.hourly.weights());
    assert!(tv < 0.1, "tv {tv}");
}
